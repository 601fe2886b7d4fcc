// Dependency-free 3-vector / 3x3-matrix primitives and SO(3) parametrizations.
#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace so3syn {

namespace tol {
// Central tolerance knobs. "structural" gates invariants of constructed
// objects (orthonormality, symmetry); "algebraic" gates exact identities.
inline constexpr double structural = 1e-9;
inline constexpr double algebraic = 1e-12;
}  // namespace tol

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
    double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }
inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline Vec3 normalized(const Vec3& v) {
    double n = norm(v);
    if (n == 0.0) throw std::invalid_argument("normalized: zero vector");
    return v / n;
}
inline bool is_finite(const Vec3& v) {
    return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

/// Row-major 3x3 matrix.
struct Mat3 {
    std::array<double, 9> a{};  // a[3*r + c]

    double operator()(int r, int c) const { return a[3 * r + c]; }
    double& operator()(int r, int c) { return a[3 * r + c]; }

    static Mat3 zero() { return {}; }
    static Mat3 identity() {
        Mat3 m;
        m(0, 0) = m(1, 1) = m(2, 2) = 1.0;
        return m;
    }
    static Mat3 diag(double d0, double d1, double d2) {
        Mat3 m;
        m(0, 0) = d0; m(1, 1) = d1; m(2, 2) = d2;
        return m;
    }
    /// Columns c0,c1,c2.
    static Mat3 from_cols(const Vec3& c0, const Vec3& c1, const Vec3& c2) {
        Mat3 m;
        for (int r = 0; r < 3; ++r) {
            m(r, 0) = c0[r]; m(r, 1) = c1[r]; m(r, 2) = c2[r];
        }
        return m;
    }

    Mat3 operator+(const Mat3& o) const {
        Mat3 m;
        for (int i = 0; i < 9; ++i) m.a[i] = a[i] + o.a[i];
        return m;
    }
    Mat3 operator-(const Mat3& o) const {
        Mat3 m;
        for (int i = 0; i < 9; ++i) m.a[i] = a[i] - o.a[i];
        return m;
    }
    Mat3 operator*(double s) const {
        Mat3 m;
        for (int i = 0; i < 9; ++i) m.a[i] = a[i] * s;
        return m;
    }
    Mat3 operator*(const Mat3& o) const {
        Mat3 m;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                m(r, c) = (*this)(r, 0) * o(0, c) + (*this)(r, 1) * o(1, c) + (*this)(r, 2) * o(2, c);
        return m;
    }
    Vec3 operator*(const Vec3& v) const {
        return {a[0] * v.x + a[1] * v.y + a[2] * v.z,
                a[3] * v.x + a[4] * v.y + a[5] * v.z,
                a[6] * v.x + a[7] * v.y + a[8] * v.z};
    }
    Mat3 transpose() const {
        Mat3 m;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) m(r, c) = (*this)(c, r);
        return m;
    }
    Vec3 col(int c) const { return {(*this)(0, c), (*this)(1, c), (*this)(2, c)}; }
    Vec3 row(int r) const { return {(*this)(r, 0), (*this)(r, 1), (*this)(r, 2)}; }
};

inline Mat3 operator*(double s, const Mat3& m) { return m * s; }
inline double trace(const Mat3& m) { return m(0, 0) + m(1, 1) + m(2, 2); }
inline double det(const Mat3& m) {
    return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
         - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
         + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}
Mat3 inverse(const Mat3& m);
inline Mat3 outer(const Vec3& a, const Vec3& b) {
    Mat3 m;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) m(r, c) = a[r] * b[c];
    return m;
}
inline double frobenius_norm(const Mat3& m) {
    double s = 0.0;
    for (double e : m.a) s += e * e;
    return std::sqrt(s);
}
inline bool is_finite(const Mat3& m) {
    for (double e : m.a)
        if (!std::isfinite(e)) return false;
    return true;
}

/// hat(v) w = v x w (skew-symmetric bracket).
inline Mat3 hat(const Vec3& v) {
    Mat3 m;
    m(0, 1) = -v.z; m(0, 2) = v.y;
    m(1, 0) = v.z;  m(1, 2) = -v.x;
    m(2, 0) = -v.y; m(2, 1) = v.x;
    return m;
}

/// Inverse of hat. Input must be antisymmetric within `tolerance`.
Vec3 vee(const Mat3& m, double tolerance = tol::structural);

/// Axial vector of the antisymmetric part: vee((A - A^T)/2). Defined for any A.
inline Vec3 axial(const Mat3& m) {
    return {0.5 * (m(2, 1) - m(1, 2)), 0.5 * (m(0, 2) - m(2, 0)), 0.5 * (m(1, 0) - m(0, 1))};
}

/// Orthonormal rotation matrix, det +1. Validated on checked construction.
class Rotation {
public:
    Rotation() : m_(Mat3::identity()) {}

    static Rotation identity() { return Rotation(); }

    /// Validates R^T R = I and det R = 1 within `tolerance` (Frobenius).
    static Rotation from_matrix(const Mat3& m, double tolerance = tol::structural);

    /// Caller guarantees orthonormality (products of rotations, Rodrigues output).
    static Rotation from_matrix_unchecked(const Mat3& m) {
        Rotation r;
        r.m_ = m;
        return r;
    }

    const Mat3& matrix() const { return m_; }
    Rotation inverse() const { return from_matrix_unchecked(m_.transpose()); }
    Vec3 operator*(const Vec3& v) const { return m_ * v; }
    friend Rotation operator*(const Rotation& a, const Rotation& b) {
        return from_matrix_unchecked(a.m_ * b.m_);
    }

private:
    Mat3 m_;
};

/// Rotation angle in [0, pi] and unit axis.
struct AxisAngle {
    Vec3 axis{1.0, 0.0, 0.0};
    double angle = 0.0;
};

/// R = I + sin(t) u^ + (1 - cos(t)) (u^)^2. Axis must be unit length.
Rotation rodrigues(double angle, const Vec3& axis);
inline Rotation rodrigues(const AxisAngle& aa) { return rodrigues(aa.angle, aa.axis); }

/// Inverse of rodrigues. Angle in [0, pi]; axis sign canonicalized
/// (first component above tolerance is positive; at angle 0 the axis is e1).
AxisAngle log_axis_angle(const Rotation& r);

/// Eigen-decomposition of a symmetric 3x3 matrix, eigenvalues ascending,
/// eigenvectors orthonormal and right-handed (v2 = v0 x v1).
struct Spectrum3 {
    std::array<double, 3> lambda{};
    std::array<Vec3, 3> v{};
};

/// Closed-form characteristic-polynomial eigensolver with one Newton polish
/// step per eigenvalue. Input must be symmetric within `tolerance`.
Spectrum3 sym_eigen(const Mat3& a, double tolerance = tol::structural);

/// Nearest rotation in the Frobenius sense (polar factor). Requires det > 0.
Rotation project_to_so3(const Mat3& a);

/// Geodesic distance from identity: arccos((tr R - 1)/2), in [0, pi].
inline double rotation_angle(const Rotation& r) {
    double c = 0.5 * (trace(r.matrix()) - 1.0);
    return std::acos(std::max(-1.0, std::min(1.0, c)));
}

}  // namespace so3syn
