#include "so3syn/so3.hpp"

#include <algorithm>

namespace so3syn {

namespace {

// Flip sign so the first component above threshold is positive.
Vec3 canonical_sign(const Vec3& v) {
    for (int i = 0; i < 3; ++i) {
        if (std::abs(v[i]) > 1e-9) return v[i] > 0.0 ? v : -v;
    }
    return v;
}

}  // namespace

Mat3 inverse(const Mat3& m) {
    double d = det(m);
    double scale = frobenius_norm(m);
    if (std::abs(d) <= 1e-14 * scale * scale * scale)
        throw std::invalid_argument("inverse: singular matrix");
    Mat3 inv;
    inv(0, 0) = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
    inv(0, 1) = m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2);
    inv(0, 2) = m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1);
    inv(1, 0) = m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2);
    inv(1, 1) = m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0);
    inv(1, 2) = m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2);
    inv(2, 0) = m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0);
    inv(2, 1) = m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1);
    inv(2, 2) = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    return inv * (1.0 / d);
}

Vec3 vee(const Mat3& m, double tolerance) {
    double asym = frobenius_norm(m + m.transpose());
    if (asym > tolerance * std::max(1.0, frobenius_norm(m)))
        throw std::invalid_argument("vee: matrix is not antisymmetric");
    return {m(2, 1), m(0, 2), m(1, 0)};
}

Rotation Rotation::from_matrix(const Mat3& m, double tolerance) {
    Mat3 gram = m.transpose() * m;
    double ortho_err = frobenius_norm(gram - Mat3::identity());
    if (ortho_err > tolerance)
        throw std::invalid_argument("Rotation: R^T R != I (error " + std::to_string(ortho_err) + ")");
    double d = det(m);
    if (std::abs(d - 1.0) > tolerance)
        throw std::invalid_argument("Rotation: det != 1 (det " + std::to_string(d) + ")");
    return from_matrix_unchecked(m);
}

Rotation rodrigues(double angle, const Vec3& axis) {
    Vec3 u = axis;
    double n2 = dot(u, u);
    if (std::abs(n2 - 1.0) > tol::algebraic) u = normalized(u);
    Mat3 k = hat(u);
    Mat3 r = Mat3::identity() + std::sin(angle) * k + (1.0 - std::cos(angle)) * (k * k);
    return Rotation::from_matrix_unchecked(r);
}

AxisAngle log_axis_angle(const Rotation& rot) {
    const Mat3& r = rot.matrix();
    double c = std::max(-1.0, std::min(1.0, 0.5 * (trace(r) - 1.0)));
    Vec3 ax = axial(r);                         // = sin(angle) * axis for an exact rotation
    double s_ax = std::min(1.0, norm(ax));

    // acos(c) is ill-conditioned where |c| ~ 1; there the angle comes from
    // the antisymmetric part instead
    double angle;
    if (c >= 0.9) angle = std::asin(s_ax);
    else if (c <= -0.9) angle = M_PI - std::asin(s_ax);
    else angle = std::acos(c);

    if (c > -0.9) {
        if (s_ax > 1e-300) return {normalized(ax), angle};
        return {{1.0, 0.0, 0.0}, angle};  // identity: axis by convention
    }
    // angle near pi: recover the axis from the symmetric part,
    // u u^T = ((R + R^T)/2 - c I) / (1 - c), dominant diagonal picks the column
    Mat3 uut = ((r + r.transpose()) * 0.5 - c * Mat3::identity()) * (1.0 / (1.0 - c));
    int k = 0;
    if (uut(1, 1) > uut(k, k)) k = 1;
    if (uut(2, 2) > uut(k, k)) k = 2;
    Vec3 u = uut.col(k) / std::sqrt(std::max(uut(k, k), 1e-30));
    u = normalized(u);
    if (norm(ax) > 1e-12) {
        if (dot(ax, u) < 0.0) u = -u;  // keep consistency with the skew part
    } else {
        u = canonical_sign(u);
    }
    return {u, angle};
}

namespace {

// One column of (A - la I)(A - lb I) is proportional to the eigenvector of the
// remaining eigenvalue; fall back to a row cross product if they all degenerate.
Vec3 eigvec_from_products(const Mat3& a, double lc, double la, double lb) {
    Mat3 c = (a - la * Mat3::identity()) * (a - lb * Mat3::identity());
    int best = 0;
    double best_n = -1.0;
    for (int j = 0; j < 3; ++j) {
        double n = norm(c.col(j));
        if (n > best_n) {
            best_n = n;
            best = j;
        }
    }
    double scale = std::max(1.0, frobenius_norm(a));
    if (best_n > 1e-12 * scale * scale) return normalized(c.col(best));

    Mat3 b = a - lc * Mat3::identity();
    Vec3 r01 = cross(b.row(0), b.row(1));
    Vec3 r02 = cross(b.row(0), b.row(2));
    Vec3 r12 = cross(b.row(1), b.row(2));
    Vec3 w = r01;
    if (norm(r02) > norm(w)) w = r02;
    if (norm(r12) > norm(w)) w = r12;
    return normalized(w);
}

// Unit vector orthogonal to w built from the canonical axis least aligned
// with w; keeps eigenbases of degenerate pairs deterministic (diagonal
// matrices get coordinate axes).
Vec3 canonical_orthogonal(const Vec3& w) {
    int k = 0;
    double best = std::abs(w.x);
    if (std::abs(w.y) < best) {
        best = std::abs(w.y);
        k = 1;
    }
    if (std::abs(w.z) < best) k = 2;
    Vec3 e{};
    e[k] = 1.0;
    return normalized(e - dot(e, w) * w);
}

double char_poly(const Mat3& a, double lam) {
    return det(a - lam * Mat3::identity());
}

// d/dlam det(A - lam I) = -(sum of principal 2x2 minors of A - lam I)
double char_poly_deriv(const Mat3& a, double lam) {
    Mat3 b = a - lam * Mat3::identity();
    double m0 = b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1);
    double m1 = b(0, 0) * b(2, 2) - b(0, 2) * b(2, 0);
    double m2 = b(0, 0) * b(1, 1) - b(0, 1) * b(1, 0);
    return -(m0 + m1 + m2);
}

}  // namespace

Spectrum3 sym_eigen(const Mat3& a_in, double tolerance) {
    double scale = std::max(1.0, frobenius_norm(a_in));
    if (frobenius_norm(a_in - a_in.transpose()) > tolerance * scale)
        throw std::invalid_argument("sym_eigen: matrix is not symmetric");
    Mat3 a = (a_in + a_in.transpose()) * 0.5;

    Spectrum3 out;
    double q = trace(a) / 3.0;
    Mat3 b = a - q * Mat3::identity();
    double p = std::sqrt(std::max(0.0, frobenius_norm(b) * frobenius_norm(b) / 6.0));

    if (p < 1e-14 * scale) {
        out.lambda = {q, q, q};
        out.v = {Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
        return out;
    }

    double r = det(b * (1.0 / p)) / 2.0;
    r = std::max(-1.0, std::min(1.0, r));
    double phi = std::acos(r) / 3.0;
    double l2 = q + 2.0 * p * std::cos(phi);               // largest
    double l0 = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);  // smallest
    double l1 = 3.0 * q - l0 - l2;

    // One Newton step per eigenvalue, skipped near multiple roots where the
    // derivative degenerates.
    double spread = l2 - l0;
    for (double* lam : {&l0, &l1, &l2}) {
        double d = char_poly_deriv(a, *lam);
        if (std::abs(d) > 1e-8 * scale * scale) {
            double step = char_poly(a, *lam) / d;
            if (std::abs(step) < 0.25 * std::max(spread, 1e-30)) *lam -= step;
        }
    }
    std::array<double, 3> lam = {l0, l1, l2};
    std::sort(lam.begin(), lam.end());
    out.lambda = lam;

    double pair_tol = 1e-6 * scale;
    double g01 = lam[1] - lam[0];
    double g12 = lam[2] - lam[1];

    if (g01 <= pair_tol && g12 <= pair_tol) {
        out.v = {Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
    } else if (g01 <= pair_tol) {
        // lower pair degenerate, lam[2] isolated
        Vec3 w = canonical_sign(eigvec_from_products(a, lam[2], lam[0], lam[1]));
        Vec3 v0 = canonical_orthogonal(w);
        out.v = {v0, cross(w, v0), w};
    } else if (g12 <= pair_tol) {
        // upper pair degenerate, lam[0] isolated
        Vec3 w = canonical_sign(eigvec_from_products(a, lam[0], lam[1], lam[2]));
        Vec3 v1 = canonical_orthogonal(w);
        out.v = {w, v1, cross(w, v1)};
    } else {
        Vec3 v0 = canonical_sign(eigvec_from_products(a, lam[0], lam[1], lam[2]));
        Vec3 v2 = eigvec_from_products(a, lam[2], lam[0], lam[1]);
        v2 = canonical_sign(normalized(v2 - dot(v2, v0) * v0));
        out.v = {v0, cross(v2, v0), v2};
    }

    // Rayleigh-quotient polish: the characteristic polynomial splits exact
    // double roots by ~sqrt(eps) * eps, the quotients of the extracted
    // orthonormal basis do not
    for (int i = 0; i < 3; ++i) out.lambda[i] = dot(out.v[i], a * out.v[i]);
    for (int i = 0; i < 2; ++i) {
        int m = i;
        for (int j = i + 1; j < 3; ++j)
            if (out.lambda[j] < out.lambda[m]) m = j;
        if (m != i) {
            std::swap(out.lambda[i], out.lambda[m]);
            std::swap(out.v[i], out.v[m]);
        }
    }
    out.v[2] = cross(out.v[0], out.v[1]);  // restore handedness after sorting
    return out;
}

Rotation project_to_so3(const Mat3& a) {
    if (!is_finite(a)) throw std::invalid_argument("project_to_so3: non-finite input");
    if (det(a) <= 0.0) throw std::invalid_argument("project_to_so3: det <= 0");

    Spectrum3 s = sym_eigen(a.transpose() * a, 1e-6);
    Mat3 inv_sqrt = Mat3::zero();
    for (int i = 0; i < 3; ++i) {
        if (s.lambda[i] <= 0.0) throw std::invalid_argument("project_to_so3: rank-deficient input");
        inv_sqrt = inv_sqrt + outer(s.v[i], s.v[i]) * (1.0 / std::sqrt(s.lambda[i]));
    }
    Mat3 r = a * inv_sqrt;
    // polish: one orthonormalization sweep removes the residual O(eps) drift
    r = r * ((Mat3::identity() * 3.0 - r.transpose() * r) * 0.5);
    return Rotation::from_matrix(r, 1e-7);
}

}  // namespace so3syn
