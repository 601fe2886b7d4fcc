#include "so3syn/trace_potential.hpp"

#include <algorithm>

namespace so3syn {

void InertialVectorSet::validate() const {
    if (items.size() < 2)
        throw std::invalid_argument("InertialVectorSet: need at least two vectors");
    for (const auto& it : items) {
        if (!is_finite(it.a) || std::abs(norm(it.a) - 1.0) > tol::algebraic)
            throw std::invalid_argument("InertialVectorSet: vectors must be unit length");
        if (!(it.w > 0.0))
            throw std::invalid_argument("InertialVectorSet: weights must be positive");
    }
    bool noncollinear = false;
    for (size_t i = 0; i < items.size() && !noncollinear; ++i)
        for (size_t j = i + 1; j < items.size() && !noncollinear; ++j)
            if (norm(cross(items[i].a, items[j].a)) > 1e-9) noncollinear = true;
    if (!noncollinear)
        throw std::invalid_argument("InertialVectorSet: all vectors are collinear");
}

const char* shape_class_name(ShapeClass c) {
    switch (c) {
        case ShapeClass::AllEqual: return "item1 (all eigenvalues equal)";
        case ShapeClass::TwoLargeEqualPosMin: return "item2 (two equal larger, positive minimum)";
        case ShapeClass::TwoLargeEqualAnyMin: return "item3 (two equal larger, nonnegative minimum)";
        case ShapeClass::TwoSmallEqual: return "item4 (two equal smaller)";
        case ShapeClass::AllDistinct: return "item5 (all eigenvalues distinct)";
    }
    return "?";
}

ShapeClassification classify(const Spectrum3& spec_m, double mult_tol) {
    const auto& lam = spec_m.lambda;
    double scale = std::max({std::abs(lam[0]), std::abs(lam[2]), 1e-30});
    double g01 = (lam[1] - lam[0]) / scale;
    double g12 = (lam[2] - lam[1]) / scale;
    bool eq01 = g01 < mult_tol;
    bool eq12 = g12 < mult_tol;

    ShapeClassification out;
    out.near_degenerate = (!eq01 && g01 < 10.0 * mult_tol) || (!eq12 && g12 < 10.0 * mult_tol);

    double tr = lam[0] + lam[1] + lam[2];
    auto fill = [&](int i0, int i1, int i2) {
        out.v = {spec_m.v[i0], spec_m.v[i1], spec_m.v[i2]};
        out.lam_m = {lam[i0], lam[i1], lam[i2]};
        out.lam_g = {tr - lam[i0], tr - lam[i1], tr - lam[i2]};
    };

    if (eq01 && eq12) {
        out.cls = ShapeClass::AllEqual;
        fill(0, 1, 2);
    } else if (eq12) {
        // repeated larger pair first, distinct smaller eigenvalue last;
        // (v1, v2, v0) of a right-handed frame is right-handed again
        out.cls = std::abs(lam[0]) <= mult_tol * scale ? ShapeClass::TwoLargeEqualAnyMin
                                                       : ShapeClass::TwoLargeEqualPosMin;
        fill(1, 2, 0);
    } else if (eq01) {
        out.cls = ShapeClass::TwoSmallEqual;
        fill(0, 1, 2);
    } else {
        out.cls = ShapeClass::AllDistinct;
        fill(0, 1, 2);
    }
    return out;
}

TraceShape TraceShape::from_matrix(const Mat3& m, double mult_tol) {
    TraceShape s;
    s.m_ = (m + m.transpose()) * 0.5;
    s.spec_m_ = sym_eigen(m);  // throws on asymmetry
    s.g_ = trace(s.m_) * Mat3::identity() - s.m_;
    s.spec_g_ = sym_eigen(s.g_);

    double scale = std::max(1.0, std::abs(trace(s.m_)));
    if (s.spec_g_.lambda[0] <= tol::structural * scale)
        throw std::invalid_argument(
            "TraceShape: G = tr(M) I - M is not positive definite (rank M < 2)");
    if (s.spec_m_.lambda[0] < -tol::structural * scale)
        throw std::invalid_argument("TraceShape: M must be positive semi-definite");

    s.cls_ = classify(s.spec_m_, mult_tol);
    return s;
}

TraceShape TraceShape::from_vectors(const InertialVectorSet& vs, double mult_tol) {
    vs.validate();
    Mat3 m = Mat3::zero();
    for (const auto& it : vs.items) m = m + it.w * outer(it.a, it.a);
    return from_matrix(m, mult_tol);
}

double TraceShape::value(const Rotation& x) const {
    const Mat3& r = x.matrix();
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s += m_(i, j) * r(j, i);
    return trace(m_) - s;
}

Vec3 TraceShape::gradient(const Rotation& x) const { return axial(m_ * x.matrix()); }

double TraceShape::lambda_g_of(const Vec3& v_in, double eig_tol) const {
    Vec3 v = normalized(v_in);
    double lam = dot(v, m_ * v);
    double resid = norm(m_ * v - lam * v);
    if (resid > eig_tol * std::max(1.0, frobenius_norm(m_)) * 1e3)
        throw std::invalid_argument("TraceShape: v is not an eigenvector of M");
    return trace(m_) - lam;
}

double TraceShape::delta(const Vec3& v_in, const Vec3& u_in, double eig_tol) const {
    Vec3 v = normalized(v_in);
    Vec3 u = normalized(u_in);
    lambda_g_of(v, eig_tol);  // eigenvector gate

    const auto& lab = cls_;
    switch (lab.cls) {
        case ShapeClass::AllEqual:
            return lab.lam_g[0] * dot(v, u) * dot(v, u);

        case ShapeClass::TwoLargeEqualPosMin:
        case ShapeClass::TwoLargeEqualAnyMin:
        case ShapeClass::TwoSmallEqual: {
            const Vec3& v3 = lab.v[2];  // distinct direction
            double lam_pair = lab.lam_g[0];
            double lam_dist = lab.lam_g[2];
            double uv3 = dot(u, v3);
            double pp = std::max(0.0, 1.0 - uv3 * uv3);  // |projection of u on the pair plane|^2
            if (std::abs(dot(v, v3)) > 0.5) {
                return lam_dist - lam_pair * pp;
            }
            // v lies in the repeated eigenplane; pp sin^2(angle(v, u_perp)) = pp - (v.u)^2
            double t = dot(v, u) - dot(v, v3) * uv3;
            return pp * lam_pair - lam_dist * (pp - t * t);
        }

        case ShapeClass::AllDistinct: {
            int i = 0;
            double best = 0.0;
            for (int k = 0; k < 3; ++k) {
                double a = std::abs(dot(v, lab.v[k]));
                if (a > best) {
                    best = a;
                    i = k;
                }
            }
            int j = (i + 1) % 3, k = (i + 2) % 3;
            double uj = dot(u, lab.v[j]), uk = dot(u, lab.v[k]);
            return lab.lam_g[i] - uj * uj * lab.lam_g[k] - uk * uk * lab.lam_g[j];
        }
    }
    return 0.0;
}

}  // namespace so3syn
