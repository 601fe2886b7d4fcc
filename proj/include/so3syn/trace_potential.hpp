// Modified trace potentials on SO(3): construction from weighted inertial
// vectors, evaluation, gradient, and the critical-point drop function Delta.
#pragma once

#include <optional>
#include <vector>

#include "so3syn/so3.hpp"

namespace so3syn {

/// One weighted unit vector known in the inertial frame.
struct InertialVector {
    Vec3 a;
    double w = 1.0;
};

/// n >= 2 weighted unit vectors, at least two noncollinear.
struct InertialVectorSet {
    std::vector<InertialVector> items;

    /// Throws if a vector is not unit length, a weight is nonpositive, or
    /// every pair is collinear.
    void validate() const;
};

/// Eigenvalue-multiplicity classes of the weight matrix, one per
/// direction-selection rule. The two-equal classes distinguish whether the
/// repeated pair dominates a positive or a merely nonnegative remainder.
enum class ShapeClass {
    AllEqual,             // lam1 = lam2 = lam3 > 0
    TwoLargeEqualPosMin,  // lam1 = lam2 > lam3 > 0
    TwoLargeEqualAnyMin,  // lam1 = lam2 > lam3 >= 0
    TwoSmallEqual,        // 0 < lam1 = lam2 < lam3
    AllDistinct,          // 0 <= lam1 < lam2 < lam3
};

const char* shape_class_name(ShapeClass c);

/// Eigen-labels reordered to the per-class convention: for the two-equal
/// classes v[0], v[1] span the repeated pair and v[2] is the distinct
/// direction; for AllDistinct the eigenvalues of M ascend.
struct ShapeClassification {
    ShapeClass cls = ShapeClass::AllEqual;
    std::array<Vec3, 3> v{};
    std::array<double, 3> lam_m{};
    std::array<double, 3> lam_g{};
    bool near_degenerate = false;  // a gap within 10x of the multiplicity tolerance
};

/// Assign the multiplicity class from an ascending spectrum of M.
/// `mult_tol` is relative to the largest eigenvalue magnitude.
ShapeClassification classify(const Spectrum3& spec_m, double mult_tol = tol::structural);

/// Symmetric weight matrix M with its induced G = tr(M) I - M.
/// G must be positive definite (equivalently rank M >= 2).
class TraceShape {
public:
    static TraceShape from_matrix(const Mat3& m, double mult_tol = tol::structural);
    static TraceShape from_vectors(const InertialVectorSet& vs, double mult_tol = tol::structural);

    const Mat3& m() const { return m_; }
    const Mat3& g() const { return g_; }
    const Spectrum3& spec_m() const { return spec_m_; }
    const Spectrum3& spec_g() const { return spec_g_; }
    const ShapeClassification& classification() const { return cls_; }
    ShapeClass shape_class() const { return cls_.cls; }

    double lambda_max_g() const { return spec_g_.lambda[2]; }
    double lambda_min_g() const { return spec_g_.lambda[0]; }
    /// xi = lambda_min(G) / lambda_max(G), in (0, 1].
    double xi() const { return spec_g_.lambda[0] / spec_g_.lambda[2]; }

    /// Potential value tr(M (I - X)), in [0, 2 lambda_max(G)], zero iff X = I.
    double value(const Rotation& x) const;

    /// Left-trivialized gradient axial(M X); vanishes exactly on the critical
    /// set {I} plus the half-turns about eigenvectors of M.
    Vec3 gradient(const Rotation& x) const;

    /// Drop coefficient of the potential at a half-turn critical point:
    /// value(R_a(pi,v) R_a(t,u)) = 2 lam_G(v) - (1 - cos t) delta(v,u).
    /// `v` must be a unit eigenvector of M (within eig_tol).
    double delta(const Vec3& v, const Vec3& u, double eig_tol = tol::structural) const;

    /// G-eigenvalue associated with an eigenvector of M.
    double lambda_g_of(const Vec3& v, double eig_tol = tol::structural) const;

private:
    TraceShape() = default;
    Mat3 m_, g_;
    Spectrum3 spec_m_, spec_g_;
    ShapeClassification cls_;
};

}  // namespace so3syn
