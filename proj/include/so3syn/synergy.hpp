// Centrally synergistic potential families built from a single modified
// trace function by multi-direction angular warping, with closed-form and
// numerically certified lower bounds on the switching gap.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "so3syn/trace_potential.hpp"

namespace so3syn {

/// Warping directions u_q, q = 0..|U|-1, and for each q the index subset
/// peers[q] over which the refined gap is evaluated.
struct WarpingDirections {
    std::vector<Vec3> u;
    std::vector<std::vector<int>> peers;

    int size() const { return static_cast<int>(u.size()); }
};

/// Direction sets per multiplicity class:
///   item1: +-v1, +-v2, +-v3, peers = the four orthogonal directions
///   item2: +-v1, +-v2 (the repeated pair), peers = the two orthogonal ones
///   item3: six directions at pi/3 spacing in the repeated eigenplane,
///          peers = {-u_q} plus the two with u_p . u_q = 1/2
///   item4: {u, -u} with sin^2(angle to v3) = min(1, lamG_dist/lamG_pair)/2
///   item5: {u, -u} maximizing min(delta(v2,u), delta(v3,u)) on a 1-degree
///          hemisphere grid; throws if no direction gives a positive margin
/// `forced` may widen item2 to item3 on a shape that admits both.
WarpingDirections select_directions(const TraceShape& shape,
                                    std::optional<ShapeClass> forced = {});

/// Upper bound on the warping gain: 1 / sqrt(6 - max(1, 4 xi^2)).
double feasible_gain_bound(double xi);

/// Closed-form gap lower bound; defined for items 1-3 only (throws otherwise).
double gap_bound_closed_form(const TraceShape& shape, ShapeClass effective, double k);

/// Grid minimum over [0, pi] of max{4(xi - sin^2 t), xi - sin^2(t +- pi/3)};
/// equals xi - 1/4 for xi in [1/2, 1]. The grid includes the endpoints and
/// the midpoint, where the minimum sits.
double min_warp_envelope(double xi, long grid_points = 1000000);

/// An unwanted critical point of family member q on eigenvector branch v.
struct CriticalPointRecord {
    int q = 0;
    Vec3 v;
    Rotation y;
    double psi_at_y = 0.0;
    double theta_at_y = 0.0;
    double refined_gap = 0.0;
    double full_gap = 0.0;
    double rho_norm = 0.0;
};

struct CertificationReport {
    std::string shape_class;
    double k = 0.0;
    double xi = 0.0;
    double delta_bar = 0.0;
    double delta_hyst = 0.0;
    std::optional<double> closed_form;
    int branch_grid = 0;
    long record_count = 0;
    double min_refined_gap = 0.0;
    double min_full_gap = 0.0;
    int worst_q = 0;
    Vec3 worst_v;
    double max_rho_norm = 0.0;
    double min_theta = 0.0;
    double max_theta = 0.0;
    bool passed = false;

    std::string to_text() const;
};

/// Warped family V(X,q) = Psi_M(X R_a(theta(X), u_q)) with
/// theta(X) = 2 asin(k Psi_M(X) / (2 lamG_max)), hysteresis levels
/// delta(q) < delta_bar, and the feedback vector used by the controller.
class SynergisticFamily {
public:
    /// Builds directions, certifies or evaluates the gap bound, and sets
    /// delta(q) = delta_fraction * delta_bar. Throws if k violates the gain
    /// bound, the class override is incompatible, or no positive gap exists.
    static SynergisticFamily make(const TraceShape& shape, double k,
                                  double delta_fraction = 0.8,
                                  std::optional<ShapeClass> class_override = {},
                                  int branch_grid = 720);

    const TraceShape& shape() const { return shape_; }
    const WarpingDirections& directions() const { return dirs_; }
    ShapeClass effective_class() const { return effective_class_; }
    int size() const { return dirs_.size(); }
    double gain() const { return k_; }
    double delta_bar() const { return delta_bar_; }
    double delta_hyst(int q) const { return delta_hyst_.at(q); }
    double min_delta_hyst() const;

    /// Override per-member hysteresis levels; each must lie in (0, delta_bar).
    void set_delta_hyst(std::vector<double> delta);

    /// Warping angle, in [0, 2 asin(k)] contained in [0, pi/2).
    double warp_angle(const Rotation& x) const;

    /// T(X,q) = X R_a(theta(X), u_q).
    Rotation warp(const Rotation& x, int q) const;

    /// Rate transport matrix: d/dt T = T (Theta w)^ along Xdot = X w^.
    /// Nonsingular everywhere for a feasible gain.
    Mat3 warp_jacobian(const Rotation& x, int q) const;

    /// V(X,q), nonnegative, zero iff X = I.
    double value(const Rotation& x, int q) const;

    /// rho_V(X,q) = Theta(X,q)^T axial(M T(X,q)); the directional derivative
    /// of value along Xdot = X w^ is 2 rho_V . w.
    Vec3 gradient(const Rotation& x, int q) const;

    /// V(X,q) - min over peers[q] and q itself (clamped at zero).
    double refined_gap(const Rotation& x, int q) const;

    /// V(X,q) - min over the whole family.
    double full_gap(const Rotation& x, int q) const;

    /// Lowest-index minimizer of V(X, .) over the family.
    int argmin_member(const Rotation& x) const;

    /// Axis-angle of R_a(theta(Y), -u_q) R_a(theta(Y), u_p), the net warp
    /// between members p and q at Y. Requires p != q.
    AxisAngle composed_rotation(const Rotation& y, int p, int q) const;

private:
    SynergisticFamily(TraceShape shape, WarpingDirections dirs, double k, ShapeClass cls);

    TraceShape shape_;
    WarpingDirections dirs_;
    double k_ = 0.0;
    ShapeClass effective_class_ = ShapeClass::AllEqual;
    double delta_bar_ = 0.0;
    std::vector<double> delta_hyst_;
};

/// Solve the critical-point fixed point on every sampled eigenvector branch
/// of member q: Y = R_a(pi,v) R_a(theta(Y), u_q)^T with Psi_M(Y) the
/// admissible root of 2 lamG_max^2 (2 lamG - Psi) = k^2 Psi^2 delta(v, u_q).
/// `branch_grid` counts samples of the eigenvector continuum (isolated
/// branches are always solved exactly).
std::vector<CriticalPointRecord> solve_critical_points(const SynergisticFamily& fam, int q,
                                                       int branch_grid = 720);

/// Single-branch variant: the critical point of member q on the explicit
/// eigenvector branch `v`.
CriticalPointRecord solve_critical_point(const SynergisticFamily& fam, int q, const Vec3& v);

/// Full certification sweep: every member, every sampled branch, plus a local
/// search that polishes the worst branch of each continuum. Passes iff the
/// minimum refined gap clears delta_hyst(q) for every q.
CertificationReport certify(const SynergisticFamily& fam, int branch_grid = 720);

}  // namespace so3syn
