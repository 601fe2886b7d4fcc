#include "so3syn/synergy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace so3syn {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool classes_compatible(ShapeClass natural, ShapeClass forced) {
    if (natural == forced) return true;
    // item3 admits every shape item2 admits (lam3 >= 0 vs > 0)
    return natural == ShapeClass::TwoLargeEqualPosMin && forced == ShapeClass::TwoLargeEqualAnyMin;
}

std::vector<int> orthogonal_peer_set(const std::vector<Vec3>& u, int q) {
    std::vector<int> peers;
    for (int p = 0; p < static_cast<int>(u.size()); ++p)
        if (std::abs(dot(u[p], u[q])) < tol::algebraic) peers.push_back(p);
    return peers;
}

}  // namespace

double feasible_gain_bound(double xi) {
    if (!(xi > 0.0 && xi <= 1.0)) throw std::invalid_argument("feasible_gain_bound: xi out of (0,1]");
    return 1.0 / std::sqrt(6.0 - std::max(1.0, 4.0 * xi * xi));
}

WarpingDirections select_directions(const TraceShape& shape, std::optional<ShapeClass> forced) {
    const ShapeClassification& lab = shape.classification();
    ShapeClass cls = forced.value_or(lab.cls);
    if (forced && !classes_compatible(lab.cls, *forced))
        throw std::invalid_argument("select_directions: class override incompatible with the spectrum");

    WarpingDirections dirs;
    switch (cls) {
        case ShapeClass::AllEqual: {
            for (int i = 0; i < 3; ++i) {
                dirs.u.push_back(lab.v[i]);
                dirs.u.push_back(-lab.v[i]);
            }
            for (int q = 0; q < 6; ++q) dirs.peers.push_back(orthogonal_peer_set(dirs.u, q));
            break;
        }
        case ShapeClass::TwoLargeEqualPosMin: {
            dirs.u = {lab.v[0], -lab.v[0], lab.v[1], -lab.v[1]};
            for (int q = 0; q < 4; ++q) dirs.peers.push_back(orthogonal_peer_set(dirs.u, q));
            break;
        }
        case ShapeClass::TwoLargeEqualAnyMin: {
            for (int n = 0; n < 6; ++n) {
                double a = n * kPi / 3.0;
                dirs.u.push_back(std::cos(a) * lab.v[0] + std::sin(a) * lab.v[1]);
            }
            for (int q = 0; q < 6; ++q) {
                std::vector<int> peers;
                for (int p = 0; p < 6; ++p) {
                    double d = dot(dirs.u[p], dirs.u[q]);
                    if (d < -1.0 + 1e-9 || std::abs(d - 0.5) < 1e-9) peers.push_back(p);
                }
                dirs.peers.push_back(std::move(peers));
            }
            break;
        }
        case ShapeClass::TwoSmallEqual: {
            // 0 < 1 - (u.v3)^2 < lamG_dist / lamG_pair, met with margin 1/2
            double ratio = lab.lam_g[2] / lab.lam_g[0];
            double beta = std::asin(std::sqrt(0.5 * std::min(1.0, ratio)));
            Vec3 u = std::cos(beta) * lab.v[2] + std::sin(beta) * lab.v[0];
            dirs.u = {u, -u};
            dirs.peers = {{1}, {0}};
            break;
        }
        case ShapeClass::AllDistinct: {
            // 1-degree hemisphere grid maximizing the smaller of the two
            // margin requirements delta(v2,u) > 0, delta(v3,u) > 0
            Vec3 best_u;
            double best_margin = -1.0;
            for (int ip = 0; ip <= 90; ++ip) {
                double th = ip * kPi / 180.0;
                int n_az = ip == 0 ? 1 : 360;
                for (int ia = 0; ia < n_az; ++ia) {
                    double az = ia * kPi / 180.0;
                    Vec3 u = std::sin(th) * (std::cos(az) * lab.v[0] + std::sin(az) * lab.v[1]) +
                             std::cos(th) * lab.v[2];
                    double margin = std::min(shape.delta(lab.v[1], u), shape.delta(lab.v[2], u));
                    if (margin > best_margin) {
                        best_margin = margin;
                        best_u = u;
                    }
                }
            }
            if (best_margin <= 0.0)
                throw std::runtime_error(
                    "select_directions: no feasible warping direction on the search grid "
                    "(degenerate all-distinct spectrum)");
            dirs.u = {best_u, -best_u};
            dirs.peers = {{1}, {0}};
            break;
        }
    }
    return dirs;
}

double gap_bound_closed_form(const TraceShape& shape, ShapeClass effective, double k) {
    const ShapeClassification& lab = shape.classification();
    switch (effective) {
        case ShapeClass::AllEqual: {
            double lam = lab.lam_m[0];
            double xi1 = 2.0 * k / (1.0 + std::sqrt(1.0 + 4.0 * k * k));
            return 2.0 * lam * std::min(k * k, 2.0 * xi1 * xi1 * (1.0 - xi1 * xi1));
        }
        case ShapeClass::TwoLargeEqualPosMin: {
            double xi = shape.xi();
            double lam3g = lab.lam_g[2];
            double xi21 = 2.0 * k / (1.0 + std::sqrt(1.0 + 4.0 * k * k * (1.0 - xi)));
            double xi22 = 2.0 * k * xi / (1.0 + std::sqrt(1.0 + 4.0 * k * k * xi * xi));
            double a = xi21 * xi21 * (1.0 + (1.0 - 2.0 * xi) * (1.0 - xi21 * xi21));
            double b = xi22 * xi22 * (1.0 - xi22 * xi22) * (2.0 * xi - 1.0);
            return 2.0 * lam3g * std::min(a, b);
        }
        case ShapeClass::TwoLargeEqualAnyMin: {
            double xi = shape.xi();
            double lam3g = lab.lam_g[2];
            double xi21 = 2.0 * k / (1.0 + std::sqrt(1.0 + 4.0 * k * k * (1.0 - xi)));
            double xi22 = 2.0 * k * xi / (1.0 + std::sqrt(1.0 + 4.0 * k * k * xi * xi));
            double s21 = xi21 * xi21;
            double a = 0.5 * s21 * (3.0 + (1.0 - 4.0 * xi) * (1.0 - s21));
            double b = 8.0 * s21 * (1.0 - s21) * (1.0 - xi);
            double c = 2.0 * xi22 * xi22 * (1.0 - xi22 * xi22) * (xi - 0.25);
            return lam3g * std::min(std::max(a, b), c);
        }
        default:
            throw std::invalid_argument("gap_bound_closed_form: no closed form for this class");
    }
}

double min_warp_envelope(double xi, long grid_points) {
    if (!(xi >= 0.5 && xi <= 1.0))
        throw std::invalid_argument("min_warp_envelope: xi out of [1/2, 1]");
    long n = std::max<long>(4, grid_points);
    if (n % 2 != 0) ++n;  // keep pi/2 on the grid
    double best = std::numeric_limits<double>::infinity();
    for (long i = 0; i <= n; ++i) {
        double t = kPi * static_cast<double>(i) / static_cast<double>(n);
        double s0 = std::sin(t), sp = std::sin(t + kPi / 3.0), sm = std::sin(t - kPi / 3.0);
        double f = std::max(4.0 * (xi - s0 * s0), std::max(xi - sp * sp, xi - sm * sm));
        best = std::min(best, f);
    }
    return best;
}

SynergisticFamily::SynergisticFamily(TraceShape shape, WarpingDirections dirs, double k,
                                     ShapeClass cls)
    : shape_(std::move(shape)), dirs_(std::move(dirs)), k_(k), effective_class_(cls) {}

double SynergisticFamily::warp_angle(const Rotation& x) const {
    double arg = k_ * shape_.value(x) / (2.0 * shape_.lambda_max_g());
    return 2.0 * std::asin(std::max(0.0, std::min(1.0, arg)));
}

Rotation SynergisticFamily::warp(const Rotation& x, int q) const {
    return x * rodrigues(warp_angle(x), dirs_.u.at(q));
}

Mat3 SynergisticFamily::warp_jacobian(const Rotation& x, int q) const {
    double lmax = shape_.lambda_max_g();
    double s = k_ * shape_.value(x) / (2.0 * lmax);  // sin(theta/2)
    double radicand = 1.0 - s * s;
    if (radicand < 1e-12)
        throw std::runtime_error("warp_jacobian: warping angle derivative is singular");
    double c = k_ / (lmax * std::sqrt(radicand));  // grad theta = c grad Psi_M
    Mat3 ra = rodrigues(2.0 * std::asin(s), dirs_.u.at(q)).matrix();
    return ra.transpose() + 2.0 * outer(dirs_.u[q], c * shape_.gradient(x));
}

double SynergisticFamily::value(const Rotation& x, int q) const {
    return shape_.value(warp(x, q));
}

Vec3 SynergisticFamily::gradient(const Rotation& x, int q) const {
    Rotation t = warp(x, q);
    return warp_jacobian(x, q).transpose() * axial(shape_.m() * t.matrix());
}

double SynergisticFamily::refined_gap(const Rotation& x, int q) const {
    double vq = value(x, q);
    double best = vq;
    for (int p : dirs_.peers.at(q)) best = std::min(best, value(x, p));
    return vq - best;
}

double SynergisticFamily::full_gap(const Rotation& x, int q) const {
    double vq = value(x, q);
    double best = vq;
    for (int p = 0; p < size(); ++p) best = std::min(best, value(x, p));
    return vq - best;
}

int SynergisticFamily::argmin_member(const Rotation& x) const {
    int best = 0;
    double best_v = value(x, 0);
    for (int p = 1; p < size(); ++p) {
        double v = value(x, p);
        if (v < best_v) {  // strict: lowest index wins ties
            best_v = v;
            best = p;
        }
    }
    return best;
}

AxisAngle SynergisticFamily::composed_rotation(const Rotation& y, int p, int q) const {
    if (p == q) throw std::invalid_argument("composed_rotation: p == q");
    double theta = warp_angle(y);
    const Vec3& up = dirs_.u.at(p);
    const Vec3& uq = dirs_.u.at(q);
    double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
    double cos_half = c * c + dot(up, uq) * s * s;
    Vec3 vec = (up - uq) * (s * c) + cross(up, uq) * (s * s);
    double sin_half = norm(vec);
    if (sin_half < 1e-12)
        throw std::runtime_error("composed_rotation: degenerate composition (theta(Y) ~ 0)");
    double angle = 2.0 * std::atan2(sin_half, cos_half);
    Vec3 axis = vec / sin_half;
    if (angle > kPi) {  // fold into [0, pi]; same rotation, sign convention kept by caller checks
        angle = 2.0 * kPi - angle;
        axis = -axis;
    }
    return {axis, angle};
}

double SynergisticFamily::min_delta_hyst() const {
    return *std::min_element(delta_hyst_.begin(), delta_hyst_.end());
}

void SynergisticFamily::set_delta_hyst(std::vector<double> delta) {
    if (static_cast<int>(delta.size()) != size())
        throw std::invalid_argument("set_delta_hyst: size mismatch");
    for (double d : delta)
        if (!(d > 0.0 && d < delta_bar_))
            throw std::invalid_argument("set_delta_hyst: levels must lie in (0, delta_bar)");
    delta_hyst_ = std::move(delta);
}

namespace {

// Fixed point of the warped critical-point equation on branch v of member q.
CriticalPointRecord solve_branch(const SynergisticFamily& fam, int q, const Vec3& v) {
    const TraceShape& shape = fam.shape();
    double k = fam.gain();
    double lmax = shape.lambda_max_g();
    double lam_g = shape.lambda_g_of(v);
    double d = shape.delta(v, fam.directions().u.at(q));

    double c = 4.0 * k * k * d * lam_g / (lmax * lmax);
    if (1.0 + c <= 0.0)
        throw std::runtime_error("solve_critical_points: no admissible root (radicand <= 0)");
    double psi_y = 4.0 * lam_g / (1.0 + std::sqrt(1.0 + c));
    if (!(psi_y > 0.0) || psi_y > 2.0 * lmax * (1.0 + 1e-9))
        throw std::runtime_error("solve_critical_points: root outside (0, 2 lamG_max]");

    double theta_y = 2.0 * std::asin(std::min(1.0, k * psi_y / (2.0 * lmax)));
    Rotation y = rodrigues(kPi, v) * rodrigues(theta_y, fam.directions().u[q]).inverse();

    CriticalPointRecord rec;
    rec.q = q;
    rec.v = v;
    rec.y = y;
    rec.psi_at_y = psi_y;
    rec.theta_at_y = theta_y;
    rec.refined_gap = fam.refined_gap(y, q);
    rec.full_gap = fam.full_gap(y, q);
    rec.rho_norm = norm(fam.gradient(y, q));
    return rec;
}

std::vector<Vec3> fibonacci_sphere(int n) {
    std::vector<Vec3> pts;
    pts.reserve(n);
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
        double z = 1.0 - 2.0 * (i + 0.5) / n;
        double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        double a = golden * i;
        pts.push_back({r * std::cos(a), r * std::sin(a), z});
    }
    return pts;
}

// Branch samples of the eigenvector set E(M). Isolated branches come first.
std::vector<Vec3> branch_samples(const TraceShape& shape, int branch_grid) {
    const ShapeClassification& lab = shape.classification();
    std::vector<Vec3> out;
    switch (lab.cls) {
        case ShapeClass::AllEqual: {
            int n = std::max(64, static_cast<int>(std::lround(10000.0 * branch_grid / 720.0)));
            for (const Vec3& p : fibonacci_sphere(n))
                out.push_back(p.x * lab.v[0] + p.y * lab.v[1] + p.z * lab.v[2]);
            break;
        }
        case ShapeClass::TwoLargeEqualPosMin:
        case ShapeClass::TwoLargeEqualAnyMin:
        case ShapeClass::TwoSmallEqual: {
            out.push_back(lab.v[2]);  // isolated distinct branch
            for (int i = 0; i < branch_grid; ++i) {
                double t = kPi * i / branch_grid;  // half turn covers v and -v
                out.push_back(std::cos(t) * lab.v[0] + std::sin(t) * lab.v[1]);
            }
            break;
        }
        case ShapeClass::AllDistinct:
            out = {lab.v[0], lab.v[1], lab.v[2]};
            break;
    }
    return out;
}

Vec3 canonical_orthogonal_axis(const Vec3& w) {
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

// Shrinking-step compass search over the branch parametrization, used to
// polish the grid minimum of the refined gap. The objective is smooth in the
// branch parameter except for kinks at the minimizers themselves, so the
// search converges linearly and the grid supplies the starting point.
CriticalPointRecord polish_worst_branch(const SynergisticFamily& fam, int q,
                                        const CriticalPointRecord& seed, double step0) {
    const ShapeClassification& lab = fam.shape().classification();
    CriticalPointRecord best = seed;

    switch (lab.cls) {
        case ShapeClass::AllEqual: {
            // local 2-d compass on the sphere around the seed direction
            Vec3 ea = canonical_orthogonal_axis(seed.v);
            Vec3 eb = cross(seed.v, ea);
            double h = step0;
            while (h > 1e-9) {
                Vec3 center = best.v;
                bool moved = false;
                for (const Vec3& dv : {h * ea, -1.0 * h * ea, h * eb, -1.0 * h * eb}) {
                    Vec3 cand = normalized(center + dv);
                    CriticalPointRecord r = solve_branch(fam, q, cand);
                    if (r.refined_gap < best.refined_gap) {
                        best = r;
                        moved = true;
                    }
                }
                if (!moved) h *= 0.5;
            }
            break;
        }
        case ShapeClass::TwoLargeEqualPosMin:
        case ShapeClass::TwoLargeEqualAnyMin:
        case ShapeClass::TwoSmallEqual: {
            if (std::abs(dot(seed.v, lab.v[2])) > 0.5) break;  // isolated branch, nothing to polish
            double t = std::atan2(dot(seed.v, lab.v[1]), dot(seed.v, lab.v[0]));
            auto v_of = [&](double tt) { return std::cos(tt) * lab.v[0] + std::sin(tt) * lab.v[1]; };
            double h = step0;
            double t_best = t;
            while (h > 1e-9) {
                bool moved = false;
                for (double cand : {t_best + h, t_best - h}) {
                    CriticalPointRecord r = solve_branch(fam, q, v_of(cand));
                    if (r.refined_gap < best.refined_gap) {
                        best = r;
                        t_best = cand;
                        moved = true;
                    }
                }
                if (!moved) h *= 0.5;
            }
            break;
        }
        case ShapeClass::AllDistinct:
            break;  // isolated branches only
    }
    return best;
}

struct GapScan {
    double min_refined = std::numeric_limits<double>::infinity();
    double min_full = std::numeric_limits<double>::infinity();
    std::vector<double> min_refined_per_q;
    int worst_q = 0;
    Vec3 worst_v;
    double max_rho = 0.0;
    double min_theta = std::numeric_limits<double>::infinity();
    double max_theta = 0.0;
    long count = 0;
};

GapScan scan_gaps(const SynergisticFamily& fam, int branch_grid) {
    GapScan scan;
    scan.min_refined_per_q.assign(fam.size(), std::numeric_limits<double>::infinity());
    double polish_step = fam.effective_class() == ShapeClass::AllEqual
                             ? 2.0 * std::sqrt(4.0 * kPi / (10000.0 * branch_grid / 720.0))
                             : kPi / branch_grid;
    for (int q = 0; q < fam.size(); ++q) {
        std::vector<CriticalPointRecord> recs = solve_critical_points(fam, q, branch_grid);
        const CriticalPointRecord* worst = &recs.front();
        for (const CriticalPointRecord& r : recs) {
            if (r.refined_gap < worst->refined_gap) worst = &r;
            scan.min_full = std::min(scan.min_full, r.full_gap);
            scan.max_rho = std::max(scan.max_rho, r.rho_norm);
            scan.min_theta = std::min(scan.min_theta, r.theta_at_y);
            scan.max_theta = std::max(scan.max_theta, r.theta_at_y);
        }
        scan.count += static_cast<long>(recs.size());
        CriticalPointRecord polished = polish_worst_branch(fam, q, *worst, polish_step);
        scan.min_full = std::min(scan.min_full, polished.full_gap);
        scan.max_rho = std::max(scan.max_rho, polished.rho_norm);
        scan.min_refined_per_q[q] = polished.refined_gap;
        if (polished.refined_gap < scan.min_refined) {
            scan.min_refined = polished.refined_gap;
            scan.worst_q = q;
            scan.worst_v = polished.v;
        }
    }
    return scan;
}

}  // namespace

SynergisticFamily SynergisticFamily::make(const TraceShape& shape, double k,
                                          double delta_fraction,
                                          std::optional<ShapeClass> class_override,
                                          int branch_grid) {
    double bound = feasible_gain_bound(shape.xi());
    if (!(k > 0.0 && k < bound))
        throw std::invalid_argument("SynergisticFamily: gain k = " + std::to_string(k) +
                                    " violates 0 < k < " + std::to_string(bound));
    if (!(delta_fraction > 0.0 && delta_fraction < 1.0))
        throw std::invalid_argument("SynergisticFamily: delta_fraction must lie in (0,1)");

    WarpingDirections dirs = select_directions(shape, class_override);
    ShapeClass cls = class_override.value_or(shape.shape_class());
    SynergisticFamily fam(shape, std::move(dirs), k, cls);

    switch (cls) {
        case ShapeClass::AllEqual:
        case ShapeClass::TwoLargeEqualPosMin:
        case ShapeClass::TwoLargeEqualAnyMin:
            fam.delta_bar_ = gap_bound_closed_form(shape, cls, k);
            break;
        case ShapeClass::TwoSmallEqual:
        case ShapeClass::AllDistinct: {
            // no closed form is available for these classes: certify numerically
            GapScan scan = scan_gaps(fam, branch_grid);
            if (!(scan.min_refined > 0.0))
                throw std::runtime_error("SynergisticFamily: certified refined gap is not positive");
            fam.delta_bar_ = 0.99 * scan.min_refined;
            break;
        }
    }
    if (!(fam.delta_bar_ > 0.0))
        throw std::runtime_error("SynergisticFamily: gap lower bound is not positive");
    fam.delta_hyst_.assign(fam.size(), delta_fraction * fam.delta_bar_);
    return fam;
}

std::vector<CriticalPointRecord> solve_critical_points(const SynergisticFamily& fam, int q,
                                                       int branch_grid) {
    if (q < 0 || q >= fam.size()) throw std::invalid_argument("solve_critical_points: bad q");
    if (branch_grid < 1) throw std::invalid_argument("solve_critical_points: branch_grid < 1");
    std::vector<CriticalPointRecord> out;
    for (const Vec3& v : branch_samples(fam.shape(), branch_grid))
        out.push_back(solve_branch(fam, q, v));
    return out;
}

CriticalPointRecord solve_critical_point(const SynergisticFamily& fam, int q, const Vec3& v) {
    if (q < 0 || q >= fam.size()) throw std::invalid_argument("solve_critical_point: bad q");
    return solve_branch(fam, q, normalized(v));
}

CertificationReport certify(const SynergisticFamily& fam, int branch_grid) {
    GapScan scan = scan_gaps(fam, branch_grid);

    CertificationReport rep;
    rep.shape_class = shape_class_name(fam.effective_class());
    rep.k = fam.gain();
    rep.xi = fam.shape().xi();
    rep.delta_bar = fam.delta_bar();
    rep.delta_hyst = fam.min_delta_hyst();
    rep.branch_grid = branch_grid;
    rep.record_count = scan.count;
    rep.min_refined_gap = scan.min_refined;
    rep.min_full_gap = scan.min_full;
    rep.worst_q = scan.worst_q;
    rep.worst_v = scan.worst_v;
    rep.max_rho_norm = scan.max_rho;
    rep.min_theta = scan.min_theta;
    rep.max_theta = scan.max_theta;
    switch (fam.effective_class()) {
        case ShapeClass::AllEqual:
        case ShapeClass::TwoLargeEqualPosMin:
        case ShapeClass::TwoLargeEqualAnyMin:
            rep.closed_form = gap_bound_closed_form(fam.shape(), fam.effective_class(), fam.gain());
            break;
        default:
            break;
    }
    rep.passed = true;
    for (int q = 0; q < fam.size(); ++q)
        if (!(scan.min_refined_per_q[q] > fam.delta_hyst(q))) rep.passed = false;
    return rep;
}

std::string CertificationReport::to_text() const {
    std::ostringstream os;
    os.precision(12);
    os << "synergy certification report\n"
       << "class:            " << shape_class << "\n"
       << "k:                " << k << "\n"
       << "xi:               " << xi << "\n"
       << "delta_bar:        " << delta_bar << "\n";
    if (closed_form) os << "closed form:      " << *closed_form << "\n";
    os << "delta_hyst (min): " << delta_hyst << "\n"
       << "branch_grid:      " << branch_grid << "\n"
       << "records:          " << record_count << "\n"
       << "min refined gap:  " << min_refined_gap << "\n"
       << "min full gap:     " << min_full_gap << "\n"
       << "worst member q:   " << worst_q << "\n"
       << "worst branch v:   [" << worst_v.x << ", " << worst_v.y << ", " << worst_v.z << "]\n"
       << "max |rho_V|:      " << max_rho_norm << "\n"
       << "theta(Y) range:   [" << min_theta << ", " << max_theta << "]\n"
       << "result:           " << (passed ? "PASS" : "FAIL") << "\n";
    return os.str();
}

}  // namespace so3syn
