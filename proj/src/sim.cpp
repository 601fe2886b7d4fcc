#include "so3syn/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace so3syn {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Two orthonormalization sweeps pull an RK4 substage matrix (drift O(h^2))
// back to machine-precision SO(3).
Mat3 orthonormalize(Mat3 r) {
    for (int i = 0; i < 2; ++i) r = r * ((Mat3::identity() * 3.0 - r.transpose() * r) * 0.5);
    return r;
}

void append_double(std::string& s, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    s += buf;
}

}  // namespace

void PlantParams::validate() const {
    if (frobenius_norm(inertia - inertia.transpose()) > tol::structural)
        throw std::invalid_argument("PlantParams: inertia must be symmetric");
    Spectrum3 s = sym_eigen(inertia);
    if (!(s.lambda[0] > 0.0)) throw std::invalid_argument("PlantParams: inertia must be positive definite");
}

ReferenceConfig default_reference() {
    ReferenceConfig rc;
    rc.rd0 = Rotation::identity();
    rc.omega_d = [](double t) {
        return Vec3{t * std::exp(-0.5 * t), 0.6 * std::sin(0.4 * t), 0.6 * std::sin(0.7 * t)};
    };
    rc.omega_d_dot = [](double t) {
        return Vec3{(1.0 - 0.5 * t) * std::exp(-0.5 * t), 0.24 * std::cos(0.4 * t),
                    0.42 * std::cos(0.7 * t)};
    };
    rc.c_omega = 1.25;
    rc.c_accel = 1.25;
    return rc;
}

NoiseConfig benchmark_noise(std::uint64_t seed) { return {0.01 * kPi, 0.01, seed}; }

const char* controller_name(ControllerLaw law) {
    switch (law) {
        case ControllerLaw::Solo: return "solo";
        case ControllerLaw::PiCS: return "pics";
        case ControllerLaw::MuCS: return "mucs";
        case ControllerLaw::NonCS: return "noncs";
    }
    return "?";
}

void NonCSParams::validate() const {
    if (!(alpha > 1.0 && alpha < 2.0)) throw std::invalid_argument("NonCS: need 1 < alpha < 2");
    if (!(std::abs(beta) < alpha - 1.0)) throw std::invalid_argument("NonCS: need |beta| < alpha - 1");
    double dmax = std::min(2.0 - alpha, alpha - std::abs(beta) - 1.0);
    if (!(delta > 0.0 && delta < dmax))
        throw std::invalid_argument("NonCS: need 0 < delta < min(2 - alpha, alpha - |beta| - 1)");
    if (std::abs(norm(b1) - 1.0) > tol::algebraic || std::abs(norm(b2) - 1.0) > tol::algebraic)
        throw std::invalid_argument("NonCS: b1, b2 must be unit vectors");
    if (std::abs(dot(b1, b2)) > tol::algebraic)
        throw std::invalid_argument("NonCS: b1 and b2 must be orthogonal");
    if (!(k1 > 0.0 && k2 > 0.0)) throw std::invalid_argument("NonCS: gains must be positive");
}

NonCSEval noncs_errors(const NonCSParams& p, const Rotation& x, int q) {
    auto psi_n = [&](const Vec3& b) { return 1.0 - dot(b, x * b); };
    auto e_n = [&](const Vec3& b) { return cross(x * b, b); };
    Vec3 b12 = cross(p.b1, p.b2);
    auto psi_e = [&](const Vec3& b) { return p.alpha + p.beta * dot(b, x * b12); };
    auto e_e = [&](const Vec3& b) { return p.beta * cross(b, x * b12); };

    switch (q) {
        case 0: return {psi_n(p.b1) + psi_n(p.b2), e_n(p.b1) + e_n(p.b2)};
        case 1: return {psi_n(p.b1) + psi_e(p.b2), e_n(p.b1) + e_e(p.b2)};
        case 2: return {psi_n(p.b2) + psi_e(p.b1), e_n(p.b2) + e_e(p.b1)};
        default: throw std::invalid_argument("noncs_errors: q must be 0, 1 or 2");
    }
}

PlantDerivative plant_derivative(const PlantParams& plant, const Mat3& r, const Vec3& omega,
                                 const Vec3& tau) {
    PlantDerivative d;
    d.rdot = r * hat(omega);
    Vec3 jw = plant.inertia * omega;
    d.omega_dot = inverse(plant.inertia) * (tau - cross(omega, jw));
    return d;
}

Vec3 synergistic_torque(const SynergisticFamily& fam, const Gains& g, int q, const Mat3& inertia,
                        const Rotation& r_meas, const Vec3& omega_meas, const Rotation& rd,
                        const Vec3& omega_d, const Vec3& omega_d_dot) {
    Rotation r_tilde = Rotation::from_matrix_unchecked(r_meas.matrix() * rd.matrix().transpose());
    Vec3 omega_tilde = omega_meas - omega_d;
    // feedforward wd^ J (wtilde + wd) + J wd', with wtilde + wd = measured w
    Vec3 ff = cross(omega_d, inertia * omega_meas) + inertia * omega_d_dot;
    Vec3 rho = fam.gradient(r_tilde, q);
    return ff - g.k1 * (rd.inverse() * rho) - g.k2 * omega_tilde;
}

Vec3 noncs_torque(const NonCSParams& p, int q, const Mat3& inertia, const Rotation& r_meas,
                  const Vec3& omega_meas, const Rotation& rd, const Vec3& omega_d,
                  const Vec3& omega_d_dot) {
    Rotation x = Rotation::from_matrix_unchecked(r_meas.matrix().transpose() * rd.matrix());
    Vec3 e = noncs_errors(p, x, q).e_h;
    Vec3 xwd = x * omega_d;
    Vec3 omega_err = omega_meas - xwd;
    return -p.k1 * e - p.k2 * omega_err + cross(xwd, inertia * xwd) + inertia * (x * omega_d_dot);
}

SwitchDecision switch_decision(ControllerLaw law, const SynergisticFamily* fam,
                               const NonCSParams* noncs, const Rotation& error_attitude, int q,
                               bool switching_enabled) {
    SwitchDecision dec;
    dec.q_next = q;
    if (law == ControllerLaw::Solo || !switching_enabled) return dec;

    if (law == ControllerLaw::NonCS) {
        if (!noncs) throw std::invalid_argument("switch_decision: NonCS parameters required");
        double vq = 0.0, vmin = 0.0;
        int argmin = 0;
        for (int p = 0; p < 3; ++p) {
            double v = noncs_errors(*noncs, error_attitude, p).value;
            if (p == 0 || v < vmin) {
                vmin = v;
                argmin = p;
            }
            if (p == q) vq = v;
        }
        dec.evals = 3;
        dec.gap = vq - vmin;
        if (dec.gap > noncs->delta) {
            dec.jump = true;
            dec.q_next = argmin;
        }
        return dec;
    }

    if (!fam) throw std::invalid_argument("switch_decision: family required");
    if (law == ControllerLaw::PiCS) {
        // the check costs V at q plus the peer subset; the argmin over the
        // whole family is only computed when the jump actually fires
        dec.evals = 1 + static_cast<int>(fam->directions().peers.at(q).size());
        dec.gap = fam->refined_gap(error_attitude, q);
    } else {
        dec.evals = fam->size();
        dec.gap = fam->full_gap(error_attitude, q);
    }
    if (dec.gap > fam->delta_hyst(q)) {
        dec.jump = true;
        dec.q_next = fam->argmin_member(error_attitude);
    }
    return dec;
}

double lyapunov(const SynergisticFamily& fam, const Gains& g, const Mat3& inertia,
                const Rotation& r_tilde, const Vec3& omega_tilde, int q) {
    return g.k1 * fam.value(r_tilde, q) + dot(omega_tilde, inertia * omega_tilde);
}

void SimLog::write_csv(std::ostream& os) const {
    std::string out = "t,j,q,theta_err,omega_err_norm,torque_norm,V,U,eval_count_cum\n";
    for (const SimRow& r : rows) {
        append_double(out, r.t);
        out += ',';
        out += std::to_string(r.j);
        out += ',';
        out += std::to_string(r.q);
        for (double v : {r.theta_err, r.omega_err_norm, r.torque_norm, r.v, r.u}) {
            out += ',';
            append_double(out, v);
        }
        out += ',';
        out += std::to_string(r.eval_cum);
        out += '\n';
    }
    os << out;
}

void SimLog::write_jumps_csv(std::ostream& os) const {
    std::string out = "t,j,q_minus,q_plus,gap_at_jump\n";
    for (const JumpEvent& e : jumps) {
        append_double(out, e.t);
        out += ',';
        out += std::to_string(e.j);
        out += ',';
        out += std::to_string(e.q_minus);
        out += ',';
        out += std::to_string(e.q_plus);
        out += ',';
        append_double(out, e.gap);
        out += '\n';
    }
    os << out;
}

HybridSim::HybridSim(const Scenario& sc, const SynergisticFamily* fam)
    : sc_(sc), fam_(fam), rng_(sc.noise.seed) {
    sc_.plant.validate();
    if (sc_.law == ControllerLaw::NonCS) {
        sc_.noncs.validate();
    } else if (!fam_) {
        throw std::invalid_argument("HybridSim: synergistic laws need a family");
    }
    if (fam_ && (sc_.q0 < 0 || sc_.q0 >= fam_->size()))
        throw std::invalid_argument("HybridSim: initial q out of range");
    if (sc_.law == ControllerLaw::NonCS && (sc_.q0 < 0 || sc_.q0 > 2))
        throw std::invalid_argument("HybridSim: NonCS q0 out of range");
    if (!(sc_.step > 0.0) || sc_.horizon < 0.0)
        throw std::invalid_argument("HybridSim: bad step or horizon");
    inertia_inv_ = inverse(sc_.plant.inertia);
    q_ = sc_.q0;
    r_ = sc_.r0;
    omega_ = sc_.omega0;
    rd_ = sc_.reference.rd0;
    meas_rot_err_ = Rotation::identity();
    meas_gyro_err_ = Vec3{};
}

Vec3 HybridSim::torque(const Mat3& r_raw, const Vec3& omega, const Mat3& rd_raw, double t) const {
    if (!is_finite(r_raw) || !is_finite(omega) || norm(omega) > 1e9 ||
        frobenius_norm(r_raw) > 1e3)
        throw SimDivergence("simulation diverged: unbounded state near t = " + std::to_string(t));
    Rotation r_meas =
        Rotation::from_matrix_unchecked(orthonormalize(r_raw) * meas_rot_err_.matrix());
    Rotation rd = Rotation::from_matrix_unchecked(orthonormalize(rd_raw));
    Vec3 omega_meas = omega + meas_gyro_err_;
    Vec3 wd = sc_.reference.omega_d(t);
    Vec3 wdd = sc_.reference.omega_d_dot(t);

    if (sc_.law == ControllerLaw::NonCS)
        return noncs_torque(sc_.noncs, q_, sc_.plant.inertia, r_meas, omega_meas, rd, wd, wdd);
    return synergistic_torque(*fam_, sc_.gains, q_, sc_.plant.inertia, r_meas, omega_meas, rd, wd,
                              wdd);
}

void HybridSim::process_boundary() {
    // measurement error for this period
    if (sc_.noise.attitude_max_angle > 0.0) {
        Vec3 axis = rng_.unit_vec3();
        double alpha = rng_.uniform(0.0, sc_.noise.attitude_max_angle);
        meas_rot_err_ = rodrigues(alpha, axis);
    }
    if (sc_.noise.gyro_sigma > 0.0) meas_gyro_err_ = sc_.noise.gyro_sigma * rng_.normal_vec3();

    Rotation r_meas = Rotation::from_matrix_unchecked(r_.matrix() * meas_rot_err_.matrix());
    Rotation err = sc_.law == ControllerLaw::NonCS
                       ? Rotation::from_matrix_unchecked(r_meas.matrix().transpose() * rd_.matrix())
                       : Rotation::from_matrix_unchecked(r_meas.matrix() * rd_.matrix().transpose());

    SwitchDecision dec = switch_decision(sc_.law, fam_, &sc_.noncs, err, q_, sc_.switching);
    eval_cum_ += dec.evals;
    if (dec.jump && dec.q_next != q_) {
        ++j_;
        log_.jumps.push_back({t_, j_, q_, dec.q_next, dec.gap});
        q_ = dec.q_next;  // the jump map leaves the plant state z untouched
    }

    Vec3 tau = torque(r_.matrix(), omega_, rd_.matrix(), t_);

    SimRow row;
    row.t = t_;
    row.j = j_;
    row.q = q_;
    Rotation r_tilde = error_attitude();
    Vec3 wd = sc_.reference.omega_d(t_);
    Vec3 omega_tilde = omega_ - wd;
    row.theta_err = rotation_angle(r_tilde);
    row.omega_err_norm = norm(omega_tilde);
    row.torque_norm = norm(tau);
    if (sc_.law == ControllerLaw::NonCS) {
        Rotation x = Rotation::from_matrix_unchecked(r_.matrix().transpose() * rd_.matrix());
        Vec3 werr = omega_ - x * wd;
        row.v = noncs_errors(sc_.noncs, x, q_).value;
        row.u = sc_.noncs.k1 * row.v + dot(werr, sc_.plant.inertia * werr);
    } else {
        row.v = fam_->value(r_tilde, q_);
        row.u = lyapunov(*fam_, sc_.gains, sc_.plant.inertia, r_tilde, omega_tilde, q_);
    }
    row.eval_cum = eval_cum_;
    log_.rows.push_back(row);
}

void HybridSim::flow() {
    const double h = sc_.step;
    struct Deriv {
        Mat3 rdot, rddot;
        Vec3 wdot;
    };
    auto f = [&](const Mat3& r, const Vec3& w, const Mat3& rd, double t) {
        Deriv d;
        Vec3 tau = torque(r, w, rd, t);
        d.rdot = r * hat(w);
        d.wdot = inertia_inv_ * (tau - cross(w, sc_.plant.inertia * w));
        d.rddot = rd * hat(sc_.reference.omega_d(t));
        return d;
    };

    Mat3 r0 = r_.matrix(), rd0 = rd_.matrix();
    Vec3 w0 = omega_;
    Deriv k1 = f(r0, w0, rd0, t_);
    Deriv k2 = f(r0 + 0.5 * h * k1.rdot, w0 + 0.5 * h * k1.wdot, rd0 + 0.5 * h * k1.rddot,
                 t_ + 0.5 * h);
    Deriv k3 = f(r0 + 0.5 * h * k2.rdot, w0 + 0.5 * h * k2.wdot, rd0 + 0.5 * h * k2.rddot,
                 t_ + 0.5 * h);
    Deriv k4 = f(r0 + h * k3.rdot, w0 + h * k3.wdot, rd0 + h * k3.rddot, t_ + h);

    Mat3 r_new = r0 + (h / 6.0) * (k1.rdot + 2.0 * k2.rdot + 2.0 * k3.rdot + k4.rdot);
    Mat3 rd_new = rd0 + (h / 6.0) * (k1.rddot + 2.0 * k2.rddot + 2.0 * k3.rddot + k4.rddot);
    omega_ = w0 + (h / 6.0) * (k1.wdot + 2.0 * k2.wdot + 2.0 * k3.wdot + k4.wdot);
    t_ += h;

    if (!is_finite(r_new) || !is_finite(omega_) || !is_finite(rd_new))
        throw SimDivergence("simulation diverged: non-finite state at t = " + std::to_string(t_));
    r_ = project_to_so3(r_new);
    rd_ = project_to_so3(rd_new);

    Vec3 wd = sc_.reference.omega_d(t_);
    Vec3 wdd = sc_.reference.omega_d_dot(t_);
    if (norm(wd) > sc_.reference.c_omega + 1e-9 || norm(wdd) > sc_.reference.c_accel + 1e-9)
        throw std::runtime_error("reference trajectory violates its stated bounds at t = " +
                                 std::to_string(t_));
}

SimLog HybridSim::run() {
    long nsteps = std::lround(sc_.horizon / sc_.step);
    if (nsteps <= 0 && sc_.horizon > 0.0) nsteps = 1;
    if (sc_.horizon == 0.0) return log_;  // empty log by contract
    for (long i = 0; i < nsteps; ++i) {
        process_boundary();
        flow();
    }
    process_boundary();
    return log_;
}

SimLog run(const Scenario& sc, const SynergisticFamily* fam) {
    HybridSim sim(sc, fam);
    return sim.run();
}

RunSummary summarize(const SimLog& log, double theta_thresh, double hold) {
    RunSummary s;
    s.jump_count = log.jumps.size();
    if (log.rows.empty()) return s;
    s.eval_total = log.rows.back().eval_cum;
    s.final_theta = log.rows.back().theta_err;
    double below_since = -1.0;
    bool found = false;
    for (const SimRow& r : log.rows) {
        s.max_theta = std::max(s.max_theta, r.theta_err);
        if (found) continue;
        if (r.theta_err < theta_thresh) {
            if (below_since < 0.0) below_since = r.t;
            if (r.t - below_since >= hold) {
                s.convergence_time = below_since;
                found = true;
            }
        } else {
            below_since = -1.0;
        }
    }
    // a run that stays below the threshold through the final sample but for
    // less than `hold` seconds does not count as converged
    return s;
}

}  // namespace so3syn
