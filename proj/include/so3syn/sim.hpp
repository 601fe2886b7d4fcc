// Rigid-body plant, reference generator, measurement noise, the four
// tracking controllers, and a fixed-step hybrid integrator with jump logic,
// Lyapunov monitoring, and potential-evaluation counting.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "so3syn/rng.hpp"
#include "so3syn/synergy.hpp"

namespace so3syn {

struct PlantParams {
    Mat3 inertia = Mat3::diag(0.5, 0.7, 0.3);  // kg m^2

    void validate() const;
};

/// Reference attitude trajectory Rd' = Rd wd^, with velocity and
/// acceleration bounded by c_omega / c_accel (checked while simulating).
struct ReferenceConfig {
    Rotation rd0;
    std::function<Vec3(double)> omega_d;
    std::function<Vec3(double)> omega_d_dot;
    double c_omega = 1.25;
    double c_accel = 1.25;
};

/// wd(t) = (t e^{-t/2}, 0.6 sin 0.4t, 0.6 sin 0.7t) from Rd(0) = I.
/// Peaks near |wd| ~ 1.06 and |wd'| ~ 1.12, inside the default bounds.
ReferenceConfig default_reference();

/// Attitude measurement Rbar = R R_a(alpha, n/|n|) with n standard normal and
/// alpha ~ U(0, attitude_max_angle); rate measurement wbar = w + n_w with
/// n_w componentwise normal of stddev gyro_sigma. One draw set per control
/// period, in the order: 3 normals, 1 uniform, 3 normals (skipped entirely
/// for a channel whose parameter is zero).
struct NoiseConfig {
    double attitude_max_angle = 0.0;
    double gyro_sigma = 0.0;
    std::uint64_t seed = 1;
};

NoiseConfig benchmark_noise(std::uint64_t seed);

enum class ControllerLaw {
    Solo,   // synergistic PD with the logic variable frozen
    PiCS,   // hybrid switching on the refined gap over the peer subset
    MuCS,   // hybrid switching on the full-family gap
    NonCS,  // non-central baseline with two auxiliary expelling members
};

const char* controller_name(ControllerLaw law);

struct NonCSParams {
    Vec3 b1{1, 0, 0};
    Vec3 b2{0, 1, 0};
    double alpha = 1.5;
    double beta = 0.4;
    double delta = 0.025;
    double k1 = 30.0;
    double k2 = 3.0;

    /// Enforces 1 < alpha < 2, |beta| < alpha - 1,
    /// 0 < delta < min(2 - alpha, alpha - |beta| - 1), unit orthogonal b1, b2.
    void validate() const;
};

struct NonCSEval {
    double value = 0.0;
    Vec3 e_h;
};

/// Member potential and hybrid error vector at the right error X = R^T Rd,
/// q in {0,1,2}: member 0 stabilizes both body vectors, members 1 and 2 mix
/// one alignment term with one deliberately offset term.
NonCSEval noncs_errors(const NonCSParams& p, const Rotation& x, int q);

struct Gains {
    double k1 = 60.0;
    double k2 = 6.0;
};

struct PlantDerivative {
    Mat3 rdot;
    Vec3 omega_dot;
};

/// Rdot = R w^,  J wdot = -w^ J w + tau.
PlantDerivative plant_derivative(const PlantParams& plant, const Mat3& r, const Vec3& omega,
                                 const Vec3& tau);

/// Feedforward + proportional + derivative law
/// tau = wd^ J (wtilde + wd) + J wd' - k1 Rd^T rho_V(Rtilde, q) - k2 wtilde,
/// formed from the measured attitude and rate.
Vec3 synergistic_torque(const SynergisticFamily& fam, const Gains& g, int q, const Mat3& inertia,
                        const Rotation& r_meas, const Vec3& omega_meas, const Rotation& rd,
                        const Vec3& omega_d, const Vec3& omega_d_dot);

Vec3 noncs_torque(const NonCSParams& p, int q, const Mat3& inertia, const Rotation& r_meas,
                  const Vec3& omega_meas, const Rotation& rd, const Vec3& omega_d,
                  const Vec3& omega_d_dot);

struct SwitchDecision {
    bool jump = false;
    int q_next = 0;
    int evals = 0;   // potential evaluations spent on this check
    double gap = 0.0;
};

/// Hysteresis switching check. Evaluates |peers(q)|+1 potentials for PiCS,
/// the whole family for MuCS, and all three members for NonCS. The jump fires
/// on a strict gap > delta (flow wins on the overlap) and lands on the
/// lowest-index argmin over the whole family.
SwitchDecision switch_decision(ControllerLaw law, const SynergisticFamily* fam,
                               const NonCSParams* noncs, const Rotation& error_attitude, int q,
                               bool switching_enabled);

/// U(x) = k1 V(Rtilde, q) + wtilde^T J wtilde; zero exactly on the target set.
double lyapunov(const SynergisticFamily& fam, const Gains& g, const Mat3& inertia,
                const Rotation& r_tilde, const Vec3& omega_tilde, int q);

struct SimRow {
    double t = 0.0;
    long j = 0;
    int q = 0;
    double theta_err = 0.0;
    double omega_err_norm = 0.0;
    double torque_norm = 0.0;
    double v = 0.0;
    double u = 0.0;
    long eval_cum = 0;
};

struct JumpEvent {
    double t = 0.0;
    long j = 0;
    int q_minus = 0;
    int q_plus = 0;
    double gap = 0.0;
};

struct SimLog {
    std::vector<SimRow> rows;
    std::vector<JumpEvent> jumps;

    void write_csv(std::ostream& os) const;
    void write_jumps_csv(std::ostream& os) const;
};

struct Scenario {
    ControllerLaw law = ControllerLaw::PiCS;
    bool switching = true;  // ignored for Solo, which never switches
    int q0 = 0;
    Rotation r0;
    Vec3 omega0;
    Gains gains;
    NonCSParams noncs;
    PlantParams plant;
    ReferenceConfig reference = default_reference();
    NoiseConfig noise;
    double horizon = 20.0;
    double step = 1e-3;
};

/// Thrown when the integrated state stops being finite.
struct SimDivergence : std::runtime_error {
    explicit SimDivergence(const std::string& what) : std::runtime_error(what) {}
};

/// One-control-period stepper, exposed so tests can drive single transitions.
/// Every boundary processes measurement sampling, at most one jump, torque
/// computation, and logging; flow() advances one RK4 step with the
/// measurement error held and re-projects both attitudes onto SO(3).
class HybridSim {
public:
    HybridSim(const Scenario& sc, const SynergisticFamily* fam);

    double t() const { return t_; }
    long jumps() const { return j_; }
    int q() const { return q_; }
    const Rotation& attitude() const { return r_; }
    const Vec3& rate() const { return omega_; }
    const Rotation& reference_attitude() const { return rd_; }
    Rotation error_attitude() const { return Rotation::from_matrix_unchecked(r_.matrix() * rd_.matrix().transpose()); }

    SimLog& log() { return log_; }
    const SimLog& log() const { return log_; }

    /// Measurement + switch + log at the current boundary.
    void process_boundary();
    /// One RK4 flow step using the most recent measurement error.
    void flow();

    SimLog run();

private:
    Vec3 torque(const Mat3& r_raw, const Vec3& omega, const Mat3& rd_raw, double t) const;

    Scenario sc_;
    const SynergisticFamily* fam_;
    Rng rng_;
    Mat3 inertia_inv_;
    double t_ = 0.0;
    long j_ = 0;
    int q_ = 0;
    Rotation r_, rd_;
    Vec3 omega_;
    long eval_cum_ = 0;
    SimLog log_;
    Rotation meas_rot_err_;  // held over the current period
    Vec3 meas_gyro_err_;
};

SimLog run(const Scenario& sc, const SynergisticFamily* fam);

struct RunSummary {
    std::optional<double> convergence_time;  // first t with theta < thresh held for `hold`
    long jump_count = 0;
    long eval_total = 0;
    double final_theta = 0.0;
    double max_theta = 0.0;
};

RunSummary summarize(const SimLog& log, double theta_thresh = 0.01, double hold = 1.0);

}  // namespace so3syn
