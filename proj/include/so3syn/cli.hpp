// Configuration-driven entry points shared by the command-line tool and the
// test suites: build shapes and families, run certification, execute
// simulation scenarios, and emit CSV logs plus human-readable summaries.
#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "so3syn/sim.hpp"

namespace so3syn {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// One simulation run: a law, whether its switch is live, and the initial
/// logic variable. Solo ignores `switching`.
struct ControllerRun {
    ControllerLaw law = ControllerLaw::PiCS;
    bool switching = true;
    int q0 = 0;
    std::string name;
};

/// How the initial attitude is specified: an explicit axis-angle, or the
/// exactly solved unwanted critical point of family member `q` on
/// eigenvector branch `branch`.
struct InitialCondition {
    enum class Mode { AxisAngle, CriticalPoint } mode = Mode::AxisAngle;
    Vec3 axis{1, 0, 0};
    double angle = 0.0;
    Vec3 branch{0, 0, 1};
    int q = 0;
    Vec3 omega;
};

struct SweepConfig {
    enum class Mode { GapVsK, GapVsXi, PotentialCurves } mode = Mode::GapVsK;
    double k_min = 0.1;
    double k_max = 0.5;
    int k_count = 9;
    double xi_min = 0.55;
    double xi_max = 0.95;
    int xi_count = 9;
    int samples_per_segment = 720;
};

struct RunConfig {
    // shape: explicit matrix or weighted inertial vectors
    bool has_matrix = false;
    Mat3 shape_matrix;
    InertialVectorSet vectors;
    std::optional<ShapeClass> class_override;
    double mult_tol = tol::structural;

    double k = 0.465;
    double delta_fraction = 0.8;
    int branch_grid = 720;

    std::vector<ControllerRun> controllers;
    Gains gains;
    NonCSParams noncs;
    NoiseConfig noise;
    std::uint64_t seed = 1;
    InitialCondition initial;
    PlantParams plant;
    double c_omega = 1.25;
    double c_accel = 1.25;
    double horizon = 20.0;
    double step = 1e-3;

    SweepConfig sweep;
};

/// Parse a JSON config document. Unknown keys are rejected with the key path
/// in the message.
RunConfig parse_config(const std::string& json_text);
std::string serialize_config(const RunConfig& cfg);

TraceShape shape_from_config(const RunConfig& cfg);
SynergisticFamily family_from_config(const RunConfig& cfg);
Rotation initial_attitude(const RunConfig& cfg, const SynergisticFamily* fam);

/// Built-in presets: certify-item1..5, fig4a, fig4b, fig5, fig6, fig7,
/// gapk-item1..3, gapxi-item2..3.
RunConfig preset_config(const std::string& name);
std::vector<std::pair<std::string, std::string>> preset_list();

/// Exit codes: 0 success, 1 config error, 2 certification failure,
/// 3 non-finite simulation state.
int cmd_certify(const RunConfig& cfg, const std::string& out_dir, std::ostream& diag);
int cmd_simulate(const RunConfig& cfg, const std::string& out_dir, std::ostream& diag);
int cmd_sweep(const RunConfig& cfg, const std::string& out_dir, std::ostream& diag);
int cmd_presets(std::ostream& out);

}  // namespace so3syn
