#include "so3syn/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

using namespace so3syn;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "so3syn_test" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

const char* kSampleConfig = R"json({
  "shape": {"matrix": [[0.2, 0, 0], [0, 0.4, 0], [0, 0, 0.4]]},
  "family": {"k": 0.465, "delta_fraction": 0.8, "branch_grid": 180},
  "controllers": ["pics"],
  "gains": {"k1": 60, "k2": 6},
  "noise": {"attitude_max_angle": 0.031415926535897932, "gyro_sigma": 0.01},
  "seed": 5,
  "initial": {"mode": "critical_point", "q": 0, "branch": [0, 0, 1]},
  "plant": {"inertia_diag": [0.5, 0.7, 0.3]},
  "sim": {"horizon": 1.0, "step": 0.001}
})json";

}  // namespace

TEST_CASE("config parsing and semantic round trip") {
    RunConfig cfg = parse_config(kSampleConfig);
    CHECK(cfg.k == 0.465);
    CHECK(cfg.branch_grid == 180);
    CHECK(cfg.seed == 5);
    CHECK(cfg.initial.mode == InitialCondition::Mode::CriticalPoint);
    REQUIRE(cfg.controllers.size() == 1);
    CHECK(cfg.controllers[0].law == ControllerLaw::PiCS);

    std::string once = serialize_config(cfg);
    std::string twice = serialize_config(parse_config(once));
    CHECK(once == twice);
}

TEST_CASE("config errors carry the offending key") {
    CHECK_THROWS_WITH_AS(parse_config(R"({"shape": {"matrix": [[1,0,0],[0,1,0],[0,0,1]]}, "bogus": 1})"),
                         doctest::Contains("bogus"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"gains": {"k1": 60}})"), ConfigError);   // no shape
    CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"shape": {"matrix": [[1]], "vectors": []}})"), ConfigError);
}

TEST_CASE("vector-defined shapes parse and build") {
    RunConfig cfg = parse_config(R"json({
      "shape": {"vectors": [{"a": [1,0,0], "w": 0.2}, {"a": [0,1,0], "w": 0.4},
                             {"a": [0,0,1], "w": 0.4}]},
      "family": {"k": 0.465}
    })json");
    TraceShape s = shape_from_config(cfg);
    CHECK(frobenius_norm(s.m() - Mat3::diag(0.2, 0.4, 0.4)) < 1e-15);
}

TEST_CASE("presets: the documented set exists and parses") {
    for (const char* name : {"certify-item1", "certify-item2", "certify-item3", "certify-item4",
                             "certify-item5", "fig4a", "fig4b", "fig5", "fig6", "fig7"}) {
        RunConfig cfg = preset_config(name);
        // every preset survives a serialize/parse cycle
        CHECK(serialize_config(parse_config(serialize_config(cfg))) == serialize_config(cfg));
    }
    CHECK_THROWS_AS(preset_config("fig99"), ConfigError);
    CHECK(preset_list().size() >= 10);
}

TEST_CASE("cmd_certify: benchmark family passes and reports the bound") {
    fs::path dir = fresh_dir("certify2");
    std::ostringstream diag;
    RunConfig cfg = preset_config("certify-item2");
    CHECK(cmd_certify(cfg, dir.string(), diag) == 0);
    std::string report = slurp(dir / "certification.txt");
    CHECK(report.find("0.0712") != std::string::npos);
    CHECK(report.find("PASS") != std::string::npos);
}

TEST_CASE("cmd_certify: infeasible gain fails at family construction") {
    RunConfig cfg = preset_config("certify-item2");
    cfg.k = 0.60;  // above 1/sqrt(6 - 4 xi^2) ~ 0.5164
    CHECK_THROWS_AS(family_from_config(cfg), std::invalid_argument);
}

TEST_CASE("cmd_certify: searched-direction class certifies numerically") {
    fs::path dir = fresh_dir("certify5");
    std::ostringstream diag;
    RunConfig cfg = preset_config("certify-item5");
    cfg.branch_grid = 90;
    CHECK(cmd_certify(cfg, dir.string(), diag) == 0);
    CHECK(slurp(dir / "certification.txt").find("PASS") != std::string::npos);
}

TEST_CASE("cmd_simulate: zero horizon writes an empty log and succeeds") {
    fs::path dir = fresh_dir("sim0");
    std::ostringstream diag;
    RunConfig cfg = parse_config(kSampleConfig);
    cfg.horizon = 0.0;
    CHECK(cmd_simulate(cfg, dir.string(), diag) == 0);
    std::string csv = slurp(dir / "pics.csv");
    CHECK(csv == "t,j,q,theta_err,omega_err_norm,torque_norm,V,U,eval_count_cum\n");
}

TEST_CASE("cmd_simulate: the critical-point scenario emits one log per controller") {
    fs::path dir = fresh_dir("fig5");
    std::ostringstream diag;
    RunConfig cfg = preset_config("fig5");
    cfg.horizon = 1.5;  // convergence is not asserted here, keep the test fast
    CHECK(cmd_simulate(cfg, dir.string(), diag) == 0);
    for (const char* name : {"solo", "pics", "mucs", "noncs"}) {
        CHECK(fs::exists(dir / (std::string(name) + ".csv")));
        CHECK(fs::exists(dir / (std::string(name) + "_jumps.csv")));
    }
    auto jumps = parse_csv(slurp(dir / "pics_jumps.csv"));
    REQUIRE(jumps.size() >= 2);  // header plus the t = 0 jump
    CHECK(std::stod(jumps[1][0]) == 0.0);
    CHECK(fs::exists(dir / "summary.txt"));
}

TEST_CASE("cmd_sweep: gap bound grows with the gain and hits the benchmark row") {
    fs::path dir = fresh_dir("sweepk");
    std::ostringstream diag;
    RunConfig cfg = preset_config("gapk-item2");
    CHECK(cmd_sweep(cfg, dir.string(), diag) == 0);
    auto rows = parse_csv(slurp(dir / "gap_vs_k.csv"));
    REQUIRE(rows.size() > 10);
    CHECK(rows[0][0] == "k");
    double prev = -1.0;
    bool found_benchmark_row = false;
    for (size_t i = 1; i < rows.size(); ++i) {
        double k = std::stod(rows[i][0]);
        double closed = std::stod(rows[i][2]);
        double certified = std::stod(rows[i][3]);
        CHECK(closed >= prev);  // monotone within the feasibility range
        prev = closed;
        CHECK(std::abs(closed - certified) / closed < 0.01);
        if (std::abs(k - 0.465) < 1e-12) {
            found_benchmark_row = true;
            CHECK(std::abs(closed - 0.0712) < 0.0005);
        }
    }
    CHECK(found_benchmark_row);
}

TEST_CASE("cmd_sweep: six-direction closed form stays below the certified gap") {
    fs::path dir = fresh_dir("sweepk3");
    std::ostringstream diag;
    RunConfig cfg = preset_config("gapk-item3");
    cfg.sweep.k_count = 9;
    CHECK(cmd_sweep(cfg, dir.string(), diag) == 0);
    auto rows = parse_csv(slurp(dir / "gap_vs_k.csv"));
    for (size_t i = 1; i < rows.size(); ++i)
        CHECK(std::stod(rows[i][2]) <= std::stod(rows[i][3]) + 1e-9);
}

TEST_CASE("cmd_sweep: potential curves start at zero and stay nonnegative") {
    fs::path dir = fresh_dir("fig4a");
    std::ostringstream diag;
    RunConfig cfg = preset_config("fig4a");
    cfg.sweep.samples_per_segment = 90;
    CHECK(cmd_sweep(cfg, dir.string(), diag) == 0);
    auto rows = parse_csv(slurp(dir / "potential_curves.csv"));
    REQUIRE(rows.size() > 90);
    REQUIRE(rows[0].size() == 3 + 4);  // theta, segment, psi, V0..V3
    CHECK(std::stod(rows[1][2]) == 0.0);
    for (size_t i = 1; i < rows.size(); ++i)
        for (size_t c = 2; c < rows[i].size(); ++c) CHECK(std::stod(rows[i][c]) >= -1e-12);
}

TEST_CASE("cmd_simulate: a diverging closed loop exits with code 3") {
    fs::path dir = fresh_dir("diverge");
    std::ostringstream diag;
    RunConfig cfg = parse_config(R"json({
      "shape": {"matrix": [[0.2, 0, 0], [0, 0.4, 0], [0, 0, 0.4]]},
      "family": {"k": 0.465},
      "controllers": ["pics"],
      "gains": {"k1": 1e12, "k2": 1e-9},
      "initial": {"mode": "axis_angle", "axis": [0, 0, 1], "angle": 3.0},
      "sim": {"horizon": 2.0, "step": 0.05}
    })json");
    CHECK(cmd_simulate(cfg, dir.string(), diag) == 3);
}

TEST_CASE("preset listing prints one line per preset") {
    std::ostringstream out;
    CHECK(cmd_presets(out) == 0);
    CHECK(out.str().find("certify-item2") != std::string::npos);
    CHECK(out.str().find("fig7") != std::string::npos);
}
