#include "so3syn/cli.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace so3syn {

namespace {

constexpr double kPi = 3.14159265358979323846;

using nlohmann::json;

void check_keys(const json& j, const std::string& ctx, std::initializer_list<const char*> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        if (!ok) throw ConfigError("unknown key \"" + ctx + "." + it.key() + "\"");
    }
}

Vec3 vec3_from(const json& j, const std::string& ctx) {
    if (!j.is_array() || j.size() != 3) throw ConfigError(ctx + ": expected a 3-array");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json vec3_to(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Mat3 mat3_from(const json& j, const std::string& ctx) {
    if (!j.is_array() || j.size() != 3) throw ConfigError(ctx + ": expected a 3x3 array");
    Mat3 m;
    for (int r = 0; r < 3; ++r) {
        if (!j[r].is_array() || j[r].size() != 3) throw ConfigError(ctx + ": expected a 3x3 array");
        for (int c = 0; c < 3; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

json mat3_to(const Mat3& m) {
    json rows = json::array();
    for (int r = 0; r < 3; ++r) rows.push_back(json::array({m(r, 0), m(r, 1), m(r, 2)}));
    return rows;
}

ShapeClass class_from_string(const std::string& s) {
    if (s == "item1") return ShapeClass::AllEqual;
    if (s == "item2") return ShapeClass::TwoLargeEqualPosMin;
    if (s == "item3") return ShapeClass::TwoLargeEqualAnyMin;
    if (s == "item4") return ShapeClass::TwoSmallEqual;
    if (s == "item5") return ShapeClass::AllDistinct;
    throw ConfigError("unknown class \"" + s + "\" (use item1..item5)");
}

std::string class_to_string(ShapeClass c) {
    switch (c) {
        case ShapeClass::AllEqual: return "item1";
        case ShapeClass::TwoLargeEqualPosMin: return "item2";
        case ShapeClass::TwoLargeEqualAnyMin: return "item3";
        case ShapeClass::TwoSmallEqual: return "item4";
        case ShapeClass::AllDistinct: return "item5";
    }
    return "?";
}

ControllerLaw law_from_string(const std::string& s) {
    if (s == "solo") return ControllerLaw::Solo;
    if (s == "pics") return ControllerLaw::PiCS;
    if (s == "mucs") return ControllerLaw::MuCS;
    if (s == "noncs") return ControllerLaw::NonCS;
    throw ConfigError("unknown controller \"" + s + "\" (use solo|pics|mucs|noncs)");
}

void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + p.string() + " for writing");
    os << content;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    RunConfig cfg;
    try {
        check_keys(j, "", {"shape", "family", "controllers", "gains", "noncs", "noise", "seed",
                           "initial", "plant", "reference", "sim", "sweep"});

        if (!j.contains("shape")) throw ConfigError("missing \"shape\" section");
        const json& sh = j["shape"];
        check_keys(sh, "shape", {"matrix", "vectors", "class_override", "mult_tol"});
        if (sh.contains("matrix") == sh.contains("vectors"))
            throw ConfigError("shape: give exactly one of \"matrix\" or \"vectors\"");
        if (sh.contains("matrix")) {
            cfg.has_matrix = true;
            cfg.shape_matrix = mat3_from(sh["matrix"], "shape.matrix");
        } else {
            for (const json& e : sh["vectors"]) {
                check_keys(e, "shape.vectors[]", {"a", "w"});
                cfg.vectors.items.push_back(
                    {vec3_from(e.at("a"), "shape.vectors[].a"), e.at("w").get<double>()});
            }
        }
        if (sh.contains("class_override"))
            cfg.class_override = class_from_string(sh["class_override"].get<std::string>());
        cfg.mult_tol = sh.value("mult_tol", tol::structural);

        if (j.contains("family")) {
            const json& f = j["family"];
            check_keys(f, "family", {"k", "delta_fraction", "branch_grid"});
            cfg.k = f.value("k", cfg.k);
            cfg.delta_fraction = f.value("delta_fraction", cfg.delta_fraction);
            cfg.branch_grid = f.value("branch_grid", cfg.branch_grid);
        }

        if (j.contains("controllers")) {
            for (const json& e : j["controllers"]) {
                ControllerRun run;
                if (e.is_string()) {
                    run.law = law_from_string(e.get<std::string>());
                    run.switching = run.law != ControllerLaw::Solo;
                    run.name = controller_name(run.law);
                } else {
                    check_keys(e, "controllers[]", {"law", "switching", "q", "name"});
                    run.law = law_from_string(e.at("law").get<std::string>());
                    run.switching = e.value("switching", run.law != ControllerLaw::Solo);
                    run.q0 = e.value("q", 0);
                    run.name = e.value("name", std::string(controller_name(run.law)));
                }
                cfg.controllers.push_back(std::move(run));
            }
        }

        if (j.contains("gains")) {
            check_keys(j["gains"], "gains", {"k1", "k2"});
            cfg.gains.k1 = j["gains"].value("k1", cfg.gains.k1);
            cfg.gains.k2 = j["gains"].value("k2", cfg.gains.k2);
        }
        if (j.contains("noncs")) {
            const json& n = j["noncs"];
            check_keys(n, "noncs", {"b1", "b2", "alpha", "beta", "delta", "k1", "k2"});
            if (n.contains("b1")) cfg.noncs.b1 = vec3_from(n["b1"], "noncs.b1");
            if (n.contains("b2")) cfg.noncs.b2 = vec3_from(n["b2"], "noncs.b2");
            cfg.noncs.alpha = n.value("alpha", cfg.noncs.alpha);
            cfg.noncs.beta = n.value("beta", cfg.noncs.beta);
            cfg.noncs.delta = n.value("delta", cfg.noncs.delta);
            cfg.noncs.k1 = n.value("k1", cfg.noncs.k1);
            cfg.noncs.k2 = n.value("k2", cfg.noncs.k2);
        }
        if (j.contains("noise")) {
            const json& n = j["noise"];
            check_keys(n, "noise", {"attitude_max_angle", "gyro_sigma"});
            cfg.noise.attitude_max_angle = n.value("attitude_max_angle", 0.0);
            cfg.noise.gyro_sigma = n.value("gyro_sigma", 0.0);
        }
        cfg.seed = j.value("seed", std::uint64_t{1});
        cfg.noise.seed = cfg.seed;

        if (j.contains("initial")) {
            const json& ic = j["initial"];
            check_keys(ic, "initial", {"mode", "axis", "angle", "branch", "q", "omega"});
            std::string mode = ic.value("mode", std::string("axis_angle"));
            if (mode == "axis_angle") {
                cfg.initial.mode = InitialCondition::Mode::AxisAngle;
                if (ic.contains("axis")) cfg.initial.axis = vec3_from(ic["axis"], "initial.axis");
                cfg.initial.angle = ic.value("angle", 0.0);
            } else if (mode == "critical_point") {
                cfg.initial.mode = InitialCondition::Mode::CriticalPoint;
                if (ic.contains("branch"))
                    cfg.initial.branch = vec3_from(ic["branch"], "initial.branch");
                cfg.initial.q = ic.value("q", 0);
            } else {
                throw ConfigError("initial.mode must be axis_angle or critical_point");
            }
            if (ic.contains("omega")) cfg.initial.omega = vec3_from(ic["omega"], "initial.omega");
        }

        if (j.contains("plant")) {
            const json& p = j["plant"];
            check_keys(p, "plant", {"inertia_diag", "inertia"});
            if (p.contains("inertia")) cfg.plant.inertia = mat3_from(p["inertia"], "plant.inertia");
            else if (p.contains("inertia_diag")) {
                Vec3 d = vec3_from(p["inertia_diag"], "plant.inertia_diag");
                cfg.plant.inertia = Mat3::diag(d.x, d.y, d.z);
            }
        }
        if (j.contains("reference")) {
            const json& r = j["reference"];
            check_keys(r, "reference", {"c_omega", "c_accel"});
            cfg.c_omega = r.value("c_omega", cfg.c_omega);
            cfg.c_accel = r.value("c_accel", cfg.c_accel);
        }
        if (j.contains("sim")) {
            const json& s = j["sim"];
            check_keys(s, "sim", {"horizon", "step"});
            cfg.horizon = s.value("horizon", cfg.horizon);
            cfg.step = s.value("step", cfg.step);
        }
        if (j.contains("sweep")) {
            const json& s = j["sweep"];
            check_keys(s, "sweep",
                       {"mode", "k_min", "k_max", "k_count", "xi_min", "xi_max", "xi_count",
                        "samples_per_segment"});
            std::string mode = s.value("mode", std::string("gap_vs_k"));
            if (mode == "gap_vs_k") cfg.sweep.mode = SweepConfig::Mode::GapVsK;
            else if (mode == "gap_vs_xi") cfg.sweep.mode = SweepConfig::Mode::GapVsXi;
            else if (mode == "potential_curves") cfg.sweep.mode = SweepConfig::Mode::PotentialCurves;
            else throw ConfigError("sweep.mode must be gap_vs_k, gap_vs_xi or potential_curves");
            cfg.sweep.k_min = s.value("k_min", cfg.sweep.k_min);
            cfg.sweep.k_max = s.value("k_max", cfg.sweep.k_max);
            cfg.sweep.k_count = s.value("k_count", cfg.sweep.k_count);
            cfg.sweep.xi_min = s.value("xi_min", cfg.sweep.xi_min);
            cfg.sweep.xi_max = s.value("xi_max", cfg.sweep.xi_max);
            cfg.sweep.xi_count = s.value("xi_count", cfg.sweep.xi_count);
            cfg.sweep.samples_per_segment = s.value("samples_per_segment", cfg.sweep.samples_per_segment);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config error: ") + e.what());
    }
    return cfg;
}

std::string serialize_config(const RunConfig& cfg) {
    json j;
    json sh;
    if (cfg.has_matrix) {
        sh["matrix"] = mat3_to(cfg.shape_matrix);
    } else {
        json vs = json::array();
        for (const auto& it : cfg.vectors.items) vs.push_back({{"a", vec3_to(it.a)}, {"w", it.w}});
        sh["vectors"] = vs;
    }
    if (cfg.class_override) sh["class_override"] = class_to_string(*cfg.class_override);
    sh["mult_tol"] = cfg.mult_tol;
    j["shape"] = sh;
    j["family"] = {{"k", cfg.k}, {"delta_fraction", cfg.delta_fraction}, {"branch_grid", cfg.branch_grid}};
    json ctrls = json::array();
    for (const auto& c : cfg.controllers)
        ctrls.push_back({{"law", controller_name(c.law)},
                         {"switching", c.switching},
                         {"q", c.q0},
                         {"name", c.name}});
    j["controllers"] = ctrls;
    j["gains"] = {{"k1", cfg.gains.k1}, {"k2", cfg.gains.k2}};
    j["noncs"] = {{"b1", vec3_to(cfg.noncs.b1)}, {"b2", vec3_to(cfg.noncs.b2)},
                  {"alpha", cfg.noncs.alpha},    {"beta", cfg.noncs.beta},
                  {"delta", cfg.noncs.delta},    {"k1", cfg.noncs.k1},
                  {"k2", cfg.noncs.k2}};
    j["noise"] = {{"attitude_max_angle", cfg.noise.attitude_max_angle},
                  {"gyro_sigma", cfg.noise.gyro_sigma}};
    j["seed"] = cfg.seed;
    json ic;
    if (cfg.initial.mode == InitialCondition::Mode::AxisAngle) {
        ic["mode"] = "axis_angle";
        ic["axis"] = vec3_to(cfg.initial.axis);
        ic["angle"] = cfg.initial.angle;
    } else {
        ic["mode"] = "critical_point";
        ic["branch"] = vec3_to(cfg.initial.branch);
        ic["q"] = cfg.initial.q;
    }
    ic["omega"] = vec3_to(cfg.initial.omega);
    j["initial"] = ic;
    j["plant"] = {{"inertia", mat3_to(cfg.plant.inertia)}};
    j["reference"] = {{"c_omega", cfg.c_omega}, {"c_accel", cfg.c_accel}};
    j["sim"] = {{"horizon", cfg.horizon}, {"step", cfg.step}};
    const char* mode = cfg.sweep.mode == SweepConfig::Mode::GapVsK        ? "gap_vs_k"
                       : cfg.sweep.mode == SweepConfig::Mode::GapVsXi     ? "gap_vs_xi"
                                                                          : "potential_curves";
    j["sweep"] = {{"mode", mode},
                  {"k_min", cfg.sweep.k_min},
                  {"k_max", cfg.sweep.k_max},
                  {"k_count", cfg.sweep.k_count},
                  {"xi_min", cfg.sweep.xi_min},
                  {"xi_max", cfg.sweep.xi_max},
                  {"xi_count", cfg.sweep.xi_count},
                  {"samples_per_segment", cfg.sweep.samples_per_segment}};
    return j.dump(2) + "\n";
}

TraceShape shape_from_config(const RunConfig& cfg) {
    try {
        if (cfg.has_matrix) return TraceShape::from_matrix(cfg.shape_matrix, cfg.mult_tol);
        return TraceShape::from_vectors(cfg.vectors, cfg.mult_tol);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

SynergisticFamily family_from_config(const RunConfig& cfg) {
    return SynergisticFamily::make(shape_from_config(cfg), cfg.k, cfg.delta_fraction,
                                   cfg.class_override, cfg.branch_grid);
}

Rotation initial_attitude(const RunConfig& cfg, const SynergisticFamily* fam) {
    if (cfg.initial.mode == InitialCondition::Mode::AxisAngle) {
        if (cfg.initial.angle == 0.0) return Rotation::identity();
        return rodrigues(cfg.initial.angle, normalized(cfg.initial.axis));
    }
    if (!fam) throw ConfigError("initial.mode critical_point requires a synergistic family");
    CriticalPointRecord rec = solve_critical_point(*fam, cfg.initial.q, normalized(cfg.initial.branch));
    return rec.y;
}

namespace {

RunConfig base_item2_config() {
    RunConfig cfg;
    cfg.has_matrix = true;
    cfg.shape_matrix = Mat3::diag(0.2, 0.4, 0.4);
    cfg.k = 0.465;
    cfg.delta_fraction = 0.8;
    return cfg;
}

void add_run(RunConfig& cfg, ControllerLaw law, bool sw, int q0, const std::string& name) {
    cfg.controllers.push_back({law, sw, q0, name});
}

}  // namespace

RunConfig preset_config(const std::string& name) {
    if (name == "certify-item1") {
        RunConfig cfg;
        cfg.has_matrix = true;
        cfg.shape_matrix = Mat3::diag(0.4, 0.4, 0.4);
        cfg.k = 0.3;
        return cfg;
    }
    if (name == "certify-item2") return base_item2_config();
    if (name == "certify-item3") {
        RunConfig cfg = base_item2_config();
        cfg.class_override = ShapeClass::TwoLargeEqualAnyMin;
        return cfg;
    }
    if (name == "certify-item4") {
        RunConfig cfg;
        cfg.has_matrix = true;
        cfg.shape_matrix = Mat3::diag(0.3, 0.3, 0.6);
        cfg.k = 0.4;
        return cfg;
    }
    if (name == "certify-item5") {
        RunConfig cfg;
        cfg.has_matrix = true;
        cfg.shape_matrix = Mat3::diag(0.1, 0.3, 0.6);
        cfg.k = 0.4;
        return cfg;
    }
    if (name == "fig5" || name == "fig6" || name == "fig7") {
        RunConfig cfg = base_item2_config();
        cfg.noise = benchmark_noise(cfg.seed);
        cfg.gains = {60.0, 6.0};
        cfg.horizon = 20.0;
        if (name == "fig5") {
            cfg.initial.mode = InitialCondition::Mode::CriticalPoint;
            cfg.initial.q = 0;
            cfg.initial.branch = {0, 0, 1};
            add_run(cfg, ControllerLaw::Solo, false, 0, "solo");
            add_run(cfg, ControllerLaw::PiCS, true, 0, "pics");
            add_run(cfg, ControllerLaw::MuCS, true, 0, "mucs");
            add_run(cfg, ControllerLaw::NonCS, true, 0, "noncs");
        } else if (name == "fig6") {
            cfg.initial.mode = InitialCondition::Mode::AxisAngle;
            cfg.initial.axis = normalized({0.25, -0.69, 0.69});
            cfg.initial.angle = 1.15 * kPi;
            add_run(cfg, ControllerLaw::Solo, false, 0, "solo");
            add_run(cfg, ControllerLaw::PiCS, true, 0, "pics");
            add_run(cfg, ControllerLaw::MuCS, true, 0, "mucs");
            add_run(cfg, ControllerLaw::NonCS, true, 0, "noncs");
        } else {
            cfg.initial.mode = InitialCondition::Mode::CriticalPoint;
            cfg.initial.q = 0;
            cfg.initial.branch = {0, 0, 1};
            for (int q = 0; q < 4; ++q)
                add_run(cfg, ControllerLaw::Solo, false, q, "pics_fixed_q" + std::to_string(q));
            for (int q = 0; q < 3; ++q)
                add_run(cfg, ControllerLaw::NonCS, false, q, "noncs_fixed_q" + std::to_string(q));
        }
        return cfg;
    }
    if (name == "fig4a" || name == "fig4b") {
        RunConfig cfg = base_item2_config();
        if (name == "fig4b") cfg.class_override = ShapeClass::TwoLargeEqualAnyMin;
        cfg.sweep.mode = SweepConfig::Mode::PotentialCurves;
        cfg.sweep.samples_per_segment = 720;
        return cfg;
    }
    if (name == "gapk-item1") {
        RunConfig cfg;
        cfg.has_matrix = true;
        cfg.shape_matrix = Mat3::diag(0.4, 0.4, 0.4);
        cfg.k = 0.3;
        cfg.sweep = {SweepConfig::Mode::GapVsK, 0.1, 0.7, 13, 0.55, 0.95, 9, 720};
        return cfg;
    }
    if (name == "gapk-item2" || name == "gapk-item3") {
        RunConfig cfg = base_item2_config();
        if (name == "gapk-item3") cfg.class_override = ShapeClass::TwoLargeEqualAnyMin;
        cfg.sweep = {SweepConfig::Mode::GapVsK, 0.1, 0.51, 83, 0.55, 0.95, 9, 720};
        return cfg;
    }
    if (name == "gapxi-item2" || name == "gapxi-item3") {
        RunConfig cfg = base_item2_config();
        if (name == "gapxi-item3") cfg.class_override = ShapeClass::TwoLargeEqualAnyMin;
        cfg.sweep = {SweepConfig::Mode::GapVsXi, 0.1, 0.5, 9, 0.55, 0.95, 9, 720};
        return cfg;
    }
    throw ConfigError("unknown preset \"" + name + "\" (try: so3syn presets)");
}

std::vector<std::pair<std::string, std::string>> preset_list() {
    return {
        {"certify-item1", "certify: equal-weight shape M = 0.4 I, k = 0.3"},
        {"certify-item2", "certify: M = diag(0.2, 0.4, 0.4), k = 0.465 (four directions)"},
        {"certify-item3", "certify: same shape forced to the six-direction family"},
        {"certify-item4", "certify: M = diag(0.3, 0.3, 0.6), k = 0.4 (two directions)"},
        {"certify-item5", "certify: M = diag(0.1, 0.3, 0.6), k = 0.4 (searched direction)"},
        {"fig4a", "sweep: potential curves along three test axes, four-member family"},
        {"fig4b", "sweep: potential curves along three test axes, six-member family"},
        {"fig5", "simulate: start at a critical point; solo, pics, mucs, noncs"},
        {"fig6", "simulate: unwinding initial condition; solo, pics, mucs, noncs"},
        {"fig7", "simulate: switching disabled, every fixed member of pics and noncs"},
        {"gapk-item1", "sweep: gap bound vs gain k for the equal-weight shape"},
        {"gapk-item2", "sweep: gap bound vs gain k for diag(0.2, 0.4, 0.4)"},
        {"gapk-item3", "sweep: gap bound vs gain k, six-direction variant"},
        {"gapxi-item2", "sweep: gap bound vs spectrum ratio xi, four directions"},
        {"gapxi-item3", "sweep: gap bound vs spectrum ratio xi, six directions"},
    };
}

int cmd_certify(const RunConfig& cfg, const std::string& out_dir, std::ostream& diag) {
    SynergisticFamily fam = family_from_config(cfg);
    if (fam.shape().classification().near_degenerate)
        diag << "warning: eigenvalue gaps within 10x of the multiplicity tolerance; "
                "the direction-set choice changes discontinuously across classes\n";
    CertificationReport rep = certify(fam, cfg.branch_grid);
    std::filesystem::create_directories(out_dir);
    write_file(std::filesystem::path(out_dir) / "certification.txt", rep.to_text());
    diag << rep.to_text();
    return rep.passed ? 0 : 2;
}

int cmd_simulate(const RunConfig& cfg, const std::string& out_dir, std::ostream& diag) {
    if (cfg.controllers.empty()) throw ConfigError("simulate: no controllers configured");
    SynergisticFamily fam = family_from_config(cfg);
    Rotation r0 = initial_attitude(cfg, &fam);
    std::filesystem::create_directories(out_dir);

    std::ostringstream summary;
    summary << "simulation summary\n"
            << "convergence = first t with theta_err < 0.01 rad sustained for 1 s "
               "(artifact definition)\n"
            << "name, law, switching, q0, converged_at_s, jumps, potential_evals, final_theta_rad\n";

    for (const ControllerRun& run_cfg : cfg.controllers) {
        Scenario sc;
        sc.law = run_cfg.law;
        sc.switching = run_cfg.switching;
        sc.q0 = run_cfg.q0;
        sc.r0 = r0;
        sc.omega0 = cfg.initial.omega;
        sc.gains = cfg.gains;
        sc.noncs = cfg.noncs;
        sc.plant = cfg.plant;
        sc.reference = default_reference();
        sc.reference.c_omega = cfg.c_omega;
        sc.reference.c_accel = cfg.c_accel;
        sc.noise = cfg.noise;
        sc.noise.seed = cfg.seed;
        sc.horizon = cfg.horizon;
        sc.step = cfg.step;

        try {
            SimLog log = run(sc, &fam);
            std::ofstream main_csv(std::filesystem::path(out_dir) / (run_cfg.name + ".csv"),
                                   std::ios::binary);
            log.write_csv(main_csv);
            std::ofstream jumps_csv(
                std::filesystem::path(out_dir) / (run_cfg.name + "_jumps.csv"), std::ios::binary);
            log.write_jumps_csv(jumps_csv);

            RunSummary s = summarize(log);
            summary << run_cfg.name << ", " << controller_name(run_cfg.law) << ", "
                    << (run_cfg.switching ? "on" : "off") << ", " << run_cfg.q0 << ", "
                    << (s.convergence_time ? fmt(*s.convergence_time) : std::string("never"))
                    << ", " << s.jump_count << ", " << s.eval_total << ", " << fmt(s.final_theta)
                    << "\n";
        } catch (const SimDivergence& e) {
            diag << run_cfg.name << ": " << e.what() << "\n";
            return 3;
        }
    }
    write_file(std::filesystem::path(out_dir) / "summary.txt", summary.str());
    diag << summary.str();
    return 0;
}

namespace {

int sweep_gap_grid(const RunConfig& cfg, const std::string& out_dir, bool vs_xi) {
    std::ostringstream csv;
    csv << (vs_xi ? "xi,k,delta_bar_closed,delta_bar_certified,gain_bound\n"
                  : "k,xi,delta_bar_closed,delta_bar_certified,gain_bound\n");
    int n = vs_xi ? cfg.sweep.xi_count : cfg.sweep.k_count;
    if (n < 1) throw ConfigError("sweep: grid count must be positive");
    for (int i = 0; i < n; ++i) {
        RunConfig point = cfg;
        double frac = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
        if (vs_xi) {
            // shapes diag(m, 1, 1) span xi = (1 + m)/2 over the two-equal classes
            double xi_target = cfg.sweep.xi_min + (cfg.sweep.xi_max - cfg.sweep.xi_min) * frac;
            double m = 2.0 * xi_target - 1.0;
            if (!(m >= 0.0 && m < 1.0)) continue;
            point.has_matrix = true;
            point.shape_matrix = Mat3::diag(m, 1.0, 1.0);
        } else {
            point.k = cfg.sweep.k_min + (cfg.sweep.k_max - cfg.sweep.k_min) * frac;
        }
        TraceShape shape = shape_from_config(point);
        double bound = feasible_gain_bound(shape.xi());
        if (!(point.k > 0.0 && point.k < bound)) continue;  // outside the feasibility edge
        SynergisticFamily fam = SynergisticFamily::make(shape, point.k, point.delta_fraction,
                                                        point.class_override, point.branch_grid);
        CertificationReport rep = certify(fam, point.branch_grid);
        double closed = rep.closed_form.value_or(fam.delta_bar());
        if (vs_xi)
            csv << fmt(shape.xi()) << "," << fmt(point.k) << "," << fmt(closed) << ","
                << fmt(rep.min_refined_gap) << "," << fmt(bound) << "\n";
        else
            csv << fmt(point.k) << "," << fmt(shape.xi()) << "," << fmt(closed) << ","
                << fmt(rep.min_refined_gap) << "," << fmt(bound) << "\n";
    }
    std::filesystem::create_directories(out_dir);
    write_file(std::filesystem::path(out_dir) / (vs_xi ? "gap_vs_xi.csv" : "gap_vs_k.csv"),
               csv.str());
    return 0;
}

// V(X,q) and Psi_M(X) along X = R_a(theta, u) for the three axes used by the
// the bundled illustration presets, one 2 pi sweep per axis.
int sweep_potential_curves(const RunConfig& cfg, const std::string& out_dir) {
    SynergisticFamily fam = family_from_config(cfg);
    const std::array<Vec3, 3> axes = {normalized({0.37, 0.0, 0.93}),
                                      normalized({0.25, 0.69, 0.69}),
                                      normalized({0.25, -0.69, 0.69})};
    std::ostringstream csv;
    csv << "theta,segment,psi";
    for (int q = 0; q < fam.size(); ++q) csv << ",V" << q;
    csv << "\n";
    int n = std::max(2, cfg.sweep.samples_per_segment);
    for (int seg = 0; seg < 3; ++seg) {
        for (int i = 0; i <= n; ++i) {
            double local = 2.0 * kPi * i / n;
            Rotation x = rodrigues(local, axes[seg]);
            csv << fmt(2.0 * kPi * seg + local) << "," << seg << "," << fmt(fam.shape().value(x));
            for (int q = 0; q < fam.size(); ++q) csv << "," << fmt(fam.value(x, q));
            csv << "\n";
        }
    }
    std::filesystem::create_directories(out_dir);
    write_file(std::filesystem::path(out_dir) / "potential_curves.csv", csv.str());
    return 0;
}

}  // namespace

int cmd_sweep(const RunConfig& cfg, const std::string& out_dir, std::ostream& diag) {
    switch (cfg.sweep.mode) {
        case SweepConfig::Mode::GapVsK: {
            int rc = sweep_gap_grid(cfg, out_dir, false);
            diag << "wrote " << out_dir << "/gap_vs_k.csv\n";
            return rc;
        }
        case SweepConfig::Mode::GapVsXi: {
            int rc = sweep_gap_grid(cfg, out_dir, true);
            diag << "wrote " << out_dir << "/gap_vs_xi.csv\n";
            return rc;
        }
        case SweepConfig::Mode::PotentialCurves: {
            int rc = sweep_potential_curves(cfg, out_dir);
            diag << "wrote " << out_dir << "/potential_curves.csv\n";
            return rc;
        }
    }
    return 1;
}

int cmd_presets(std::ostream& out) {
    for (const auto& [name, desc] : preset_list()) out << name << "  -  " << desc << "\n";
    return 0;
}

}  // namespace so3syn
