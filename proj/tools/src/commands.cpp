#include "smal_cli/commands.hpp"

#include <cmath>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "smal/simulator.hpp"
#include "smal_cli/config_io.hpp"
#include "smal_cli/csv.hpp"
#include "smal_cli/manifest.hpp"

namespace smal::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir.string());
}

// Manifest lifecycle helper: incomplete first, data, then completion.
struct ManifestGuard {
    RunManifest manifest;
    fs::path dir;

    ManifestGuard(std::string command, const fs::path& out_dir, std::uint64_t seed,
                  std::string config_path, std::string config_bytes)
        : dir(out_dir) {
        manifest.command = std::move(command);
        manifest.out_dir = out_dir.string();
        manifest.seed = seed;
        manifest.config_path = std::move(config_path);
        manifest.config_hash = hash_hex(config_bytes);
        manifest.complete = false;
        ensure_dir(dir);
        write_manifest(manifest, dir);
    }
    void finish() {
        manifest.complete = true;
        write_manifest(manifest, dir);
    }
};

std::string alphas_key(const std::vector<double>& alphas) {
    std::string s;
    for (double a : alphas) s += CsvWriter::num(a) + ",";
    return s;
}

actuation::AnalysisConfig analysis_config(double standoff, double radius) {
    actuation::AnalysisConfig cfg;
    cfg.standoff = standoff;
    cfg.bend_radius = radius;
    cfg.actuator_mag = magnetics::moment_magnitude(
        magnetics::MagnetSpec::sphere(0.05, magnetics::kRemanenceN42));
    cfg.capsule_mag = magnetics::moment_magnitude(
        magnetics::MagnetSpec::ring(0.0128, 0.009, 0.015, magnetics::kRemanenceN38SH));
    return cfg;
}

std::string alpha_tag(double deg) {
    std::string s = CsvWriter::num(deg);
    for (auto& ch : s) {
        if (ch == '.') ch = 'p';
    }
    return s;
}

void check_alphas(const std::vector<double>& alphas_deg) {
    if (alphas_deg.empty()) throw ValidationError("need at least one --alphas value");
    for (double a : alphas_deg) {
        if (a < 0.0 || a > 35.0) {
            throw ValidationError("alpha " + CsvWriter::num(a) + " outside [0, 35] degrees");
        }
    }
}

}  // namespace

int cmd_layouts_enumerate(const LayoutsEnumerateArgs& args) {
    ManifestGuard guard("layouts enumerate", args.out_dir, 0, "", "layouts-enumerate");
    const auto layouts = sensors::enumerate_layouts();
    std::ofstream out(args.out_dir / "layouts.json");
    if (!out) throw std::runtime_error("cannot write layouts.json");
    out << sensors::layouts_to_json(layouts);
    out.close();
    guard.finish();
    std::cout << "wrote " << layouts.size() << " layouts to "
              << (args.out_dir / "layouts.json").string() << "\n";
    return kExitOk;
}

int cmd_layouts_evaluate(const LayoutsEvaluateArgs& args) {
    if (args.trials < 1) throw ValidationError("--trials must be at least 1");
    if (args.set != "all" && args.set != "finalists") {
        throw ValidationError("--set must be 'all' or 'finalists'");
    }

    std::vector<sensors::SubArrayLayout> layouts;
    std::vector<std::string> names;
    if (args.set == "all") {
        for (auto& l : sensors::enumerate_layouts()) {
            names.push_back(l.id);
            layouts.push_back(std::move(l));
        }
    } else {
        for (auto& f : sensors::finalist_layouts()) {
            names.push_back(std::string(1, f.label) + ":" + f.layout.id);
            layouts.push_back(std::move(f.layout));
        }
    }

    const std::string key = "layouts-evaluate|" + args.set + "|" +
                            std::to_string(args.trials) + "|" + CsvWriter::num(args.noise_sigma) +
                            "|" + std::to_string(args.seed) + "|" + CsvWriter::num(args.pitch) +
                            "|" + CsvWriter::num(args.alpha_deg);
    ManifestGuard guard("layouts evaluate", args.out_dir, args.seed, "", key);

    sim::LayoutStudyConfig cfg;
    cfg.trials = args.trials;
    cfg.noise_sigma = args.noise_sigma;
    cfg.seed = args.seed;
    cfg.pitch = args.pitch;
    cfg.alpha = deg_to_rad(args.alpha_deg);
    cfg.standoff = args.standoff;
    const auto rows = sim::layout_study(layouts, cfg, args.threads);

    const std::string header[] = {"layout_id",       "sensor_count",     "mean_pos_err_mm",
                                  "std_pos_err_mm",  "mean_ori_err_deg", "std_ori_err_deg",
                                  "fail_rate"};
    CsvWriter csv(args.out_dir / "layout_study.csv", header);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        const std::string cells[] = {names[i],
                                     CsvWriter::num_int(r.sensor_count),
                                     CsvWriter::num(r.mean_pos_err * 1e3),
                                     CsvWriter::num(r.std_pos_err * 1e3),
                                     CsvWriter::num(rad_to_deg(r.mean_ori_err)),
                                     CsvWriter::num(rad_to_deg(r.std_ori_err)),
                                     CsvWriter::num(r.fail_rate)};
        csv.row(cells);
    }
    guard.finish();
    return kExitOk;
}

int cmd_force_profile(const ForceArgs& args) {
    check_alphas(args.alphas_deg);
    const bool bend = args.environment == "bend";
    const std::string key = "force-profile|" + args.environment + "|" +
                            alphas_key(args.alphas_deg) + CsvWriter::num(args.standoff) + "|" +
                            CsvWriter::num(args.radius);
    ManifestGuard guard("force profile", args.out_dir, 0, "", key);
    const auto cfg = analysis_config(args.standoff, args.radius);

    for (double deg : args.alphas_deg) {
        const double alpha = deg_to_rad(deg);
        const std::string header[] = {"m_or_beta", "f_p_N", "gamma_deg"};
        CsvWriter csv(args.out_dir /
                          ("profile_" + args.environment + "_alpha" + alpha_tag(deg) + ".csv"),
                      header);
        for (int i = 0; i <= args.steps; ++i) {
            double coord, f, g;
            if (bend) {
                const double beta = kPi * i / args.steps;
                coord = rad_to_deg(beta);
                f = actuation::bend_propulsive_force(beta, alpha, cfg);
                g = rad_to_deg(actuation::bend_gamma(beta, alpha, cfg));
            } else {
                const double m = cfg.standoff * std::sin(alpha) * i / args.steps;
                coord = m;
                f = actuation::straight_propulsive_force(m, alpha, cfg);
                g = rad_to_deg(actuation::straight_gamma(m, alpha, cfg));
            }
            const std::string cells[] = {CsvWriter::num(coord), CsvWriter::num(f),
                                         CsvWriter::num(g)};
            csv.row(cells);
        }
    }
    guard.finish();
    return kExitOk;
}

int cmd_force_map(const ForceArgs& args) {
    check_alphas(args.alphas_deg);
    const std::string key = "force-map|" + alphas_key(args.alphas_deg) +
                            CsvWriter::num(args.standoff) + "|" + CsvWriter::num(args.radius);
    ManifestGuard guard("force map", args.out_dir, 0, "", key);
    const auto cfg = analysis_config(args.standoff, args.radius);

    for (double deg : args.alphas_deg) {
        const double alpha = deg_to_rad(deg);
        const std::string header[] = {"rho_m", "beta_deg", "f_p_N", "gamma_deg"};
        CsvWriter csv(args.out_dir / ("map_alpha" + alpha_tag(deg) + ".csv"), header);
        const Vec3 p_a = cfg.standoff * Vec3(std::sin(alpha), 0.0, std::cos(alpha));
        for (int bi = 0; bi < args.beta_steps; ++bi) {
            const double beta = kPi * bi / (args.beta_steps - 1);
            const Vec3 heading(std::cos(beta), std::sin(beta), 0.0);
            for (int ri = 0; ri < args.rho_steps; ++ri) {
                const double rho =
                    args.radius * (0.5 + 1.0 * ri / std::max(args.rho_steps - 1, 1));
                const Vec3 p_c(rho * std::sin(beta), -rho * std::cos(beta), 0.0);
                const Vec3 r_cur = p_c - p_a;
                const double f = actuation::mean_propulsive_force(
                    r_cur, heading, alpha, cfg.actuator_mag, cfg.capsule_mag, cfg.n_theta);
                const double g = rad_to_deg(actuation::gamma_angle(p_a, alpha, p_c, heading));
                const std::string cells[] = {CsvWriter::num(rho), CsvWriter::num(rad_to_deg(beta)),
                                             CsvWriter::num(f), CsvWriter::num(g)};
                csv.row(cells);
            }
        }
    }
    guard.finish();
    return kExitOk;
}

int cmd_force_points(const ForceArgs& args) {
    check_alphas(args.alphas_deg);
    for (double a : args.alphas_deg) {
        if (a < 5.0) throw ValidationError("points need alpha >= 5 degrees");
    }
    const bool bend = args.environment == "bend";
    const std::string key = "force-points|" + args.environment + "|" +
                            alphas_key(args.alphas_deg) + CsvWriter::num(args.standoff) + "|" +
                            CsvWriter::num(args.radius);
    ManifestGuard guard("force points", args.out_dir, 0, "", key);
    const auto cfg = analysis_config(args.standoff, args.radius);

    const std::string header[] = {"alpha_deg", "zero_point", "zero_bracketed", "critical_point",
                                  "critical_bracketed"};
    CsvWriter csv(args.out_dir / "points.csv", header);
    for (double deg : args.alphas_deg) {
        const double alpha = deg_to_rad(deg);
        const auto zero =
            bend ? actuation::zero_point_bend(alpha, cfg) : actuation::zero_point_straight(alpha, cfg);
        const auto crit = bend ? actuation::critical_point_bend(alpha, cfg)
                               : actuation::critical_point_straight(alpha, cfg);
        const std::string cells[] = {
            CsvWriter::num(deg), CsvWriter::num(bend ? rad_to_deg(zero.value) : zero.value),
            CsvWriter::flag(zero.bracketed),
            CsvWriter::num(bend ? rad_to_deg(crit.value) : crit.value),
            CsvWriter::flag(crit.bracketed)};
        csv.row(cells);
    }
    guard.finish();
    return kExitOk;
}

namespace {

void write_outcome(const sim::EpisodeOutcome& o, const fs::path& file) {
    json doc;
    doc["success"] = o.success;
    doc["traversal_time_s"] = o.traversal_time;
    doc["mean_speed_mm_s"] = o.mean_speed * 1e3;
    doc["reversal_count"] = o.reversal_count;
    doc["solver_failures"] = o.solver_failures;
    doc["straight_speed_mm_s"] = o.straight_speed * 1e3;
    doc["bend_speed_mm_s"] = o.bend_speed * 1e3;
    json segs = json::array();
    for (const auto& s : o.segment_speeds) {
        segs.push_back({{"index", s.index},
                        {"kind", s.kind == 's' ? "straight" : "bend"},
                        {"mean_speed_mm_s", s.mean_speed * 1e3}});
    }
    doc["segment_speeds"] = segs;
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << doc.dump(2) << "\n";
}

void write_episode_csv(const std::vector<sim::EpisodeRecord>& records, const fs::path& file) {
    const std::string header[] = {
        "time_s",     "truth_x_m", "truth_y_m", "truth_z_m", "truth_hx",   "truth_hy",
        "truth_hz",   "truth_spin_rad", "synchronous", "est_x_m",   "est_y_m",    "est_z_m",
        "est_mx",     "est_my",    "est_mz",    "est_hx",    "est_hy",     "est_hz",
        "act_x_m",    "act_y_m",   "act_z_m",   "axis_x",    "axis_y",     "axis_z",
        "alpha_deg",  "f_p_N",     "f_lat_N",   "f_lev_N",   "gamma_deg",  "v_sma_mm_s",
        "residual_T", "converged"};
    CsvWriter csv(file, header);
    for (const auto& r : records) {
        const std::string cells[] = {CsvWriter::num(r.time),
                                     CsvWriter::num(r.truth_position.x()),
                                     CsvWriter::num(r.truth_position.y()),
                                     CsvWriter::num(r.truth_position.z()),
                                     CsvWriter::num(r.truth_heading.x()),
                                     CsvWriter::num(r.truth_heading.y()),
                                     CsvWriter::num(r.truth_heading.z()),
                                     CsvWriter::num(r.truth_spin_phase),
                                     CsvWriter::flag(r.synchronous),
                                     CsvWriter::num(r.est_position.x()),
                                     CsvWriter::num(r.est_position.y()),
                                     CsvWriter::num(r.est_position.z()),
                                     CsvWriter::num(r.est_moment.x()),
                                     CsvWriter::num(r.est_moment.y()),
                                     CsvWriter::num(r.est_moment.z()),
                                     CsvWriter::num(r.est_heading.x()),
                                     CsvWriter::num(r.est_heading.y()),
                                     CsvWriter::num(r.est_heading.z()),
                                     CsvWriter::num(r.actuator_position.x()),
                                     CsvWriter::num(r.actuator_position.y()),
                                     CsvWriter::num(r.actuator_position.z()),
                                     CsvWriter::num(r.actuator_axis.x()),
                                     CsvWriter::num(r.actuator_axis.y()),
                                     CsvWriter::num(r.actuator_axis.z()),
                                     CsvWriter::num(rad_to_deg(r.alpha)),
                                     CsvWriter::num(r.propulsive_force),
                                     CsvWriter::num(r.lateral_force),
                                     CsvWriter::num(r.levitation_force),
                                     CsvWriter::num(rad_to_deg(r.gamma)),
                                     CsvWriter::num(r.sma_speed * 1e3),
                                     CsvWriter::num(r.solver_residual),
                                     CsvWriter::flag(r.solver_converged)};
        csv.row(cells);
    }
}

}  // namespace

int cmd_simulate(const SimulateArgs& args) {
    const std::string text = read_file(args.config);
    sim::SimConfig cfg = parse_config(text);
    if (args.mode_override == "adaptive") {
        cfg.mode = sim::DriveMode::Adaptive;
    } else if (args.mode_override == "fixed") {
        if (args.alpha_deg < 0.0) throw ValidationError("--mode fixed needs --alpha");
        cfg.mode = sim::DriveMode::FixedAlpha;
        cfg.fixed_alpha = deg_to_rad(args.alpha_deg);
    } else if (!args.mode_override.empty()) {
        throw ValidationError("--mode must be 'adaptive' or 'fixed'");
    }
    cfg.validate();

    ManifestGuard guard("simulate", args.out_dir, cfg.seed, args.config.string(),
                        text + "|" + args.mode_override + "|" + CsvWriter::num(args.alpha_deg));
    const sim::EpisodeResult result = sim::run_episode(cfg);
    write_episode_csv(result.records, args.out_dir / "episode.csv");
    write_outcome(result.outcome, args.out_dir / "outcome.json");
    guard.finish();
    std::cout << (result.outcome.success ? "success" : "failure") << " in "
              << CsvWriter::num(result.outcome.traversal_time) << " s\n";
    return kExitOk;
}

int cmd_sweep(const SweepArgs& args) {
    check_alphas(args.alphas_deg);
    if (args.trials < 1) throw ValidationError("--trials must be at least 1");
    const std::string text = read_file(args.config);
    sim::SimConfig cfg = parse_config(text);

    ManifestGuard guard("sweep", args.out_dir, cfg.seed, args.config.string(),
                        text + "|" + alphas_key(args.alphas_deg) + std::to_string(args.trials));
    std::vector<double> alphas;
    for (double deg : args.alphas_deg) alphas.push_back(deg_to_rad(deg));
    const auto rows = sim::sweep_alpha(cfg, alphas, args.trials, args.threads);

    const std::string header[] = {"alpha_deg", "trial", "straight_speed_mm_s", "bend_speed_mm_s",
                                  "success"};
    CsvWriter csv(args.out_dir / "sweep.csv", header);
    for (const auto& r : rows) {
        const std::string cells[] = {CsvWriter::num(rad_to_deg(r.alpha)),
                                     CsvWriter::num_int(r.trial),
                                     CsvWriter::num(r.straight_speed * 1e3),
                                     CsvWriter::num(r.bend_speed * 1e3), CsvWriter::flag(r.success)};
        csv.row(cells);
    }
    guard.finish();
    return kExitOk;
}

}  // namespace smal::cli
