#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "smal/errors.hpp"
#include "smal_cli/commands.hpp"

using namespace smal;
using namespace smal::cli;

namespace {

std::string default_out_dir() {
    if (const char* env = std::getenv("SMAL_OUT_DIR")) return env;
    return "out";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Magnetic capsule actuation and localization toolkit"};
    app.require_subcommand(1);

    // layouts
    auto* layouts = app.add_subcommand("layouts", "Sensor sub-array layout studies");
    layouts->require_subcommand(1);

    LayoutsEnumerateArgs enum_args;
    enum_args.out_dir = default_out_dir();
    auto* lenum = layouts->add_subcommand("enumerate", "List all symmetric layout candidates");
    lenum->add_option("--out", enum_args.out_dir, "Output directory");

    LayoutsEvaluateArgs eval_args;
    eval_args.out_dir = default_out_dir();
    auto* leval = layouts->add_subcommand("evaluate", "Monte-Carlo localization accuracy study");
    leval->add_option("--trials", eval_args.trials, "Trials per layout")->required();
    leval->add_option("--noise-sigma", eval_args.noise_sigma, "Per-axis field noise, Tesla");
    leval->add_option("--seed", eval_args.seed, "Master seed");
    leval->add_option("--set", eval_args.set, "'finalists' (default) or 'all'");
    leval->add_option("--pitch", eval_args.pitch, "Design-grid cell pitch, m");
    leval->add_option("--alpha", eval_args.alpha_deg, "Actuating angle, degrees");
    leval->add_option("--standoff", eval_args.standoff, "Actuator standoff, m");
    leval->add_option("--threads", eval_args.threads, "Worker threads");
    leval->add_option("--out", eval_args.out_dir, "Output directory");

    // force
    auto* force = app.add_subcommand("force", "Propulsive-force and gamma analyses");
    force->require_subcommand(1);

    ForceArgs profile_args;
    profile_args.out_dir = default_out_dir();
    auto* fprofile = force->add_subcommand("profile", "f_p and gamma along the lumen");
    fprofile->add_option("--env", profile_args.environment, "'straight' or 'bend'")->required();
    fprofile->add_option("--alphas", profile_args.alphas_deg, "Actuating angles, degrees")
        ->required()
        ->delimiter(',');
    fprofile->add_option("--standoff", profile_args.standoff, "Actuator standoff, m");
    fprofile->add_option("--radius", profile_args.radius, "Bend radius, m");
    fprofile->add_option("--steps", profile_args.steps, "Samples along the coordinate");
    fprofile->add_option("--out", profile_args.out_dir, "Output directory");

    ForceArgs map_args;
    map_args.out_dir = default_out_dir();
    auto* fmap = force->add_subcommand("map", "Polar f_p / gamma maps of the bend region");
    fmap->add_option("--alphas", map_args.alphas_deg, "Actuating angles, degrees")
        ->required()
        ->delimiter(',');
    fmap->add_option("--standoff", map_args.standoff, "Actuator standoff, m");
    fmap->add_option("--radius", map_args.radius, "Bend radius, m");
    fmap->add_option("--rho-steps", map_args.rho_steps, "Radial grid points");
    fmap->add_option("--beta-steps", map_args.beta_steps, "Angular grid points");
    fmap->add_option("--out", map_args.out_dir, "Output directory");

    ForceArgs points_args;
    points_args.out_dir = default_out_dir();
    auto* fpoints = force->add_subcommand("points", "Zero and critical points versus alpha");
    fpoints->add_option("--env", points_args.environment, "'straight' or 'bend'")->required();
    fpoints->add_option("--alphas", points_args.alphas_deg, "Actuating angles, degrees")
        ->required()
        ->delimiter(',');
    fpoints->add_option("--standoff", points_args.standoff, "Actuator standoff, m");
    fpoints->add_option("--radius", points_args.radius, "Bend radius, m");
    fpoints->add_option("--out", points_args.out_dir, "Output directory");

    // simulate
    SimulateArgs sim_args;
    sim_args.out_dir = default_out_dir();
    auto* simulate = app.add_subcommand("simulate", "Run one closed-loop episode");
    simulate->add_option("--config", sim_args.config, "Experiment config JSON")->required();
    simulate->add_option("--mode", sim_args.mode_override, "'adaptive' or 'fixed'");
    simulate->add_option("--alpha", sim_args.alpha_deg, "Fixed actuating angle, degrees");
    simulate->add_option("--out", sim_args.out_dir, "Output directory");

    // sweep
    SweepArgs sweep_args;
    sweep_args.out_dir = default_out_dir();
    auto* sweep = app.add_subcommand("sweep", "Fixed-angle episodes across an alpha list");
    sweep->add_option("--config", sweep_args.config, "Experiment config JSON")->required();
    sweep->add_option("--alphas", sweep_args.alphas_deg, "Actuating angles, degrees")
        ->required()
        ->delimiter(',');
    sweep->add_option("--trials", sweep_args.trials, "Trials per alpha");
    sweep->add_option("--threads", sweep_args.threads, "Worker threads");
    sweep->add_option("--out", sweep_args.out_dir, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (lenum->parsed()) return cmd_layouts_enumerate(enum_args);
        if (leval->parsed()) return cmd_layouts_evaluate(eval_args);
        if (fprofile->parsed()) return cmd_force_profile(profile_args);
        if (fmap->parsed()) return cmd_force_map(map_args);
        if (fpoints->parsed()) return cmd_force_points(points_args);
        if (simulate->parsed()) return cmd_simulate(sim_args);
        if (sweep->parsed()) return cmd_sweep(sweep_args);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
