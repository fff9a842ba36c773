#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace smal::cli {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

struct LayoutsEnumerateArgs {
    std::filesystem::path out_dir;
};

struct LayoutsEvaluateArgs {
    std::filesystem::path out_dir;
    int trials = 500;
    double noise_sigma = 3.2e-7;  // calibrated; see README
    std::uint64_t seed = 1;
    std::string set = "finalists";  // or "all"
    double pitch = 0.03;
    double alpha_deg = 15.0;
    double standoff = 0.15;
    int threads = 1;
};

struct ForceArgs {
    std::filesystem::path out_dir;
    std::string environment = "straight";  // or "bend"
    std::vector<double> alphas_deg;
    double standoff = 0.15;
    double radius = 0.018;
    int steps = 200;       // profile resolution
    int rho_steps = 11;    // map grid
    int beta_steps = 37;
};

struct SimulateArgs {
    std::filesystem::path out_dir;
    std::filesystem::path config;
    std::string mode_override;   // "", "adaptive" or "fixed"
    double alpha_deg = -1.0;     // with mode_override == "fixed"
};

struct SweepArgs {
    std::filesystem::path out_dir;
    std::filesystem::path config;
    std::vector<double> alphas_deg;
    int trials = 1;
    int threads = 1;
};

int cmd_layouts_enumerate(const LayoutsEnumerateArgs& args);
int cmd_layouts_evaluate(const LayoutsEvaluateArgs& args);
int cmd_force_profile(const ForceArgs& args);
int cmd_force_map(const ForceArgs& args);
int cmd_force_points(const ForceArgs& args);
int cmd_simulate(const SimulateArgs& args);
int cmd_sweep(const SweepArgs& args);

}  // namespace smal::cli
