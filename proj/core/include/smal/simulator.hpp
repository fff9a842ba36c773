#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smal/actuation.hpp"
#include "smal/environment.hpp"
#include "smal/localization.hpp"
#include "smal/sensor_array.hpp"

namespace smal::sim {

using actuation::ActuatorCommand;
using actuation::ControlParams;
using localization::Pose6D;
using localization::TrackerConfig;
using magnetics::MagnetSpec;
using sensors::SensorGrid;

struct Cadences {
    double sensor_rate = 50.0;   // Hz
    double control_rate = 5.0;   // Hz
    double physics_dt = 0.002;   // s

    void validate() const;
};

enum class DriveMode { Adaptive, FixedAlpha };

/// Complete description of one closed-loop experiment.
struct SimConfig {
    SensorGrid grid;
    std::optional<env::TubePath> path;  // required; optional only for staged construction
    ControlParams control;
    env::ResistanceModel resistance;
    MagnetSpec actuator_magnet = MagnetSpec::sphere(0.05, magnetics::kRemanenceN42);
    MagnetSpec capsule_magnet =
        MagnetSpec::ring(0.0128, 0.009, 0.015, magnetics::kRemanenceN38SH);
    Cadences cadences;
    std::uint64_t seed = 1;
    double duration_max = 300.0;
    DriveMode mode = DriveMode::Adaptive;
    double fixed_alpha = deg_to_rad(15.0);
    TrackerConfig tracker;
    double init_position_error = 0.01;             // t=0 estimate perturbation, m
    double init_angle_error = deg_to_rad(10.0);    // and radians

    void validate() const;
};

/// One log row, written at the sensor cadence.
struct EpisodeRecord {
    double time = 0.0;
    Vec3 truth_position = Vec3::Zero();
    Vec3 truth_heading = Vec3::UnitX();
    double truth_spin_phase = 0.0;
    bool synchronous = true;
    Vec3 est_position = Vec3::Zero();
    Vec3 est_moment = Vec3::UnitZ();
    Vec3 est_heading = Vec3::UnitX();
    Vec3 actuator_position = Vec3::Zero();
    Vec3 actuator_axis = Vec3::UnitX();
    double alpha = 0.0;
    double propulsive_force = 0.0;
    double lateral_force = 0.0;
    double levitation_force = 0.0;
    double gamma = 0.0;
    double sma_speed = 0.0;
    double solver_residual = 0.0;
    bool solver_converged = true;
};

struct SegmentSpeed {
    int index = 0;
    char kind = 's';  // 's' straight, 'a' arc
    double mean_speed = 0.0;
};

struct EpisodeOutcome {
    bool success = false;
    double traversal_time = 0.0;
    double mean_speed = 0.0;
    int reversal_count = 0;
    int solver_failures = 0;
    std::vector<SegmentSpeed> segment_speeds;
    double straight_speed = 0.0;  // aggregate over straight segments
    double bend_speed = 0.0;      // aggregate over arc segments
};

struct EpisodeResult {
    EpisodeOutcome outcome;
    std::vector<EpisodeRecord> records;
};

/// Runs one closed-loop episode: physics at physics_dt, localization at the
/// sensor cadence, commands at the control cadence, all on one virtual clock
/// with fixed event priority (physics, then sensing, then control).
/// Deterministic for a given config.
EpisodeResult run_episode(const SimConfig& config);

struct SweepRow {
    double alpha = 0.0;
    int trial = 0;
    double straight_speed = 0.0;
    double bend_speed = 0.0;
    bool success = false;
};

/// Fixed-angle episodes across an alpha list; trials get independent seeds
/// only when measurement noise is present. Rows are ordered (alpha, trial)
/// regardless of thread count.
std::vector<SweepRow> sweep_alpha(const SimConfig& config, std::span<const double> alphas,
                                  int trials, int threads = 1);

/// Monte-Carlo localization study over candidate sensor layouts.
struct LayoutStudyConfig {
    double pitch = 0.03;        // design-grid cell pitch, m
    double box_clearance = 0.05;  // bottom of the sampling box above the sensors
    double box_height = 0.15;
    double alpha = deg_to_rad(15.0);
    double standoff = 0.15;
    double noise_sigma = 0.6e-6;
    int trials = 500;
    std::uint64_t seed = 1;
    double init_position_error = 0.01;
    double init_angle_error = deg_to_rad(10.0);
    double actuator_mag = 0.0;  // 0 = derive from the default magnet specs
    double capsule_mag = 0.0;
    localization::MotOptions mot;
};

struct LayoutStudyRow {
    std::string layout_id;
    int sensor_count = 0;
    double mean_pos_err = 0.0;  // meters, converged trials
    double std_pos_err = 0.0;
    double mean_ori_err = 0.0;  // radians
    double std_ori_err = 0.0;
    double fail_rate = 0.0;
    double mean_solve_ms = 0.0;
};

std::vector<LayoutStudyRow> layout_study(std::span<const sensors::SubArrayLayout> layouts,
                                         const LayoutStudyConfig& config, int threads = 1);

}  // namespace smal::sim
