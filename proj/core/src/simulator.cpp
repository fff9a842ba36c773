#include "smal/simulator.hpp"

#include <chrono>
#include <cmath>

#include "smal/parallel.hpp"
#include "smal/rng.hpp"

namespace smal::sim {

using env::CapsuleState;
using env::PathPose;
using localization::Pose5D;
using localization::Tracker;
using magnetics::DipoleSource;

namespace {

constexpr double kReversalThreshold = 1e-3;  // m of back-travel that counts as a reversal

bool is_multiple(double value, double base) {
    const double k = value / base;
    return std::abs(k - std::round(k)) < 1e-6;
}

}  // namespace

void Cadences::validate() const {
    if (!(sensor_rate > 0.0) || !(control_rate > 0.0) || !(physics_dt > 0.0)) {
        throw ValidationError("cadences must be positive");
    }
    if (physics_dt > 1.0 / sensor_rate + 1e-12) {
        throw ValidationError("physics_dt must not exceed the sensor period");
    }
    if (!is_multiple(1.0 / sensor_rate, physics_dt) || !is_multiple(1.0 / control_rate, physics_dt)) {
        throw ValidationError("sensor and control periods must be multiples of physics_dt");
    }
}

void SimConfig::validate() const {
    grid.validate();
    if (!path.has_value()) throw ValidationError("config has no path");
    control.validate();
    resistance.validate();
    cadences.validate();
    if (!(duration_max > 0.0)) throw ValidationError("duration_max must be positive");
    if (!is_multiple(control.delta_t, cadences.physics_dt)) {
        throw ValidationError("delta_t must be a multiple of physics_dt");
    }
    if (mode == DriveMode::FixedAlpha &&
        (fixed_alpha < 0.0 || fixed_alpha > actuation::kMaxActuatingAngle + 1e-12)) {
        throw ValidationError("fixed alpha outside [0, 35] degrees");
    }
}

namespace {

// Running tallies that become the EpisodeOutcome.
class ProgressMeter {
  public:
    ProgressMeter(const env::TubePath& path) : path_(path) {
        seg_time_.resize(path.segment_count(), 0.0);
        seg_progress_.resize(path.segment_count(), 0.0);
    }

    void step(double s_before, double s_after, double dt) {
        const int seg = path_.segment_index_at(s_before);
        seg_time_[seg] += dt;
        seg_progress_[seg] += s_after - s_before;
        // zigzag reversal detector: direction flips need more back-travel
        // than kReversalThreshold, which filters out spin-frequency ripple
        if (!primed_) {
            hi_ = lo_ = s_after;
            primed_ = true;
            return;
        }
        if (direction_ >= 0) {
            hi_ = std::max(hi_, s_after);
            lo_ = std::min(lo_, s_after);
            if (hi_ - s_after > kReversalThreshold) {
                if (direction_ > 0) ++reversals_;
                direction_ = -1;
                lo_ = s_after;
            } else if (direction_ == 0 && s_after - lo_ > kReversalThreshold) {
                direction_ = 1;
            }
        } else {
            lo_ = std::min(lo_, s_after);
            if (s_after - lo_ > kReversalThreshold) {
                ++reversals_;
                direction_ = 1;
                hi_ = s_after;
            }
        }
    }

    EpisodeOutcome finish(bool success, double time, double s_final) const {
        EpisodeOutcome out;
        out.success = success;
        out.traversal_time = time;
        out.mean_speed = (time > 0.0) ? (success ? path_.total_length() : s_final) / time : 0.0;
        out.reversal_count = reversals_;
        double st_len = 0.0, st_time = 0.0, bd_len = 0.0, bd_time = 0.0;
        for (int i = 0; i < path_.segment_count(); ++i) {
            SegmentSpeed ss;
            ss.index = i;
            ss.kind = path_.segment(i).kind == env::SegmentSpec::Kind::Straight ? 's' : 'a';
            ss.mean_speed = seg_time_[i] > 0.0 ? seg_progress_[i] / seg_time_[i] : 0.0;
            out.segment_speeds.push_back(ss);
            if (ss.kind == 's') {
                st_len += seg_progress_[i];
                st_time += seg_time_[i];
            } else {
                bd_len += seg_progress_[i];
                bd_time += seg_time_[i];
            }
        }
        out.straight_speed = st_time > 0.0 ? st_len / st_time : 0.0;
        out.bend_speed = bd_time > 0.0 ? bd_len / bd_time : 0.0;
        return out;
    }

  private:
    const env::TubePath& path_;
    std::vector<double> seg_time_;
    std::vector<double> seg_progress_;
    int direction_ = 0;  // +1 advancing, -1 retreating, 0 unknown
    bool primed_ = false;
    double hi_ = 0.0;
    double lo_ = 0.0;
    int reversals_ = 0;
};

}  // namespace

EpisodeResult run_episode(const SimConfig& config) {
    config.validate();
    const env::TubePath& path = *config.path;
    const double ma = magnetics::moment_magnitude(config.actuator_magnet);
    const double mc = magnetics::moment_magnitude(config.capsule_magnet);
    const double dt = config.cadences.physics_dt;
    const double sensor_period = 1.0 / config.cadences.sensor_rate;
    const double control_period = 1.0 / config.cadences.control_rate;

    Rng rng = make_stream(config.seed);

    // ground truth
    CapsuleState truth;
    PathPose pose = path.pose_at(0.0);

    // initial estimate: truth perturbed by the configured offsets
    Pose6D est;
    est.position = pose.position + config.init_position_error * random_unit_vector(rng);
    est.heading = perturb_direction(pose.tangent, config.init_angle_error, rng);
    est.moment_dir = env::moment_from_phase(0.0, est.heading);
    est = localization::orthogonalized(est);

    const double alpha0 =
        config.mode == DriveMode::FixedAlpha ? config.fixed_alpha : config.control.alpha_low;
    ActuatorCommand cmd = actuation::make_command(est, alpha0, config.control);
    double actuator_phase = 0.0;

    Tracker tracker(config.tracker, config.grid, est, Pose5D{cmd.position, cmd.moment_ref}, ma,
                    mc);

    // capsule spin phase starts locked to the field
    {
        const Vec3 b = magnetics::dipole_field(cmd.source_at(0.0, ma), pose.position);
        truth.spin_phase = env::moment_phase(actuation::wall_constrained_moment(b, pose.tangent),
                                             pose.tangent);
    }

    actuation::VelocityWindow window(config.control.delta_t);
    window.push(0.0, est.position);

    EpisodeResult result;
    ProgressMeter meter(path);

    double next_sensor = sensor_period;
    double next_control = control_period;
    double next_window = config.control.delta_t;

    // cached instantaneous physics values for logging
    double log_fp = 0.0, log_flat = 0.0, log_flev = 0.0, log_gamma = 0.0, log_sma = 0.0;
    double log_alpha = alpha0;
    int solver_failures = 0;

    const long n_steps = std::lround(config.duration_max / dt);
    bool success = false;
    double end_time = config.duration_max;

    for (long k = 1; k <= n_steps; ++k) {
        const double t = k * dt;

        // physics: evaluate forces at the pre-step state, then advance
        pose = path.pose_at(truth.arclength);
        const DipoleSource actuator = cmd.source_at(actuator_phase, ma);
        const Vec3 field = magnetics::dipole_field(actuator, pose.position);
        Vec3 fvec = Vec3::Zero();
        try {
            const Vec3 m_force = actuation::wall_constrained_moment(field, pose.tangent);
            fvec = magnetics::dipole_force(actuator, {pose.position, m_force, mc});
        } catch (const DegenerateGeometryError&) {
            // field momentarily along the tube axis: no transverse moment, no force
        }
        const double f_p = fvec.dot(pose.tangent);
        {
            const auto frame = actuation::capsule_frame(pose.position, pose.tangent);
            log_flat = fvec.dot(frame.y_axis);
            log_flev = fvec.dot(frame.z_axis);
        }
        log_fp = f_p;

        const double s_before = truth.arclength;
        truth = env::advance(truth, f_p, config.resistance, pose.curvature, dt,
                             config.control.spin_rate, path.total_length());
        actuator_phase += config.control.spin_rate * dt;

        // synchronization state follows gamma at the new position
        pose = path.pose_at(truth.arclength);
        log_gamma = actuation::gamma_angle(cmd, pose.position, pose.tangent);
        const bool sync = env::sync_state(log_gamma);
        if (sync) {
            try {
                const Vec3 b_new =
                    magnetics::dipole_field(cmd.source_at(actuator_phase, ma), pose.position);
                truth.spin_phase = env::moment_phase(
                    actuation::wall_constrained_moment(b_new, pose.tangent), pose.tangent);
            } catch (const DegenerateGeometryError&) {
                // keep the advanced phase
            }
        }
        truth.synchronous = sync;

        meter.step(s_before, truth.arclength, dt);

        if (truth.arclength >= path.total_length() - 1e-9) {
            success = true;
            end_time = t;
        }

        // sensing
        if (!success && t + 1e-9 >= next_sensor) {
            next_sensor += sensor_period;
            const Vec3 m_meas = env::true_capsule_moment(truth, path, cmd, actuator_phase);
            const DipoleSource cap_src{pose.position, m_meas, mc};
            const DipoleSource act_src = cmd.source_at(actuator_phase, ma);
            const auto& step = tracker.step(t, [&](const sensors::ActiveSubArray& active) {
                const DipoleSource srcs[] = {act_src, cap_src};
                return sensors::measure(active, srcs, config.grid.noise_sigma, rng);
            });
            if (step.solver_failed) ++solver_failures;

            EpisodeRecord rec;
            rec.time = t;
            rec.truth_position = pose.position;
            rec.truth_heading = pose.tangent;
            rec.truth_spin_phase = truth.spin_phase;
            rec.synchronous = truth.synchronous;
            rec.est_position = step.pose.position;
            rec.est_moment = step.pose.moment_dir;
            rec.est_heading = step.pose.heading;
            rec.actuator_position = cmd.position;
            rec.actuator_axis = cmd.rotation_axis;
            rec.alpha = log_alpha;
            rec.propulsive_force = log_fp;
            rec.lateral_force = log_flat;
            rec.levitation_force = log_flev;
            rec.gamma = log_gamma;
            rec.sma_speed = log_sma;
            rec.solver_residual = step.mot.residual_norm;
            rec.solver_converged = !step.solver_failed;
            result.records.push_back(rec);
        }

        // velocity window sampling from the estimate stream
        if (!success && t + 1e-9 >= next_window) {
            window.push(next_window, tracker.estimate().position);
            next_window += config.control.delta_t;
        }

        // control
        if (!success && t + 1e-9 >= next_control) {
            next_control += control_period;
            double alpha = config.fixed_alpha;
            if (config.mode == DriveMode::Adaptive) {
                if (window.full()) {
                    log_sma = actuation::sma_velocity(window);
                    alpha = actuation::adaptive_alpha(log_sma, config.control);
                } else {
                    alpha = config.control.alpha_low;
                }
            } else if (window.full()) {
                log_sma = actuation::sma_velocity(window);
            }
            try {
                cmd = actuation::make_command(tracker.estimate(), alpha, config.control);
                log_alpha = alpha;
            } catch (const DegenerateGeometryError&) {
                // untrackable heading estimate: keep actuating with the last command
            }
        }

        if (success) break;
    }

    result.outcome = meter.finish(success, end_time, truth.arclength);
    result.outcome.solver_failures = solver_failures;
    return result;
}

std::vector<SweepRow> sweep_alpha(const SimConfig& config, std::span<const double> alphas,
                                  int trials, int threads) {
    if (trials < 1) throw ValidationError("sweep needs at least one trial");
    const std::size_t n = alphas.size() * static_cast<std::size_t>(trials);
    std::vector<SweepRow> rows(n);
    parallel_for_indexed(n, threads, [&](std::size_t idx) {
        const std::size_t ai = idx / trials;
        const int trial = static_cast<int>(idx % trials);
        SimConfig c = config;
        c.mode = DriveMode::FixedAlpha;
        c.fixed_alpha = alphas[ai];
        c.seed = config.grid.noise_sigma > 0.0
                     ? splitmix64(config.seed ^ (ai * 1000003ULL + trial))
                     : config.seed;
        const EpisodeResult r = run_episode(c);
        rows[idx] = {alphas[ai], trial, r.outcome.straight_speed, r.outcome.bend_speed,
                     r.outcome.success};
    });
    return rows;
}

std::vector<LayoutStudyRow> layout_study(std::span<const sensors::SubArrayLayout> layouts,
                                         const LayoutStudyConfig& config, int threads) {
    if (config.trials < 1) throw ValidationError("layout study needs at least one trial");
    const double ma = config.actuator_mag > 0.0
                          ? config.actuator_mag
                          : magnetics::moment_magnitude(
                                MagnetSpec::sphere(0.05, magnetics::kRemanenceN42));
    const double mc = config.capsule_mag > 0.0
                          ? config.capsule_mag
                          : magnetics::moment_magnitude(
                                MagnetSpec::ring(0.0128, 0.009, 0.015, magnetics::kRemanenceN38SH));

    struct TrialResult {
        bool converged = false;
        double pos_err = 0.0;
        double ori_err = 0.0;
        double ms = 0.0;
    };

    actuation::ControlParams geom;
    geom.standoff = config.standoff;

    std::vector<LayoutStudyRow> out(layouts.size());
    for (std::size_t li = 0; li < layouts.size(); ++li) {
        const auto& layout = layouts[li];
        const auto positions = sensors::layout_positions(layout, config.pitch, Vec3::Zero());
        const double half_span = 0.5 * (layout.grid_size() - 1) * config.pitch;

        std::vector<TrialResult> trials(config.trials);
        // streams keyed by layout id: rows are reproducible for any subset
        const std::uint64_t layout_key = stream_key(layout.id);
        parallel_for_indexed(config.trials, threads, [&](std::size_t k) {
            Rng rng = make_stream(config.seed, layout_key, k);

            Pose6D truth;
            Vec3 m_true;
            actuation::ActuatorCommand cmd;
            double theta = 0.0;
            for (int attempt = 0;; ++attempt) {
                truth.position = Vec3(uniform(rng, -half_span, half_span),
                                      uniform(rng, -half_span, half_span),
                                      uniform(rng, config.box_clearance,
                                              config.box_clearance + config.box_height));
                truth.heading = random_unit_vector(rng);
                theta = uniform(rng, 0.0, 2.0 * kPi);
                try {
                    truth.moment_dir = env::moment_from_phase(0.0, truth.heading);
                    cmd = actuation::make_command(truth, config.alpha, geom);
                    m_true = actuation::wall_constrained_moment(
                        magnetics::dipole_field(cmd.source_at(theta, ma), truth.position),
                        truth.heading);
                    break;
                } catch (const DegenerateGeometryError&) {
                    if (attempt > 100) throw;
                }
            }

            const DipoleSource act_src = cmd.source_at(theta, ma);
            const DipoleSource cap_src{truth.position, m_true, mc};
            const DipoleSource srcs[] = {act_src, cap_src};
            const auto samples =
                sensors::measure_at(positions, srcs, config.noise_sigma, rng);

            localization::MotEstimate init;
            init.actuator.position =
                act_src.position + config.init_position_error * random_unit_vector(rng);
            init.actuator.moment_dir =
                perturb_direction(act_src.moment_dir, config.init_angle_error, rng);
            init.capsule.position =
                truth.position + config.init_position_error * random_unit_vector(rng);
            init.capsule.moment_dir = perturb_direction(m_true, config.init_angle_error, rng);

            const auto t0 = std::chrono::steady_clock::now();
            const auto fit = localization::solve_mot(samples, ma, mc, init, config.mot);
            const auto t1 = std::chrono::steady_clock::now();

            TrialResult tr;
            tr.converged = fit.converged && !fit.degenerate;
            tr.pos_err = (fit.capsule.position - truth.position).norm();
            tr.ori_err = angle_between(fit.capsule.moment_dir, m_true);
            tr.ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
            trials[k] = tr;
        });

        LayoutStudyRow row;
        row.layout_id = layout.id;
        row.sensor_count = layout.sensor_count;
        double n_ok = 0.0, sum_p = 0.0, sum_o = 0.0, sum_ms = 0.0;
        for (const auto& tr : trials) {
            if (!tr.converged) continue;
            n_ok += 1.0;
            sum_p += tr.pos_err;
            sum_o += tr.ori_err;
            sum_ms += tr.ms;
        }
        row.fail_rate = 1.0 - n_ok / config.trials;
        if (n_ok > 0.0) {
            row.mean_pos_err = sum_p / n_ok;
            row.mean_ori_err = sum_o / n_ok;
            row.mean_solve_ms = sum_ms / n_ok;
            double var_p = 0.0, var_o = 0.0;
            for (const auto& tr : trials) {
                if (!tr.converged) continue;
                var_p += (tr.pos_err - row.mean_pos_err) * (tr.pos_err - row.mean_pos_err);
                var_o += (tr.ori_err - row.mean_ori_err) * (tr.ori_err - row.mean_ori_err);
            }
            row.std_pos_err = std::sqrt(var_p / n_ok);
            row.std_ori_err = std::sqrt(var_o / n_ok);
        }
        out[li] = row;
    }
    return out;
}

}  // namespace smal::sim
