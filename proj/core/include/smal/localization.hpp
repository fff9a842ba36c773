#pragma once

#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "smal/magnetics.hpp"
#include "smal/numerics.hpp"
#include "smal/sensor_array.hpp"
#include "smal/vec.hpp"

namespace smal::localization {

using magnetics::FieldSample;

/// Position plus unit moment direction of one magnet.
struct Pose5D {
    Vec3 position = Vec3::Zero();
    Vec3 moment_dir = Vec3::UnitZ();
};

/// Full capsule state: position, unit radial moment and unit heading, with
/// the moment perpendicular to the heading (radial ring-magnet mounting).
struct Pose6D {
    Vec3 position = Vec3::Zero();
    Vec3 moment_dir = Vec3::UnitZ();
    Vec3 heading = Vec3::UnitX();
};

/// Re-projects the moment onto the plane perpendicular to the heading and
/// renormalizes, restoring the Pose6D invariant after independent estimation.
Pose6D orthogonalized(const Pose6D& pose);

/// Joint two-dipole fit result. `degenerate` flags estimated positions closer
/// than 1 mm (the two dipoles become hard to separate).
struct MotEstimate {
    Pose5D actuator;
    Pose5D capsule;
    double residual_norm = 0.0;
    bool converged = false;
    bool degenerate = false;
    int iterations = 0;
};

struct MotOptions {
    LevMarOptions levmar;  // caps and tolerances of the damped Gauss-Newton
    double degenerate_separation = 1e-3;
};

/// Solves the two-dipole field-matching problem for both 5-D poses given
/// tri-axial samples and known moment magnitudes; warm-started from `init`.
/// Needs at least 4 samples (12 scalar residuals for 10 parameters).
MotEstimate solve_mot(std::span<const FieldSample> samples, double actuator_mag,
                      double capsule_mag, const MotEstimate& init, const MotOptions& opts = {});

/// Ring buffer of timestamped 5-D poses feeding the heading estimator.
class MomentBuffer {
  public:
    explicit MomentBuffer(int capacity);

    void push(double time, const Pose5D& pose);
    bool full() const { return static_cast<int>(entries_.size()) == capacity_; }
    int size() const { return static_cast<int>(entries_.size()); }
    int capacity() const { return capacity_; }
    const Pose5D& oldest() const { return entries_.front().pose; }
    const Pose5D& newest() const { return entries_.back().pose; }
    std::vector<Vec3> moments() const;

  private:
    struct Entry {
        double time;
        Pose5D pose;
    };
    int capacity_;
    std::deque<Entry> entries_;
};

/// Heading as the common normal of the buffered moment directions: the
/// eigenvector of M M^T with the smallest eigenvalue, sign-matched to
/// prev_heading. Throws DegenerateGeometryError when the two smallest
/// eigenvalues are too close to resolve the rotation plane.
Vec3 nvf_heading(const MomentBuffer& buffer, const Vec3& prev_heading);

struct TrackerConfig {
    int buffer_length = 12;
    double min_sweep = deg_to_rad(30.0);  // below this, reuse the last heading
    MotOptions mot;
};

/// Step record of the adaptive localization loop.
struct TrackerStep {
    Pose6D pose;
    MotEstimate mot;
    bool heading_updated = false;
    bool solver_failed = false;
};

/// Closed-loop capsule tracker: selects and activates the sensor window from
/// the latest estimate, solves the two-dipole fit warm-started from the
/// previous frame, and refreshes the heading from the moment history when the
/// buffered sweep is large enough. Single-owner, stepped sequentially.
class Tracker {
  public:
    using MeasureFn = std::function<std::vector<FieldSample>(const sensors::ActiveSubArray&)>;

    Tracker(const TrackerConfig& config, const sensors::SensorGrid& grid, const Pose6D& capsule,
            const Pose5D& actuator, double actuator_mag, double capsule_mag);

    const TrackerStep& step(double time, const MeasureFn& measure);

    const Pose6D& estimate() const { return last_.pose; }
    const TrackerStep& last() const { return last_; }
    const MomentBuffer& buffer() const { return buffer_; }

  private:
    TrackerConfig config_;
    sensors::SensorGrid grid_;
    double actuator_mag_;
    double capsule_mag_;
    MomentBuffer buffer_;
    MotEstimate mot_;
    TrackerStep last_;
};

}  // namespace smal::localization
