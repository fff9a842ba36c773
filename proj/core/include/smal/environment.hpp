#pragma once

#include <string>
#include <vector>

#include "smal/actuation.hpp"
#include "smal/errors.hpp"
#include "smal/vec.hpp"

namespace smal::env {

/// One centerline segment: a straight run or a circular arc. For arcs the
/// tangent rotates about turn_axis (unit, perpendicular to the local tangent)
/// through `sweep` radians at radius `radius`.
struct SegmentSpec {
    enum class Kind { Straight, Arc };
    Kind kind = Kind::Straight;
    double length = 0.0;  // straight
    double radius = 0.0;  // arc
    double sweep = 0.0;   // arc, radians
    Vec3 turn_axis = Vec3::UnitZ();

    static SegmentSpec straight(double length);
    static SegmentSpec arc(double radius, double sweep, const Vec3& turn_axis);
};

struct PathPose {
    Vec3 position = Vec3::Zero();
    Vec3 tangent = Vec3::UnitX();
    double curvature = 0.0;
};

/// Piecewise straight/arc centerline with C1 joints. Immutable once built;
/// safe to share between threads.
class TubePath {
  public:
    TubePath(const Vec3& start_position, const Vec3& start_tangent,
             std::vector<SegmentSpec> segments, double tube_inner_diameter);

    double total_length() const { return total_length_; }
    double tube_inner_diameter() const { return tube_inner_diameter_; }
    int segment_count() const { return static_cast<int>(specs_.size()); }
    const SegmentSpec& segment(int i) const { return specs_[i]; }
    double segment_length(int i) const { return lengths_[i]; }

    /// Centerline position, unit tangent and curvature at arclength s.
    PathPose pose_at(double s) const;
    /// Index of the segment containing arclength s.
    int segment_index_at(double s) const;

    /// Parses the JSON path document (angles in degrees).
    static TubePath from_json_text(const std::string& text);

  private:
    struct SegmentGeom {
        Vec3 start_position;
        Vec3 start_tangent;
    };
    std::vector<SegmentSpec> specs_;
    std::vector<SegmentGeom> geoms_;
    std::vector<double> lengths_;
    std::vector<double> cum_;  // cumulative arclength at segment starts
    double total_length_ = 0.0;
    double tube_inner_diameter_ = 0.0;
};

/// Along-tube resistance surrogate: a static threshold plus a
/// curvature-scaled term, then linear viscous drag above the threshold.
struct ResistanceModel {
    double static_threshold = 0.0;  // N
    double curvature_gain = 0.0;    // N*m
    double viscous_coeff = 0.25;    // N*s/m

    void validate() const;
};

/// Ground-truth capsule state on the path: arclength, signed along-tube
/// velocity, spin phase of the radial moment, and the synchronous-rotation
/// flag.
struct CapsuleState {
    double arclength = 0.0;
    double velocity = 0.0;
    double spin_phase = 0.0;
    bool synchronous = true;
};

/// Quasi-static step: resistance is f0 + k_kappa * curvature; below it the
/// capsule holds still, above it velocity is (|f|-resistance)/c_v along the
/// force sign. Arclength clamps to the path ends. The spin phase advances at
/// spin_rate while synchronous and freezes otherwise.
CapsuleState advance(const CapsuleState& state, double propulsive_force,
                     const ResistanceModel& model, double curvature, double dt, double spin_rate,
                     double total_length);

/// Synchronous-rotation criterion: the capsule follows the rotating field
/// only while gamma stays at or below 45 degrees.
bool sync_state(double gamma);

/// Cross-section frame of the tube at tangent t: (e1, e2) span the plane
/// perpendicular to t, with e1 the in-plane vertical direction.
std::pair<Vec3, Vec3> cross_section_frame(const Vec3& tangent);

/// Ground-truth capsule moment seen by the sensors: the wall-constrained
/// field projection while synchronous, the frozen spin-phase radial direction
/// otherwise.
Vec3 true_capsule_moment(const CapsuleState& state, const TubePath& path,
                         const actuation::ActuatorCommand& command, double theta);

/// Spin phase of a radial moment in the cross-section frame at `tangent`.
double moment_phase(const Vec3& moment, const Vec3& tangent);
/// Radial moment at the given phase in the cross-section frame.
Vec3 moment_from_phase(double phase, const Vec3& tangent);

}  // namespace smal::env
