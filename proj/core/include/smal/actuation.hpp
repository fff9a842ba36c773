#pragma once

#include <array>

#include "smal/errors.hpp"
#include "smal/localization.hpp"
#include "smal/magnetics.hpp"
#include "smal/numerics.hpp"
#include "smal/vec.hpp"

namespace smal::actuation {

using localization::Pose6D;

/// Largest allowed actuating angle (keeps the actuator clear of the patient).
inline constexpr double kMaxActuatingAngle = deg_to_rad(35.0);

/// Capsule-centric frame: x along the heading, z in the vertical plane
/// through the heading with a non-negative world-vertical component, y = z×x.
struct CapsuleFrame {
    Vec3 origin = Vec3::Zero();
    Vec3 x_axis = Vec3::UnitX();
    Vec3 y_axis = Vec3::UnitY();
    Vec3 z_axis = Vec3::UnitZ();

    Mat3 rotation() const {
        Mat3 r;
        r.col(0) = x_axis;
        r.col(1) = y_axis;
        r.col(2) = z_axis;
        return r;
    }
    Vec3 to_world(const Vec3& v) const { return rotation() * v; }
};

/// Builds the capsule frame; throws DegenerateGeometryError for headings
/// within 1e-6 of world-vertical (the vertical plane is then undefined).
CapsuleFrame capsule_frame(const Vec3& position, const Vec3& heading);

/// Actuator spin axis that rotates the capsule about `heading`, from the
/// unit capsule-to-actuator geometry: unit((3 r r^T - I) heading) with r the
/// unit vector from the actuator to the capsule.
Vec3 actuator_axis_world(const Vec3& r_hat, const Vec3& heading);

/// The same axis expressed in the capsule frame as a function of the
/// actuating angle only.
Vec3 actuator_axis_frame_c(double alpha);

/// Actuator moment direction in the capsule frame at spin phase theta:
/// (A cos t, sin t, sqrt(1-A^2) cos t), A = 3 cos a sin a / sqrt(3 sin^2 a + 1).
Vec3 actuator_moment(double alpha, double theta);

/// A fully specified actuator pose-and-spin command. moment_ref is the world
/// moment direction at spin phase zero; the instantaneous moment is obtained
/// by rotating it about rotation_axis.
struct ActuatorCommand {
    Vec3 position = Vec3::Zero();
    Vec3 rotation_axis = Vec3::UnitX();
    Vec3 moment_ref = Vec3::UnitZ();
    double spin_phase = 0.0;  // phase at issue time
    double spin_rate = 0.0;   // rad/s
    double actuating_angle = 0.0;
    double standoff = 0.0;

    Vec3 moment_at(double theta) const { return rotate_about(rotation_axis, theta, moment_ref); }
    magnetics::DipoleSource source_at(double theta, double moment_mag) const {
        return {position, moment_at(theta), moment_mag};
    }
};

/// Controller knobs: the two actuating angles, the speed threshold that
/// switches them, the velocity sampling period, actuator standoff and spin.
struct ControlParams {
    double alpha_high = deg_to_rad(15.0);
    double alpha_low = deg_to_rad(7.5);
    double v_threshold = 5.7e-3;  // m/s
    double delta_t = 0.2;         // s
    double standoff = 0.15;       // m
    double spin_rate = 2.5 * 2.0 * kPi;  // rad/s

    void validate() const;
};

/// Last four sampled capsule positions spaced delta_t apart.
class VelocityWindow {
  public:
    explicit VelocityWindow(double delta_t);

    void push(double time, const Vec3& position);
    bool full() const { return count_ == 4; }
    double delta_t() const { return delta_t_; }
    /// positions oldest-first; only valid when full
    std::array<Vec3, 4> positions() const;

  private:
    double delta_t_;
    int count_ = 0;
    std::array<double, 4> times_{};
    std::array<Vec3, 4> positions_{};
};

/// Simple moving average of the three inter-sample speeds.
double sma_velocity(const VelocityWindow& window);

/// alpha_high when the speed exceeds the threshold, alpha_low otherwise
/// (equality takes the low branch).
double adaptive_alpha(double speed, const ControlParams& params);

/// Capsule moment under the wall constraint: unit projection of the local
/// field onto the plane perpendicular to the heading. Throws when the
/// projection vanishes.
Vec3 wall_constrained_moment(const Vec3& field, const Vec3& heading);

/// Instantaneous dipole-dipole force on the wall-constrained capsule at
/// position r_cur from the actuator (actuator at the origin of the design
/// frame), at spin phase theta.
Vec3 instantaneous_force(const Vec3& r_cur, const Vec3& heading, double alpha, double theta,
                         double actuator_mag, double capsule_mag);

/// Revolution-averaged propulsive force (force component along the heading),
/// composite trapezoid over the spin phase.
double mean_propulsive_force(const Vec3& r_cur, const Vec3& heading, double alpha,
                             double actuator_mag, double capsule_mag, int n_theta = 64);

/// Rotation axis of the local field: cross product of the capsule-site
/// fields at spin phases 0 and 90 degrees (unnormalized). Design-frame form:
/// the actuator sits at p_a with the Eq-geometry moment set of angle alpha.
Vec3 field_rotation_axis(const Vec3& p_a, double alpha, const Vec3& p_c);

/// General form for an arbitrary world command.
Vec3 field_rotation_axis(const ActuatorCommand& command, const Vec3& p_c);

/// Angle between the field rotation axis and the heading, radians.
double gamma_angle(const Vec3& p_a, double alpha, const Vec3& p_c, const Vec3& heading);
double gamma_angle(const ActuatorCommand& command, const Vec3& p_c, const Vec3& heading);

/// Root-search toolkit for the straight-lumen and bend analyses. The design
/// frame has the capsule initially at the origin heading +x and the actuator
/// at d(sin a, 0, cos a).
struct AnalysisConfig {
    double standoff = 0.15;
    double bend_radius = 0.018;
    double actuator_mag = 1.0;
    double capsule_mag = 1.0;
    int n_theta = 64;
    int n_grid = 200;
};

/// Propulsive force at displacement m along a straight lumen.
double straight_propulsive_force(double m, double alpha, const AnalysisConfig& cfg);
/// Gamma at displacement m along a straight lumen.
double straight_gamma(double m, double alpha, const AnalysisConfig& cfg);
/// Propulsive force at bend angle beta along a 180-degree bend.
double bend_propulsive_force(double beta, double alpha, const AnalysisConfig& cfg);
/// Gamma at bend angle beta.
double bend_gamma(double beta, double alpha, const AnalysisConfig& cfg);

/// Displacement in [0, d sin a] where the averaged propulsive force crosses
/// zero; unbracketed results return the grid minimizer, flagged.
RootResult zero_point_straight(double alpha, const AnalysisConfig& cfg);
/// Displacement where gamma reaches 45 degrees.
RootResult critical_point_straight(double alpha, const AnalysisConfig& cfg);
/// Bend angle (radians in [0, pi]) where the propulsive force crosses zero.
RootResult zero_point_bend(double alpha, const AnalysisConfig& cfg);
/// Bend angle where gamma reaches 45 degrees.
RootResult critical_point_bend(double alpha, const AnalysisConfig& cfg);

struct IntersectionResult {
    double alpha = 0.0;
    bool found = false;
};

/// Actuating angle where the bend zero point meets the bend critical point.
IntersectionResult intersection_alpha(const AnalysisConfig& cfg);

/// One controller update: speed from the window, actuating angle from the
/// adaptive rule, actuator pose and spin axis from the capsule pose.
ActuatorCommand actuation_step(const Pose6D& pose, const VelocityWindow& window,
                               const ControlParams& params);

/// Command for an explicit actuating angle (fixed-angle mode and warm-up).
ActuatorCommand make_command(const Pose6D& pose, double alpha, const ControlParams& params);

}  // namespace smal::actuation
