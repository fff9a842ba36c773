#include "smal/actuation.hpp"

#include <cmath>

namespace smal::actuation {

using magnetics::DipoleSource;

CapsuleFrame capsule_frame(const Vec3& position, const Vec3& heading) {
    const Vec3 x = unit(heading);
    const Vec3 up = Vec3::UnitZ();
    Vec3 z = up - up.dot(x) * x;
    const double n = z.norm();
    if (n < 1e-6) {
        throw DegenerateGeometryError("vertical heading: capsule frame undefined");
    }
    z /= n;
    CapsuleFrame f;
    f.origin = position;
    f.x_axis = x;
    f.z_axis = z;
    f.y_axis = z.cross(x);
    return f;
}

Vec3 actuator_axis_world(const Vec3& r_hat, const Vec3& heading) {
    const Vec3 v = 3.0 * r_hat * r_hat.dot(heading) - heading;
    const double n = v.norm();
    if (n < 1e-12) {
        throw DegenerateGeometryError("actuator axis undefined: (3 r r^T - I) h vanished");
    }
    return v / n;
}

Vec3 actuator_axis_frame_c(double alpha) {
    const double s = std::sin(alpha);
    const double c = std::cos(alpha);
    const double den = std::sqrt(3.0 * s * s + 1.0);
    return {(3.0 * s * s - 1.0) / den, 0.0, 3.0 * c * s / den};
}

Vec3 actuator_moment(double alpha, double theta) {
    const double s = std::sin(alpha);
    const double c = std::cos(alpha);
    const double big_a = 3.0 * c * s / std::sqrt(3.0 * s * s + 1.0);
    const double root = (1.0 - 3.0 * s * s) / std::sqrt(3.0 * s * s + 1.0);
    return {big_a * std::cos(theta), std::sin(theta), root * std::cos(theta)};
}

void ControlParams::validate() const {
    if (!(alpha_low > 0.0) || alpha_low > alpha_high || alpha_high > kMaxActuatingAngle + 1e-12) {
        throw ValidationError("need 0 < alpha_low <= alpha_high <= 35 degrees");
    }
    if (!(v_threshold > 0.0)) throw ValidationError("v_threshold must be positive");
    if (!(delta_t > 0.0)) throw ValidationError("delta_t must be positive");
    if (!(standoff > 0.0)) throw ValidationError("standoff must be positive");
    if (!(spin_rate > 0.0)) throw ValidationError("spin_rate must be positive");
}

VelocityWindow::VelocityWindow(double delta_t) : delta_t_(delta_t) {
    if (!(delta_t > 0.0)) throw ValidationError("velocity window period must be positive");
}

void VelocityWindow::push(double time, const Vec3& position) {
    if (count_ > 0 && std::abs(time - times_[std::min(count_, 4) - 1] - delta_t_) > 1e-9) {
        throw ValidationError("velocity window samples must be spaced delta_t apart");
    }
    if (count_ < 4) {
        times_[count_] = time;
        positions_[count_] = position;
        ++count_;
        return;
    }
    for (int i = 0; i < 3; ++i) {
        times_[i] = times_[i + 1];
        positions_[i] = positions_[i + 1];
    }
    times_[3] = time;
    positions_[3] = position;
}

std::array<Vec3, 4> VelocityWindow::positions() const {
    if (!full()) throw ValidationError("velocity window not yet full");
    return positions_;
}

double sma_velocity(const VelocityWindow& window) {
    const auto p = window.positions();
    double acc = 0.0;
    for (int i = 0; i < 3; ++i) {
        acc += (p[i + 1] - p[i]).norm() / window.delta_t();
    }
    return acc / 3.0;
}

double adaptive_alpha(double speed, const ControlParams& params) {
    return speed > params.v_threshold ? params.alpha_high : params.alpha_low;
}

Vec3 wall_constrained_moment(const Vec3& field, const Vec3& heading) {
    const Vec3 radial = field - field.dot(heading) * heading;
    const double n = radial.norm();
    if (n < 1e-15) {
        throw DegenerateGeometryError("field parallel to heading: capsule moment undefined");
    }
    return radial / n;
}

Vec3 instantaneous_force(const Vec3& r_cur, const Vec3& heading, double alpha, double theta,
                         double actuator_mag, double capsule_mag) {
    const DipoleSource actuator{Vec3::Zero(), actuator_moment(alpha, theta), actuator_mag};
    const Vec3 field = magnetics::dipole_field(actuator, r_cur);
    const DipoleSource capsule{r_cur, wall_constrained_moment(field, heading), capsule_mag};
    return magnetics::dipole_force(actuator, capsule);
}

double mean_propulsive_force(const Vec3& r_cur, const Vec3& heading, double alpha,
                             double actuator_mag, double capsule_mag, int n_theta) {
    return periodic_mean(
        [&](double theta) {
            return instantaneous_force(r_cur, heading, alpha, theta, actuator_mag, capsule_mag)
                .dot(heading);
        },
        n_theta);
}

Vec3 field_rotation_axis(const Vec3& p_a, double alpha, const Vec3& p_c) {
    const DipoleSource a0{p_a, actuator_moment(alpha, 0.0), 1.0};
    const DipoleSource a90{p_a, actuator_moment(alpha, kPi / 2.0), 1.0};
    return magnetics::dipole_field(a0, p_c).cross(magnetics::dipole_field(a90, p_c));
}

Vec3 field_rotation_axis(const ActuatorCommand& command, const Vec3& p_c) {
    const Vec3 b0 = magnetics::dipole_field(command.source_at(0.0, 1.0), p_c);
    const Vec3 b90 = magnetics::dipole_field(command.source_at(kPi / 2.0, 1.0), p_c);
    return b0.cross(b90);
}

namespace {

double gamma_of_axis(const Vec3& axis, const Vec3& heading) {
    const double n = axis.norm();
    if (n < 1e-30) {
        throw DegenerateGeometryError("collinear field pair: rotation axis undefined");
    }
    return angle_between(axis, heading);
}

}  // namespace

double gamma_angle(const Vec3& p_a, double alpha, const Vec3& p_c, const Vec3& heading) {
    return gamma_of_axis(field_rotation_axis(p_a, alpha, p_c), heading);
}

double gamma_angle(const ActuatorCommand& command, const Vec3& p_c, const Vec3& heading) {
    return gamma_of_axis(field_rotation_axis(command, p_c), heading);
}

double straight_propulsive_force(double m, double alpha, const AnalysisConfig& cfg) {
    const Vec3 r_cur(m - cfg.standoff * std::sin(alpha), 0.0, -cfg.standoff * std::cos(alpha));
    return mean_propulsive_force(r_cur, Vec3::UnitX(), alpha, cfg.actuator_mag, cfg.capsule_mag,
                                 cfg.n_theta);
}

double straight_gamma(double m, double alpha, const AnalysisConfig& cfg) {
    const Vec3 p_a = cfg.standoff * Vec3(std::sin(alpha), 0.0, std::cos(alpha));
    return gamma_angle(p_a, alpha, Vec3(m, 0.0, 0.0), Vec3::UnitX());
}

// The bend is entered at the design point: the capsule starts at the origin
// heading +x with the actuator commanded there, then follows the arc of
// radius R centered at (0, R, 0) through bend angle beta.

double bend_propulsive_force(double beta, double alpha, const AnalysisConfig& cfg) {
    const double r = cfg.bend_radius;
    const Vec3 r_cur(r * std::sin(beta) - cfg.standoff * std::sin(alpha),
                     r * (1.0 - std::cos(beta)), -cfg.standoff * std::cos(alpha));
    const Vec3 heading(std::cos(beta), std::sin(beta), 0.0);
    return mean_propulsive_force(r_cur, heading, alpha, cfg.actuator_mag, cfg.capsule_mag,
                                 cfg.n_theta);
}

double bend_gamma(double beta, double alpha, const AnalysisConfig& cfg) {
    const double r = cfg.bend_radius;
    const Vec3 p_a = cfg.standoff * Vec3(std::sin(alpha), 0.0, std::cos(alpha));
    const Vec3 p_c(r * std::sin(beta), r * (1.0 - std::cos(beta)), 0.0);
    const Vec3 heading(std::cos(beta), std::sin(beta), 0.0);
    return gamma_angle(p_a, alpha, p_c, heading);
}

RootResult zero_point_straight(double alpha, const AnalysisConfig& cfg) {
    return scan_and_bisect(
        [&](double m) { return straight_propulsive_force(m, alpha, cfg); }, 0.0,
        cfg.standoff * std::sin(alpha), cfg.n_grid);
}

RootResult critical_point_straight(double alpha, const AnalysisConfig& cfg) {
    return scan_and_bisect(
        [&](double m) { return straight_gamma(m, alpha, cfg) - deg_to_rad(45.0); }, 0.0,
        cfg.standoff * std::sin(alpha), cfg.n_grid);
}

RootResult zero_point_bend(double alpha, const AnalysisConfig& cfg) {
    return scan_and_bisect([&](double beta) { return bend_propulsive_force(beta, alpha, cfg); },
                           0.0, kPi, cfg.n_grid);
}

RootResult critical_point_bend(double alpha, const AnalysisConfig& cfg) {
    return scan_and_bisect(
        [&](double beta) { return bend_gamma(beta, alpha, cfg) - deg_to_rad(45.0); }, 0.0, kPi,
        cfg.n_grid);
}

IntersectionResult intersection_alpha(const AnalysisConfig& cfg) {
    const auto diff = [&](double alpha) {
        return zero_point_bend(alpha, cfg).value - critical_point_bend(alpha, cfg).value;
    };
    const RootResult r = scan_and_bisect(diff, deg_to_rad(5.0), deg_to_rad(35.0), 60, 1e-6);
    return {r.value, r.bracketed};
}

ActuatorCommand make_command(const Pose6D& pose, double alpha, const ControlParams& params) {
    if (alpha < 0.0 || alpha > kMaxActuatingAngle + 1e-12) {
        throw ValidationError("actuating angle outside [0, 35] degrees");
    }
    const CapsuleFrame frame = capsule_frame(pose.position, pose.heading);
    // r = d * Rot_y(alpha) (0,0,-1): capsule-to-actuator offset is -r
    const Vec3 r_frame =
        params.standoff * Vec3(-std::sin(alpha), 0.0, -std::cos(alpha));
    ActuatorCommand cmd;
    cmd.position = pose.position - frame.to_world(r_frame);
    cmd.rotation_axis = frame.to_world(actuator_axis_frame_c(alpha));
    cmd.moment_ref = frame.to_world(actuator_moment(alpha, 0.0));
    cmd.spin_rate = params.spin_rate;
    cmd.actuating_angle = alpha;
    cmd.standoff = params.standoff;
    return cmd;
}

ActuatorCommand actuation_step(const Pose6D& pose, const VelocityWindow& window,
                               const ControlParams& params) {
    const double speed = sma_velocity(window);
    return make_command(pose, adaptive_alpha(speed, params), params);
}

}  // namespace smal::actuation
