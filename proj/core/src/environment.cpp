#include "smal/environment.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace smal::env {

SegmentSpec SegmentSpec::straight(double length) {
    if (!(length > 0.0)) throw ValidationError("straight segment length must be positive");
    SegmentSpec s;
    s.kind = Kind::Straight;
    s.length = length;
    return s;
}

SegmentSpec SegmentSpec::arc(double radius, double sweep, const Vec3& turn_axis) {
    if (!(radius > 0.0)) throw ValidationError("arc radius must be positive");
    if (!(sweep > 0.0)) throw ValidationError("arc sweep must be positive");
    if (std::abs(turn_axis.norm() - 1.0) > 1e-9) {
        throw ValidationError("arc turn axis must be unit length");
    }
    SegmentSpec s;
    s.kind = Kind::Arc;
    s.radius = radius;
    s.sweep = sweep;
    s.turn_axis = turn_axis;
    return s;
}

TubePath::TubePath(const Vec3& start_position, const Vec3& start_tangent,
                   std::vector<SegmentSpec> segments, double tube_inner_diameter)
    : specs_(std::move(segments)), tube_inner_diameter_(tube_inner_diameter) {
    if (specs_.empty()) throw ValidationError("path needs at least one segment");
    if (!(tube_inner_diameter > 0.0)) throw ValidationError("tube diameter must be positive");

    Vec3 p = start_position;
    Vec3 t = unit(start_tangent);
    for (const auto& spec : specs_) {
        geoms_.push_back({p, t});
        cum_.push_back(total_length_);
        double len = 0.0;
        if (spec.kind == SegmentSpec::Kind::Straight) {
            len = spec.length;
            p += len * t;
        } else {
            if (std::abs(spec.turn_axis.dot(t)) > 1e-9) {
                throw ValidationError("arc turn axis must be perpendicular to the tangent");
            }
            len = spec.radius * spec.sweep;
            const Vec3 center = p + spec.radius * spec.turn_axis.cross(t);
            const Vec3 u0 = t.cross(spec.turn_axis);  // unit, points from center to p
            const Vec3 u1 = rotate_about(spec.turn_axis, spec.sweep, u0);
            p = center + spec.radius * u1;
            t = rotate_about(spec.turn_axis, spec.sweep, t);
        }
        lengths_.push_back(len);
        total_length_ += len;
    }
}

int TubePath::segment_index_at(double s) const {
    if (s < -1e-12 || s > total_length_ + 1e-12) {
        throw ValidationError("arclength outside the path");
    }
    for (int i = segment_count() - 1; i >= 0; --i) {
        if (s >= cum_[i] - 1e-12) return i;
    }
    return 0;
}

PathPose TubePath::pose_at(double s) const {
    const int i = segment_index_at(s);
    const double local = std::clamp(s - cum_[i], 0.0, lengths_[i]);
    const auto& spec = specs_[i];
    const auto& g = geoms_[i];
    PathPose out;
    if (spec.kind == SegmentSpec::Kind::Straight) {
        out.position = g.start_position + local * g.start_tangent;
        out.tangent = g.start_tangent;
        out.curvature = 0.0;
    } else {
        const double phi = local / spec.radius;
        const Vec3 center = g.start_position + spec.radius * spec.turn_axis.cross(g.start_tangent);
        const Vec3 u0 = g.start_tangent.cross(spec.turn_axis);
        out.position = center + spec.radius * rotate_about(spec.turn_axis, phi, u0);
        out.tangent = rotate_about(spec.turn_axis, phi, g.start_tangent);
        out.curvature = 1.0 / spec.radius;
    }
    return out;
}

TubePath TubePath::from_json_text(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("path JSON parse error: ") + e.what());
    }
    try {
        const auto start = doc.at("start");
        const auto pos = start.at("position");
        const auto tan = start.at("tangent");
        const Vec3 p(pos.at(0).get<double>(), pos.at(1).get<double>(), pos.at(2).get<double>());
        const Vec3 t(tan.at(0).get<double>(), tan.at(1).get<double>(), tan.at(2).get<double>());
        std::vector<SegmentSpec> segs;
        for (const auto& s : doc.at("segments")) {
            const std::string type = s.at("type").get<std::string>();
            if (type == "straight") {
                segs.push_back(SegmentSpec::straight(s.at("length").get<double>()));
            } else if (type == "arc") {
                const auto ax = s.at("axis");
                Vec3 axis(ax.at(0).get<double>(), ax.at(1).get<double>(), ax.at(2).get<double>());
                segs.push_back(SegmentSpec::arc(s.at("radius").get<double>(),
                                                deg_to_rad(s.at("sweep_deg").get<double>()),
                                                unit(axis)));
            } else {
                throw ValidationError("unknown segment type: " + type);
            }
        }
        return TubePath(p, unit(t), std::move(segs), doc.at("tube_inner_diameter").get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("path JSON field error: ") + e.what());
    }
}

void ResistanceModel::validate() const {
    if (static_threshold < 0.0 || curvature_gain < 0.0) {
        throw ValidationError("resistance terms must be non-negative");
    }
    if (!(viscous_coeff > 0.0)) throw ValidationError("viscous coefficient must be positive");
}

CapsuleState advance(const CapsuleState& state, double propulsive_force,
                     const ResistanceModel& model, double curvature, double dt, double spin_rate,
                     double total_length) {
    if (!(dt > 0.0)) throw ValidationError("dt must be positive");
    CapsuleState out = state;
    const double resistance = model.static_threshold + model.curvature_gain * curvature;
    if (std::abs(propulsive_force) <= resistance) {
        out.velocity = 0.0;
    } else {
        const double mag = (std::abs(propulsive_force) - resistance) / model.viscous_coeff;
        out.velocity = std::copysign(mag, propulsive_force);
    }
    out.arclength = std::clamp(state.arclength + out.velocity * dt, 0.0, total_length);
    if (state.synchronous) {
        out.spin_phase = std::fmod(state.spin_phase + spin_rate * dt, 2.0 * kPi);
    }
    return out;
}

bool sync_state(double gamma) { return gamma <= deg_to_rad(45.0); }

std::pair<Vec3, Vec3> cross_section_frame(const Vec3& tangent) {
    const auto frame = actuation::capsule_frame(Vec3::Zero(), tangent);
    return {frame.z_axis, frame.y_axis};
}

double moment_phase(const Vec3& moment, const Vec3& tangent) {
    const auto [e1, e2] = cross_section_frame(tangent);
    return std::atan2(moment.dot(e2), moment.dot(e1));
}

Vec3 moment_from_phase(double phase, const Vec3& tangent) {
    const auto [e1, e2] = cross_section_frame(tangent);
    return std::cos(phase) * e1 + std::sin(phase) * e2;
}

Vec3 true_capsule_moment(const CapsuleState& state, const TubePath& path,
                         const actuation::ActuatorCommand& command, double theta) {
    const PathPose pose = path.pose_at(state.arclength);
    if (!state.synchronous) {
        return moment_from_phase(state.spin_phase, pose.tangent);
    }
    const Vec3 field =
        magnetics::dipole_field(command.source_at(theta, 1.0), pose.position);
    return actuation::wall_constrained_moment(field, pose.tangent);
}

}  // namespace smal::env
