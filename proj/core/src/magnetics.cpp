#include "smal/magnetics.hpp"

#include <cmath>

namespace smal::magnetics {

DipoleSource make_dipole(const Vec3& position, const Vec3& moment_dir, double moment_mag) {
    const double n = moment_dir.norm();
    if (std::abs(n - 1.0) > 1e-9) {
        throw ValidationError("dipole moment direction is not unit length");
    }
    if (!(moment_mag > 0.0)) {
        throw ValidationError("dipole moment magnitude must be positive");
    }
    return {position, moment_dir / n, moment_mag};
}

MagnetSpec MagnetSpec::sphere(double diameter, double remanence) {
    if (!(diameter > 0.0)) throw ValidationError("sphere diameter must be positive");
    if (remanence < 0.0) throw ValidationError("remanence must be non-negative");
    MagnetSpec s;
    s.shape = Shape::Sphere;
    s.diameter = diameter;
    s.remanence = remanence;
    return s;
}

MagnetSpec MagnetSpec::ring(double outer_diameter, double inner_diameter, double length,
                            double remanence) {
    if (!(outer_diameter > 0.0) || !(inner_diameter > 0.0) || !(length > 0.0)) {
        throw ValidationError("ring dimensions must be positive");
    }
    if (inner_diameter >= outer_diameter) {
        throw ValidationError("ring inner diameter must be smaller than outer diameter");
    }
    if (remanence < 0.0) throw ValidationError("remanence must be non-negative");
    MagnetSpec s;
    s.shape = Shape::Ring;
    s.outer_diameter = outer_diameter;
    s.inner_diameter = inner_diameter;
    s.length = length;
    s.remanence = remanence;
    return s;
}

double MagnetSpec::volume() const {
    switch (shape) {
        case Shape::Sphere:
            return kPi * diameter * diameter * diameter / 6.0;
        case Shape::Ring:
            return kPi / 4.0 * (outer_diameter * outer_diameter - inner_diameter * inner_diameter) *
                   length;
    }
    return 0.0;
}

double moment_magnitude(const MagnetSpec& spec) { return spec.remanence * spec.volume() / kMu0; }

namespace {

Vec3 separation_or_throw(const Vec3& from, const Vec3& to, const char* what) {
    const Vec3 r = to - from;
    if (r.norm() <= kMinSeparation) throw SingularPointError(what);
    return r;
}

}  // namespace

Vec3 dipole_field(const DipoleSource& source, const Vec3& point) {
    const Vec3 r = separation_or_throw(source.position, point, "field query at dipole location");
    const double d2 = r.squaredNorm();
    const double d = std::sqrt(d2);
    const double k = kMu0 * source.moment_mag / (4.0 * kPi * d2 * d2 * d);
    return k * (3.0 * r * r.dot(source.moment_dir) - d2 * source.moment_dir);
}

Mat3 dipole_field_gradient(const DipoleSource& source, const Vec3& point) {
    const Vec3 r = separation_or_throw(source.position, point, "gradient query at dipole location");
    const double d2 = r.squaredNorm();
    const double d = std::sqrt(d2);
    const Vec3 rh = r / d;
    const Vec3& m = source.moment_dir;
    const double k = 3.0 * kMu0 * source.moment_mag / (4.0 * kPi * d2 * d2 * d);
    Mat3 g = m.dot(r) * Mat3::Identity() + r * m.transpose() + m * r.transpose() -
             5.0 * m.dot(r) * (rh * rh.transpose());
    return k * g;
}

Vec3 superposed_field(std::span<const DipoleSource> sources, const Vec3& point) {
    Vec3 b = Vec3::Zero();
    for (const auto& s : sources) b += dipole_field(s, point);
    return b;
}

Vec3 dipole_force(const DipoleSource& actuator, const DipoleSource& capsule) {
    const Vec3 r =
        separation_or_throw(actuator.position, capsule.position, "force query at zero separation");
    const double d2 = r.squaredNorm();
    const double d = std::sqrt(d2);
    const double d7 = d2 * d2 * d2 * d;
    const Vec3& ma = actuator.moment_dir;
    const Vec3& mc = capsule.moment_dir;
    const double k =
        3.0 * kMu0 * actuator.moment_mag * capsule.moment_mag / (4.0 * kPi * d7);
    const Vec3 term = mc * (ma.dot(r)) * d2 + ma * (mc.dot(r)) * d2 +
                      (mc.dot(ma) * d2 - 5.0 * mc.dot(r) * ma.dot(r)) * r;
    return k * term;
}

}  // namespace smal::magnetics
