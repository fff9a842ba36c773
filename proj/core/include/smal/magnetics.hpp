#pragma once

#include <span>
#include <vector>

#include "smal/errors.hpp"
#include "smal/vec.hpp"

namespace smal::magnetics {

/// Vacuum permeability, T*m/A. SI units throughout the library.
inline constexpr double kMu0 = 4.0 * kPi * 1e-7;

/// Typical NdFeB remanence by grade, Tesla.
inline constexpr double kRemanenceN42 = 1.32;
inline constexpr double kRemanenceN38SH = 1.26;

/// Minimum source-to-query separation; closer queries are errors, never
/// clamped, so optimization landscapes stay uncorrupted.
inline constexpr double kMinSeparation = 1e-6;

/// A point dipole: position (m), unit moment direction, moment magnitude
/// (A*m^2). Used both for the actuator magnet and the capsule's ring magnet.
struct DipoleSource {
    Vec3 position = Vec3::Zero();
    Vec3 moment_dir = Vec3::UnitZ();
    double moment_mag = 1.0;
};

/// Validating factory: normalizes moment_dir (must be within 1e-9 of unit
/// length) and requires moment_mag > 0.
DipoleSource make_dipole(const Vec3& position, const Vec3& moment_dir, double moment_mag);

/// Physical magnet geometry plus remanence, used to derive dipole strength.
struct MagnetSpec {
    enum class Shape { Sphere, Ring };
    Shape shape = Shape::Sphere;
    double diameter = 0.0;        // sphere
    double outer_diameter = 0.0;  // ring
    double inner_diameter = 0.0;  // ring
    double length = 0.0;          // ring
    double remanence = 0.0;       // Tesla

    static MagnetSpec sphere(double diameter, double remanence);
    static MagnetSpec ring(double outer_diameter, double inner_diameter, double length,
                           double remanence);
    double volume() const;
};

/// One tri-axial magnetometer reading: sensor position and field, SI.
struct FieldSample {
    Vec3 position = Vec3::Zero();
    Vec3 field = Vec3::Zero();
};

/// Point-dipole field at `point`, Tesla. Throws SingularPointError when the
/// query is within kMinSeparation of the source.
Vec3 dipole_field(const DipoleSource& source, const Vec3& point);

/// d(field)/d(point), T/m; same singularity rule as dipole_field.
Mat3 dipole_field_gradient(const DipoleSource& source, const Vec3& point);

/// Superposition over a source list; empty list gives zero field.
Vec3 superposed_field(std::span<const DipoleSource> sources, const Vec3& point);

/// Force on `capsule` exerted by `actuator`, Newtons (the exact gradient of
/// m_c . B_a at the capsule position).
Vec3 dipole_force(const DipoleSource& actuator, const DipoleSource& capsule);

/// Dipole strength Br*V/mu0 for the given magnet geometry, A*m^2.
double moment_magnitude(const MagnetSpec& spec);

}  // namespace smal::magnetics
