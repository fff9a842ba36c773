#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "smal/magnetics.hpp"
#include "smal/rng.hpp"
#include "smal/vec.hpp"

namespace smal::sensors {

using magnetics::DipoleSource;
using magnetics::FieldSample;

/// The full planar magnetometer array: nx x ny sensors at pitch `spacing`,
/// sensor (0,0) at `origin`, rows along +x. noise_sigma is the per-axis
/// Gaussian measurement noise in Tesla.
struct SensorGrid {
    int nx = 8;
    int ny = 10;
    double spacing = 0.06;
    Vec3 origin = Vec3::Zero();
    double noise_sigma = 0.6e-6;

    Vec3 sensor_position(int i, int j) const {
        return origin + Vec3(i * spacing, j * spacing, 0.0);
    }
    void validate() const;
};

enum class GridKind { FourByFour, FiveByFive };

using Cell = std::pair<int, int>;

/// One candidate sub-array layout on a gk x gk design grid: a set of cells
/// closed under 90-degree rotation about the grid center.
struct SubArrayLayout {
    std::string id;
    GridKind grid_kind = GridKind::FourByFour;
    std::vector<Cell> offsets;  // sorted row-major
    int sensor_count = 0;

    int grid_size() const { return grid_kind == GridKind::FourByFour ? 4 : 5; }
};

/// Cells of a g x g grid partitioned into orbits of the 90-degree rotation
/// about the center; the fixed center cell of odd grids is excluded.
std::vector<std::vector<Cell>> rotation_orbits(int grid_size);

/// All 36 symmetric sub-array candidates: orbit pairs of the 4x4 grid (6),
/// orbit pairs of the 5x5 grid (15), and the same 15 with the center added.
std::vector<SubArrayLayout> enumerate_layouts();

/// True when the offsets are distinct and closed under 90-degree rotation.
bool has_fourfold_symmetry(const SubArrayLayout& layout);

/// JSON catalog of layouts (id, grid kind, sensor count, offsets).
std::string layouts_to_json(std::span<const SubArrayLayout> layouts);

/// World sensor positions of a layout placed at cell pitch `pitch` with the
/// design-grid center at `center` (cells lie in the z = center.z plane).
std::vector<Vec3> layout_positions(const SubArrayLayout& layout, double pitch, const Vec3& center);

/// The runtime sub-array: the 3x3-minus-center window around (cx, cy).
struct ActiveSubArray {
    int cx = 0;
    int cy = 0;
    std::vector<Cell> indices;
    std::vector<Vec3> positions;
};

/// Nearest valid window center for a capsule at `xy` (sensor-frame meters):
/// per axis, round(p/D) clamped to [1, N-2].
Cell select_subarray_center(const Vec2& capsule_xy, const SensorGrid& grid);

/// Builds the 8-sensor window around `center`; the center must lie in
/// [1, nx-2] x [1, ny-2].
ActiveSubArray activate(Cell center, const SensorGrid& grid);

/// Superposed fields at the given positions plus independent zero-mean
/// Gaussian noise of std `noise_sigma` per axis.
std::vector<FieldSample> measure_at(std::span<const Vec3> positions,
                                    std::span<const DipoleSource> sources, double noise_sigma,
                                    Rng& rng);

std::vector<FieldSample> measure(const ActiveSubArray& active,
                                 std::span<const DipoleSource> sources, double noise_sigma,
                                 Rng& rng);

/// The six study finalists, labelled a-f. Labels are frozen identifiers into
/// enumerate_layouts() ids; layout (c) is the deployed runtime geometry.
struct FinalistLayout {
    char label;
    SubArrayLayout layout;
};
std::vector<FinalistLayout> finalist_layouts();

}  // namespace smal::sensors
