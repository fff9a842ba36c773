#include "smal/sensor_array.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "smal/errors.hpp"

namespace smal::sensors {

void SensorGrid::validate() const {
    if (nx < 3 || ny < 3) throw ValidationError("sensor grid must be at least 3x3");
    if (!(spacing > 0.0)) throw ValidationError("sensor spacing must be positive");
    if (noise_sigma < 0.0) throw ValidationError("noise sigma must be non-negative");
}

namespace {

Cell rotate90(Cell c, int g) { return {c.second, g - 1 - c.first}; }

std::string kind_name(GridKind k) {
    return k == GridKind::FourByFour ? "four_by_four" : "five_by_five";
}

SubArrayLayout make_layout(GridKind kind, std::vector<Cell> offsets, const std::string& id) {
    std::sort(offsets.begin(), offsets.end());
    SubArrayLayout l;
    l.id = id;
    l.grid_kind = kind;
    l.sensor_count = static_cast<int>(offsets.size());
    l.offsets = std::move(offsets);
    return l;
}

}  // namespace

std::vector<std::vector<Cell>> rotation_orbits(int g) {
    std::vector<std::vector<Cell>> orbits;
    std::set<Cell> seen;
    for (int i = 0; i < g; ++i) {
        for (int j = 0; j < g; ++j) {
            Cell c{i, j};
            if (seen.count(c)) continue;
            std::vector<Cell> orbit;
            Cell cur = c;
            for (int k = 0; k < 4; ++k) {
                if (!seen.count(cur)) {
                    orbit.push_back(cur);
                    seen.insert(cur);
                }
                cur = rotate90(cur, g);
            }
            if (orbit.size() == 1) continue;  // fixed center cell of odd grids
            std::sort(orbit.begin(), orbit.end());
            orbits.push_back(std::move(orbit));
        }
    }
    std::sort(orbits.begin(), orbits.end());
    return orbits;
}

std::vector<SubArrayLayout> enumerate_layouts() {
    std::vector<SubArrayLayout> out;
    const auto emit_pairs = [&out](GridKind kind, int g, const char* prefix, bool with_center) {
        const auto orbits = rotation_orbits(g);
        for (std::size_t a = 0; a < orbits.size(); ++a) {
            for (std::size_t b = a + 1; b < orbits.size(); ++b) {
                std::vector<Cell> cells = orbits[a];
                cells.insert(cells.end(), orbits[b].begin(), orbits[b].end());
                std::string id = std::string(prefix) + "-o" + std::to_string(a) + "o" +
                                 std::to_string(b);
                if (with_center) {
                    cells.emplace_back(g / 2, g / 2);
                    id += "c";
                }
                out.push_back(make_layout(kind, std::move(cells), id));
            }
        }
    };
    emit_pairs(GridKind::FourByFour, 4, "g4", false);
    emit_pairs(GridKind::FiveByFive, 5, "g5", false);
    emit_pairs(GridKind::FiveByFive, 5, "g5", true);
    return out;
}

bool has_fourfold_symmetry(const SubArrayLayout& layout) {
    const int g = layout.grid_size();
    std::set<Cell> cells(layout.offsets.begin(), layout.offsets.end());
    if (cells.size() != layout.offsets.size()) return false;
    for (const auto& c : cells) {
        if (!cells.count(rotate90(c, g))) return false;
    }
    return true;
}

std::string layouts_to_json(std::span<const SubArrayLayout> layouts) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& l : layouts) {
        nlohmann::json offs = nlohmann::json::array();
        for (const auto& [r, c] : l.offsets) offs.push_back({r, c});
        arr.push_back({{"id", l.id},
                       {"grid_kind", kind_name(l.grid_kind)},
                       {"sensor_count", l.sensor_count},
                       {"offsets", offs}});
    }
    return arr.dump(2) + "\n";
}

std::vector<Vec3> layout_positions(const SubArrayLayout& layout, double pitch, const Vec3& center) {
    const double half = 0.5 * (layout.grid_size() - 1);
    std::vector<Vec3> pos;
    pos.reserve(layout.offsets.size());
    for (const auto& [i, j] : layout.offsets) {
        pos.push_back(center + Vec3((i - half) * pitch, (j - half) * pitch, 0.0));
    }
    return pos;
}

Cell select_subarray_center(const Vec2& capsule_xy, const SensorGrid& grid) {
    const auto pick = [&](double p, int n) {
        const long r = std::lround(p / grid.spacing);
        return static_cast<int>(std::clamp<long>(r, 1, n - 2));
    };
    return {pick(capsule_xy.x() - grid.origin.x(), grid.nx),
            pick(capsule_xy.y() - grid.origin.y(), grid.ny)};
}

ActiveSubArray activate(Cell center, const SensorGrid& grid) {
    const auto [cx, cy] = center;
    if (cx < 1 || cx > grid.nx - 2 || cy < 1 || cy > grid.ny - 2) {
        throw ValidationError("sub-array center out of range");
    }
    ActiveSubArray a;
    a.cx = cx;
    a.cy = cy;
    for (int di = -1; di <= 1; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
            if (di == 0 && dj == 0) continue;
            a.indices.emplace_back(cx + di, cy + dj);
            a.positions.push_back(grid.sensor_position(cx + di, cy + dj));
        }
    }
    return a;
}

std::vector<FieldSample> measure_at(std::span<const Vec3> positions,
                                    std::span<const DipoleSource> sources, double noise_sigma,
                                    Rng& rng) {
    std::vector<FieldSample> out;
    out.reserve(positions.size());
    for (const auto& p : positions) {
        Vec3 b = magnetics::superposed_field(sources, p);
        if (noise_sigma > 0.0) {
            b += Vec3(gaussian(rng, 0.0, noise_sigma), gaussian(rng, 0.0, noise_sigma),
                      gaussian(rng, 0.0, noise_sigma));
        }
        out.push_back({p, b});
    }
    return out;
}

std::vector<FieldSample> measure(const ActiveSubArray& active,
                                 std::span<const DipoleSource> sources, double noise_sigma,
                                 Rng& rng) {
    return measure_at(active.positions, sources, noise_sigma, rng);
}

std::vector<FinalistLayout> finalist_layouts() {
    // Frozen from a 36-layout accuracy study (4000 trials/layout at two
    // seeds); labels follow the ranking structure, c best through b worst.
    // Layout c is the full 3x3 block at double pitch: the runtime window
    // geometry with its center cell filled.
    static const std::map<char, std::string> kIds = {
        {'a', "g5-o2o3"}, {'b', "g4-o1o2"},  {'c', "g5-o0o2c"},
        {'d', "g5-o2o3c"}, {'e', "g5-o2o4"}, {'f', "g5-o3o4"},
    };
    const auto all = enumerate_layouts();
    std::vector<FinalistLayout> out;
    for (const auto& [label, id] : kIds) {
        for (const auto& l : all) {
            if (l.id == id) {
                out.push_back({label, l});
                break;
            }
        }
    }
    if (out.size() != kIds.size()) throw std::logic_error("finalist layout id missing");
    return out;
}

}  // namespace smal::sensors
