#include <doctest.h>

#include <set>

#include "smal/sensor_array.hpp"

using namespace smal;
using namespace smal::sensors;

namespace {

// Brute-force orbit partition oracle: repeatedly rotate every cell and group.
int oracle_orbit_count(int g) {
    std::set<std::set<Cell>> orbits;
    for (int i = 0; i < g; ++i) {
        for (int j = 0; j < g; ++j) {
            std::set<Cell> orbit;
            Cell c{i, j};
            for (int k = 0; k < 4; ++k) {
                orbit.insert(c);
                c = {c.second, g - 1 - c.first};
            }
            if (orbit.size() > 1) orbits.insert(orbit);
        }
    }
    return static_cast<int>(orbits.size());
}

}  // namespace

TEST_CASE("rotation orbits match the brute-force partition") {
    CHECK(rotation_orbits(4).size() == 4);
    CHECK(rotation_orbits(5).size() == 6);
    CHECK(oracle_orbit_count(4) == 4);
    CHECK(oracle_orbit_count(5) == 6);
    for (const auto& orbit : rotation_orbits(5)) CHECK(orbit.size() == 4);
}

TEST_CASE("layout enumeration: 36 candidates, 21 with 8 sensors, 15 with 9") {
    const auto layouts = enumerate_layouts();
    CHECK(layouts.size() == 36);

    int n8 = 0, n9 = 0, g4 = 0;
    std::set<std::set<Cell>> unique_sets;
    for (const auto& l : layouts) {
        if (l.sensor_count == 8) ++n8;
        if (l.sensor_count == 9) ++n9;
        if (l.grid_kind == GridKind::FourByFour) ++g4;
        CHECK(has_fourfold_symmetry(l));
        CHECK(static_cast<int>(l.offsets.size()) == l.sensor_count);
        unique_sets.insert(std::set<Cell>(l.offsets.begin(), l.offsets.end()));
        if (l.sensor_count == 9) {
            CHECK(l.grid_kind == GridKind::FiveByFive);
            CHECK(std::count(l.offsets.begin(), l.offsets.end(), Cell{2, 2}) == 1);
        }
    }
    CHECK(n8 == 21);
    CHECK(n9 == 15);
    CHECK(g4 == 6);
    CHECK(unique_sets.size() == 36);  // no duplicates
}

TEST_CASE("finalists are six distinct enumerated layouts with c the runtime geometry") {
    const auto fins = finalist_layouts();
    CHECK(fins.size() == 6);
    std::set<char> labels;
    for (const auto& f : fins) {
        labels.insert(f.label);
        CHECK(has_fourfold_symmetry(f.layout));
    }
    CHECK(labels == std::set<char>{'a', 'b', 'c', 'd', 'e', 'f'});
}

TEST_CASE("sub-array center selection follows round-then-clamp") {
    SensorGrid grid;
    grid.nx = 8;
    grid.ny = 10;
    grid.spacing = 0.06;

    CHECK(select_subarray_center({0.18, 0.18}, grid) == Cell{3, 3});
    CHECK(select_subarray_center({-0.5, 0.0}, grid) == Cell{1, 1});
    CHECK(select_subarray_center({0.43, 0.55}, grid) == Cell{6, 8});
}

TEST_CASE("activation builds the 3x3-minus-center window") {
    SensorGrid grid;
    grid.nx = 8;
    grid.ny = 10;
    grid.spacing = 0.06;
    grid.origin = Vec3(0.5, -0.2, 0.0);

    const auto a = activate({1, 1}, grid);
    const std::set<Cell> got(a.indices.begin(), a.indices.end());
    const std::set<Cell> want{{0, 0}, {0, 1}, {0, 2}, {1, 0}, {1, 2}, {2, 0}, {2, 1}, {2, 2}};
    CHECK(got == want);

    const auto b = activate({6, 8}, grid);
    for (const auto& [i, j] : b.indices) {
        CHECK(i >= 0);
        CHECK(i <= 7);
        CHECK(j >= 0);
        CHECK(j <= 9);
    }
    for (std::size_t k = 0; k < b.indices.size(); ++k) {
        const auto [i, j] = b.indices[k];
        CHECK((b.positions[k] - (grid.origin + Vec3(i * 0.06, j * 0.06, 0))).norm() < 1e-15);
    }

    CHECK_THROWS_AS(activate({0, 5}, grid), ValidationError);
    CHECK_THROWS_AS(activate({7, 5}, grid), ValidationError);
}

TEST_CASE("selected window stays on the grid and near the capsule") {
    SensorGrid grid;
    grid.nx = 8;
    grid.ny = 10;
    grid.spacing = 0.06;
    Rng rng = make_stream(3);
    for (int t = 0; t < 500; ++t) {
        const Vec2 xy(uniform(rng, -0.5, 1.0), uniform(rng, -0.5, 1.0));
        const auto c = select_subarray_center(xy, grid);
        CHECK(c.first >= 1);
        CHECK(c.first <= grid.nx - 2);
        CHECK(c.second >= 1);
        CHECK(c.second <= grid.ny - 2);
        const auto active = activate(c, grid);  // never throws on clamped centers
        // interior positions: the window centroid tracks the capsule within D/2
        const long ri = std::lround(xy.x() / grid.spacing);
        const long rj = std::lround(xy.y() / grid.spacing);
        if (ri >= 1 && ri <= grid.nx - 2 && rj >= 1 && rj <= grid.ny - 2) {
            Vec3 centroid = Vec3::Zero();
            for (const auto& p : active.positions) centroid += p;
            centroid /= static_cast<double>(active.positions.size());
            CHECK(std::abs(centroid.x() - xy.x()) <= grid.spacing / 2 + 1e-12);
            CHECK(std::abs(centroid.y() - xy.y()) <= grid.spacing / 2 + 1e-12);
        }
    }
}

TEST_CASE("measurement noise model") {
    SensorGrid grid;
    const auto active = activate({3, 3}, grid);
    const magnetics::DipoleSource src[] = {
        magnetics::make_dipole(Vec3(0.18, 0.18, 0.08), Vec3::UnitX(), 1.0)};

    Rng rng0 = make_stream(42);
    const auto noiseless = measure(active, src, 0.0, rng0);
    for (std::size_t i = 0; i < noiseless.size(); ++i) {
        CHECK((noiseless[i].field - magnetics::dipole_field(src[0], active.positions[i])).norm() ==
              0.0);
    }

    Rng a = make_stream(42), b = make_stream(42);
    const auto m1 = measure(active, src, 1e-6, a);
    const auto m2 = measure(active, src, 1e-6, b);
    for (std::size_t i = 0; i < m1.size(); ++i) {
        CHECK(m1[i].field == m2[i].field);  // bitwise determinism per seed
    }

    // law of large numbers at one sensor
    const double sigma = 2e-6;
    const int n = 100000;
    Vec3 acc = Vec3::Zero();
    Rng rng = make_stream(7);
    const Vec3 pos = active.positions[0];
    for (int i = 0; i < n; ++i) {
        acc += measure_at(std::span<const Vec3>(&pos, 1), src, sigma, rng)[0].field;
    }
    const Vec3 mean = acc / n;
    const Vec3 truth = magnetics::dipole_field(src[0], pos);
    const double bound = 4.0 * sigma / std::sqrt(double(n));
    for (int k = 0; k < 3; ++k) CHECK(std::abs(mean(k) - truth(k)) < bound);
}

TEST_CASE("layout JSON export lists every candidate") {
    const auto layouts = enumerate_layouts();
    const std::string text = layouts_to_json(layouts);
    std::size_t count = 0, at = 0;
    while ((at = text.find("\"id\"", at)) != std::string::npos) {
        ++count;
        ++at;
    }
    CHECK(count == 36);
}

TEST_CASE("layout positions are centered and pitch-scaled") {
    const auto layouts = enumerate_layouts();
    const auto& l = layouts.front();
    const auto pos = layout_positions(l, 0.03, Vec3(0.1, 0.2, 0.0));
    REQUIRE(pos.size() == l.offsets.size());
    Vec3 centroid = Vec3::Zero();
    for (const auto& p : pos) centroid += p;
    centroid /= static_cast<double>(pos.size());
    CHECK((centroid - Vec3(0.1, 0.2, 0.0)).norm() < 1e-12);  // symmetric layouts center exactly
}
