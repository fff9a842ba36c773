#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "smal/vec.hpp"

namespace smal {

using Rng = std::mt19937_64;

/// splitmix64 step; used to derive independent stream seeds from one master
/// seed plus stream indices.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Deterministic per-trial stream: seed mixed with up to two indices.
inline Rng make_stream(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t s = splitmix64(seed);
    s = splitmix64(s ^ (0x9e3779b97f4a7c15ULL + a));
    s = splitmix64(s ^ (0xc2b2ae3d27d4eb4fULL + b));
    return Rng(s);
}

/// Stable 64-bit id hash (FNV-1a); lets stream keys follow names instead of
/// positional indices.
inline std::uint64_t stream_key(std::string_view name) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : name) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline double uniform(Rng& rng, double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    return d(rng);
}

inline double gaussian(Rng& rng, double mean, double sigma) {
    std::normal_distribution<double> d(mean, sigma);
    return d(rng);
}

/// Uniform direction on the unit sphere.
inline Vec3 random_unit_vector(Rng& rng) {
    const double z = uniform(rng, -1.0, 1.0);
    const double phi = uniform(rng, 0.0, 2.0 * kPi);
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {s * std::cos(phi), s * std::sin(phi), z};
}

/// Rotates dir by `angle` about a random axis perpendicular to it.
inline Vec3 perturb_direction(const Vec3& dir, double angle, Rng& rng) {
    Vec3 ref = random_unit_vector(rng);
    while (std::abs(ref.dot(dir)) > 0.99) ref = random_unit_vector(rng);
    const Vec3 axis = unit(dir.cross(ref));
    return rotate_about(axis, angle, dir);
}

}  // namespace smal
