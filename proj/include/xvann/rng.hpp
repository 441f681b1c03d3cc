#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace xvann {

// Counter-based normal generator: every draw is a pure function of
// (seed, stream, step, path), so runs are reproducible regardless of the path
// count or the order in which paths are visited.

constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                                     std::uint64_t c, std::uint64_t d) {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ a);
    h = mix64(h ^ (b + 0x632be59bd9b4e019ULL));
    h = mix64(h ^ (c + 0x8cb92ba72f3d8dd7ULL));
    return mix64(h ^ d);
}

// Uniform on the open interval (0,1).
inline double counter_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                              std::uint64_t c, std::uint64_t d) {
    return (static_cast<double>(counter_hash(seed, a, b, c, d) >> 11) + 0.5) * 0x1.0p-53;
}

inline double counter_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t step,
                             std::uint64_t path) {
    const double u1 = counter_uniform(seed, stream, step, path, 0);
    const double u2 = counter_uniform(seed, stream, step, path, 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace xvann
