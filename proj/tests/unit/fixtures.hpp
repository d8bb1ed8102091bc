#pragma once

// Surfaces and lattices shared by several test binaries.

#include <cmath>
#include <cstdint>
#include <random>

#include "critcon/grid.hpp"
#include "critcon/surface.hpp"

namespace fixtures {

using critcon::Domain;
using critcon::GridSpec;
using critcon::Vec2;
using critcon::Vec3;

/// 256 x 256 pixel lattice with one world unit per pixel.
inline GridSpec pixel_grid(int n = 256) { return GridSpec::square(n, 0.0, n - 1.0); }
inline Domain pixel_domain(int n = 256) { return {0.0, n - 1.0, 0.0, n - 1.0}; }

inline critcon::AnalyticSurface bump(int n = 256, double tilt = critcon::kDefaultTilt) {
    return critcon::make_sigmoidal_bump({0.5 * (n - 1) + 3.3, 0.5 * (n - 1) - 2.1}, 0.2 * n, 0.12 * n, tilt,
                                        pixel_domain(n));
}

inline critcon::AnalyticSurface blob7(int n = 256) { return critcon::make_blob(7, 5, pixel_domain(n)); }

/// Samples fn(x, y) at the world position of every pixel.
template <class F>
critcon::ScalarGrid image_from(const GridSpec& g, F&& fn) {
    critcon::ScalarGrid out(g);
    for (int r = 0; r < g.height; ++r)
        for (int c = 0; c < g.width; ++c) {
            const Vec2 w = g.world(c, r);
            out(c, r) = fn(w.x(), w.y());
        }
    return out;
}

/// Deterministic uniform sampler for tests.
struct Sampler {
    std::mt19937_64 rng;
    explicit Sampler(std::uint64_t seed) : rng(seed) {}
    double uniform(double lo, double hi) { return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53); }
    Vec3 light_within(double max_polar_rad) {
        const double polar = uniform(0.0, max_polar_rad);
        const double az = uniform(0.0, 2 * M_PI);
        return {std::sin(polar) * std::cos(az), std::sin(polar) * std::sin(az), std::cos(polar)};
    }
};

}  // namespace fixtures
