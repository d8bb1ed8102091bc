#pragma once

// Exhaustive neighbour-scan count of critical cells, independent of the
// gradient construction.

#include <array>

#include "critcon/grid.hpp"

namespace oracle {

/// Per interior vertex: (min, saddle, max) from the lower link in the ring of
/// 8 neighbours. Edge neighbours are points of the link, fully lower squares
/// are arcs joining them.
inline std::array<int, 3> critical_at(const critcon::ScalarGrid& f, int c, int r) {
    auto lower = [&](int dc, int dr) {
        const double a = f(c + dc, r + dr), b = f(c, r);
        return a < b || (a == b && f.index(c + dc, r + dr) < f.index(c, r));
    };
    static const int ring[8][2] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}};
    bool low[8];
    for (int i = 0; i < 8; ++i) low[i] = lower(ring[i][0], ring[i][1]);
    int points = 0, arcs = 0;
    for (int i = 0; i < 8; i += 2) {
        points += low[i];
        arcs += low[i] && low[i + 1] && low[(i + 2) % 8];
    }
    if (points == 0) return {1, 0, 0};
    if (arcs == 4) return {0, 0, 1};
    return {0, points - arcs - 1, 0};
}

/// Totals over every vertex at least `margin` pixels from the border.
inline std::array<int, 3> interior_counts(const critcon::ScalarGrid& f, int margin = 1) {
    std::array<int, 3> total{};
    for (int r = margin; r < f.height() - margin; ++r)
        for (int c = margin; c < f.width() - margin; ++c) {
            const auto k = critical_at(f, c, r);
            for (int i = 0; i < 3; ++i) total[static_cast<std::size_t>(i)] += k[static_cast<std::size_t>(i)];
        }
    return total;
}

}  // namespace oracle
