#pragma once

#include <vector>

#include "critcon/grid.hpp"

namespace critcon {

[[nodiscard]] double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);
[[nodiscard]] double distance_to_polyline(const Vec2& p, const std::vector<Vec2>& poly, bool closed);
[[nodiscard]] double polyline_length(const std::vector<Vec2>& poly, bool closed);

/// Points spaced at most `step` apart along the polyline, including every
/// original vertex.
[[nodiscard]] std::vector<Vec2> densify(const std::vector<Vec2>& poly, bool closed, double step);

struct CurveDistance {
    /// Symmetric Hausdorff distance.
    double hausdorff = 0.0;
    /// Mean distance from samples of `a` to `b`.
    double mean_a_to_b = 0.0;
    /// Fraction of the arclength of `a` lying within `tol` of `b`.
    double coverage_a = 0.0;
};

/// Distances between two polylines, sampled every `step` units.
[[nodiscard]] CurveDistance curve_distance(const std::vector<Vec2>& a, bool a_closed, const std::vector<Vec2>& b,
                                           bool b_closed, double tol, double step = 0.25);

/// Same, against the union of several curves for `b`.
[[nodiscard]] CurveDistance curve_distance(const std::vector<Vec2>& a, bool a_closed,
                                           const std::vector<std::vector<Vec2>>& b, const std::vector<bool>& b_closed,
                                           double tol, double step = 0.25);

}  // namespace critcon
