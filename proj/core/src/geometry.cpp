#include "critcon/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace critcon {

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 d = b - a;
    const double len2 = d.squaredNorm();
    if (len2 == 0.0) return (p - a).norm();
    const double t = std::clamp((p - a).dot(d) / len2, 0.0, 1.0);
    return (p - (a + t * d)).norm();
}

double distance_to_polyline(const Vec2& p, const std::vector<Vec2>& poly, bool closed) {
    if (poly.empty()) return std::numeric_limits<double>::infinity();
    if (poly.size() == 1) return (p - poly[0]).norm();
    double best = std::numeric_limits<double>::infinity();
    const std::size_t n = poly.size(), segs = closed ? n : n - 1;
    for (std::size_t i = 0; i < segs; ++i) best = std::min(best, point_segment_distance(p, poly[i], poly[(i + 1) % n]));
    return best;
}

double polyline_length(const std::vector<Vec2>& poly, bool closed) {
    if (poly.size() < 2) return 0.0;
    double len = 0.0;
    for (std::size_t i = 1; i < poly.size(); ++i) len += (poly[i] - poly[i - 1]).norm();
    if (closed) len += (poly.front() - poly.back()).norm();
    return len;
}

std::vector<Vec2> densify(const std::vector<Vec2>& poly, bool closed, double step) {
    if (poly.size() < 2) return poly;
    std::vector<Vec2> out;
    const std::size_t n = poly.size(), segs = closed ? n : n - 1;
    for (std::size_t i = 0; i < segs; ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % n];
        const int k = std::max(1, static_cast<int>(std::ceil((b - a).norm() / step)));
        for (int j = 0; j < k; ++j) out.push_back(a + (b - a) * (static_cast<double>(j) / k));
    }
    if (!closed) out.push_back(poly.back());
    return out;
}

namespace {

double distance_to_any(const Vec2& p, const std::vector<std::vector<Vec2>>& b, const std::vector<bool>& closed) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < b.size(); ++i) best = std::min(best, distance_to_polyline(p, b[i], closed[i]));
    return best;
}

}  // namespace

CurveDistance curve_distance(const std::vector<Vec2>& a, bool a_closed, const std::vector<std::vector<Vec2>>& b,
                             const std::vector<bool>& b_closed, double tol, double step) {
    CurveDistance out;
    if (a.empty() || b.empty()) {
        out.hausdorff = out.mean_a_to_b = std::numeric_limits<double>::infinity();
        return out;
    }
    const auto sa = densify(a, a_closed, step);
    // each sample stands for the arclength around it
    double covered = 0.0, total = 0.0, sum = 0.0;
    for (std::size_t i = 0; i < sa.size(); ++i) {
        const double d = distance_to_any(sa[i], b, b_closed);
        double w = 0.0;
        if (i + 1 < sa.size()) w += 0.5 * (sa[i + 1] - sa[i]).norm();
        else if (a_closed) w += 0.5 * (sa.front() - sa[i]).norm();
        if (i > 0) w += 0.5 * (sa[i] - sa[i - 1]).norm();
        else if (a_closed) w += 0.5 * (sa[i] - sa.back()).norm();
        total += w;
        sum += w * d;
        if (d <= tol) covered += w;
        out.hausdorff = std::max(out.hausdorff, d);
    }
    out.mean_a_to_b = total > 0 ? sum / total : out.hausdorff;
    out.coverage_a = total > 0 ? covered / total : (out.hausdorff <= tol ? 1.0 : 0.0);
    for (std::size_t i = 0; i < b.size(); ++i)
        for (const Vec2& p : densify(b[i], b_closed[i], step))
            out.hausdorff = std::max(out.hausdorff, distance_to_polyline(p, a, a_closed));
    return out;
}

CurveDistance curve_distance(const std::vector<Vec2>& a, bool a_closed, const std::vector<Vec2>& b, bool b_closed,
                             double tol, double step) {
    return curve_distance(a, a_closed, std::vector<std::vector<Vec2>>{b}, std::vector<bool>{b_closed}, tol, step);
}

}  // namespace critcon
