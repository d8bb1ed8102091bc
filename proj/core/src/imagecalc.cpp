#include "critcon/imagecalc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "critcon/parallel.hpp"
#include "critcon/render.hpp"

namespace critcon {

namespace {

// First derivative along a line of n samples at index i, spacing h.
template <class F>
double d1(F&& f, int i, int n, double h) {
    // one-sided stencils written as differences so constants give exact zeros
    if (i == 0) return (4 * (f(1) - f(0)) - (f(2) - f(0))) / (2 * h);
    if (i == n - 1) return -(4 * (f(n - 2) - f(n - 1)) - (f(n - 3) - f(n - 1))) / (2 * h);
    return (f(i + 1) - f(i - 1)) / (2 * h);
}

template <class F>
double d2(F&& f, int i, int n, double h) {
    if (i == 0) return (-5 * (f(1) - f(0)) + 4 * (f(2) - f(0)) - (f(3) - f(0))) / (h * h);
    if (i == n - 1)
        return (-5 * (f(n - 2) - f(n - 1)) + 4 * (f(n - 3) - f(n - 1)) - (f(n - 4) - f(n - 1))) / (h * h);
    return (f(i + 1) - 2 * f(i) + f(i - 1)) / (h * h);
}

const double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

VectorGrid gradient(const ScalarGrid& img) {
    img.validate();
    const int W = img.width(), H = img.height();
    const double h = img.spacing();
    VectorGrid g{ScalarGrid(img.spec()), ScalarGrid(img.spec())};
    parallel_for(H, [&](int r) {
        for (int c = 0; c < W; ++c) {
            g.x(c, r) = d1([&](int k) { return img(k, r); }, c, W, h);
            g.y(c, r) = d1([&](int k) { return img(c, k); }, r, H, h);
        }
    });
    return g;
}

HessianGrid hessian(const ScalarGrid& img) {
    img.validate();
    const int W = img.width(), H = img.height();
    const double h = img.spacing();
    HessianGrid out{ScalarGrid(img.spec()), ScalarGrid(img.spec()), ScalarGrid(img.spec())};
    parallel_for(H, [&](int r) {
        for (int c = 0; c < W; ++c) {
            out.xx(c, r) = d2([&](int k) { return img(k, r); }, c, W, h);
            out.yy(c, r) = d2([&](int k) { return img(c, k); }, r, H, h);
            out.xy(c, r) = d1(
                [&](int rr) { return d1([&](int k) { return img(k, rr); }, c, W, h); }, r, H, h);
        }
    });
    return out;
}

ScalarGrid laplacian(const ScalarGrid& img) {
    const auto h = hessian(img);
    ScalarGrid out(img.spec());
    for (std::size_t i = 0; i < out.values().size(); ++i) out.values()[i] = h.xx.values()[i] + h.yy.values()[i];
    return out;
}

double default_grad_epsilon(const ScalarGrid& img) { return 1e-3 * img.range(); }

std::size_t FlowFrame::valid_count() const {
    return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{1}));
}

FlowFrame shading_flow(const ScalarGrid& img, double epsilon, double sigma_pre) {
    if (!(epsilon >= 0)) throw ParameterError("shading_flow: epsilon must be non-negative");
    const ScalarGrid src = sigma_pre > 0 ? gaussian_blur(img, sigma_pre) : img;
    const VectorGrid g = gradient(src);
    const GridSpec& s = img.spec();
    FlowFrame f{s,
                {ScalarGrid(s), ScalarGrid(s)},
                {ScalarGrid(s), ScalarGrid(s)},
                ScalarGrid(s),
                std::vector<std::uint8_t>(s.size(), 0),
                epsilon};
    parallel_for(s.height, [&](int r) {
        for (int c = 0; c < s.width; ++c) {
            const Vec2 d = g.at(c, r);
            const double m = d.norm();
            f.magnitude(c, r) = m;
            if (m < epsilon || m == 0) continue;
            const Vec2 u = d / m;
            f.u.x(c, r) = u.x();
            f.u.y(c, r) = u.y();
            f.v.x(c, r) = -u.y();
            f.v.y(c, r) = u.x();
            f.valid[s.width * static_cast<std::size_t>(r) + c] = 1;
        }
    });
    return f;
}

FlowFrame shading_flow(const ScalarGrid& img) { return shading_flow(img, default_grad_epsilon(img)); }

FrameDerivatives frame_second_derivatives(const HessianGrid& h, const FlowFrame& frame) {
    const GridSpec& s = frame.spec;
    if (!h.xx.spec().same_lattice(s)) throw ParameterError("frame_second_derivatives: lattice mismatch");
    FrameDerivatives out{ScalarGrid(s, kNaN), ScalarGrid(s, kNaN), ScalarGrid(s, kNaN), frame.valid};
    parallel_for(s.height, [&](int r) {
        for (int c = 0; c < s.width; ++c) {
            if (!frame.is_valid(c, r)) continue;
            const Mat2 m = h.at(c, r);
            const Vec2 u = frame.u.at(c, r), v = frame.v.at(c, r);
            out.uu(c, r) = u.dot(m * u);
            out.uv(c, r) = u.dot(m * v);
            out.vv(c, r) = v.dot(m * v);
        }
    });
    return out;
}

FrameDerivatives frame_second_derivatives(const ScalarGrid& img, const FlowFrame& frame) {
    return frame_second_derivatives(hessian(img), frame);
}

CurveFrameDerivs curve_frame_derivatives(const Mat2& h, const Vec2& tangent) {
    const double n = tangent.norm();
    if (!(n > 0)) throw DomainError("curve_frame_derivatives: zero tangent");
    const Vec2 u = tangent / n;
    const Vec2 w(-u.y(), u.x());
    return {u.dot(h * u), u.dot(h * w), w.dot(h * w)};
}

CurveFrameDerivs curve_frame_derivatives(const HessianGrid& h, const Vec2& px, const Vec2& tangent) {
    return curve_frame_derivatives(h.sample(px.x(), px.y()), tangent);
}

CurvatureField isophote_curvature(const ScalarGrid& img, double epsilon) {
    const FlowFrame f = shading_flow(img, epsilon);
    const FrameDerivatives d = frame_second_derivatives(img, f);
    const GridSpec& s = img.spec();
    CurvatureField out{{ScalarGrid(s), ScalarGrid(s)}, f.valid};
    for (int r = 0; r < s.height; ++r)
        for (int c = 0; c < s.width; ++c) {
            if (!f.is_valid(c, r)) continue;
            const double k = -d.vv(c, r) / f.magnitude(c, r);
            out.kappa.x(c, r) = k * f.u.x(c, r);
            out.kappa.y(c, r) = k * f.u.y(c, r);
        }
    return out;
}

CurvatureField isophote_curvature(const ScalarGrid& img) {
    return isophote_curvature(img, default_grad_epsilon(img));
}

double Polyline::length() const {
    double len = 0;
    for (std::size_t i = 1; i < points.size(); ++i) len += (points[i] - points[i - 1]).norm();
    if (closed && points.size() > 2) len += (points.front() - points.back()).norm();
    return len;
}

std::vector<Polyline> level_set(const ScalarGrid& img, double level) {
    const int W = img.width(), H = img.height();
    // edge ids: 2 * pixel + 0 for the edge to the right, + 1 for the edge below
    auto hid = [W](int c, int r) { return 2 * (static_cast<long>(r) * W + c); };
    auto vid = [W](int c, int r) { return 2 * (static_cast<long>(r) * W + c) + 1; };
    std::unordered_map<long, Vec2> point;
    std::unordered_map<long, std::array<long, 2>> adj;
    auto cross = [&](long id, Vec2 a, double fa, Vec2 b, double fb) {
        if (!point.contains(id)) point[id] = a + (level - fa) / (fb - fa) * (b - a);
    };
    auto link = [&](long a, long b) {
        for (auto [x, y] : {std::pair{a, b}, std::pair{b, a}}) {
            auto it = adj.try_emplace(x, std::array<long, 2>{-1, -1}).first;
            (it->second[0] < 0 ? it->second[0] : it->second[1]) = y;
        }
    };
    for (int r = 0; r + 1 < H; ++r)
        for (int c = 0; c + 1 < W; ++c) {
            const std::array<Vec2, 4> p{Vec2(c, r), Vec2(c + 1, r), Vec2(c + 1, r + 1), Vec2(c, r + 1)};
            const std::array<double, 4> f{img(c, r), img(c + 1, r), img(c + 1, r + 1), img(c, r + 1)};
            const std::array<long, 4> e{hid(c, r), vid(c + 1, r), hid(c, r + 1), vid(c, r)};
            const std::array<std::pair<int, int>, 4> ends{std::pair{0, 1}, {1, 2}, {3, 2}, {0, 3}};
            std::array<bool, 4> hit{};
            int n = 0;
            for (int k = 0; k < 4; ++k) {
                const auto [i, j] = ends[static_cast<std::size_t>(k)];
                if ((f[i] > level) != (f[j] > level)) {
                    hit[k] = true;
                    ++n;
                    cross(e[k], p[i], f[i], p[j], f[j]);
                }
            }
            if (n == 2) {
                int a = -1, b = -1;
                for (int k = 0; k < 4; ++k)
                    if (hit[k]) (a < 0 ? a : b) = k;
                link(e[a], e[b]);
            } else if (n == 4) {
                const double centre = 0.25 * (f[0] + f[1] + f[2] + f[3]);
                if ((centre > level) == (f[0] > level)) {
                    link(e[0], e[1]);
                    link(e[2], e[3]);
                } else {
                    link(e[3], e[0]);
                    link(e[1], e[2]);
                }
            }
        }

    std::vector<long> ids;
    ids.reserve(adj.size());
    for (const auto& [id, _] : adj) ids.push_back(id);
    std::sort(ids.begin(), ids.end());
    std::unordered_map<long, bool> seen;
    std::vector<Polyline> out;
    auto walk = [&](long start, bool closed) {
        Polyline pl;
        pl.closed = closed;
        long prev = -1, cur = start;
        while (cur >= 0 && !seen[cur]) {
            seen[cur] = true;
            pl.points.push_back(point[cur]);
            const auto& nb = adj[cur];
            const long next = nb[0] != prev ? nb[0] : nb[1];
            prev = cur;
            cur = next;
        }
        out.push_back(std::move(pl));
    };
    for (long id : ids)
        if (!seen[id] && adj[id][1] < 0) walk(id, false);
    for (long id : ids)
        if (!seen[id]) walk(id, true);
    return out;
}

}  // namespace critcon
