#include "critcon/critcontours.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "critcon/geometry.hpp"
#include "critcon/imagecalc.hpp"
#include "critcon/parallel.hpp"

namespace critcon {

namespace {

double nearest_rank(std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size())));
    return v[std::min(v.size() - 1, k == 0 ? 0 : k - 1)];
}

// Ridge (or valley) graph: extrema joined by saddles whose two arcs of one
// kind both end at real extrema. Closed contours are cycles of this graph.
struct RidgeEdge {
    int a = 0, b = 0;          // extremum node ids
    int arc_a = 0, arc_b = 0;  // saddle -> a, saddle -> b
};

struct Step {
    int edge = 0;
    bool forward = true;  // a -> b
};

std::vector<std::vector<Step>> ridge_cycles(const std::vector<RidgeEdge>& edges, std::size_t nnodes) {
    std::vector<std::vector<int>> inc(nnodes);
    for (std::size_t i = 0; i < edges.size(); ++i) {
        inc[static_cast<std::size_t>(edges[i].a)].push_back(static_cast<int>(i));
        inc[static_cast<std::size_t>(edges[i].b)].push_back(static_cast<int>(i));  // self-loops count twice
    }
    // 2-core
    std::vector<int> deg(nnodes);
    for (std::size_t v = 0; v < nnodes; ++v) deg[v] = static_cast<int>(inc[v].size());
    std::vector<char> edge_alive(edges.size(), 1), node_alive(nnodes, 1);
    std::vector<int> stack;
    for (std::size_t v = 0; v < nnodes; ++v)
        if (deg[v] < 2) stack.push_back(static_cast<int>(v));
    while (!stack.empty()) {
        const auto v = static_cast<std::size_t>(stack.back());
        stack.pop_back();
        if (!node_alive[v]) continue;
        node_alive[v] = 0;
        for (int e : inc[v]) {
            if (!edge_alive[static_cast<std::size_t>(e)]) continue;
            edge_alive[static_cast<std::size_t>(e)] = 0;
            const auto& E = edges[static_cast<std::size_t>(e)];
            const auto o = static_cast<std::size_t>(E.a == static_cast<int>(v) ? E.b : E.a);
            if (node_alive[o] && --deg[o] < 2) stack.push_back(static_cast<int>(o));
        }
    }

    // fundamental cycles of a BFS forest; a component that is a plain ring
    // yields exactly that ring
    std::vector<std::vector<Step>> cycles;
    std::vector<int> parent_edge(nnodes, -1), depth(nnodes, -1);
    std::vector<char> tree(edges.size(), 0);
    for (std::size_t root = 0; root < nnodes; ++root) {
        if (!node_alive[root] || depth[root] >= 0) continue;
        std::vector<int> queue{static_cast<int>(root)};
        depth[root] = 0;
        for (std::size_t q = 0; q < queue.size(); ++q) {
            const auto v = static_cast<std::size_t>(queue[q]);
            for (int e : inc[v]) {
                if (!edge_alive[static_cast<std::size_t>(e)]) continue;
                const auto& E = edges[static_cast<std::size_t>(e)];
                const auto o = static_cast<std::size_t>(E.a == static_cast<int>(v) ? E.b : E.a);
                if (depth[o] >= 0) continue;
                depth[o] = depth[v] + 1;
                parent_edge[o] = e;
                tree[static_cast<std::size_t>(e)] = 1;
                queue.push_back(static_cast<int>(o));
            }
        }
    }
    auto up = [&](int v, std::vector<Step>& path) {  // one tree step towards the root, recorded as v -> parent
        const int e = parent_edge[static_cast<std::size_t>(v)];
        const auto& E = edges[static_cast<std::size_t>(e)];
        path.push_back({e, E.a == v});
        return E.a == v ? E.b : E.a;
    };
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (!edge_alive[i] || tree[i]) continue;
        const auto& E = edges[i];
        // E: a -> b, then climb b to the common ancestor, then descend to a
        std::vector<Step> from_b, from_a;
        int x = E.b, y = E.a;
        while (x != y) {
            if (depth[static_cast<std::size_t>(x)] >= depth[static_cast<std::size_t>(y)]) x = up(x, from_b);
            else y = up(y, from_a);
        }
        std::vector<Step> cyc{{static_cast<int>(i), true}};
        cyc.insert(cyc.end(), from_b.begin(), from_b.end());
        for (auto it = from_a.rbegin(); it != from_a.rend(); ++it) cyc.push_back({it->edge, !it->forward});
        cycles.push_back(std::move(cyc));
    }
    return cycles;
}

// Maximal paths of the edges not on any cycle, broken where more or fewer
// than two such edges meet.
std::vector<std::vector<Step>> ridge_chains(const std::vector<RidgeEdge>& edges, std::size_t nnodes,
                                            std::vector<char> taken) {
    std::vector<std::vector<int>> inc(nnodes);
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (taken[i]) continue;
        inc[static_cast<std::size_t>(edges[i].a)].push_back(static_cast<int>(i));
        inc[static_cast<std::size_t>(edges[i].b)].push_back(static_cast<int>(i));
    }
    std::vector<std::vector<Step>> chains;
    for (std::size_t v = 0; v < nnodes; ++v) {
        if (inc[v].size() == 2) continue;
        for (int e0 : inc[v]) {
            if (taken[static_cast<std::size_t>(e0)]) continue;
            std::vector<Step> chain;
            int e = e0, at = static_cast<int>(v);
            for (;;) {
                taken[static_cast<std::size_t>(e)] = 1;
                const auto& E = edges[static_cast<std::size_t>(e)];
                chain.push_back({e, E.a == at});
                at = E.a == at ? E.b : E.a;
                const auto& next = inc[static_cast<std::size_t>(at)];
                if (next.size() != 2) break;
                e = next[0] == e ? next[1] : next[0];
                if (taken[static_cast<std::size_t>(e)]) break;
            }
            chains.push_back(std::move(chain));
        }
    }
    return chains;
}

void append(std::vector<Vec2>& out, const std::vector<Vec2>& pts, bool reversed) {
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& p = pts[reversed ? n - 1 - i : i];
        if (out.empty() || out.back() != p) out.push_back(p);
    }
}

void evaluate(CriticalContour& k, const VectorGrid& grad, const HessianGrid& hess, const ContourOptions& opt) {
    const auto& p = k.polyline;
    const auto n = static_cast<int>(p.size());
    k.u.resize(p.size());
    k.w.resize(p.size());
    k.i_ww.resize(p.size());
    k.i_uw.resize(p.size());
    k.grad_norm.resize(p.size());
    const int h = std::max(1, opt.tangent_halfwidth);
    auto at = [&](int i) -> const Vec2& {
        if (k.closed) return p[static_cast<std::size_t>(((i % n) + n) % n)];
        return p[static_cast<std::size_t>(std::clamp(i, 0, n - 1))];
    };
    for (int i = 0; i < n; ++i) {
        Vec2 d = at(i + h) - at(i - h);
        for (int g = h - 1; d.squaredNorm() == 0.0 && g >= 1; --g) d = at(i + g) - at(i - g);
        const Vec2 u = d.squaredNorm() > 0 ? d.normalized() : Vec2(1, 0);
        Vec2 w(-u.y(), u.x());
        if (opt.flip_w) w = -w;
        const auto s = static_cast<std::size_t>(i);
        const Mat2 H = hess.sample(p[s].x(), p[s].y());
        k.u[s] = u;
        k.w[s] = w;
        k.i_ww[s] = w.dot(H * w);
        k.i_uw[s] = u.dot(H * w);
        k.grad_norm[s] = grad.sample(p[s].x(), p[s].y()).norm();
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    k.endpoint_i_uu = {nan, nan};
    double K = std::numeric_limits<double>::infinity(), M = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto s = static_cast<std::size_t>(i);
        K = std::min(K, std::abs(k.i_ww[s]));
        M = std::max({M, k.grad_norm[s], std::abs(k.i_uw[s])});
    }
    if (!k.closed) {
        if (n < 3) {
            K = 0.0;
        } else {
            for (int e = 0; e < 2; ++e) {
                const auto s = static_cast<std::size_t>(e == 0 ? 1 : n - 2);
                const Mat2 H = hess.sample(p[s].x(), p[s].y());
                k.endpoint_i_uu[static_cast<std::size_t>(e)] = std::abs(k.u[s].dot(H * k.u[s]));
                K = std::min(K, k.endpoint_i_uu[static_cast<std::size_t>(e)]);
            }
        }
    }
    k.K_achieved = n == 0 ? 0.0 : K;
    k.M_achieved = M;
}

}  // namespace

std::vector<CriticalContour> contour_paths(const MSComplex& c) {
    std::vector<CriticalContour> out;
    std::vector<char> used(c.arcs().size(), 0);
    const auto& nodes = c.nodes();
    const auto& arcs = c.arcs();
    std::vector<std::vector<int>> by_saddle(nodes.size());
    for (const auto& a : arcs) by_saddle[static_cast<std::size_t>(a.origin)].push_back(a.id);
    for (auto kind : {SeparatrixKind::SaddleMax, SeparatrixKind::SaddleMin}) {
        std::vector<RidgeEdge> edges;
        for (const auto& list : by_saddle) {
            std::vector<int> side;
            for (int id : list)
                if (arcs[static_cast<std::size_t>(id)].kind == kind) side.push_back(id);
            if (side.size() != 2) continue;
            const auto& a = arcs[static_cast<std::size_t>(side[0])];
            const auto& b = arcs[static_cast<std::size_t>(side[1])];
            if (nodes[static_cast<std::size_t>(a.destination)].is_virtual ||
                nodes[static_cast<std::size_t>(b.destination)].is_virtual)
                continue;
            edges.push_back({a.destination, b.destination, a.id, b.id});
        }
        auto emit = [&](const std::vector<Step>& steps, bool closed) {
            CriticalContour k;
            k.closed = closed;
            for (const auto& st : steps) {
                const auto& E = edges[static_cast<std::size_t>(st.edge)];
                const int first = st.forward ? E.arc_a : E.arc_b;
                const int second = st.forward ? E.arc_b : E.arc_a;
                append(k.polyline, arcs[static_cast<std::size_t>(first)].polyline, true);
                append(k.polyline, arcs[static_cast<std::size_t>(second)].polyline, false);
                k.arcs.push_back(first);
                k.arcs.push_back(second);
                used[static_cast<std::size_t>(first)] = used[static_cast<std::size_t>(second)] = 1;
            }
            if (closed && k.polyline.size() > 1 && k.polyline.front() == k.polyline.back()) k.polyline.pop_back();
            out.push_back(std::move(k));
        };
        std::vector<char> on_cycle(edges.size(), 0);
        for (const auto& cyc : ridge_cycles(edges, nodes.size())) {
            for (const auto& st : cyc) on_cycle[static_cast<std::size_t>(st.edge)] = 1;
            emit(cyc, true);
        }
        for (const auto& chain : ridge_chains(edges, nodes.size(), on_cycle)) emit(chain, false);
    }
    for (const auto& a : c.arcs()) {
        if (used[static_cast<std::size_t>(a.id)]) continue;
        CriticalContour k;
        k.arcs = {a.id};
        k.polyline = a.polyline;
        out.push_back(std::move(k));
    }
    return out;
}

std::vector<CriticalContour> candidate_contours(const ScalarGrid& img, const MSComplex& c, const ContourOptions& opt) {
    if (!img.spec().same_lattice(c.spec())) throw ParameterError("candidate_contours: image and complex lattices differ");
    auto out = contour_paths(c);
    const VectorGrid grad = gradient(img);
    const HessianGrid hess = hessian(img);
    parallel_for(static_cast<int>(out.size()),
                 [&](int i) { evaluate(out[static_cast<std::size_t>(i)], grad, hess, opt); });
    return out;
}

ContourThresholds default_thresholds(const ScalarGrid& img, const std::vector<CriticalContour>& candidates) {
    std::vector<double> ww;
    for (const auto& k : candidates)
        for (double v : k.i_ww) ww.push_back(std::abs(v));
    const VectorGrid g = gradient(img);
    std::vector<double> gn;
    gn.reserve(img.spec().size());
    for (int r = 0; r < img.height(); ++r)
        for (int c = 0; c < img.width(); ++c) gn.push_back(g.at(c, r).norm());
    return {nearest_rank(std::move(ww), 0.6), 3.0 * nearest_rank(std::move(gn), 0.5)};
}

namespace {

std::vector<CriticalContour> admit(std::vector<CriticalContour> cands, double K, double M) {
    std::vector<CriticalContour> out;
    for (auto& k : cands)
        if (k.admits(K, M)) {
            k.admitted = true;
            out.push_back(std::move(k));
        }
    return out;
}

}  // namespace

std::vector<CriticalContour> detect(const ScalarGrid& img, const MSComplex& c, double K, double M,
                                    const ContourOptions& opt) {
    if (!(K > 0) || !(M > 0)) throw ParameterError("detect: thresholds K and M must be positive");
    return admit(candidate_contours(img, c, opt), K, M);
}

std::vector<CriticalContour> detect(const ScalarGrid& img, const MSComplex& c, const ContourOptions& opt) {
    auto cands = candidate_contours(img, c, opt);
    const auto t = default_thresholds(img, cands);
    return admit(std::move(cands), t.K, t.M);
}

int KSweep::count_at(double K) const {
    return static_cast<int>(k_achieved.end() - std::upper_bound(k_achieved.begin(), k_achieved.end(), K));
}

KSweep k_sweep(const ScalarGrid& img, const MSComplex& c, double M, const ContourOptions& opt) {
    KSweep s;
    s.M = M;
    for (const auto& k : candidate_contours(img, c, opt))
        if (k.M_achieved < M) s.k_achieved.push_back(k.K_achieved);
    std::sort(s.k_achieved.begin(), s.k_achieved.end());
    s.steps.emplace_back(0.0, s.count_at(0.0));
    for (std::size_t i = 0; i < s.k_achieved.size(); ++i) {
        const double k = s.k_achieved[i];
        if (k <= 0.0 || (i > 0 && k == s.k_achieved[i - 1])) continue;
        s.steps.emplace_back(k, s.count_at(k));
    }
    return s;
}

ScalarGrid convergence_image(const BlurSequence& seq, double sigma, const GridSpec& canvas,
                             const ConvergenceOptions& opt) {
    ScalarGrid img = blur_contour(seq, sigma, canvas);
    const double slope = opt.genericity_tilt * img.max();
    for (int r = 0; r < img.height(); ++r)
        for (int c = 0; c < img.width(); ++c) img(c, r) += slope * (0.8 * c + 0.6 * r);
    return img;
}

std::vector<ConvergenceRow> convergence_experiment(const BlurSequence& seq, const GridSpec& canvas,
                                                   std::optional<double> K, std::optional<double> M,
                                                   const ConvergenceOptions& opt) {
    seq.validate();
    if ((K && !(*K > 0)) || (M && !(*M > 0)))
        throw ParameterError("convergence_experiment: thresholds K and M must be positive");
    std::vector<ConvergenceRow> rows;
    for (double sigma : seq.sigmas) {
        const ScalarGrid img = convergence_image(seq, sigma, canvas, opt);
        const MSComplex c = simplify(build_complex(img), opt.simplify_fraction * img.range());
        auto cands = candidate_contours(img, c, opt.contour);
        const auto def = default_thresholds(img, cands);
        const auto admitted = admit(std::move(cands), K.value_or(def.K), M.value_or(def.M));

        ConvergenceRow row;
        row.sigma = sigma;
        row.admitted = static_cast<int>(admitted.size());
        double best = std::numeric_limits<double>::infinity();
        for (const auto& k : admitted) {
            const auto d = curve_distance(seq.contour, seq.closed, k.polyline, k.closed, opt.coverage_tol);
            if (d.hausdorff < best) {
                best = d.hausdorff;
                row.found = true;
                row.hausdorff = d.hausdorff;
                row.mean_distance = d.mean_a_to_b;
                row.coverage = d.coverage_a;
                row.K_achieved = k.K_achieved;
                row.M_achieved = k.M_achieved;
            }
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace critcon
