#include "critcon/invariance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <tuple>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "critcon/error.hpp"
#include "critcon/geometry.hpp"
#include "critcon/parallel.hpp"

namespace critcon {

double default_delta(const GridSpec& g) { return 3.0 * std::max(g.width, g.height) / 256.0; }

bool point_in_polygon(const std::vector<Vec2>& poly, const Vec2& q) {
    bool in = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const Vec2 &a = poly[i], &b = poly[j];
        if ((a.y() > q.y()) != (b.y() > q.y()) && q.x() < (b.x() - a.x()) * (q.y() - a.y()) / (b.y() - a.y()) + a.x())
            in = !in;
    }
    return in;
}

namespace {

std::pair<int, int> contour_ends(const CriticalContour& k, const MSComplex& c) {
    const auto& arcs = c.arcs();
    const auto& nodes = c.nodes();
    const auto& first = arcs[static_cast<std::size_t>(k.arcs.front())];
    if (k.closed) {
        const bool ridge = first.kind == SeparatrixKind::SaddleMax;
        int best = first.destination;
        for (int id : k.arcs) {
            const int d = arcs[static_cast<std::size_t>(id)].destination;
            const double v = nodes[static_cast<std::size_t>(d)].value, bv = nodes[static_cast<std::size_t>(best)].value;
            if (ridge ? v > bv : v < bv) best = d;
        }
        return {best, best};
    }
    if (k.arcs.size() == 1) return {first.origin, first.destination};
    return {first.destination, arcs[static_cast<std::size_t>(k.arcs.back())].destination};
}

struct Box {
    Vec2 lo, hi;
};

Box box_of(const std::vector<Vec2>& p, double pad) {
    Box b{Vec2::Constant(std::numeric_limits<double>::infinity()), Vec2::Constant(-std::numeric_limits<double>::infinity())};
    for (const auto& q : p) {
        b.lo = b.lo.cwiseMin(q);
        b.hi = b.hi.cwiseMax(q);
    }
    b.lo.array() -= pad;
    b.hi.array() += pad;
    return b;
}

double fraction_in_box(const std::vector<Vec2>& p, const Box& b) {
    if (p.empty()) return 0.0;
    std::size_t n = 0;
    for (const auto& q : p)
        if ((q.array() >= b.lo.array()).all() && (q.array() <= b.hi.array()).all()) ++n;
    return static_cast<double>(n) / static_cast<double>(p.size());
}

void check_pair(const MSComplex& ca, const MSComplex& cb, double delta) {
    if (!ca.spec().same_lattice(cb.spec())) throw DomainError("contour matching: complexes on different lattices");
    if (!(delta > 0)) throw ParameterError("contour matching: delta must be positive");
}

/// Eligible pairs, sorted in greedy order.
std::vector<ContourPair> eligible_pairs(const std::vector<CriticalContour>& a, const std::vector<CriticalContour>& b,
                                        double delta) {
    std::vector<Box> ba, bb;
    for (const auto& k : a) ba.push_back(box_of(k.polyline, delta));
    for (const auto& k : b) bb.push_back(box_of(k.polyline, delta));
    std::vector<std::vector<ContourPair>> found(a.size());
    parallel_for(static_cast<int>(a.size()), [&](int i) {
        const auto& A = a[static_cast<std::size_t>(i)];
        for (std::size_t j = 0; j < b.size(); ++j) {
            const auto& B = b[j];
            if (A.polyline.empty() || B.polyline.empty()) continue;
            if (fraction_in_box(B.polyline, ba[static_cast<std::size_t>(i)]) < kMatchFraction ||
                fraction_in_box(A.polyline, bb[j]) < kMatchFraction)
                continue;
            const auto ab = curve_distance(A.polyline, A.closed, B.polyline, B.closed, delta);
            if (ab.coverage_a < kMatchFraction) continue;
            const auto ba_ = curve_distance(B.polyline, B.closed, A.polyline, A.closed, delta);
            if (ba_.coverage_a < kMatchFraction) continue;
            found[static_cast<std::size_t>(i)].push_back(
                {i, static_cast<int>(j), 0.5 * (ab.mean_a_to_b + ba_.mean_a_to_b), ab.hausdorff, ab.coverage_a});
        }
    });
    std::vector<ContourPair> all;
    for (auto& f : found) all.insert(all.end(), f.begin(), f.end());
    std::sort(all.begin(), all.end(), [](const ContourPair& x, const ContourPair& y) {
        return std::tie(x.mean, x.max, x.a, x.b) < std::tie(y.mean, y.max, y.a, y.b);
    });
    return all;
}

MatchReport greedy(const std::vector<ContourPair>& cand, std::size_t na, std::size_t nb, double delta) {
    MatchReport r;
    r.delta = delta;
    std::vector<char> ua(na, 0), ub(nb, 0);
    for (const auto& p : cand) {
        if (ua[static_cast<std::size_t>(p.a)] || ub[static_cast<std::size_t>(p.b)]) continue;
        ua[static_cast<std::size_t>(p.a)] = ub[static_cast<std::size_t>(p.b)] = 1;
        r.pairs.push_back(p);
    }
    std::sort(r.pairs.begin(), r.pairs.end(), [](const ContourPair& x, const ContourPair& y) { return x.a < y.a; });
    for (std::size_t i = 0; i < na; ++i)
        if (!ua[i]) r.unmatched_a.push_back(static_cast<int>(i));
    for (std::size_t j = 0; j < nb; ++j)
        if (!ub[j]) r.unmatched_b.push_back(static_cast<int>(j));
    return r;
}

}  // namespace

LabelledGraph contour_graph(const std::vector<CriticalContour>& contours, const MSComplex& c, IndexMatch match) {
    LabelledGraph g;
    std::map<int, int> id;
    auto node = [&](int n) {
        auto it = id.find(n);
        if (it != id.end()) return it->second;
        const auto& cp = c.nodes()[static_cast<std::size_t>(n)];
        const int lab = cp.is_virtual ? 3 : (match == IndexMatch::Flipped ? 2 - cp.index : cp.index);
        return id[n] = g.add_node(lab);
    };
    for (const auto& k : contours) {
        if (k.arcs.empty()) continue;
        const auto [u, v] = contour_ends(k, c);
        g.add_edge(node(u), node(v));
    }
    return g;
}

MatchReport match_contours(const std::vector<CriticalContour>& a, const MSComplex& ca,
                           const std::vector<CriticalContour>& b, const MSComplex& cb, double delta,
                           IndexMatch match) {
    check_pair(ca, cb, delta);
    MatchReport r = greedy(eligible_pairs(a, b, delta), a.size(), b.size(), delta);
    r.graph_equivalent = isomorphic(contour_graph(a, ca, match), contour_graph(b, cb));
    return r;
}

MatchReport align_with_slant(const std::vector<CriticalContour>& image_contours, const MSComplex& image_complex,
                             const MSComplex& slant_complex, double delta) {
    check_pair(image_complex, slant_complex, delta);
    const auto slant = contour_paths(slant_complex);
    MatchReport r = greedy(eligible_pairs(image_contours, slant, delta), image_contours.size(), slant.size(), delta);
    r.unmatched_b.clear();
    std::vector<CriticalContour> partners;
    for (const auto& p : r.pairs) partners.push_back(slant[static_cast<std::size_t>(p.b)]);
    const auto gb = contour_graph(partners, slant_complex);
    r.graph_equivalent = r.unmatched_a.empty() &&
                         (isomorphic(contour_graph(image_contours, image_complex), gb) ||
                          isomorphic(contour_graph(image_contours, image_complex, IndexMatch::Flipped), gb));
    return r;
}

std::vector<BumpRecord> detect_bump_template(const MSComplex& slant_complex,
                                             const std::vector<CriticalContour>& contours) {
    std::vector<BumpRecord> out;
    const double s = slant_complex.spec().spacing;
    for (std::size_t i = 0; i < contours.size(); ++i) {
        const auto& k = contours[i];
        if (!k.closed || !k.admitted || k.polyline.size() < 3) continue;
        int minima = 0, maxima = 0, which = -1;
        for (const auto& n : slant_complex.nodes()) {
            if (n.is_virtual || n.index == 1) continue;
            if (!point_in_polygon(k.polyline, n.position) || distance_to_polyline(n.position, k.polyline, true) < 0.5)
                continue;
            if (n.index == 0) {
                ++minima;
                which = n.id;
            } else {
                ++maxima;
            }
        }
        if (minima != 1 || maxima != 0) continue;
        double area = 0.0;
        for (std::size_t p = 0, q = k.polyline.size() - 1; p < k.polyline.size(); q = p++)
            area += k.polyline[q].x() * k.polyline[p].y() - k.polyline[p].x() * k.polyline[q].y();
        BumpRecord b;
        b.contour = static_cast<int>(i);
        b.minimum = which;
        b.minimum_position = slant_complex.nodes()[static_cast<std::size_t>(which)].position;
        b.area = 0.5 * std::abs(area) * s * s;
        out.push_back(b);
    }
    return out;
}

std::vector<ScaffoldCurve> scaffold_from(const std::vector<CriticalContour>& contours, const ScalarGrid& field) {
    std::vector<ScaffoldCurve> out;
    for (const auto& k : contours) {
        ScaffoldCurve c{k.polyline, k.closed, {}};
        for (const auto& p : k.polyline) c.values.push_back(field.sample(p.x(), p.y()));
        out.push_back(std::move(c));
    }
    return out;
}

ScaffoldSolution reconstruct_scaffold(const std::vector<ScaffoldCurve>& curves, const std::optional<ScalarGrid>& boundary,
                                      const GridSpec& grid) {
    if (boundary && !boundary->spec().same_lattice(grid))
        throw DomainError("reconstruct_scaffold: boundary lattice differs from the grid");
    const int W = grid.width, H = grid.height;
    const auto N = grid.size();
    auto idx = [W](int c, int r) { return static_cast<std::size_t>(r) * static_cast<std::size_t>(W) + static_cast<std::size_t>(c); };
    std::vector<char> fixed(N, 0);
    std::vector<double> value(N, 0.0), best(N, std::numeric_limits<double>::infinity());

    if (boundary)
        for (int r = 0; r < H; ++r)
            for (int c = 0; c < W; ++c)
                if (r == 0 || c == 0 || r == H - 1 || c == W - 1) {
                    fixed[idx(c, r)] = 2;
                    value[idx(c, r)] = (*boundary)(c, r);
                }
    // each curve pixel takes the sample nearest its centre
    auto splat = [&](const Vec2& p, double v) {
        const int c = static_cast<int>(std::lround(p.x())), r = static_cast<int>(std::lround(p.y()));
        if (c < 0 || r < 0 || c >= W || r >= H) return;
        const auto i = idx(c, r);
        if (fixed[i] == 2) return;
        const double d = (p - Vec2(c, r)).squaredNorm();
        if (d < best[i]) {
            best[i] = d;
            value[i] = v;
            fixed[i] = 1;
        }
    };
    for (const auto& cv : curves) {
        if (cv.values.size() != cv.polyline.size())
            throw ParameterError("reconstruct_scaffold: need one value per curve vertex");
        const std::size_t n = cv.polyline.size();
        if (n == 1) splat(cv.polyline[0], cv.values[0]);
        const std::size_t segs = n < 2 ? 0 : (cv.closed ? n : n - 1);
        for (std::size_t s = 0; s < segs; ++s) {
            const Vec2 &a = cv.polyline[s], &b = cv.polyline[(s + 1) % n];
            const double va = cv.values[s], vb = cv.values[(s + 1) % n];
            const int k = std::max(1, static_cast<int>(std::ceil((b - a).norm() / 0.25)));
            for (int j = 0; j <= k; ++j) {
                const double t = static_cast<double>(j) / k;
                splat(a + t * (b - a), va + t * (vb - va));
            }
        }
    }

    ScaffoldSolution sol;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < N; ++i)
        if (fixed[i]) {
            ++sol.constrained_pixels;
            lo = std::min(lo, value[i]);
            hi = std::max(hi, value[i]);
        }
    if (sol.constrained_pixels == 0) throw ParameterError("reconstruct_scaffold: no constraints given");

    // every free pixel must reach a constraint, or the system is singular
    {
        std::vector<char> seen(N, 0);
        std::queue<std::size_t> q;
        for (std::size_t i = 0; i < N; ++i)
            if (fixed[i]) {
                seen[i] = 1;
                q.push(i);
            }
        while (!q.empty()) {
            const auto i = q.front();
            q.pop();
            const int c = static_cast<int>(i % static_cast<std::size_t>(W)), r = static_cast<int>(i / static_cast<std::size_t>(W));
            const int nb[4][2] = {{c - 1, r}, {c + 1, r}, {c, r - 1}, {c, r + 1}};
            for (const auto& p : nb) {
                if (p[0] < 0 || p[1] < 0 || p[0] >= W || p[1] >= H) continue;
                const auto j = idx(p[0], p[1]);
                if (!seen[j]) {
                    seen[j] = 1;
                    q.push(j);
                }
            }
        }
        if (std::find(seen.begin(), seen.end(), 0) != seen.end())
            throw DomainError("reconstruct_scaffold: a region has no constraint");
    }

    std::vector<int> unknown(N, -1);
    int nu = 0;
    for (std::size_t i = 0; i < N; ++i)
        if (!fixed[i]) unknown[i] = nu++;

    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nu);
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c) {
            const int u = unknown[idx(c, r)];
            if (u < 0) continue;
            const int nb[4][2] = {{c - 1, r}, {c + 1, r}, {c, r - 1}, {c, r + 1}};
            double diag = 0.0;
            for (const auto& p : nb) {
                if (p[0] < 0 || p[1] < 0 || p[0] >= W || p[1] >= H) continue;  // reflecting border
                diag += 1.0;
                const auto j = idx(p[0], p[1]);
                if (unknown[j] >= 0) trip.emplace_back(u, unknown[j], -1.0);
                else rhs[u] += value[j];
            }
            trip.emplace_back(u, u, diag);
        }
    Eigen::VectorXd x(nu);
    if (nu > 0) {
        Eigen::SparseMatrix<double> A(nu, nu);
        A.setFromTriplets(trip.begin(), trip.end());
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
        if (ldlt.info() != Eigen::Success) throw DomainError("reconstruct_scaffold: factorization failed");
        x = ldlt.solve(rhs);
    }

    sol.field = ScalarGrid(grid);
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c) {
            const auto i = idx(c, r);
            sol.field(c, r) = unknown[i] >= 0 ? x[unknown[i]] : value[i];
        }
    double res = 0.0;
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c) {
            if (unknown[idx(c, r)] < 0) continue;
            const int nb[4][2] = {{c - 1, r}, {c + 1, r}, {c, r - 1}, {c, r + 1}};
            double acc = 0.0;
            for (const auto& p : nb)
                if (p[0] >= 0 && p[1] >= 0 && p[0] < W && p[1] < H) acc += sol.field(p[0], p[1]) - sol.field(c, r);
            res = std::max(res, std::abs(acc));
        }
    sol.relative_residual = res / std::max(hi - lo, std::numeric_limits<double>::min());
    if (hi == lo) sol.relative_residual = res;
    if (sol.relative_residual > 1e-8) throw DomainError("reconstruct_scaffold: solver residual above 1e-8");
    return sol;
}

}  // namespace critcon
