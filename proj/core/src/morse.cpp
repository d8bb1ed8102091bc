#include "critcon/morse.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <tuple>
#include <unordered_map>

#include "critcon/graph.hpp"

namespace critcon {

using Cell = CubicalComplex::Cell;

std::string to_string(SeparatrixKind k) { return k == SeparatrixKind::SaddleMin ? "saddle-min" : "saddle-max"; }

std::array<int, 3> MSComplex::index_counts() const {
    std::array<int, 3> n{};
    for (const auto& p : nodes_) ++n[static_cast<std::size_t>(p.index)];
    return n;
}

int MSComplex::euler_characteristic() const {
    const auto n = index_counts();
    return n[0] - n[1] + n[2];
}

std::vector<int> MSComplex::incident_arcs(int node) const {
    std::vector<int> out;
    for (const auto& a : arcs_)
        if (a.origin == node || a.destination == node) out.push_back(a.id);
    return out;
}

int MSComplex::min_label(int col, int row) const {
    return vertex_min_[static_cast<std::size_t>(cx_->vertex_at(col, row))];
}

int MSComplex::max_label(int col, int row) const {
    return square_max_[static_cast<std::size_t>(cx_->square_at(col, row) - cx_->square_at(0, 0))];
}

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            auto& p = parent[static_cast<std::size_t>(x)];
            p = parent[static_cast<std::size_t>(p)];
            x = p;
        }
        return x;
    }
};

std::vector<Vec2> polyline_of(const CubicalComplex& cx, const std::vector<Cell>& cells) {
    std::vector<Vec2> out;
    out.reserve(cells.size());
    for (Cell c : cells) {
        if (c == cx.virtual_vertex()) continue;
        const Vec2 p = cx.position(c);
        if (!out.empty() && out.back() == p) continue;
        out.push_back(p);
    }
    return out;
}

}  // namespace

/// Fills the parts of MSComplex shared by building and simplifying.
class MSBuilder {
public:
    static void assign_persistence(MSComplex& c) {
        for (auto& n : c.nodes_) n.persistence = kInfinitePersistence;
        for (const auto& p : persistence_pairs(c)) {
            c.nodes_[static_cast<std::size_t>(p.saddle.id)].persistence = p.persistence;
            c.nodes_[static_cast<std::size_t>(p.extremum.id)].persistence = p.persistence;
        }
    }

    /// 2-cells as connected components of (vertex, 2-cell) flags carrying the
    /// same (min, max) label pair.
    static void assemble_cells(MSComplex& c, const std::vector<int>& vmin, const std::vector<int>& fmax) {
        const CubicalComplex& cx = *c.cx_;
        const Cell first2 = cx.square_at(0, 0);
        const auto n2 = static_cast<std::size_t>(cx.num_cells() - first2);
        std::vector<std::int64_t> base(n2 + 1, 0);
        std::array<Cell, 4> vs{};
        for (std::size_t i = 0; i < n2; ++i)
            base[i + 1] = base[i] + cx.vertices(first2 + static_cast<Cell>(i), vs);
        auto flag_of = [&](Cell v, Cell f) -> std::int64_t {
            std::array<Cell, 4> fv{};
            const int n = cx.vertices(f, fv);
            for (int k = 0; k < n; ++k)
                if (fv[static_cast<std::size_t>(k)] == v) return base[static_cast<std::size_t>(f - first2)] + k;
            return -1;
        };
        auto label = [&](Cell v, Cell f) {
            return std::pair{vmin[static_cast<std::size_t>(v)], fmax[static_cast<std::size_t>(f - first2)]};
        };

        // separatrix edges are walls: primal edges between 2-cells, dual edges inside one
        std::vector<char> wall(static_cast<std::size_t>(cx.num_cells()), 0);
        constexpr char kPrimal = 1, kDual = 2;
        for (const auto& a : c.arcs_) {
            const char bit = a.kind == SeparatrixKind::SaddleMin ? kPrimal : kDual;
            for (Cell x : a.cells)
                if (cx.dim(x) == 1) wall[static_cast<std::size_t>(x)] |= bit;
        }

        UnionFind uf(static_cast<std::size_t>(base.back()));
        std::array<Cell, 4> faces{}, ev{};
        std::array<Cell, 5> co{};
        for (std::size_t i = 0; i < n2; ++i) {
            const Cell f = first2 + static_cast<Cell>(i);
            const int ne = cx.faces(f, faces);
            for (int k = 0; k < ne; ++k) {
                const Cell e = faces[static_cast<std::size_t>(k)];
                cx.vertices(e, ev);
                // across the edge inside f
                const char w = wall[static_cast<std::size_t>(e)];
                if (!(w & kDual) && label(ev[0], f) == label(ev[1], f)) {
                    const int a = uf.find(static_cast<int>(flag_of(ev[0], f)));
                    const int b = uf.find(static_cast<int>(flag_of(ev[1], f)));
                    uf.parent[static_cast<std::size_t>(a)] = b;
                }
                // around each endpoint into the neighbouring 2-cell
                const int nco = (w & kPrimal) ? 0 : cx.cofaces(e, co);
                for (int j = 0; j < nco; ++j) {
                    const Cell g = co[static_cast<std::size_t>(j)];
                    if (g <= f) continue;
                    for (int t = 0; t < 2; ++t) {
                        const Cell v = ev[static_cast<std::size_t>(t)];
                        if (label(v, f) != label(v, g)) continue;
                        const int a = uf.find(static_cast<int>(flag_of(v, f)));
                        const int b = uf.find(static_cast<int>(flag_of(v, g)));
                        uf.parent[static_cast<std::size_t>(a)] = b;
                    }
                }
            }
        }

        std::unordered_map<int, int> comp_id;
        std::vector<TwoCell> cells;
        std::vector<std::vector<std::array<int, 3>>> corners;
        for (std::size_t i = 0; i < n2; ++i) {
            const Cell f = first2 + static_cast<Cell>(i);
            const int n = cx.vertices(f, vs);
            for (int k = 0; k < n; ++k) {
                const int root = uf.find(static_cast<int>(base[i] + k));
                auto [it, fresh] = comp_id.try_emplace(root, static_cast<int>(cells.size()));
                if (fresh) {
                    TwoCell t;
                    t.id = it->second;
                    std::tie(t.min, t.max) = label(vs[static_cast<std::size_t>(k)], f);
                    cells.push_back(t);
                    corners.emplace_back();
                }
                ++cells[static_cast<std::size_t>(it->second)].flag_count;
            }
        }

        // corners: each saddle edge touches four flags
        std::map<std::pair<int, Cell>, int> arc_at;
        for (const auto& a : c.arcs_) arc_at[{a.origin, a.cells[1]}] = a.id;
        for (const auto& node : c.nodes_) {
            if (node.index != 1) continue;
            cx.vertices(node.cell, ev);
            const int nco = cx.cofaces(node.cell, co);
            for (int t = 0; t < 2; ++t)
                for (int j = 0; j < nco; ++j) {
                    const Cell v = ev[static_cast<std::size_t>(t)], q = co[static_cast<std::size_t>(j)];
                    const int comp = comp_id.at(uf.find(static_cast<int>(flag_of(v, q))));
                    corners[static_cast<std::size_t>(comp)].push_back(
                        {node.id, arc_at.at({node.id, v}), arc_at.at({node.id, q})});
                }
        }
        for (std::size_t i = 0; i < cells.size(); ++i) {
            auto& k = corners[i];
            auto& t = cells[i];
            if (k.size() >= 1) {
                t.saddles[0] = k[0][0];
                t.arcs[0] = k[0][1];
                t.arcs[1] = k[0][2];
            }
            if (k.size() >= 2) {
                t.saddles[1] = k[1][0];
                t.arcs[2] = k[1][2];
                t.arcs[3] = k[1][1];
            }
            if (k.size() > 2) t.saddles = {-1, -1};  // not a quadrilateral; flagged by validity checks
        }
        c.cells_ = std::move(cells);

        c.vertex_min_.assign(vmin.begin(), vmin.begin() + cx.spec().width * cx.spec().height);
        const auto nsq = static_cast<std::size_t>(cx.spec().width - 1) * static_cast<std::size_t>(cx.spec().height - 1);
        c.square_max_.assign(fmax.begin(), fmax.begin() + static_cast<std::ptrdiff_t>(nsq));
    }

    static MSComplex build(const ScalarGrid& field) {
        MSComplex c;
        auto cx = std::make_shared<CubicalComplex>(field);
        c.cx_ = cx;
        c.source_id_ = field.checksum();

        const auto& crit = cx->critical_cells();
        std::unordered_map<Cell, int> node_of;
        for (std::size_t i = 0; i < crit.size(); ++i) {
            const Cell cell = crit[i];
            CriticalPoint p;
            p.id = static_cast<int>(i);
            p.cell = cell;
            p.index = cx->dim(cell);
            p.value = cx->value(cell);
            p.order = static_cast<std::int64_t>(i);
            p.is_virtual = cell == cx->virtual_vertex();
            p.position = cx->position(cell);
            p.on_boundary = cx->on_boundary(cell);
            node_of[cell] = p.id;
            c.nodes_.push_back(p);
        }

        std::array<Cell, 4> ev{};
        std::array<Cell, 5> co{};
        auto add_arc = [&](int saddle, Cell start, bool down) {
            Separatrix s;
            s.id = static_cast<int>(c.arcs_.size());
            s.origin = saddle;
            s.kind = down ? SeparatrixKind::SaddleMin : SeparatrixKind::SaddleMax;
            s.cells.push_back(c.nodes_[static_cast<std::size_t>(saddle)].cell);
            const auto path = down ? cx->descend(start) : cx->ascend(start);
            s.cells.insert(s.cells.end(), path.begin(), path.end());
            s.destination = node_of.at(s.cells.back());
            s.polyline = polyline_of(*cx, s.cells);
            c.arcs_.push_back(std::move(s));
        };
        for (const auto& p : c.nodes_) {
            if (p.index != 1) continue;
            cx->vertices(p.cell, ev);
            add_arc(p.id, ev[0], true);
            add_arc(p.id, ev[1], true);
            const int n = cx->cofaces(p.cell, co);
            for (int j = 0; j < n; ++j) add_arc(p.id, co[static_cast<std::size_t>(j)], false);
        }

        // labels by following the gradient with memoisation
        const Cell vinf = cx->virtual_vertex();
        std::vector<int> vmin(static_cast<std::size_t>(vinf) + 1, -1);
        std::vector<Cell> trail;
        for (Cell v = 0; v <= vinf; ++v) {
            Cell x = v;
            trail.clear();
            while (vmin[static_cast<std::size_t>(x)] < 0 && !cx->is_critical(x)) {
                trail.push_back(x);
                cx->vertices(cx->pair(x), ev);
                x = ev[0] == x ? ev[1] : ev[0];
            }
            const int lab = vmin[static_cast<std::size_t>(x)] >= 0 ? vmin[static_cast<std::size_t>(x)] : node_of.at(x);
            vmin[static_cast<std::size_t>(x)] = lab;
            for (Cell t : trail) vmin[static_cast<std::size_t>(t)] = lab;
        }
        const Cell first2 = cx->square_at(0, 0);
        std::vector<int> fmax(static_cast<std::size_t>(cx->num_cells() - first2), -1);
        for (Cell f = first2; f < cx->num_cells(); ++f) {
            Cell x = f;
            trail.clear();
            while (fmax[static_cast<std::size_t>(x - first2)] < 0 && !cx->is_critical(x)) {
                trail.push_back(x);
                x = cx->other_coface(cx->pair(x), x);
            }
            const auto xi = static_cast<std::size_t>(x - first2);
            const int lab = fmax[xi] >= 0 ? fmax[xi] : node_of.at(x);
            fmax[xi] = lab;
            for (Cell t : trail) fmax[static_cast<std::size_t>(t - first2)] = lab;
        }

        assign_persistence(c);
        assemble_cells(c, vmin, fmax);
        return c;
    }

    static MSComplex simplify(const MSComplex& in, double tau);
};

MSComplex build_complex(const ScalarGrid& field) { return MSBuilder::build(field); }

std::vector<PersistencePair> persistence_pairs(const MSComplex& c) {
    const auto& nodes = c.nodes();
    std::vector<std::array<int, 2>> down(nodes.size(), {-1, -1}), up(nodes.size(), {-1, -1});
    for (const auto& a : c.arcs()) {
        auto& slot = a.kind == SeparatrixKind::SaddleMin ? down[static_cast<std::size_t>(a.origin)]
                                                         : up[static_cast<std::size_t>(a.origin)];
        slot[slot[0] < 0 ? 0 : 1] = a.destination;
    }
    std::vector<int> saddles;
    for (const auto& n : nodes)
        if (n.index == 1) saddles.push_back(n.id);
    auto by_order = [&](int a, int b) {
        return nodes[static_cast<std::size_t>(a)].order < nodes[static_cast<std::size_t>(b)].order;
    };
    std::sort(saddles.begin(), saddles.end(), by_order);

    std::vector<PersistencePair> out;
    std::vector<char> paired(nodes.size(), 0);
    auto emit = [&](int s, int m) {
        const auto& S = nodes[static_cast<std::size_t>(s)];
        const auto& M = nodes[static_cast<std::size_t>(m)];
        out.push_back({S, M, std::abs(S.value - M.value)});
        paired[static_cast<std::size_t>(s)] = 1;
    };

    UnionFind lo(nodes.size());
    for (int s : saddles) {
        const auto& d = down[static_cast<std::size_t>(s)];
        if (d[0] < 0 || d[1] < 0) continue;
        int a = lo.find(d[0]), b = lo.find(d[1]);
        if (a == b) continue;
        if (by_order(a, b)) std::swap(a, b);  // a is the younger root
        emit(s, a);
        lo.parent[static_cast<std::size_t>(a)] = b;
    }
    UnionFind hi(nodes.size());
    for (auto it = saddles.rbegin(); it != saddles.rend(); ++it) {
        const int s = *it;
        if (paired[static_cast<std::size_t>(s)]) continue;
        const auto& u = up[static_cast<std::size_t>(s)];
        if (u[0] < 0 || u[1] < 0) continue;
        int a = hi.find(u[0]), b = hi.find(u[1]);
        if (a == b) continue;
        if (by_order(b, a)) std::swap(a, b);  // a is the lower root
        emit(s, a);
        hi.parent[static_cast<std::size_t>(a)] = b;
    }
    std::stable_sort(out.begin(), out.end(), [](const PersistencePair& x, const PersistencePair& y) {
        return std::tie(x.persistence, x.saddle.order) < std::tie(y.persistence, y.saddle.order);
    });
    return out;
}

MSComplex MSBuilder::simplify(const MSComplex& in, double tau) {
    if (!(tau >= 0)) throw ParameterError("simplify: threshold must be non-negative");
    if (tau == 0.0) return in;

    // working graph on the input ids; an arc is a chain of input arcs
    struct Seg {
        int arc;
        bool reversed;
    };
    struct WArc {
        int origin, dest;
        SeparatrixKind kind;
        Cell start;
        std::vector<Seg> segs;
        bool alive = true;
    };
    const auto& nodes = in.nodes_;
    std::vector<WArc> arcs;
    std::vector<std::vector<int>> incident(nodes.size());
    for (const auto& a : in.arcs_) {
        arcs.push_back({a.origin, a.destination, a.kind, a.cells[1], {{a.id, false}}});
        incident[static_cast<std::size_t>(a.origin)].push_back(a.id);
        incident[static_cast<std::size_t>(a.destination)].push_back(a.id);
    }
    std::vector<char> alive(nodes.size(), 1);
    std::vector<int> absorbed(nodes.size());
    std::iota(absorbed.begin(), absorbed.end(), 0);

    auto order = [&](int n) { return nodes[static_cast<std::size_t>(n)].order; };
    auto value = [&](int n) { return nodes[static_cast<std::size_t>(n)].value; };
    auto live_arcs = [&](int s, SeparatrixKind kind) {
        std::vector<int> out;
        for (int a : incident[static_cast<std::size_t>(s)]) {
            const auto& w = arcs[static_cast<std::size_t>(a)];
            if (w.alive && w.origin == s && w.kind == kind) out.push_back(a);
        }
        return out;
    };

    using Cand = std::tuple<double, std::int64_t, std::int64_t, int, int, int>;  // pers, s order, m order, s, m, kind
    std::priority_queue<Cand, std::vector<Cand>, std::greater<>> pq;
    // best cancellation partner on one side of a saddle, or -1
    auto partner = [&](int s, SeparatrixKind kind) {
        const auto a = live_arcs(s, kind);
        if (a.size() != 2) return -1;
        const int m0 = arcs[static_cast<std::size_t>(a[0])].dest, m1 = arcs[static_cast<std::size_t>(a[1])].dest;
        if (m0 == m1) return -1;
        if (kind == SeparatrixKind::SaddleMin) return order(m0) > order(m1) ? m0 : m1;
        return order(m0) < order(m1) ? m0 : m1;
    };
    auto push = [&](int s) {
        for (auto kind : {SeparatrixKind::SaddleMin, SeparatrixKind::SaddleMax}) {
            const int m = partner(s, kind);
            if (m < 0 || nodes[static_cast<std::size_t>(m)].is_virtual) continue;
            pq.emplace(std::abs(value(s) - value(m)), order(s), order(m), s, m, static_cast<int>(kind));
        }
    };
    for (const auto& n : nodes)
        if (n.index == 1) push(n.id);

    while (!pq.empty()) {
        const auto [pers, so, mo, s, m, k] = pq.top();
        pq.pop();
        const auto kind = static_cast<SeparatrixKind>(k);
        if (!alive[static_cast<std::size_t>(s)] || !alive[static_cast<std::size_t>(m)] || partner(s, kind) != m) continue;
        if (!(pers < tau)) break;

        const auto side = live_arcs(s, kind);
        const int a_sm = arcs[static_cast<std::size_t>(side[0])].dest == m ? side[0] : side[1];
        const int a_so = a_sm == side[0] ? side[1] : side[0];
        const int other = arcs[static_cast<std::size_t>(a_so)].dest;
        std::vector<Seg> bridge;
        for (auto it = arcs[static_cast<std::size_t>(a_sm)].segs.rbegin(); it != arcs[static_cast<std::size_t>(a_sm)].segs.rend(); ++it)
            bridge.push_back({it->arc, !it->reversed});
        const auto& tail = arcs[static_cast<std::size_t>(a_so)].segs;
        bridge.insert(bridge.end(), tail.begin(), tail.end());

        std::vector<int> touched;
        for (int a : incident[static_cast<std::size_t>(m)]) {
            auto& w = arcs[static_cast<std::size_t>(a)];
            if (!w.alive || w.origin == s) continue;
            w.segs.insert(w.segs.end(), bridge.begin(), bridge.end());
            w.dest = other;
            incident[static_cast<std::size_t>(other)].push_back(a);
            touched.push_back(w.origin);
        }
        for (int a : incident[static_cast<std::size_t>(s)]) arcs[static_cast<std::size_t>(a)].alive = false;
        alive[static_cast<std::size_t>(s)] = 0;
        alive[static_cast<std::size_t>(m)] = 0;
        absorbed[static_cast<std::size_t>(m)] = other;
        incident[static_cast<std::size_t>(m)].clear();
        std::sort(touched.begin(), touched.end());
        touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
        for (int t : touched) push(t);
    }

    // compact
    MSComplex out;
    out.cx_ = in.cx_;
    out.source_id_ = in.source_id_;
    out.threshold_ = tau;
    std::vector<int> new_id(nodes.size(), -1);
    for (const auto& n : nodes)
        if (alive[static_cast<std::size_t>(n.id)]) {
            new_id[static_cast<std::size_t>(n.id)] = static_cast<int>(out.nodes_.size());
            out.nodes_.push_back(n);
            out.nodes_.back().id = new_id[static_cast<std::size_t>(n.id)];
        }
    for (const auto& w : arcs) {
        if (!w.alive) continue;
        Separatrix s;
        s.id = static_cast<int>(out.arcs_.size());
        s.origin = new_id[static_cast<std::size_t>(w.origin)];
        s.destination = new_id[static_cast<std::size_t>(w.dest)];
        s.kind = w.kind;
        for (const auto& seg : w.segs) {
            const auto& src = in.arcs_[static_cast<std::size_t>(seg.arc)].cells;
            std::vector<Cell> piece(src.begin(), src.end());
            if (seg.reversed) std::reverse(piece.begin(), piece.end());
            const auto skip = s.cells.empty() || s.cells.back() != piece.front() ? 0 : 1;
            s.cells.insert(s.cells.end(), piece.begin() + skip, piece.end());
        }
        s.polyline = polyline_of(*out.cx_, s.cells);
        out.arcs_.push_back(std::move(s));
    }

    auto resolve = [&](int n) {
        while (absorbed[static_cast<std::size_t>(n)] != n) n = absorbed[static_cast<std::size_t>(n)];
        return new_id[static_cast<std::size_t>(n)];
    };
    // the input keeps labels for grid cells only; recompute the cone part
    const CubicalComplex& cx = *in.cx_;
    const Cell vinf = cx.virtual_vertex();
    std::vector<int> vmin(static_cast<std::size_t>(vinf) + 1);
    for (std::size_t i = 0; i < in.vertex_min_.size(); ++i) vmin[i] = resolve(in.vertex_min_[i]);
    int vnode = -1;
    for (const auto& n : nodes)
        if (n.is_virtual) vnode = n.id;
    vmin[static_cast<std::size_t>(vinf)] = resolve(vnode);

    const Cell first2 = cx.square_at(0, 0);
    std::vector<int> fmax(static_cast<std::size_t>(cx.num_cells() - first2), -1);
    for (std::size_t i = 0; i < in.square_max_.size(); ++i) fmax[i] = resolve(in.square_max_[i]);
    std::unordered_map<Cell, int> node_of;
    for (const auto& n : nodes) node_of[n.cell] = n.id;
    for (Cell f = first2 + static_cast<Cell>(in.square_max_.size()); f < cx.num_cells(); ++f) {
        Cell x = f;
        while (!cx.is_critical(x) && cx.is_cone(x)) x = cx.other_coface(cx.pair(x), x);
        // x is critical or a square; squares already carry labels
        const auto xi = static_cast<std::size_t>(x - first2);
        fmax[static_cast<std::size_t>(f - first2)] = cx.is_critical(x) ? resolve(node_of.at(x)) : fmax[xi];
    }

    assign_persistence(out);
    assemble_cells(out, vmin, fmax);
    return out;
}

MSComplex simplify(const MSComplex& c, double tau) { return MSBuilder::simplify(c, tau); }

GradientPath gradient_path(const CubicalComplex& cx, const Vec2& seed) {
    const int col = std::clamp(static_cast<int>(std::floor(seed.x())), 0, cx.spec().width - 2);
    const int row = std::clamp(static_cast<int>(std::floor(seed.y())), 0, cx.spec().height - 2);
    GradientPath p;
    p.cells = cx.ascend(cx.square_at(col, row));
    for (Cell c : p.cells) p.values.push_back(cx.value(c));
    p.polyline = polyline_of(cx, p.cells);
    return p;
}

GradientPath gradient_path(const ScalarGrid& field, const Vec2& seed) {
    return gradient_path(CubicalComplex(field), seed);
}

// --- isomorphism -------------------------------------------------------------

namespace {

LabelledGraph graph_of(const MSComplex& c, bool flip) {
    LabelledGraph g;
    std::vector<int> id(c.nodes().size(), -1);
    for (const auto& n : c.nodes()) {
        if (flip && n.is_virtual) continue;
        id[static_cast<std::size_t>(n.id)] = g.add_node(n.is_virtual ? 3 : (flip ? 2 - n.index : n.index));
    }
    for (const auto& a : c.arcs()) {
        const int u = id[static_cast<std::size_t>(a.origin)], v = id[static_cast<std::size_t>(a.destination)];
        if (u >= 0 && v >= 0) g.add_edge(u, v);
    }
    return g;
}

}  // namespace

bool combinatorially_equal(const MSComplex& a, const MSComplex& b, IndexMatch match) {
    const bool flip = match == IndexMatch::Flipped;
    LabelledGraph gb = graph_of(b, false);
    // flipped: the virtual minimum has no counterpart, drop it on both sides
    return isomorphic(graph_of(a, flip), flip ? gb.without_label(3) : gb);
}

}  // namespace critcon
