#include "critcon/cubical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace critcon {

CubicalComplex::CubicalComplex(const ScalarGrid& field) : spec_(field.spec()) {
    field.validate();
    const int W = spec_.width, H = spec_.height;
    values_.assign(field.values().begin(), field.values().end());
    nv_ = W * H;
    const int nb = 2 * (W - 1) + 2 * (H - 1);
    vinf_ = nv_;
    he_ = nv_ + 1;
    ve_ = he_ + (W - 1) * H;
    cone_e_ = ve_ + W * (H - 1);
    sq_ = cone_e_ + nb;
    tri_ = sq_ + (W - 1) * (H - 1);
    n_cells_ = tri_ + nb;

    // simulation of simplicity: order by value, then pixel index
    std::vector<Cell> order(static_cast<std::size_t>(nv_));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Cell a, Cell b) { return values_[static_cast<std::size_t>(a)] < values_[static_cast<std::size_t>(b)]; });
    rank_.resize(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) rank_[static_cast<std::size_t>(order[i])] = static_cast<std::int64_t>(i);

    // boundary walk: top row, right column, bottom row, left column
    bindex_.assign(static_cast<std::size_t>(nv_), -1);
    for (int c = 0; c < W; ++c) bverts_.push_back(vertex_at(c, 0));
    for (int r = 1; r < H; ++r) bverts_.push_back(vertex_at(W - 1, r));
    for (int c = W - 2; c >= 0; --c) bverts_.push_back(vertex_at(c, H - 1));
    for (int r = H - 2; r >= 1; --r) bverts_.push_back(vertex_at(0, r));
    for (std::size_t k = 0; k < bverts_.size(); ++k) bindex_[static_cast<std::size_t>(bverts_[k])] = static_cast<int>(k);

    build_gradient();
}

int CubicalComplex::dim(Cell c) const {
    if (c < he_) return 0;
    if (c < sq_) return 1;
    return 2;
}

CubicalComplex::Cell CubicalComplex::boundary_edge(int k) const {
    const auto nb = static_cast<int>(bverts_.size());
    const Cell a = bverts_[static_cast<std::size_t>(k)], b = bverts_[static_cast<std::size_t>((k + 1) % nb)];
    const int W = spec_.width;
    const int ca = a % W, ra = a / W, cb = b % W, rb = b / W;
    if (ra == rb) return he_ + ra * (W - 1) + std::min(ca, cb);
    return ve_ + std::min(ra, rb) * W + ca;
}

int CubicalComplex::vertices(Cell c, std::array<Cell, 4>& out) const {
    const int W = spec_.width;
    const auto nb = static_cast<int>(bverts_.size());
    if (c <= vinf_) {
        out[0] = c;
        return 1;
    }
    if (c < ve_) {
        const int k = c - he_, r = k / (W - 1), col = k % (W - 1);
        out[0] = vertex_at(col, r);
        out[1] = vertex_at(col + 1, r);
        return 2;
    }
    if (c < cone_e_) {
        const int k = c - ve_, r = k / W, col = k % W;
        out[0] = vertex_at(col, r);
        out[1] = vertex_at(col, r + 1);
        return 2;
    }
    if (c < sq_) {
        out[0] = vinf_;
        out[1] = bverts_[static_cast<std::size_t>(c - cone_e_)];
        return 2;
    }
    if (c < tri_) {
        const int k = c - sq_, r = k / (W - 1), col = k % (W - 1);
        out[0] = vertex_at(col, r);
        out[1] = vertex_at(col + 1, r);
        out[2] = vertex_at(col, r + 1);
        out[3] = vertex_at(col + 1, r + 1);
        return 4;
    }
    const int k = c - tri_;
    out[0] = vinf_;
    out[1] = bverts_[static_cast<std::size_t>(k)];
    out[2] = bverts_[static_cast<std::size_t>((k + 1) % nb)];
    return 3;
}

int CubicalComplex::faces(Cell c, std::array<Cell, 4>& out) const {
    const int W = spec_.width;
    const auto nb = static_cast<int>(bverts_.size());
    switch (dim(c)) {
        case 0: return 0;
        case 1: {
            std::array<Cell, 4> v{};
            vertices(c, v);
            out[0] = v[0];
            out[1] = v[1];
            return 2;
        }
        default: break;
    }
    if (c < tri_) {
        const int k = c - sq_, r = k / (W - 1), col = k % (W - 1);
        out[0] = he_ + r * (W - 1) + col;
        out[1] = he_ + (r + 1) * (W - 1) + col;
        out[2] = ve_ + r * W + col;
        out[3] = ve_ + r * W + col + 1;
        return 4;
    }
    const int k = c - tri_;
    out[0] = boundary_edge(k);
    out[1] = cone_e_ + k;
    out[2] = cone_e_ + (k + 1) % nb;
    return 3;
}

int CubicalComplex::cofaces(Cell c, std::array<Cell, 5>& out) const {
    const int W = spec_.width, H = spec_.height;
    const auto nb = static_cast<int>(bverts_.size());
    int n = 0;
    if (c == vinf_) throw Error("cofaces of the virtual vertex are not enumerated");
    if (c < nv_) {
        const int col = c % W, r = c / W;
        if (col > 0) out[n++] = he_ + r * (W - 1) + col - 1;
        if (col < W - 1) out[n++] = he_ + r * (W - 1) + col;
        if (r > 0) out[n++] = ve_ + (r - 1) * W + col;
        if (r < H - 1) out[n++] = ve_ + r * W + col;
        if (const int k = bindex_[static_cast<std::size_t>(c)]; k >= 0) out[n++] = cone_e_ + k;
        return n;
    }
    auto tri_of = [&](Cell a, Cell b) {
        const int ka = bindex_[static_cast<std::size_t>(a)], kb = bindex_[static_cast<std::size_t>(b)];
        return tri_ + ((ka + 1) % nb == kb ? ka : kb);
    };
    if (c < ve_) {
        const int k = c - he_, r = k / (W - 1), col = k % (W - 1);
        if (r > 0) out[n++] = sq_ + (r - 1) * (W - 1) + col;
        if (r < H - 1) out[n++] = sq_ + r * (W - 1) + col;
        if (r == 0 || r == H - 1) out[n++] = tri_of(vertex_at(col, r), vertex_at(col + 1, r));
        return n;
    }
    if (c < cone_e_) {
        const int k = c - ve_, r = k / W, col = k % W;
        if (col > 0) out[n++] = sq_ + r * (W - 1) + col - 1;
        if (col < W - 1) out[n++] = sq_ + r * (W - 1) + col;
        if (col == 0 || col == W - 1) out[n++] = tri_of(vertex_at(col, r), vertex_at(col, r + 1));
        return n;
    }
    if (c < sq_) {
        const int k = c - cone_e_;
        out[n++] = tri_ + (k + nb - 1) % nb;
        out[n++] = tri_ + k;
        return n;
    }
    return 0;
}

CubicalComplex::Cell CubicalComplex::max_vertex(Cell c) const {
    std::array<Cell, 4> v{};
    const int n = vertices(c, v);
    Cell best = v[0];
    for (int i = 1; i < n; ++i)
        if (rank(v[static_cast<std::size_t>(i)]) > rank(best)) best = v[static_cast<std::size_t>(i)];
    return best;
}

double CubicalComplex::value(Cell c) const {
    const Cell v = max_vertex(c);
    return v == vinf_ ? -std::numeric_limits<double>::infinity() : values_[static_cast<std::size_t>(v)];
}

bool CubicalComplex::less(Cell a, Cell b) const {
    std::array<Cell, 4> va{}, vb{};
    const int na = vertices(a, va), nb = vertices(b, vb);
    std::array<std::int64_t, 4> ra{}, rb{};
    for (int i = 0; i < na; ++i) ra[static_cast<std::size_t>(i)] = rank(va[static_cast<std::size_t>(i)]);
    for (int i = 0; i < nb; ++i) rb[static_cast<std::size_t>(i)] = rank(vb[static_cast<std::size_t>(i)]);
    std::sort(ra.begin(), ra.begin() + na, std::greater<>());
    std::sort(rb.begin(), rb.begin() + nb, std::greater<>());
    return std::lexicographical_compare(ra.begin(), ra.begin() + na, rb.begin(), rb.begin() + nb);
}

Vec2 CubicalComplex::position(Cell c) const {
    const int W = spec_.width;
    if (c == vinf_) return {std::nan(""), std::nan("")};
    if (c < nv_) return {c % W, c / W};
    if (c >= cone_e_ && c < sq_) return position(bverts_[static_cast<std::size_t>(c - cone_e_)]);
    if (c >= tri_) {
        const auto nb = bverts_.size();
        const auto k = static_cast<std::size_t>(c - tri_);
        return 0.5 * (position(bverts_[k]) + position(bverts_[(k + 1) % nb]));
    }
    std::array<Cell, 4> v{};
    const int n = vertices(c, v);
    Vec2 p = Vec2::Zero();
    for (int i = 0; i < n; ++i) p += position(v[static_cast<std::size_t>(i)]);
    return p / n;
}

bool CubicalComplex::on_boundary(Cell c) const {
    if (is_cone(c)) return true;
    std::array<Cell, 4> v{};
    const int n = vertices(c, v);
    for (int i = 0; i < n; ++i)
        if (bindex_[static_cast<std::size_t>(v[static_cast<std::size_t>(i)])] >= 0) return true;
    return false;
}

void CubicalComplex::build_gradient() {
    pair_.assign(static_cast<std::size_t>(n_cells_), kNone);
    assigned_.assign(static_cast<std::size_t>(n_cells_), 0);
    assigned_[static_cast<std::size_t>(vinf_)] = 1;
    for (Cell v = 0; v < nv_; ++v) process_lower_star(v);
    for (Cell c = 0; c < n_cells_; ++c)
        if (pair_[static_cast<std::size_t>(c)] == kNone) critical_.push_back(c);
    std::sort(critical_.begin(), critical_.end(), [this](Cell a, Cell b) { return less(a, b); });
}

void CubicalComplex::process_lower_star(Cell v) {
    const std::int64_t rv = rank(v);
    std::vector<Cell> edges, squares;
    std::array<Cell, 5> co{};
    std::array<Cell, 4> fv{};
    const int nco = cofaces(v, co);
    for (int i = 0; i < nco; ++i) {
        const Cell e = co[static_cast<std::size_t>(i)];
        vertices(e, fv);
        const Cell w = fv[0] == v ? fv[1] : fv[0];
        if (rank(w) < rv) edges.push_back(e);
    }
    for (Cell e : edges) {
        const int n = cofaces(e, co);
        for (int i = 0; i < n; ++i) {
            const Cell f = co[static_cast<std::size_t>(i)];
            if (max_vertex(f) == v && std::find(squares.begin(), squares.end(), f) == squares.end()) squares.push_back(f);
        }
    }
    auto mark = [&](Cell c) { assigned_[static_cast<std::size_t>(c)] = 1; };
    auto link = [&](Cell a, Cell b) {
        pair_[static_cast<std::size_t>(a)] = b;
        pair_[static_cast<std::size_t>(b)] = a;
        mark(a);
        mark(b);
    };
    if (edges.empty()) {
        mark(v);
        return;
    }
    auto in_edges = [&](Cell e) { return std::find(edges.begin(), edges.end(), e) != edges.end(); };
    // faces of a lower-star square that lie in the lower star and are still free
    auto free_faces = [&](Cell f, Cell* last) {
        std::array<Cell, 4> fc{};
        const int n = faces(f, fc);
        int count = 0;
        for (int i = 0; i < n; ++i) {
            const Cell e = fc[static_cast<std::size_t>(i)];
            if (in_edges(e) && !assigned_[static_cast<std::size_t>(e)]) {
                ++count;
                if (last) *last = e;
            }
        }
        return count;
    };
    auto has_face = [&](Cell f, Cell e) {
        std::array<Cell, 4> fc{};
        const int n = faces(f, fc);
        return std::find(fc.begin(), fc.begin() + n, e) != fc.begin() + n;
    };
    auto pop_min = [&](std::vector<Cell>& q) {
        auto it = std::min_element(q.begin(), q.end(), [this](Cell a, Cell b) { return less(a, b); });
        const Cell c = *it;
        q.erase(it);
        return c;
    };

    const Cell delta = *std::min_element(edges.begin(), edges.end(), [this](Cell a, Cell b) { return less(a, b); });
    link(v, delta);
    std::vector<Cell> pq_zero, pq_one;
    for (Cell e : edges)
        if (e != delta) pq_zero.push_back(e);
    auto push_cofaces = [&](Cell e) {
        for (Cell f : squares)
            if (!assigned_[static_cast<std::size_t>(f)] && has_face(f, e) && free_faces(f, nullptr) == 1 &&
                std::find(pq_one.begin(), pq_one.end(), f) == pq_one.end())
                pq_one.push_back(f);
    };
    push_cofaces(delta);
    while (!pq_one.empty() || !pq_zero.empty()) {
        while (!pq_one.empty()) {
            const Cell a = pop_min(pq_one);
            if (assigned_[static_cast<std::size_t>(a)]) continue;
            Cell b = kNone;
            if (free_faces(a, &b) == 0) {
                pq_zero.push_back(a);
                continue;
            }
            link(b, a);
            pq_zero.erase(std::remove(pq_zero.begin(), pq_zero.end(), b), pq_zero.end());
            push_cofaces(b);
        }
        if (!pq_zero.empty()) {
            const Cell g = pop_min(pq_zero);
            if (assigned_[static_cast<std::size_t>(g)]) continue;
            mark(g);
            if (dim(g) == 1) push_cofaces(g);
        }
    }
}

std::vector<CubicalComplex::Cell> CubicalComplex::descend(Cell v) const {
    std::vector<Cell> path{v};
    std::array<Cell, 4> fv{};
    while (!is_critical(v)) {
        const Cell e = pair(v);
        vertices(e, fv);
        v = fv[0] == v ? fv[1] : fv[0];
        path.push_back(e);
        path.push_back(v);
    }
    return path;
}

CubicalComplex::Cell CubicalComplex::other_coface(Cell e, Cell f) const {
    std::array<Cell, 5> co{};
    const int n = cofaces(e, co);
    for (int i = 0; i < n; ++i)
        if (co[static_cast<std::size_t>(i)] != f) return co[static_cast<std::size_t>(i)];
    return kNone;
}

std::vector<CubicalComplex::Cell> CubicalComplex::ascend(Cell f) const {
    std::vector<Cell> path{f};
    while (!is_critical(f)) {
        const Cell e = pair(f);
        f = other_coface(e, f);
        path.push_back(e);
        path.push_back(f);
    }
    return path;
}

}  // namespace critcon
