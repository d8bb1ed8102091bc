#include "critcon/graph.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <set>

namespace critcon {

int LabelledGraph::add_node(int lab) {
    label.push_back(lab);
    adj.emplace_back();
    return static_cast<int>(label.size()) - 1;
}

void LabelledGraph::add_edge(int u, int v) {
    ++adj[static_cast<std::size_t>(u)][v];
    if (u != v) ++adj[static_cast<std::size_t>(v)][u];
    ++edges;
}

LabelledGraph LabelledGraph::without_label(int lab) const {
    LabelledGraph t;
    std::vector<int> id(label.size(), -1);
    for (std::size_t i = 0; i < label.size(); ++i)
        if (label[i] != lab) id[i] = t.add_node(label[i]);
    for (std::size_t i = 0; i < label.size(); ++i)
        for (auto [j, m] : adj[i]) {
            const int u = id[i], v = id[static_cast<std::size_t>(j)];
            if (u < 0 || v < 0 || u > v) continue;
            for (int k = 0; k < m; ++k) t.add_edge(u, v);
        }
    return t;
}

namespace {

/// Colour refinement run jointly on both graphs so colours are comparable.
void refine(const LabelledGraph& a, const LabelledGraph& b, std::vector<int>& ca, std::vector<int>& cb) {
    ca = a.label;
    cb = b.label;
    for (std::size_t round = 0; round < a.label.size() + 1; ++round) {
        std::map<std::pair<int, std::vector<std::pair<int, int>>>, int> dict;
        auto step = [&](const LabelledGraph& g, const std::vector<int>& col) {
            std::vector<int> next(col.size());
            for (std::size_t i = 0; i < col.size(); ++i) {
                std::vector<std::pair<int, int>> sig;
                for (auto [j, m] : g.adj[i])
                    sig.emplace_back(static_cast<std::size_t>(j) == i ? -1 - col[i] : col[static_cast<std::size_t>(j)], m);
                std::sort(sig.begin(), sig.end());
                auto [it, _] = dict.try_emplace({col[i], std::move(sig)}, static_cast<int>(dict.size()));
                next[i] = it->second;
            }
            return next;
        };
        auto na = step(a, ca);
        auto nb = step(b, cb);
        const bool stable = std::set<int>(na.begin(), na.end()).size() == std::set<int>(ca.begin(), ca.end()).size();
        ca = std::move(na);
        cb = std::move(nb);
        if (stable) break;
    }
}

int multiplicity(const LabelledGraph& g, int u, int v) {
    const auto& m = g.adj[static_cast<std::size_t>(u)];
    auto it = m.find(v);
    return it == m.end() ? 0 : it->second;
}

}  // namespace

bool isomorphic(const LabelledGraph& ga, const LabelledGraph& gb) {
    if (ga.label.size() != gb.label.size() || ga.edges != gb.edges) return false;

    std::vector<int> ca, cb;
    refine(ga, gb, ca, cb);
    {
        auto sa = ca, sb = cb;
        std::sort(sa.begin(), sa.end());
        std::sort(sb.begin(), sb.end());
        if (sa != sb) return false;
    }

    const std::size_t n = ga.label.size();
    // visit order: BFS so each node after the first has a mapped neighbour
    std::vector<int> order;
    std::vector<char> seen(n, 0);
    for (std::size_t s = 0; s < n; ++s) {
        if (seen[s]) continue;
        std::queue<int> q;
        q.push(static_cast<int>(s));
        seen[s] = 1;
        while (!q.empty()) {
            const int u = q.front();
            q.pop();
            order.push_back(u);
            for (auto [v, m] : ga.adj[static_cast<std::size_t>(u)])
                if (!seen[static_cast<std::size_t>(v)]) {
                    seen[static_cast<std::size_t>(v)] = 1;
                    q.push(v);
                }
        }
    }
    std::vector<int> fwd(n, -1), inv(n, -1);
    auto consistent = [&](int u, int x) {
        if (ca[static_cast<std::size_t>(u)] != cb[static_cast<std::size_t>(x)]) return false;
        if (multiplicity(ga, u, u) != multiplicity(gb, x, x)) return false;
        for (auto [v, m] : ga.adj[static_cast<std::size_t>(u)]) {
            const int y = fwd[static_cast<std::size_t>(v)];
            if (y >= 0 && multiplicity(gb, x, y) != m) return false;
        }
        for (auto [y, m] : gb.adj[static_cast<std::size_t>(x)]) {
            const int v = inv[static_cast<std::size_t>(y)];
            if (v >= 0 && multiplicity(ga, u, v) != m) return false;
        }
        return true;
    };
    std::function<bool(std::size_t)> extend = [&](std::size_t k) -> bool {
        if (k == n) return true;
        const int u = order[k];
        // candidates: unmapped neighbours of the image of a mapped neighbour, else all
        std::vector<int> cand;
        int anchor = -1;
        for (auto [v, m] : ga.adj[static_cast<std::size_t>(u)])
            if (fwd[static_cast<std::size_t>(v)] >= 0) {
                anchor = fwd[static_cast<std::size_t>(v)];
                break;
            }
        if (anchor >= 0) {
            for (auto [y, m] : gb.adj[static_cast<std::size_t>(anchor)])
                if (inv[static_cast<std::size_t>(y)] < 0) cand.push_back(y);
        } else {
            for (std::size_t y = 0; y < n; ++y)
                if (inv[y] < 0) cand.push_back(static_cast<int>(y));
        }
        for (int x : cand) {
            if (!consistent(u, x)) continue;
            fwd[static_cast<std::size_t>(u)] = x;
            inv[static_cast<std::size_t>(x)] = u;
            if (extend(k + 1)) return true;
            fwd[static_cast<std::size_t>(u)] = -1;
            inv[static_cast<std::size_t>(x)] = -1;
        }
        return false;
    };
    return extend(0);
}

}  // namespace critcon
