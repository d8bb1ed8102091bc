#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "critcon/grid.hpp"

namespace critcon {

/// Cubical complex of a pixel lattice (vertices = pixels, edges, squares)
/// closed into a sphere by a cone to one virtual vertex below every value:
/// one cone edge per boundary pixel and one cone triangle per boundary edge.
/// Carries the discrete gradient of the sampled field computed lower star by
/// lower star (Robins, Wood and Sheppard), with ties broken by pixel index.
class CubicalComplex {
public:
    using Cell = std::int32_t;
    static constexpr Cell kNone = -1;

    explicit CubicalComplex(const ScalarGrid& field);

    [[nodiscard]] const GridSpec& spec() const { return spec_; }
    [[nodiscard]] Cell num_cells() const { return n_cells_; }
    [[nodiscard]] Cell virtual_vertex() const { return vinf_; }

    [[nodiscard]] int dim(Cell c) const;
    /// Boundary cells (codimension one). Returns the count written.
    int faces(Cell c, std::array<Cell, 4>& out) const;
    /// Cofaces (dimension + 1). Not available for the virtual vertex.
    int cofaces(Cell c, std::array<Cell, 5>& out) const;
    int vertices(Cell c, std::array<Cell, 4>& out) const;

    [[nodiscard]] Cell max_vertex(Cell c) const;
    /// Position of a vertex in the total order; the virtual vertex is -1.
    [[nodiscard]] std::int64_t rank(Cell vertex) const {
        return vertex == vinf_ ? -1 : rank_[static_cast<std::size_t>(vertex)];
    }
    /// Field value of the cell's highest vertex; -inf for the virtual vertex.
    [[nodiscard]] double value(Cell c) const;
    /// Total order on cells: descending vertex ranks compared lexicographically.
    [[nodiscard]] bool less(Cell a, Cell b) const;

    /// Cell centre in fractional pixel coordinates. Cone cells map onto the
    /// boundary; the virtual vertex has no position (NaN).
    [[nodiscard]] Vec2 position(Cell c) const;
    [[nodiscard]] bool is_cone(Cell c) const { return c == vinf_ || (c >= cone_e_ && c < sq_) || c >= tri_; }
    [[nodiscard]] bool on_boundary(Cell c) const;

    [[nodiscard]] Cell pair(Cell c) const { return pair_[static_cast<std::size_t>(c)]; }
    [[nodiscard]] bool is_critical(Cell c) const { return pair_[static_cast<std::size_t>(c)] == kNone; }
    /// Critical cells sorted by the total order.
    [[nodiscard]] const std::vector<Cell>& critical_cells() const { return critical_; }

    /// Vertex V-path from a vertex down to a critical vertex (inclusive).
    [[nodiscard]] std::vector<Cell> descend(Cell vertex) const;
    /// Dual V-path from a 2-cell up to a critical 2-cell (inclusive): faces
    /// alternate with the edges that link them.
    [[nodiscard]] std::vector<Cell> ascend(Cell face) const;
    /// The other coface of an edge (every edge has exactly two).
    [[nodiscard]] Cell other_coface(Cell edge, Cell face) const;

    [[nodiscard]] Cell vertex_at(int col, int row) const { return row * spec_.width + col; }
    [[nodiscard]] Cell square_at(int col, int row) const { return sq_ + row * (spec_.width - 1) + col; }

private:
    void build_gradient();
    void process_lower_star(Cell v);
    [[nodiscard]] Cell boundary_edge(int k) const;

    GridSpec spec_;
    std::vector<double> values_;
    std::vector<std::int64_t> rank_;
    // cell id layout: vertices, virtual vertex, horizontal edges, vertical
    // edges, cone edges, squares, cone triangles
    Cell nv_ = 0, vinf_ = 0, he_ = 0, ve_ = 0, cone_e_ = 0, sq_ = 0, tri_ = 0, n_cells_ = 0;
    std::vector<Cell> bverts_;
    std::vector<int> bindex_;
    std::vector<Cell> pair_;
    std::vector<std::uint8_t> assigned_;
    std::vector<Cell> critical_;
};

}  // namespace critcon
