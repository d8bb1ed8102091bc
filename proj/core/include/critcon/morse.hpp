#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "critcon/cubical.hpp"
#include "critcon/grid.hpp"

namespace critcon {

inline constexpr double kInfinitePersistence = std::numeric_limits<double>::infinity();

/// Node of the complex. Positions are pixel coordinates (col, row) of the
/// cell centre; the virtual boundary minimum has NaN position and value -inf.
struct CriticalPoint {
    int id = -1;
    CubicalComplex::Cell cell = CubicalComplex::kNone;
    Vec2 position = Vec2::Zero();
    int index = 0;  ///< 0 min, 1 saddle, 2 max
    double value = 0.0;
    double persistence = kInfinitePersistence;
    /// Position of the cell in the global cell order; ties in value are
    /// broken by this.
    std::int64_t order = 0;
    bool is_virtual = false;
    /// Cell touches the grid border or the cone to the virtual minimum.
    bool on_boundary = false;
};

enum class SeparatrixKind { SaddleMin, SaddleMax };
[[nodiscard]] std::string to_string(SeparatrixKind k);

struct Separatrix {
    int id = -1;
    int origin = -1;       ///< saddle node id
    int destination = -1;  ///< extremum node id
    SeparatrixKind kind = SeparatrixKind::SaddleMin;
    /// Cells from the saddle to the extremum. After simplification an arc
    /// may be a concatenation of several traced paths.
    std::vector<CubicalComplex::Cell> cells;
    /// Cell centres in pixel coordinates; cone cells map to the border and
    /// the virtual vertex is dropped.
    std::vector<Vec2> polyline;
};

/// Quadrilateral min, saddle, max, saddle. `arcs` runs
/// min -> saddles[0] -> max -> saddles[1] -> min; both saddles may coincide.
struct TwoCell {
    int id = -1;
    int min = -1;
    int max = -1;
    std::array<int, 2> saddles{-1, -1};
    std::array<int, 4> arcs{-1, -1, -1, -1};
    std::int64_t flag_count = 0;
    [[nodiscard]] double value_span(const std::vector<CriticalPoint>& nodes) const {
        return nodes[static_cast<std::size_t>(max)].value - nodes[static_cast<std::size_t>(min)].value;
    }
};

/// Morse-Smale complex of a sampled field. Immutable once built; node and
/// arc ids are dense indices into the vectors.
class MSComplex {
public:
    [[nodiscard]] const std::vector<CriticalPoint>& nodes() const { return nodes_; }
    [[nodiscard]] const std::vector<Separatrix>& arcs() const { return arcs_; }
    [[nodiscard]] const std::vector<TwoCell>& cells() const { return cells_; }
    [[nodiscard]] const CubicalComplex& cubical() const { return *cx_; }
    [[nodiscard]] const GridSpec& spec() const { return cx_->spec(); }

    /// Checksum of the source field.
    [[nodiscard]] std::uint64_t source_id() const { return source_id_; }
    [[nodiscard]] double threshold() const { return threshold_; }

    /// Counts of minima, saddles and maxima.
    [[nodiscard]] std::array<int, 3> index_counts() const;
    [[nodiscard]] int euler_characteristic() const;

    /// Arc ids incident to a node.
    [[nodiscard]] std::vector<int> incident_arcs(int node) const;

    /// Minimum id reached by descending from a grid vertex, and maximum id
    /// reached by ascending from a square.
    [[nodiscard]] int min_label(int col, int row) const;
    [[nodiscard]] int max_label(int col, int row) const;

private:
    friend MSComplex build_complex(const ScalarGrid&);
    friend MSComplex simplify(const MSComplex&, double);
    friend class MSBuilder;

    std::shared_ptr<const CubicalComplex> cx_;
    std::vector<CriticalPoint> nodes_;
    std::vector<Separatrix> arcs_;
    std::vector<TwoCell> cells_;
    /// Per grid vertex / per square; node ids.
    std::vector<int> vertex_min_;
    std::vector<int> square_max_;
    std::uint64_t source_id_ = 0;
    double threshold_ = 0.0;
};

/// Grid must be at least 8 x 8.
[[nodiscard]] MSComplex build_complex(const ScalarGrid& field);

struct PersistencePair {
    CriticalPoint saddle;
    CriticalPoint extremum;
    double persistence = 0.0;
};

/// Saddle-extremum pairs by sweeping saddles upward over minima and
/// downward over maxima. The virtual minimum and the global maximum stay
/// unpaired.
[[nodiscard]] std::vector<PersistencePair> persistence_pairs(const MSComplex& c);

/// Cancels saddle-extremum pairs with persistence < tau, smallest first.
[[nodiscard]] MSComplex simplify(const MSComplex& c, double tau);

struct GradientPath {
    std::vector<CubicalComplex::Cell> cells;
    /// Field value of each cell (value of its highest vertex).
    std::vector<double> values;
    std::vector<Vec2> polyline;
};

/// Ascending V-path from the square containing `seed` (pixel coordinates)
/// to a critical 2-cell.
[[nodiscard]] GradientPath gradient_path(const CubicalComplex& cx, const Vec2& seed);
[[nodiscard]] GradientPath gradient_path(const ScalarGrid& field, const Vec2& seed);

/// How node indices may be relabelled when comparing two complexes.
enum class IndexMatch { Same, Flipped };

/// Labelled multigraph isomorphism of the node/arc structure. The virtual
/// minimum only matches the virtual minimum. With Flipped, minima of `a`
/// match maxima of `b` and the virtual node is ignored.
[[nodiscard]] bool combinatorially_equal(const MSComplex& a, const MSComplex& b,
                                         IndexMatch match = IndexMatch::Same);

}  // namespace critcon
