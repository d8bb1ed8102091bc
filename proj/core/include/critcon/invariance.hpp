#pragma once

#include <optional>
#include <vector>

#include "critcon/critcontours.hpp"
#include "critcon/graph.hpp"
#include "critcon/morse.hpp"

namespace critcon {

/// Minimum fraction of a contour that must lie within delta of its partner.
inline constexpr double kMatchFraction = 0.9;

/// 3 px at 256 pixels across, linear in resolution.
[[nodiscard]] double default_delta(const GridSpec& g);

struct ContourPair {
    int a = 0;  ///< index into the A list
    int b = 0;
    /// Average of the two directed mean distances, px.
    double mean = 0.0;
    /// Symmetric Hausdorff distance, px.
    double max = 0.0;
    /// Fraction of the arclength of A within delta of B.
    double fraction = 0.0;
};

struct MatchReport {
    double delta = 0.0;
    std::vector<ContourPair> pairs;
    std::vector<int> unmatched_a;
    std::vector<int> unmatched_b;
    bool graph_equivalent = false;
};

/// Adjacency multigraph of a contour list: nodes are the critical points a
/// contour ends at, labelled by index (3 for the virtual minimum); an open
/// contour is an edge between its ends. A loop is a self-loop on its highest
/// maximum (ridge loops) or lowest minimum (valley loops).
[[nodiscard]] LabelledGraph contour_graph(const std::vector<CriticalContour>& contours, const MSComplex& c,
                                          IndexMatch match = IndexMatch::Same);

/// Pairs contours of A with contours of B. A pair is eligible when at least
/// kMatchFraction of B lies in the delta-tube of A and vice versa; eligible
/// pairs are taken greedily by (mean, max, a, b). graph_equivalent compares
/// the adjacency graphs of the full A and B lists.
///
/// Throws DomainError if the complexes live on different lattices and
/// ParameterError unless delta > 0.
[[nodiscard]] MatchReport match_contours(const std::vector<CriticalContour>& a, const MSComplex& ca,
                                         const std::vector<CriticalContour>& b, const MSComplex& cb, double delta,
                                         IndexMatch match = IndexMatch::Same);

/// match_contours against every contour path of the slant complex.
/// unmatched_b is left empty: most slant separatrices have no image
/// counterpart by design. graph_equivalent compares the image contours with
/// their matched slant partners, allowing the min/max flip.
[[nodiscard]] MatchReport align_with_slant(const std::vector<CriticalContour>& image_contours,
                                           const MSComplex& image_complex, const MSComplex& slant_complex,
                                           double delta);

struct BumpRecord {
    int contour = 0;  ///< index into the contour list
    int minimum = 0;  ///< node id of the enclosed slant minimum
    Vec2 minimum_position = Vec2::Zero();
    /// Enclosed area in world units squared.
    double area = 0.0;
};

/// Closed contours whose interior holds exactly one slant minimum and no
/// slant maximum. Critical points within half a pixel of the contour count
/// as on it, not inside.
[[nodiscard]] std::vector<BumpRecord> detect_bump_template(const MSComplex& slant_complex,
                                                           const std::vector<CriticalContour>& contours);

/// True if q is inside the closed polygon (even-odd rule).
[[nodiscard]] bool point_in_polygon(const std::vector<Vec2>& poly, const Vec2& q);

/// A constraint curve in pixel coordinates with one target value per vertex;
/// values are linear along each segment.
struct ScaffoldCurve {
    std::vector<Vec2> polyline;
    bool closed = false;
    std::vector<double> values;
};

struct ScaffoldSolution {
    ScalarGrid field;
    /// max |5-point Laplacian| over free pixels, relative to the data range.
    double relative_residual = 0.0;
    int constrained_pixels = 0;
};

/// Solve the discrete Laplace equation with Dirichlet data on the pixels the
/// curves pass through and, if `boundary` is given, on the border pixels
/// (taken from `boundary`). Without `boundary` the border is reflecting.
/// Throws ParameterError when there are no constraints or a value count does
/// not match, DomainError on a lattice mismatch, and DomainError if the
/// residual exceeds 1e-8.
[[nodiscard]] ScaffoldSolution reconstruct_scaffold(const std::vector<ScaffoldCurve>& curves,
                                                    const std::optional<ScalarGrid>& boundary,
                                                    const GridSpec& grid);

/// Scaffold curves from contours with values sampled (bilinearly) from `field`.
[[nodiscard]] std::vector<ScaffoldCurve> scaffold_from(const std::vector<CriticalContour>& contours,
                                                       const ScalarGrid& field);

}  // namespace critcon
