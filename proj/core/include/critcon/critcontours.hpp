#pragma once

#include <optional>
#include <vector>

#include "critcon/grid.hpp"
#include "critcon/morse.hpp"
#include "critcon/render.hpp"

namespace critcon {

/// A separatrix (or a loop of two separatrices sharing a saddle and an
/// extremum) together with the derivatives that decide admission.
///
/// Along the path, u is the tangent and w = u rotated +90 degrees. The
/// contour is admitted under (K, M) iff K_achieved > K and M_achieved < M,
/// where
///   K_achieved = min( min_t |I_ww|, |I_uu| one vertex inside each end )
///   M_achieved = max_t max( |grad I|, |I_uw| )
/// Closed contours skip the endpoint term. Derivatives are per world unit;
/// the gradient is compared with M as is.
struct CriticalContour {
    std::vector<int> arcs;
    bool closed = false;
    std::vector<Vec2> polyline;  ///< pixel coordinates
    std::vector<Vec2> u;
    std::vector<Vec2> w;
    std::vector<double> i_ww;
    std::vector<double> i_uw;
    std::vector<double> grad_norm;
    /// |I_uu| one vertex inside the start and the end; NaN for loops.
    std::array<double, 2> endpoint_i_uu{};
    double K_achieved = 0.0;
    double M_achieved = 0.0;
    bool admitted = false;

    [[nodiscard]] bool admits(double K, double M) const { return K_achieved > K && M_achieved < M; }
};

struct ContourOptions {
    /// Tangent by central differences over +-halfwidth polyline vertices.
    /// Cell-centre paths are staircases; one vertex either side swings the
    /// tangent by 45 degrees.
    int tangent_halfwidth = 4;
    /// Evaluate with w -> -w.
    bool flip_w = false;
};

struct ContourThresholds {
    double K = 0.0;
    double M = 0.0;
};

/// The contour decomposition of the complex without any derivatives: chains
/// of same-kind separatrices joined at extrema. Closed contours are cycles of
/// that graph, open ones are its maximal paths between junctions or ends;
/// separatrices in neither stay on their own.
[[nodiscard]] std::vector<CriticalContour> contour_paths(const MSComplex& c);

/// Every candidate contour of the complex with its achieved thresholds;
/// `admitted` is false.
[[nodiscard]] std::vector<CriticalContour> candidate_contours(const ScalarGrid& img, const MSComplex& c,
                                                              const ContourOptions& opt = {});

/// K = 60th percentile of |I_ww| over all candidate vertices,
/// M = 3 x median |grad I| over the image.
[[nodiscard]] ContourThresholds default_thresholds(const ScalarGrid& img,
                                                   const std::vector<CriticalContour>& candidates);

/// Admitted contours only. Throws ParameterError unless K > 0 and M > 0.
[[nodiscard]] std::vector<CriticalContour> detect(const ScalarGrid& img, const MSComplex& c, double K, double M,
                                                  const ContourOptions& opt = {});
/// With default thresholds.
[[nodiscard]] std::vector<CriticalContour> detect(const ScalarGrid& img, const MSComplex& c,
                                                  const ContourOptions& opt = {});

struct KSweep {
    double M = 0.0;
    /// K_achieved of every candidate passing the M condition, ascending.
    std::vector<double> k_achieved;
    /// Breakpoints (K, count admitted for K in [this K, next K)); the first
    /// entry is K = 0.
    std::vector<std::pair<double, int>> steps;

    [[nodiscard]] int count_at(double K) const;
};

[[nodiscard]] KSweep k_sweep(const ScalarGrid& img, const MSComplex& c, double M, const ContourOptions& opt = {});

struct ConvergenceOptions {
    /// Cancel pairs below this fraction of the image range before detection.
    double simplify_fraction = 0.02;
    /// Slope per pixel along (0.8, 0.6), relative to the image maximum, that
    /// breaks ties in the zero background outside the blur support.
    double genericity_tilt = 1e-6;
    /// Distance used for the coverage column.
    double coverage_tol = 0.5;
    ContourOptions contour;
};

struct ConvergenceRow {
    double sigma = 0.0;
    bool found = false;
    double hausdorff = 0.0;
    double mean_distance = 0.0;
    /// Fraction of the arclength of alpha within coverage_tol of the matched contour.
    double coverage = 0.0;
    double K_achieved = 0.0;
    double M_achieved = 0.0;
    int admitted = 0;
};

/// The blurred image the experiment analyses at one sigma (blur plus the
/// genericity tilt).
[[nodiscard]] ScalarGrid convergence_image(const BlurSequence& seq, double sigma, const GridSpec& canvas,
                                           const ConvergenceOptions& opt = {});

/// For each sigma: blur, build and simplify the complex, detect, and match
/// the admitted contour closest (Hausdorff) to alpha. Missing thresholds
/// fall back to the data-driven defaults at that sigma. A sigma with no
/// admitted contour gives a row with found = false.
[[nodiscard]] std::vector<ConvergenceRow> convergence_experiment(const BlurSequence& seq, const GridSpec& canvas,
                                                                 std::optional<double> K = std::nullopt,
                                                                 std::optional<double> M = std::nullopt,
                                                                 const ConvergenceOptions& opt = {});

}  // namespace critcon
