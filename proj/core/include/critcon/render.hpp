#pragma once

#include <string>
#include <variant>
#include <vector>

#include "critcon/grid.hpp"
#include "critcon/surface.hpp"

namespace critcon {

/// I = albedo * max(L . n, 0).
struct Lambertian {
    Vec3 light{0, 0, 1};
    double albedo = 1.0;
};

/// Convex blend of a Lambertian term and a Blinn lobe (n . h)^exponent on the
/// half vector h between the light and the view axis. The lobe peaks at 1.
struct Specular {
    Vec3 light{0, 0, 1};
    double exponent = 20.0;
    double diffuse_weight = 0.6;
    double specular_weight = 0.4;
};

/// I = slant * 2 / pi, in [0, 1).
struct SlantImage {};

/// I = g(L . n) with the concave monotone profile g(c) = max(c, 0)^gamma.
struct MonotoneOfCos {
    Vec3 light{0, 0, 1};
    double gamma = 0.5;
};

/// Weighted sum of Lambertian lights. Outside the admissible class once the
/// lights separate; exists so the probe has something to reject.
struct LambertianSum {
    std::vector<Vec3> lights;
    std::vector<double> weights;
};

using RenderSpec = std::variant<Lambertian, Specular, SlantImage, MonotoneOfCos, LambertianSum>;

/// Throws ParameterError on a unit-length, front-hemisphere or weight violation.
void validate(const RenderSpec& spec);
[[nodiscard]] std::string describe(const RenderSpec& spec);

/// The rendering function F applied to one unit normal, before clamping.
[[nodiscard]] double shade(const Vec3& n, const RenderSpec& spec);

inline constexpr double kShadowWarningFraction = 0.5;

struct RenderResult {
    ScalarGrid image;
    /// Fraction of pixels facing away from the (first) light.
    double shadow_fraction = 0.0;
    bool shadow_warning = false;
};

/// I(x, y) = F(N(x, y)) clamped to [0, 1].
[[nodiscard]] RenderResult render(const NormalField& n, const RenderSpec& spec);

struct AdmissibilityReport {
    int maxima = 0;
    /// Largest |delta I| / angle(n1, n2) over neighbouring sphere pixels.
    double variation_ratio = 0.0;
    [[nodiscard]] bool admissible() const { return maxima == 1; }
};

/// Render the visible unit hemisphere and count strict local maxima.
[[nodiscard]] AdmissibilityReport admissibility_probe(const RenderSpec& spec, int resolution = 129);

/// A weighted contour to be concentrated into a sequence of shaded images.
struct BlurSequence {
    /// Contour vertices in pixel coordinates of the canvas.
    std::vector<Vec2> contour;
    /// Mass per unit arclength at each vertex; linear in between.
    std::vector<double> density;
    bool closed = false;
    /// Strictly decreasing blur widths in pixels.
    std::vector<double> sigmas;

    /// Throws ParameterError on an empty/zero-length contour, mismatched
    /// density, non-decreasing schedule, or nonzero open-contour endpoints.
    void validate() const;
    [[nodiscard]] double length_px() const;
};

/// Splat the contour mass (per unit arclength) onto the canvas and convolve
/// with an isotropic Gaussian of width sigma pixels. Values are mass per
/// world area, so sum * spacing^2 is the contour mass.
[[nodiscard]] ScalarGrid blur_contour(const BlurSequence& seq, double sigma, const GridSpec& canvas);

/// Separable Gaussian convolution (kernel truncated at floor(3 sigma),
/// renormalized, zero padding).
[[nodiscard]] ScalarGrid gaussian_blur(const ScalarGrid& g, double sigma_px);

}  // namespace critcon
