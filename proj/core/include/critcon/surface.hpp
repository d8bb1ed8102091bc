#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "critcon/grid.hpp"
#include "critcon/jet.hpp"

namespace critcon {

/// Axis-aligned world rectangle [x0, x1] x [y0, y1].
struct Domain {
    double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
    [[nodiscard]] bool contains(const Vec2& p) const {
        return p.x() >= x0 && p.x() <= x1 && p.y() >= y0 && p.y() <= y1;
    }
};

/// Default slope added to every generated surface so sampled fields are
/// Morse (no symmetric ties).
inline constexpr double kDefaultTilt = 0.02;

/// Value and derivatives of a height function up to third order.
struct SurfaceDerivs {
    double f = 0.0;
    Vec2 grad = Vec2::Zero();
    Mat2 hess = Mat2::Zero();
    /// f_xxx, f_xxy, f_xyy, f_yyy.
    std::array<double, 4> third{};

    /// Third-derivative tensor contracted twice: T(a, b)_i = sum f_ijk a_j b_k.
    [[nodiscard]] Vec2 third_contract(const Vec2& a, const Vec2& b) const;
    /// Fully contracted third derivative T(a, b, c).
    [[nodiscard]] double third_directional(const Vec2& a, const Vec2& b, const Vec2& c) const {
        return third_contract(a, b).dot(c);
    }
};

struct SigmoidBumpParams {
    struct Bump {
        Vec2 center = Vec2::Zero();
        double radius = 1.0;
        double height = 1.0;
        double edge_width = 0.125;
    };
    std::vector<Bump> bumps;
    Vec2 tilt = Vec2::Zero();
    /// Isotropic quadratic bend of the base plane about the first center.
    double bend = 0.0;
};

struct GaussianBlobParams {
    struct Lobe {
        Vec2 center = Vec2::Zero();
        double amplitude = 1.0;
        /// Inverse covariance (symmetric positive definite).
        Mat2 precision = Mat2::Identity();
    };
    std::vector<Lobe> lobes;
    Vec2 tilt = Vec2::Zero();
};

/// Gaussian-profile ridge whose crest follows y - y0 = bend (x - x0)^2.
struct RidgeParams {
    Vec2 origin = Vec2::Zero();
    double height = 1.0;
    double width = 1.0;
    double bend = 0.0;
    /// Linear modulation of height along the crest: height * (1 + taper (x - x0)).
    double taper = 0.0;
    Vec2 tilt = Vec2::Zero();
};

/// Cubic Taylor patch about `origin`:
/// f = c0 + c1 x + c2 y + c3 x^2 + c4 x y + c5 y^2 + c6 x^3 + c7 x^2 y + c8 x y^2 + c9 y^3
/// with x, y measured from `origin`. Quadratic and tilted-plane surfaces are
/// special cases.
struct PolynomialParams {
    Vec2 origin = Vec2::Zero();
    std::array<double, 10> c{};
};

enum class SurfaceKind { SigmoidalBump, GaussianBlobSum, Ridge, Quadratic, TiltedPlane, TaylorPatch };

[[nodiscard]] std::string to_string(SurfaceKind k);
[[nodiscard]] SurfaceKind surface_kind_from_string(const std::string& s);

/// Closed-form height field with exact derivatives to third order.
/// Immutable; evaluation is pure and thread-safe.
class AnalyticSurface {
public:
    using Params = std::variant<SigmoidBumpParams, GaussianBlobParams, RidgeParams, PolynomialParams>;

    AnalyticSurface(SurfaceKind kind, Params params, Domain domain);

    [[nodiscard]] SurfaceKind kind() const { return kind_; }
    [[nodiscard]] const Params& params() const { return params_; }
    [[nodiscard]] const Domain& domain() const { return domain_; }

    /// Height as a third-order jet about p.
    [[nodiscard]] Jet<3> jet(const Vec2& p) const;
    [[nodiscard]] SurfaceDerivs eval(const Vec2& p) const;
    [[nodiscard]] double height(const Vec2& p) const;

private:
    SurfaceKind kind_;
    Params params_;
    Domain domain_;
};

// --- constructors -----------------------------------------------------------

/// Rotationally symmetric sigmoid of the radial coordinate on a tilted plane.
/// The tilt direction is fixed to (0.8, 0.6) so a nonzero base_tilt breaks
/// every symmetry of the bump. edge_width defaults to radius / 8.
[[nodiscard]] AnalyticSurface make_sigmoidal_bump(const Vec2& center, double radius, double height,
                                                  double base_tilt, const Domain& domain,
                                                  double edge_width = 0.0, double bend = 0.0);

/// Several sigmoid bumps on a shared tilted plane.
[[nodiscard]] AnalyticSurface make_bumps(std::vector<SigmoidBumpParams::Bump> bumps, double base_tilt,
                                         const Domain& domain, double bend = 0.0);

/// Seeded sum of n_lobes anisotropic Gaussians plus a small tilt.
[[nodiscard]] AnalyticSurface make_blob(std::uint64_t seed, int n_lobes, const Domain& domain,
                                        double tilt = kDefaultTilt);

[[nodiscard]] AnalyticSurface make_ridge(const RidgeParams& params, const Domain& domain);
[[nodiscard]] AnalyticSurface make_quadratic(double cxx, double cxy, double cyy, const Vec2& slope,
                                             const Domain& domain, const Vec2& origin = Vec2::Zero());
[[nodiscard]] AnalyticSurface make_plane(double offset, const Vec2& slope, const Domain& domain);
[[nodiscard]] AnalyticSurface make_taylor_patch(const std::array<double, 10>& c, const Domain& domain,
                                                const Vec2& origin = Vec2::Zero());

// --- derived fields ---------------------------------------------------------

/// Unit normals n = (-f_x, -f_y, 1) / sqrt(1 + |grad f|^2) on a lattice.
struct NormalField {
    GridSpec spec;
    std::vector<Vec3> n;

    [[nodiscard]] const Vec3& at(int col, int row) const {
        return n[static_cast<std::size_t>(row) * static_cast<std::size_t>(spec.width) +
                 static_cast<std::size_t>(col)];
    }
};

[[nodiscard]] Vec3 normal_at(const AnalyticSurface& s, const Vec2& p);
/// Throws ParameterError if the lattice leaves the surface domain.
[[nodiscard]] NormalField normals(const AnalyticSurface& s, const GridSpec& grid);
/// Height samples f on the lattice.
[[nodiscard]] ScalarGrid sample_height(const AnalyticSurface& s, const GridSpec& grid);
/// Slant arccos(n_z) in radians, in [0, pi/2).
[[nodiscard]] ScalarGrid slant_field(const NormalField& n);

/// K = det(H) / (1 + |grad f|^2)^2.
[[nodiscard]] double gaussian_curvature(const AnalyticSurface& s, const Vec2& p);
[[nodiscard]] double gaussian_curvature(const SurfaceDerivs& d);

/// Weingarten map (sign chosen so an upward paraboloid has positive
/// curvatures) in an orthonormal basis of the tangent plane.
[[nodiscard]] Mat2 shape_operator(const AnalyticSurface& s, const Vec2& p);
[[nodiscard]] Mat2 shape_operator(const SurfaceDerivs& d);

/// Lift of an image-plane vector a to the surface tangent vector
/// df(a) = (a, grad f . a).
[[nodiscard]] Vec3 lift_tangent(const SurfaceDerivs& d, const Vec2& a);

/// Shape operator applied to the lift of image vector a, as a 3-vector:
/// dN(a) = -(derivative of the unit normal along a).
[[nodiscard]] Vec3 shape_map(const SurfaceDerivs& d, const Vec2& a);

}  // namespace critcon
