#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "critcon/surface.hpp"

namespace critcon {

/// 1-3: the second-order shading equations in the {u, v} gradient/isophote
/// frame. 4: the curvature form of equation 1. 5a-5c: the ridge reductions.
enum class EqId { E1, E2, E3, E4, E5a, E5b, E5c };

[[nodiscard]] std::string to_string(EqId id);
[[nodiscard]] EqId eq_id_from_string(const std::string& s);

/// Relative residuals divide by max(|lhs|, |rhs|, floor). For the equations
/// that are components of the image Hessian (1-3, 5a-5c) the floor is the
/// largest of kResidualFloor, the largest single right-hand-side term, and the
/// Frobenius norm of the image Hessian, so a small component is judged
/// against the local second-order signal. Equation 4 uses its terms and the
/// correction.
inline constexpr double kResidualFloor = 1e-12;

struct EquationResidual {
    Vec2 point = Vec2::Zero();
    EqId eq = EqId::E1;
    double lhs = 0;
    double rhs = 0;
    double abs_residual = 0;
    double rel_residual = 0;
    double det_h = 0;
    /// Spectral norm of H^-1; infinite when H is singular.
    double hinv_norm = 0;
    /// Equation 4 only: -(grad I . H^-1 T(v, v)) / I, the term equation 4 drops.
    double correction = 0;
    /// Ridge reductions only: angle between u and the flat principal direction.
    double misalignment_deg = 0;
};

enum class DerivPath { Analytic, FiniteDifference };

struct ShadingOptions {
    /// |det H| threshold; negative selects default_delta_h(surface).
    double delta_h = -1;
    /// Minimum |grad I| for the gradient frame, intensity per world unit.
    double epsilon_grad = 1e-6;
    double theta_align_deg = 5.0;
    /// Minimum intensity for equation 4.
    double intensity_floor = 1e-6;
    double albedo = 1.0;
    DerivPath path = DerivPath::Analytic;
    /// Stencil step of the finite-difference path, world units.
    double fd_step = 1.0;
    /// Use -v instead of u turned +90. Results must not depend on it.
    bool flip_v = false;
};

/// 1e-6 * (A / D^2)^2 with A the sampled height range and D the domain width:
/// a millionth of the squared curvature scale of the surface.
[[nodiscard]] double default_delta_h(const AnalyticSurface& s);

/// Intensity and its image derivatives at a point (world units).
struct ImageLocal {
    double value = 0;
    Vec2 grad = Vec2::Zero();
    Mat2 hess = Mat2::Zero();
};

/// Chain-rule derivatives of I = albedo * L . N(f).
[[nodiscard]] ImageLocal image_local_analytic(const AnalyticSurface& s, const Vec3& light, const Vec2& p,
                                              double albedo = 1.0);
/// Central differences of the rendered intensity on a lattice through p.
[[nodiscard]] ImageLocal image_local_fd(const AnalyticSurface& s, const Vec3& light, const Vec2& p, double h,
                                        double albedo = 1.0);

/// Equations 1-3 at p. Throws ConditioningError when |det H| <= delta_h and
/// DomainError when p is shadowed or the gradient frame is undefined.
[[nodiscard]] EquationResidual eval_shading_eq(const AnalyticSurface& s, const Vec3& light, const Vec2& p, int eq,
                                               const ShadingOptions& opt = {});
[[nodiscard]] std::array<EquationResidual, 3> eval_shading_eqs(const AnalyticSurface& s, const Vec3& light,
                                                               const Vec2& p, const ShadingOptions& opt = {});

/// Equation 4: lhs = grad I . kappa / I, rhs = |dN(v)|^2. The residual
/// lhs - rhs equals the reported correction term exactly.
[[nodiscard]] EquationResidual eval_eq4(const AnalyticSurface& s, const Vec3& light, const Vec2& p,
                                        const ShadingOptions& opt = {});

/// Ridge reductions at a point on an intensity ridge. u is the ridge direction
/// (image Hessian eigenvector with the smaller |eigenvalue|), v = u turned +90,
/// and l2 is the v-hat coordinate of the tangential light in {df(u), df(v)}.
/// Throws DomainError when the flat principal direction is further than
/// theta_align from u.
[[nodiscard]] std::vector<EquationResidual> eval_ridge_eqs(const AnalyticSurface& s, const Vec3& light,
                                                           const Vec2& p, const ShadingOptions& opt = {});

struct SweepRow {
    EqId eq = EqId::E1;
    /// -1 for the unstratified row.
    int decile = -1;
    double det_lo = 0;
    double det_hi = 0;
    std::size_t count = 0;
    double median = 0;
    double p95 = 0;
    double max = 0;
};

struct SweepReport {
    std::vector<EquationResidual> residuals;
    std::vector<SweepRow> rows;
    /// (light, point) pairs that failed a precondition.
    std::size_t skipped = 0;

    [[nodiscard]] const SweepRow* overall(EqId eq) const;
    void write_csv(std::ostream& os) const;
};

/// Evaluates every (light, point) pair for each requested equation and
/// aggregates rel_residual statistics per |det H| decile.
[[nodiscard]] SweepReport residual_sweep(const AnalyticSurface& s, const std::vector<Vec3>& lights,
                                         const std::vector<Vec2>& points, const std::vector<EqId>& eqs,
                                         const ShadingOptions& opt = {});

/// Nearest-rank percentile of an unsorted sample, q in [0, 1].
[[nodiscard]] double percentile(std::vector<double> v, double q);

}  // namespace critcon
