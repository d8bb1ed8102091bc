#pragma once

#include <cstdint>
#include <vector>

#include "critcon/grid.hpp"

namespace critcon {

/// Image Hessian from second central differences (one-sided at the border).
struct HessianGrid {
    ScalarGrid xx;
    ScalarGrid xy;
    ScalarGrid yy;

    [[nodiscard]] Mat2 at(int col, int row) const {
        Mat2 h;
        h << xx(col, row), xy(col, row), xy(col, row), yy(col, row);
        return h;
    }
    [[nodiscard]] Mat2 sample(double col, double row) const {
        const double b = xy.sample(col, row);
        Mat2 h;
        h << xx.sample(col, row), b, b, yy.sample(col, row);
        return h;
    }
};

/// Central differences in the interior, second-order one-sided at the border.
/// Units are intensity per world unit.
[[nodiscard]] VectorGrid gradient(const ScalarGrid& img);
[[nodiscard]] HessianGrid hessian(const ScalarGrid& img);
/// Five-point Laplacian, equal to xx + yy of hessian().
[[nodiscard]] ScalarGrid laplacian(const ScalarGrid& img);

/// 1e-3 of the dynamic range per world unit.
[[nodiscard]] double default_grad_epsilon(const ScalarGrid& img);

/// Gradient/isophote frame. v is u turned +90 degrees; the sign of v carries no
/// meaning and callers must not rely on it.
struct FlowFrame {
    GridSpec spec;
    VectorGrid u;
    VectorGrid v;
    ScalarGrid magnitude;
    std::vector<std::uint8_t> valid;
    double epsilon = 0;

    [[nodiscard]] bool is_valid(int col, int row) const {
        return valid[static_cast<std::size_t>(row) * spec.width + col] != 0;
    }
    [[nodiscard]] std::size_t valid_count() const;
};

/// Frame of the shading flow. Pixels with |grad I| < epsilon are masked. An
/// optional Gaussian pre-smoothing (pixels) is applied first when sigma_pre > 0.
[[nodiscard]] FlowFrame shading_flow(const ScalarGrid& img, double epsilon, double sigma_pre = 0);
[[nodiscard]] FlowFrame shading_flow(const ScalarGrid& img);

struct FrameDerivatives {
    ScalarGrid uu;
    ScalarGrid uv;
    ScalarGrid vv;
    std::vector<std::uint8_t> valid;
};

/// I_ab = a^T H b per valid pixel; masked pixels hold NaN.
[[nodiscard]] FrameDerivatives frame_second_derivatives(const HessianGrid& h, const FlowFrame& frame);
[[nodiscard]] FrameDerivatives frame_second_derivatives(const ScalarGrid& img, const FlowFrame& frame);

/// Second derivatives in a curve frame {u = tangent, w = u turned +90}.
struct CurveFrameDerivs {
    double uu = 0;
    double uw = 0;
    double ww = 0;
};
[[nodiscard]] CurveFrameDerivs curve_frame_derivatives(const Mat2& h, const Vec2& tangent);
/// Hessian bilinearly sampled at a fractional pixel position.
[[nodiscard]] CurveFrameDerivs curve_frame_derivatives(const HessianGrid& h, const Vec2& px, const Vec2& tangent);

/// Level-curve curvature vector kappa = -(I_vv / |grad I|) u, pointing at the
/// centre of the osculating circle. Masked pixels hold zero.
struct CurvatureField {
    VectorGrid kappa;
    std::vector<std::uint8_t> valid;
};
[[nodiscard]] CurvatureField isophote_curvature(const ScalarGrid& img, double epsilon);
[[nodiscard]] CurvatureField isophote_curvature(const ScalarGrid& img);

/// Polyline in fractional pixel coordinates.
struct Polyline {
    std::vector<Vec2> points;
    bool closed = false;

    [[nodiscard]] double length() const;
};

/// Marching squares. Ambiguous cells are resolved by the cell-centre average.
[[nodiscard]] std::vector<Polyline> level_set(const ScalarGrid& img, double level);

}  // namespace critcon
