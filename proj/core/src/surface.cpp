#include "critcon/surface.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

namespace critcon {

namespace {

using J = Jet<3>;

/// Logistic step 1 / (1 + e^z) with its first three derivatives.
std::array<double, 4> logistic_step(double z) {
    const double s = z > 0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
    const double d1 = -s * (1.0 - s);
    const double d2 = s * (1.0 - s) * (1.0 - 2.0 * s);
    const double d3 = -(1.0 - 6.0 * s + 6.0 * s * s) * s * (1.0 - s);
    return {s, d1, d2, d3};
}

J tilt_jet(const Vec2& tilt, const J& x, const J& y) { return x * tilt.x() + y * tilt.y(); }

J bump_jet(const SigmoidBumpParams& p, const J& x, const J& y) {
    J f = tilt_jet(p.tilt, x, y);
    if (p.bend != 0.0 && !p.bumps.empty()) {
        const J dx = x - p.bumps.front().center.x();
        const J dy = y - p.bumps.front().center.y();
        f += (dx * dx + dy * dy) * (0.5 * p.bend);
    }
    for (const auto& b : p.bumps) {
        const J dx = x - b.center.x();
        const J dy = y - b.center.y();
        const J z = (dx * dx + dy * dy - b.radius * b.radius) * (1.0 / (2.0 * b.radius * b.edge_width));
        f += z.compose(logistic_step(z.value())) * b.height;
    }
    return f;
}

J blob_jet(const GaussianBlobParams& p, const J& x, const J& y) {
    J f = tilt_jet(p.tilt, x, y);
    for (const auto& l : p.lobes) {
        const J dx = x - l.center.x();
        const J dy = y - l.center.y();
        const Mat2& q = l.precision;
        const J quad = dx * dx * q(0, 0) + dx * dy * (2.0 * q(0, 1)) + dy * dy * q(1, 1);
        f += exp(quad * -0.5) * l.amplitude;
    }
    return f;
}

J ridge_jet(const RidgeParams& p, const J& x, const J& y) {
    const J dx = x - p.origin.x();
    const J d = (y - p.origin.y()) - dx * dx * p.bend;
    const J profile = exp(d * d * (-0.5 / (p.width * p.width)));
    return profile * (J(1.0) + dx * p.taper) * p.height + tilt_jet(p.tilt, x, y);
}

J poly_jet(const PolynomialParams& p, const J& x, const J& y) {
    const J u = x - p.origin.x();
    const J v = y - p.origin.y();
    const auto& c = p.c;
    return J(c[0]) + u * c[1] + v * c[2] + u * u * c[3] + u * v * c[4] + v * v * c[5] +
           u * u * u * c[6] + u * u * v * c[7] + u * v * v * c[8] + v * v * v * c[9];
}

/// Reproducible uniform in [0, 1) from a 64-bit engine (independent of the
/// standard library's distribution implementations).
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * unit_uniform(rng); }

}  // namespace

Vec2 SurfaceDerivs::third_contract(const Vec2& a, const Vec2& b) const {
    const double fxxx = third[0], fxxy = third[1], fxyy = third[2], fyyy = third[3];
    const double axbx = a.x() * b.x();
    const double cross = a.x() * b.y() + a.y() * b.x();
    const double ayby = a.y() * b.y();
    return {fxxx * axbx + fxxy * cross + fxyy * ayby, fxxy * axbx + fxyy * cross + fyyy * ayby};
}

std::string to_string(SurfaceKind k) {
    switch (k) {
        case SurfaceKind::SigmoidalBump: return "sigmoidal_bump";
        case SurfaceKind::GaussianBlobSum: return "blob";
        case SurfaceKind::Ridge: return "ridge";
        case SurfaceKind::Quadratic: return "quadratic";
        case SurfaceKind::TiltedPlane: return "plane";
        case SurfaceKind::TaylorPatch: return "taylor_patch";
    }
    return "unknown";
}

SurfaceKind surface_kind_from_string(const std::string& s) {
    for (auto k : {SurfaceKind::SigmoidalBump, SurfaceKind::GaussianBlobSum, SurfaceKind::Ridge,
                   SurfaceKind::Quadratic, SurfaceKind::TiltedPlane, SurfaceKind::TaylorPatch})
        if (to_string(k) == s) return k;
    throw ParameterError("unknown surface kind '" + s + "'");
}

AnalyticSurface::AnalyticSurface(SurfaceKind kind, Params params, Domain domain)
    : kind_(kind), params_(std::move(params)), domain_(domain) {
    if (!(domain_.x1 > domain_.x0) || !(domain_.y1 > domain_.y0))
        throw ParameterError("AnalyticSurface: empty domain");
}

Jet<3> AnalyticSurface::jet(const Vec2& p) const {
    const J x = J::x(p.x());
    const J y = J::y(p.y());
    return std::visit(
        [&](const auto& prm) -> J {
            using T = std::decay_t<decltype(prm)>;
            if constexpr (std::is_same_v<T, SigmoidBumpParams>) return bump_jet(prm, x, y);
            else if constexpr (std::is_same_v<T, GaussianBlobParams>) return blob_jet(prm, x, y);
            else if constexpr (std::is_same_v<T, RidgeParams>) return ridge_jet(prm, x, y);
            else return poly_jet(prm, x, y);
        },
        params_);
}

SurfaceDerivs AnalyticSurface::eval(const Vec2& p) const {
    const J j = jet(p);
    SurfaceDerivs d;
    d.f = j.value();
    d.grad = {j.d(1, 0), j.d(0, 1)};
    d.hess << j.d(2, 0), j.d(1, 1), j.d(1, 1), j.d(0, 2);
    d.third = {j.d(3, 0), j.d(2, 1), j.d(1, 2), j.d(0, 3)};
    return d;
}

double AnalyticSurface::height(const Vec2& p) const { return jet(p).value(); }

AnalyticSurface make_sigmoidal_bump(const Vec2& center, double radius, double height, double base_tilt,
                                    const Domain& domain, double edge_width, double bend) {
    if (!(radius > 0)) throw ParameterError("make_sigmoidal_bump: radius must be positive");
    return make_bumps({{center, radius, height, edge_width > 0 ? edge_width : radius / 8.0}}, base_tilt,
                      domain, bend);
}

AnalyticSurface make_bumps(std::vector<SigmoidBumpParams::Bump> bumps, double base_tilt, const Domain& domain,
                           double bend) {
    for (auto& b : bumps) {
        if (!(b.radius > 0)) throw ParameterError("make_bumps: radius must be positive");
        if (!(b.edge_width > 0)) b.edge_width = b.radius / 8.0;
    }
    SigmoidBumpParams p;
    p.bumps = std::move(bumps);
    p.tilt = base_tilt * Vec2(0.8, 0.6);
    p.bend = bend;
    return {SurfaceKind::SigmoidalBump, p, domain};
}

AnalyticSurface make_blob(std::uint64_t seed, int n_lobes, const Domain& domain, double tilt) {
    if (n_lobes < 2 || n_lobes > 12) throw ParameterError("make_blob: n_lobes must be in [2, 12]");
    std::mt19937_64 rng(seed);
    const double wx = domain.x1 - domain.x0;
    const double wy = domain.y1 - domain.y0;
    const double scale = std::min(wx, wy);
    GaussianBlobParams p;
    p.tilt = tilt * Vec2(0.8, 0.6);
    // Lobes are placed by rejection so their cores stay apart; the
    // amplitude is proportional to the lobe width so flanks stay steep.
    int attempts = 0;
    while (static_cast<int>(p.lobes.size()) < n_lobes) {
        const double s_major = uniform(rng, 0.10, 0.14) * scale;
        const double s_minor = s_major * uniform(rng, 0.55, 0.9);
        const double angle = uniform(rng, 0.0, M_PI);
        const Vec2 c(uniform(rng, domain.x0 + 0.2 * wx, domain.x1 - 0.2 * wx),
                     uniform(rng, domain.y0 + 0.2 * wy, domain.y1 - 0.2 * wy));
        const double amplitude = s_major * uniform(rng, 1.4, 2.0);
        ++attempts;
        bool far = true;
        for (const auto& l : p.lobes)
            if ((l.center - c).norm() < 0.3 * scale && attempts < 10000) far = false;
        if (!far) continue;
        Eigen::Matrix2d rot;
        rot << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
        const Eigen::Vector2d inv_var(1.0 / (s_major * s_major), 1.0 / (s_minor * s_minor));
        GaussianBlobParams::Lobe lobe;
        lobe.center = c;
        lobe.amplitude = amplitude;
        lobe.precision = rot * inv_var.asDiagonal() * rot.transpose();
        p.lobes.push_back(lobe);
    }
    return {SurfaceKind::GaussianBlobSum, p, domain};
}

AnalyticSurface make_ridge(const RidgeParams& params, const Domain& domain) {
    if (!(params.width > 0)) throw ParameterError("make_ridge: width must be positive");
    return {SurfaceKind::Ridge, params, domain};
}

AnalyticSurface make_quadratic(double cxx, double cxy, double cyy, const Vec2& slope, const Domain& domain,
                               const Vec2& origin) {
    PolynomialParams p;
    p.origin = origin;
    p.c = {0.0, slope.x(), slope.y(), cxx, cxy, cyy, 0.0, 0.0, 0.0, 0.0};
    return {SurfaceKind::Quadratic, p, domain};
}

AnalyticSurface make_plane(double offset, const Vec2& slope, const Domain& domain) {
    PolynomialParams p;
    p.c = {offset, slope.x(), slope.y(), 0, 0, 0, 0, 0, 0, 0};
    return {SurfaceKind::TiltedPlane, p, domain};
}

AnalyticSurface make_taylor_patch(const std::array<double, 10>& c, const Domain& domain, const Vec2& origin) {
    PolynomialParams p;
    p.origin = origin;
    p.c = c;
    return {SurfaceKind::TaylorPatch, p, domain};
}

Vec3 normal_at(const AnalyticSurface& s, const Vec2& p) {
    const J j = s.jet(p);
    const Vec3 g(-j.d(1, 0), -j.d(0, 1), 1.0);
    return g / g.norm();
}

namespace {
void require_inside(const AnalyticSurface& s, const GridSpec& grid) {
    const Vec2 lo = grid.world(0, 0);
    const Vec2 hi = grid.world(grid.width - 1, grid.height - 1);
    const double tol = 1e-9 * grid.spacing;
    const Domain& d = s.domain();
    if (lo.x() < d.x0 - tol || lo.y() < d.y0 - tol || hi.x() > d.x1 + tol || hi.y() > d.y1 + tol)
        throw ParameterError("grid lies outside the surface domain");
}
}  // namespace

NormalField normals(const AnalyticSurface& s, const GridSpec& grid) {
    require_inside(s, grid);
    NormalField out{grid, std::vector<Vec3>(grid.size())};
    for (int r = 0; r < grid.height; ++r)
        for (int c = 0; c < grid.width; ++c)
            out.n[static_cast<std::size_t>(r) * grid.width + c] = normal_at(s, grid.world(c, r));
    return out;
}

ScalarGrid sample_height(const AnalyticSurface& s, const GridSpec& grid) {
    require_inside(s, grid);
    ScalarGrid out(grid);
    for (int r = 0; r < grid.height; ++r)
        for (int c = 0; c < grid.width; ++c) out(c, r) = s.height(grid.world(c, r));
    return out;
}

ScalarGrid slant_field(const NormalField& n) {
    ScalarGrid out(n.spec);
    auto vals = out.values();
    for (std::size_t i = 0; i < n.n.size(); ++i) {
        // acos loses precision near 0; atan2 of the tangential part is exact.
        const Vec3& v = n.n[i];
        vals[i] = std::atan2(std::hypot(v.x(), v.y()), v.z());
    }
    return out;
}

double gaussian_curvature(const SurfaceDerivs& d) {
    const double w2 = 1.0 + d.grad.squaredNorm();
    return d.hess.determinant() / (w2 * w2);
}

double gaussian_curvature(const AnalyticSurface& s, const Vec2& p) { return gaussian_curvature(s.eval(p)); }

Mat2 shape_operator(const SurfaceDerivs& d) {
    // First fundamental form G = I + grad grad^T, second B = H / W. In the
    // orthonormal frame df * G^{-1/2} the operator is G^{-1/2} B G^{-1/2}.
    const double w = std::sqrt(1.0 + d.grad.squaredNorm());
    const Mat2 g = Mat2::Identity() + d.grad * d.grad.transpose();
    Eigen::SelfAdjointEigenSolver<Mat2> es(g);
    const Mat2 g_inv_sqrt = es.operatorInverseSqrt();
    return g_inv_sqrt * (d.hess / w) * g_inv_sqrt;
}

Mat2 shape_operator(const AnalyticSurface& s, const Vec2& p) { return shape_operator(s.eval(p)); }

Vec3 lift_tangent(const SurfaceDerivs& d, const Vec2& a) { return {a.x(), a.y(), d.grad.dot(a)}; }

Vec3 shape_map(const SurfaceDerivs& d, const Vec2& a) {
    const double w2 = 1.0 + d.grad.squaredNorm();
    const double w = std::sqrt(w2);
    const Vec2 ha = d.hess * a;
    const double s = d.grad.dot(ha);
    const Vec3 g(-d.grad.x(), -d.grad.y(), 1.0);
    return Vec3(ha.x(), ha.y(), 0.0) / w + g * (s / (w2 * w));
}

}  // namespace critcon
