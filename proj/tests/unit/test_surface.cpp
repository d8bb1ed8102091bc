#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"

#include "critcon/surface.hpp"
#include "fixtures.hpp"

using namespace critcon;

namespace {

struct Probe {
    const AnalyticSurface* s;
    Vec2 p;
};

// Central-difference estimates of each derivative level from the level below.
struct FdErrors {
    double grad = 0, hess = 0, third = 0;
};

FdErrors fd_errors(const AnalyticSurface& s, const Vec2& p, double h) {
    const auto d = s.eval(p);
    FdErrors e;
    const Vec2 ex(h, 0), ey(0, h);
    const double fx = (s.height(p + ex) - s.height(p - ex)) / (2 * h);
    const double fy = (s.height(p + ey) - s.height(p - ey)) / (2 * h);
    e.grad = std::hypot(fx - d.grad.x(), fy - d.grad.y());
    const Vec2 gx = (s.eval(p + ex).grad - s.eval(p - ex).grad) / (2 * h);
    const Vec2 gy = (s.eval(p + ey).grad - s.eval(p - ey).grad) / (2 * h);
    e.hess = std::hypot((gx - d.hess.col(0)).norm(), (gy - d.hess.col(1)).norm());
    const Mat2 hxp = s.eval(p + ex).hess, hxm = s.eval(p - ex).hess;
    const Mat2 hyp = s.eval(p + ey).hess, hym = s.eval(p - ey).hess;
    const double fxxx = (hxp(0, 0) - hxm(0, 0)) / (2 * h);
    const double fxxy = (hyp(0, 0) - hym(0, 0)) / (2 * h);
    const double fxyy = (hxp(1, 1) - hxm(1, 1)) / (2 * h);
    const double fyyy = (hyp(1, 1) - hym(1, 1)) / (2 * h);
    e.third = std::hypot(std::hypot(fxxx - d.third[0], fxxy - d.third[1]),
                         std::hypot(fxyy - d.third[2], fyyy - d.third[3]));
    return e;
}

double order(double coarse, double fine) { return std::log2(coarse / fine); }

std::vector<AnalyticSurface> every_kind() {
    const Domain dom = fixtures::pixel_domain();
    RidgeParams rp;
    rp.origin = {128, 120};
    rp.height = 30;
    rp.width = 14;
    rp.bend = 0.004;
    rp.taper = 0.003;
    rp.tilt = {0.016, 0.012};
    return {fixtures::bump(),
            fixtures::blob7(),
            make_ridge(rp, dom),
            make_quadratic(0.004, 0.001, 0.006, {0.1, -0.05}, dom, {128, 128}),
            make_plane(1.0, {0.3, -0.2}, dom),
            make_taylor_patch({0.1, 0.2, -0.1, 0.003, 0.001, -0.002, 1e-5, -2e-5, 3e-5, 4e-6}, dom, {128, 128})};
}

}  // namespace

TEST_CASE("every analytic derivative converges at second order under refinement") {
    fixtures::Sampler rng(11);
    for (const auto& s : every_kind()) {
        CAPTURE(to_string(s.kind()));
        std::vector<double> ord_g, ord_h, ord_t;
        for (int k = 0; k < 12; ++k) {
            const Vec2 p(rng.uniform(60, 196), rng.uniform(60, 196));
            const auto coarse = fd_errors(s, p, 0.4);
            const auto fine = fd_errors(s, p, 0.2);
            // Errors at rounding level carry no order information.
            if (coarse.grad > 1e-9) ord_g.push_back(order(coarse.grad, fine.grad));
            if (coarse.hess > 1e-10) ord_h.push_back(order(coarse.hess, fine.hess));
            if (coarse.third > 1e-11) ord_t.push_back(order(coarse.third, fine.third));
        }
        for (auto* v : {&ord_g, &ord_h, &ord_t}) {
            if (v->empty()) continue;  // polynomial levels are exact
            std::sort(v->begin(), v->end());
            CHECK((*v)[v->size() / 2] >= 1.9);
        }
    }
}

TEST_CASE("sigmoidal bump: zero height is the tilted plane, zero tilt is flat at the apex") {
    const Domain dom = fixtures::pixel_domain();
    const auto flat = make_sigmoidal_bump({100, 100}, 20, 0.0, 0.05, dom);
    for (const Vec2 p : {Vec2(10, 20), Vec2(100, 100), Vec2(200, 31)}) {
        const double plane = 0.05 * (0.8 * p.x() + 0.6 * p.y());
        CHECK(flat.height(p) == doctest::Approx(plane).epsilon(1e-12));
    }
    const auto sym = make_sigmoidal_bump({100, 100}, 20, 10.0, 0.0, dom);
    const auto d = sym.eval({100, 100});
    CHECK(d.grad.norm() == doctest::Approx(0.0));
    CHECK_THROWS_AS((void)make_sigmoidal_bump({100, 100}, 0.0, 1.0, 0.0, dom), ParameterError);
}

TEST_CASE("sigmoidal bump profile along a diameter is steep-flat-steep (dense scan oracle)") {
    const auto s = make_sigmoidal_bump({128, 128}, 20, 10, 0.05, fixtures::pixel_domain());
    // Dense 1D scan of the slope along the tilt direction through the center.
    const Vec2 dir(0.8, 0.6);
    std::vector<int> segment_sign;  // sign of each maximal steep run
    bool in_steep = false;
    int flat_between = 0;
    for (double t = -40; t <= 40; t += 0.05) {
        const Vec2 p = Vec2(128, 128) + t * dir;
        const double slope = s.eval(p).grad.dot(dir);
        const bool steep = std::abs(slope) > 0.3;
        if (steep && !in_steep) segment_sign.push_back(slope > 0 ? 1 : -1);
        if (!steep && segment_sign.size() == 1) ++flat_between;
        in_steep = steep;
    }
    REQUIRE(segment_sign.size() == 2);
    CHECK(segment_sign[0] == 1);
    CHECK(segment_sign[1] == -1);
    CHECK(flat_between > 100);
}

TEST_CASE("blob: reproducible and symmetric two-lobe saddle") {
    const Domain dom = fixtures::pixel_domain(64);
    const GridSpec g = fixtures::pixel_grid(64);
    CHECK(sample_height(make_blob(3, 4, dom), g) == sample_height(make_blob(3, 4, dom), g));
    CHECK_FALSE(sample_height(make_blob(3, 4, dom), g) == sample_height(make_blob(4, 4, dom), g));
    CHECK_THROWS_AS((void)make_blob(1, 1, dom), ParameterError);
    CHECK_THROWS_AS((void)make_blob(1, 13, dom), ParameterError);

    GaussianBlobParams p;
    for (double cx : {20.0, 44.0}) {
        GaussianBlobParams::Lobe l;
        l.center = {cx, 32};
        l.amplitude = 5;
        l.precision = Mat2::Identity() / 64.0;
        p.lobes.push_back(l);
    }
    const AnalyticSurface two(SurfaceKind::GaussianBlobSum, p, dom);
    const auto mid = two.eval({32, 32});
    CHECK(mid.grad.norm() < 1e-12);
    CHECK(mid.hess.determinant() < 0);  // saddle on the midline
}

TEST_CASE("blob seed 7: sampled maxima equal the analytic hill-climb maxima") {
    const auto s = fixtures::blob7();
    const GridSpec g = fixtures::pixel_grid();
    const ScalarGrid f = sample_height(s, g);
    int scanned = 0;
    for (int r = 1; r < g.height - 1; ++r)
        for (int c = 1; c < g.width - 1; ++c) {
            bool is_max = true;
            for (int dr = -1; dr <= 1; ++dr)
                for (int dc = -1; dc <= 1; ++dc)
                    if ((dr || dc) && f(c + dc, r + dr) >= f(c, r)) is_max = false;
            scanned += is_max;
        }
    // Newton ascent from each lobe center on the analytic surface.
    const auto& prm = std::get<GaussianBlobParams>(s.params());
    std::vector<Vec2> found;
    for (const auto& lobe : prm.lobes) {
        Vec2 p = lobe.center;
        for (int it = 0; it < 200; ++it) {
            const auto d = s.eval(p);
            Vec2 step = -d.hess.inverse() * d.grad;
            if (d.hess.determinant() <= 0 || d.hess.trace() >= 0) step = 0.5 * d.grad;
            p += step;
        }
        if (s.eval(p).grad.norm() > 1e-9 || !s.domain().contains(p)) continue;
        bool dup = false;
        for (const auto& q : found) dup |= (q - p).norm() < 1.0;
        if (!dup) found.push_back(p);
    }
    CHECK(scanned == static_cast<int>(found.size()));
    CHECK(scanned == 4);  // two of the five lobes merge into one summit
}

TEST_CASE("normals: plane, ramp, unit length, symmetric disc integral") {
    const Domain dom = fixtures::pixel_domain(32);
    const GridSpec g = fixtures::pixel_grid(32);
    const auto flat = normals(make_plane(2.0, {0, 0}, dom), g);
    for (const auto& n : flat.n) CHECK((n - Vec3(0, 0, 1)).norm() == 0.0);
    const auto ramp = normals(make_plane(0.0, {1, 0}, dom), g);
    for (const auto& n : ramp.n) CHECK((n - Vec3(-1, 0, 1) / std::sqrt(2.0)).norm() < 1e-15);

    const auto bump = fixtures::bump(256, 0.0);
    const Vec2 apex = std::get<SigmoidBumpParams>(bump.params()).bumps[0].center;
    // Polar midpoint quadrature of (n_x, n_y) over a disc around the apex.
    Vec2 tangential = Vec2::Zero();
    double scale = 0;
    for (int i = 0; i < 200; ++i)
        for (int j = 0; j < 256; ++j) {
            const double r = (i + 0.5) * 60.0 / 200;
            const double th = (j + 0.5) * 2 * M_PI / 256;
            const Vec3 n = normal_at(bump, apex + r * Vec2(std::cos(th), std::sin(th)));
            tangential += r * Vec2(n.x(), n.y());
            scale += r * std::hypot(n.x(), n.y());
        }
    CHECK(tangential.norm() / scale < 1e-12);

    for (const auto& s : every_kind()) {
        const auto nf = normals(s, fixtures::pixel_grid());
        const auto sl = slant_field(nf);
        bool ok = true;
        for (std::size_t i = 0; i < nf.n.size(); ++i) {
            ok &= std::abs(nf.n[i].norm() - 1.0) <= 1e-12 && nf.n[i].z() > 0;
            ok &= sl.values()[i] >= 0 && sl.values()[i] < M_PI / 2;
        }
        CHECK(ok);
    }
    CHECK_THROWS_AS((void)normals(make_plane(0, {0, 0}, dom), fixtures::pixel_grid(64)), ParameterError);
}

TEST_CASE("slant field: plane, ramp, and the bump's apex minimum with a flank ring") {
    const Domain dom = fixtures::pixel_domain(32);
    const GridSpec g = fixtures::pixel_grid(32);
    for (double v : slant_field(normals(make_plane(0, {0, 0}, dom), g)).values()) CHECK(v == 0.0);
    for (double v : slant_field(normals(make_plane(0, {1, 0}, dom), g)).values())
        CHECK(v == doctest::Approx(M_PI / 4).epsilon(1e-14));

    const auto s = make_sigmoidal_bump({128, 128}, 40, 25, 0.0, fixtures::pixel_domain());
    const auto sl = slant_field(normals(s, fixtures::pixel_grid()));
    // argmin over the disc inside the ring is the apex pixel
    int best_c = -1, best_r = -1;
    double best = 1e9;
    for (int r = 98; r <= 158; ++r)
        for (int c = 98; c <= 158; ++c)
            if (sl(c, r) < best) best = sl(c, r), best_c = c, best_r = r;
    CHECK(best_c == 128);
    CHECK(best_r == 128);
    // every ray from the apex peaks on the flank, near the bump radius
    for (int k = 0; k < 32; ++k) {
        const double th = 2 * M_PI * k / 32;
        double rmax = 0, vmax = -1;
        for (double rad = 0; rad < 100; rad += 0.25) {
            const double v = sl.sample(128 + rad * std::cos(th), 128 + rad * std::sin(th));
            if (v > vmax) vmax = v, rmax = rad;
        }
        CHECK(rmax == doctest::Approx(40).epsilon(0.1));
        CHECK(vmax > sl.sample(128, 128) + 0.5);
    }
}

TEST_CASE("curvature: plane, paraboloid, finite differences, shape operator determinant") {
    const Domain dom{-2, 2, -2, 2};
    const auto plane = make_plane(0.0, {0.3, 0.1}, dom);
    CHECK(gaussian_curvature(plane, {0.2, 0.3}) == 0.0);
    CHECK(shape_operator(plane, {0.2, 0.3}).norm() == 0.0);
    const auto para = make_quadratic(0.5, 0.0, 0.5, {0, 0}, dom);
    CHECK(gaussian_curvature(para, {0, 0}) == doctest::Approx(1.0));
    CHECK((shape_operator(para, {0, 0}) - Mat2::Identity()).norm() < 1e-15);

    const auto blob = fixtures::blob7();
    fixtures::Sampler rng(5);
    const double h = 0.1;
    for (int k = 0; k < 100; ++k) {
        const Vec2 p(rng.uniform(40, 216), rng.uniform(40, 216));
        auto f = [&](double dx, double dy) { return blob.height(p + Vec2(dx * h, dy * h)); };
        // fourth-order central stencils
        const double fx = (-f(2, 0) + 8 * f(1, 0) - 8 * f(-1, 0) + f(-2, 0)) / (12 * h);
        const double fy = (-f(0, 2) + 8 * f(0, 1) - 8 * f(0, -1) + f(0, -2)) / (12 * h);
        const double fxx = (-f(2, 0) + 16 * f(1, 0) - 30 * f(0, 0) + 16 * f(-1, 0) - f(-2, 0)) / (12 * h * h);
        const double fyy = (-f(0, 2) + 16 * f(0, 1) - 30 * f(0, 0) + 16 * f(0, -1) - f(0, -2)) / (12 * h * h);
        auto dxy = [&](double s) { return (f(s, s) - f(s, -s) - f(-s, s) + f(-s, -s)) / (4 * s * s * h * h); };
        const double fxy = (4 * dxy(1) - dxy(2)) / 3;
        const double w2 = 1 + fx * fx + fy * fy;
        const double k_fd = (fxx * fyy - fxy * fxy) / (w2 * w2);
        const double k_an = gaussian_curvature(blob, p);
        // skip near-parabolic points where the relative error is meaningless
        if (std::abs(k_an) > 1e-7) CHECK(std::abs(k_fd - k_an) / std::abs(k_an) < 1e-6);

        const Mat2 so = shape_operator(blob, p);
        CHECK((so - so.transpose()).norm() < 1e-14);
        if (std::abs(k_an) > 1e-9) CHECK(std::abs(so.determinant() - k_an) / std::abs(k_an) < 1e-8);
    }
}

TEST_CASE("sampling is bit-for-bit deterministic") {
    const auto a = sample_height(fixtures::blob7(), fixtures::pixel_grid());
    const auto b = sample_height(fixtures::blob7(), fixtures::pixel_grid());
    CHECK(a == b);
}
