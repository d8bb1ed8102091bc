#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"

#include "critcon/imagecalc.hpp"
#include "critcon/parallel.hpp"
#include "critcon/render.hpp"
#include "fixtures.hpp"

using namespace critcon;
using fixtures::image_from;

namespace {

double median(std::vector<double> v) {
    REQUIRE(!v.empty());
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
}

ScalarGrid bump_image() {
    const auto s = fixtures::bump();
    return render(normals(s, fixtures::pixel_grid()), Lambertian{Vec3(0.25, 0.15, 0.956).normalized(), 1.0}).image;
}

// Least-squares (Kasa) circle through the points; returns 1 / radius.
double circle_fit_curvature(const std::vector<Vec2>& pts) {
    Eigen::MatrixXd A(static_cast<Eigen::Index>(pts.size()), 3);
    Eigen::VectorXd b(static_cast<Eigen::Index>(pts.size()));
    const Vec2 o = pts[pts.size() / 2];
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Vec2 p = pts[i] - o;
        const auto k = static_cast<Eigen::Index>(i);
        A(k, 0) = p.x();
        A(k, 1) = p.y();
        A(k, 2) = 1;
        b(k) = p.squaredNorm();
    }
    const Eigen::Vector3d x = A.colPivHouseholderQr().solve(b);
    const double r2 = x(2) + 0.25 * (x(0) * x(0) + x(1) * x(1));
    return 1 / std::sqrt(r2);
}

}  // namespace

TEST_CASE("gradient of constant and linear images") {
    const auto g = GridSpec::square(16, -1, 1);
    const auto zero = gradient(ScalarGrid(g, 0.7));
    for (double v : zero.x.values()) CHECK(v == 0);
    for (double v : zero.y.values()) CHECK(v == 0);
    const auto lin = gradient(image_from(g, [](double x, double) { return x; }));
    for (int r = 0; r < 16; ++r)
        for (int c = 0; c < 16; ++c) {
            CHECK(lin.x(c, r) == doctest::Approx(1).epsilon(1e-12));
            CHECK(std::abs(lin.y(c, r)) < 1e-12);
        }
    CHECK_THROWS_AS((void)gradient(ScalarGrid(GridSpec::square(4, 0, 1))), ParameterError);
}

TEST_CASE("gradient of a smooth image against a fourth-order stencil oracle") {
    const auto g = GridSpec::square(129, 0, 2 * M_PI);
    auto f = [](double x, double y) { return std::sin(1.3 * x + 0.4) * std::cos(0.7 * y) + 0.2 * std::cos(2.1 * y); };
    const auto img = image_from(g, f);
    const auto d = gradient(img);
    const double h = g.spacing;
    double worst = 0, worst_oracle = 0;
    for (int r = 2; r < 127; ++r)
        for (int c = 2; c < 127; ++c) {
            const double ox = (-img(c + 2, r) + 8 * img(c + 1, r) - 8 * img(c - 1, r) + img(c - 2, r)) / (12 * h);
            const double oy = (-img(c, r + 2) + 8 * img(c, r + 1) - 8 * img(c, r - 1) + img(c, r - 2)) / (12 * h);
            worst = std::max(worst, std::hypot(d.x(c, r) - ox, d.y(c, r) - oy));
            const Vec2 w = g.world(c, r);
            const double ax = 1.3 * std::cos(1.3 * w.x() + 0.4) * std::cos(0.7 * w.y());
            worst_oracle = std::max(worst_oracle, std::abs(ox - ax));
        }
    // central differences carry h^2 / 6 * f''' with |f'''| <= 1.3^3 + 2.1^3 * 0.2
    CHECK(worst < (1.3 * 1.3 * 1.3 + 0.2 * 2.1 * 2.1 * 2.1) * h * h / 6);
    CHECK(worst_oracle < 1e-5);
}

TEST_CASE("shading flow on trivial images") {
    const auto g = GridSpec::square(32, -1, 1);
    const auto lin = shading_flow(image_from(g, [](double x, double) { return x; }));
    CHECK(lin.valid_count() == g.size());
    for (int r = 0; r < 32; ++r)
        for (int c = 0; c < 32; ++c) {
            CHECK(lin.v.at(c, r).isApprox(Vec2(0, 1), 1e-12));
            CHECK(lin.u.at(c, r).isApprox(Vec2(1, 0), 1e-12));
        }
    const auto g2 = GridSpec::square(64, -1, 1);
    const auto rad = shading_flow(image_from(g2, [](double x, double y) { return x * x + y * y; }));
    for (int r = 1; r < 63; ++r)
        for (int c = 1; c < 63; ++c) {
            const Vec2 p = g2.world(c, r);
            if (p.norm() < 0.05) continue;
            REQUIRE(rad.is_valid(c, r));
            CHECK(std::abs(rad.v.at(c, r).dot(p / p.norm())) < 1e-6);
        }
    const auto flat = shading_flow(ScalarGrid(g, 0.3));
    CHECK(flat.valid_count() == 0);
}

TEST_CASE("frame is orthonormal with v = u turned +90") {
    const auto f = shading_flow(bump_image());
    for (int r = 0; r < f.spec.height; ++r)
        for (int c = 0; c < f.spec.width; ++c) {
            if (!f.is_valid(c, r)) continue;
            const Vec2 u = f.u.at(c, r), v = f.v.at(c, r);
            CHECK(std::abs(u.norm() - 1) < 1e-12);
            CHECK(std::abs(u.dot(v)) < 1e-12);
            CHECK(u.x() * v.y() - u.y() * v.x() == doctest::Approx(1.0));
        }
}

TEST_CASE("isophote direction matches marching-squares level sets") {
    const auto img = bump_image();
    const auto f = shading_flow(img);
    std::vector<double> errs;
    for (double level : {0.55, 0.7, 0.8, 0.9, 0.95, 0.98}) {
        for (const auto& pl : level_set(img, level)) {
            const auto n = pl.points.size();
            if (n < 12) continue;
            for (std::size_t i = 2; i + 2 < n; ++i) {
                const Vec2 t = (pl.points[i + 2] - pl.points[i - 2]).normalized();
                const Vec2 p = pl.points[i];
                const int c = static_cast<int>(std::lround(p.x())), r = static_cast<int>(std::lround(p.y()));
                if (!f.is_valid(c, r)) continue;
                const Vec2 v = f.v.sample(p.x(), p.y()).normalized();
                errs.push_back(std::acos(std::min(1.0, std::abs(v.dot(t)))) * 180 / M_PI);
            }
        }
    }
    REQUIRE(errs.size() > 500);
    CHECK(median(errs) < 2.0);
}

TEST_CASE("frame second derivatives: trivial values and trace identity") {
    const auto g = GridSpec::square(24, -1, 1);
    const auto sq = image_from(g, [](double x, double) { return x * x; });
    FlowFrame fixed = shading_flow(image_from(g, [](double x, double) { return x; }));
    const auto d = frame_second_derivatives(sq, fixed);
    for (int r = 0; r < 24; ++r)
        for (int c = 0; c < 24; ++c) {
            CHECK(d.uu(c, r) == doctest::Approx(2).epsilon(1e-9));
            CHECK(std::abs(d.vv(c, r)) < 1e-9);
            CHECK(std::abs(d.uv(c, r)) < 1e-9);
        }

    const auto g2 = GridSpec::square(48, -1.2, 1.3);
    const auto poly = image_from(g2, [](double x, double y) {
        return 0.3 + x * x * y - 0.5 * y * y * y + 0.7 * x * y + 0.2 * x * x * x * x;
    });
    const auto lap = laplacian(poly);
    const auto fd = frame_second_derivatives(poly, shading_flow(poly));
    int checked = 0;
    for (int r = 1; r < 47; ++r)
        for (int c = 1; c < 47; ++c) {
            if (std::isnan(fd.uu(c, r))) continue;
            const double five = (poly(c + 1, r) + poly(c - 1, r) + poly(c, r + 1) + poly(c, r - 1) - 4 * poly(c, r)) /
                                (g2.spacing * g2.spacing);
            CHECK(fd.uu(c, r) + fd.vv(c, r) == doctest::Approx(five).epsilon(1e-6));
            CHECK(lap(c, r) == doctest::Approx(five).epsilon(1e-9));
            ++checked;
        }
    CHECK(checked > 2000);
}

TEST_CASE("I_uu is rotation-equivariant on a 45 degree parabolic image") {
    const auto g = GridSpec::square(65, -1, 1);
    const double c45 = std::sqrt(0.5);
    const auto rotated = image_from(g, [&](double x, double y) { return std::pow(c45 * x + c45 * y, 2) + 0.1 * (c45 * x + c45 * y); });
    const auto axis = image_from(g, [](double x, double) { return x * x + 0.1 * x; });
    const auto fr = shading_flow(rotated), fa = shading_flow(axis);
    const auto dr = frame_second_derivatives(rotated, fr), da = frame_second_derivatives(axis, fa);
    // pixel (c, r) in the axis image corresponds to the rotated image at R (c, r)
    for (int r = 4; r < 61; ++r)
        for (int c = 4; c < 61; ++c) {
            if (!fa.is_valid(c, r)) continue;
            const Vec2 w = g.world(c, r);
            const Vec2 q = g.pixel(Vec2(c45 * w.x() - c45 * w.y(), c45 * w.x() + c45 * w.y()));
            const int qc = static_cast<int>(std::lround(q.x())), qr = static_cast<int>(std::lround(q.y()));
            if (!g.world(qc, qr).isApprox(Vec2(c45 * w.x() - c45 * w.y(), c45 * w.x() + c45 * w.y()), 1e-3)) continue;
            if (!fr.is_valid(qc, qr)) continue;
            CHECK(std::abs(dr.uu(qc, qr) - da.uu(c, r)) < 1e-3);
        }

    // smooth anisotropic image, compared against the analytic derivative in the rotated frame
    const auto g3 = GridSpec::square(257, -64, 64);
    auto gauss = [](double x, double y) { return 40 * std::exp(-(x * x / 800 + y * y / 200)); };
    const auto img = image_from(g3, [&](double x, double y) { return gauss(c45 * x + c45 * y, -c45 * x + c45 * y); });
    const auto fg = shading_flow(img);
    const auto dg = frame_second_derivatives(img, fg);
    std::vector<double> rel;
    for (int r = 40; r < 217; ++r)
        for (int c = 40; c < 217; ++c) {
            if (!fg.is_valid(c, r)) continue;
            const Vec2 w = g3.world(c, r);
            const Vec2 p(c45 * w.x() + c45 * w.y(), -c45 * w.x() + c45 * w.y());
            // unrotated image: gradient and Hessian in closed form
            const double e = gauss(p.x(), p.y());
            const Vec2 grad(-p.x() / 400 * e, -p.y() / 100 * e);
            Mat2 hs;
            hs << (p.x() * p.x() / 160000 - 1.0 / 400) * e, p.x() * p.y() / 40000 * e, p.x() * p.y() / 40000 * e,
                (p.y() * p.y() / 10000 - 1.0 / 100) * e;
            if (grad.norm() < 0.05) continue;
            const Vec2 u = grad.normalized();
            const double want = u.dot(hs * u);
            if (std::abs(want) < 0.01) continue;
            rel.push_back(std::abs(dg.uu(c, r) - want) / std::abs(want));
        }
    REQUIRE(rel.size() > 1000);
    CHECK(median(rel) < 1e-3);
}

TEST_CASE("quarter-turn rotation rotates the frame exactly") {
    const auto img = bump_image();
    const int n = img.width();
    ScalarGrid turned(img.spec());
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) turned(n - 1 - r, c) = img(c, r);
    const auto a = shading_flow(img, 1e-4), b = shading_flow(turned, 1e-4);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            REQUIRE(a.is_valid(c, r) == b.is_valid(n - 1 - r, c));
            if (!a.is_valid(c, r)) continue;
            const Vec2 ua = a.u.at(c, r), va = a.v.at(c, r);
            CHECK(b.u.at(n - 1 - r, c) == Vec2(-ua.y(), ua.x()));
            CHECK(b.v.at(n - 1 - r, c) == Vec2(-va.y(), va.x()));
        }
}

TEST_CASE("raising epsilon never validates a masked pixel") {
    const auto img = bump_image();
    const double base = default_grad_epsilon(img);
    std::vector<std::uint8_t> prev = shading_flow(img, 0).valid;
    for (double k : {0.1, 1.0, 10.0, 100.0, 1000.0}) {
        const auto f = shading_flow(img, k * base);
        for (std::size_t i = 0; i < prev.size(); ++i) CHECK(f.valid[i] <= prev[i]);
        prev = f.valid;
    }
}

TEST_CASE("results do not depend on the sign of v") {
    const auto img = bump_image();
    const auto f = shading_flow(img);
    FlowFrame flipped = f;
    for (double& x : flipped.v.x.values()) x = -x;
    for (double& y : flipped.v.y.values()) y = -y;
    const auto a = frame_second_derivatives(img, f), b = frame_second_derivatives(img, flipped);
    for (std::size_t i = 0; i < f.valid.size(); ++i) {
        if (!f.valid[i]) continue;
        CHECK(a.uu.values()[i] == b.uu.values()[i]);
        CHECK(a.vv.values()[i] == b.vv.values()[i]);
        CHECK(a.uv.values()[i] == -b.uv.values()[i]);
    }
}

TEST_CASE("isophote curvature: lines, circles, and a circle-fit oracle") {
    const auto g = GridSpec::square(32, -1, 1);
    const auto flat = isophote_curvature(image_from(g, [](double x, double) { return x; }));
    for (double v : flat.kappa.x.values()) CHECK(std::abs(v) < 1e-9);

    const auto g2 = GridSpec::square(101, -1, 1);
    const auto circ = isophote_curvature(image_from(g2, [](double x, double y) { return x * x + y * y; }));
    for (int r = 0; r < 101; r += 5)
        for (int c = 0; c < 101; c += 5) {
            const Vec2 p = g2.world(c, r);
            if (p.norm() < 0.1) continue;
            const Vec2 k = circ.kappa.at(c, r);
            CHECK(k.norm() == doctest::Approx(1 / p.norm()).epsilon(0.02));
            CHECK(k.dot(p) < 0);  // toward the centre
        }

    const auto img = bump_image();
    const auto field = isophote_curvature(img);
    std::vector<double> rel;
    for (double level : {0.6, 0.75, 0.85, 0.92, 0.97}) {
        for (const auto& pl : level_set(img, level)) {
            const auto n = pl.points.size();
            if (n < 30) continue;
            for (std::size_t i = 6; i + 6 < n; i += 3) {
                std::vector<Vec2> win(pl.points.begin() + static_cast<long>(i) - 6,
                                      pl.points.begin() + static_cast<long>(i) + 7);
                const double want = circle_fit_curvature(win);
                if (want < 0.01 || want > 0.3) continue;
                const Vec2 p = pl.points[i];
                const double got = field.kappa.sample(p.x(), p.y()).norm();
                rel.push_back(std::abs(got - want) / want);
            }
        }
    }
    REQUIRE(rel.size() > 100);
    CHECK(median(rel) < 0.05);
}

TEST_CASE("marching squares on a disc") {
    const auto g = GridSpec::square(64, -1, 1);
    const auto img = image_from(g, [](double x, double y) { return std::hypot(x, y); });
    const auto sets = level_set(img, 0.5);
    REQUIRE(sets.size() == 1);
    CHECK(sets[0].closed);
    const double len_world = sets[0].length() * g.spacing;
    CHECK(len_world == doctest::Approx(M_PI).epsilon(0.01));
    const auto open = level_set(img, 1.2);
    CHECK(open.size() == 4);
    for (const auto& pl : open) CHECK_FALSE(pl.closed);
}

TEST_CASE("parallel evaluation is schedule independent") {
    const auto img = bump_image();
    set_thread_count(1);
    const auto a = frame_second_derivatives(img, shading_flow(img));
    set_thread_count(7);
    const auto b = frame_second_derivatives(img, shading_flow(img));
    set_thread_count(0);
    for (std::size_t i = 0; i < a.valid.size(); ++i)
        if (a.valid[i]) CHECK(a.vv.values()[i] == b.vv.values()[i]);
}
