#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"

#include "critcon/shadingeq.hpp"
#include "fixtures.hpp"

using namespace critcon;

namespace {

const Domain kUnit{-1, 1, -1, 1};

AnalyticSurface paraboloid() { return make_quadratic(0.5, 0, 0.5, {0.1, 0}, kUnit); }

// Richardson-extrapolated central differences of the rendered intensity.
ImageLocal nested_fd(const AnalyticSurface& s, const Vec3& L, const Vec2& p, double h) {
    const auto a = image_local_fd(s, L, p, h), b = image_local_fd(s, L, p, h / 2);
    ImageLocal r;
    r.value = b.value;
    r.grad = (4 * b.grad - a.grad) / 3;
    r.hess = (4 * b.hess - a.hess) / 3;
    return r;
}

// Exact cylinder f = a1 y + a2 y^2 + a3 y^3 (+ twist x y) lit so that N = L on y = 0.
struct Cylinder {
    double alpha = 0.6;
    double twist = 0;
    double a2 = 0.8;
    [[nodiscard]] AnalyticSurface surface() const {
        return make_taylor_patch({0, 0, -std::tan(alpha), 0, twist, a2, 0, 0, 0, 0.35}, {-2, 2, -2, 2});
    }
    [[nodiscard]] Vec3 light() const { return {0, std::sin(alpha), std::cos(alpha)}; }
};

}  // namespace

TEST_CASE("equations 1-3 on a paraboloid with overhead light") {
    const auto s = paraboloid();
    const Vec3 L(0, 0, 1);
    const Vec2 p(0.3, 0.2);
    for (int eq = 1; eq <= 3; ++eq) {
        const auto r = eval_shading_eq(s, L, p, eq);
        CHECK(r.rel_residual < 1e-8);
        CHECK(r.det_h == doctest::Approx(1.0));
    }
    // independent path: chain-rule image derivatives against nested finite differences
    const auto an = image_local_analytic(s, L, p);
    const auto fd = nested_fd(s, L, p, 0.02);
    CHECK(std::abs(an.value - fd.value) < 1e-15);
    CHECK((an.grad - fd.grad).norm() < 1e-8);
    CHECK((an.hess - fd.hess).norm() < 1e-7 * an.hess.norm());
}

TEST_CASE("image derivatives agree across paths on every surface family") {
    const auto g = fixtures::pixel_grid();
    const auto blob = fixtures::blob7();
    fixtures::Sampler rng(5);
    for (int k = 0; k < 30; ++k) {
        const Vec3 L = rng.light_within(0.5);
        const Vec2 p(rng.uniform(60, 196), rng.uniform(60, 196));
        const auto an = image_local_analytic(blob, L, p);
        const auto fd = nested_fd(blob, L, p, 0.05);
        CHECK((an.grad - fd.grad).norm() < 1e-7 * std::max(1e-3, an.grad.norm()));
        CHECK((an.hess - fd.hess).norm() < 1e-5 * std::max(1e-4, an.hess.norm()));
    }
    (void)g;
}

TEST_CASE("the identity holds for every light (light invariance)") {
    const auto blob = fixtures::blob7();
    const auto ridge = make_ridge({{128, 120}, 30, 22, 0.004, 0.002, {0.02, 0.01}}, fixtures::pixel_domain());
    fixtures::Sampler rng(11);
    for (const auto* s : {&blob, &ridge}) {
        int evaluated = 0;
        for (int k = 0; k < 40; ++k) {
            const Vec2 p(rng.uniform(40, 216), rng.uniform(40, 216));
            for (int j = 0; j < 20; ++j) {
                try {
                    for (const auto& r : eval_shading_eqs(*s, rng.light_within(0.5), p)) {
                        CHECK(r.rel_residual < 1e-8);
                        ++evaluated;
                    }
                } catch (const DomainError&) {
                }
            }
        }
        CHECK(evaluated > 600);
    }
}

TEST_CASE("preconditions: singular Hessian, shadow, flat image") {
    const auto plane = make_plane(0, {0.2, 0.1}, kUnit);
    CHECK_THROWS_AS((void)eval_shading_eq(plane, {0, 0, 1}, {0.1, 0.1}, 1), ConditioningError);
    const auto s = paraboloid();
    const Vec3 grazing = Vec3(0.99, 0, std::sqrt(1 - 0.99 * 0.99));
    CHECK_THROWS_AS((void)eval_shading_eq(s, grazing, {0.9, 0}, 1), DomainError);
    // overhead light at the paraboloid's lowest point: the gradient frame is undefined
    CHECK_THROWS_AS((void)eval_shading_eq(s, {0, 0, 1}, {-0.1, 0}, 2), DomainError);
    CHECK_THROWS_AS((void)eval_shading_eq(s, {0, 0, 1}, {0.3, 0.2}, 4), ParameterError);
    CHECK_THROWS_AS((void)eval_shading_eq(s, {0, 0, 2}, {0.3, 0.2}, 1), ParameterError);
}

TEST_CASE("equation 4 and its correction term") {
    // T(v, v) = (f_xyy, f_yyy) = 0 with v along y: the correction vanishes
    const auto cyl = make_taylor_patch({0, 0, 0, 0.5, 0, 0.05, 0.3, 0, 0, 0}, kUnit);
    const Vec3 L = Vec3(0.3, 0, 1).normalized();
    const auto r = eval_eq4(cyl, L, {0.2, 0});
    CHECK(std::abs(r.correction) < 1e-14);
    CHECK(r.rel_residual < 1e-6);

    const auto blob = fixtures::blob7();
    fixtures::Sampler rng(23);
    int checked = 0;
    for (int k = 0; k < 200 && checked < 50; ++k) {
        const Vec2 p(rng.uniform(40, 216), rng.uniform(40, 216));
        try {
            const auto e = eval_eq4(blob, rng.light_within(0.5), p);
            // term-by-term oracle: lhs - rhs must equal the correction
            CHECK((e.lhs - e.rhs) == doctest::Approx(e.correction).epsilon(1e-6));
            ++checked;
        } catch (const DomainError&) {
        }
    }
    CHECK(checked == 50);
}

TEST_CASE("albedo rescaling and the sign of v") {
    const auto blob = fixtures::blob7();
    const Vec3 L = Vec3(0.2, -0.3, 0.93).normalized();
    const Vec2 p(110, 140);
    ShadingOptions dim;
    dim.albedo = 0.4;
    const auto a = eval_shading_eqs(blob, L, p), b = eval_shading_eqs(blob, L, p, dim);
    for (int i = 0; i < 3; ++i) {
        CHECK(b[i].lhs == doctest::Approx(0.4 * a[i].lhs).epsilon(1e-12));
        CHECK(b[i].rel_residual < 1e-8);
    }
    const auto e4a = eval_eq4(blob, L, p), e4b = eval_eq4(blob, L, p, dim);
    CHECK(e4b.lhs == doctest::Approx(e4a.lhs).epsilon(1e-12));
    CHECK(e4b.rhs == doctest::Approx(e4a.rhs).epsilon(1e-12));

    ShadingOptions flip;
    flip.flip_v = true;
    const auto f = eval_shading_eqs(blob, L, p, flip);
    for (int i = 0; i < 3; ++i) {
        CHECK(f[i].rel_residual < 1e-8);
        CHECK(std::abs(f[i].lhs) == doctest::Approx(std::abs(a[i].lhs)).epsilon(1e-12));
    }
    CHECK(f[2].lhs == doctest::Approx(-a[2].lhs).epsilon(1e-12));
    CHECK(eval_eq4(blob, L, p, flip).lhs == doctest::Approx(e4a.lhs).epsilon(1e-12));
}

TEST_CASE("ridge reductions are exact on a cylinder crest") {
    const Cylinder cyl;
    const auto s = cyl.surface();
    for (int i = 0; i < 50; ++i) {
        const Vec2 p(-1.8 + 3.6 * i / 49.0, 0);
        const auto rs = eval_ridge_eqs(s, cyl.light(), p);
        REQUIRE(rs.size() == 3);
        for (const auto& r : rs) CHECK(r.abs_residual < 1e-8);
        CHECK(rs[1].lhs == 0.0);  // f_uuu = 0 along the crest
        CHECK(rs[0].misalignment_deg < 1e-6);
    }
}

TEST_CASE("ridge residual grows with twist and alignment is enforced") {
    std::vector<std::pair<double, double>> curve;
    ShadingOptions loose;
    loose.theta_align_deg = 90;
    for (int k = 0; k <= 40; ++k) {
        Cylinder cyl;
        cyl.a2 = 0.2;
        cyl.twist = 0.03 * k;
        const auto rs = eval_ridge_eqs(cyl.surface(), cyl.light(), {0, 0}, loose);
        double worst = 0;
        for (const auto& r : rs) worst = std::max(worst, r.abs_residual);
        curve.emplace_back(rs[0].misalignment_deg, worst);
    }
    std::sort(curve.begin(), curve.end());
    CHECK(curve.front().first < 1e-9);
    CHECK(curve.back().first > 10);
    for (std::size_t i = 1; i < curve.size(); ++i)
        if (curve[i].first <= 10) CHECK(curve[i].second > curve[i - 1].second);

    Cylinder bent;
    bent.a2 = 0.2;
    bent.twist = 0.8;
    CHECK_THROWS_AS((void)eval_ridge_eqs(bent.surface(), bent.light(), {0, 0}), DomainError);
}

TEST_CASE("residual sweep tables") {
    const auto blob = fixtures::blob7();
    const std::vector<EqId> eqs{EqId::E1, EqId::E2, EqId::E3};
    CHECK(residual_sweep(blob, {{0, 0, 1}}, {}, eqs).rows.empty());

    fixtures::Sampler rng(7);
    std::vector<Vec3> lights;
    std::vector<Vec2> points;
    for (int i = 0; i < 6; ++i) lights.push_back(rng.light_within(0.5));
    for (int i = 0; i < 60; ++i) points.emplace_back(rng.uniform(40, 216), rng.uniform(40, 216));
    const auto rep = residual_sweep(blob, lights, points, eqs);
    for (EqId e : eqs) {
        const auto* row = rep.overall(e);
        REQUIRE(row != nullptr);
        CHECK(row->p95 < 1e-7);
        CHECK(row->count + rep.skipped == lights.size() * points.size());
    }
    CHECK(rep.rows.size() == 33);

    ShadingOptions fd;
    fd.path = DerivPath::FiniteDifference;
    const auto rfd = residual_sweep(blob, lights, points, eqs, fd);
    for (EqId e : eqs) CHECK(rfd.overall(e)->p95 < 1e-2);

    std::ostringstream a, b;
    rep.write_csv(a);
    residual_sweep(blob, lights, points, eqs).write_csv(b);
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("eq,decile,det_lo,det_hi,count,median,p95,max\n", 0) == 0);
    CHECK(percentile({3, 1, 2}, 0.5) == 2);
    CHECK(percentile({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, 0.95) == 10);
}
