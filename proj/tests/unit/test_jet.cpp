#include <cmath>

#include "doctest.h"

#include "critcon/jet.hpp"

using critcon::Jet;

TEST_CASE("jet products reproduce polynomial derivatives") {
    const double x0 = 0.7, y0 = -0.3;
    const auto x = Jet<3>::x(x0);
    const auto y = Jet<3>::y(y0);
    const auto f = x * x * y + 3.0 * y * y * y - x;  // f = x^2 y + 3 y^3 - x
    CHECK(f.value() == doctest::Approx(x0 * x0 * y0 + 3 * y0 * y0 * y0 - x0));
    CHECK(f.d(1, 0) == doctest::Approx(2 * x0 * y0 - 1));
    CHECK(f.d(0, 1) == doctest::Approx(x0 * x0 + 9 * y0 * y0));
    CHECK(f.d(2, 0) == doctest::Approx(2 * y0));
    CHECK(f.d(1, 1) == doctest::Approx(2 * x0));
    CHECK(f.d(0, 2) == doctest::Approx(18 * y0));
    CHECK(f.d(2, 1) == doctest::Approx(2.0));
    CHECK(f.d(0, 3) == doctest::Approx(18.0));
    CHECK(f.d(3, 0) == doctest::Approx(0.0));
}

TEST_CASE("jet elementary functions match closed forms") {
    const double x0 = 0.4, y0 = 0.9;
    const auto x = Jet<3>::x(x0);
    const auto y = Jet<3>::y(y0);
    // g = exp(x y): g_xxy = (2 y + x y^2 ... ) computed by hand below.
    const auto g = exp(x * y);
    const double e = std::exp(x0 * y0);
    CHECK(g.d(1, 0) == doctest::Approx(y0 * e));
    CHECK(g.d(2, 0) == doctest::Approx(y0 * y0 * e));
    CHECK(g.d(1, 1) == doctest::Approx((1 + x0 * y0) * e));
    CHECK(g.d(2, 1) == doctest::Approx((2 * y0 + x0 * y0 * y0) * e));

    const auto r = sqrt(1.0 + x * x);
    CHECK(r.d(1, 0) == doctest::Approx(x0 / std::sqrt(1 + x0 * x0)));
    CHECK(r.d(2, 0) == doctest::Approx(std::pow(1 + x0 * x0, -1.5)));
    CHECK(r.d(3, 0) == doctest::Approx(-3 * x0 * std::pow(1 + x0 * x0, -2.5)));

    const auto q = 1.0 / (1.0 + x);
    CHECK(q.d(3, 0) == doctest::Approx(-6.0 / std::pow(1 + x0, 4)));
}

TEST_CASE("partial derivative lowers the degree consistently") {
    const auto x = Jet<3>::x(1.1);
    const auto y = Jet<3>::y(0.2);
    const auto f = exp(x * x - y) * y;
    const auto fx = f.dx();
    CHECK(fx.value() == doctest::Approx(f.d(1, 0)));
    CHECK(fx.d(1, 0) == doctest::Approx(f.d(2, 0)));
    CHECK(fx.d(0, 2) == doctest::Approx(f.d(1, 2)));
    const auto fy = f.dy();
    CHECK(fy.d(1, 1) == doctest::Approx(f.d(1, 2)));
}
