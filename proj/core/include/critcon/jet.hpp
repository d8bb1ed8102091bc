#pragma once

#include <array>
#include <cmath>

namespace critcon {

/// Truncated bivariate Taylor polynomial of total degree N about a point.
///
/// Coefficient of x^i y^j is stored at slot(i, j) and equals
/// (d^{i+j} f / dx^i dy^j) / (i! j!). Arithmetic truncates every product to
/// degree N, so composing jets is forward-mode differentiation to order N.
template <int N>
class Jet {
public:
    static constexpr int kSize = (N + 1) * (N + 2) / 2;

    static constexpr int slot(int i, int j) {
        const int d = i + j;
        return d * (d + 1) / 2 + j;
    }

    constexpr Jet() = default;
    constexpr Jet(double constant) { c_[0] = constant; }  // NOLINT(implicit)

    /// The identity jets of the two coordinates, expanded about (x0, y0).
    static Jet x(double x0) {
        Jet r(x0);
        r.c_[slot(1, 0)] = 1.0;
        return r;
    }
    static Jet y(double y0) {
        Jet r(y0);
        r.c_[slot(0, 1)] = 1.0;
        return r;
    }

    [[nodiscard]] double value() const { return c_[0]; }
    [[nodiscard]] double coeff(int i, int j) const { return c_[slot(i, j)]; }
    double& coeff(int i, int j) { return c_[slot(i, j)]; }

    /// Partial derivative d^{i+j} / dx^i dy^j at the expansion point.
    [[nodiscard]] double d(int i, int j) const {
        return c_[slot(i, j)] * factorial(i) * factorial(j);
    }

    /// d/dx as a jet of one lower degree.
    [[nodiscard]] Jet<N - 1> dx() const {
        Jet<N - 1> r;
        for (int deg = 0; deg < N; ++deg)
            for (int j = 0; j <= deg; ++j) {
                const int i = deg - j;
                r.coeff(i, j) = (i + 1) * coeff(i + 1, j);
            }
        return r;
    }
    [[nodiscard]] Jet<N - 1> dy() const {
        Jet<N - 1> r;
        for (int deg = 0; deg < N; ++deg)
            for (int j = 0; j <= deg; ++j) {
                const int i = deg - j;
                r.coeff(i, j) = (j + 1) * coeff(i, j + 1);
            }
        return r;
    }

    /// Drop to a lower degree.
    template <int M>
    [[nodiscard]] Jet<M> truncate() const {
        static_assert(M <= N);
        Jet<M> r;
        for (int k = 0; k < Jet<M>::kSize; ++k) r.raw(k) = c_[k];
        return r;
    }

    [[nodiscard]] double raw(int k) const { return c_[k]; }
    double& raw(int k) { return c_[k]; }

    Jet& operator+=(const Jet& o) {
        for (int k = 0; k < kSize; ++k) c_[k] += o.c_[k];
        return *this;
    }
    Jet& operator-=(const Jet& o) {
        for (int k = 0; k < kSize; ++k) c_[k] -= o.c_[k];
        return *this;
    }
    Jet& operator*=(double s) {
        for (double& v : c_) v *= s;
        return *this;
    }

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator-(Jet a) { return a *= -1.0; }
    friend Jet operator*(Jet a, double s) { return a *= s; }
    friend Jet operator*(double s, Jet a) { return a *= s; }

    friend Jet operator*(const Jet& a, const Jet& b) {
        Jet r;
        for (int da = 0; da <= N; ++da)
            for (int ja = 0; ja <= da; ++ja) {
                const double ca = a.c_[slot(da - ja, ja)];
                if (ca == 0.0) continue;
                for (int db = 0; db + da <= N; ++db)
                    for (int jb = 0; jb <= db; ++jb)
                        r.c_[slot(da - ja + db - jb, ja + jb)] += ca * b.c_[slot(db - jb, jb)];
            }
        return r;
    }

    friend Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

    /// Apply a scalar function given its value and first N derivatives at
    /// the expansion value.
    [[nodiscard]] Jet compose(const std::array<double, N + 1>& derivs) const {
        Jet delta = *this;
        delta.c_[0] = 0.0;
        Jet result(derivs[0]);
        Jet power(1.0);
        double fact = 1.0;
        for (int k = 1; k <= N; ++k) {
            power = power * delta;
            fact *= k;
            result += power * (derivs[k] / fact);
        }
        return result;
    }

    friend Jet reciprocal(const Jet& a) {
        const double v = a.value();
        std::array<double, N + 1> d{};
        double p = 1.0 / v;
        double sign = 1.0;
        double fact = 1.0;
        for (int k = 0; k <= N; ++k) {
            d[k] = sign * fact * p;
            p /= v;
            sign = -sign;
            fact *= (k + 1);
        }
        return a.compose(d);
    }

    friend Jet sqrt(const Jet& a) {
        const double v = a.value();
        std::array<double, N + 1> d{};
        double coef = 1.0;
        double expo = 0.5;
        for (int k = 0; k <= N; ++k) {
            d[k] = coef * std::pow(v, expo);
            coef *= expo;
            expo -= 1.0;
        }
        return a.compose(d);
    }

    friend Jet exp(const Jet& a) {
        std::array<double, N + 1> d{};
        d.fill(std::exp(a.value()));
        return a.compose(d);
    }

private:
    static constexpr double factorial(int n) {
        double f = 1.0;
        for (int k = 2; k <= n; ++k) f *= k;
        return f;
    }

    std::array<double, kSize> c_{};
};

}  // namespace critcon
