#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "critcon/error.hpp"

namespace critcon {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;

/// Placement of a regular pixel lattice in world coordinates. Pixel (col, row)
/// sits at world point (origin_x + col * spacing, origin_y + row * spacing).
struct GridSpec {
    int width = 0;
    int height = 0;
    double spacing = 1.0;
    double origin_x = 0.0;
    double origin_y = 0.0;

    [[nodiscard]] Vec2 world(double col, double row) const {
        return {origin_x + col * spacing, origin_y + row * spacing};
    }
    [[nodiscard]] Vec2 pixel(const Vec2& w) const {
        return {(w.x() - origin_x) / spacing, (w.y() - origin_y) / spacing};
    }
    [[nodiscard]] std::size_t size() const {
        return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    }
    [[nodiscard]] bool same_lattice(const GridSpec& o) const {
        return width == o.width && height == o.height && spacing == o.spacing &&
               origin_x == o.origin_x && origin_y == o.origin_y;
    }

    /// Square grid of n x n pixels covering [lo, hi]^2 (pixel centers on the
    /// closed interval).
    static GridSpec square(int n, double lo, double hi);
};

/// Row-major scalar samples on a GridSpec. Values must be finite and the
/// lattice at least 8 x 8.
class ScalarGrid {
public:
    ScalarGrid() = default;
    explicit ScalarGrid(GridSpec spec, double fill = 0.0);
    ScalarGrid(GridSpec spec, std::vector<double> values);

    [[nodiscard]] const GridSpec& spec() const { return spec_; }
    [[nodiscard]] int width() const { return spec_.width; }
    [[nodiscard]] int height() const { return spec_.height; }
    [[nodiscard]] double spacing() const { return spec_.spacing; }

    [[nodiscard]] double operator()(int col, int row) const {
        return values_[index(col, row)];
    }
    double& operator()(int col, int row) { return values_[index(col, row)]; }

    [[nodiscard]] std::size_t index(int col, int row) const {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(spec_.width) +
               static_cast<std::size_t>(col);
    }
    [[nodiscard]] bool contains(int col, int row) const {
        return col >= 0 && row >= 0 && col < spec_.width && row < spec_.height;
    }

    [[nodiscard]] std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    [[nodiscard]] double min() const;
    [[nodiscard]] double max() const;
    [[nodiscard]] double range() const { return max() - min(); }

    /// Bilinear interpolation at fractional pixel coordinates, clamped to the
    /// lattice.
    [[nodiscard]] double sample(double col, double row) const;

    /// Throws ParameterError unless every value is finite and the lattice is
    /// at least 8 x 8.
    void validate() const;

    /// FNV-1a 64 over the lattice dimensions and the raw samples.
    [[nodiscard]] std::uint64_t checksum() const;

    friend bool operator==(const ScalarGrid&, const ScalarGrid&) = default;

private:
    GridSpec spec_{};
    std::vector<double> values_;
};

/// Two-channel grid (vector field) on a lattice.
struct VectorGrid {
    ScalarGrid x;
    ScalarGrid y;

    [[nodiscard]] Vec2 at(int col, int row) const { return {x(col, row), y(col, row)}; }
    [[nodiscard]] Vec2 sample(double col, double row) const {
        return {x.sample(col, row), y.sample(col, row)};
    }
};

bool operator==(const GridSpec& a, const GridSpec& b);

/// 64-bit FNV-1a, continuing from `state`.
[[nodiscard]] std::uint64_t fnv1a64(std::span<const std::byte> bytes,
                                    std::uint64_t state = 0xcbf29ce484222325ULL);

}  // namespace critcon
