#include "critcon/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace critcon {

bool operator==(const GridSpec& a, const GridSpec& b) { return a.same_lattice(b); }

GridSpec GridSpec::square(int n, double lo, double hi) {
    if (n < 2 || !(hi > lo)) throw ParameterError("GridSpec::square: need n >= 2 and hi > lo");
    GridSpec g;
    g.width = n;
    g.height = n;
    g.spacing = (hi - lo) / (n - 1);
    g.origin_x = lo;
    g.origin_y = lo;
    return g;
}

ScalarGrid::ScalarGrid(GridSpec spec, double fill) : spec_(spec), values_(spec.size(), fill) {}

ScalarGrid::ScalarGrid(GridSpec spec, std::vector<double> values)
    : spec_(spec), values_(std::move(values)) {
    if (values_.size() != spec_.size())
        throw ParameterError("ScalarGrid: value count does not match lattice size");
}

double ScalarGrid::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarGrid::max() const { return *std::max_element(values_.begin(), values_.end()); }

double ScalarGrid::sample(double col, double row) const {
    const double cx = std::clamp(col, 0.0, static_cast<double>(spec_.width - 1));
    const double cy = std::clamp(row, 0.0, static_cast<double>(spec_.height - 1));
    const int c0 = std::min(static_cast<int>(cx), spec_.width - 2);
    const int r0 = std::min(static_cast<int>(cy), spec_.height - 2);
    const double tx = cx - c0;
    const double ty = cy - r0;
    const double a = (*this)(c0, r0);
    const double b = (*this)(c0 + 1, r0);
    const double c = (*this)(c0, r0 + 1);
    const double d = (*this)(c0 + 1, r0 + 1);
    return (1 - ty) * ((1 - tx) * a + tx * b) + ty * ((1 - tx) * c + tx * d);
}

void ScalarGrid::validate() const {
    if (spec_.width < 8 || spec_.height < 8)
        throw ParameterError("ScalarGrid: lattice must be at least 8 x 8, got " +
                             std::to_string(spec_.width) + " x " + std::to_string(spec_.height));
    if (!(spec_.spacing > 0)) throw ParameterError("ScalarGrid: spacing must be positive");
    for (double v : values_)
        if (!std::isfinite(v)) throw ParameterError("ScalarGrid: non-finite sample");
}

std::uint64_t fnv1a64(std::span<const std::byte> bytes, std::uint64_t state) {
    for (std::byte b : bytes) {
        state ^= static_cast<std::uint64_t>(b);
        state *= 0x100000001b3ULL;
    }
    return state;
}

std::uint64_t ScalarGrid::checksum() const {
    const std::int32_t dims[2] = {spec_.width, spec_.height};
    const std::uint64_t h = fnv1a64(std::as_bytes(std::span(dims)));
    return fnv1a64(std::as_bytes(std::span(values_)), h);
}

}  // namespace critcon
