#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "critcon/error.hpp"
#include "critcon/render.hpp"
#include "critcon/shadingeq.hpp"
#include "critcon/surface.hpp"

namespace critcon::app {

/// Malformed or inconsistent configuration; maps to exit code 2.
class ConfigError : public FormatError {
public:
    using FormatError::FormatError;
};

struct NamedRender {
    std::string name;
    RenderSpec spec;
    [[nodiscard]] bool is_slant() const { return std::holds_alternative<SlantImage>(spec); }
};

/// Persistence, K and M are fractions of each image's range; delta is in
/// pixels.
struct Thresholds {
    double tau = 0.05;
    double k = 1e-3;
    double m = 0.05;
    double delta = 0.0;  ///< 0 until resolved to 3 px per 256
    double epsilon_grad = 1e-6;
    std::optional<double> delta_h;
};

struct EqsConfig {
    int lights = 20;
    int points = 200;
    std::vector<EqId> equations{EqId::E1, EqId::E2, EqId::E3};
    DerivPath path = DerivPath::Analytic;
    double max_polar_deg = 30.0;
};

struct BlurConfig {
    std::string shape = "circle";  ///< circle | segment
    Vec2 center{0.5, 0.5};         ///< fractions of the side
    double radius = 60.0 / 256.0;  ///< fraction of the side
    Vec2 from{0.1875, 0.390625};
    Vec2 to{0.8125, 0.5859375};
    int vertices = 480;
    std::vector<double> sigmas{6, 4, 2, 1};
    /// Absolute thresholds; data-driven defaults per sigma when absent.
    std::optional<double> k;
    std::optional<double> m;
};

struct RunConfig {
    std::filesystem::path source;
    /// FNV-1a of the config text, hex.
    std::string config_hash;
    std::uint64_t seed = 0;
    int resolution = 256;
    int threads = 0;
    bool svg = true;
    std::filesystem::path out = "out";
    std::string surface_kind;
    std::optional<AnalyticSurface> surface;
    std::vector<NamedRender> renders;
    Thresholds thresholds;
    EqsConfig eqs;
    BlurConfig blur;

    [[nodiscard]] GridSpec grid() const { return GridSpec::square(resolution, 0.0, resolution - 1.0); }
};

/// Command-line values that replace config entries.
struct Overrides {
    std::optional<std::filesystem::path> out;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<double> k, m, tau, delta;
    std::optional<bool> svg;
};

/// Parses INI text. Throws ConfigError on unknown sections or keys, bad
/// values, or any threshold that is not positive.
[[nodiscard]] RunConfig parse_config(const std::string& text, const Overrides& ov = {});
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path, const Overrides& ov = {});

}  // namespace critcon::app
