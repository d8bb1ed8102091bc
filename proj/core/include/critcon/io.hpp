#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "critcon/critcontours.hpp"
#include "critcon/grid.hpp"
#include "critcon/imagecalc.hpp"
#include "critcon/invariance.hpp"
#include "critcon/morse.hpp"

// File formats. Layouts are documented in docs/formats.md.
namespace critcon::io {

inline constexpr std::string_view kGridMagic = "CRITCON-GRID 1";

/// Writes `bytes` to a sibling temporary and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
[[nodiscard]] std::string read_file(const std::filesystem::path& path);

// --- grid --------------------------------------------------------------------

struct GridFile {
    ScalarGrid grid;
    std::string units;
};

/// 8-line text header then a little-endian float32 raster, row-major.
/// Samples are rounded to float32; `units` must be a single token.
[[nodiscard]] std::string encode_grid(const ScalarGrid& g, const std::string& units);
/// Throws FormatError on a bad header, size, checksum or min/max record.
[[nodiscard]] GridFile decode_grid(std::string_view bytes);

void write_grid(const std::filesystem::path& path, const ScalarGrid& g, const std::string& units);
[[nodiscard]] GridFile read_grid(const std::filesystem::path& path);

// --- complex -----------------------------------------------------------------

/// Plain-data snapshot of an MSComplex, enough to redraw and compare it.
struct ComplexRecord {
    struct Node {
        int id = -1;
        int index = 0;
        Vec2 position = Vec2::Zero();  ///< NaN for the virtual minimum
        double value = 0.0;            ///< -inf for the virtual minimum
        double persistence = kInfinitePersistence;
        /// Highest grid vertex of the cell, (col, row); (-1, -1) when virtual.
        std::array<int, 2> anchor{-1, -1};
        bool is_virtual = false;
        bool on_boundary = false;
    };
    struct Arc {
        int id = -1;
        int origin = -1;
        int destination = -1;
        SeparatrixKind kind = SeparatrixKind::SaddleMin;
        std::vector<Vec2> polyline;
    };
    struct Cell {
        int id = -1;
        int min = -1;
        int max = -1;
        std::array<int, 2> saddles{-1, -1};
        std::array<int, 4> arcs{-1, -1, -1, -1};
    };

    GridSpec grid;
    std::uint64_t source_checksum = 0;
    double threshold = 0.0;
    std::array<int, 3> counts{};
    std::vector<Node> nodes;
    std::vector<Arc> arcs;
    std::vector<Cell> cells;
};

[[nodiscard]] ComplexRecord record_of(const MSComplex& c);
/// Canonical JSON; non-finite numbers are written as null.
[[nodiscard]] std::string complex_json(const ComplexRecord& r);
[[nodiscard]] ComplexRecord parse_complex_json(std::string_view text);

// --- contours and reports ----------------------------------------------------

[[nodiscard]] std::string contours_json(const std::vector<CriticalContour>& ks, const GridSpec& grid, double K,
                                        double M);
/// id,closed,vertices,length_px,K_achieved,M_achieved,admitted,arcs
[[nodiscard]] std::string contours_csv(const std::vector<CriticalContour>& ks);
[[nodiscard]] std::string k_sweep_csv(const KSweep& s);
[[nodiscard]] std::string match_csv(const MatchReport& r);
[[nodiscard]] std::string convergence_csv(const std::vector<ConvergenceRow>& rows);

// --- SVG ---------------------------------------------------------------------

/// Marching-squares isophotes at `levels` evenly spaced interior levels.
[[nodiscard]] std::vector<Polyline> isophotes(const ScalarGrid& img, int levels = 12);

[[nodiscard]] std::string svg_isophotes(const ScalarGrid& img, int levels = 12);
/// Arcs (ascending white, descending blue) over isophotes; maxima solid,
/// minima hollow, saddles crossed.
[[nodiscard]] std::string svg_complex(const ScalarGrid& img, const MSComplex& c);
/// Admitted contours in colour, rejected candidates faint.
[[nodiscard]] std::string svg_contours(const ScalarGrid& img, const std::vector<CriticalContour>& ks);
/// Matched pairs share a colour; unmatched contours are grey.
[[nodiscard]] std::string svg_match(const ScalarGrid& img, const std::vector<CriticalContour>& a,
                                    const std::vector<CriticalContour>& b, const MatchReport& r);
/// Needles along the flow direction u every `stride` pixels, over isophotes.
[[nodiscard]] std::string svg_flow(const ScalarGrid& img, const FlowFrame& flow, int stride = 8);

}  // namespace critcon::io
