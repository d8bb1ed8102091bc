#include "critcon/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "critcon/geometry.hpp"

namespace critcon::io {

static_assert(std::endian::native == std::endian::little, "grid raster is written in host order");

using Json = nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string hex64(std::uint64_t v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }
double num_or(const Json& j, double fallback) { return j.is_null() ? fallback : j.get<double>(); }

Json point(const Vec2& p) { return Json::array({num(p.x()), num(p.y())}); }
Vec2 point_of(const Json& j) { return {num_or(j.at(0), kNaN), num_or(j.at(1), kNaN)}; }

Json grid_json(const GridSpec& g) {
    return Json{{"width", g.width}, {"height", g.height}, {"spacing", g.spacing},
                {"origin", Json::array({g.origin_x, g.origin_y})}};
}
GridSpec grid_of(const Json& j) {
    GridSpec g;
    g.width = j.at("width").get<int>();
    g.height = j.at("height").get<int>();
    g.spacing = j.at("spacing").get<double>();
    g.origin_x = j.at("origin").at(0).get<double>();
    g.origin_y = j.at("origin").at(1).get<double>();
    return g;
}

std::string dump(const Json& j) { return j.dump(1, ' ') + "\n"; }

}  // namespace

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw FormatError("cannot open " + tmp.string() + " for writing");
        os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        os.flush();
        if (!os) throw FormatError("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw FormatError("cannot rename onto " + path.string());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

// --- grid --------------------------------------------------------------------

std::string encode_grid(const ScalarGrid& g, const std::string& units) {
    if (units.empty() || units.find_first_of(" \t\r\n") != std::string::npos)
        throw ParameterError("grid units must be a single non-empty token");
    std::vector<float> raster(g.values().begin(), g.values().end());
    for (float v : raster)
        if (!std::isfinite(v)) throw ParameterError("grid value not representable as a finite float32");
    const auto bytes = std::as_bytes(std::span(raster));
    float lo = raster.empty() ? 0.f : raster[0], hi = lo;
    for (float v : raster) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const GridSpec& s = g.spec();
    std::string out;
    out += kGridMagic;
    out += "\nwidth " + std::to_string(s.width);
    out += "\nheight " + std::to_string(s.height);
    out += "\nspacing " + fmt("%.17g", s.spacing) + " origin " + fmt("%.17g", s.origin_x) + " " +
           fmt("%.17g", s.origin_y);
    out += "\nunits " + units;
    out += "\nmin " + fmt("%.9g", lo);
    out += "\nmax " + fmt("%.9g", hi);
    out += "\nchecksum " + hex64(fnv1a64(bytes));
    out += "\n";
    out.append(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    return out;
}

GridFile decode_grid(std::string_view bytes) {
    std::size_t pos = 0;
    auto line = [&]() {
        const auto nl = bytes.find('\n', pos);
        if (nl == std::string_view::npos) throw FormatError("grid: truncated header");
        std::string l(bytes.substr(pos, nl - pos));
        pos = nl + 1;
        return l;
    };
    auto field = [&](const char* key) {
        const std::string l = line();
        const std::string k = std::string(key) + " ";
        if (l.rfind(k, 0) != 0) throw FormatError(std::string("grid: expected '") + key + "' line");
        return l.substr(k.size());
    };
    auto to_double = [](const std::string& s) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            throw FormatError("grid: bad number '" + s + "'");
        }
        if (used != s.size()) throw FormatError("grid: bad number '" + s + "'");
        return v;
    };
    auto to_int = [&](const std::string& s) {
        const double v = to_double(s);
        if (v != std::floor(v) || v < 1 || v > 1 << 20) throw FormatError("grid: bad dimension '" + s + "'");
        return static_cast<int>(v);
    };

    if (line() != kGridMagic) throw FormatError("grid: bad magic");
    GridSpec s;
    s.width = to_int(field("width"));
    s.height = to_int(field("height"));
    {
        std::istringstream ss(field("spacing"));
        std::string sp, kw, ox, oy, extra;
        ss >> sp >> kw >> ox >> oy;
        if (kw != "origin" || oy.empty() || (ss >> extra)) throw FormatError("grid: bad spacing line");
        s.spacing = to_double(sp);
        s.origin_x = to_double(ox);
        s.origin_y = to_double(oy);
        if (!(s.spacing > 0) || !std::isfinite(s.spacing)) throw FormatError("grid: spacing must be positive");
    }
    GridFile out;
    out.units = field("units");
    if (out.units.empty() || out.units.find_first_of(" \t\r") != std::string::npos)
        throw FormatError("grid: bad units tag");
    const double lo = to_double(field("min")), hi = to_double(field("max"));
    const std::string sum = field("checksum");

    const std::size_t n = s.size();
    if (bytes.size() - pos != n * sizeof(float)) throw FormatError("grid: raster size does not match header");
    std::vector<float> raster(n);
    std::memcpy(raster.data(), bytes.data() + pos, n * sizeof(float));
    if (hex64(fnv1a64(std::as_bytes(std::span(raster)))) != sum) throw FormatError("grid: checksum mismatch");

    std::vector<double> values(raster.begin(), raster.end());
    float flo = raster[0], fhi = raster[0];
    for (float v : raster) {
        if (!std::isfinite(v)) throw FormatError("grid: non-finite sample");
        flo = std::min(flo, v);
        fhi = std::max(fhi, v);
    }
    if (static_cast<float>(lo) != flo || static_cast<float>(hi) != fhi)
        throw FormatError("grid: min/max record does not match the raster");
    try {
        out.grid = ScalarGrid(s, std::move(values));
    } catch (const ParameterError& e) {
        throw FormatError(std::string("grid: ") + e.what());
    }
    return out;
}

void write_grid(const std::filesystem::path& path, const ScalarGrid& g, const std::string& units) {
    write_file_atomic(path, encode_grid(g, units));
}

GridFile read_grid(const std::filesystem::path& path) { return decode_grid(read_file(path)); }

// --- complex -----------------------------------------------------------------

ComplexRecord record_of(const MSComplex& c) {
    ComplexRecord r;
    r.grid = c.spec();
    r.source_checksum = c.source_id();
    r.threshold = c.threshold();
    r.counts = c.index_counts();
    const int w = c.spec().width;
    for (const auto& n : c.nodes()) {
        std::array<int, 2> anchor{-1, -1};
        if (!n.is_virtual) {
            const auto v = c.cubical().max_vertex(n.cell);
            anchor = {static_cast<int>(v % w), static_cast<int>(v / w)};
        }
        r.nodes.push_back({n.id, n.index, n.position, n.value, n.persistence, anchor, n.is_virtual, n.on_boundary});
    }
    for (const auto& a : c.arcs()) r.arcs.push_back({a.id, a.origin, a.destination, a.kind, a.polyline});
    for (const auto& q : c.cells()) r.cells.push_back({q.id, q.min, q.max, q.saddles, q.arcs});
    return r;
}

std::string complex_json(const ComplexRecord& r) {
    Json j;
    j["format"] = "critcon-complex 1";
    j["grid"] = grid_json(r.grid);
    j["source_checksum"] = hex64(r.source_checksum);
    j["threshold"] = r.threshold;
    j["counts"] = {{"minima", r.counts[0]}, {"saddles", r.counts[1]}, {"maxima", r.counts[2]}};
    Json nodes = Json::array();
    for (const auto& n : r.nodes)
        nodes.push_back({{"id", n.id},
                         {"index", n.index},
                         {"position", point(n.position)},
                         {"value", num(n.value)},
                         {"persistence", num(n.persistence)},
                         {"anchor", n.anchor},
                         {"virtual", n.is_virtual},
                         {"boundary", n.on_boundary}});
    j["nodes"] = std::move(nodes);
    Json arcs = Json::array();
    for (const auto& a : r.arcs) {
        Json poly = Json::array();
        for (const auto& p : a.polyline) poly.push_back(point(p));
        arcs.push_back({{"id", a.id},
                        {"kind", to_string(a.kind)},
                        {"origin", a.origin},
                        {"destination", a.destination},
                        {"polyline", std::move(poly)}});
    }
    j["arcs"] = std::move(arcs);
    Json cells = Json::array();
    for (const auto& q : r.cells)
        cells.push_back({{"id", q.id}, {"min", q.min}, {"max", q.max}, {"saddles", q.saddles}, {"arcs", q.arcs}});
    j["cells"] = std::move(cells);
    return dump(j);
}

ComplexRecord parse_complex_json(std::string_view text) {
    try {
        const Json j = Json::parse(text);
        if (j.at("format") != "critcon-complex 1") throw FormatError("complex: unknown format tag");
        ComplexRecord r;
        r.grid = grid_of(j.at("grid"));
        r.source_checksum = std::stoull(j.at("source_checksum").get<std::string>(), nullptr, 16);
        r.threshold = j.at("threshold").get<double>();
        r.counts = {j.at("counts").at("minima").get<int>(), j.at("counts").at("saddles").get<int>(),
                    j.at("counts").at("maxima").get<int>()};
        for (const auto& n : j.at("nodes")) {
            ComplexRecord::Node x;
            x.id = n.at("id").get<int>();
            x.index = n.at("index").get<int>();
            x.position = point_of(n.at("position"));
            x.anchor = n.at("anchor").get<std::array<int, 2>>();
            x.is_virtual = n.at("virtual").get<bool>();
            x.value = num_or(n.at("value"), -std::numeric_limits<double>::infinity());
            x.persistence = num_or(n.at("persistence"), kInfinitePersistence);
            x.on_boundary = n.at("boundary").get<bool>();
            r.nodes.push_back(x);
        }
        for (const auto& a : j.at("arcs")) {
            ComplexRecord::Arc x;
            x.id = a.at("id").get<int>();
            const auto kind = a.at("kind").get<std::string>();
            if (kind == to_string(SeparatrixKind::SaddleMin))
                x.kind = SeparatrixKind::SaddleMin;
            else if (kind == to_string(SeparatrixKind::SaddleMax))
                x.kind = SeparatrixKind::SaddleMax;
            else
                throw FormatError("complex: unknown arc kind '" + kind + "'");
            x.origin = a.at("origin").get<int>();
            x.destination = a.at("destination").get<int>();
            for (const auto& p : a.at("polyline")) x.polyline.push_back(point_of(p));
            r.arcs.push_back(std::move(x));
        }
        for (const auto& q : j.at("cells")) {
            ComplexRecord::Cell x;
            x.id = q.at("id").get<int>();
            x.min = q.at("min").get<int>();
            x.max = q.at("max").get<int>();
            x.saddles = q.at("saddles").get<std::array<int, 2>>();
            x.arcs = q.at("arcs").get<std::array<int, 4>>();
            r.cells.push_back(x);
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("complex: ") + e.what());
    } catch (const std::logic_error& e) {
        throw FormatError(std::string("complex: ") + e.what());
    }
}

// --- contours and reports ----------------------------------------------------

std::string contours_json(const std::vector<CriticalContour>& ks, const GridSpec& grid, double K, double M) {
    Json j;
    j["format"] = "critcon-contours 1";
    j["grid"] = grid_json(grid);
    j["thresholds"] = {{"K", K}, {"M", M}};
    Json list = Json::array();
    for (std::size_t i = 0; i < ks.size(); ++i) {
        const auto& k = ks[i];
        Json poly = Json::array();
        for (const auto& p : k.polyline) poly.push_back(point(p));
        list.push_back({{"id", static_cast<int>(i)},
                        {"closed", k.closed},
                        {"admitted", k.admitted},
                        {"K_achieved", num(k.K_achieved)},
                        {"M_achieved", num(k.M_achieved)},
                        {"endpoint_i_uu", Json::array({num(k.endpoint_i_uu[0]), num(k.endpoint_i_uu[1])})},
                        {"length_px", polyline_length(k.polyline, k.closed)},
                        {"arcs", k.arcs},
                        {"polyline", std::move(poly)}});
    }
    j["contours"] = std::move(list);
    return dump(j);
}

std::string contours_csv(const std::vector<CriticalContour>& ks) {
    std::string out = "id,closed,vertices,length_px,K_achieved,M_achieved,admitted,arcs\n";
    for (std::size_t i = 0; i < ks.size(); ++i) {
        const auto& k = ks[i];
        std::string arcs;
        for (std::size_t a = 0; a < k.arcs.size(); ++a) arcs += (a ? " " : "") + std::to_string(k.arcs[a]);
        out += std::to_string(i) + "," + (k.closed ? "1" : "0") + "," + std::to_string(k.polyline.size()) + "," +
               fmt("%.6f", polyline_length(k.polyline, k.closed)) + "," + fmt("%.9g", k.K_achieved) + "," +
               fmt("%.9g", k.M_achieved) + "," + (k.admitted ? "1" : "0") + "," + arcs + "\n";
    }
    return out;
}

std::string k_sweep_csv(const KSweep& s) {
    std::string out = "K,admitted\n";
    for (const auto& [k, n] : s.steps) out += fmt("%.9g", k) + "," + std::to_string(n) + "\n";
    return out;
}

std::string match_csv(const MatchReport& r) {
    std::string out = "a,b,mean_px,max_px,fraction\n";
    for (const auto& p : r.pairs)
        out += std::to_string(p.a) + "," + std::to_string(p.b) + "," + fmt("%.6f", p.mean) + "," +
               fmt("%.6f", p.max) + "," + fmt("%.6f", p.fraction) + "\n";
    return out;
}

std::string convergence_csv(const std::vector<ConvergenceRow>& rows) {
    std::string out = "sigma,found,hausdorff_px,mean_px,coverage,K_achieved,M_achieved,admitted\n";
    for (const auto& r : rows)
        out += fmt("%.6g", r.sigma) + "," + (r.found ? "1" : "0") + "," + fmt("%.6f", r.hausdorff) + "," +
               fmt("%.6f", r.mean_distance) + "," + fmt("%.6f", r.coverage) + "," + fmt("%.9g", r.K_achieved) +
               "," + fmt("%.9g", r.M_achieved) + "," + std::to_string(r.admitted) + "\n";
    return out;
}

// --- SVG ---------------------------------------------------------------------

namespace {

class Svg {
public:
    Svg(int w, int h) {
        body_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(2 * w) + "\" height=\"" +
                 std::to_string(2 * h) + "\" viewBox=\"-0.5 -0.5 " + std::to_string(w) + " " + std::to_string(h) +
                 "\">\n";
        body_ += "<rect x=\"-0.5\" y=\"-0.5\" width=\"" + std::to_string(w) + "\" height=\"" + std::to_string(h) +
                 "\" fill=\"#1e1e1e\"/>\n";
    }
    void open(const std::string& attrs) { body_ += "<g " + attrs + ">\n"; }
    void close() { body_ += "</g>\n"; }
    void path(const std::vector<Vec2>& pts, bool closed, const std::string& attrs = {}) {
        if (pts.size() < 2) return;
        std::string d;
        for (std::size_t i = 0; i < pts.size(); ++i)
            d += (i ? " L" : "M") + fmt("%.2f", pts[i].x()) + "," + fmt("%.2f", pts[i].y());
        if (closed) d += " Z";
        body_ += "<path d=\"" + d + "\"" + (attrs.empty() ? "" : " " + attrs) + "/>\n";
    }
    void circle(const Vec2& p, double r, const std::string& attrs) {
        body_ += "<circle cx=\"" + fmt("%.2f", p.x()) + "\" cy=\"" + fmt("%.2f", p.y()) + "\" r=\"" +
                 fmt("%.2f", r) + "\" " + attrs + "/>\n";
    }
    void cross(const Vec2& p, double r) {
        path({p + Vec2(-r, -r), p + Vec2(r, r)}, false);
        path({p + Vec2(-r, r), p + Vec2(r, -r)}, false);
    }
    void isophotes(const ScalarGrid& img, int levels) {
        open("fill=\"none\" stroke=\"#6b6b6b\" stroke-width=\"0.4\"");
        for (const auto& pl : io::isophotes(img, levels)) path(pl.points, pl.closed);
        close();
    }
    std::string finish() { return body_ + "</svg>\n"; }

private:
    std::string body_;
};

const char* kPalette[] = {"#ff5a36", "#ffd23f", "#3bceac", "#4aa3ff", "#c77dff", "#ff8fab", "#9ef01a", "#f4a261"};

}  // namespace

std::vector<Polyline> isophotes(const ScalarGrid& img, int levels) {
    if (levels < 1) throw ParameterError("isophotes: need at least one level");
    std::vector<Polyline> out;
    const double lo = img.min(), hi = img.max();
    if (!(hi > lo)) return out;
    for (int k = 1; k <= levels; ++k) {
        auto ls = level_set(img, lo + (hi - lo) * k / (levels + 1));
        out.insert(out.end(), std::make_move_iterator(ls.begin()), std::make_move_iterator(ls.end()));
    }
    return out;
}

std::string svg_isophotes(const ScalarGrid& img, int levels) {
    Svg s(img.width(), img.height());
    s.isophotes(img, levels);
    return s.finish();
}

std::string svg_complex(const ScalarGrid& img, const MSComplex& c) {
    Svg s(img.width(), img.height());
    s.isophotes(img, 12);
    s.open("fill=\"none\" stroke-width=\"0.6\"");
    for (const auto& a : c.arcs())
        s.path(a.polyline, false,
               a.kind == SeparatrixKind::SaddleMax ? "stroke=\"#ffffff\"" : "stroke=\"#4aa3ff\"");
    s.close();
    s.open("stroke=\"#ffd23f\" stroke-width=\"0.6\"");
    for (const auto& n : c.nodes()) {
        if (n.is_virtual) continue;
        if (n.index == 2)
            s.circle(n.position, 1.6, "fill=\"#ffd23f\"");
        else if (n.index == 0)
            s.circle(n.position, 1.6, "fill=\"none\"");
        else
            s.cross(n.position, 1.4);
    }
    s.close();
    return s.finish();
}

std::string svg_contours(const ScalarGrid& img, const std::vector<CriticalContour>& ks) {
    Svg s(img.width(), img.height());
    s.isophotes(img, 12);
    s.open("fill=\"none\" stroke=\"#8a8a8a\" stroke-width=\"0.4\" stroke-dasharray=\"1 1\"");
    for (const auto& k : ks)
        if (!k.admitted) s.path(k.polyline, k.closed);
    s.close();
    s.open("fill=\"none\" stroke=\"#ff5a36\" stroke-width=\"1.2\"");
    for (const auto& k : ks)
        if (k.admitted) s.path(k.polyline, k.closed);
    s.close();
    return s.finish();
}

std::string svg_match(const ScalarGrid& img, const std::vector<CriticalContour>& a,
                      const std::vector<CriticalContour>& b, const MatchReport& r) {
    Svg s(img.width(), img.height());
    s.isophotes(img, 12);
    s.open("fill=\"none\" stroke=\"#8a8a8a\" stroke-width=\"0.6\"");
    for (int i : r.unmatched_a) s.path(a[static_cast<std::size_t>(i)].polyline, a[static_cast<std::size_t>(i)].closed);
    for (int i : r.unmatched_b)
        s.path(b[static_cast<std::size_t>(i)].polyline, b[static_cast<std::size_t>(i)].closed,
               "stroke-dasharray=\"2 1\"");
    s.close();
    s.open("fill=\"none\"");
    for (std::size_t k = 0; k < r.pairs.size(); ++k) {
        const std::string col = kPalette[k % std::size(kPalette)];
        const auto& ka = a[static_cast<std::size_t>(r.pairs[k].a)];
        const auto& kb = b[static_cast<std::size_t>(r.pairs[k].b)];
        s.path(ka.polyline, ka.closed, "stroke=\"" + col + "\" stroke-width=\"1.2\"");
        s.path(kb.polyline, kb.closed, "stroke=\"" + col + "\" stroke-width=\"0.6\" stroke-dasharray=\"2 1\"");
    }
    s.close();
    return s.finish();
}

std::string svg_flow(const ScalarGrid& img, const FlowFrame& flow, int stride) {
    if (stride < 1) throw ParameterError("svg_flow: stride must be positive");
    Svg s(img.width(), img.height());
    s.isophotes(img, 12);
    s.open("stroke=\"#3bceac\" stroke-width=\"0.5\"");
    const double half = 0.4 * stride;
    for (int r = stride / 2; r < img.height(); r += stride)
        for (int c = stride / 2; c < img.width(); c += stride) {
            if (!flow.is_valid(c, r)) continue;
            const Vec2 p(c, r), u = flow.u.at(c, r);
            s.path({p - half * u, p + half * u}, false);
        }
    s.close();
    return s.finish();
}

}  // namespace critcon::io
