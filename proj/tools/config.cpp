#include "config.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "critcon/io.hpp"

namespace critcon::app {

namespace {

using boost::property_tree::ptree;

std::vector<double> numbers(const std::string& key, const std::string& text) {
    std::istringstream ss(text);
    std::vector<double> out;
    std::string tok;
    while (ss >> tok) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != tok.size() || !std::isfinite(v)) throw ConfigError(key + ": bad number '" + tok + "'");
        out.push_back(v);
    }
    return out;
}

/// One section with key bookkeeping: every key must be consumed.
class Section {
public:
    Section(std::string name, const ptree* t) : name_(std::move(name)), t_(t) {}

    [[nodiscard]] bool has(const std::string& k) const { return t_ && t_->find(k) != t_->not_found(); }

    std::string str(const std::string& k, const std::string& fallback) {
        used_.insert(k);
        return has(k) ? t_->get<std::string>(k) : fallback;
    }
    double num(const std::string& k, double fallback) {
        if (!has(k)) return used_.insert(k), fallback;
        const auto v = vec(k, 1);
        return v[0];
    }
    std::optional<double> opt_num(const std::string& k) {
        if (!has(k)) return std::nullopt;
        return num(k, 0.0);
    }
    int integer(const std::string& k, int fallback) {
        const double v = num(k, fallback);
        if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(where(k) + ": expected an integer");
        return static_cast<int>(v);
    }
    bool boolean(const std::string& k, bool fallback) {
        const std::string s = str(k, fallback ? "true" : "false");
        if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
        if (s == "false" || s == "0" || s == "no" || s == "off") return false;
        throw ConfigError(where(k) + ": expected true or false");
    }
    std::vector<double> vec(const std::string& k, std::size_t n) {
        used_.insert(k);
        auto v = numbers(where(k), t_->get<std::string>(k));
        if (n && v.size() != n) throw ConfigError(where(k) + ": expected " + std::to_string(n) + " numbers");
        return v;
    }
    Vec2 vec2(const std::string& k, const Vec2& fallback) {
        if (!has(k)) return used_.insert(k), fallback;
        const auto v = vec(k, 2);
        return {v[0], v[1]};
    }
    Vec3 vec3(const std::string& k, const Vec3& fallback) {
        if (!has(k)) return used_.insert(k), fallback;
        const auto v = vec(k, 3);
        return {v[0], v[1], v[2]};
    }
    /// "a b c; d e f" -> rows of `width` numbers.
    std::vector<std::vector<double>> rows(const std::string& k, std::size_t width) {
        used_.insert(k);
        std::vector<std::vector<double>> out;
        std::istringstream ss(t_->get<std::string>(k));
        std::string part;
        while (std::getline(ss, part, ';')) {
            if (part.find_first_not_of(" \t") == std::string::npos) continue;
            auto v = numbers(where(k), part);
            if (v.size() != width) throw ConfigError(where(k) + ": each entry needs " + std::to_string(width) + " numbers");
            out.push_back(std::move(v));
        }
        if (out.empty()) throw ConfigError(where(k) + ": empty list");
        return out;
    }
    void finish() const {
        if (!t_) return;
        for (const auto& [key, child] : *t_)
            if (!used_.count(key)) throw ConfigError("unknown key '" + key + "' in [" + name_ + "]");
    }
    [[nodiscard]] std::string where(const std::string& k) const { return "[" + name_ + "] " + k; }

private:
    std::string name_;
    const ptree* t_;
    std::set<std::string> used_;
};

double positive(const std::string& what, double v) {
    if (!(v > 0) || !std::isfinite(v)) throw ConfigError(what + " must be positive");
    return v;
}

Vec3 unit_light(Section& s) {
    const Vec3 l = s.vec3("light", {0, 0, 1});
    if (!(l.norm() > 0)) throw ConfigError(s.where("light") + ": zero vector");
    return l.normalized();
}

RenderSpec parse_render(Section s) {
    const std::string model = s.str("model", "lambertian");
    RenderSpec spec;
    if (model == "lambertian") {
        spec = Lambertian{unit_light(s), s.num("albedo", 1.0)};
    } else if (model == "specular") {
        Specular sp;
        sp.light = unit_light(s);
        sp.exponent = s.num("exponent", sp.exponent);
        sp.diffuse_weight = s.num("diffuse_weight", sp.diffuse_weight);
        sp.specular_weight = s.num("specular_weight", sp.specular_weight);
        spec = sp;
    } else if (model == "slant") {
        spec = SlantImage{};
    } else if (model == "monotone_cos") {
        spec = MonotoneOfCos{unit_light(s), s.num("gamma", 0.5)};
    } else if (model == "lambertian_sum") {
        LambertianSum ls;
        for (const auto& r : s.rows("lights", 3)) {
            const Vec3 l(r[0], r[1], r[2]);
            if (!(l.norm() > 0)) throw ConfigError(s.where("lights") + ": zero vector");
            ls.lights.push_back(l.normalized());
        }
        for (const auto& r : s.rows("weights", 1)) ls.weights.push_back(r[0]);
        spec = ls;
    } else {
        throw ConfigError(s.where("model") + ": unknown model '" + model + "'");
    }
    s.finish();
    try {
        validate(spec);
    } catch (const ParameterError& e) {
        throw ConfigError(s.where("model") + ": " + e.what());
    }
    return spec;
}

/// Positions are fractions of the side mapped onto [0, n-1]; lengths are
/// fractions of n; polynomial coefficients act on pixel offsets.
AnalyticSurface parse_surface(Section s, int n, std::uint64_t seed, std::string& kind) {
    const Domain dom{0.0, n - 1.0, 0.0, n - 1.0};
    auto pos = [&](const Vec2& f) { return Vec2(f.x() * (n - 1.0), f.y() * (n - 1.0)); };
    kind = s.str("kind", "sigmoidal_bump");
    const double tilt = s.num("tilt", kDefaultTilt);
    std::optional<AnalyticSurface> out;
    if (kind == "sigmoidal_bump") {
        const double edge = s.num("edge_width", 0.0) * n;
        const double bend = s.num("bend", 0.0);
        if (s.has("bumps")) {
            std::vector<SigmoidBumpParams::Bump> bumps;
            for (const auto& r : s.rows("bumps", 4)) {
                const double radius = positive(s.where("bumps") + " radius", r[2]) * n;
                bumps.push_back({pos({r[0], r[1]}), radius, r[3] * n, edge > 0 ? edge : radius / 8});
            }
            out = make_bumps(std::move(bumps), tilt, dom, bend);
        } else {
            const double radius = positive(s.where("radius"), s.num("radius", 0.2)) * n;
            out = make_sigmoidal_bump(pos(s.vec2("center", {0.5, 0.5})), radius, s.num("height", 0.12) * n, tilt, dom,
                                      edge, bend);
        }
    } else if (kind == "blob") {
        const int lobes = s.integer("lobes", 5);
        const double blob_seed = s.num("seed", static_cast<double>(seed));
        if (blob_seed < 0 || blob_seed != std::floor(blob_seed)) throw ConfigError(s.where("seed") + ": expected a non-negative integer");
        out = make_blob(static_cast<std::uint64_t>(blob_seed), lobes, dom, tilt);
    } else if (kind == "ridge") {
        RidgeParams p;
        p.origin = pos(s.vec2("origin", {0.5, 0.5}));
        p.height = s.num("height", 0.12) * n;
        p.width = positive(s.where("width"), s.num("width", 0.08)) * n;
        p.bend = s.num("bend", 0.0);
        p.taper = s.num("taper", 0.0);
        p.tilt = tilt * Vec2(0.8, 0.6);
        out = make_ridge(p, dom);
    } else if (kind == "quadratic") {
        const auto c = s.vec("coefficients", 3);
        out = make_quadratic(c[0], c[1], c[2], s.vec2("slope", {0.0, 0.0}), dom, pos(s.vec2("origin", {0.5, 0.5})));
    } else if (kind == "plane") {
        out = make_plane(s.num("offset", 0.0), s.vec2("slope", {0.02, 0.01}), dom);
    } else if (kind == "taylor_patch") {
        const auto v = s.vec("coefficients", 10);
        std::array<double, 10> c{};
        std::copy(v.begin(), v.end(), c.begin());
        out = make_taylor_patch(c, dom, pos(s.vec2("origin", {0.5, 0.5})));
    } else {
        throw ConfigError(s.where("kind") + ": unknown surface kind '" + kind + "'");
    }
    s.finish();
    return *out;
}

bool valid_name(const std::string& s) {
    if (s.empty()) return false;
    for (char ch : s)
        if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-')) return false;
    return true;
}

}  // namespace

RunConfig parse_config(const std::string& text, const Overrides& ov) {
    ptree root;
    try {
        std::istringstream ss(text);
        boost::property_tree::ini_parser::read_ini(ss, root);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
    }

    RunConfig cfg;
    cfg.config_hash = [&] {
        char buf[24];
        std::snprintf(buf, sizeof buf, "%016llx",
                      static_cast<unsigned long long>(fnv1a64(std::as_bytes(std::span(text.data(), text.size())))));
        return std::string(buf);
    }();

    auto section = [&](const std::string& name) {
        auto it = root.find(name);
        return Section(name, it == root.not_found() ? nullptr : &it->second);
    };

    try {
        for (const auto& [name, child] : root) {
            if (child.empty() && !child.data().empty()) throw ConfigError("key '" + name + "' outside any section");
            const bool known = name == "run" || name == "surface" || name == "thresholds" || name == "eqs" ||
                               name == "blur" || name.rfind("render.", 0) == 0;
            if (!known) throw ConfigError("unknown section [" + name + "]");
        }

        {
            Section s = section("run");
            const double seed = s.num("seed", 0.0);
            if (seed < 0 || seed != std::floor(seed) || seed > 9.0e15) throw ConfigError("[run] seed: expected a non-negative integer");
            cfg.seed = ov.seed.value_or(static_cast<std::uint64_t>(seed));
            cfg.resolution = s.integer("resolution", 256);
            cfg.threads = ov.threads.value_or(s.integer("threads", 0));
            cfg.svg = ov.svg.value_or(s.boolean("svg", true));
            cfg.out = ov.out.value_or(std::filesystem::path(s.str("out", "out")));
            s.finish();
            if (cfg.resolution < 64) throw ConfigError("[run] resolution must be at least 64");
            if (cfg.resolution > 8192) throw ConfigError("[run] resolution must be at most 8192");
            if (cfg.threads < 0) throw ConfigError("[run] threads must be >= 0");
        }

        try {
            cfg.surface = parse_surface(section("surface"), cfg.resolution, cfg.seed, cfg.surface_kind);
        } catch (const ParameterError& e) {
            throw ConfigError(std::string("[surface] ") + e.what());
        }

        for (const auto& [name, child] : root) {
            if (name.rfind("render.", 0) != 0) continue;
            const std::string label = name.substr(7);
            if (!valid_name(label)) throw ConfigError("[" + name + "]: render names use letters, digits, '_' and '-'");
            cfg.renders.push_back({label, parse_render(Section(name, &child))});
        }

        {
            Section s = section("thresholds");
            Thresholds& t = cfg.thresholds;
            t.tau = positive("tau", ov.tau.value_or(s.num("tau", t.tau)));
            t.k = positive("k", ov.k.value_or(s.num("k", t.k)));
            t.m = positive("m", ov.m.value_or(s.num("m", t.m)));
            t.delta = positive("delta", ov.delta.value_or(s.num("delta", 3.0 * cfg.resolution / 256.0)));
            t.epsilon_grad = positive("epsilon_grad", s.num("epsilon_grad", t.epsilon_grad));
            if (auto dh = s.opt_num("delta_h")) t.delta_h = positive("delta_h", *dh);
            s.finish();
        }

        {
            Section s = section("eqs");
            EqsConfig& e = cfg.eqs;
            e.lights = s.integer("lights", e.lights);
            e.points = s.integer("points", e.points);
            e.max_polar_deg = s.num("max_polar_deg", e.max_polar_deg);
            if (s.has("equations")) {
                e.equations.clear();
                std::istringstream ss(s.str("equations", ""));
                std::string tok;
                while (ss >> tok) {
                    try {
                        e.equations.push_back(eq_id_from_string(tok));
                    } catch (const ParameterError&) {
                        throw ConfigError(s.where("equations") + ": unknown equation '" + tok + "'");
                    }
                }
            }
            const std::string path = s.str("path", "analytic");
            if (path == "analytic")
                e.path = DerivPath::Analytic;
            else if (path == "fd")
                e.path = DerivPath::FiniteDifference;
            else
                throw ConfigError(s.where("path") + ": expected analytic or fd");
            s.finish();
            if (e.lights < 1 || e.points < 1) throw ConfigError("[eqs] lights and points must be positive");
            if (e.equations.empty()) throw ConfigError("[eqs] equations: empty list");
            if (!(e.max_polar_deg >= 0 && e.max_polar_deg < 90)) throw ConfigError("[eqs] max_polar_deg must be in [0, 90)");
        }

        {
            Section s = section("blur");
            BlurConfig& b = cfg.blur;
            b.shape = s.str("shape", b.shape);
            b.center = s.vec2("center", b.center);
            b.radius = s.num("radius", b.radius);
            b.from = s.vec2("from", b.from);
            b.to = s.vec2("to", b.to);
            b.vertices = s.integer("vertices", b.vertices);
            if (s.has("sigmas")) b.sigmas = s.vec("sigmas", 0);
            if (auto k = s.opt_num("k")) b.k = positive("[blur] k", *k);
            if (auto m = s.opt_num("m")) b.m = positive("[blur] m", *m);
            s.finish();
            if (b.shape != "circle" && b.shape != "segment") throw ConfigError("[blur] shape: expected circle or segment");
            if (b.vertices < 3) throw ConfigError("[blur] vertices must be at least 3");
            positive("[blur] radius", b.radius);
            if (b.sigmas.empty()) throw ConfigError("[blur] sigmas: empty list");
            for (std::size_t i = 0; i < b.sigmas.size(); ++i) {
                positive("[blur] sigmas", b.sigmas[i]);
                if (i && !(b.sigmas[i] < b.sigmas[i - 1])) throw ConfigError("[blur] sigmas must be strictly decreasing");
            }
        }
    } catch (const boost::property_tree::ptree_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path, const Overrides& ov) {
    std::string text;
    try {
        text = io::read_file(path);
    } catch (const FormatError& e) {
        throw ConfigError(e.what());
    }
    RunConfig cfg = parse_config(text, ov);
    cfg.source = path;
    return cfg;
}

}  // namespace critcon::app
