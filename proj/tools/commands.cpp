#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "json.hpp"

#include "critcon/critcontours.hpp"
#include "critcon/imagecalc.hpp"
#include "critcon/invariance.hpp"
#include "critcon/io.hpp"
#include "critcon/morse.hpp"
#include "critcon/parallel.hpp"
#include "critcon/render.hpp"
#include "critcon/shadingeq.hpp"

namespace critcon::app {

using Json = nlohmann::ordered_json;

namespace {

/// Collects outputs under one directory and writes the manifest last.
class Output {
public:
    Output(const RunConfig& cfg, std::string command) : cfg_(cfg), command_(std::move(command)) {
        std::error_code ec;
        std::filesystem::create_directories(cfg.out, ec);
        if (ec || !std::filesystem::is_directory(cfg.out))
            throw ConfigError("cannot create output directory " + cfg.out.string());
        set_thread_count(cfg.threads);
    }
    void text(const std::string& name, const std::string& body) {
        io::write_file_atomic(cfg_.out / name, body);
        result_.files.push_back(name);
    }
    void json(const std::string& name, const Json& j) { text(name, j.dump(1, ' ') + "\n"); }
    void svg(const std::string& name, const std::string& body) {
        if (cfg_.svg) text(name, body);
    }
    void grid(const std::string& name, const ScalarGrid& g, const std::string& units) {
        io::write_grid(cfg_.out / name, g, units);
        result_.files.push_back(name);
    }
    CommandResult finish(Json extra = Json::object()) {
        Json m;
        m["command"] = command_;
        m["config_hash"] = cfg_.config_hash;
        m["seed"] = cfg_.seed;
        m["resolution"] = cfg_.resolution;
        m["surface"] = cfg_.surface_kind;
        for (auto& [k, v] : extra.items()) m[k] = v;
        m["files"] = result_.files;
        text("run.json", m.dump(1, ' ') + "\n");
        return result_;
    }

private:
    const RunConfig& cfg_;
    std::string command_;
    CommandResult result_;
};

Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

NormalField normals_of(const RunConfig& cfg) { return normals(*cfg.surface, cfg.grid()); }

void require_renders(const RunConfig& cfg) {
    if (cfg.renders.empty()) throw ConfigError("config has no [render.*] section");
}

std::vector<ScalarGrid> render_all(const RunConfig& cfg, const NormalField& n,
                                   std::vector<RenderResult>* results = nullptr) {
    std::vector<RenderResult> out(cfg.renders.size());
    parallel_for(static_cast<int>(out.size()), [&](int i) {
        out[static_cast<std::size_t>(i)] = render(n, cfg.renders[static_cast<std::size_t>(i)].spec);
    });
    std::vector<ScalarGrid> images;
    for (const auto& r : out) images.push_back(r.image);
    if (results) *results = std::move(out);
    return images;
}

struct Analysis {
    ScalarGrid image;
    MSComplex complex;
    /// Every candidate, `admitted` set against K and M.
    std::vector<CriticalContour> candidates;
    double K = 0.0, M = 0.0;

    [[nodiscard]] std::vector<CriticalContour> admitted() const {
        std::vector<CriticalContour> out;
        for (const auto& k : candidates)
            if (k.admitted) out.push_back(k);
        return out;
    }
};

/// Simplify at tau * range, thresholds K = k * range and M = m * range. A
/// constant image has no candidates.
Analysis analyse(ScalarGrid img, const Thresholds& t) {
    const double range = img.range();
    Analysis a{std::move(img), MSComplex{}, {}, t.k * range, t.m * range};
    a.complex = simplify(build_complex(a.image), t.tau * range);
    if (range > 0) {
        a.candidates = candidate_contours(a.image, a.complex);
        for (auto& k : a.candidates) k.admitted = k.admits(a.K, a.M);
    }
    return a;
}

std::vector<Analysis> analyse_all(const RunConfig& cfg, const std::vector<ScalarGrid>& images) {
    std::vector<Analysis> out(images.size());
    parallel_for(static_cast<int>(images.size()),
                 [&](int i) { out[static_cast<std::size_t>(i)] = analyse(images[static_cast<std::size_t>(i)], cfg.thresholds); });
    return out;
}

Json report_json(const MatchReport& r) {
    Json pairs = Json::array();
    for (const auto& p : r.pairs)
        pairs.push_back({{"a", p.a}, {"b", p.b}, {"mean_px", p.mean}, {"max_px", p.max}, {"fraction", p.fraction}});
    return {{"delta_px", r.delta},
            {"graph_equivalent", r.graph_equivalent},
            {"pairs", std::move(pairs)},
            {"unmatched_a", r.unmatched_a},
            {"unmatched_b", r.unmatched_b}};
}

std::string summary_csv_row(const std::string& a, const std::string& b, const MatchReport& r) {
    double mean = 0, max = 0;
    for (const auto& p : r.pairs) {
        mean = std::max(mean, p.mean);
        max = std::max(max, p.max);
    }
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s,%s,%zu,%zu,%zu,%d,%.6f,%.6f\n", a.c_str(), b.c_str(), r.pairs.size(),
                  r.unmatched_a.size(), r.unmatched_b.size(), r.graph_equivalent ? 1 : 0, mean, max);
    return buf;
}

constexpr const char* kSummaryHeader = "a,b,pairs,unmatched_a,unmatched_b,graph_equivalent,worst_mean_px,worst_max_px\n";

}  // namespace

CommandResult cmd_synth(const RunConfig& cfg) {
    Output out(cfg, "synth");
    const ScalarGrid h = sample_height(*cfg.surface, cfg.grid());
    const ScalarGrid s = slant_field(normals_of(cfg));
    out.grid("height.grid", h, "height");
    out.grid("slant.grid", s, "radians");
    out.svg("height.svg", io::svg_isophotes(h));
    out.svg("slant.svg", io::svg_isophotes(s));
    return out.finish({{"height_range", {h.min(), h.max()}}, {"slant_range", {s.min(), s.max()}}});
}

CommandResult cmd_render(const RunConfig& cfg) {
    require_renders(cfg);
    Output out(cfg, "render");
    std::vector<RenderResult> results;
    const auto images = render_all(cfg, normals_of(cfg), &results);
    Json list = Json::array();
    for (std::size_t i = 0; i < images.size(); ++i) {
        const auto& nr = cfg.renders[i];
        out.grid("render_" + nr.name + ".grid", images[i], "intensity");
        if (cfg.svg) out.svg("render_" + nr.name + ".svg", io::svg_flow(images[i], shading_flow(images[i])));
        const auto probe = admissibility_probe(nr.spec);
        list.push_back({{"name", nr.name},
                        {"model", describe(nr.spec)},
                        {"shadow_fraction", results[i].shadow_fraction},
                        {"shadow_warning", results[i].shadow_warning},
                        {"probe_maxima", probe.maxima},
                        {"admissible", probe.admissible()},
                        {"range", {images[i].min(), images[i].max()}}});
    }
    out.json("renders.json", list);
    return out.finish();
}

CommandResult cmd_msc(const RunConfig& cfg) {
    require_renders(cfg);
    Output out(cfg, "msc");
    const auto images = render_all(cfg, normals_of(cfg));
    std::vector<MSComplex> complexes(images.size());
    parallel_for(static_cast<int>(images.size()), [&](int i) {
        const auto& img = images[static_cast<std::size_t>(i)];
        complexes[static_cast<std::size_t>(i)] = simplify(build_complex(img), cfg.thresholds.tau * img.range());
    });
    std::string csv = "name,minima,saddles,maxima,euler,tau_abs\n";
    for (std::size_t i = 0; i < images.size(); ++i) {
        const auto& name = cfg.renders[i].name;
        const auto& c = complexes[i];
        out.text("complex_" + name + ".json", io::complex_json(io::record_of(c)));
        out.svg("complex_" + name + ".svg", io::svg_complex(images[i], c));
        const auto n = c.index_counts();
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s,%d,%d,%d,%d,%.9g\n", name.c_str(), n[0], n[1], n[2],
                      c.euler_characteristic(), c.threshold());
        csv += buf;
    }
    out.text("msc.csv", csv);
    return out.finish();
}

CommandResult cmd_contours(const RunConfig& cfg) {
    require_renders(cfg);
    Output out(cfg, "contours");
    const auto as = analyse_all(cfg, render_all(cfg, normals_of(cfg)));
    std::string csv = "name,candidates,admitted,K,M\n";
    for (std::size_t i = 0; i < as.size(); ++i) {
        const auto& name = cfg.renders[i].name;
        const auto& a = as[i];
        out.text("contours_" + name + ".json", io::contours_json(a.candidates, a.image.spec(), a.K, a.M));
        out.text("contours_" + name + ".csv", io::contours_csv(a.candidates));
        if (a.M > 0) out.text("ksweep_" + name + ".csv", io::k_sweep_csv(k_sweep(a.image, a.complex, a.M)));
        out.svg("contours_" + name + ".svg", io::svg_contours(a.image, a.candidates));
        char buf[200];
        std::snprintf(buf, sizeof buf, "%s,%zu,%zu,%.9g,%.9g\n", name.c_str(), a.candidates.size(),
                      a.admitted().size(), a.K, a.M);
        csv += buf;
    }
    out.text("contours.csv", csv);
    return out.finish();
}

CommandResult cmd_compare(const RunConfig& cfg, const std::optional<std::filesystem::path>& pa,
                          const std::optional<std::filesystem::path>& pb) {
    if (pa.has_value() != pb.has_value()) throw ConfigError("compare: give both grid paths or neither");
    Output out(cfg, "compare");
    const double delta = cfg.thresholds.delta;

    if (pa) {
        const auto a = analyse(io::read_grid(*pa).grid, cfg.thresholds);
        const auto b = analyse(io::read_grid(*pb).grid, cfg.thresholds);
        const auto ka = a.admitted(), kb = b.admitted();
        const auto r = match_contours(ka, a.complex, kb, b.complex, delta);
        out.json("compare.json", {{"a", pa->filename().string()},
                                  {"b", pb->filename().string()},
                                  {"admitted_a", ka.size()},
                                  {"admitted_b", kb.size()},
                                  {"report", report_json(r)}});
        out.text("compare.csv", io::match_csv(r));
        out.svg("compare.svg", io::svg_match(a.image, ka, kb, r));
        return out.finish();
    }

    require_renders(cfg);
    const NormalField normal = normals_of(cfg);
    const auto as = analyse_all(cfg, render_all(cfg, normal));
    std::vector<std::vector<CriticalContour>> admitted;
    for (const auto& a : as) admitted.push_back(a.admitted());

    struct Job {
        std::size_t i, j;
    };
    std::vector<Job> jobs;
    for (std::size_t i = 0; i < as.size(); ++i)
        for (std::size_t j = i + 1; j < as.size(); ++j) jobs.push_back({i, j});
    std::vector<MatchReport> reports(jobs.size());
    parallel_for(static_cast<int>(jobs.size()), [&](int n) {
        const auto [i, j] = jobs[static_cast<std::size_t>(n)];
        // image extrema sit on slant extrema of the opposite index
        const bool flip = cfg.renders[i].is_slant() != cfg.renders[j].is_slant();
        reports[static_cast<std::size_t>(n)] = match_contours(admitted[i], as[i].complex, admitted[j], as[j].complex,
                                                              delta, flip ? IndexMatch::Flipped : IndexMatch::Same);
    });

    const ScalarGrid slant = slant_field(normal);
    const MSComplex slant_complex = simplify(build_complex(slant), cfg.thresholds.tau * slant.range());
    std::vector<MatchReport> aligned(as.size());
    parallel_for(static_cast<int>(as.size()), [&](int i) {
        const auto k = static_cast<std::size_t>(i);
        aligned[k] = align_with_slant(admitted[k], as[k].complex, slant_complex, delta);
    });

    Json j;
    Json renders = Json::array();
    for (std::size_t i = 0; i < as.size(); ++i)
        renders.push_back({{"name", cfg.renders[i].name},
                           {"candidates", as[i].candidates.size()},
                           {"admitted", admitted[i].size()},
                           {"K", as[i].K},
                           {"M", as[i].M}});
    j["delta_px"] = delta;
    j["renders"] = std::move(renders);
    Json pairs = Json::array();
    std::string csv = kSummaryHeader;
    bool all_equivalent = true;
    for (std::size_t n = 0; n < jobs.size(); ++n) {
        const auto& a = cfg.renders[jobs[n].i].name;
        const auto& b = cfg.renders[jobs[n].j].name;
        Json e = report_json(reports[n]);
        e["a"] = a;
        e["b"] = b;
        pairs.push_back(std::move(e));
        csv += summary_csv_row(a, b, reports[n]);
        all_equivalent = all_equivalent && reports[n].graph_equivalent;
        out.svg("match_" + a + "__" + b + ".svg",
                io::svg_match(as[jobs[n].i].image, admitted[jobs[n].i], admitted[jobs[n].j], reports[n]));
    }
    j["pairs"] = std::move(pairs);
    Json slant_rows = Json::array();
    bool all_aligned = true;
    for (std::size_t i = 0; i < as.size(); ++i) {
        Json e = report_json(aligned[i]);
        e["name"] = cfg.renders[i].name;
        slant_rows.push_back(std::move(e));
        csv += summary_csv_row(cfg.renders[i].name, "slant_field", aligned[i]);
        all_aligned = all_aligned && aligned[i].unmatched_a.empty();
    }
    j["slant_alignment"] = std::move(slant_rows);
    j["all_graph_equivalent"] = all_equivalent;
    j["all_aligned"] = all_aligned;
    out.json("compare.json", j);
    out.text("compare.csv", csv);
    return out.finish();
}

CommandResult cmd_verify_eqs(const RunConfig& cfg) {
    Output out(cfg, "verify-eqs");
    const AnalyticSurface& s = *cfg.surface;
    const EqsConfig& e = cfg.eqs;

    // mt19937_64 output is fully specified; the conversion to [0, 1) is done
    // here so results do not depend on the standard library.
    std::mt19937_64 rng(cfg.seed);
    auto uniform = [&](double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    };
    const double max_polar = e.max_polar_deg * M_PI / 180.0;
    std::vector<Vec3> lights;
    for (int i = 0; i < e.lights; ++i) {
        const double polar = uniform(0.0, max_polar), az = uniform(0.0, 2 * M_PI);
        lights.emplace_back(std::sin(polar) * std::cos(az), std::sin(polar) * std::sin(az), std::cos(polar));
    }

    ShadingOptions opt;
    opt.path = e.path;
    opt.epsilon_grad = cfg.thresholds.epsilon_grad;
    opt.delta_h = cfg.thresholds.delta_h.value_or(default_delta_h(s));
    opt.fd_step = cfg.grid().spacing;

    // Points must pass the preconditions for every light.
    const Domain& dom = s.domain();
    const double mx = 0.1 * (dom.x1 - dom.x0), my = 0.1 * (dom.y1 - dom.y0);
    std::vector<Vec2> points;
    int tried = 0;
    const int budget = 200 * e.points;
    while (static_cast<int>(points.size()) < e.points && tried < budget) {
        ++tried;
        const Vec2 p(uniform(dom.x0 + mx, dom.x1 - mx), uniform(dom.y0 + my, dom.y1 - my));
        bool ok = true;
        for (const auto& l : lights) {
            try {
                (void)eval_shading_eqs(s, l, p, opt);
            } catch (const DomainError&) {
                ok = false;
                break;
            }
        }
        if (ok) points.push_back(p);
    }
    if (points.empty()) throw DomainError("verify-eqs: no sample point passes the preconditions");

    const auto rep = residual_sweep(s, lights, points, e.equations, opt);
    std::ostringstream csv;
    rep.write_csv(csv);
    out.text("eqs.csv", csv.str());
    Json overall = Json::array();
    for (EqId id : e.equations)
        if (const auto* row = rep.overall(id))
            overall.push_back({{"eq", to_string(id)},
                               {"count", row->count},
                               {"median", num(row->median)},
                               {"p95", num(row->p95)},
                               {"max", num(row->max)}});
    out.json("eqs.json", {{"path", e.path == DerivPath::Analytic ? "analytic" : "fd"},
                          {"lights", lights.size()},
                          {"points", points.size()},
                          {"points_tried", tried},
                          {"skipped", rep.skipped},
                          {"overall", std::move(overall)}});
    return out.finish();
}

CommandResult cmd_blur_seq(const RunConfig& cfg) {
    Output out(cfg, "blur-seq");
    const BlurConfig& b = cfg.blur;
    const GridSpec canvas = cfg.grid();
    const int n = cfg.resolution;
    BlurSequence seq;
    seq.sigmas = b.sigmas;
    if (b.shape == "circle") {
        const Vec2 c(b.center.x() * (n - 1.0), b.center.y() * (n - 1.0));
        const double r = b.radius * n;
        for (int i = 0; i < b.vertices; ++i) {
            const double t = 2 * M_PI * i / b.vertices;
            seq.contour.emplace_back(c.x() + r * std::cos(t), c.y() + r * std::sin(t));
        }
        seq.density.assign(seq.contour.size(), 1.0);
        seq.closed = true;
    } else {
        const Vec2 p(b.from.x() * (n - 1.0), b.from.y() * (n - 1.0)), q(b.to.x() * (n - 1.0), b.to.y() * (n - 1.0));
        for (int i = 0; i < b.vertices; ++i) {
            const double t = static_cast<double>(i) / (b.vertices - 1);
            seq.contour.push_back(p + t * (q - p));
            seq.density.push_back(i == 0 || i == b.vertices - 1 ? 0.0 : 1.0);
        }
    }
    const auto rows = convergence_experiment(seq, canvas, b.k, b.m);
    out.text("blur_seq.csv", io::convergence_csv(rows));
    if (cfg.svg) {
        const ConvergenceOptions opt;
        for (double sigma : b.sigmas) {
            const ScalarGrid img = convergence_image(seq, sigma, canvas, opt);
            const MSComplex c = simplify(build_complex(img), opt.simplify_fraction * img.range());
            auto ks = candidate_contours(img, c);
            const auto th = default_thresholds(img, ks);
            for (auto& k : ks) k.admitted = k.admits(b.k.value_or(th.K), b.m.value_or(th.M));
            char name[64];
            std::snprintf(name, sizeof name, "blur_sigma_%g.svg", sigma);
            out.svg(name, io::svg_contours(img, ks));
        }
    }
    Json list = Json::array();
    for (const auto& r : rows)
        list.push_back({{"sigma", r.sigma},
                        {"found", r.found},
                        {"hausdorff_px", r.hausdorff},
                        {"mean_px", r.mean_distance},
                        {"coverage", r.coverage},
                        {"K_achieved", num(r.K_achieved)},
                        {"M_achieved", num(r.M_achieved)},
                        {"admitted", r.admitted}});
    out.json("blur_seq.json", {{"shape", b.shape}, {"rows", std::move(list)}});
    return out.finish();
}

}  // namespace critcon::app
