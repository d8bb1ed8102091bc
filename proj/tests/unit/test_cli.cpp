#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

#include "commands.hpp"
#include "config.hpp"
#include "critcon/io.hpp"
#include "critcon/render.hpp"

using namespace critcon;
using namespace critcon::app;
namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

const fs::path kSource = CRITCON_SOURCE_DIR;

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("critcon_test_cli_" + name);
    fs::remove_all(p);
    return p;
}

Json read_json(const fs::path& p) { return Json::parse(io::read_file(p)); }

struct Run {
    int code = -1;
    std::string err;
};

Run run_cli(const std::string& args, const fs::path& dir) {
    fs::create_directories(dir);
    const auto err = dir / "stderr.txt";
    const std::string cmd = std::string(CRITCON_CLI) + " " + args + " >/dev/null 2>" + err.string();
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = io::read_file(err);
    return r;
}

const char* kQuadratic = R"(
[run]
seed = 3
resolution = 128
svg = false

[surface]
kind = quadratic
coefficients = 0.004 0.001 0.003
slope = 0.05 -0.02

[eqs]
lights = 20
points = 200
)";

}  // namespace

TEST_CASE("config defaults and overrides") {
    const auto cfg = parse_config("");
    CHECK(cfg.resolution == 256);
    CHECK(cfg.surface_kind == "sigmoidal_bump");
    CHECK(cfg.renders.empty());
    CHECK(cfg.thresholds.tau == 0.05);
    CHECK(cfg.thresholds.delta == doctest::Approx(3.0));

    Overrides ov;
    ov.k = 0.01;
    ov.seed = 99;
    ov.svg = false;
    const auto o = parse_config("[run]\nseed = 1\n[render.a]\nmodel = lambertian\nlight = 0 0 2\n", ov);
    CHECK(o.seed == 99);
    CHECK(o.thresholds.k == 0.01);
    CHECK_FALSE(o.svg);
    REQUIRE(o.renders.size() == 1);
    CHECK(std::get<Lambertian>(o.renders[0].spec).light == Vec3(0, 0, 1));

    // the same text hashes the same; any edit changes it
    CHECK(parse_config("[run]\nseed = 1\n").config_hash == parse_config("[run]\nseed = 1\n").config_hash);
    CHECK(parse_config("[run]\nseed = 1\n").config_hash != parse_config("[run]\nseed = 2\n").config_hash);
}

TEST_CASE("malformed configs are rejected") {
    CHECK_THROWS_AS((void)parse_config("[run]\nsede = 1\n"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("[nope]\na = 1\n"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("[run]\nresolution = 32\n"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("[run]\nresolution = 12.5\n"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("[thresholds]\nk = 0\n"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("[thresholds]\ntau = -1\n"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("[thresholds]\nm = abc\n"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("[surface]\nkind = torus\n"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("[surface]\nkind = blob\nlobes = 1\n"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("[render.x]\nmodel = phong\n"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("[render.x]\nlight = 0 0 -1\n"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("[render.b@d]\nmodel = slant\n"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("[blur]\nsigmas = 1 2\n"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("[eqs]\nequations = 1 9\n"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("[run\n"), ConfigError);
    CHECK_THROWS_AS((void)load_config("/nonexistent/demo.ini"), ConfigError);
}

TEST_CASE("msc on the shipped bump fixture matches the golden counts") {
    Overrides ov;
    ov.out = scratch_dir("golden");
    const auto cfg = load_config(kSource / "tests/fixtures/bump.ini", ov);
    const auto golden = read_json(kSource / "tests/fixtures/bump_msc_golden.json");
    CHECK(golden["config_hash"] == cfg.config_hash);
    const auto res = cmd_msc(cfg);
    CHECK(res.files.back() == "run.json");
    for (const auto& r : cfg.renders) {
        const auto rec = io::parse_complex_json(io::read_file(*ov.out / ("complex_" + r.name + ".json")));
        const int margin = golden["margin_px"].get<int>();
        std::array<int, 3> interior{};
        for (const auto& n : rec.nodes) {
            if (n.is_virtual) continue;
            const bool inside = n.anchor[0] >= margin && n.anchor[1] >= margin &&
                                n.anchor[0] < cfg.resolution - margin && n.anchor[1] < cfg.resolution - margin;
            interior[static_cast<std::size_t>(n.index)] += inside;
        }
        const auto& g = golden["renders"][r.name];
        CHECK(interior[0] == g["minima"].get<int>());
        CHECK(interior[1] == g["saddles"].get<int>());
        CHECK(interior[2] == g["maxima"].get<int>());
        CHECK(rec.counts[0] - rec.counts[1] + rec.counts[2] == 2);
    }
}

TEST_CASE("verify-eqs on the quadratic fixture") {
    Overrides ov;
    ov.out = scratch_dir("eqs");
    const auto cfg = parse_config(kQuadratic, ov);
    (void)cmd_verify_eqs(cfg);
    std::istringstream csv(io::read_file(*ov.out / "eqs.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "eq,decile,det_lo,det_hi,count,median,p95,max");
    int overall = 0;
    while (std::getline(csv, line)) {
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
        REQUIRE(f.size() == 8);
        if (f[1] != "-1") continue;
        ++overall;
        CHECK(std::stod(f[6]) < 1e-7);
    }
    CHECK(overall == 3);
    CHECK(read_json(*ov.out / "eqs.json")["points"].get<int>() == 200);
}

TEST_CASE("compare with the same image twice") {
    const auto dir = scratch_dir("same");
    Overrides ov;
    ov.out = dir;
    const auto cfg = parse_config("[run]\nresolution = 128\nsvg = false\n", ov);
    fs::create_directories(dir);
    const auto img = render(normals(*cfg.surface, cfg.grid()), Lambertian{Vec3(0.3, 0.2, 0.93).normalized()}).image;
    io::write_grid(dir / "img.grid", img, "intensity");
    (void)cmd_compare(cfg, dir / "img.grid", dir / "img.grid");
    const auto j = read_json(dir / "compare.json");
    CHECK(j["admitted_a"].get<int>() >= 1);
    CHECK(j["report"]["graph_equivalent"].get<bool>());
    CHECK(j["report"]["unmatched_a"].empty());
    CHECK(j["report"]["pairs"].size() == j["admitted_a"].get<std::size_t>());
    for (const auto& p : j["report"]["pairs"]) {
        CHECK(p["mean_px"].get<double>() == 0.0);
        CHECK(p["max_px"].get<double>() == 0.0);
    }
    CHECK_THROWS_AS((void)cmd_compare(cfg, dir / "img.grid", std::nullopt), ConfigError);
}

TEST_CASE("every command is deterministic across runs and thread counts") {
    std::string text = io::read_file(kSource / "configs/demo.ini");
    text.replace(text.find("resolution = 256"), 16, "resolution = 128");
    text.replace(text.find("points = 200"), 12, "points = 40");
    const fs::path a = scratch_dir("det_a"), b = scratch_dir("det_b");
    Overrides oa, ob;
    oa.out = a;
    ob.out = b;
    oa.threads = 1;
    ob.threads = 4;
    const auto ca = parse_config(text, oa), cb = parse_config(text, ob);
    using Cmd = CommandResult (*)(const RunConfig&);
    const Cmd cmds[] = {cmd_synth, cmd_render, cmd_msc, cmd_contours, cmd_verify_eqs, cmd_blur_seq};
    std::vector<std::string> files;
    for (Cmd c : cmds) {
        const auto fa = c(ca).files;
        CHECK(c(cb).files == fa);
        files.insert(files.end(), fa.begin(), fa.end());
    }
    const auto fa = cmd_compare(ca).files;
    CHECK(cmd_compare(cb).files == fa);
    files.insert(files.end(), fa.begin(), fa.end());
    int svg = 0;
    for (const auto& f : files) {
        CHECK_MESSAGE(io::read_file(a / f) == io::read_file(b / f), f);
        svg += f.ends_with(".svg");
    }
    CHECK(svg > 0);
}

TEST_CASE("exit codes and error records") {
    const auto dir = scratch_dir("exit");
    fs::create_directories(dir);
    {
        std::ofstream(dir / "bad.ini") << "[thresholds]\nk = -1\n";
        const auto r = run_cli("--config " + (dir / "bad.ini").string() + " --out " + (dir / "o1").string() + " msc", dir);
        CHECK(r.code == 2);
        const auto j = Json::parse(r.err);
        CHECK(j["error"]["code"] == 2);
        CHECK(j["error"]["type"] == "ConfigError");
        CHECK(j["error"]["command"] == "msc");
    }
    CHECK(run_cli("", dir).code == 2);
    CHECK(run_cli("frobnicate", dir).code == 2);
    CHECK(run_cli("msc --k", dir).code == 2);
    {
        // a plane has a singular Hessian everywhere: no point passes
        std::ofstream(dir / "plane.ini") << "[run]\nresolution = 64\n[surface]\nkind = plane\n[eqs]\nlights = 2\npoints = 2\n";
        const auto out = dir / "o2";
        const auto r = run_cli("--config " + (dir / "plane.ini").string() + " --out " + out.string() + " verify-eqs", dir);
        CHECK(r.code == 3);
        CHECK(Json::parse(r.err)["error"]["type"] == "DomainError");
        CHECK(fs::exists(out / "error.json"));
    }
    {
        std::ofstream(dir / "junk.grid") << "not a grid";
        const auto r = run_cli("--out " + (dir / "o3").string() + " compare --a " + (dir / "junk.grid").string() +
                                   " --b " + (dir / "junk.grid").string(),
                               dir);
        CHECK(r.code == 2);
        CHECK(Json::parse(r.err)["error"]["type"] == "FormatError");
    }
    {
        const auto r = run_cli("--config " + (kSource / "tests/fixtures/bump.ini").string() + " --no-svg --out " +
                                   (dir / "o4").string() + " synth",
                               dir);
        CHECK(r.code == 0);
        CHECK(fs::exists(dir / "o4" / "height.grid"));
        CHECK_FALSE(fs::exists(dir / "o4" / "height.svg"));
    }
}
