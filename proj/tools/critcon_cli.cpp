// critcon: batch driver. Exit codes: 0 ok, 2 usage/config/input format,
// 3 numerical or domain failure, 1 anything else. Failures print one JSON
// error record on stderr and, when possible, write error.json to --out.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "commands.hpp"
#include "config.hpp"
#include "critcon/io.hpp"

namespace {

using namespace critcon;
using namespace critcon::app;

int report(int code, const std::string& type, const std::string& command, const std::string& message,
           const std::optional<std::filesystem::path>& out_dir) {
    nlohmann::ordered_json j;
    j["error"] = {{"code", code}, {"type", type}, {"command", command}, {"message", message}};
    const std::string line = j.dump();
    std::cerr << line << "\n";
    if (out_dir && std::filesystem::is_directory(*out_dir)) {
        try {
            io::write_file_atomic(*out_dir / "error.json", line + "\n");
        } catch (const std::exception&) {
            // the stderr record is enough
        }
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"critcon: critical contours of shaded images"};
    app.require_subcommand(1);

    std::optional<std::string> config_path;
    Overrides ov;
    std::optional<std::string> out, grid_a, grid_b;
    bool svg = false, no_svg = false;

    app.add_option("--config", config_path, "INI run configuration");
    app.add_option("--out", out, "output directory");
    app.add_option("--seed", ov.seed, "override [run] seed");
    app.add_option("--threads", ov.threads, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
    app.add_option("--k", ov.k, "K as a fraction of the image range");
    app.add_option("--m", ov.m, "M as a fraction of the image range");
    app.add_option("--tau", ov.tau, "persistence threshold as a fraction of the image range");
    app.add_option("--delta", ov.delta, "match tolerance in pixels");
    auto* svg_flag = app.add_flag("--svg", svg, "write SVG figures");
    app.add_flag("--no-svg", no_svg, "skip SVG figures")->excludes(svg_flag);

    struct Sub {
        const char* name;
        const char* help;
    };
    const Sub subs[] = {{"synth", "sample height and slant fields"},
                        {"render", "render every configured shading model"},
                        {"msc", "Morse-Smale complex of each rendering"},
                        {"contours", "critical contours of each rendering"},
                        {"compare", "match contours across renderings and with the slant field"},
                        {"verify-eqs", "shading-equation residual sweep"},
                        {"blur-seq", "concentration-of-shading blur sequence"}};
    for (const auto& s : subs) {
        auto* sc = app.add_subcommand(s.name, s.help);
        sc->fallthrough();
        if (std::string(s.name) == "compare") {
            sc->add_option("--a", grid_a, "first grid file");
            sc->add_option("--b", grid_b, "second grid file");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return report(2, "UsageError", "", e.what(), std::nullopt);
    }

    const std::string command = app.get_subcommands().front()->get_name();
    if (out) ov.out = *out;
    if (svg) ov.svg = true;
    if (no_svg) ov.svg = false;

    std::optional<std::filesystem::path> out_dir;
    try {
        RunConfig cfg = config_path ? load_config(*config_path, ov) : parse_config("", ov);
        out_dir = cfg.out;
        std::optional<std::filesystem::path> a, b;
        if (grid_a) a = *grid_a;
        if (grid_b) b = *grid_b;

        CommandResult r;
        if (command == "synth") r = cmd_synth(cfg);
        else if (command == "render") r = cmd_render(cfg);
        else if (command == "msc") r = cmd_msc(cfg);
        else if (command == "contours") r = cmd_contours(cfg);
        else if (command == "compare") r = cmd_compare(cfg, a, b);
        else if (command == "verify-eqs") r = cmd_verify_eqs(cfg);
        else r = cmd_blur_seq(cfg);
        for (const auto& f : r.files) std::cout << (cfg.out / f).string() << "\n";
        return 0;
    } catch (const FormatError& e) {
        return report(2, dynamic_cast<const ConfigError*>(&e) ? "ConfigError" : "FormatError", command, e.what(),
                      out_dir);
    } catch (const ConditioningError& e) {
        return report(3, "ConditioningError", command, e.what(), out_dir);
    } catch (const DomainError& e) {
        return report(3, "DomainError", command, e.what(), out_dir);
    } catch (const ParameterError& e) {
        return report(3, "ParameterError", command, e.what(), out_dir);
    } catch (const std::exception& e) {
        return report(1, "InternalError", command, e.what(), out_dir);
    }
}
