// Writes the msc golden file for a fixture config: interior critical-point
// counts of each rendering by the neighbour-scan oracle.
//   make_msc_golden <config.ini> <golden.json>

#include <iostream>

#include "json.hpp"

#include "config.hpp"
#include "critcon/io.hpp"
#include "critcon/render.hpp"
#include "morse_oracle.hpp"

int main(int argc, char** argv) {
    if (argc != 3) {
        std::cerr << "usage: make_msc_golden <config.ini> <golden.json>\n";
        return 2;
    }
    const auto cfg = critcon::app::load_config(argv[1]);
    const auto n = critcon::normals(*cfg.surface, cfg.grid());
    nlohmann::ordered_json j;
    j["config_hash"] = cfg.config_hash;
    j["margin_px"] = 1;
    for (const auto& r : cfg.renders) {
        const auto counts = oracle::interior_counts(critcon::render(n, r.spec).image, 1);
        j["renders"][r.name] = {{"minima", counts[0]}, {"saddles", counts[1]}, {"maxima", counts[2]}};
    }
    critcon::io::write_file_atomic(argv[2], j.dump(1, ' ') + "\n");
}
