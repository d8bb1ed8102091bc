#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"

namespace critcon::app {

/// Files written by a command, relative to the output directory, in write
/// order. run.json (the manifest) is always last.
struct CommandResult {
    std::vector<std::string> files;
};

CommandResult cmd_synth(const RunConfig& cfg);
CommandResult cmd_render(const RunConfig& cfg);
CommandResult cmd_msc(const RunConfig& cfg);
CommandResult cmd_contours(const RunConfig& cfg);
/// Without grid paths, compares every pair of configured renderings and
/// aligns each with the slant field. With both paths, compares the two grids.
CommandResult cmd_compare(const RunConfig& cfg, const std::optional<std::filesystem::path>& a = std::nullopt,
                          const std::optional<std::filesystem::path>& b = std::nullopt);
CommandResult cmd_verify_eqs(const RunConfig& cfg);
CommandResult cmd_blur_seq(const RunConfig& cfg);

}  // namespace critcon::app
