#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "csid/config.hpp"

namespace csid {

struct RunOptions {
    std::uint64_t seed = 0;
    std::string out_dir;
    std::optional<Mode> mode_override;
    std::optional<int> iterations_override;
};

// Generates data under the per-system stream contract, dispatches to the
// configured mode, and persists run histories (CSV), a key-value summary,
// and sweep tables under options.out_dir. Throws ConfigError /
// DegeneracyError / IoError; the CLI maps those to exit codes 1 / 2 / 3.
void run_experiment(const ExperimentConfig& config, const RunOptions& options);

// Reads the run histories found in in_dir and writes plot-ready TSV tables
// plus an SVG line chart per figure into out_dir.
void emit_plot_data(const std::string& in_dir, const std::string& out_dir);

} // namespace csid
