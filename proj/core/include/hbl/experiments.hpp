#pragma once

#include <string>
#include <vector>

#include "hbl/config.hpp"

namespace hbl {

struct CheckRow {
    std::string name;
    bool pass = false;
    double value = 0.0;     // measured quantity
    double threshold = 0.0; // bound it was held against
};

struct ExperimentOutcome {
    bool pass = false;
    std::vector<CheckRow> checks;
};

struct ExperimentInfo {
    std::string name;
    std::string description;
};

/// Stable-ordered experiment registry (names usable as CLI subcommands or
/// in the run config).
const std::vector<ExperimentInfo>& list_experiments();

/// Executes the experiment named in the config, writing CSV artifacts, any
/// binary caches, and manifest.json under cfg.out (and nowhere else).
/// Returns the outcome; configuration problems throw ConfigError.
ExperimentOutcome run_experiment(const RunConfig& cfg);

} // namespace hbl
