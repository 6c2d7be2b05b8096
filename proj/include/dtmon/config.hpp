#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "dtmon/planner.hpp"
#include "dtmon/sim.hpp"
#include "dtmon/world.hpp"

namespace dtmon {

struct DatagenConfig {
    double labeling_horizon = 3.0; // [s]
    double sample_range = 6.0;     // [m]; farther samples are not recorded
    std::size_t paths = 60;        // random single-human paths, each run on the full action grid
    CrowdWorld world;              // path distribution (world.humans is forced to 1)
};

struct BatchConfig {
    std::size_t trials = 50;
    bool fixed = false; // true: every trial replays [scenario]; false: random crowds
    CrowdWorld world;
};

/// Everything a command needs; one TOML file fully determines a run.
struct RunConfig {
    std::uint64_t seed = 1;
    MonitorConfig monitor;
    Scenario scenario;
    DatagenConfig datagen;
    BatchConfig batch;
    RunOptions run;
    std::optional<std::filesystem::path> dataset; // resolved relative to the config file

    void validate() const;
};

/// Throws std::runtime_error with the TOML location on syntax errors and
/// InvalidInput on constraint violations.
RunConfig parse_config(std::string_view toml_text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Default crossing scenario: robot (0,0) -> (6,0), one human crossing the
/// corridor ahead of it.
Scenario baseline_scenario();

/// Single-human training scenarios drawn from `world`, expanded over the
/// monitor's velocity x lane grid.
std::vector<Scenario> training_scenarios(const DatagenConfig& cfg, const MonitorConfig& monitor,
                                         std::uint64_t seed);

} // namespace dtmon
