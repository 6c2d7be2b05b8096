#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dtmon/config.hpp"
#include "dtmon/sim.hpp"
#include "dtmon/validation.hpp"

namespace dtmon {

struct TrialResult {
    std::uint64_t seed = 0;
    RunMetrics metrics;
    std::vector<ControlAction> corrections;
    std::vector<double> dt_ms; // per decision tick
    std::size_t case1_hits = 0;
    std::size_t case2_flags = 0;
    std::size_t samples_added = 0;
    bool success() const { return !metrics.interfered; }
};

struct BatchSummary {
    std::size_t trials = 0;
    double success_rate = 0.0;
    double mean_min_distance = 0.0; // over trials with at least one human
    double mean_dt_ms = 0.0;
    double p50_dt_ms = 0.0;
    double p95_dt_ms = 0.0;
    double max_dt_ms = 0.0;
    double median_density_success = 0.0; // humans in range at closest approach
    double median_density_failure = 0.0;
    std::size_t goal_reached = 0;
};

struct BatchResult {
    std::vector<TrialResult> trials;
    BatchSummary summary;
    Dataset dataset; // final dataset (differs from the input only with updates)
    std::vector<UpdateLogEntry> update_log;
};

/// Scenario of trial `i`: cfg.scenario in fixed mode, else a random crowd.
Scenario trial_scenario(const RunConfig& cfg, std::uint64_t seed, std::size_t i);

/// Runs `trials` scenarios with the decision-tree monitor. Random crowds are
/// seeded from `seed` and the trial index; fixed mode replays cfg.scenario.
/// Without updates trials run in parallel; with updates they run in order and
/// Case 1 / Case 2 samples are merged into the dataset between trials.
BatchResult run_batch(const RunConfig& cfg, const Dataset& global, std::size_t trials,
                      bool with_updates, std::uint64_t seed);

BatchSummary summarize(const std::vector<TrialResult>& trials);

nlohmann::json to_json(const RunMetrics& m);
nlohmann::json to_json(const BatchSummary& s);
nlohmann::json to_json(const TrialResult& t);

} // namespace dtmon
