#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dtmon/core.hpp"
#include "dtmon/world.hpp"

namespace dtmon {

// Per-attribute extrema of the convex hull of a local dataset. The extreme
// point of every coordinate is always a hull vertex, so these are computed
// directly as the per-dimension min/max of the samples; no hull is built.
struct HullBounds {
    std::array<double, kNumAttributes> min{};
    std::array<double, kNumAttributes> max{};
};

/// Throws InvalidInput on an empty dataset.
HullBounds hull_bounds(const Dataset& local);

/// True iff some coordinate of `a` lies strictly outside [min, max].
bool case2_out_of_bounds(const AttributeVector& a, const HullBounds& bounds);

struct Case1Hit {
    std::size_t tick = 0;
    std::size_t human = 0;
    friend bool operator==(const Case1Hit&, const Case1Hit&) = default;
};

/// Every (tick, human) whose human-robot distance is below `delta_th`,
/// ordered by tick then human.
std::vector<Case1Hit> case1_violation(const Trajectory& traj, double delta_th);

struct Case2Observation {
    std::size_t tick = 0;
    std::size_t human = 0;
    AttributeVector attributes;
};

enum class UpdateSource { Case1, Case2 };

struct UpdateLogEntry {
    LabeledSample sample;
    UpdateSource source = UpdateSource::Case1;
    std::string run_id;
    std::size_t tick = 0;
    std::size_t human = 0;
};

struct UpdateResult {
    Dataset dataset;
    std::vector<UpdateLogEntry> log;
};

struct UpdateParams {
    double labeling_horizon = 3.0; // [s]
    double delta_th = 1.5;         // [m]
    std::vector<double> lanes{-2.0, -1.0, 0.0, 1.0, 2.0};
    std::string run_id;
};

/// Case 1: for each contiguous violation run of a human, attributes of that
/// human from `labeling_horizon` before the first violating tick through the
/// last one are recomputed from the trajectory and appended as Interfere.
/// Case 2: each observation is appended with the label given by the training
/// rule (minimum future distance within the horizon <= delta_th).
/// Samples whose attributes match an existing one after rounding to 1e-6
/// are skipped.
UpdateResult apply_updates(const Dataset& global, const Trajectory& traj,
                           const std::vector<Case1Hit>& case1,
                           const std::vector<Case2Observation>& case2, const UpdateParams& params);

nlohmann::json to_json(const UpdateLogEntry& e);

/// Points and triangular faces of a 3-D convex hull (quickhull) over three
/// chosen attributes, for plotting.
struct Hull3 {
    std::vector<std::array<double, 3>> vertices;
    std::vector<std::array<std::size_t, 3>> faces; // indices into vertices
};

Hull3 hull3(const Dataset& data, std::array<std::size_t, 3> attributes);
nlohmann::json to_json(const Hull3& h, std::array<std::size_t, 3> attributes);

} // namespace dtmon
