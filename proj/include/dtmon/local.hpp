#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "dtmon/core.hpp"
#include "dtmon/dtree.hpp"
#include "dtmon/kernels.hpp"

namespace dtmon {

/// Neighborhood radius in scaled attribute space plus the per-attribute
/// scale factors applied before taking the Euclidean norm.
struct LocalitySpec {
    double delta = 1.5;
    kernels::Weights weights{1, 1, 1, 1, 1, 1, 1, 1};
};

/// Weights = 1 / (global standard deviation) per attribute; constant columns
/// get weight 1.
LocalitySpec scaled_locality(const Dataset& global, double delta);

/// Samples within `spec.delta` of `a` over all eight attributes, original order.
Dataset select_local(const Dataset& global, const AttributeVector& a, const LocalitySpec& spec);

/// Samples within `spec.delta` of `a` over the six human-dependent attributes
/// only; v_r and lane are left free. Always a superset of select_local().
Dataset select_correction_set(const Dataset& global, const AttributeVector& a,
                              const LocalitySpec& spec);

struct GrownSelection {
    Dataset data;
    double delta = 0.0;
    int growth_steps = 0;
};

/// select_local(), growing delta by `factor` up to `max_steps` times while the
/// result holds fewer than `min_size` samples.
GrownSelection select_local_grown(const Dataset& global, const AttributeVector& a,
                                  const LocalitySpec& spec, std::size_t min_size = 30,
                                  int max_steps = 4, double factor = 1.5);

/// Subsamples every non-empty set to the size of the smallest one (uniform,
/// without replacement, order kept) and concatenates them. Throws
/// InvalidInput when every set is empty.
Dataset combine_ensemble(std::span<const Dataset> locals, std::uint64_t seed);

/// Rule minimizing leaf_error * leaf_risk; ties prefer larger support, then
/// lower index. nullopt for an empty list.
std::optional<std::pair<CounterfactualRule, std::size_t>> optimal_counterfactual(
    std::span<const CounterfactualRule> rules);

/// Rule indices sorted by the same criterion as optimal_counterfactual().
std::vector<std::size_t> rank_counterfactuals(std::span<const CounterfactualRule> rules);

/// Admissible (v, lane) pair satisfying the rule that is closest to `current`
/// under |dv| + lane_gap * |dlane|. nullopt when no pair satisfies the rule.
/// Throws InvalidInput if the rule constrains anything besides v_r and lane.
/// Pairs matching an entry of `exclude` (within 1e-6) are never returned.
std::optional<ControlAction> instantiate_action(const CounterfactualRule& rule,
                                                std::span<const double> admissible_v,
                                                std::span<const double> admissible_lanes,
                                                const ControlAction& current,
                                                std::span<const ControlAction> exclude = {});

/// Uniformly random admissible pair that never appears in `local`'s
/// (v_r, lane) columns. nullopt when every pair has been seen.
std::optional<ControlAction> random_unseen_action(const Dataset& local,
                                                  std::span<const double> admissible_v,
                                                  std::span<const double> admissible_lanes,
                                                  std::uint64_t seed);

inline constexpr std::array<std::size_t, 2> kControllableAttributes = {kVr, kLane};

} // namespace dtmon
