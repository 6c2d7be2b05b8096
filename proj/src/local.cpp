#include "dtmon/local.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <numeric>
#include <random>

namespace dtmon {

namespace {

constexpr double kMatchTol = 1e-6;

Dataset gather(const Dataset& global, const std::vector<std::size_t>& idx) {
    Dataset out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.append(global[i]);
    return out;
}

void check_spec(const LocalitySpec& spec) {
    if (!(spec.delta > 0.0)) throw InvalidInput("locality delta must be positive");
    for (double w : spec.weights)
        if (!(w > 0.0)) throw InvalidInput("locality weights must be positive");
}

bool products_tie(double a, double b) { return std::abs(a - b) <= 1e-12; }

} // namespace

LocalitySpec scaled_locality(const Dataset& global, double delta) {
    LocalitySpec spec;
    spec.delta = delta;
    if (global.size() < 2) return spec;
    const double n = static_cast<double>(global.size());
    for (std::size_t k = 0; k < kNumAttributes; ++k) {
        double mean = 0.0;
        for (const auto& s : global) mean += s.attributes[k];
        mean /= n;
        double var = 0.0;
        for (const auto& s : global) {
            const double d = s.attributes[k] - mean;
            var += d * d;
        }
        const double sd = std::sqrt(var / (n - 1.0));
        spec.weights[k] = sd > 1e-12 ? 1.0 / sd : 1.0;
    }
    return spec;
}

Dataset select_local(const Dataset& global, const AttributeVector& a, const LocalitySpec& spec) {
    check_spec(spec);
    return gather(global, kernels::neighbors_within(global.samples(), a, spec.weights, spec.delta,
                                                    kNumAttributes));
}

Dataset select_correction_set(const Dataset& global, const AttributeVector& a,
                              const LocalitySpec& spec) {
    check_spec(spec);
    return gather(global, kernels::neighbors_within(global.samples(), a, spec.weights, spec.delta,
                                                    kNumHumanAttributes));
}

GrownSelection select_local_grown(const Dataset& global, const AttributeVector& a,
                                  const LocalitySpec& spec, std::size_t min_size, int max_steps,
                                  double factor) {
    check_spec(spec);
    auto idx = kernels::neighbors_within(global.samples(), a, spec.weights, spec.delta, kNumAttributes);
    GrownSelection out;
    out.delta = spec.delta;
    if (idx.size() < min_size && max_steps > 0) {
        // One scan at the largest radius, then shrink back to the first radius
        // that is large enough.
        std::vector<double> radii{spec.delta};
        for (int k = 0; k < max_steps; ++k) radii.push_back(radii.back() * factor);
        const auto wide =
            kernels::neighbors_within(global.samples(), a, spec.weights, radii.back(), kNumAttributes);
        std::vector<double> d2(wide.size());
        for (std::size_t i = 0; i < wide.size(); ++i)
            d2[i] = kernels::scaled_sq_distance(a, global[wide[i]].attributes, spec.weights);
        for (int k = 1; k <= max_steps; ++k) {
            const double r2 = radii[k] * radii[k];
            idx.clear();
            for (std::size_t i = 0; i < wide.size(); ++i)
                if (d2[i] <= r2) idx.push_back(wide[i]);
            out.delta = radii[k];
            out.growth_steps = k;
            if (idx.size() >= min_size) break;
        }
    }
    out.data = gather(global, idx);
    return out;
}

Dataset combine_ensemble(std::span<const Dataset> locals, std::uint64_t seed) {
    std::size_t smallest = 0;
    for (const auto& d : locals)
        if (!d.empty() && (smallest == 0 || d.size() < smallest)) smallest = d.size();
    if (smallest == 0) throw InvalidInput("every local dataset is empty");

    std::mt19937_64 rng(seed);
    Dataset out;
    out.reserve(smallest * locals.size());
    for (const auto& d : locals) {
        if (d.empty()) continue;
        if (d.size() == smallest) {
            for (const auto& s : d) out.append(s);
            continue;
        }
        std::vector<std::size_t> idx(d.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::vector<std::size_t> pick;
        pick.reserve(smallest);
        // std::sample keeps the relative order of the selected elements.
        std::sample(idx.begin(), idx.end(), std::back_inserter(pick), smallest, rng);
        for (std::size_t i : pick) out.append(d[i]);
    }
    return out;
}

std::vector<std::size_t> rank_counterfactuals(std::span<const CounterfactualRule> rules) {
    std::vector<std::size_t> order(rules.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double pa = rules[a].leaf_error * rules[a].leaf_risk;
        const double pb = rules[b].leaf_error * rules[b].leaf_risk;
        if (!products_tie(pa, pb)) return pa < pb;
        return rules[a].support > rules[b].support;
    });
    return order;
}

std::optional<std::pair<CounterfactualRule, std::size_t>> optimal_counterfactual(
    std::span<const CounterfactualRule> rules) {
    if (rules.empty()) return std::nullopt;
    const std::size_t best = rank_counterfactuals(rules).front();
    return std::make_pair(rules[best], best);
}

std::optional<ControlAction> instantiate_action(const CounterfactualRule& rule,
                                                std::span<const double> admissible_v,
                                                std::span<const double> admissible_lanes,
                                                const ControlAction& current,
                                                std::span<const ControlAction> exclude) {
    for (const auto& c : rule.clauses)
        if (c.attribute != kVr && c.attribute != kLane)
            throw InvalidInput("correction rule constrains a non-controllable attribute");

    std::vector<double> lanes(admissible_lanes.begin(), admissible_lanes.end());
    std::sort(lanes.begin(), lanes.end());
    double lane_gap = 1.0;
    if (lanes.size() > 1) {
        lane_gap = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < lanes.size(); ++i)
            if (lanes[i] > lanes[i - 1]) lane_gap = std::min(lane_gap, lanes[i] - lanes[i - 1]);
        if (!std::isfinite(lane_gap)) lane_gap = 1.0;
    }

    std::optional<ControlAction> best;
    double best_cost = std::numeric_limits<double>::infinity();
    for (double v : admissible_v) {
        for (double l : admissible_lanes) {
            AttributeVector probe;
            probe[kVr] = v;
            probe[kLane] = l;
            if (!satisfies(probe, rule.clauses)) continue;
            if (std::any_of(exclude.begin(), exclude.end(), [&](const ControlAction& x) {
                    return std::abs(v - x.v_r) <= kMatchTol && std::abs(l - x.lane) <= kMatchTol;
                }))
                continue;
            const double cost = std::abs(v - current.v_r) + lane_gap * std::abs(l - current.lane);
            if (cost < best_cost - 1e-12) {
                best_cost = cost;
                best = ControlAction{v, l};
            }
        }
    }
    return best;
}

std::optional<ControlAction> random_unseen_action(const Dataset& local,
                                                  std::span<const double> admissible_v,
                                                  std::span<const double> admissible_lanes,
                                                  std::uint64_t seed) {
    std::vector<ControlAction> unseen;
    for (double v : admissible_v) {
        for (double l : admissible_lanes) {
            const bool seen = std::any_of(local.begin(), local.end(), [&](const LabeledSample& s) {
                return std::abs(s.attributes[kVr] - v) < kMatchTol &&
                       std::abs(s.attributes[kLane] - l) < kMatchTol;
            });
            if (!seen) unseen.push_back({v, l});
        }
    }
    if (unseen.empty()) return std::nullopt;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, unseen.size() - 1);
    return unseen[pick(rng)];
}

} // namespace dtmon
