#pragma once

// Data-parallel inner loops. Each kernel has an OpenMP version used by the
// library and a serial reference kept for tests and the benchmark; both must
// return identical results for identical input.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "dtmon/core.hpp"

namespace dtmon::kernels {

using Weights = std::array<double, kNumAttributes>;

/// sum_k (w_k (a_k - b_k))^2 over the first `dims` attributes.
double scaled_sq_distance(const AttributeVector& a, const AttributeVector& b, const Weights& w,
                          std::size_t dims = kNumAttributes);

/// Indices (ascending) of samples with ||W (center - s)||_2 <= delta over the
/// first `dims` attributes.
std::vector<std::size_t> neighbors_within(std::span<const LabeledSample> samples,
                                          const AttributeVector& center, const Weights& weights,
                                          double delta, std::size_t dims = kNumAttributes);
std::vector<std::size_t> neighbors_within_serial(std::span<const LabeledSample> samples,
                                                 const AttributeVector& center,
                                                 const Weights& weights, double delta,
                                                 std::size_t dims = kNumAttributes);

struct Split {
    bool valid = false;
    std::size_t attribute = 0;
    double threshold = 0.0;
    double decrease = 0.0; // parent Gini minus weighted child Gini
};

/// Gini impurity 1 - sum(p_i^2) of a two-class count pair.
double gini(std::size_t n_interfere, std::size_t n_not);

/// Best Gini split of `rows` (indices into `samples`) over `attributes`.
/// Thresholds are midpoints between consecutive distinct values; a split is
/// admissible only if both children hold at least `min_leaf` rows. Ties on
/// decrease resolve to the lowest attribute index, then the lowest threshold.
Split best_split(std::span<const LabeledSample> samples, std::span<const std::size_t> rows,
                 std::span<const std::size_t> attributes, std::size_t min_leaf);
Split best_split_serial(std::span<const LabeledSample> samples, std::span<const std::size_t> rows,
                        std::span<const std::size_t> attributes, std::size_t min_leaf);

} // namespace dtmon::kernels
