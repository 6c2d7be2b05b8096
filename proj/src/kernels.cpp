#include "dtmon/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dtmon::kernels {

namespace {

// Below these sizes the fork/join cost of a parallel region dominates.
constexpr std::size_t kParallelScanMin = 4096;
constexpr std::size_t kParallelSplitMin = 2048;

constexpr double kTieEps = 1e-12;

bool better(const Split& candidate, const Split& incumbent) {
    return candidate.valid && (!incumbent.valid || candidate.decrease > incumbent.decrease + kTieEps);
}

// Best threshold along one attribute. Scans ascending so the first maximum
// found is the lowest threshold.
Split best_on_attribute(std::span<const LabeledSample> samples, std::span<const std::size_t> rows,
                        std::size_t attribute, std::size_t min_leaf, std::size_t total_int,
                        double parent_gini) {
    std::vector<std::size_t> order(rows.begin(), rows.end());
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return samples[a].attributes[attribute] < samples[b].attributes[attribute];
    });

    const std::size_t n = order.size();
    const double nd = static_cast<double>(n);
    Split best;
    std::size_t left_int = 0;
    for (std::size_t k = 1; k < n; ++k) {
        if (samples[order[k - 1]].label == Label::Interfere) ++left_int;
        const double lo = samples[order[k - 1]].attributes[attribute];
        const double hi = samples[order[k]].attributes[attribute];
        if (!(lo < hi)) continue;
        const std::size_t n_left = k;
        const std::size_t n_right = n - k;
        if (n_left < min_leaf || n_right < min_leaf) continue;

        const std::size_t right_int = total_int - left_int;
        const double weighted = (static_cast<double>(n_left) * gini(left_int, n_left - left_int) +
                                 static_cast<double>(n_right) * gini(right_int, n_right - right_int)) /
                                nd;
        double threshold = 0.5 * (lo + hi);
        if (!(threshold > lo)) threshold = hi;
        Split c{true, attribute, threshold, parent_gini - weighted};
        if (better(c, best)) best = c;
    }
    return best;
}

struct NodeStats {
    std::size_t n_interfere = 0;
    double gini = 0.0;
};

NodeStats node_stats(std::span<const LabeledSample> samples, std::span<const std::size_t> rows) {
    NodeStats s;
    for (std::size_t r : rows)
        if (samples[r].label == Label::Interfere) ++s.n_interfere;
    s.gini = gini(s.n_interfere, rows.size() - s.n_interfere);
    return s;
}

} // namespace

double scaled_sq_distance(const AttributeVector& a, const AttributeVector& b, const Weights& w,
                          std::size_t dims) {
    double acc = 0.0;
    for (std::size_t k = 0; k < dims; ++k) {
        const double diff = w[k] * (a[k] - b[k]);
        acc += diff * diff;
    }
    return acc;
}

double gini(std::size_t n_interfere, std::size_t n_not) {
    const double n = static_cast<double>(n_interfere + n_not);
    if (n == 0.0) return 0.0;
    const double p = static_cast<double>(n_interfere) / n;
    const double q = static_cast<double>(n_not) / n;
    return 1.0 - p * p - q * q;
}

std::vector<std::size_t> neighbors_within_serial(std::span<const LabeledSample> samples,
                                                 const AttributeVector& center,
                                                 const Weights& weights, double delta,
                                                 std::size_t dims) {
    const double r2 = delta * delta;
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < samples.size(); ++i)
        if (scaled_sq_distance(center, samples[i].attributes, weights, dims) <= r2) out.push_back(i);
    return out;
}

std::vector<std::size_t> neighbors_within(std::span<const LabeledSample> samples,
                                          const AttributeVector& center, const Weights& weights,
                                          double delta, std::size_t dims) {
    const std::size_t n = samples.size();
    if (n < kParallelScanMin) return neighbors_within_serial(samples, center, weights, delta, dims);

    const double r2 = delta * delta;
    std::vector<unsigned char> hit(n);
    const auto sn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < sn; ++i)
        hit[i] = scaled_sq_distance(center, samples[i].attributes, weights, dims) <= r2;

    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n; ++i)
        if (hit[i]) out.push_back(i);
    return out;
}

Split best_split_serial(std::span<const LabeledSample> samples, std::span<const std::size_t> rows,
                        std::span<const std::size_t> attributes, std::size_t min_leaf) {
    const NodeStats stats = node_stats(samples, rows);
    Split best;
    for (std::size_t a : attributes) {
        const Split c = best_on_attribute(samples, rows, a, min_leaf, stats.n_interfere, stats.gini);
        if (better(c, best)) best = c;
    }
    return best;
}

Split best_split(std::span<const LabeledSample> samples, std::span<const std::size_t> rows,
                 std::span<const std::size_t> attributes, std::size_t min_leaf) {
    if (rows.size() < kParallelSplitMin || attributes.size() < 2)
        return best_split_serial(samples, rows, attributes, min_leaf);

    const NodeStats stats = node_stats(samples, rows);
    std::vector<Split> per_attr(attributes.size());
    const auto na = static_cast<std::ptrdiff_t>(attributes.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t k = 0; k < na; ++k)
        per_attr[k] = best_on_attribute(samples, rows, attributes[k], min_leaf, stats.n_interfere,
                                        stats.gini);

    // Reduce in attribute order so tie-breaking matches the serial scan.
    Split best;
    for (const Split& c : per_attr)
        if (better(c, best)) best = c;
    return best;
}

} // namespace dtmon::kernels
