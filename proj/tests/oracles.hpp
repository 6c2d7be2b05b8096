#pragma once

// Independent brute-force references. Nothing here calls into the kernels or
// tree code it is used to check.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <vector>

#include "dtmon/core.hpp"
#include "dtmon/dtree.hpp"

namespace oracle {

using dtmon::AttributeVector;
using dtmon::Dataset;
using dtmon::kNumAttributes;
using dtmon::Label;
using dtmon::LabeledSample;

inline double gini_of(double n_int, double n_not) {
    const double n = n_int + n_not;
    if (n == 0.0) return 0.0;
    const double p = n_int / n;
    return 2.0 * p * (1.0 - p);
}

struct SplitRef {
    bool valid = false;
    std::size_t attribute = 0;
    double threshold = 0.0;
    double decrease = 0.0;
};

// Every (attribute, midpoint) pair, each scored by a full pass over the rows.
inline SplitRef exhaustive_split(const std::vector<LabeledSample>& rows,
                                 std::span<const std::size_t> attributes, std::size_t min_leaf) {
    double total_int = 0;
    for (const auto& s : rows) total_int += s.label == Label::Interfere;
    const double n = static_cast<double>(rows.size());
    const double parent = gini_of(total_int, n - total_int);

    SplitRef best;
    for (std::size_t a : attributes) {
        std::set<double> distinct;
        for (const auto& s : rows) distinct.insert(s.attributes[a]);
        std::vector<double> vals(distinct.begin(), distinct.end());
        for (std::size_t k = 1; k < vals.size(); ++k) {
            double t = 0.5 * (vals[k - 1] + vals[k]);
            if (!(t > vals[k - 1])) t = vals[k];
            double li = 0, ln = 0, ri = 0, rn = 0;
            for (const auto& s : rows) {
                const bool in = s.label == Label::Interfere;
                if (s.attributes[a] < t) (in ? li : ln) += 1;
                else (in ? ri : rn) += 1;
            }
            if (li + ln < static_cast<double>(min_leaf) || ri + rn < static_cast<double>(min_leaf))
                continue;
            const double dec = parent - ((li + ln) * gini_of(li, ln) + (ri + rn) * gini_of(ri, rn)) / n;
            if (!best.valid || dec > best.decrease + 1e-12) best = {true, a, t, dec};
        }
    }
    return best;
}

struct FitCheck {
    std::size_t internal_checked = 0;
    std::size_t leaves_checked = 0;
    std::size_t mismatches = 0;
};

// Replays the training rows down a fitted tree and checks every internal
// split against exhaustive_split, and every leaf against the stopping rules.
inline FitCheck check_fit(const dtmon::Tree& tree, const Dataset& data, const dtmon::TreeParams& p,
                          std::span<const std::size_t> attributes) {
    FitCheck out;
    struct Item {
        int node;
        std::vector<LabeledSample> rows;
        std::size_t depth;
    };
    std::vector<Item> stack{{0, data.samples(), 0}};
    while (!stack.empty()) {
        Item it = std::move(stack.back());
        stack.pop_back();
        const auto& node = tree.node(it.node);
        std::size_t n_int = 0;
        for (const auto& s : it.rows) n_int += s.label == Label::Interfere;
        if (node.n_interfere != n_int || node.size() != it.rows.size()) ++out.mismatches;
        const bool pure = n_int == 0 || n_int == it.rows.size();
        const SplitRef ref = pure || it.depth >= p.max_depth
                                 ? SplitRef{}
                                 : exhaustive_split(it.rows, attributes, p.min_leaf_size);
        if (node.leaf) {
            ++out.leaves_checked;
            if (ref.valid && ref.decrease >= p.min_impurity_decrease) ++out.mismatches;
            continue;
        }
        ++out.internal_checked;
        if (!ref.valid || ref.attribute != node.attribute || ref.threshold != node.threshold ||
            std::abs(ref.decrease - node.decrease) > 1e-12)
            ++out.mismatches;
        std::vector<LabeledSample> l, r;
        for (const auto& s : it.rows) (s.attributes[node.attribute] < node.threshold ? l : r).push_back(s);
        stack.push_back({node.left, std::move(l), it.depth + 1});
        stack.push_back({node.right, std::move(r), it.depth + 1});
    }
    return out;
}

struct Box {
    std::array<double, kNumAttributes> lo;
    std::array<double, kNumAttributes> hi;
    bool contains(const AttributeVector& a) const {
        for (std::size_t k = 0; k < kNumAttributes; ++k)
            if (!(a[k] >= lo[k] && a[k] < hi[k])) return false;
        return true;
    }
};

// Axis-aligned region of every leaf, keyed by node index.
inline std::vector<std::pair<int, Box>> leaf_regions(const dtmon::Tree& tree) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    Box all;
    all.lo.fill(-inf);
    all.hi.fill(inf);
    std::vector<std::pair<int, Box>> out;
    std::vector<std::pair<int, Box>> stack{{0, all}};
    while (!stack.empty()) {
        auto [i, b] = stack.back();
        stack.pop_back();
        const auto& n = tree.node(i);
        if (n.leaf) {
            out.push_back({i, b});
            continue;
        }
        Box l = b, r = b;
        l.hi[n.attribute] = std::min(l.hi[n.attribute], n.threshold);
        r.lo[n.attribute] = std::max(r.lo[n.attribute], n.threshold);
        stack.push_back({n.left, l});
        stack.push_back({n.right, r});
    }
    return out;
}

// Leaf whose region holds `a`; -1 when none or more than one does.
inline int leaf_by_region(const std::vector<std::pair<int, Box>>& regions, const AttributeVector& a) {
    int found = -1;
    for (const auto& [i, b] : regions) {
        if (!b.contains(a)) continue;
        if (found != -1) return -1;
        found = i;
    }
    return found;
}

inline std::optional<std::size_t> argmin_product(std::span<const dtmon::CounterfactualRule> rules) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < rules.size(); ++i) {
        if (!best) {
            best = i;
            continue;
        }
        const double pi = rules[i].leaf_error * rules[i].leaf_risk;
        const double pb = rules[*best].leaf_error * rules[*best].leaf_risk;
        if (pi < pb - 1e-12 || (std::abs(pi - pb) <= 1e-12 && rules[i].support > rules[*best].support))
            best = i;
    }
    return best;
}

struct Extrema {
    std::array<double, kNumAttributes> min;
    std::array<double, kNumAttributes> max;
};

inline Extrema extrema(const Dataset& d) {
    Extrema e;
    e.min.fill(std::numeric_limits<double>::infinity());
    e.max.fill(-std::numeric_limits<double>::infinity());
    for (const auto& s : d)
        for (std::size_t k = 0; k < kNumAttributes; ++k) {
            if (s.attributes[k] < e.min[k]) e.min[k] = s.attributes[k];
            if (s.attributes[k] > e.max[k]) e.max[k] = s.attributes[k];
        }
    return e;
}

inline bool outside(const AttributeVector& a, const Extrema& e) {
    for (std::size_t k = 0; k < kNumAttributes; ++k)
        if (a[k] < e.min[k] || a[k] > e.max[k]) return true;
    return false;
}

inline std::vector<std::size_t> within(const Dataset& d, const AttributeVector& c,
                                       const std::array<double, kNumAttributes>& w, double delta,
                                       std::size_t dims) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < d.size(); ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < dims; ++k) acc += std::pow(w[k] * (d[i].attributes[k] - c[k]), 2);
        if (std::sqrt(acc) <= delta * (1.0 + 1e-12)) out.push_back(i);
    }
    return out;
}

// Random samples on a small grid so that ties and duplicate values occur.
inline Dataset random_dataset(std::mt19937_64& rng, std::size_t n, int levels = 12) {
    std::uniform_int_distribution<int> lvl(0, levels - 1);
    std::vector<LabeledSample> v(n);
    for (auto& s : v) {
        for (std::size_t k = 0; k < kNumAttributes; ++k) s.attributes[k] = 0.25 * lvl(rng) - 1.0;
        // Labels follow a noisy rule so trees have structure.
        const bool rule = s.attributes[4] < 0.3 && s.attributes[0] < 1.0;
        s.label = (rule != (std::bernoulli_distribution(0.15)(rng))) ? Label::Interfere : Label::NotInterfere;
    }
    return Dataset(std::move(v));
}

inline AttributeVector random_vector(std::mt19937_64& rng, double lo = -2.0, double hi = 2.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    AttributeVector a;
    for (auto& x : a.values) x = u(rng);
    return a;
}

} // namespace oracle
