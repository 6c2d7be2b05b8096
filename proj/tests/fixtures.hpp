#pragma once

// Hand-built trees and observations shaped like the worked interference and
// correction examples.

#include <memory>
#include <random>
#include <vector>

#include "dtmon/core.hpp"
#include "dtmon/dtree.hpp"

namespace fixture {

using namespace dtmon;

struct Shape {
    std::size_t attribute = 0;
    double threshold = 0.0;
    std::shared_ptr<Shape> left, right;
    std::size_t n_int = 0, n_not = 0; // leaves only
    bool leaf() const { return !left; }
};

inline std::shared_ptr<Shape> leaf(std::size_t n_int, std::size_t n_not) {
    auto s = std::make_shared<Shape>();
    s->n_int = n_int;
    s->n_not = n_not;
    return s;
}

inline std::shared_ptr<Shape> split(std::size_t attribute, double threshold, std::shared_ptr<Shape> l,
                                    std::shared_ptr<Shape> r) {
    auto s = std::make_shared<Shape>();
    s->attribute = attribute;
    s->threshold = threshold;
    s->left = std::move(l);
    s->right = std::move(r);
    return s;
}

// Preorder node layout with counts, label, error and risk filled in.
inline Tree build(const std::shared_ptr<Shape>& root) {
    std::vector<TreeNode> nodes;
    auto rec = [&](auto&& self, const Shape& s) -> int {
        const int id = static_cast<int>(nodes.size());
        nodes.emplace_back();
        if (s.leaf()) {
            TreeNode n;
            n.n_interfere = s.n_int;
            n.n_not = s.n_not;
            n.label = s.n_int >= s.n_not ? Label::Interfere : Label::NotInterfere;
            const double tot = static_cast<double>(s.n_int + s.n_not);
            const double p = static_cast<double>(s.n_int) / tot;
            n.error = std::min(p, 1.0 - p);
            n.risk = 2.0 * p * (1.0 - p);
            nodes[static_cast<std::size_t>(id)] = n;
            return id;
        }
        const int l = self(self, *s.left);
        const int r = self(self, *s.right);
        TreeNode n;
        n.leaf = false;
        n.attribute = s.attribute;
        n.threshold = s.threshold;
        n.left = l;
        n.right = r;
        n.n_interfere = nodes[static_cast<std::size_t>(l)].n_interfere + nodes[static_cast<std::size_t>(r)].n_interfere;
        n.n_not = nodes[static_cast<std::size_t>(l)].n_not + nodes[static_cast<std::size_t>(r)].n_not;
        nodes[static_cast<std::size_t>(id)] = n;
        return id;
    };
    rec(rec, *root);
    const std::size_t total = nodes.front().size();
    return Tree(std::move(nodes), total, TreeParams{});
}

// Observation of the worked example: human ahead-right, closing in.
inline AttributeVector example_alpha() { return {{1.43, -4.71, -81, 4.93, -0.43, 1.0, 0.6, 0}}; }

// Interference tree: d' < 0.24 and d_x < 1.76 interferes; four other leaves
// are clear.
inline Tree interference_tree() {
    return build(split(
        kDprime, 0.24,
        split(kDx, 1.76, leaf(40, 2),
              split(kDx, 1.83, split(kDprime, -0.45, leaf(6, 1), leaf(1, 7)),
                    split(kDprime, -0.58, leaf(9, 0), split(kDist, 4.65, leaf(0, 8), leaf(7, 2))))),
        split(kDx, 1.15, leaf(1, 20), split(kTheta, -56, leaf(12, 3), leaf(2, 9)))));
}

// Correction tree over (v_r, lane): slowing below 0.25 or holding 0.4 clears.
inline Tree correction_tree() {
    return build(split(kVr, 0.25, split(kLane, 0.5, leaf(0, 30), leaf(2, 10)),
                       split(kVr, 0.35, leaf(20, 1), split(kVr, 0.45, leaf(3, 9), leaf(40, 4)))));
}

// Labels a random cloud around `center` by the interference tree, so trees
// fitted to it recover the same class geometry.
inline Dataset labeled_cloud(std::mt19937_64& rng, const AttributeVector& center, std::size_t n,
                             const std::array<double, kNumAttributes>& spread) {
    const Tree t = interference_tree();
    std::vector<LabeledSample> out(n);
    for (auto& s : out) {
        for (std::size_t k = 0; k < kNumAttributes; ++k)
            s.attributes[k] = center[k] + std::uniform_real_distribution<double>(-spread[k], spread[k])(rng);
        s.label = predict(t, s.attributes);
    }
    return Dataset(std::move(out));
}

} // namespace fixture
