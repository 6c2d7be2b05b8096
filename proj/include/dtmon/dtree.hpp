#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dtmon/core.hpp"

namespace dtmon {

struct TreeParams {
    std::size_t min_leaf_size = 5;
    std::size_t max_depth = 8;
    double min_impurity_decrease = 1e-4;
};

// Internal nodes send `attribute < threshold` left and `attribute >= threshold`
// right. Leaves carry class counts plus node error and node risk.
struct TreeNode {
    static constexpr int kNone = -1;

    bool leaf = true;
    std::size_t attribute = 0;
    double threshold = 0.0;
    int left = kNone;
    int right = kNone;

    std::size_t n_interfere = 0;
    std::size_t n_not = 0;
    Label label = Label::Interfere;
    double error = 0.0;  // share of training rows disagreeing with `label`
    double risk = 0.0;   // Gini impurity of the node
    double decrease = 0.0; // impurity decrease of the split (internal nodes)

    std::size_t size() const { return n_interfere + n_not; }
};

class Tree {
  public:
    const std::vector<TreeNode>& nodes() const { return nodes_; }
    const TreeNode& root() const { return nodes_.front(); }
    const TreeNode& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
    std::size_t training_size() const { return training_size_; }
    const TreeParams& params() const { return params_; }
    std::size_t depth() const;
    std::size_t leaf_count() const;

    /// Index of the leaf reached by `a`.
    int leaf_index(const AttributeVector& a) const;

    // Assembled by fit() and from_json(); not meant for direct construction.
    Tree(std::vector<TreeNode> nodes, std::size_t training_size, TreeParams params);

  private:
    std::vector<TreeNode> nodes_;
    std::size_t training_size_ = 0;
    TreeParams params_;
};

/// Greedy CART with Gini splitting over all eight attributes.
Tree fit(const Dataset& data, const TreeParams& params);
/// Same, but splits are only searched over `attributes`.
Tree fit(const Dataset& data, const TreeParams& params, std::span<const std::size_t> attributes);

Label predict(const Tree& tree, const AttributeVector& a);

enum class Relation { Less, GreaterEqual, Interval };

struct ExplanationClause {
    std::size_t attribute = 0;
    Relation relation = Relation::Less;
    double lower = 0.0; // used by GreaterEqual and Interval
    double upper = 0.0; // used by Less and Interval

    bool satisfied_by(double value) const;
    friend bool operator==(const ExplanationClause&, const ExplanationClause&) = default;
};

bool satisfies(const AttributeVector& a, const std::vector<ExplanationClause>& clauses);

struct Explanation {
    Label predicted = Label::Interfere;
    std::vector<ExplanationClause> clauses;
};

struct CounterfactualRule {
    std::vector<ExplanationClause> clauses;
    double leaf_error = 0.0;
    double leaf_risk = 0.0;
    std::size_t support = 0;
    int leaf = TreeNode::kNone;
};

/// Root-to-leaf conditions for node `leaf`, merged per attribute into the
/// tightest interval, ordered by first appearance on the path.
std::vector<ExplanationClause> path_clauses(const Tree& tree, int leaf);

Explanation explain(const Tree& tree, const AttributeVector& a);

/// One rule per leaf whose label differs from `predicted`, in left-to-right
/// leaf order.
std::vector<CounterfactualRule> counterfactuals(const Tree& tree, Label predicted);

/// Per-attribute sum of (node share of training rows x impurity decrease),
/// normalized to sum to 1. All zeros for a single-leaf tree.
std::array<double, kNumAttributes> predictor_importance(const Tree& tree);

// --- text / JSON -------------------------------------------------------------

/// Compact number format: at most `decimals` decimals, trailing zeros dropped.
/// Interval clauses add decimals until their two bounds print differently.
std::string format_number(double v, int decimals = 2);
std::string format_clause(const ExplanationClause& c);
std::string format_clauses(const std::vector<ExplanationClause>& clauses);
/// "Interfering because: {d' < 0.24, d_x < 1.76}"
std::string format_explanation(const Explanation& e);
/// "Not Interfering when: {...} ∨ {...}"; `predicted` is the label being countered.
std::string format_counterfactuals(const std::vector<CounterfactualRule>& rules, Label predicted);

nlohmann::json to_json(const Tree& tree);
Tree tree_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExplanationClause& c);
nlohmann::json to_json(const CounterfactualRule& r);

} // namespace dtmon
