#include "dtmon/dtree.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "dtmon/kernels.hpp"

namespace dtmon {

namespace {

TreeNode make_leaf(std::size_t n_int, std::size_t n_not) {
    TreeNode leaf;
    leaf.leaf = true;
    leaf.n_interfere = n_int;
    leaf.n_not = n_not;
    // Ties go to the conservative class.
    leaf.label = n_int >= n_not ? Label::Interfere : Label::NotInterfere;
    const double n = static_cast<double>(n_int + n_not);
    const double agree = static_cast<double>(leaf.label == Label::Interfere ? n_int : n_not);
    leaf.error = n > 0.0 ? 1.0 - agree / n : 0.0;
    leaf.risk = kernels::gini(n_int, n_not);
    return leaf;
}

class Builder {
  public:
    Builder(const Dataset& data, const TreeParams& params, std::span<const std::size_t> attributes)
        : samples_(data.samples()), params_(params), attributes_(attributes) {}

    std::vector<TreeNode> build() {
        std::vector<std::size_t> rows(samples_.size());
        std::iota(rows.begin(), rows.end(), std::size_t{0});
        grow(rows, 0);
        return std::move(nodes_);
    }

  private:
    int grow(const std::vector<std::size_t>& rows, std::size_t depth) {
        std::size_t n_int = 0;
        for (std::size_t r : rows)
            if (samples_[r].label == Label::Interfere) ++n_int;
        const std::size_t n_not = rows.size() - n_int;

        const int id = static_cast<int>(nodes_.size());
        nodes_.push_back(make_leaf(n_int, n_not));

        if (n_int == 0 || n_not == 0 || depth >= params_.max_depth) return id;

        const kernels::Split split =
            kernels::best_split(samples_, rows, attributes_, params_.min_leaf_size);
        if (!split.valid || split.decrease < params_.min_impurity_decrease) return id;

        std::vector<std::size_t> left;
        std::vector<std::size_t> right;
        for (std::size_t r : rows)
            (samples_[r].attributes[split.attribute] < split.threshold ? left : right).push_back(r);

        TreeNode& node = nodes_[static_cast<std::size_t>(id)];
        node.leaf = false;
        node.attribute = split.attribute;
        node.threshold = split.threshold;
        node.decrease = split.decrease;

        const int l = grow(left, depth + 1);
        nodes_[static_cast<std::size_t>(id)].left = l;
        const int r = grow(right, depth + 1);
        nodes_[static_cast<std::size_t>(id)].right = r;
        return id;
    }

    std::span<const LabeledSample> samples_;
    const TreeParams& params_;
    std::span<const std::size_t> attributes_;
    std::vector<TreeNode> nodes_;
};

constexpr std::array<std::size_t, kNumAttributes> kAllAttributes = {0, 1, 2, 3, 4, 5, 6, 7};

} // namespace

Tree::Tree(std::vector<TreeNode> nodes, std::size_t training_size, TreeParams params)
    : nodes_(std::move(nodes)), training_size_(training_size), params_(params) {
    if (nodes_.empty()) throw std::invalid_argument("tree has no nodes");
}

int Tree::leaf_index(const AttributeVector& a) const {
    int i = 0;
    while (!nodes_[static_cast<std::size_t>(i)].leaf) {
        const TreeNode& n = nodes_[static_cast<std::size_t>(i)];
        i = a[n.attribute] < n.threshold ? n.left : n.right;
    }
    return i;
}

std::size_t Tree::depth() const {
    std::size_t best = 0;
    std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
        auto [i, d] = stack.back();
        stack.pop_back();
        const TreeNode& n = node(i);
        if (n.leaf) {
            best = std::max(best, d);
        } else {
            stack.push_back({n.left, d + 1});
            stack.push_back({n.right, d + 1});
        }
    }
    return best;
}

std::size_t Tree::leaf_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.leaf; }));
}

Tree fit(const Dataset& data, const TreeParams& params) { return fit(data, params, kAllAttributes); }

Tree fit(const Dataset& data, const TreeParams& params, std::span<const std::size_t> attributes) {
    if (data.empty()) throw InvalidInput("cannot fit a tree on an empty dataset");
    if (params.min_leaf_size < 1 || params.max_depth < 1)
        throw InvalidInput("min_leaf_size and max_depth must be >= 1");
    for (std::size_t a : attributes)
        if (a >= kNumAttributes) throw InvalidInput("attribute index out of range");
    Builder b(data, params, attributes);
    return Tree(b.build(), data.size(), params);
}

Label predict(const Tree& tree, const AttributeVector& a) { return tree.node(tree.leaf_index(a)).label; }

bool ExplanationClause::satisfied_by(double value) const {
    switch (relation) {
    case Relation::Less: return value < upper;
    case Relation::GreaterEqual: return value >= lower;
    case Relation::Interval: return value >= lower && value < upper;
    }
    return false;
}

bool satisfies(const AttributeVector& a, const std::vector<ExplanationClause>& clauses) {
    return std::all_of(clauses.begin(), clauses.end(),
                       [&](const ExplanationClause& c) { return c.satisfied_by(a[c.attribute]); });
}

std::vector<ExplanationClause> path_clauses(const Tree& tree, int leaf) {
    // Parent links are implicit; recover the path by descending from the root.
    std::vector<int> parent(tree.nodes().size(), TreeNode::kNone);
    for (std::size_t i = 0; i < tree.nodes().size(); ++i) {
        const TreeNode& n = tree.nodes()[i];
        if (!n.leaf) {
            parent[static_cast<std::size_t>(n.left)] = static_cast<int>(i);
            parent[static_cast<std::size_t>(n.right)] = static_cast<int>(i);
        }
    }
    std::vector<std::pair<int, bool>> path; // (internal node, went right)
    for (int c = leaf; parent[static_cast<std::size_t>(c)] != TreeNode::kNone;
         c = parent[static_cast<std::size_t>(c)]) {
        const int p = parent[static_cast<std::size_t>(c)];
        path.push_back({p, tree.node(p).right == c});
    }
    std::reverse(path.begin(), path.end());

    constexpr double inf = std::numeric_limits<double>::infinity();
    std::array<double, kNumAttributes> lo;
    std::array<double, kNumAttributes> hi;
    lo.fill(-inf);
    hi.fill(inf);
    std::vector<std::size_t> order;
    for (auto [i, right] : path) {
        const TreeNode& n = tree.node(i);
        if (std::find(order.begin(), order.end(), n.attribute) == order.end())
            order.push_back(n.attribute);
        if (right)
            lo[n.attribute] = std::max(lo[n.attribute], n.threshold);
        else
            hi[n.attribute] = std::min(hi[n.attribute], n.threshold);
    }

    std::vector<ExplanationClause> out;
    for (std::size_t a : order) {
        ExplanationClause c;
        c.attribute = a;
        c.lower = lo[a];
        c.upper = hi[a];
        if (lo[a] == -inf)
            c.relation = Relation::Less;
        else if (hi[a] == inf)
            c.relation = Relation::GreaterEqual;
        else
            c.relation = Relation::Interval;
        out.push_back(c);
    }
    return out;
}

Explanation explain(const Tree& tree, const AttributeVector& a) {
    const int leaf = tree.leaf_index(a);
    return {tree.node(leaf).label, path_clauses(tree, leaf)};
}

std::vector<CounterfactualRule> counterfactuals(const Tree& tree, Label predicted) {
    std::vector<CounterfactualRule> out;
    // Nodes are stored in preorder, so index order is left-to-right leaf order.
    for (std::size_t i = 0; i < tree.nodes().size(); ++i) {
        const TreeNode& n = tree.nodes()[i];
        if (!n.leaf || n.label == predicted) continue;
        const int id = static_cast<int>(i);
        out.push_back({path_clauses(tree, id), n.error, n.risk, n.size(), id});
    }
    return out;
}

std::array<double, kNumAttributes> predictor_importance(const Tree& tree) {
    std::array<double, kNumAttributes> imp{};
    const double total = static_cast<double>(tree.root().size());
    for (const TreeNode& n : tree.nodes())
        if (!n.leaf) imp[n.attribute] += static_cast<double>(n.size()) / total * n.decrease;
    const double sum = std::accumulate(imp.begin(), imp.end(), 0.0);
    if (sum > 0.0)
        for (double& v : imp) v /= sum;
    return imp;
}

// --- formatting ----------------------------------------------------------------

std::string format_number(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    std::string s(buf);
    if (s.find('.') != std::string::npos) {
        while (s.back() == '0') s.pop_back();
        if (s.back() == '.') s.pop_back();
    }
    if (s == "-0") s = "0";
    return s;
}

std::string format_clause(const ExplanationClause& c) {
    const std::string name(attribute_name(c.attribute));
    switch (c.relation) {
    case Relation::Less: return name + " < " + format_number(c.upper);
    case Relation::GreaterEqual: return name + " >= " + format_number(c.lower);
    case Relation::Interval: {
        int decimals = 2;
        while (decimals < 17 && format_number(c.lower, decimals) == format_number(c.upper, decimals)) ++decimals;
        return format_number(c.lower, decimals) + " <= " + name + " < " + format_number(c.upper, decimals);
    }
    }
    return name;
}

std::string format_clauses(const std::vector<ExplanationClause>& clauses) {
    std::string out = "{";
    for (std::size_t i = 0; i < clauses.size(); ++i) {
        if (i) out += ", ";
        out += format_clause(clauses[i]);
    }
    return out + "}";
}

std::string format_explanation(const Explanation& e) {
    return std::string(label_name(e.predicted)) + " because: " + format_clauses(e.clauses);
}

std::string format_counterfactuals(const std::vector<CounterfactualRule>& rules, Label predicted) {
    std::string out = std::string(label_name(opposite(predicted))) + " when: ";
    if (rules.empty()) return out + "{}";
    for (std::size_t i = 0; i < rules.size(); ++i) {
        if (i) out += " ∨ ";
        out += format_clauses(rules[i].clauses);
    }
    return out;
}

nlohmann::json to_json(const ExplanationClause& c) {
    nlohmann::json j{{"attribute", attribute_name(c.attribute)}, {"attribute_index", c.attribute}};
    switch (c.relation) {
    case Relation::Less: j["relation"] = "<"; j["upper"] = c.upper; break;
    case Relation::GreaterEqual: j["relation"] = ">="; j["lower"] = c.lower; break;
    case Relation::Interval:
        j["relation"] = "interval";
        j["lower"] = c.lower;
        j["upper"] = c.upper;
        break;
    }
    return j;
}

nlohmann::json to_json(const CounterfactualRule& r) {
    nlohmann::json clauses = nlohmann::json::array();
    for (const auto& c : r.clauses) clauses.push_back(to_json(c));
    return {{"clauses", clauses},
            {"text", format_clauses(r.clauses)},
            {"error", r.leaf_error},
            {"risk", r.leaf_risk},
            {"support", r.support}};
}

nlohmann::json to_json(const Tree& tree) {
    nlohmann::json nodes = nlohmann::json::array();
    for (std::size_t i = 0; i < tree.nodes().size(); ++i) {
        const TreeNode& n = tree.nodes()[i];
        nlohmann::json j{{"id", i}, {"counts", {n.n_interfere, n.n_not}}};
        if (n.leaf) {
            j["type"] = "leaf";
            j["label"] = static_cast<int>(n.label);
            j["error"] = n.error;
            j["risk"] = n.risk;
        } else {
            j["type"] = "internal";
            j["attribute"] = attribute_name(n.attribute);
            j["attribute_index"] = n.attribute;
            j["threshold"] = n.threshold;
            j["decrease"] = n.decrease;
            j["left"] = n.left;
            j["right"] = n.right;
        }
        nodes.push_back(std::move(j));
    }
    const TreeParams& p = tree.params();
    return {{"training_size", tree.training_size()},
            {"params",
             {{"min_leaf_size", p.min_leaf_size},
              {"max_depth", p.max_depth},
              {"min_impurity_decrease", p.min_impurity_decrease}}},
            {"nodes", nodes}};
}

Tree tree_from_json(const nlohmann::json& j) {
    TreeParams p;
    p.min_leaf_size = j.at("params").at("min_leaf_size").get<std::size_t>();
    p.max_depth = j.at("params").at("max_depth").get<std::size_t>();
    p.min_impurity_decrease = j.at("params").at("min_impurity_decrease").get<double>();
    std::vector<TreeNode> nodes;
    for (const auto& jn : j.at("nodes")) {
        const auto counts = jn.at("counts");
        TreeNode n = make_leaf(counts.at(0).get<std::size_t>(), counts.at(1).get<std::size_t>());
        if (jn.at("type") == "internal") {
            n.leaf = false;
            n.attribute = jn.at("attribute_index").get<std::size_t>();
            n.threshold = jn.at("threshold").get<double>();
            n.decrease = jn.at("decrease").get<double>();
            n.left = jn.at("left").get<int>();
            n.right = jn.at("right").get<int>();
        }
        nodes.push_back(n);
    }
    return Tree(std::move(nodes), j.at("training_size").get<std::size_t>(), p);
}

} // namespace dtmon
