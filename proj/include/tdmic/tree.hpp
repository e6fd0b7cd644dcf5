#pragma once

// Decision trees grown by leaf splits, with exact per-leaf bookkeeping under a
// product distribution.

#include <algorithm>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tdmic/dnf.hpp"

namespace tdmic {

/// One test on a root-to-leaf path: x_feature == value.
struct PathStep {
    Var feature;
    bool value;
    bool operator==(const PathStep&) const = default;
};

struct Leaf {
    ReadOnceDnf residual = ReadOnceDnf::falsified();  // target conditioned on the path
    double reach_prob = 1.0;  // p(l)
    double pos_prob = 0.0;    // q(l)
    bool label = false;
    int creation_order = 0;
    std::vector<PathStep> path;

    bool uses(Var v) const {
        return std::any_of(path.begin(), path.end(), [v](const PathStep& s) { return s.feature == v; });
    }
};

/// Majority label with ties going to 1.
inline bool majority_label(double q) { return q >= 0.5; }

/// Outcome of splitting a leaf on a feature, without building the tree.
struct SplitPreview {
    double tau;  // Pr[x_feature = 1 | reach leaf]
    double q0;
    double q1;
    ReadOnceDnf residual0;
    ReadOnceDnf residual1;
};

inline SplitPreview preview_split(const Leaf& leaf, Var feature, const ProductDistribution& dist) {
    if (leaf.uses(feature))
        throw std::invalid_argument("split: feature " + std::to_string(feature) +
                                    " already tested on the path to this leaf");
    SplitPreview s{dist[feature], 0.0, 0.0, leaf.residual.condition(feature, false),
                   leaf.residual.condition(feature, true)};
    s.q0 = satisfy_probability(s.residual0, dist);
    s.q1 = satisfy_probability(s.residual1, dist);
    return s;
}

/// Decrease in misclassification cost from splitting a node with positive
/// rate q into children with rates q0 (weight 1-tau) and q1 (weight tau).
inline double error_reduction_node(double q, double q0, double q1, double tau) {
    return cost(q) - (1.0 - tau) * cost(q0) - tau * cost(q1);
}

/// Unweighted entropy gain of a split.
inline double entropy_gain(double q, double q0, double q1, double tau) {
    return entropy(q) - (1.0 - tau) * entropy(q0) - tau * entropy(q1);
}

/// Record of one applied split, in application order.
struct SplitRecord {
    int leaf_order;
    Var feature;
    double reach_prob;
    double q;
    double q0;
    double q1;
    double tau;
};

/// Immutable binary decision tree. Left child is x_feature = 0, right child
/// is x_feature = 1. split() returns a new tree that shares every subtree off
/// the rewritten path.
class DecisionTree {
public:
    struct Node {
        Var feature = -1;  // -1 for leaves
        std::shared_ptr<const Node> left;
        std::shared_ptr<const Node> right;
        std::shared_ptr<const Leaf> leaf;

        bool is_leaf() const { return feature < 0; }
    };
    using NodePtr = std::shared_ptr<const Node>;

    /// A single majority-labeled leaf for target under dist.
    static DecisionTree single_leaf(ReadOnceDnf target, ProductDistribution dist) {
        if (!dist.covers(target))
            throw std::out_of_range("distribution does not cover every variable of " + target.to_string());
        DecisionTree t;
        Leaf leaf;
        leaf.residual = target;
        leaf.reach_prob = 1.0;
        leaf.pos_prob = satisfy_probability(target, dist);
        leaf.label = majority_label(leaf.pos_prob);
        leaf.creation_order = 0;
        auto lp = std::make_shared<const Leaf>(std::move(leaf));
        t.root_ = make_leaf_node(lp);
        t.leaves_.push_back(std::move(lp));
        t.next_order_ = 1;
        t.target_ = std::move(target);
        t.dist_ = std::move(dist);
        return t;
    }

    const NodePtr& root() const { return root_; }
    const ReadOnceDnf& target() const { return target_; }
    const ProductDistribution& dist() const { return dist_; }
    int internal_count() const { return internal_count_; }
    const std::vector<SplitRecord>& splits() const { return splits_; }

    /// Leaves in creation order.
    const std::vector<std::shared_ptr<const Leaf>>& leaves() const { return leaves_; }

    const Leaf& leaf(int creation_order) const {
        auto it = std::lower_bound(leaves_.begin(), leaves_.end(), creation_order,
                                   [](const auto& l, int o) { return l->creation_order < o; });
        if (it == leaves_.end() || (*it)->creation_order != creation_order)
            throw std::out_of_range("no leaf with creation order " + std::to_string(creation_order));
        return **it;
    }

    /// Leaf reached by following the given branch directions from the root.
    const Leaf& leaf_at(const std::vector<bool>& directions) const {
        const Node* n = root_.get();
        for (bool d : directions) {
            if (n->is_leaf()) throw std::out_of_range("leaf_at: path runs past a leaf");
            n = d ? n->right.get() : n->left.get();
        }
        if (!n->is_leaf()) throw std::out_of_range("leaf_at: path ends at an internal node");
        return *n->leaf;
    }

    DecisionTree split(const Leaf& target_leaf, Var feature) const {
        return split(target_leaf.creation_order, feature);
    }

    DecisionTree split(int leaf_order, Var feature) const {
        const Leaf& old = leaf(leaf_order);
        SplitPreview s = preview_split(old, feature, dist_);

        auto child = [&](bool value, ReadOnceDnf residual, double q, double weight, int order) {
            Leaf c;
            c.residual = std::move(residual);
            c.reach_prob = old.reach_prob * weight;
            c.pos_prob = q;
            c.label = majority_label(q);
            c.creation_order = order;
            c.path = old.path;
            c.path.push_back({feature, value});
            return std::make_shared<const Leaf>(std::move(c));
        };
        auto l0 = child(false, std::move(s.residual0), s.q0, 1.0 - s.tau, next_order_);
        auto l1 = child(true, std::move(s.residual1), s.q1, s.tau, next_order_ + 1);

        auto inner = std::make_shared<Node>();
        inner->feature = feature;
        inner->left = make_leaf_node(l0);
        inner->right = make_leaf_node(l1);

        DecisionTree t = *this;
        t.root_ = rebuild(root_, old.path, 0, std::move(inner));
        t.leaves_.erase(std::find_if(t.leaves_.begin(), t.leaves_.end(),
                                     [&](const auto& l) { return l->creation_order == leaf_order; }));
        t.leaves_.push_back(std::move(l0));
        t.leaves_.push_back(std::move(l1));
        t.next_order_ += 2;
        t.internal_count_ += 1;
        t.splits_.push_back({leaf_order, feature, old.reach_prob, old.pos_prob, s.q0, s.q1, s.tau});
        return t;
    }

    /// E(T): sum over leaves of p(l) * C(q(l)).
    double error() const {
        double e = 0.0;
        for (const auto& l : leaves_) e += l->reach_prob * cost(l->pos_prob);
        return e;
    }

    /// H(T): sum over leaves of p(l) * H(q(l)).
    double entropy_value() const {
        double h = 0.0;
        for (const auto& l : leaves_) h += l->reach_prob * tdmic::entropy(l->pos_prob);
        return h;
    }

    /// H(T) - H(T(l, feature)).
    double weighted_gain(const Leaf& l, Var feature) const {
        SplitPreview s = preview_split(l, feature, dist_);
        return l.reach_prob * entropy_gain(l.pos_prob, s.q0, s.q1, s.tau);
    }

    template <class Bits>
    bool predict(const Bits& x) const {
        const Node* n = root_.get();
        while (!n->is_leaf()) n = x[static_cast<std::size_t>(n->feature)] ? n->right.get() : n->left.get();
        return n->leaf->label;
    }

private:
    static NodePtr make_leaf_node(std::shared_ptr<const Leaf> leaf) {
        auto n = std::make_shared<Node>();
        n->leaf = std::move(leaf);
        return n;
    }

    static NodePtr rebuild(const NodePtr& at, const std::vector<PathStep>& path, std::size_t depth,
                           NodePtr replacement) {
        if (depth == path.size()) return replacement;
        auto copy = std::make_shared<Node>(*at);
        if (path[depth].value)
            copy->right = rebuild(at->right, path, depth + 1, std::move(replacement));
        else
            copy->left = rebuild(at->left, path, depth + 1, std::move(replacement));
        return copy;
    }

    NodePtr root_;
    std::vector<std::shared_ptr<const Leaf>> leaves_;
    std::vector<SplitRecord> splits_;
    ReadOnceDnf target_ = ReadOnceDnf::falsified();
    ProductDistribution dist_;
    int internal_count_ = 0;
    int next_order_ = 0;
};

inline DecisionTree single_leaf_tree(ReadOnceDnf target, ProductDistribution dist) {
    return DecisionTree::single_leaf(std::move(target), std::move(dist));
}

inline double tree_error(const DecisionTree& t) { return t.error(); }
inline double tree_entropy(const DecisionTree& t) { return t.entropy_value(); }

inline double weighted_gain(const DecisionTree& t, const Leaf& l, Var feature) {
    return t.weighted_gain(l, feature);
}

template <class Bits>
bool predict(const DecisionTree& t, const Bits& x) {
    return t.predict(x);
}

/// Target (x_0 & ... & x_{l-1}) | (x_l & ... & x_{l+m-1}).
inline ReadOnceDnf two_term_target(int l, int m) {
    std::vector<Var> xs, ys;
    for (int i = 0; i < l; ++i) xs.push_back(i);
    for (int j = 0; j < m; ++j) ys.push_back(l + j);
    return ReadOnceDnf::from_terms({xs, ys});
}

/// The reference tree B_t for the two-term target with term sizes l <= m under
/// the uniform distribution: a right path of x-nodes whose left subtrees are
/// right y-paths, filled to length m from the top x-node downward.
inline DecisionTree build_bt(int l, int m, int t) {
    if (l < 1 || m < l) throw std::invalid_argument("build_bt: need 1 <= l <= m");
    if (t < 1 || t > l + l * m)
        throw std::invalid_argument("build_bt: budget " + std::to_string(t) + " outside [1, " +
                                    std::to_string(l + l * m) + "]");
    DecisionTree tree = single_leaf_tree(two_term_target(l, m), ProductDistribution::uniform(l + m));
    std::vector<bool> dirs;
    const int spine = std::min(t, l);
    for (int i = 0; i < spine; ++i) {
        tree = tree.split(tree.leaf_at(dirs), i);
        dirs.push_back(true);
    }
    int remaining = t - spine;
    for (int i = 0; i < l && remaining > 0; ++i) {
        std::vector<bool> sub(static_cast<std::size_t>(i), true);
        sub.push_back(false);
        for (int j = 0; j < m && remaining > 0; ++j, --remaining) {
            tree = tree.split(tree.leaf_at(sub), l + j);
            sub.push_back(true);
        }
    }
    return tree;
}

}  // namespace tdmic
