#pragma once

// Greedy tree growers over the exact distribution: TopDown (weighted entropy
// gain), BestFirst (unweighted gain) and a FIFO recursive ID3.
//
// Scan order is leaf creation order, then feature index. Within one leaf the
// earliest of equally good features wins; across leaves a later candidate
// replaces the incumbent when its score is within kTolerance of it or better.
// Growth stops when no candidate has positive gain.

#include <cstddef>
#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tdmic/dnf.hpp"
#include "tdmic/tree.hpp"

namespace tdmic {

enum class Policy { TopDown, BestFirst, Id3 };

inline std::string_view policy_name(Policy p) {
    switch (p) {
    case Policy::TopDown: return "topdown";
    case Policy::BestFirst: return "bestfirst";
    case Policy::Id3: return "id3";
    }
    return "?";
}

inline Policy parse_policy(std::string_view s) {
    if (s == "topdown") return Policy::TopDown;
    if (s == "bestfirst") return Policy::BestFirst;
    if (s == "id3") return Policy::Id3;
    throw std::invalid_argument("unknown policy: " + std::string(s));
}

struct Snapshot {
    int t;  // number of splits applied so far
    int internal_nodes;
    double error;
    int leaf_order;  // leaf split at this iteration, -1 for the initial tree
    Var feature;     // -1 for the initial tree
};

struct GrowthTrace {
    std::vector<Snapshot> snapshots;  // snapshots[0] is the single-leaf tree
    int terminal_t = 0;               // last iteration that applied a split

    /// Error of the tree after t iterations; past an early stop this is the
    /// terminal tree's error.
    double error_at(int t) const {
        if (snapshots.empty()) throw std::logic_error("error_at: empty trace");
        std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(std::max(t, 0)), snapshots.size() - 1);
        return snapshots[i].error;
    }
};

struct GrowthResult {
    DecisionTree tree;
    GrowthTrace trace;
};

struct GrowOptions {
    /// Multiplies every gain before selection. -1 flips the sign and is only
    /// used to self-test the verification harness.
    double gain_sign = 1.0;
};

namespace detail {

struct Candidate {
    int leaf_order = -1;
    Var feature = -1;
    double score = 0.0;
};

/// Best feature of one leaf under a policy score, earliest feature on ties.
/// Only variables of the residual can have positive gain; the rest are zero.
inline std::optional<Candidate> best_in_leaf(const Leaf& leaf, const ProductDistribution& dist,
                                             Policy policy, const GrowOptions& opts) {
    if (leaf.residual.is_constant()) return std::nullopt;
    std::optional<Candidate> best;
    for (Var v : leaf.residual.variables()) {
        SplitPreview s = preview_split(leaf, v, dist);
        double g = entropy_gain(leaf.pos_prob, s.q0, s.q1, s.tau);
        if (policy == Policy::TopDown) g *= leaf.reach_prob;
        g *= opts.gain_sign;
        if (!best || g > best->score + kTolerance) best = Candidate{leaf.creation_order, v, g};
    }
    return best;
}

/// Per-leaf best candidates, cached by creation order; a leaf's best split
/// never changes until the leaf itself is split.
class CandidateCache {
public:
    CandidateCache(Policy policy, GrowOptions opts) : policy_(policy), opts_(opts) {}

    const std::optional<Candidate>& get(const Leaf& leaf, const ProductDistribution& dist) {
        auto it = cache_.find(leaf.creation_order);
        if (it == cache_.end())
            it = cache_.emplace(leaf.creation_order, best_in_leaf(leaf, dist, policy_, opts_)).first;
        return it->second;
    }

    void forget(int leaf_order) { cache_.erase(leaf_order); }

private:
    Policy policy_;
    GrowOptions opts_;
    std::map<int, std::optional<Candidate>> cache_;
};

inline std::optional<Candidate> select(const DecisionTree& tree, Policy policy, CandidateCache& cache) {
    std::optional<Candidate> best;
    for (const auto& leaf : tree.leaves()) {
        const auto& c = cache.get(*leaf, tree.dist());
        if (!c || c->score <= kTolerance) continue;
        if (policy == Policy::Id3) return c;  // first impure leaf in FIFO order
        if (!best || c->score >= best->score - kTolerance) best = c;
    }
    return best;
}

}  // namespace detail

/// Grow a tree with the given policy for at most t_max splits.
inline GrowthResult grow(Policy policy, const ReadOnceDnf& target, const ProductDistribution& dist,
                         int t_max, GrowOptions opts = {}) {
    if (t_max < 0) throw std::invalid_argument("grow: t_max must be nonnegative");
    GrowthResult r{single_leaf_tree(target, dist), {}};
    r.trace.snapshots.push_back({0, 0, r.tree.error(), -1, -1});
    detail::CandidateCache cache(policy, opts);
    for (int t = 1; t <= t_max; ++t) {
        auto c = detail::select(r.tree, policy, cache);
        if (!c) break;
        r.tree = r.tree.split(c->leaf_order, c->feature);
        cache.forget(c->leaf_order);
        r.trace.snapshots.push_back({t, r.tree.internal_count(), r.tree.error(), c->leaf_order, c->feature});
        r.trace.terminal_t = t;
    }
    return r;
}

inline GrowthResult run_topdown(const ReadOnceDnf& target, const ProductDistribution& dist, int t_max) {
    return grow(Policy::TopDown, target, dist, t_max);
}

inline GrowthResult run_bestfirst(const ReadOnceDnf& target, const ProductDistribution& dist, int t_max) {
    return grow(Policy::BestFirst, target, dist, t_max);
}

inline GrowthResult run_id3_recursive(const ReadOnceDnf& target, const ProductDistribution& dist, int t_max) {
    return grow(Policy::Id3, target, dist, t_max);
}

/// Every trace the policy can produce when each exact tie (within
/// kTolerance) among the best candidates may be resolved either way.
/// Throws std::length_error when more than max_runs traces would result.
inline std::vector<GrowthTrace> all_tie_resolutions(Policy policy, const ReadOnceDnf& target,
                                                    const ProductDistribution& dist, int t_max,
                                                    std::size_t max_runs = 10000) {
    std::vector<GrowthTrace> out;
    struct Frame {
        DecisionTree tree;
        GrowthTrace trace;
    };
    std::vector<Frame> stack;
    {
        DecisionTree root = single_leaf_tree(target, dist);
        GrowthTrace tr;
        tr.snapshots.push_back({0, 0, root.error(), -1, -1});
        stack.push_back({std::move(root), std::move(tr)});
    }
    while (!stack.empty()) {
        Frame f = std::move(stack.back());
        stack.pop_back();
        const int t = static_cast<int>(f.trace.snapshots.size());
        std::vector<detail::Candidate> all;
        if (t <= t_max) {
            for (const auto& leaf : f.tree.leaves()) {
                if (leaf->residual.is_constant()) continue;
                for (Var v : leaf->residual.variables()) {
                    SplitPreview s = preview_split(*leaf, v, dist);
                    double g = entropy_gain(leaf->pos_prob, s.q0, s.q1, s.tau);
                    if (policy == Policy::TopDown) g *= leaf->reach_prob;
                    if (g > kTolerance) all.push_back({leaf->creation_order, v, g});
                }
            }
        }
        if (policy == Policy::Id3 && !all.empty()) {
            int first = all.front().leaf_order;
            std::erase_if(all, [first](const auto& c) { return c.leaf_order != first; });
        }
        if (all.empty()) {
            if (out.size() >= max_runs) throw std::length_error("all_tie_resolutions: too many runs");
            out.push_back(std::move(f.trace));
            continue;
        }
        double top = all.front().score;
        for (const auto& c : all) top = std::max(top, c.score);
        for (auto it = all.rbegin(); it != all.rend(); ++it) {
            if (it->score < top - kTolerance) continue;
            Frame next{f.tree.split(it->leaf_order, it->feature), f.trace};
            next.trace.snapshots.push_back(
                {t, next.tree.internal_count(), next.tree.error(), it->leaf_order, it->feature});
            next.trace.terminal_t = t;
            stack.push_back(std::move(next));
            if (stack.size() + out.size() > max_runs)
                throw std::length_error("all_tie_resolutions: too many runs");
        }
    }
    return out;
}

}  // namespace tdmic
