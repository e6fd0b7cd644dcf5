#pragma once

// Reference computations used only by tests. Everything here works from truth
// tables or closed forms and shares no code with the DP or the search.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "tdmic/dnf.hpp"
#include "tdmic/tree.hpp"

namespace oracle {

using tdmic::ProductDistribution;
using tdmic::ReadOnceDnf;
using tdmic::Var;

// Calls fn(bits, probability) for every assignment of n variables.
inline void for_each_assignment(int n, const ProductDistribution& dist,
                                const std::function<void(const std::vector<bool>&, double)>& fn) {
    std::vector<bool> x(static_cast<std::size_t>(n));
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        double p = 1.0;
        for (int i = 0; i < n; ++i) {
            x[static_cast<std::size_t>(i)] = (mask >> i) & 1;
            const double pi = dist[i];
            p *= x[static_cast<std::size_t>(i)] ? pi : 1.0 - pi;
        }
        fn(x, p);
    }
}

// Plain evaluation of a DNF given as term lists; no use of ReadOnceDnf logic.
inline bool eval_terms(const std::vector<std::vector<Var>>& terms, const std::vector<bool>& x) {
    for (const auto& t : terms) {
        bool all = true;
        for (Var v : t) all = all && x[static_cast<std::size_t>(v)];
        if (all) return true;
    }
    return false;
}

inline double truth_table_probability(const std::vector<std::vector<Var>>& terms, int n,
                                      const ProductDistribution& dist) {
    double s = 0.0;
    for_each_assignment(n, dist, [&](const std::vector<bool>& x, double p) {
        if (eval_terms(terms, x)) s += p;
    });
    return s;
}

// Probability that the tree's prediction differs from the target.
inline double disagreement(const tdmic::DecisionTree& tree, const std::vector<std::vector<Var>>& terms, int n,
                           const ProductDistribution& dist) {
    double s = 0.0;
    for_each_assignment(n, dist, [&](const std::vector<bool>& x, double p) {
        if (tree.predict(x) != eval_terms(terms, x)) s += p;
    });
    return s;
}

// Minimum error over every decision tree with at most `budget` internal nodes
// whose features come from `vars`, by direct recursion over the truth table.
class TreeEnumerator {
public:
    TreeEnumerator(std::vector<std::vector<Var>> terms, int n, ProductDistribution dist, std::vector<Var> vars)
        : terms_(std::move(terms)), n_(n), dist_(std::move(dist)), vars_(std::move(vars)) {
        for_each_assignment(n_, dist_, [&](const std::vector<bool>& x, double p) {
            rows_.push_back({x, p, eval_terms(terms_, x)});
        });
    }

    double best(int budget) {
        std::vector<int> fixed(static_cast<std::size_t>(n_), -1);
        return search(fixed, budget);
    }

private:
    struct Row {
        std::vector<bool> x;
        double p;
        bool y;
    };

    double leaf_error(const std::vector<int>& fixed) const {
        double pos = 0.0, tot = 0.0;
        for (const auto& r : rows_) {
            bool ok = true;
            for (int i = 0; i < n_ && ok; ++i)
                if (fixed[static_cast<std::size_t>(i)] >= 0 && r.x[static_cast<std::size_t>(i)] != (fixed[static_cast<std::size_t>(i)] == 1))
                    ok = false;
            if (!ok) continue;
            tot += r.p;
            if (r.y) pos += r.p;
        }
        return std::min(pos, tot - pos);
    }

    double search(std::vector<int>& fixed, int budget) const {
        double best = leaf_error(fixed);
        if (budget == 0 || best == 0.0) return best;
        for (Var v : vars_) {
            auto& slot = fixed[static_cast<std::size_t>(v)];
            if (slot >= 0) continue;
            for (int j = 0; j < budget; ++j) {
                slot = 0;
                const double lo = search(fixed, j);
                slot = 1;
                const double hi = search(fixed, budget - 1 - j);
                slot = -1;
                best = std::min(best, lo + hi);
            }
        }
        return best;
    }

    std::vector<std::vector<Var>> terms_;
    int n_;
    ProductDistribution dist_;
    std::vector<Var> vars_;
    std::vector<Row> rows_;
};

// Closed-form OPT for a single conjunction J with marginals p:
// min over |I| = t of prod(p_I) * C(prod(p_{J \ I})), and 0 once t >= |J|.
inline double conjunction_opt(const std::vector<double>& p, int t) {
    const int k = static_cast<int>(p.size());
    if (t >= k) return 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
        if (__builtin_popcount(mask) != t) continue;
        double in = 1.0, out = 1.0;
        for (int i = 0; i < k; ++i) ((mask >> i) & 1 ? in : out) *= p[static_cast<std::size_t>(i)];
        best = std::min(best, in * std::min(out, 1.0 - out));
    }
    return best;
}

}  // namespace oracle
