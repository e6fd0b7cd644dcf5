#pragma once

// Executable checks of the exact-growth guarantees: TopDown is optimal on
// conjunctions under any product distribution, and on two-term formulas under
// the uniform distribution it builds B_t.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "tdmic/dnf.hpp"
#include "tdmic/greedy.hpp"
#include "tdmic/optimal.hpp"
#include "tdmic/sample.hpp"
#include "tdmic/tree.hpp"

namespace tdmic {

struct VerifyOptions {
    int distributions = 200;  // random product distributions in the conjunction suite
    int n = 10;
    int max_k = 6;
    int max_term_size = 5;  // two-term suite covers 1 <= l <= m <= this
    double p_lo = 0.05;
    double p_hi = 0.95;
    std::uint64_t seed = 1;
    bool conjunctions = true;
    bool two_term = true;
    GrowOptions grow;
};

struct VerifyFailure {
    std::string name;
    std::string detail;
};

struct VerifyReport {
    int cases = 0;
    double max_abs_epsilon = 0.0;
    std::vector<VerifyFailure> failures;

    bool ok() const { return failures.empty(); }
};

/// A random product distribution with marginals in (lo, hi).
inline ProductDistribution random_distribution(Rng& rng, int n, double lo, double hi) {
    std::vector<double> p(static_cast<std::size_t>(n));
    for (auto& x : p) x = lo + (hi - lo) * unit_draw(rng);
    return ProductDistribution(std::move(p));
}

/// k distinct variables out of 0..n-1, sorted.
inline std::vector<Var> random_subset(Rng& rng, int n, int k) {
    std::vector<Var> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    for (int i = 0; i < k; ++i) {
        auto j = static_cast<std::size_t>(i) + static_cast<std::size_t>(rng() % static_cast<std::uint64_t>(n - i));
        std::swap(all[static_cast<std::size_t>(i)], all[j]);
    }
    all.resize(static_cast<std::size_t>(k));
    std::sort(all.begin(), all.end());
    return all;
}

inline void verify_conjunctions(const VerifyOptions& o, VerifyReport& rep) {
    Rng rng(derive_seed(o.seed, 0xC0, 0));
    for (int d = 0; d < o.distributions; ++d) {
        const ProductDistribution dist = random_distribution(rng, o.n, o.p_lo, o.p_hi);
        ExactOptTable table(dist);
        for (int k = 1; k <= o.max_k; ++k) {
            const ReadOnceDnf f = ReadOnceDnf::from_terms(std::vector<std::vector<Var>>{random_subset(rng, o.n, k)});
            const auto opt = table.opt_series(f, k);
            const auto run = grow(Policy::TopDown, f, dist, k, o.grow);
            ++rep.cases;
            for (int t = 1; t <= k; ++t) {
                const double eps = run.trace.error_at(t) - opt[static_cast<std::size_t>(t)];
                rep.max_abs_epsilon = std::max(rep.max_abs_epsilon, std::abs(eps));
                if (std::abs(eps) > kTolerance) {
                    rep.failures.push_back({"conjunction dist=" + std::to_string(d) + " k=" + std::to_string(k) +
                                                " t=" + std::to_string(t),
                                            "f=" + f.to_string() + " eps=" + std::to_string(eps)});
                    break;
                }
            }
        }
    }
}

inline void verify_two_term(const VerifyOptions& o, VerifyReport& rep) {
    UniformOptTable table;
    for (int m = 1; m <= o.max_term_size; ++m)
        for (int l = 1; l <= m; ++l) {
            const ReadOnceDnf f = two_term_target(l, m);
            const auto dist = ProductDistribution::uniform(static_cast<std::size_t>(l + m));
            const UniformSignature sig({l, m});
            const int t_max = l + l * m;
            const auto run = grow(Policy::TopDown, f, dist, t_max, o.grow);
            ++rep.cases;
            const std::string name = "two-term l=" + std::to_string(l) + " m=" + std::to_string(m);
            // Replaying the recorded splits gives the tree after every prefix.
            DecisionTree tree = single_leaf_tree(f, dist);
            for (int t = 1; t <= t_max; ++t) {
                if (t <= run.trace.terminal_t) {
                    const auto& s = run.trace.snapshots[static_cast<std::size_t>(t)];
                    tree = tree.split(s.leaf_order, s.feature);
                }
                const double eps = tree.error() - opt_uniform(table, sig, t);
                rep.max_abs_epsilon = std::max(rep.max_abs_epsilon, std::abs(eps));
                if (std::abs(eps) > kTolerance) {
                    rep.failures.push_back({name + " t=" + std::to_string(t), "eps=" + std::to_string(eps)});
                    break;
                }
                if (!structural_equal(tree, build_bt(l, m, t))) {
                    rep.failures.push_back({name + " t=" + std::to_string(t), "tree differs from B_t"});
                    break;
                }
            }
        }
}

inline VerifyReport verify_theory(const VerifyOptions& o = {}) {
    if (o.max_k > o.n || o.max_k < 1 || o.n < 1) throw std::invalid_argument("verify: need 1 <= max_k <= n");
    if (o.max_term_size < 1) throw std::invalid_argument("verify: max_term_size must be >= 1");
    VerifyReport rep;
    if (o.conjunctions) verify_conjunctions(o, rep);
    if (o.two_term) verify_two_term(o, rep);
    return rep;
}

}  // namespace tdmic
