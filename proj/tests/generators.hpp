#pragma once

// Random inputs for property tests.

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "tdmic/dnf.hpp"
#include "tdmic/sample.hpp"
#include "tdmic/tree.hpp"

namespace gen {

using tdmic::Rng;
using tdmic::Var;

// Disjoint terms over a random subset of 0..n-1; at least one term.
inline std::vector<std::vector<Var>> read_once_terms(Rng& rng, int n) {
    std::vector<Var> vars(static_cast<std::size_t>(n));
    std::iota(vars.begin(), vars.end(), 0);
    std::shuffle(vars.begin(), vars.end(), rng);
    const int used = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(n));
    std::vector<std::vector<Var>> terms;
    int i = 0;
    while (i < used) {
        const int size = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(std::min(4, used - i)));
        terms.emplace_back(vars.begin() + i, vars.begin() + i + size);
        i += size;
    }
    return terms;
}

inline tdmic::ProductDistribution probs(Rng& rng, int n, double lo = 0.05, double hi = 0.95) {
    std::vector<double> p(static_cast<std::size_t>(n));
    for (auto& x : p) x = lo + (hi - lo) * tdmic::unit_draw(rng);
    return tdmic::ProductDistribution(std::move(p));
}

// A tree grown by `splits` random splits on random leaves and features.
inline tdmic::DecisionTree random_tree(Rng& rng, const tdmic::ReadOnceDnf& f, const tdmic::ProductDistribution& d,
                                       int n, int splits) {
    auto tree = tdmic::single_leaf_tree(f, d);
    for (int s = 0; s < splits; ++s) {
        const auto& leaves = tree.leaves();
        const auto& leaf = *leaves[rng() % leaves.size()];
        std::vector<Var> free;
        for (Var v = 0; v < n; ++v)
            if (!leaf.uses(v)) free.push_back(v);
        if (free.empty()) continue;
        tree = tree.split(leaf, free[rng() % free.size()]);
    }
    return tree;
}

}  // namespace gen
