#pragma once

// Finite-sample mode: sampled datasets, greedy growth from plug-in counts, and
// the train-size sweep experiment.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tdmic/dnf.hpp"
#include "tdmic/greedy.hpp"
#include "tdmic/mic.hpp"
#include "tdmic/tree.hpp"

namespace tdmic {

/// Generator used for every sampled quantity; recorded in run manifests.
using Rng = std::mt19937_64;
inline constexpr const char* kRngName = "mt19937_64";

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double unit_draw(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Derive a 64-bit seed from a base seed and cell coordinates.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                      static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

struct Dataset {
    std::size_t n = 0;                // columns
    std::vector<std::uint8_t> bits;   // row-major, rows() * n
    std::vector<std::uint8_t> labels;
    std::uint64_t seed = 0;

    std::size_t rows() const { return labels.size(); }
    std::span<const std::uint8_t> row(std::size_t i) const { return {bits.data() + i * n, n}; }
};

/// i.i.d. rows from dist labeled by target.
inline Dataset sample_dataset(const ReadOnceDnf& target, const ProductDistribution& dist, std::size_t rows,
                              std::uint64_t seed) {
    if (rows < 1) throw std::invalid_argument("sample_dataset: rows must be >= 1");
    if (!dist.covers(target)) throw std::out_of_range("sample_dataset: distribution does not cover target");
    Dataset d;
    d.n = dist.size();
    d.seed = seed;
    d.bits.resize(rows * d.n);
    d.labels.resize(rows);
    Rng rng(seed);
    for (std::size_t r = 0; r < rows; ++r) {
        std::uint8_t* x = d.bits.data() + r * d.n;
        for (std::size_t i = 0; i < d.n; ++i) x[i] = unit_draw(rng) < dist.probs()[i] ? 1 : 0;
        d.labels[r] = target.evaluate(std::span<const std::uint8_t>(x, d.n)) ? 1 : 0;
    }
    return d;
}

/// Tree learned from data; leaves carry training counts.
struct EmpiricalTree {
    struct Node {
        Var feature = -1;  // -1 for leaves
        int left = -1;
        int right = -1;
        bool label = false;
        std::size_t support = 0;
        std::size_t positives = 0;
        bool is_leaf() const { return feature < 0; }
    };
    std::vector<Node> nodes;  // nodes[0] is the root
    int internal_count = 0;

    template <class Bits>
    bool predict(const Bits& x) const {
        int i = 0;
        while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
            const Node& n = nodes[static_cast<std::size_t>(i)];
            i = x[static_cast<std::size_t>(n.feature)] ? n.right : n.left;
        }
        return nodes[static_cast<std::size_t>(i)].label;
    }
};

namespace detail {

struct EmpiricalLeaf {
    int node;
    std::vector<std::uint32_t> rows;
    std::vector<std::uint8_t> used;  // per feature
    std::size_t positives = 0;
    std::optional<Candidate> best;
};

inline std::optional<Candidate> best_empirical_split(const Dataset& data, const EmpiricalLeaf& leaf, int order,
                                                     Policy policy, std::size_t min_leaf) {
    const std::size_t m = leaf.rows.size();
    if (m < min_leaf || leaf.positives == 0 || leaf.positives == m) return std::nullopt;
    std::vector<std::size_t> ones(data.n, 0), pos_ones(data.n, 0);
    for (std::uint32_t r : leaf.rows) {
        auto x = data.row(r);
        const bool y = data.labels[r] != 0;
        for (std::size_t f = 0; f < data.n; ++f) {
            ones[f] += x[f];
            if (y) pos_ones[f] += x[f];
        }
    }
    const double q = static_cast<double>(leaf.positives) / static_cast<double>(m);
    const double weight = policy == Policy::TopDown ? static_cast<double>(m) / static_cast<double>(data.rows()) : 1.0;
    std::optional<Candidate> best;
    for (std::size_t f = 0; f < data.n; ++f) {
        if (leaf.used[f]) continue;
        const std::size_t n1 = ones[f], n0 = m - n1;
        if (n0 == 0 || n1 == 0) continue;
        const double tau = static_cast<double>(n1) / static_cast<double>(m);
        const double q1 = static_cast<double>(pos_ones[f]) / static_cast<double>(n1);
        const double q0 = static_cast<double>(leaf.positives - pos_ones[f]) / static_cast<double>(n0);
        const double g = weight * entropy_gain(q, q0, q1, tau);
        if (!best || g > best->score + kTolerance) best = Candidate{order, static_cast<Var>(f), g};
    }
    return best;
}

}  // namespace detail

/// Greedy growth with p(l), q(l) and tau replaced by training-set frequencies.
/// A leaf reached by fewer than min_leaf rows is never split, and a split
/// must leave at least one row on each side.
inline EmpiricalTree run_empirical(Policy policy, const Dataset& data, int max_iters, std::size_t min_leaf) {
    if (data.rows() == 0) throw std::invalid_argument("run_empirical: empty dataset");
    if (min_leaf < 1) throw std::invalid_argument("run_empirical: min_leaf must be >= 1");
    EmpiricalTree tree;
    std::vector<detail::EmpiricalLeaf> leaves;  // creation order == index
    std::vector<std::uint8_t> open;             // still a leaf

    auto make_leaf = [&](std::vector<std::uint32_t> rows, std::vector<std::uint8_t> used) {
        detail::EmpiricalLeaf l;
        l.node = static_cast<int>(tree.nodes.size());
        l.rows = std::move(rows);
        l.used = std::move(used);
        for (auto r : l.rows) l.positives += data.labels[r];
        EmpiricalTree::Node n;
        n.support = l.rows.size();
        n.positives = l.positives;
        n.label = 2 * l.positives >= l.rows.size();
        tree.nodes.push_back(n);
        const int order = static_cast<int>(leaves.size());
        l.best = detail::best_empirical_split(data, l, order, policy, min_leaf);
        leaves.push_back(std::move(l));
        open.push_back(1);
    };

    std::vector<std::uint32_t> all(data.rows());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<std::uint32_t>(i);
    make_leaf(std::move(all), std::vector<std::uint8_t>(data.n, 0));

    for (int it = 0; it < max_iters; ++it) {
        std::optional<detail::Candidate> best;
        for (std::size_t i = 0; i < leaves.size(); ++i) {
            if (!open[i]) continue;
            const auto& c = leaves[i].best;
            if (!c || c->score <= kTolerance) continue;
            if (policy == Policy::Id3) {
                best = c;
                break;
            }
            if (!best || c->score >= best->score - kTolerance) best = c;
        }
        if (!best) break;

        const auto li = static_cast<std::size_t>(best->leaf_order);
        open[li] = 0;
        std::vector<std::uint32_t> rows0, rows1;
        for (auto r : leaves[li].rows) (data.row(r)[static_cast<std::size_t>(best->feature)] ? rows1 : rows0).push_back(r);
        std::vector<std::uint8_t> used = leaves[li].used;
        used[static_cast<std::size_t>(best->feature)] = 1;
        leaves[li].rows.clear();
        leaves[li].rows.shrink_to_fit();

        const int node = leaves[li].node;
        const int left = static_cast<int>(tree.nodes.size());
        make_leaf(std::move(rows0), used);
        make_leaf(std::move(rows1), std::move(used));
        auto& parent = tree.nodes[static_cast<std::size_t>(node)];
        parent.feature = best->feature;
        parent.left = left;
        parent.right = left + 1;
        ++tree.internal_count;
    }
    return tree;
}

/// Fraction of rows whose prediction disagrees with the label.
inline double evaluate(const EmpiricalTree& tree, const Dataset& test) {
    if (test.rows() == 0) throw std::invalid_argument("evaluate: empty test set");
    std::size_t wrong = 0;
    for (std::size_t r = 0; r < test.rows(); ++r)
        if (tree.predict(test.row(r)) != (test.labels[r] != 0)) ++wrong;
    return static_cast<double>(wrong) / static_cast<double>(test.rows());
}

inline double evaluate(const DecisionTree& tree, const Dataset& test) {
    if (test.rows() == 0) throw std::invalid_argument("evaluate: empty test set");
    std::size_t wrong = 0;
    for (std::size_t r = 0; r < test.rows(); ++r)
        if (tree.predict(test.row(r)) != (test.labels[r] != 0)) ++wrong;
    return static_cast<double>(wrong) / static_cast<double>(test.rows());
}

/// Exact misclassification probability of a learned tree (with its own leaf
/// labels) when the generating target and distribution are known.
inline double exact_error(const EmpiricalTree& tree, const ReadOnceDnf& target, const ProductDistribution& dist) {
    double err = 0.0;
    auto walk = [&](auto&& self, int i, const ReadOnceDnf& f, double reach) -> void {
        const auto& n = tree.nodes[static_cast<std::size_t>(i)];
        if (n.is_leaf()) {
            const double q = satisfy_probability(f, dist);
            err += reach * (n.label ? 1.0 - q : q);
            return;
        }
        const double p = dist[n.feature];
        self(self, n.left, f.condition(n.feature, false), reach * (1.0 - p));
        self(self, n.right, f.condition(n.feature, true), reach * p);
    };
    walk(walk, 0, target, 1.0);
    return err;
}

/// Same split features at the same positions.
inline bool same_structure(const EmpiricalTree& a, const DecisionTree& b) {
    auto eq = [&](auto&& self, int i, const DecisionTree::Node& n) -> bool {
        const auto& e = a.nodes[static_cast<std::size_t>(i)];
        if (e.is_leaf() || n.is_leaf()) return e.is_leaf() && n.is_leaf();
        return e.feature == n.feature && self(self, e.left, *n.left) && self(self, e.right, *n.right);
    };
    return eq(eq, 0, *b.root());
}

// ---------------------------------------------------------------------------
// Experiment

struct ExperimentConfig {
    std::vector<int> term_sizes{3, 3, 4, 5, 3, 4, 3, 5, 4, 4};
    int n = 38;
    std::vector<std::size_t> train_sizes{50, 100, 1000, 2000, 3000, 4000, 10000, 20000, 50000};
    std::size_t test_size = 10000;
    std::size_t min_leaf = 20;
    int max_iters = 20;
    int repeats = 10;
    bool two_class = false;
    double p1 = 0.5;
    double p2 = 0.5;
    std::uint64_t seed = 1;
    std::vector<Policy> policies{Policy::TopDown, Policy::BestFirst};

    void validate() const {
        int total = 0;
        for (int s : term_sizes) {
            if (s < 1) throw std::invalid_argument("config: term sizes must be >= 1");
            total += s;
        }
        if (term_sizes.empty()) throw std::invalid_argument("config: term_sizes is empty");
        if (total > n) throw std::invalid_argument("config: sum of term sizes exceeds n");
        if (min_leaf < 1) throw std::invalid_argument("config: min_leaf must be >= 1");
        if (repeats < 1) throw std::invalid_argument("config: repeats must be >= 1");
        if (max_iters < 0) throw std::invalid_argument("config: max_iters must be >= 0");
        if (train_sizes.empty()) throw std::invalid_argument("config: train_sizes is empty");
        for (auto s : train_sizes)
            if (s < 1) throw std::invalid_argument("config: train sizes must be >= 1");
        if (test_size < 1) throw std::invalid_argument("config: test_size must be >= 1");
        if (policies.empty()) throw std::invalid_argument("config: no policies");
        if (two_class && !(p1 > 0 && p1 < 1 && p2 > 0 && p2 < 1))
            throw std::invalid_argument("config: p1, p2 must lie in (0,1)");
    }

    /// Target over variables 0..sum(term_sizes)-1 in term order.
    ReadOnceDnf target() const {
        std::vector<std::vector<Var>> terms;
        Var next = 0;
        for (int s : term_sizes) {
            std::vector<Var> t;
            for (int i = 0; i < s; ++i) t.push_back(next++);
            terms.push_back(std::move(t));
        }
        return ReadOnceDnf::from_terms(terms);
    }

    /// Uniform, or two-class with a random half of the variables on p1.
    ProductDistribution distribution(std::uint64_t cell_seed, std::vector<int>* classes_out = nullptr) const {
        if (!two_class) return ProductDistribution::uniform(static_cast<std::size_t>(n));
        std::vector<int> classes(static_cast<std::size_t>(n), 1);
        std::fill(classes.begin(), classes.begin() + n / 2, 0);
        Rng rng(derive_seed(cell_seed, 0xC1A55, 0));
        for (std::size_t i = classes.size(); i > 1; --i)
            std::swap(classes[i - 1], classes[static_cast<std::size_t>(rng() % i)]);
        if (classes_out) *classes_out = classes;
        return ProductDistribution::two_class(p1, p2, classes);
    }
};

struct ExperimentRow {
    Policy policy;
    std::size_t train_size;
    int repeat;
    std::uint64_t seed;
    double test_error;
    double exact_error;
    int tree_internal_nodes;
    std::vector<int> classes;  // two-class variable assignment, empty if uniform
};

struct ExperimentCell {
    Policy policy;
    std::size_t train_size;
    double mean_test_error;
    double std_test_error;  // sample standard deviation
    int runs;
};

struct ExperimentResults {
    std::vector<ExperimentRow> rows;  // policy-major, then train size, then repeat
    std::vector<ExperimentCell> cells;

    const ExperimentCell& cell(Policy p, std::size_t train_size) const {
        for (const auto& c : cells)
            if (c.policy == p && c.train_size == train_size) return c;
        throw std::out_of_range("no experiment cell for that policy and train size");
    }
};

/// Every (train size, repeat) pair draws one training and one test set that
/// all policies share, so per-seed comparisons are paired.
inline ExperimentResults run_experiment(const ExperimentConfig& cfg, int workers = 1) {
    cfg.validate();
    const ReadOnceDnf target = cfg.target();
    const std::size_t n_sizes = cfg.train_sizes.size();
    const std::size_t n_pol = cfg.policies.size();
    const std::size_t reps = static_cast<std::size_t>(cfg.repeats);
    std::vector<ExperimentRow> grid(n_pol * n_sizes * reps);

    parallel_for(n_sizes * reps, workers, [&](int, std::size_t cell) {
        const std::size_t si = cell / reps;
        const int rep = static_cast<int>(cell % reps);
        const std::uint64_t seed = derive_seed(cfg.seed, cfg.train_sizes[si], static_cast<std::uint64_t>(rep));
        std::vector<int> classes;
        const ProductDistribution dist = cfg.distribution(seed, &classes);
        const Dataset train = sample_dataset(target, dist, cfg.train_sizes[si], seed);
        const Dataset test = sample_dataset(target, dist, cfg.test_size, derive_seed(seed, 0x7E57, 0));
        for (std::size_t pi = 0; pi < n_pol; ++pi) {
            EmpiricalTree tree = run_empirical(cfg.policies[pi], train, cfg.max_iters, cfg.min_leaf);
            grid[(pi * n_sizes + si) * reps + static_cast<std::size_t>(rep)] =
                ExperimentRow{cfg.policies[pi],          cfg.train_sizes[si],
                              rep,                       seed,
                              evaluate(tree, test),      exact_error(tree, target, dist),
                              tree.internal_count,       classes};
        }
    });

    ExperimentResults res;
    res.rows = std::move(grid);
    for (std::size_t pi = 0; pi < n_pol; ++pi)
        for (std::size_t si = 0; si < n_sizes; ++si) {
            double sum = 0.0, sq = 0.0;
            for (std::size_t r = 0; r < reps; ++r) sum += res.rows[(pi * n_sizes + si) * reps + r].test_error;
            const double mean = sum / static_cast<double>(reps);
            for (std::size_t r = 0; r < reps; ++r) {
                const double d = res.rows[(pi * n_sizes + si) * reps + r].test_error - mean;
                sq += d * d;
            }
            const double sd = reps > 1 ? std::sqrt(sq / static_cast<double>(reps - 1)) : 0.0;
            res.cells.push_back({cfg.policies[pi], cfg.train_sizes[si], mean, sd, cfg.repeats});
        }
    return res;
}

}  // namespace tdmic
