#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "tdmic/greedy.hpp"
#include "tdmic/sample.hpp"

using namespace tdmic;

namespace {

const ReadOnceDnf kFig = ReadOnceDnf::from_terms({{0, 1}, {2, 3, 4}});

// Every assignment of n variables exactly once.
Dataset truth_table(const ReadOnceDnf& f, int n) {
    Dataset d;
    d.n = static_cast<std::size_t>(n);
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        std::vector<bool> x(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            x[static_cast<std::size_t>(i)] = (mask >> i) & 1;
            d.bits.push_back(x[static_cast<std::size_t>(i)]);
        }
        d.labels.push_back(f.evaluate(x));
    }
    return d;
}

bool min_leaf_respected(const EmpiricalTree& t, std::size_t min_leaf) {
    for (const auto& n : t.nodes)
        if (!n.is_leaf() && n.support < min_leaf) return false;
    return true;
}

}  // namespace

TEST(Rng, UnitDrawRangeAndSeeds) {
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        const double u = unit_draw(rng);
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
    EXPECT_EQ(derive_seed(1, 2, 3), derive_seed(1, 2, 3));
    EXPECT_NE(derive_seed(1, 2, 3), derive_seed(1, 3, 2));
}

TEST(SampleDataset, Examples) {
    const auto u = ProductDistribution::uniform(5);
    EXPECT_THROW(sample_dataset(kFig, u, 0, 1), std::invalid_argument);
    const auto one = sample_dataset(kFig, u, 1, 1);
    EXPECT_EQ(one.rows(), 1u);
    EXPECT_EQ(one.labels[0], kFig.evaluate(one.row(0)));

    const auto big = sample_dataset(kFig, u, 50000, 7);
    std::size_t pos = 0;
    std::vector<std::size_t> ones(5, 0);
    for (std::size_t r = 0; r < big.rows(); ++r) {
        pos += big.labels[r];
        for (std::size_t i = 0; i < 5; ++i) ones[i] += big.row(r)[i];
        ASSERT_EQ(big.labels[r] != 0, kFig.evaluate(big.row(r)));
    }
    for (auto c : ones) EXPECT_NEAR(static_cast<double>(c) / 50000, 0.5, 0.02);
    EXPECT_NEAR(static_cast<double>(pos) / 50000, 11.0 / 32, 0.02);

    const auto again = sample_dataset(kFig, u, 50000, 7);
    EXPECT_EQ(big.bits, again.bits);
    EXPECT_EQ(big.labels, again.labels);
    EXPECT_THROW(sample_dataset(kFig, ProductDistribution::uniform(3), 5, 1), std::out_of_range);
}

TEST(SampleDataset, RespectsMarginals) {
    const auto d = ProductDistribution({0.1, 0.8});
    const auto s = sample_dataset(ReadOnceDnf::from_terms({{0, 1}}), d, 40000, 3);
    double c0 = 0, c1 = 0;
    for (std::size_t r = 0; r < s.rows(); ++r) {
        c0 += s.row(r)[0];
        c1 += s.row(r)[1];
    }
    EXPECT_NEAR(c0 / 40000, 0.1, 0.01);
    EXPECT_NEAR(c1 / 40000, 0.8, 0.01);
}

TEST(RunEmpirical, MinLeafAboveSampleSize) {
    const auto data = sample_dataset(kFig, ProductDistribution::uniform(5), 30, 2);
    const auto t = run_empirical(Policy::TopDown, data, 20, 31);
    EXPECT_EQ(t.internal_count, 0);
    std::size_t pos = 0;
    for (auto y : data.labels) pos += y;
    EXPECT_EQ(t.nodes[0].label, 2 * pos >= data.rows());
}

TEST(RunEmpirical, TruthTableMatchesExact) {
    const std::vector<ReadOnceDnf> targets{kFig, ReadOnceDnf::from_terms({{0, 1, 2}}),
                                           ReadOnceDnf::from_terms({{0}, {1, 2}, {3, 4, 5}})};
    for (const auto& f : targets) {
        const int n = static_cast<int>(f.span());
        const auto data = truth_table(f, n);
        for (auto p : {Policy::TopDown, Policy::BestFirst}) {
            for (int iters : {1, 3, 5, 8, 30}) {
                const auto e = run_empirical(p, data, iters, 1);
                const auto x = grow(p, f, ProductDistribution::uniform(static_cast<std::size_t>(n)), iters);
                ASSERT_TRUE(same_structure(e, x.tree)) << f.to_string() << " " << policy_name(p) << " " << iters;
                ASSERT_NEAR(evaluate(e, data), x.tree.error(), 1e-12);
            }
        }
    }
}

TEST(RunEmpirical, ConjunctionLowTestError) {
    const auto f = ReadOnceDnf::from_terms({{0, 1}});
    const auto u = ProductDistribution::uniform(2);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto train = sample_dataset(f, u, 50000, seed);
        const auto test = sample_dataset(f, u, 10000, seed + 100);
        const auto t = run_empirical(Policy::TopDown, train, 2, 20);
        EXPECT_LE(evaluate(t, test), 0.01);
        EXPECT_TRUE(min_leaf_respected(t, 20));
    }
}

TEST(RunEmpirical, MinLeafRule) {
    const auto cfg = ExperimentConfig{};
    const auto f = cfg.target();
    const auto d = cfg.distribution(5);
    const auto data = sample_dataset(f, d, 300, 5);
    for (auto p : {Policy::TopDown, Policy::BestFirst}) {
        const auto t = run_empirical(p, data, 20, 20);
        EXPECT_TRUE(min_leaf_respected(t, 20));
        EXPECT_LE(t.internal_count, 20);
        for (const auto& n : t.nodes)
            if (!n.is_leaf()) {
                EXPECT_GE(t.nodes[static_cast<std::size_t>(n.left)].support, 1u);
                EXPECT_GE(t.nodes[static_cast<std::size_t>(n.right)].support, 1u);
            }
    }
    EXPECT_THROW(run_empirical(Policy::TopDown, Dataset{}, 1, 1), std::invalid_argument);
    EXPECT_THROW(run_empirical(Policy::TopDown, data, 1, 0), std::invalid_argument);
}

// Marginals chosen so no two splits tie under the exact distribution.
TEST(RunEmpirical, ConvergesToExactTree) {
    const auto f = ReadOnceDnf::from_terms({{0, 1}, {2, 3, 4}});
    const auto d = ProductDistribution({0.45, 0.62, 0.71, 0.83, 0.56});
    const auto exact = run_topdown(f, d, 4).tree;
    int matches = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto data = sample_dataset(f, d, 50000, seed);
        matches += same_structure(run_empirical(Policy::TopDown, data, 4, 20), exact);
    }
    EXPECT_GE(matches, 8);
}

TEST(Evaluate, Examples) {
    EmpiricalTree zero;
    zero.nodes.push_back({});
    Dataset allzero;
    allzero.n = 2;
    allzero.bits = {0, 1, 1, 0};
    allzero.labels = {0, 0};
    EXPECT_EQ(evaluate(zero, allzero), 0.0);
    EXPECT_THROW(evaluate(zero, Dataset{}), std::invalid_argument);

    const auto u = ProductDistribution::uniform(5);
    const auto test = sample_dataset(kFig, u, 10000, 9);
    const auto leaf = single_leaf_tree(kFig, u);
    EXPECT_NEAR(evaluate(leaf, test), 11.0 / 32, 0.02);
    const auto t3 = run_bestfirst(kFig, u, 3).tree;
    EXPECT_NEAR(evaluate(t3, test), t3.error(), 0.02);
}

TEST(ExactError, MatchesEnumeration) {
    const auto u = ProductDistribution::uniform(5);
    const auto data = sample_dataset(kFig, u, 2000, 4);
    const auto t = run_empirical(Policy::BestFirst, data, 4, 20);
    double s = 0.0;
    oracle::for_each_assignment(5, u, [&](const std::vector<bool>& x, double p) {
        if (t.predict(x) != oracle::eval_terms({{0, 1}, {2, 3, 4}}, x)) s += p;
    });
    EXPECT_NEAR(exact_error(t, kFig, u), s, 1e-12);
}

TEST(Experiment, ConfigValidation) {
    ExperimentConfig c;
    EXPECT_NO_THROW(c.validate());
    c.n = 37;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = {};
    c.min_leaf = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = {};
    c.repeats = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = {};
    c.two_class = true;
    c.p1 = 1.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    EXPECT_EQ(ExperimentConfig{}.target().literal_count(), 38u);
}

TEST(Experiment, ShapeAndDeterminism) {
    ExperimentConfig c;
    c.train_sizes = {200};
    c.repeats = 1;
    c.test_size = 500;
    const auto a = run_experiment(c, 1);
    ASSERT_EQ(a.rows.size(), 2u);
    EXPECT_EQ(a.rows[0].policy, Policy::TopDown);
    EXPECT_EQ(a.rows[1].policy, Policy::BestFirst);
    EXPECT_EQ(a.rows[0].seed, a.rows[1].seed);
    c.train_sizes = {100, 300};
    c.repeats = 3;
    const auto b1 = run_experiment(c, 1);
    const auto b3 = run_experiment(c, 3);
    ASSERT_EQ(b1.rows.size(), 12u);
    for (std::size_t i = 0; i < b1.rows.size(); ++i) {
        EXPECT_EQ(b1.rows[i].test_error, b3.rows[i].test_error);
        EXPECT_EQ(b1.rows[i].seed, b3.rows[i].seed);
        EXPECT_EQ(b1.rows[i].tree_internal_nodes, b3.rows[i].tree_internal_nodes);
    }
    EXPECT_EQ(b1.cells.size(), 4u);
    EXPECT_NO_THROW(b1.cell(Policy::BestFirst, 300));
    EXPECT_THROW(b1.cell(Policy::Id3, 300), std::out_of_range);
}

TEST(Experiment, TwoClassShape) {
    ExperimentConfig c;
    c.two_class = true;
    c.p1 = 0.4;
    c.p2 = 0.6;
    c.repeats = 1;
    c.test_size = 200;
    c.train_sizes = {50, 100, 1000, 2000, 3000, 4000, 10000, 20000, 50000};
    const auto r = run_experiment(c, 1);
    EXPECT_EQ(r.rows.size(), 18u);
    for (const auto& row : r.rows) {
        ASSERT_EQ(row.classes.size(), 38u);
        int ones = 0;
        for (int k : row.classes) ones += k;
        EXPECT_EQ(ones, 19);
    }
}
