#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "oracles.hpp"
#include "tdmic/greedy.hpp"
#include "tdmic/mic.hpp"
#include "tdmic/optimal.hpp"

using namespace tdmic;

namespace {

std::vector<std::vector<Var>> raw_terms(const ReadOnceDnf& f) {
    std::vector<std::vector<Var>> out;
    for (const auto& t : f.terms()) out.push_back(t.vars());
    return out;
}

double enumerated_opt(const ReadOnceDnf& f, const ProductDistribution& d, int t) {
    const int n = static_cast<int>(d.size());
    return oracle::TreeEnumerator(raw_terms(f), n, d, f.variables()).best(t);
}

}  // namespace

TEST(Signature, Canonical) {
    EXPECT_EQ(UniformSignature({3, 1, 2}).term_sizes, (std::vector<int>{1, 2, 3}));
    EXPECT_THROW(UniformSignature({0}), std::invalid_argument);
    EXPECT_EQ(to_string(UniformSignature({3, 2})), "2-3");
    EXPECT_EQ(to_string(UniformSignature()), "empty");
    TwoClassSignature s({{0, 2}, {1, 0}}, 0.3, 0.7);
    EXPECT_EQ(to_string(s), "0:2-1:0");
    EXPECT_THROW(TwoClassSignature({{0, 0}}, 0.3, 0.7), std::invalid_argument);
    EXPECT_THROW(TwoClassSignature({{1, 0}}, 0.0, 0.7), std::invalid_argument);
    EXPECT_EQ(s.collapsed().term_sizes, (std::vector<int>{1, 2}));
}

TEST(OptUniform, Examples) {
    EXPECT_EQ(opt_uniform(UniformSignature({1}), 1), 0.0);
    for (int s = 1; s <= 8; ++s) EXPECT_EQ(opt_uniform(UniformSignature({s}), 0), std::ldexp(1.0, -s));
    EXPECT_NEAR(opt_uniform(UniformSignature({2, 3}), 5), 1.0 / 32, 1e-15);
    EXPECT_NEAR(opt_uniform(UniformSignature({2, 3}), 8), 0.0, 1e-15);
    EXPECT_GT(opt_uniform(UniformSignature({2, 3}), 7), 0.0);
    EXPECT_EQ(opt_uniform(UniformSignature(), 3), 0.0);
    EXPECT_THROW(opt_uniform(UniformSignature({1}), -1), std::invalid_argument);
}

TEST(OptUniform, ConjunctionClosedForm) {
    for (int k = 1; k <= 8; ++k)
        for (int t = 0; t <= k + 1; ++t)
            EXPECT_NEAR(opt_uniform(UniformSignature({k}), t),
                        oracle::conjunction_opt(std::vector<double>(static_cast<std::size_t>(k), 0.5), t), 1e-15);
}

TEST(OptTwoClass, Examples) {
    EXPECT_NEAR(opt_two_class(TwoClassSignature({{1, 0}}, 0.3, 0.7), 0), 0.3, 1e-15);
    for (double p1 : {0.2, 0.3, 0.6}) EXPECT_EQ(opt_two_class(TwoClassSignature({{1, 0}}, p1, 0.7), 1), 0.0);
    EXPECT_NEAR(opt_two_class(TwoClassSignature({{0, 1}}, 0.3, 0.7), 0), 0.3, 1e-15);
}

TEST(OptTwoClass, HalfEqualsUniform) {
    auto table = make_two_class_table(0.5, 0.5);
    UniformOptTable u;
    for (const auto& sig : enumerate_two_class_family(3, 3, 0.5, 0.5))
        for (int t = 0; t <= 10; ++t)
            ASSERT_EQ(opt_two_class(table, sig, t), opt_uniform(u, sig.collapsed(), t)) << to_string(sig) << " " << t;
}

TEST(BruteForce, Examples) {
    auto r = brute_force_opt(ReadOnceDnf::from_terms({{0}}), ProductDistribution::uniform(1), 1);
    EXPECT_EQ(r.error, 0.0);
    EXPECT_EQ(r.witness.root()->feature, 0);

    auto fig = brute_force_opt(ReadOnceDnf::from_terms({{0, 1}, {2, 3, 4}}), ProductDistribution::uniform(5), 5);
    EXPECT_NEAR(fig.error, 1.0 / 32, 1e-15);
    EXPECT_NEAR(fig.witness.error(), fig.error, 1e-15);
    EXPECT_LE(fig.witness.internal_count(), 5);

    auto conj = brute_force_opt(ReadOnceDnf::from_terms({{0, 1}}), ProductDistribution({0.3, 0.5}), 1);
    EXPECT_NEAR(conj.error, 0.15, 1e-15);
    EXPECT_EQ(conj.witness.root()->feature, 0);
}

TEST(BruteForce, Guards) {
    EXPECT_THROW(brute_force_opt(ReadOnceDnf::from_terms({{0, 1, 2, 3, 4}, {5, 6, 7, 8}}),
                                 ProductDistribution::uniform(9), 2),
                 std::length_error);
    EXPECT_THROW(brute_force_opt(ReadOnceDnf::from_terms({{0}}), ProductDistribution::uniform(1), 6),
                 std::length_error);
}

// The search prunes to one variable per (term, probability) class; check it
// against unrestricted enumeration of all trees over the truth table.
TEST(BruteForce, MatchesFullTreeEnumeration) {
    Rng rng(41);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 5);
        const auto f = ReadOnceDnf::from_terms(gen::read_once_terms(rng, n));
        ProductDistribution d = ProductDistribution::uniform(static_cast<std::size_t>(n));
        if (trial % 3 == 1) d = gen::probs(rng, n);
        if (trial % 3 == 2) {
            std::vector<int> cls(static_cast<std::size_t>(n));
            for (auto& c : cls) c = static_cast<int>(rng() % 2);
            d = ProductDistribution::two_class(0.3, 0.7, cls);
        }
        for (int t = 0; t <= 3; ++t) {
            const auto r = brute_force_opt(f, d, t);
            ASSERT_NEAR(r.error, enumerated_opt(f, d, t), 1e-12) << f.to_string() << " t=" << t;
            ASSERT_NEAR(r.witness.error(), r.error, 1e-12);
            ASSERT_LE(r.witness.internal_count(), t);
        }
    }
}

TEST(DpVsOracle, Uniform) {
    UniformOptTable table;
    for (const auto& sig : enumerate_uniform_family(3, 6)) {
        if (sig.literal_count() > 6) continue;
        const auto f = realize(sig);
        const auto d = realize_distribution(sig);
        for (int t = 0; t <= 4; ++t)
            ASSERT_NEAR(opt_uniform(table, sig, t), brute_force_opt(f, d, t).error, 1e-12) << to_string(sig) << t;
    }
}

TEST(DpVsOracle, TwoClass) {
    for (auto [p1, p2] : {std::pair{0.3, 0.7}, std::pair{0.4, 0.6}}) {
        auto table = make_two_class_table(p1, p2);
        for (const auto& sig : enumerate_two_class_family(2, 4, p1, p2)) {
            if (sig.literal_count() > 4) continue;
            const auto f = realize(sig);
            const auto d = realize_distribution(sig);
            for (int t = 0; t <= 4; ++t)
                ASSERT_NEAR(opt_two_class(table, sig, t), brute_force_opt(f, d, t).error, 1e-12)
                    << to_string(sig) << " t=" << t;
        }
    }
}

TEST(ExactTable, MatchesOracles) {
    Rng rng(42);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 5);
        const auto f = ReadOnceDnf::from_terms(gen::read_once_terms(rng, n));
        const auto d = gen::probs(rng, n);
        ExactOptTable table(d);
        for (int t = 0; t <= 3; ++t) ASSERT_NEAR(table.opt(f, t), enumerated_opt(f, d, t), 1e-12);
    }
    for (int trial = 0; trial < 40; ++trial) {
        const int k = 1 + static_cast<int>(rng() % 6);
        const auto d = gen::probs(rng, k);
        std::vector<Var> vars;
        for (Var v = 0; v < k; ++v) vars.push_back(v);
        ExactOptTable table(d);
        for (int t = 0; t <= k; ++t)
            ASSERT_NEAR(table.opt(ReadOnceDnf::from_terms(std::vector<std::vector<Var>>{vars}), t),
                        oracle::conjunction_opt(d.probs(), t), 1e-12);
    }
}

TEST(Properties, MonotoneBoundedAndDominated) {
    UniformOptTable table;
    for (const auto& sig : enumerate_uniform_family(3, 4)) {
        const auto series = table.opt_series(sig.term_sizes, 20);
        const auto f = realize(sig);
        const auto d = realize_distribution(sig);
        const auto td = run_topdown(f, d, 20).trace;
        const auto bf = run_bestfirst(f, d, 20).trace;
        for (int t = 0; t <= 20; ++t) {
            const double v = series[static_cast<std::size_t>(t)];
            ASSERT_GE(v, 0.0);
            ASSERT_LE(v, 0.5);
            if (t) {
                ASSERT_LE(v, series[static_cast<std::size_t>(t - 1)] + 1e-15);
            }
            ASSERT_LE(v, td.error_at(t) + 1e-12);
            ASSERT_LE(v, bf.error_at(t) + 1e-12);
        }
    }
}

TEST(StructuralEqual, Examples) {
    const auto b5 = build_bt(2, 3, 5);
    EXPECT_TRUE(structural_equal(b5, b5));
    auto renamed = single_leaf_tree(two_term_target(2, 3), ProductDistribution::uniform(5));
    renamed = renamed.split(0, 0);
    renamed = renamed.split(renamed.leaf_at({true}), 1);
    renamed = renamed.split(renamed.leaf_at({false}), 3);
    renamed = renamed.split(renamed.leaf_at({false, true}), 2);
    renamed = renamed.split(renamed.leaf_at({false, true, true}), 4);
    EXPECT_TRUE(structural_equal(b5, renamed));
    const auto fig2a = run_bestfirst(two_term_target(2, 3), ProductDistribution::uniform(5), 5).tree;
    EXPECT_FALSE(structural_equal(b5, fig2a));
    auto swapped = single_leaf_tree(two_term_target(2, 3), ProductDistribution::uniform(5)).split(0, 2);
    EXPECT_FALSE(structural_equal(build_bt(2, 3, 1), swapped));
}
