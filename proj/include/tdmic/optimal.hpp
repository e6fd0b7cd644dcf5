#pragma once

// Exact minimal tree error OPT(F, t) over all trees with at most t internal
// nodes, for read-once DNF targets.
//
// Under the uniform distribution a formula is determined, up to symmetry, by
// the multiset of its term sizes. Under a two-class product distribution
// (every variable is Bernoulli(p1) or Bernoulli(p2)) a term is determined by
// its pair (n1, n2) of per-class literal counts. The DP recurses on the root
// variable: x = 0 drops its term, x = 1 shortens it; an emptied term makes the
// formula constant true. Optimal trees only ever need DNF variables.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tdmic/dnf.hpp"
#include "tdmic/tree.hpp"

namespace tdmic {

// ---------------------------------------------------------------------------
// Signatures

/// Sorted multiset of term sizes. Empty denotes the constant-false formula.
struct UniformSignature {
    std::vector<int> term_sizes;

    UniformSignature() = default;
    explicit UniformSignature(std::vector<int> sizes) : term_sizes(std::move(sizes)) {
        for (int s : term_sizes)
            if (s < 1) throw std::invalid_argument("UniformSignature: term sizes must be >= 1");
        std::sort(term_sizes.begin(), term_sizes.end());
    }

    int literal_count() const {
        int n = 0;
        for (int s : term_sizes) n += s;
        return n;
    }

    auto operator<=>(const UniformSignature&) const = default;
};

/// Per-class literal counts of one term.
struct ClassProfile {
    int n1 = 0;
    int n2 = 0;
    int size() const { return n1 + n2; }
    auto operator<=>(const ClassProfile&) const = default;
};

/// Sorted multiset of term profiles, plus the two class probabilities.
struct TwoClassSignature {
    std::vector<ClassProfile> term_profiles;
    double p1 = 0.5;
    double p2 = 0.5;

    TwoClassSignature() = default;
    TwoClassSignature(std::vector<ClassProfile> profiles, double p1_, double p2_)
        : term_profiles(std::move(profiles)), p1(p1_), p2(p2_) {
        for (const auto& c : term_profiles)
            if (c.n1 < 0 || c.n2 < 0 || c.size() < 1)
                throw std::invalid_argument("TwoClassSignature: each term needs n1, n2 >= 0 and n1 + n2 >= 1");
        if (!(p1 > 0 && p1 < 1 && p2 > 0 && p2 < 1))
            throw std::invalid_argument("TwoClassSignature: class probabilities must lie in (0,1)");
        std::sort(term_profiles.begin(), term_profiles.end());
    }

    int literal_count() const {
        int n = 0;
        for (const auto& c : term_profiles) n += c.size();
        return n;
    }

    /// Same class probabilities, terms collapsed to their sizes.
    UniformSignature collapsed() const {
        std::vector<int> sizes;
        for (const auto& c : term_profiles) sizes.push_back(c.size());
        return UniformSignature(std::move(sizes));
    }
};

inline std::string to_string(const UniformSignature& s) {
    if (s.term_sizes.empty()) return "empty";
    std::string out;
    for (std::size_t i = 0; i < s.term_sizes.size(); ++i) {
        if (i) out += '-';
        out += std::to_string(s.term_sizes[i]);
    }
    return out;
}

inline std::string to_string(const TwoClassSignature& s) {
    if (s.term_profiles.empty()) return "empty";
    std::string out;
    for (std::size_t i = 0; i < s.term_profiles.size(); ++i) {
        if (i) out += '-';
        out += std::to_string(s.term_profiles[i].n1) + ":" + std::to_string(s.term_profiles[i].n2);
    }
    return out;
}

/// Concrete formula for a uniform signature: consecutive variable indices,
/// terms in ascending size order.
inline ReadOnceDnf realize(const UniformSignature& s) {
    std::vector<std::vector<Var>> terms;
    Var next = 0;
    for (int size : s.term_sizes) {
        std::vector<Var> t;
        for (int i = 0; i < size; ++i) t.push_back(next++);
        terms.push_back(std::move(t));
    }
    return ReadOnceDnf::from_terms(terms);
}

inline ProductDistribution realize_distribution(const UniformSignature& s) {
    return ProductDistribution::uniform(static_cast<std::size_t>(s.literal_count()));
}

/// Concrete formula for a two-class signature. Within each term the class-1
/// variables come first.
inline ReadOnceDnf realize(const TwoClassSignature& s) {
    std::vector<std::vector<Var>> terms;
    Var next = 0;
    for (const auto& c : s.term_profiles) {
        std::vector<Var> t;
        for (int i = 0; i < c.size(); ++i) t.push_back(next++);
        terms.push_back(std::move(t));
    }
    return ReadOnceDnf::from_terms(terms);
}

inline ProductDistribution realize_distribution(const TwoClassSignature& s) {
    std::vector<int> classes;
    for (const auto& c : s.term_profiles) {
        classes.insert(classes.end(), static_cast<std::size_t>(c.n1), 0);
        classes.insert(classes.end(), static_cast<std::size_t>(c.n2), 1);
    }
    return ProductDistribution::two_class(s.p1, s.p2, classes);
}

// ---------------------------------------------------------------------------
// DP engine

namespace detail {

struct UniformTerms {
    using Profile = int;

    struct Branch {
        double tau;
        std::optional<Profile> shrunk;  // nullopt: the term was emptied
    };

    double term_prob(Profile s) const { return std::ldexp(1.0, -s); }

    std::vector<Branch> branches(Profile s) const {
        if (s == 1) return {{0.5, std::nullopt}};
        return {{0.5, s - 1}};
    }
};

struct TwoClassTerms {
    using Profile = ClassProfile;

    struct Branch {
        double tau;
        std::optional<Profile> shrunk;
    };

    double p1;
    double p2;

    double term_prob(Profile c) const { return std::pow(p1, c.n1) * std::pow(p2, c.n2); }

    // A term without class-i variables has no class-i branch; that is the
    // recurrence's S_i = 1 sentinel, which never attains the minimum.
    std::vector<Branch> branches(Profile c) const {
        std::vector<Branch> out;
        auto shrink = [](Profile x) -> std::optional<Profile> {
            if (x.size() == 0) return std::nullopt;
            return x;
        };
        if (c.n1 > 0) out.push_back({p1, shrink({c.n1 - 1, c.n2})});
        if (c.n2 > 0) out.push_back({p2, shrink({c.n1, c.n2 - 1})});
        return out;
    }
};

}  // namespace detail

/// Memoized OPT(F, t) over canonical multisets of term profiles.
template <class Terms>
class OptTable {
public:
    using Profile = typename Terms::Profile;
    using Key = std::vector<Profile>;

    explicit OptTable(Terms terms = {}) : terms_(terms) {}

    /// Minimal error over trees with at most t internal nodes.
    double opt(Key key, int t) {
        if (t < 0) throw std::invalid_argument("opt: t must be nonnegative");
        std::sort(key.begin(), key.end());
        State& s = state(key);
        ensure(s, t);
        return s.values[static_cast<std::size_t>(t)];
    }

    /// OPT(F, 0..t_max).
    std::vector<double> opt_series(Key key, int t_max) {
        std::sort(key.begin(), key.end());
        State& s = state(key);
        ensure(s, t_max);
        return {s.values.begin(), s.values.begin() + t_max + 1};
    }

    std::size_t state_count() const { return states_.size(); }

private:
    struct State;

    struct Choice {
        double tau;
        State* drop;    // formula without the term
        State* shrink;  // formula with the term shortened; nullptr once it is true
    };

    struct State {
        Key key;
        std::vector<double> values;
        std::vector<Choice> choices;
        bool expanded = false;
    };

    State& state(const Key& key) {
        auto it = states_.find(key);
        if (it == states_.end()) {
            auto s = std::make_unique<State>();
            s->key = key;
            double none = 1.0;
            for (const auto& c : key) none *= 1.0 - terms_.term_prob(c);
            s->values.push_back(key.empty() ? 0.0 : cost(1.0 - none));
            it = states_.emplace(key, std::move(s)).first;
        }
        return *it->second;
    }

    void expand(State& s) {
        if (s.expanded) return;
        s.expanded = true;
        for (std::size_t i = 0; i < s.key.size(); ++i) {
            if (i > 0 && s.key[i] == s.key[i - 1]) continue;
            Key rest = s.key;
            rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(i));
            State* drop = &state(rest);
            for (const auto& b : terms_.branches(s.key[i])) {
                State* shrink = nullptr;
                if (b.shrunk) {
                    Key k = rest;
                    k.insert(std::upper_bound(k.begin(), k.end(), *b.shrunk), *b.shrunk);
                    shrink = &state(k);
                }
                s.choices.push_back({b.tau, drop, shrink});
            }
        }
    }

    void ensure(State& s, int t) {
        if (static_cast<int>(s.values.size()) > t) return;
        if (s.key.empty()) {
            s.values.resize(static_cast<std::size_t>(t) + 1, 0.0);
            return;
        }
        expand(s);
        for (const auto& c : s.choices) {
            ensure(*c.drop, t - 1);
            if (c.shrink) ensure(*c.shrink, t - 1);
        }
        for (int tt = static_cast<int>(s.values.size()); tt <= t; ++tt) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& c : s.choices) {
                const auto& lo = c.drop->values;
                const State* hi = c.shrink;
                for (int j = 0; j <= tt - 1; ++j) {
                    double right = hi ? hi->values[static_cast<std::size_t>(tt - 1 - j)] : 0.0;
                    double v = (1.0 - c.tau) * lo[static_cast<std::size_t>(j)] + c.tau * right;
                    best = std::min(best, v);
                }
            }
            s.values.push_back(best);
        }
    }

    Terms terms_;
    std::map<Key, std::unique_ptr<State>> states_;
};

using UniformOptTable = OptTable<detail::UniformTerms>;
using TwoClassOptTable = OptTable<detail::TwoClassTerms>;

inline double opt_uniform(UniformOptTable& table, const UniformSignature& sig, int t) {
    return table.opt(sig.term_sizes, t);
}

inline double opt_uniform(const UniformSignature& sig, int t) {
    UniformOptTable table;
    return opt_uniform(table, sig, t);
}

inline TwoClassOptTable make_two_class_table(double p1, double p2) {
    return TwoClassOptTable(detail::TwoClassTerms{p1, p2});
}

inline double opt_two_class(TwoClassOptTable& table, const TwoClassSignature& sig, int t) {
    return table.opt(sig.term_profiles, t);
}

inline double opt_two_class(const TwoClassSignature& sig, int t) {
    auto table = make_two_class_table(sig.p1, sig.p2);
    return opt_two_class(table, sig, t);
}

/// OPT(F, t) for an arbitrary product distribution, memoized on the residual
/// formula itself. Exponential in the number of terms; meant for small
/// targets such as single conjunctions with arbitrary marginals.
class ExactOptTable {
public:
    explicit ExactOptTable(ProductDistribution dist) : dist_(std::move(dist)) {}

    double opt(const ReadOnceDnf& f, int t) {
        if (t < 0) throw std::invalid_argument("opt: t must be nonnegative");
        if (f.is_constant()) return 0.0;
        auto& values = memo_[key(f)];
        if (values.empty()) values.push_back(cost(satisfy_probability(f, dist_)));
        while (static_cast<int>(values.size()) <= t) {
            const int tt = static_cast<int>(values.size());
            double best = std::numeric_limits<double>::infinity();
            for (Var v : f.variables()) {
                const double p = dist_[v];
                ReadOnceDnf f0 = f.condition(v, false);
                ReadOnceDnf f1 = f.condition(v, true);
                for (int j = 0; j <= tt - 1; ++j)
                    best = std::min(best, (1.0 - p) * opt(f0, j) + p * opt(f1, tt - 1 - j));
            }
            // memo_ is a node-based map, so `values` survives the recursion.
            values.push_back(best);
        }
        return values[static_cast<std::size_t>(t)];
    }

    std::vector<double> opt_series(const ReadOnceDnf& f, int t_max) {
        std::vector<double> out;
        for (int t = 0; t <= t_max; ++t) out.push_back(opt(f, t));
        return out;
    }

private:
    static std::vector<std::vector<Var>> key(const ReadOnceDnf& f) {
        std::vector<std::vector<Var>> k;
        for (const auto& term : f.terms()) k.push_back(term.vars());
        std::sort(k.begin(), k.end());
        return k;
    }

    ProductDistribution dist_;
    std::map<std::vector<std::vector<Var>>, std::vector<double>> memo_;
};

inline double opt_exact(const ReadOnceDnf& f, const ProductDistribution& dist, int t) {
    ExactOptTable table(dist);
    return table.opt(f, t);
}

// ---------------------------------------------------------------------------
// Brute-force oracle

inline constexpr std::size_t kBruteForceMaxLiterals = 8;
inline constexpr int kBruteForceMaxNodes = 5;

struct BruteForceResult {
    double error;
    DecisionTree witness;
};

namespace detail {

struct Plan {
    Var feature = -1;
    std::shared_ptr<const Plan> left;
    std::shared_ptr<const Plan> right;
};

struct PlanValue {
    double error;  // conditional on reaching this node
    std::shared_ptr<const Plan> plan;
};

// One representative per (term, probability) class: variables of the same
// term with the same marginal are interchangeable.
inline std::vector<Var> representatives(const ReadOnceDnf& f, const ProductDistribution& dist) {
    std::vector<Var> reps;
    for (const auto& term : f.terms()) {
        std::vector<double> seen;
        for (Var v : term.vars()) {
            double p = dist[v];
            if (std::find(seen.begin(), seen.end(), p) != seen.end()) continue;
            seen.push_back(p);
            reps.push_back(v);
        }
    }
    return reps;
}

inline PlanValue search(const ReadOnceDnf& f, const ProductDistribution& dist, int budget) {
    PlanValue best{cost(satisfy_probability(f, dist)), std::make_shared<const Plan>()};
    if (budget == 0 || f.is_constant()) return best;
    for (Var v : representatives(f, dist)) {
        const double p = dist[v];
        ReadOnceDnf f0 = f.condition(v, false);
        ReadOnceDnf f1 = f.condition(v, true);
        for (int j = 0; j <= budget - 1; ++j) {
            PlanValue lo = search(f0, dist, j);
            PlanValue hi = search(f1, dist, budget - 1 - j);
            double e = (1.0 - p) * lo.error + p * hi.error;
            // A split that only ties the leaf is still preferred as witness.
            const bool leaf_best = best.plan->feature < 0;
            if (e < best.error - kTolerance || (leaf_best && e <= best.error + kTolerance)) {
                auto plan = std::make_shared<Plan>();
                plan->feature = v;
                plan->left = lo.plan;
                plan->right = hi.plan;
                best = {e, std::move(plan)};
            }
        }
    }
    return best;
}

inline void replay(DecisionTree& tree, const Plan& plan, std::vector<bool>& dirs) {
    if (plan.feature < 0) return;
    tree = tree.split(tree.leaf_at(dirs), plan.feature);
    dirs.push_back(false);
    replay(tree, *plan.left, dirs);
    dirs.back() = true;
    replay(tree, *plan.right, dirs);
    dirs.pop_back();
}

}  // namespace detail

/// Exhaustive minimum of tree_error over every tree with at most t internal
/// nodes labeled by variables of target. Returns one optimal tree.
inline BruteForceResult brute_force_opt(const ReadOnceDnf& target, const ProductDistribution& dist, int t) {
    if (target.literal_count() > kBruteForceMaxLiterals || t > kBruteForceMaxNodes || t < 0)
        throw std::length_error("brute_force_opt: instance exceeds " + std::to_string(kBruteForceMaxLiterals) +
                                " literals or " + std::to_string(kBruteForceMaxNodes) + " nodes");
    detail::PlanValue v = detail::search(target, dist, t);
    DecisionTree tree = single_leaf_tree(target, dist);
    std::vector<bool> dirs;
    detail::replay(tree, *v.plan, dirs);
    return {tree.error(), std::move(tree)};
}

// ---------------------------------------------------------------------------
// Structural comparison

namespace detail {

inline bool same_shape(const DecisionTree::Node& a, const DecisionTree::Node& b, const ReadOnceDnf& ta,
                       const ReadOnceDnf& tb) {
    if (a.is_leaf() || b.is_leaf()) return a.is_leaf() && b.is_leaf();
    auto ca = ta.term_of(a.feature);
    auto cb = tb.term_of(b.feature);
    if (ca != cb) return false;
    if (!ca && a.feature != b.feature) return false;
    return same_shape(*a.left, *b.left, ta, tb) && same_shape(*a.right, *b.right, ta, tb);
}

}  // namespace detail

/// True when the trees coincide after identifying variables of the same
/// target term. Variables outside the target must match exactly.
inline bool structural_equal(const DecisionTree& a, const DecisionTree& b) {
    return detail::same_shape(*a.root(), *b.root(), a.target(), b.target());
}

}  // namespace tdmic
