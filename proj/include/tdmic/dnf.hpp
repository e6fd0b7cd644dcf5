#pragma once

// Read-once DNF formulas over boolean variables and product distributions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tdmic {

/// Absolute tolerance used for every probability comparison in the library.
inline constexpr double kTolerance = 1e-12;

using Var = int;

/// Binary entropy in bits, with H(0) = H(1) = 0.
inline double entropy(double x) {
    if (x < -kTolerance || x > 1.0 + kTolerance)
        throw std::domain_error("entropy: argument outside [0,1]: " + std::to_string(x));
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

/// Misclassification cost of a leaf with positive rate x: min(x, 1-x).
inline double cost(double x) {
    if (x < -kTolerance || x > 1.0 + kTolerance)
        throw std::domain_error("cost: argument outside [0,1]: " + std::to_string(x));
    x = std::clamp(x, 0.0, 1.0);
    return std::min(x, 1.0 - x);
}

/// A conjunction of distinct positive literals. Never empty.
class Term {
public:
    explicit Term(std::vector<Var> vars) : vars_(std::move(vars)) {
        if (vars_.empty()) throw std::invalid_argument("Term: empty term");
        std::sort(vars_.begin(), vars_.end());
        if (std::adjacent_find(vars_.begin(), vars_.end()) != vars_.end())
            throw std::invalid_argument("Term: duplicate variable");
        if (vars_.front() < 0) throw std::invalid_argument("Term: negative variable index");
    }

    const std::vector<Var>& vars() const { return vars_; }
    std::size_t size() const { return vars_.size(); }
    bool contains(Var v) const { return std::binary_search(vars_.begin(), vars_.end(), v); }

    bool operator==(const Term&) const = default;

private:
    std::vector<Var> vars_;
};

/// A read-once DNF: either the constant true, the constant false, or a
/// nonempty list of pairwise variable-disjoint terms.
class ReadOnceDnf {
public:
    enum class Kind { Satisfied, Falsified, Terms };

    static ReadOnceDnf satisfied() { return ReadOnceDnf(Kind::Satisfied, {}); }
    static ReadOnceDnf falsified() { return ReadOnceDnf(Kind::Falsified, {}); }

    static ReadOnceDnf from_terms(std::vector<Term> terms) {
        if (terms.empty()) return falsified();
        std::vector<Var> all;
        for (const auto& t : terms) all.insert(all.end(), t.vars().begin(), t.vars().end());
        std::sort(all.begin(), all.end());
        if (std::adjacent_find(all.begin(), all.end()) != all.end())
            throw std::invalid_argument("ReadOnceDnf: variable appears in more than one term");
        return ReadOnceDnf(Kind::Terms, std::move(terms));
    }

    static ReadOnceDnf from_terms(const std::vector<std::vector<Var>>& terms) {
        std::vector<Term> ts;
        ts.reserve(terms.size());
        for (const auto& t : terms) ts.emplace_back(t);
        return from_terms(std::move(ts));
    }

    static ReadOnceDnf from_terms(std::initializer_list<std::vector<Var>> terms) {
        return from_terms(std::vector<std::vector<Var>>(terms));
    }

    Kind kind() const { return kind_; }
    bool is_satisfied() const { return kind_ == Kind::Satisfied; }
    bool is_falsified() const { return kind_ == Kind::Falsified; }
    bool is_constant() const { return kind_ != Kind::Terms; }
    const std::vector<Term>& terms() const { return terms_; }

    /// Index of the term containing v, if any.
    std::optional<std::size_t> term_of(Var v) const {
        for (std::size_t i = 0; i < terms_.size(); ++i)
            if (terms_[i].contains(v)) return i;
        return std::nullopt;
    }

    bool contains(Var v) const { return term_of(v).has_value(); }

    /// All variables, ascending.
    std::vector<Var> variables() const {
        std::vector<Var> all;
        for (const auto& t : terms_) all.insert(all.end(), t.vars().begin(), t.vars().end());
        std::sort(all.begin(), all.end());
        return all;
    }

    std::size_t literal_count() const {
        std::size_t n = 0;
        for (const auto& t : terms_) n += t.size();
        return n;
    }

    /// Largest variable index plus one (0 for constants).
    std::size_t span() const {
        Var mx = -1;
        for (const auto& t : terms_) mx = std::max(mx, t.vars().back());
        return static_cast<std::size_t>(mx + 1);
    }

    /// Restrict x_var := value. Setting a literal true drops it from its term
    /// (an emptied term makes the formula Satisfied); setting it false drops
    /// the whole term (no terms left makes it Falsified).
    ReadOnceDnf condition(Var var, bool value) const {
        auto idx = term_of(var);
        if (!idx) return *this;
        if (!value) {
            std::vector<Term> rest;
            rest.reserve(terms_.size() - 1);
            for (std::size_t i = 0; i < terms_.size(); ++i)
                if (i != *idx) rest.push_back(terms_[i]);
            if (rest.empty()) return falsified();
            return ReadOnceDnf(Kind::Terms, std::move(rest));
        }
        const Term& hit = terms_[*idx];
        if (hit.size() == 1) return satisfied();
        std::vector<Var> shrunk;
        shrunk.reserve(hit.size() - 1);
        for (Var v : hit.vars())
            if (v != var) shrunk.push_back(v);
        std::vector<Term> next = terms_;
        next[*idx] = Term(std::move(shrunk));
        return ReadOnceDnf(Kind::Terms, std::move(next));
    }

    /// Evaluate on a full assignment; x must cover every variable.
    template <class Bits>
    bool evaluate(const Bits& x) const {
        if (kind_ == Kind::Satisfied) return true;
        for (const auto& t : terms_) {
            bool all = true;
            for (Var v : t.vars())
                if (!x[static_cast<std::size_t>(v)]) { all = false; break; }
            if (all) return true;
        }
        return false;
    }

    /// Human-readable form, e.g. "(x0 & x1) | (x2)".
    std::string to_string() const {
        if (kind_ == Kind::Satisfied) return "TRUE";
        if (kind_ == Kind::Falsified) return "FALSE";
        std::string s;
        for (std::size_t i = 0; i < terms_.size(); ++i) {
            if (i) s += " | ";
            s += "(";
            for (std::size_t j = 0; j < terms_[i].size(); ++j) {
                if (j) s += " & ";
                s += "x" + std::to_string(terms_[i].vars()[j]);
            }
            s += ")";
        }
        return s;
    }

    bool operator==(const ReadOnceDnf&) const = default;

private:
    ReadOnceDnf(Kind k, std::vector<Term> terms) : kind_(k), terms_(std::move(terms)) {}

    Kind kind_;
    std::vector<Term> terms_;
};

/// Independent Bernoulli(p_i) coordinates, each p_i strictly inside (0,1).
class ProductDistribution {
public:
    ProductDistribution() = default;

    explicit ProductDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
        for (double p : probs_)
            if (!(p > 0.0 && p < 1.0))
                throw std::invalid_argument("ProductDistribution: probability outside (0,1): " +
                                            std::to_string(p));
    }

    static ProductDistribution uniform(std::size_t n) {
        return ProductDistribution(std::vector<double>(n, 0.5));
    }

    /// classes[i] selects p1 (0) or p2 (1) for variable i.
    static ProductDistribution two_class(double p1, double p2, std::span<const int> classes) {
        std::vector<double> probs;
        probs.reserve(classes.size());
        for (int c : classes) {
            if (c != 0 && c != 1) throw std::invalid_argument("two_class: class must be 0 or 1");
            probs.push_back(c == 0 ? p1 : p2);
        }
        return ProductDistribution(std::move(probs));
    }

    std::size_t size() const { return probs_.size(); }
    const std::vector<double>& probs() const { return probs_; }

    double operator[](Var v) const {
        if (v < 0 || static_cast<std::size_t>(v) >= probs_.size())
            throw std::out_of_range("ProductDistribution: no probability for variable " +
                                    std::to_string(v));
        return probs_[static_cast<std::size_t>(v)];
    }

    bool covers(const ReadOnceDnf& f) const { return f.span() <= probs_.size(); }

    bool operator==(const ProductDistribution&) const = default;

private:
    std::vector<double> probs_;
};

/// Pr[f(x) = 1] for x drawn from dist. Throws std::out_of_range when a
/// variable of f has no probability.
inline double satisfy_probability(const ReadOnceDnf& f, const ProductDistribution& dist) {
    switch (f.kind()) {
    case ReadOnceDnf::Kind::Satisfied: return 1.0;
    case ReadOnceDnf::Kind::Falsified: return 0.0;
    case ReadOnceDnf::Kind::Terms: break;
    }
    double none = 1.0;
    for (const auto& t : f.terms()) {
        double all = 1.0;
        for (Var v : t.vars()) all *= dist[v];
        none *= 1.0 - all;
    }
    return 1.0 - none;
}

}  // namespace tdmic
