#pragma once

// MIC constants eps_t = E(A(D, t)) - OPT(D, t), their running mean m(t*),
// formula-family enumeration and histogram sweeps.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "tdmic/dnf.hpp"
#include "tdmic/greedy.hpp"
#include "tdmic/optimal.hpp"

namespace tdmic {

/// How ties between equally good splits are resolved when computing MIC.
enum class TieMode {
    Documented,  // the deterministic scan rule of grow()
    WorstCase,   // the largest mean over every tie resolution (tiny instances)
};

inline std::string_view tie_mode_name(TieMode m) {
    return m == TieMode::Documented ? "documented" : "worst-case";
}

inline TieMode parse_tie_mode(std::string_view s) {
    if (s == "documented") return TieMode::Documented;
    if (s == "worst-case") return TieMode::WorstCase;
    throw std::invalid_argument("unknown tie mode: " + std::string(s));
}

struct MicSeries {
    std::vector<double> epsilons;  // epsilons[t - 1] is eps_t
    int t_star = 0;
    double mean = 0.0;
};

inline double mic_mean(const MicSeries& s) {
    if (s.epsilons.empty()) throw std::invalid_argument("mic_mean: empty series");
    double sum = 0.0;
    for (double e : s.epsilons) sum += e;
    return sum / static_cast<double>(s.epsilons.size());
}

/// eps_t for t = 1..t_star from a growth trace and OPT(., 0..t_star).
inline MicSeries mic_from_trace(const GrowthTrace& trace, std::span<const double> opt, int t_star) {
    if (t_star < 1) throw std::invalid_argument("mic: t_star must be >= 1");
    if (opt.size() < static_cast<std::size_t>(t_star) + 1)
        throw std::invalid_argument("mic: OPT series shorter than t_star");
    MicSeries s;
    s.t_star = t_star;
    for (int t = 1; t <= t_star; ++t)
        s.epsilons.push_back(trace.error_at(t) - opt[static_cast<std::size_t>(t)]);
    s.mean = mic_mean(s);
    return s;
}

namespace detail {

inline MicSeries mic_with_opt(Policy policy, const ReadOnceDnf& f, const ProductDistribution& dist,
                              const std::vector<double>& opt, int t_star, TieMode mode) {
    if (mode == TieMode::Documented) return mic_from_trace(grow(policy, f, dist, t_star).trace, opt, t_star);
    MicSeries worst;
    worst.mean = -std::numeric_limits<double>::infinity();
    for (const auto& trace : all_tie_resolutions(policy, f, dist, t_star)) {
        MicSeries s = mic_from_trace(trace, opt, t_star);
        if (s.mean > worst.mean) worst = std::move(s);
    }
    return worst;
}

}  // namespace detail

/// MIC for an arbitrary product distribution, with OPT from the
/// formula-level exact table.
inline MicSeries mic_constants(Policy policy, const ReadOnceDnf& target, const ProductDistribution& dist,
                               int t_star, TieMode mode = TieMode::Documented) {
    ExactOptTable table(dist);
    return detail::mic_with_opt(policy, target, dist, table.opt_series(target, t_star), t_star, mode);
}

inline MicSeries mic_constants(Policy policy, const UniformSignature& sig, int t_star, UniformOptTable& table,
                               TieMode mode = TieMode::Documented) {
    return detail::mic_with_opt(policy, realize(sig), realize_distribution(sig),
                                table.opt_series(sig.term_sizes, t_star), t_star, mode);
}

inline MicSeries mic_constants(Policy policy, const TwoClassSignature& sig, int t_star, TwoClassOptTable& table,
                               TieMode mode = TieMode::Documented) {
    return detail::mic_with_opt(policy, realize(sig), realize_distribution(sig),
                                table.opt_series(sig.term_profiles, t_star), t_star, mode);
}

// ---------------------------------------------------------------------------
// Families

namespace detail {

// Nondecreasing index sequences of the given length over [0, alphabet).
inline void multisets(int alphabet, int length, std::vector<int>& cur,
                      const std::function<void(const std::vector<int>&)>& emit) {
    if (static_cast<int>(cur.size()) == length) {
        emit(cur);
        return;
    }
    for (int a = cur.empty() ? 0 : cur.back(); a < alphabet; ++a) {
        cur.push_back(a);
        multisets(alphabet, length, cur, emit);
        cur.pop_back();
    }
}

}  // namespace detail

/// Every multiset of 1..max_terms term sizes drawn from 1..max_term_size,
/// ordered by term count and then lexicographically.
inline std::vector<UniformSignature> enumerate_uniform_family(int max_terms, int max_term_size) {
    if (max_terms < 1 || max_term_size < 1) throw std::invalid_argument("family bounds must be >= 1");
    std::vector<UniformSignature> out;
    std::vector<int> cur;
    for (int k = 1; k <= max_terms; ++k)
        detail::multisets(max_term_size, k, cur, [&](const std::vector<int>& idx) {
            std::vector<int> sizes;
            for (int i : idx) sizes.push_back(i + 1);
            out.emplace_back(std::move(sizes));
        });
    return out;
}

/// Term profiles (n1, n2) with 1 <= n1 + n2 <= max_term_size, by size and
/// then by descending n1.
inline std::vector<ClassProfile> class_profiles(int max_term_size) {
    std::vector<ClassProfile> out;
    for (int size = 1; size <= max_term_size; ++size)
        for (int n1 = size; n1 >= 0; --n1) out.push_back({n1, size - n1});
    return out;
}

inline std::vector<TwoClassSignature> enumerate_two_class_family(int max_terms, int max_term_size, double p1,
                                                                 double p2) {
    if (max_terms < 1 || max_term_size < 1) throw std::invalid_argument("family bounds must be >= 1");
    const auto profiles = class_profiles(max_term_size);
    std::vector<TwoClassSignature> out;
    std::vector<int> cur;
    for (int k = 1; k <= max_terms; ++k)
        detail::multisets(static_cast<int>(profiles.size()), k, cur, [&](const std::vector<int>& idx) {
            std::vector<ClassProfile> terms;
            for (int i : idx) terms.push_back(profiles[static_cast<std::size_t>(i)]);
            out.emplace_back(std::move(terms), p1, p2);
        });
    return out;
}

// ---------------------------------------------------------------------------
// Sweeps

struct Histogram {
    std::vector<double> edges;  // bin i is [edges[i], edges[i+1]); last edge may be +inf
    std::vector<std::size_t> counts;

    /// Default edges 0, 1e-4, 1e-3, 1e-2, 5e-2, +inf.
    static Histogram standard() {
        return with_edges({0.0, 1e-4, 1e-3, 1e-2, 5e-2, std::numeric_limits<double>::infinity()});
    }

    static Histogram with_edges(std::vector<double> edges) {
        if (edges.size() < 2 || !std::is_sorted(edges.begin(), edges.end()))
            throw std::invalid_argument("histogram edges must be ascending with at least two entries");
        Histogram h;
        h.counts.assign(edges.size() - 1, 0);
        h.edges = std::move(edges);
        return h;
    }

    /// Values below the first edge land in the first bin, values at or
    /// above the last edge in the last bin.
    void add(double v) {
        std::size_t bin = 0;
        while (bin + 1 < counts.size() && v >= edges[bin + 1]) ++bin;
        ++counts[bin];
    }

    std::size_t total() const {
        std::size_t n = 0;
        for (auto c : counts) n += c;
        return n;
    }
};

struct SweepRecord {
    std::string signature;
    double mic_mean;
};

struct SweepReport {
    std::string family;  // e.g. "uniform(5,5)" or "two_class(5,5,0.3,0.7)"
    Policy policy = Policy::TopDown;
    TieMode tie_mode = TieMode::Documented;
    int t_star = 0;
    std::vector<SweepRecord> records;  // in family enumeration order
    Histogram histogram;
};

/// Runs fn(worker_index, item_index) for every item on `workers` threads.
/// Items are claimed dynamically; callers write results by item index.
inline void parallel_for(std::size_t items, int workers, const std::function<void(int, std::size_t)>& fn) {
    workers = std::max(1, workers);
    std::atomic<std::size_t> next{0};
    auto body = [&](int w) {
        for (std::size_t i = next++; i < items; i = next++) fn(w, i);
    };
    if (workers == 1) {
        body(0);
        return;
    }
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            try {
                body(w);
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
                next = items;
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

namespace detail {

template <class Sig, class Table, class MakeTable>
SweepReport sweep_impl(Policy policy, const std::vector<Sig>& family, std::string family_name, int t_star,
                       Histogram bins, int workers, TieMode mode, MakeTable make_table) {
    if (t_star < 1) throw std::invalid_argument("sweep: t_star must be >= 1");
    SweepReport r;
    r.family = std::move(family_name);
    r.policy = policy;
    r.tie_mode = mode;
    r.t_star = t_star;
    r.records.resize(family.size());
    std::vector<Table> tables;
    for (int w = 0; w < std::max(1, workers); ++w) tables.push_back(make_table());
    parallel_for(family.size(), workers, [&](int w, std::size_t i) {
        MicSeries s = mic_constants(policy, family[i], t_star, tables[static_cast<std::size_t>(w)], mode);
        r.records[i] = {to_string(family[i]), s.mean};
    });
    r.histogram = std::move(bins);
    for (const auto& rec : r.records) r.histogram.add(rec.mic_mean);
    return r;
}

}  // namespace detail

/// MIC mean of every formula in a uniform family, binned. Each worker owns
/// its DP table, so results do not depend on the worker count.
inline SweepReport sweep(Policy policy, const std::vector<UniformSignature>& family, std::string family_name,
                         int t_star, Histogram bins = Histogram::standard(), int workers = 1,
                         TieMode mode = TieMode::Documented) {
    return detail::sweep_impl<UniformSignature, UniformOptTable>(
        policy, family, std::move(family_name), t_star, std::move(bins), workers, mode,
        [] { return UniformOptTable(); });
}

inline SweepReport sweep(Policy policy, const std::vector<TwoClassSignature>& family, std::string family_name,
                         int t_star, Histogram bins = Histogram::standard(), int workers = 1,
                         TieMode mode = TieMode::Documented) {
    double p1 = family.empty() ? 0.5 : family.front().p1;
    double p2 = family.empty() ? 0.5 : family.front().p2;
    return detail::sweep_impl<TwoClassSignature, TwoClassOptTable>(
        policy, family, std::move(family_name), t_star, std::move(bins), workers, mode,
        [=] { return make_two_class_table(p1, p2); });
}

}  // namespace tdmic
