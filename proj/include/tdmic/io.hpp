#pragma once

// File formats: DNF / distribution / tree JSON, CSV emission, config parsing
// and atomic output files.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tdmic/dnf.hpp"
#include "tdmic/greedy.hpp"
#include "tdmic/mic.hpp"
#include "tdmic/sample.hpp"
#include "tdmic/tree.hpp"

namespace tdmic {

using json = nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

/// Thrown for malformed input files; exit code 2 at the CLI.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Shortest text that round-trips a double ('.' decimal, 17 significant digits).
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// DNF and distributions

/// {"n": count, "terms": [[i, ...], ...]}
inline json dnf_to_json(const ReadOnceDnf& f, std::size_t n) {
    json terms = json::array();
    if (f.is_satisfied()) return json{{"n", n}, {"satisfied", true}, {"terms", terms}};
    for (const auto& t : f.terms()) terms.push_back(t.vars());
    return json{{"n", n}, {"terms", terms}};
}

inline std::pair<ReadOnceDnf, std::size_t> dnf_from_json(const json& j) {
    try {
        const auto n = j.at("n").get<std::size_t>();
        if (j.value("satisfied", false)) return {ReadOnceDnf::satisfied(), n};
        auto terms = j.at("terms").get<std::vector<std::vector<Var>>>();
        ReadOnceDnf f = ReadOnceDnf::from_terms(terms);
        if (f.span() > n) throw ConfigError("dnf: variable index >= n");
        return {std::move(f), n};
    } catch (const json::exception& e) {
        throw ConfigError(std::string("dnf: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("dnf: ") + e.what());
    }
}

/// {"probs": [...]}, {"uniform": n} or {"two_class": {"p1", "p2", "class": [...]}}.
inline ProductDistribution distribution_from_json(const json& j) {
    try {
        if (j.contains("probs")) return ProductDistribution(j.at("probs").get<std::vector<double>>());
        if (j.contains("uniform")) return ProductDistribution::uniform(j.at("uniform").get<std::size_t>());
        if (j.contains("two_class")) {
            const auto& tc = j.at("two_class");
            auto classes = tc.at("class").get<std::vector<int>>();
            return ProductDistribution::two_class(tc.at("p1").get<double>(), tc.at("p2").get<double>(), classes);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("distribution: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("distribution: ") + e.what());
    }
    throw ConfigError("distribution: expected one of probs, uniform, two_class");
}

inline json distribution_to_json(const ProductDistribution& d) { return json{{"probs", d.probs()}}; }

// ---------------------------------------------------------------------------
// Trees

inline json node_to_json(const DecisionTree::Node& n) {
    if (n.is_leaf())
        return json{{"leaf", {{"label", n.leaf->label ? 1 : 0}, {"p", n.leaf->reach_prob}, {"q", n.leaf->pos_prob}}}};
    return json{{"feature", n.feature}, {"left", node_to_json(*n.left)}, {"right", node_to_json(*n.right)}};
}

/// {"feature": i, "left": ..., "right": ...} or {"leaf": {"label", "p", "q"}}.
inline json tree_to_json(const DecisionTree& t) { return node_to_json(*t.root()); }

/// Rebuild a tree from its JSON shape by replaying the splits; stored leaf
/// statistics are recomputed from target and dist.
inline DecisionTree tree_from_json(const json& j, const ReadOnceDnf& target, const ProductDistribution& dist) {
    DecisionTree tree = single_leaf_tree(target, dist);
    std::vector<bool> dirs;
    auto walk = [&](auto&& self, const json& node) -> void {
        if (node.contains("leaf")) return;
        if (!node.contains("feature")) throw ConfigError("tree: node without feature or leaf");
        tree = tree.split(tree.leaf_at(dirs), node.at("feature").get<Var>());
        dirs.push_back(false);
        self(self, node.at("left"));
        dirs.back() = true;
        self(self, node.at("right"));
        dirs.pop_back();
    };
    try {
        walk(walk, j);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("tree: ") + e.what());
    }
    return tree;
}

// ---------------------------------------------------------------------------
// CSV

inline std::string trace_csv(const GrowthTrace& trace) {
    std::ostringstream os;
    os << "t,internal_nodes,error,leaf_order,feature\n";
    for (const auto& s : trace.snapshots)
        os << s.t << ',' << s.internal_nodes << ',' << format_double(s.error) << ',' << s.leaf_order << ','
           << s.feature << '\n';
    return os.str();
}

inline std::string sweep_csv(const SweepReport& r) {
    std::ostringstream os;
    os << "signature,policy,tie_mode,t_star,mic_mean\n";
    for (const auto& rec : r.records)
        os << rec.signature << ',' << policy_name(r.policy) << ',' << tie_mode_name(r.tie_mode) << ',' << r.t_star
           << ',' << format_double(rec.mic_mean) << '\n';
    return os.str();
}

inline json histogram_json(const SweepReport& r) {
    json edges = json::array();
    for (double e : r.histogram.edges) {
        if (std::isinf(e))
            edges.push_back("inf");
        else
            edges.push_back(e);
    }
    return json{{"bins", edges},
                {"counts", r.histogram.counts},
                {"policy", policy_name(r.policy)},
                {"family", r.family},
                {"tie_mode", tie_mode_name(r.tie_mode)},
                {"t_star", r.t_star}};
}

inline std::string experiment_csv(const ExperimentResults& res) {
    std::ostringstream os;
    os << "policy,train_size,repeat,seed,test_error,tree_internal_nodes,exact_error\n";
    for (const auto& row : res.rows)
        os << policy_name(row.policy) << ',' << row.train_size << ',' << row.repeat << ',' << row.seed << ','
           << format_double(row.test_error) << ',' << row.tree_internal_nodes << ','
           << format_double(row.exact_error) << '\n';
    return os.str();
}

inline std::string experiment_summary_csv(const ExperimentResults& res) {
    std::ostringstream os;
    os << "policy,train_size,runs,mean_test_error,std_test_error\n";
    for (const auto& c : res.cells)
        os << policy_name(c.policy) << ',' << c.train_size << ',' << c.runs << ',' << format_double(c.mean_test_error)
           << ',' << format_double(c.std_test_error) << '\n';
    return os.str();
}

// ---------------------------------------------------------------------------
// Experiment config

inline ExperimentConfig experiment_config_from_json(const json& j) {
    ExperimentConfig cfg;
    try {
        if (j.contains("term_sizes")) cfg.term_sizes = j.at("term_sizes").get<std::vector<int>>();
        if (j.contains("n")) cfg.n = j.at("n").get<int>();
        if (j.contains("train_sizes")) cfg.train_sizes = j.at("train_sizes").get<std::vector<std::size_t>>();
        if (j.contains("test_size")) cfg.test_size = j.at("test_size").get<std::size_t>();
        if (j.contains("min_leaf")) cfg.min_leaf = j.at("min_leaf").get<std::size_t>();
        if (j.contains("max_iters")) cfg.max_iters = j.at("max_iters").get<int>();
        if (j.contains("repeats")) cfg.repeats = j.at("repeats").get<int>();
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("policies")) {
            cfg.policies.clear();
            for (const auto& p : j.at("policies")) cfg.policies.push_back(parse_policy(p.get<std::string>()));
        }
        if (j.contains("dist")) {
            const auto& d = j.at("dist");
            if (d.is_string() && d.get<std::string>() == "uniform") {
                cfg.two_class = false;
            } else if (d.is_object() && d.contains("two_class")) {
                cfg.two_class = true;
                cfg.p1 = d.at("two_class").at("p1").get<double>();
                cfg.p2 = d.at("two_class").at("p2").get<double>();
            } else {
                throw ConfigError("config: dist must be \"uniform\" or {\"two_class\": {\"p1\", \"p2\"}}");
            }
        }
        cfg.validate();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

inline json experiment_config_to_json(const ExperimentConfig& cfg) {
    json pols = json::array();
    for (auto p : cfg.policies) pols.push_back(policy_name(p));
    json dist = cfg.two_class ? json{{"two_class", {{"p1", cfg.p1}, {"p2", cfg.p2}}}} : json("uniform");
    return json{{"term_sizes", cfg.term_sizes}, {"n", cfg.n},           {"train_sizes", cfg.train_sizes},
                {"test_size", cfg.test_size},   {"min_leaf", cfg.min_leaf}, {"max_iters", cfg.max_iters},
                {"repeats", cfg.repeats},       {"seed", cfg.seed},     {"policies", pols},
                {"dist", dist}};
}

/// Parse a JSON file; parse errors carry the line and column.
inline json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Output files

/// Collects output files and publishes them together: each is written to a
/// temporary sibling and renamed into place only on commit().
class AtomicOutputs {
public:
    void add(std::filesystem::path path, std::string contents) {
        files_.emplace_back(std::move(path), std::move(contents));
    }

    void commit() {
        std::vector<std::filesystem::path> temps;
        try {
            for (const auto& [path, contents] : files_) {
                if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
                auto tmp = path;
                tmp += ".tmp";
                std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
                out << contents;
                out.close();
                if (!out) throw std::runtime_error("cannot write " + tmp.string());
                temps.push_back(tmp);
            }
        } catch (...) {
            for (const auto& t : temps) std::filesystem::remove(t);
            throw;
        }
        for (std::size_t i = 0; i < files_.size(); ++i) std::filesystem::rename(temps[i], files_[i].first);
    }

private:
    std::vector<std::pair<std::filesystem::path, std::string>> files_;
};

/// Metadata written next to every output.
struct RunManifest {
    std::string command;
    json config;
    std::vector<std::uint64_t> seeds;
    std::string tie_mode;
    double duration_seconds = 0.0;

    json to_json() const {
        return json{{"command", command},   {"config", config},   {"seeds", seeds},
                    {"tie_mode", tie_mode}, {"version", kVersion}, {"rng", kRngName},
                    {"duration_seconds", duration_seconds}};
    }
};

}  // namespace tdmic
