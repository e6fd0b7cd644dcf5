#pragma once

// Command-line front end. run_cli() returns the process exit code:
// 0 success, 1 verification failure, 2 usage or config error.

#include <chrono>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tdmic/dnf.hpp"
#include "tdmic/greedy.hpp"
#include "tdmic/io.hpp"
#include "tdmic/mic.hpp"
#include "tdmic/optimal.hpp"
#include "tdmic/sample.hpp"
#include "tdmic/tree.hpp"
#include "tdmic/verify.hpp"

namespace tdmic {

namespace fs = std::filesystem;

enum ExitCode : int { kExitOk = 0, kExitVerifyFailed = 1, kExitUsage = 2 };

namespace detail {

// For labels and console output; files use format_double.
inline std::string short_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

struct FamilyFlags {
    std::string family = "uniform";
    int max_terms = 5;
    int max_term_size = 5;
    double p1 = 0.3;
    double p2 = 0.7;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--family", family, "uniform or two-class")
            ->check(CLI::IsMember({"uniform", "two-class"}))
            ->capture_default_str();
        cmd->add_option("--max-terms", max_terms)->check(CLI::Range(1, 64))->capture_default_str();
        cmd->add_option("--max-term-size", max_term_size)->check(CLI::Range(1, 64))->capture_default_str();
        cmd->add_option("--p1", p1, "two-class marginal of class 1")->capture_default_str();
        cmd->add_option("--p2", p2, "two-class marginal of class 2")->capture_default_str();
    }

    bool two_class() const { return family == "two-class"; }

    std::string name() const {
        std::string s = family + "(" + std::to_string(max_terms) + "," + std::to_string(max_term_size);
        if (two_class()) s += "," + short_double(p1) + "," + short_double(p2);
        return s + ")";
    }

    json to_json() const {
        json j{{"family", family}, {"max_terms", max_terms}, {"max_term_size", max_term_size}};
        if (two_class()) {
            j["p1"] = p1;
            j["p2"] = p2;
        }
        return j;
    }

    void validate() const {
        if (two_class() && !(p1 > 0 && p1 < 1 && p2 > 0 && p2 < 1))
            throw ConfigError("--p1 and --p2 must lie in (0,1)");
    }
};

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline void publish(AtomicOutputs& files, const fs::path& dir, RunManifest manifest, const Stopwatch& clock) {
    manifest.duration_seconds = clock.seconds();
    files.add(dir / "manifest.json", manifest.to_json().dump(2) + "\n");
    files.commit();
}

}  // namespace detail

/// Parses argv and runs one subcommand, writing human-readable output to out
/// and diagnostics to err.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Greedy decision trees on read-once DNF targets: exact growth, optimal trees, MIC sweeps"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    // verify-theory
    VerifyOptions vopt;
    bool inject_bug = false;
    std::string suite = "all";
    std::string verify_out;
    auto* verify = app.add_subcommand("verify-theory", "check TopDown optimality on conjunctions and two-term formulas");
    verify->add_option("--distributions", vopt.distributions, "random distributions in the conjunction suite")
        ->check(CLI::Range(1, 1000000))
        ->capture_default_str();
    verify->add_option("--max-k", vopt.max_k, "largest conjunction size")->check(CLI::Range(1, 10))->capture_default_str();
    verify->add_option("--max-term-size", vopt.max_term_size, "two-term suite bound on l <= m")
        ->check(CLI::Range(1, 8))
        ->capture_default_str();
    verify->add_option("--suite", suite)->check(CLI::IsMember({"all", "conjunction", "two-term"}))->capture_default_str();
    verify->add_option("--seed", vopt.seed)->capture_default_str();
    verify->add_option("--out", verify_out, "directory for report.json and manifest.json");
    verify->add_flag("--inject-bug", inject_bug, "flip the gain sign to self-test the checker");

    // opt-table
    detail::FamilyFlags opt_family;
    opt_family.max_terms = 2;
    opt_family.max_term_size = 3;
    int t_max = 8;
    std::string opt_out;
    auto* opt_cmd = app.add_subcommand("opt-table", "optimal error OPT(F, t) for every signature of a family");
    opt_family.add_to(opt_cmd);
    opt_cmd->add_option("--t-max", t_max)->check(CLI::Range(0, 1000))->capture_default_str();
    opt_cmd->add_option("--out", opt_out, "directory for opt_table.csv and manifest.json");

    // mic-sweep
    detail::FamilyFlags sweep_family;
    std::string policy_str = "topdown";
    std::string tie_str = "documented";
    int t_star = 100;
    int workers = 1;
    std::vector<double> edges;
    std::string sweep_out;
    auto* sweep_cmd = app.add_subcommand("mic-sweep", "MIC mean m(t*) for every formula of a family");
    sweep_family.add_to(sweep_cmd);
    sweep_cmd->add_option("--policy", policy_str)
        ->check(CLI::IsMember({"topdown", "bestfirst", "id3"}))
        ->capture_default_str();
    sweep_cmd->add_option("--t-star", t_star)->check(CLI::Range(1, 100000))->capture_default_str();
    sweep_cmd->add_option("--workers", workers)->check(CLI::Range(1, 1024))->capture_default_str();
    sweep_cmd->add_option("--tie-mode", tie_str)
        ->check(CLI::IsMember({"documented", "worst-case"}))
        ->capture_default_str();
    sweep_cmd->add_option("--bins", edges, "ascending histogram edges (default 0 1e-4 1e-3 1e-2 5e-2 inf)");
    sweep_cmd->add_option("--out", sweep_out, "directory for sweep.csv, histogram.json and manifest.json");

    // finite-sample
    std::string config_path;
    int fs_workers = 1;
    std::string fs_out;
    std::uint64_t fs_seed = 0;
    auto* fs_cmd = app.add_subcommand("finite-sample", "train-size sweep with trees grown from samples");
    fs_cmd->add_option("--config", config_path, "experiment config JSON (defaults to the built-in settings)")
        ->check(CLI::ExistingFile);
    fs_cmd->add_option("--workers", fs_workers)->check(CLI::Range(1, 1024))->capture_default_str();
    auto* fs_seed_opt = fs_cmd->add_option("--seed", fs_seed, "overrides the config seed");
    fs_cmd->add_option("--out", fs_out, "directory for results.csv, summary.csv and manifest.json");

    // grow
    std::string dnf_path, dist_path, grow_policy = "topdown", grow_out;
    int grow_t = 10;
    auto* grow_cmd = app.add_subcommand("grow", "grow one tree over the exact distribution");
    grow_cmd->add_option("--dnf", dnf_path, "target formula JSON")->required()->check(CLI::ExistingFile);
    grow_cmd->add_option("--dist", dist_path, "distribution JSON (default uniform)")->check(CLI::ExistingFile);
    grow_cmd->add_option("--policy", grow_policy)
        ->check(CLI::IsMember({"topdown", "bestfirst", "id3"}))
        ->capture_default_str();
    grow_cmd->add_option("--t", grow_t, "split budget")->check(CLI::Range(0, 100000))->capture_default_str();
    grow_cmd->add_option("--out", grow_out, "directory for tree.json, trace.csv and manifest.json");

    // report
    std::string tree_path, rep_dnf, rep_dist;
    auto* report_cmd = app.add_subcommand("report", "error and entropy of a stored tree");
    report_cmd->add_option("--tree", tree_path, "tree JSON")->required()->check(CLI::ExistingFile);
    report_cmd->add_option("--dnf", rep_dnf, "target formula JSON")->required()->check(CLI::ExistingFile);
    report_cmd->add_option("--dist", rep_dist, "distribution JSON (default uniform)")->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o, e2;
        const int code = app.exit(e, o, e2);
        out << o.str();
        err << e2.str();
        return code == 0 ? kExitOk : kExitUsage;
    }

    std::string command;
    for (int i = 0; i < argc; ++i) command += (i ? " " : "") + std::string(argv[i]);
    detail::Stopwatch clock;

    auto load_dist = [](const std::string& path, const ReadOnceDnf& f, std::size_t n) {
        ProductDistribution d = path.empty() ? ProductDistribution::uniform(n) : distribution_from_json(read_json_file(path));
        if (!d.covers(f)) throw ConfigError("distribution does not cover every variable of the formula");
        return d;
    };

    try {
        if (*verify) {
            if (suite == "conjunction") vopt.two_term = false;
            if (suite == "two-term") vopt.conjunctions = false;
            if (inject_bug) vopt.grow.gain_sign = -1.0;
            const VerifyReport rep = verify_theory(vopt);
            for (const auto& f : rep.failures) out << "FAIL " << f.name << ": " << f.detail << "\n";
            out << (rep.ok() ? "PASS" : "FAIL") << " verify-theory: " << rep.cases << " cases, "
                << rep.failures.size() << " failures, max |eps| = " << format_double(rep.max_abs_epsilon) << "\n";
            if (!verify_out.empty()) {
                json failures = json::array();
                for (const auto& f : rep.failures) failures.push_back({{"case", f.name}, {"detail", f.detail}});
                json report{{"cases", rep.cases},
                            {"max_abs_epsilon", rep.max_abs_epsilon},
                            {"failures", failures},
                            {"passed", rep.ok()}};
                AtomicOutputs files;
                files.add(fs::path(verify_out) / "report.json", report.dump(2) + "\n");
                json cfg{{"distributions", vopt.distributions}, {"n", vopt.n},        {"max_k", vopt.max_k},
                         {"max_term_size", vopt.max_term_size}, {"suite", suite},     {"inject_bug", inject_bug}};
                detail::publish(files, verify_out, {command, cfg, {vopt.seed}, "documented"}, clock);
            }
            return rep.ok() ? kExitOk : kExitVerifyFailed;
        }

        if (*opt_cmd) {
            opt_family.validate();
            std::ostringstream csv;
            csv << "signature,t,opt_error\n";
            if (opt_family.two_class()) {
                auto table = make_two_class_table(opt_family.p1, opt_family.p2);
                for (const auto& sig : enumerate_two_class_family(opt_family.max_terms, opt_family.max_term_size,
                                                                  opt_family.p1, opt_family.p2)) {
                    const auto series = table.opt_series(sig.term_profiles, t_max);
                    for (int t = 0; t <= t_max; ++t)
                        csv << to_string(sig) << ',' << t << ',' << format_double(series[static_cast<std::size_t>(t)])
                            << '\n';
                }
            } else {
                UniformOptTable table;
                for (const auto& sig : enumerate_uniform_family(opt_family.max_terms, opt_family.max_term_size)) {
                    const auto series = table.opt_series(sig.term_sizes, t_max);
                    for (int t = 0; t <= t_max; ++t)
                        csv << to_string(sig) << ',' << t << ',' << format_double(series[static_cast<std::size_t>(t)])
                            << '\n';
                }
            }
            if (opt_out.empty()) {
                out << csv.str();
            } else {
                AtomicOutputs files;
                files.add(fs::path(opt_out) / "opt_table.csv", csv.str());
                json cfg = opt_family.to_json();
                cfg["t_max"] = t_max;
                detail::publish(files, opt_out, {command, cfg, {}, "none"}, clock);
            }
            return kExitOk;
        }

        if (*sweep_cmd) {
            sweep_family.validate();
            const Policy policy = parse_policy(policy_str);
            const TieMode mode = parse_tie_mode(tie_str);
            Histogram bins = Histogram::standard();
            if (!edges.empty()) {
                try {
                    bins = Histogram::with_edges(edges);
                } catch (const std::invalid_argument& e) {
                    throw ConfigError(e.what());
                }
            }
            SweepReport rep;
            if (sweep_family.two_class()) {
                rep = sweep(policy,
                            enumerate_two_class_family(sweep_family.max_terms, sweep_family.max_term_size,
                                                       sweep_family.p1, sweep_family.p2),
                            sweep_family.name(), t_star, bins, workers, mode);
            } else {
                rep = sweep(policy, enumerate_uniform_family(sweep_family.max_terms, sweep_family.max_term_size),
                            sweep_family.name(), t_star, bins, workers, mode);
            }
            out << "family " << rep.family << ", policy " << policy_name(policy) << ", " << rep.records.size()
                << " formulas\n";
            for (std::size_t b = 0; b < rep.histogram.counts.size(); ++b)
                out << "  [" << detail::short_double(rep.histogram.edges[b]) << ", "
                    << detail::short_double(rep.histogram.edges[b + 1]) << "): " << rep.histogram.counts[b] << "\n";
            if (!sweep_out.empty()) {
                AtomicOutputs files;
                files.add(fs::path(sweep_out) / "sweep.csv", sweep_csv(rep));
                files.add(fs::path(sweep_out) / "histogram.json", histogram_json(rep).dump(2) + "\n");
                json cfg = sweep_family.to_json();
                cfg["policy"] = policy_str;
                cfg["t_star"] = t_star;
                cfg["workers"] = workers;
                cfg["bins"] = histogram_json(rep)["bins"];
                detail::publish(files, sweep_out, {command, cfg, {}, tie_str}, clock);
            }
            return kExitOk;
        }

        if (*fs_cmd) {
            ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{}
                                                       : experiment_config_from_json(read_json_file(config_path));
            if (*fs_seed_opt) cfg.seed = fs_seed;
            const ExperimentResults res = run_experiment(cfg, fs_workers);
            out << "policy,train_size,mean_test_error,std_test_error\n";
            for (const auto& c : res.cells)
                out << policy_name(c.policy) << ',' << c.train_size << ',' << format_double(c.mean_test_error) << ','
                    << format_double(c.std_test_error) << '\n';
            if (!fs_out.empty()) {
                AtomicOutputs files;
                files.add(fs::path(fs_out) / "results.csv", experiment_csv(res));
                files.add(fs::path(fs_out) / "summary.csv", experiment_summary_csv(res));
                std::vector<std::uint64_t> seeds;
                for (const auto& r : res.rows)
                    if (seeds.empty() || seeds.back() != r.seed) seeds.push_back(r.seed);
                std::sort(seeds.begin(), seeds.end());
                seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
                json cj = experiment_config_to_json(cfg);
                cj["workers"] = fs_workers;
                detail::publish(files, fs_out, {command, cj, seeds, "documented"}, clock);
            }
            return kExitOk;
        }

        if (*grow_cmd) {
            auto [f, n] = dnf_from_json(read_json_file(dnf_path));
            const ProductDistribution dist = load_dist(dist_path, f, n);
            const GrowthResult r = grow(parse_policy(grow_policy), f, dist, grow_t);
            out << "internal nodes " << r.tree.internal_count() << ", error " << format_double(r.tree.error())
                << "\n";
            if (grow_out.empty()) {
                out << tree_to_json(r.tree).dump(2) << "\n";
            } else {
                AtomicOutputs files;
                files.add(fs::path(grow_out) / "tree.json", tree_to_json(r.tree).dump(2) + "\n");
                files.add(fs::path(grow_out) / "trace.csv", trace_csv(r.trace));
                json cfg{{"dnf", dnf_to_json(f, n)}, {"dist", distribution_to_json(dist)},
                         {"policy", grow_policy},    {"t", grow_t}};
                detail::publish(files, grow_out, {command, cfg, {}, "documented"}, clock);
            }
            return kExitOk;
        }

        if (*report_cmd) {
            auto [f, n] = dnf_from_json(read_json_file(rep_dnf));
            const ProductDistribution dist = load_dist(rep_dist, f, n);
            const DecisionTree tree = tree_from_json(read_json_file(tree_path), f, dist);
            out << "internal_nodes " << tree.internal_count() << "\n"
                << "error " << format_double(tree.error()) << "\n"
                << "entropy " << format_double(tree.entropy_value()) << "\n";
            return kExitOk;
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::out_of_range& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::length_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitVerifyFailed;
    }
    return kExitUsage;
}

}  // namespace tdmic
