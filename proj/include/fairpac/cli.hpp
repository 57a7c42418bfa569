// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The fairpac Authors

#pragma once

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fairpac/error.hpp"
#include "fairpac/harness.hpp"
#include "fairpac/instances.hpp"
#include "fairpac/metrics.hpp"
#include "fairpac/verify.hpp"

namespace fairpac {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

namespace detail {

/// FAIRPAC_SEED, when set, replaces every configured base seed.
inline std::optional<std::uint64_t> seed_from_environment() {
    const char* raw = std::getenv("FAIRPAC_SEED");
    if (raw == nullptr || *raw == '\0') return std::nullopt;
    std::uint64_t value = 0;
    const std::string_view text(raw);
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw InvalidInput("FAIRPAC_SEED must be a non-negative integer, got '" + std::string(text) + "'");
    }
    return value;
}

struct SourceFlags {
    std::string synthetic;
    bool hard = false;
    std::string csv;
    std::string mapping;
    std::size_t n = 10;
    std::vector<double> group_pattern{0.8, 0.2};
    std::uint64_t instance_seed = 0;
    double hard_eps = 0.4;
    std::string hard_p = "1";

    void attach(CLI::App* cmd) {
        auto* syn = cmd->add_option("--synthetic", synthetic, "Synthetic family: geo, arith, steps or har");
        auto* hrd = cmd->add_flag("--hard", hard, "Use the three-level hard instance");
        auto* file = cmd->add_option("--csv", csv, "Instance CSV file");
        syn->excludes(hrd)->excludes(file);
        hrd->excludes(file);
        cmd->add_option("--mapping", mapping, "Column mapping JSON for --csv");
        cmd->add_option("--n", n, "Number of items")->capture_default_str();
        cmd->add_option("--group-pattern", group_pattern, "Group proportions of a synthetic instance")
            ->delimiter(',')
            ->capture_default_str();
        cmd->add_option("--instance-seed", instance_seed, "Seed of the synthetic group layout")->capture_default_str();
        cmd->add_option("--hard-eps", hard_eps, "Tolerance of the hard instance")->capture_default_str();
        cmd->add_option("--hard-p", hard_p, "Within-group norm order of the hard instance")->capture_default_str();
    }

    InstanceSource source() const {
        if (!csv.empty()) {
            CsvSource src;
            src.path = csv;
            if (!mapping.empty()) src.mapping = load_mapping(mapping);
            return src;
        }
        if (hard) return HardSource{n, hard_eps, NormOrder::parse(hard_p), 1e-6};
        if (synthetic.empty()) throw InvalidInput("one of --synthetic, --hard or --csv is required");
        SyntheticSource src;
        src.kind = parse_synthetic_kind(synthetic);
        src.n = n;
        src.group_pattern = group_pattern;
        src.seed = instance_seed;
        return src;
    }
};

inline PhiMode parse_phi_mode(const std::string& text, std::vector<double>& phi) {
    if (text == "one") return PhiMode::one;
    if (text == "group-size") return PhiMode::group_size;
    phi.clear();
    std::string token;
    for (char c : text + ",") {
        if (c == ',') {
            const auto v = parse_double(token);
            if (!v) throw InvalidInput("phi mode must be one, group-size or a comma-separated list, got '" + text + "'");
            phi.push_back(*v);
            token.clear();
        } else {
            token += c;
        }
    }
    return PhiMode::explicit_list;
}

inline int cmd_rank(const SourceFlags& flags, const std::string& algo, const std::string& p, const std::string& q,
                    const std::string& phi_mode, double eps, double delta, std::uint64_t seed, std::ostream& out) {
    ExperimentConfig cfg;
    cfg.source = flags.source();
    cfg.algorithm = parse_algorithm(algo);
    cfg.p = NormOrder::parse(p);
    cfg.q = NormOrder::parse(q);
    cfg.phi_mode = parse_phi_mode(phi_mode, cfg.phi);
    cfg.epsilon = eps;
    cfg.delta = delta;
    cfg.base_seed = seed_from_environment().value_or(seed);
    cfg.validate();

    const Instance inst = build_instance(cfg);
    const auto spec = fairness_spec(cfg, inst.groups);
    ComparisonOracle oracle(inst.scores, cfg.base_seed, 0);
    const auto outcome = run_ranker(cfg.algorithm, oracle, inst.groups, cfg.epsilon, cfg.delta, spec);
    const auto r = outcome.ranking();

    std::vector<std::string> labels;
    for (std::size_t i : outcome.order) labels.push_back(inst.label(i));
    const nlohmann::json doc{{"algorithm", to_string(cfg.algorithm)},
                             {"dataset", cfg.dataset_name()},
                             {"n", inst.size()},
                             {"p", cfg.p.to_string()},
                             {"q", cfg.q.to_string()},
                             {"epsilon", cfg.epsilon},
                             {"delta", cfg.delta},
                             {"seed", cfg.base_seed},
                             {"ranking", outcome.order},
                             {"labels", labels},
                             {"queries", outcome.queries_used},
                             {"err_fair", fair_error(r, inst.scores, inst.groups, spec)},
                             {"err_group", group_errors(r, inst.scores, inst.groups, spec.p)},
                             {"best_ranking_error", best_ranking_error(r, inst.scores)}};
    out << doc.dump(2) << '\n';
    return kExitOk;
}

inline int cmd_sweep(const std::string& config_path, const std::string& out_path, std::string manifest_path,
                     std::size_t workers, std::ostream& out) {
    auto configs = load_configs(config_path);
    if (const auto seed = seed_from_environment()) {
        for (auto& c : configs) c.base_seed = *seed;
    }
    const auto start = std::chrono::steady_clock::now();
    std::vector<SweepResult> results;
    for (const auto& c : configs) results.push_back(sweep(c, workers));

    std::size_t rows = 0;
    if (out_path.empty() || out_path == "-") {
        rows = write_results_csv(out, results);
    } else {
        std::ofstream file(out_path);
        if (!file) throw std::runtime_error("cannot open output file '" + out_path + "'");
        rows = write_results_csv(file, results);
        if (!file.flush()) throw std::runtime_error("failed writing '" + out_path + "'");
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (manifest_path.empty() && !out_path.empty() && out_path != "-") manifest_path = out_path + ".manifest.json";
    if (!manifest_path.empty()) {
        std::ofstream file(manifest_path);
        if (!file) throw std::runtime_error("cannot open manifest file '" + manifest_path + "'");
        file << run_manifest(configs, out_path, rows, wall).dump(2) << '\n';
    }
    return kExitOk;
}

struct KlCase {
    std::size_t n;
    double eps;
    NormOrder p;
};

inline int cmd_verify(bool metrics, bool kl, std::optional<std::size_t> n, std::optional<double> eps,
                      const std::string& p, std::size_t tuples, std::uint64_t alternatives, std::uint64_t seed,
                      std::ostream& out) {
    if (!metrics && !kl) metrics = kl = true;
    bool ok = true;
    if (metrics) {
        const auto rep = run_metric_suite(tuples, seed);
        out << "metrics: " << rep.tuples << " tuples, " << rep.mismatches << " mismatches, "
            << rep.brute_force_failures << " brute-force failures, max |diff| " << format_double(rep.max_abs_diff)
            << (rep.passed() ? " PASS" : " FAIL") << '\n';
        ok = ok && rep.passed();
    }
    if (kl) {
        std::vector<KlCase> cases;
        if (n || eps) {
            cases.push_back({n.value_or(8), eps.value_or(0.4), NormOrder::parse(p)});
        } else {
            cases = {{8, 0.4, NormOrder(1.0)}, {16, 0.2, NormOrder(1.0)}, {16, 0.3, NormOrder(2.0)}};
        }
        for (const auto& c : cases) {
            const auto rep = verify_kl_bound(c.n, c.eps, c.p, alternatives, seed);
            out << "kl: n=" << c.n << " eps=" << format_double(c.eps) << " p=" << c.p.to_string()
                << " eps_tilde=" << format_double(rep.epsilon_tilde) << " max_kl=" << format_double(rep.max_kl)
                << " bound=" << format_double(rep.bound) << " alternatives=" << rep.alternatives_checked
                << (rep.passed() ? " PASS" : " FAIL") << '\n';
            ok = ok && rep.passed();
        }
    }
    return ok ? kExitOk : kExitFailure;
}

inline int cmd_gen(const SourceFlags& flags, const std::string& out_path, std::ostream& out) {
    if (!flags.csv.empty()) throw InvalidInput("gen takes --synthetic or --hard, not --csv");
    ExperimentConfig cfg;
    cfg.source = flags.source();
    Instance inst = [&] {
        if (const auto* h = std::get_if<HardSource>(&cfg.source)) {
            return gen_hard_instance(h->n, h->epsilon, h->p, h->theta_margin).true_instance();
        }
        const auto& s = std::get<SyntheticSource>(cfg.source);
        return gen_synthetic(s.kind, s.n, s.group_pattern, s.seed, s.params);
    }();
    if (out_path.empty() || out_path == "-") {
        write_csv(out, inst);
    } else {
        write_csv(out_path, inst);
    }
    return kExitOk;
}

}  // namespace detail

/// Entry point of the `fairpac` tool. Returns 0 on success, 1 when a
/// verification or run fails, 2 on usage or configuration errors.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Fair ranking from noisy pairwise comparisons", "fairpac"};
    app.require_subcommand(1);
    app.set_version_flag("--version",
#ifdef FAIRPAC_VERSION
                         FAIRPAC_VERSION
#else
                         "unknown"
#endif
    );

    auto* rank = app.add_subcommand("rank", "Rank one instance and print the result as JSON");
    detail::SourceFlags rank_src;
    rank_src.attach(rank);
    std::string algo = "group-aware", p = "1", q = "1", phi_mode = "one";
    double eps = 0.1, delta = 0.1;
    std::uint64_t seed = 0;
    rank->add_option("--algo", algo, "group-blind or group-aware")->capture_default_str();
    rank->add_option("--p", p, "Within-group norm order (number or inf)")->capture_default_str();
    rank->add_option("--q", q, "Across-group norm order (number or inf)")->capture_default_str();
    rank->add_option("--phi-mode", phi_mode, "one, group-size or a comma-separated list")->capture_default_str();
    rank->add_option("--eps", eps, "Target tolerance")->capture_default_str();
    rank->add_option("--delta", delta, "Failure probability")->capture_default_str();
    rank->add_option("--seed", seed, "Oracle seed")->capture_default_str();

    auto* sweep_cmd = app.add_subcommand("sweep", "Run a configured multi-trial sweep and write results CSV");
    std::string config_path, out_path, manifest_path;
    std::size_t workers = 0;
    sweep_cmd->add_option("--config", config_path, "Experiment config JSON")->required();
    sweep_cmd->add_option("--out", out_path, "Results CSV path (default stdout)");
    sweep_cmd->add_option("--manifest", manifest_path, "Run manifest path (default <out>.manifest.json)");
    sweep_cmd->add_option("--workers", workers, "Worker threads (default from config)");

    auto* verify_cmd = app.add_subcommand("verify", "Run the metric brute-force suite and the KL bound suite");
    bool v_metrics = false, v_kl = false;
    std::optional<std::size_t> v_n;
    std::optional<double> v_eps;
    std::string v_p = "1";
    std::size_t v_tuples = 500;
    std::uint64_t v_alternatives = 10000, v_seed = 0;
    verify_cmd->add_flag("--metrics", v_metrics, "Run the metric suite only");
    verify_cmd->add_flag("--kl", v_kl, "Run the KL bound suite only");
    verify_cmd->add_option("--n", v_n, "Hard-instance size for a single KL case");
    verify_cmd->add_option("--eps", v_eps, "Hard-instance tolerance for a single KL case");
    verify_cmd->add_option("--p", v_p, "Norm order for a single KL case")->capture_default_str();
    verify_cmd->add_option("--tuples", v_tuples, "Random tuples in the metric suite")->capture_default_str();
    verify_cmd->add_option("--alternatives", v_alternatives, "Cap on alternatives per KL case")
        ->capture_default_str();
    verify_cmd->add_option("--seed", v_seed, "Seed of the random suites")->capture_default_str();

    auto* gen = app.add_subcommand("gen", "Write a synthetic or hard instance as CSV");
    detail::SourceFlags gen_src;
    gen_src.attach(gen);
    std::string gen_out;
    gen->add_option("--out", gen_out, "Output CSV path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion& e) {
        out << e.what() << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        if (rank->parsed()) return detail::cmd_rank(rank_src, algo, p, q, phi_mode, eps, delta, seed, out);
        if (sweep_cmd->parsed()) return detail::cmd_sweep(config_path, out_path, manifest_path, workers, out);
        if (verify_cmd->parsed()) {
            return detail::cmd_verify(v_metrics, v_kl, v_n, v_eps, v_p, v_tuples, v_alternatives, v_seed, out);
        }
        if (gen->parsed()) return detail::cmd_gen(gen_src, gen_out, out);
    } catch (const InvalidInput& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const SchemaError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace fairpac
