// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The fairpac Authors

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairpac/error.hpp"
#include "fairpac/instances.hpp"
#include "fairpac/metrics.hpp"
#include "fairpac/oracle.hpp"
#include "fairpac/rankers.hpp"
#include "fairpac/types.hpp"

namespace fairpac {

// ─── Configuration ────────────────────────────────────────────

enum class Algorithm { group_blind, group_aware };

inline Algorithm parse_algorithm(std::string_view name) {
    if (name == "group-blind") return Algorithm::group_blind;
    if (name == "group-aware") return Algorithm::group_aware;
    throw InvalidInput("unknown algorithm '" + std::string(name) + "' (expected group-blind or group-aware)");
}

inline std::string to_string(Algorithm a) { return a == Algorithm::group_blind ? "group-blind" : "group-aware"; }

enum class PhiMode { one, group_size, explicit_list };

inline std::string to_string(PhiMode m) {
    switch (m) {
        case PhiMode::one: return "one";
        case PhiMode::group_size: return "group-size";
        case PhiMode::explicit_list: return "explicit";
    }
    return "one";
}

struct CsvSource {
    std::string path;
    ColumnMapping mapping;
};

struct SyntheticSource {
    SyntheticKind kind = SyntheticKind::geo;
    std::size_t n = 10;
    std::vector<double> group_pattern{0.8, 0.2};
    std::uint64_t seed = 0;
    SyntheticParams params;
};

struct HardSource {
    std::size_t n = 8;
    double epsilon = 0.4;
    NormOrder p;
    double theta_margin = 1e-6;
};

using InstanceSource = std::variant<CsvSource, SyntheticSource, HardSource>;

struct ExperimentConfig {
    InstanceSource source = SyntheticSource{};
    std::string dataset;
    Algorithm algorithm = Algorithm::group_aware;
    NormOrder p;
    NormOrder q;
    PhiMode phi_mode = PhiMode::one;
    std::vector<double> phi;  // used when phi_mode == explicit_list
    double epsilon = 0.1;
    double delta = 0.1;
    std::size_t trials = 1;
    std::uint64_t base_seed = 0;
    /// Query budgets at which the error curve is sampled, strictly increasing.
    std::vector<std::uint64_t> checkpoints;
    std::size_t workers = 1;

    void validate() const {
        PacParams{epsilon, delta}.validate();
        if (trials == 0) throw InvalidInput("trials must be >= 1");
        if (workers == 0) throw InvalidInput("workers must be >= 1");
        for (std::size_t k = 0; k < checkpoints.size(); ++k) {
            if (checkpoints[k] == 0) throw InvalidInput("checkpoint budgets must be positive");
            if (k > 0 && checkpoints[k] <= checkpoints[k - 1]) {
                throw InvalidInput("checkpoint budgets must be strictly increasing");
            }
        }
        if (phi_mode == PhiMode::explicit_list && phi.empty()) {
            throw InvalidInput("explicit phi mode needs a phi list");
        }
    }

    std::string dataset_name() const {
        if (!dataset.empty()) return dataset;
        if (const auto* s = std::get_if<SyntheticSource>(&source)) return to_string(s->kind);
        if (const auto* c = std::get_if<CsvSource>(&source)) return std::filesystem::path(c->path).stem().string();
        return "hard";
    }
};

namespace detail {

inline NormOrder norm_from_json(const nlohmann::json& v) {
    if (v.is_string()) return NormOrder::parse(v.get<std::string>());
    if (v.is_number()) return NormOrder(v.get<double>());
    throw SchemaError("norm order must be a number or \"inf\"");
}

inline nlohmann::json norm_to_json(NormOrder p) {
    if (p.is_infinite()) return "inf";
    return p.value();
}

inline void reject_unknown_keys(const nlohmann::json& doc, const std::set<std::string>& known, const char* where) {
    for (const auto& [key, value] : doc.items()) {
        if (!known.contains(key)) throw SchemaError(std::string("unknown key '") + key + "' in " + where);
    }
}

inline InstanceSource source_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
    if (!doc.is_object() || !doc.contains("type")) throw SchemaError("source must be an object with a \"type\"");
    const auto type = doc.at("type").get<std::string>();
    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_absolute() || base_dir.empty() ? path.string() : (base_dir / path).string();
    };
    if (type == "csv") {
        reject_unknown_keys(doc, {"type", "path", "mapping", "mapping_file"}, "csv source");
        CsvSource src;
        src.path = resolve(doc.at("path").get<std::string>());
        if (doc.contains("mapping")) src.mapping = ColumnMapping::from_json(doc.at("mapping"));
        if (doc.contains("mapping_file")) src.mapping = load_mapping(resolve(doc.at("mapping_file").get<std::string>()));
        return src;
    }
    if (type == "synthetic") {
        reject_unknown_keys(doc, {"type", "kind", "n", "group_pattern", "seed", "geo_ratio", "arith_end", "arith_step",
                                  "step_width"},
                            "synthetic source");
        SyntheticSource src;
        src.kind = parse_synthetic_kind(doc.at("kind").get<std::string>());
        src.n = doc.at("n").get<std::size_t>();
        if (doc.contains("group_pattern")) src.group_pattern = doc.at("group_pattern").get<std::vector<double>>();
        if (doc.contains("seed")) src.seed = doc.at("seed").get<std::uint64_t>();
        if (doc.contains("geo_ratio")) src.params.geo_ratio = doc.at("geo_ratio").get<double>();
        if (doc.contains("arith_end")) src.params.arith_end = doc.at("arith_end").get<double>();
        if (doc.contains("arith_step")) src.params.arith_step = doc.at("arith_step").get<double>();
        if (doc.contains("step_width")) src.params.step_width = doc.at("step_width").get<std::size_t>();
        return src;
    }
    if (type == "hard") {
        reject_unknown_keys(doc, {"type", "n", "epsilon", "p", "theta_margin"}, "hard source");
        HardSource src;
        src.n = doc.at("n").get<std::size_t>();
        src.epsilon = doc.at("epsilon").get<double>();
        if (doc.contains("p")) src.p = norm_from_json(doc.at("p"));
        if (doc.contains("theta_margin")) src.theta_margin = doc.at("theta_margin").get<double>();
        return src;
    }
    throw SchemaError("unknown source type '" + type + "' (expected csv, synthetic or hard)");
}

inline nlohmann::json source_to_json(const InstanceSource& source) {
    return std::visit(
        [](const auto& src) -> nlohmann::json {
            using T = std::decay_t<decltype(src)>;
            if constexpr (std::is_same_v<T, CsvSource>) {
                return {{"type", "csv"}, {"path", src.path}, {"mapping", src.mapping.to_json()}};
            } else if constexpr (std::is_same_v<T, SyntheticSource>) {
                nlohmann::json doc{{"type", "synthetic"},
                                   {"kind", to_string(src.kind)},
                                   {"n", src.n},
                                   {"group_pattern", src.group_pattern},
                                   {"seed", src.seed},
                                   {"geo_ratio", src.params.geo_ratio},
                                   {"arith_end", src.params.arith_end},
                                   {"step_width", src.params.step_width}};
                if (src.params.arith_step) doc["arith_step"] = *src.params.arith_step;
                return doc;
            } else {
                return {{"type", "hard"},
                        {"n", src.n},
                        {"epsilon", src.epsilon},
                        {"p", norm_to_json(src.p)},
                        {"theta_margin", src.theta_margin}};
            }
        },
        source);
}

}  // namespace detail

/// Parses a sweep configuration. "algorithm" may be a single name or a list;
/// one config is returned per listed algorithm. Relative paths resolve
/// against `base_dir`.
inline std::vector<ExperimentConfig> configs_from_json(const nlohmann::json& doc,
                                                       const std::filesystem::path& base_dir = {}) {
    if (!doc.is_object()) throw SchemaError("experiment config must be a JSON object");
    detail::reject_unknown_keys(doc,
                                {"source", "dataset", "algorithm", "p", "q", "phi_mode", "phi", "epsilon", "delta",
                                 "trials", "base_seed", "checkpoints", "workers"},
                                "experiment config");
    ExperimentConfig base;
    std::vector<Algorithm> algorithms;
    try {
        base.source = detail::source_from_json(doc.at("source"), base_dir);
        if (doc.contains("dataset")) base.dataset = doc.at("dataset").get<std::string>();
        const auto& algo = doc.at("algorithm");
        if (algo.is_array()) {
            for (const auto& a : algo) algorithms.push_back(parse_algorithm(a.get<std::string>()));
        } else {
            algorithms.push_back(parse_algorithm(algo.get<std::string>()));
        }
        if (algorithms.empty()) throw SchemaError("algorithm list is empty");
        base.p = detail::norm_from_json(doc.at("p"));
        base.q = detail::norm_from_json(doc.at("q"));
        if (doc.contains("phi_mode")) {
            const auto& mode = doc.at("phi_mode");
            if (mode.is_array()) {
                base.phi_mode = PhiMode::explicit_list;
                base.phi = mode.get<std::vector<double>>();
            } else {
                const auto name = mode.get<std::string>();
                if (name == "one") {
                    base.phi_mode = PhiMode::one;
                } else if (name == "group-size") {
                    base.phi_mode = PhiMode::group_size;
                } else if (name == "explicit") {
                    base.phi_mode = PhiMode::explicit_list;
                } else {
                    throw SchemaError("unknown phi_mode '" + name + "'");
                }
            }
        }
        if (doc.contains("phi")) base.phi = doc.at("phi").get<std::vector<double>>();
        base.epsilon = doc.at("epsilon").get<double>();
        base.delta = doc.at("delta").get<double>();
        if (doc.contains("trials")) base.trials = doc.at("trials").get<std::size_t>();
        if (doc.contains("base_seed")) base.base_seed = doc.at("base_seed").get<std::uint64_t>();
        if (doc.contains("checkpoints")) base.checkpoints = doc.at("checkpoints").get<std::vector<std::uint64_t>>();
        if (doc.contains("workers")) base.workers = doc.at("workers").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed experiment config: ") + e.what());
    }
    std::vector<ExperimentConfig> out;
    for (Algorithm a : algorithms) {
        auto cfg = base;
        cfg.algorithm = a;
        cfg.validate();
        out.push_back(std::move(cfg));
    }
    return out;
}

inline std::vector<ExperimentConfig> load_configs(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open config file '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return configs_from_json(doc, std::filesystem::path(path).parent_path());
}

inline nlohmann::json to_json(const ExperimentConfig& cfg) {
    nlohmann::json doc{{"source", detail::source_to_json(cfg.source)},
                       {"dataset", cfg.dataset_name()},
                       {"algorithm", to_string(cfg.algorithm)},
                       {"p", detail::norm_to_json(cfg.p)},
                       {"q", detail::norm_to_json(cfg.q)},
                       {"epsilon", cfg.epsilon},
                       {"delta", cfg.delta},
                       {"trials", cfg.trials},
                       {"base_seed", cfg.base_seed},
                       {"checkpoints", cfg.checkpoints},
                       {"workers", cfg.workers}};
    if (cfg.phi_mode == PhiMode::explicit_list) {
        doc["phi_mode"] = cfg.phi;
    } else {
        doc["phi_mode"] = to_string(cfg.phi_mode);
    }
    return doc;
}

/// Materializes the configured instance with scores normalized to (0, 1].
inline Instance build_instance(const ExperimentConfig& cfg) {
    return std::visit(
        [](const auto& src) -> Instance {
            using T = std::decay_t<decltype(src)>;
            if constexpr (std::is_same_v<T, CsvSource>) {
                return load_csv(src.path, src.mapping).instance;
            } else if constexpr (std::is_same_v<T, SyntheticSource>) {
                auto inst = gen_synthetic(src.kind, src.n, src.group_pattern, src.seed, src.params);
                return Instance(normalize_scores(inst.scores), std::move(inst.groups), std::move(inst.labels));
            } else {
                auto inst = gen_hard_instance(src.n, src.epsilon, src.p, src.theta_margin).true_instance();
                return Instance(normalize_scores(inst.scores), std::move(inst.groups), std::move(inst.labels));
            }
        },
        cfg.source);
}

inline FairnessSpec fairness_spec(const ExperimentConfig& cfg, const GroupAssignment& groups) {
    FairnessSpec spec;
    switch (cfg.phi_mode) {
        case PhiMode::one: spec = FairnessSpec::unit_phi(cfg.p, cfg.q, groups); break;
        case PhiMode::group_size: spec = FairnessSpec::group_size_phi(cfg.p, cfg.q, groups); break;
        case PhiMode::explicit_list: spec = FairnessSpec{cfg.p, cfg.q, cfg.phi}; break;
    }
    spec.validate_against(groups);
    return spec;
}

// ─── Running ──────────────────────────────────────────────────

template <PairwiseOracle O>
RankOutcome run_ranker(Algorithm algorithm, O& oracle, const GroupAssignment& groups, double epsilon, double delta,
                       const FairnessSpec& spec) {
    if (algorithm == Algorithm::group_blind) return group_blind_rank(oracle, groups.size(), epsilon, delta, spec);
    return group_aware_rank(oracle, groups, epsilon, delta, spec);
}

inline std::uint64_t ranker_budget(Algorithm algorithm, const GroupAssignment& groups, double epsilon, double delta,
                                   const FairnessSpec& spec) {
    if (algorithm == Algorithm::group_blind) {
        return group_blind_budget(groups.size(), epsilon, delta, spec.p, spec.q);
    }
    return group_aware_budget(groups, epsilon, delta, spec);
}

/// Smallest top-level tolerance whose worst-case budget fits in `budget`,
/// found by bisection in log space. When even one sample per decision
/// exceeds the budget, returns the coarsest tolerance searched.
inline double solve_tolerance_for_budget(Algorithm algorithm, const GroupAssignment& groups, double delta,
                                         const FairnessSpec& spec, std::uint64_t budget) {
    double lo = 1e-7;
    double hi = 1e7;
    auto cost = [&](double eps) -> std::uint64_t {
        try {
            return ranker_budget(algorithm, groups, eps, delta, spec);
        } catch (const InvalidInput&) {
            return std::numeric_limits<std::uint64_t>::max();  // budget overflow
        }
    };
    if (cost(hi) > budget) return hi;
    if (cost(lo) <= budget) return lo;
    for (int iter = 0; iter < 200 && hi / lo > 1.0 + 1e-12; ++iter) {
        const double mid = std::sqrt(lo * hi);
        if (cost(mid) <= budget) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

struct CurvePoint {
    std::uint64_t checkpoint = 0;
    std::uint64_t queries_used = 0;
    double tolerance = 0.0;
    double err_fair = 0.0;
    std::vector<double> err_group;
};

struct TrialRecord {
    std::uint64_t trial_id = 0;
    std::uint64_t queries_total = 0;
    double err_fair = 0.0;
    std::vector<double> err_group;
    std::vector<CurvePoint> curve;
};

/// One seeded trial on a prepared instance. The full run uses the stream
/// (base_seed, trial_id); checkpoint k re-runs the ranker on the stream
/// (derive_stream_seed(base_seed, k + 1), trial_id) with its tolerance
/// solved so the worst-case budget fits the checkpoint. Without
/// checkpoints the curve holds the full run alone.
inline TrialRecord run_trial(const ExperimentConfig& cfg, const Instance& inst, std::uint64_t trial_id) {
    const auto spec = fairness_spec(cfg, inst.groups);
    const auto& groups = inst.groups;
    auto evaluate = [&](const RankOutcome& outcome, CurvePoint& point) {
        const auto r = outcome.ranking();
        point.queries_used = outcome.queries_used;
        point.err_fair = fair_error(r, inst.scores, groups, spec);
        point.err_group = group_errors(r, inst.scores, groups, spec.p);
    };

    TrialRecord record;
    record.trial_id = trial_id;
    {
        ComparisonOracle oracle(inst.scores, cfg.base_seed, trial_id);
        const auto outcome = run_ranker(cfg.algorithm, oracle, groups, cfg.epsilon, cfg.delta, spec);
        CurvePoint full;
        full.tolerance = cfg.epsilon;
        evaluate(outcome, full);
        full.checkpoint = full.queries_used;
        record.queries_total = full.queries_used;
        record.err_fair = full.err_fair;
        record.err_group = full.err_group;
        if (cfg.checkpoints.empty()) record.curve.push_back(std::move(full));
    }
    for (std::size_t k = 0; k < cfg.checkpoints.size(); ++k) {
        CurvePoint point;
        point.checkpoint = cfg.checkpoints[k];
        point.tolerance = solve_tolerance_for_budget(cfg.algorithm, groups, cfg.delta, spec, point.checkpoint);
        ComparisonOracle oracle(inst.scores, derive_stream_seed(cfg.base_seed, k + 1), trial_id);
        evaluate(run_ranker(cfg.algorithm, oracle, groups, point.tolerance, cfg.delta, spec), point);
        record.curve.push_back(std::move(point));
    }
    return record;
}

inline TrialRecord run_trial(const ExperimentConfig& cfg, std::uint64_t trial_id) {
    cfg.validate();
    return run_trial(cfg, build_instance(cfg), trial_id);
}

// ─── Sweeps ───────────────────────────────────────────────────

struct AggregateRow {
    std::uint64_t checkpoint = 0;
    double mean_fair = 0.0;
    double std_fair = 0.0;
    std::vector<double> mean_group;
    std::vector<double> std_group;
};

struct SweepResult {
    ExperimentConfig config;
    std::size_t n = 0;
    std::size_t num_groups = 0;
    std::vector<TrialRecord> records;
    std::vector<AggregateRow> aggregate;
};

namespace detail {

/// Mean and sample standard deviation (0 for a single value).
inline std::pair<double, double> mean_and_std(std::span<const double> xs) {
    double sum = 0.0;
    for (double x : xs) sum += x;
    const double mean = sum / static_cast<double>(xs.size());
    if (xs.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

}  // namespace detail

/// Aggregates curve point k across trials. Checkpoint values are taken
/// from the first trial (they coincide whenever checkpoints are configured).
inline std::vector<AggregateRow> aggregate_records(std::span<const TrialRecord> records, std::size_t num_groups) {
    std::vector<AggregateRow> rows;
    if (records.empty()) return rows;
    const std::size_t points = records.front().curve.size();
    for (std::size_t k = 0; k < points; ++k) {
        AggregateRow row;
        row.checkpoint = records.front().curve[k].checkpoint;
        std::vector<double> xs;
        for (const auto& r : records) xs.push_back(r.curve[k].err_fair);
        std::tie(row.mean_fair, row.std_fair) = detail::mean_and_std(xs);
        for (std::size_t h = 0; h < num_groups; ++h) {
            xs.clear();
            for (const auto& r : records) xs.push_back(r.curve[k].err_group[h]);
            const auto [m, s] = detail::mean_and_std(xs);
            row.mean_group.push_back(m);
            row.std_group.push_back(s);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Runs cfg.trials independent trials on `workers` threads. Records are
/// stored by trial id, so the result does not depend on the worker count.
inline SweepResult sweep(const ExperimentConfig& cfg, std::size_t workers = 0) {
    cfg.validate();
    const Instance inst = build_instance(cfg);
    fairness_spec(cfg, inst.groups);
    if (workers == 0) workers = cfg.workers;
    workers = std::max<std::size_t>(1, std::min(workers, cfg.trials));

    SweepResult result;
    result.config = cfg;
    result.n = inst.size();
    result.num_groups = inst.groups.num_groups();
    result.records.resize(cfg.trials);
    std::vector<std::exception_ptr> failures(cfg.trials);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t t = next++; t < cfg.trials; t = next++) {
            try {
                result.records[t] = run_trial(cfg, inst, t);
            } catch (...) {
                failures[t] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    for (const auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }
    result.aggregate = aggregate_records(result.records, result.num_groups);
    return result;
}

// ─── Output ───────────────────────────────────────────────────

inline std::vector<std::string> results_header(std::size_t num_groups) {
    std::vector<std::string> cols{"algo",  "dataset", "n",     "p",
                                  "q",     "phi_mode", "epsilon", "delta",
                                  "trial", "checkpoint_queries", "err_fair"};
    for (std::size_t h = 0; h < num_groups; ++h) cols.push_back("err_group_" + std::to_string(h));
    return cols;
}

/// Writes trial rows (one per trial and curve point) followed by "mean"
/// and "std" aggregate rows per curve point, for each result in turn.
inline std::size_t write_results_csv(std::ostream& out, std::span<const SweepResult> results) {
    if (results.empty()) throw InvalidInput("no sweep results to write");
    const std::size_t num_groups = results.front().num_groups;
    for (const auto& r : results) {
        if (r.num_groups != num_groups) throw InvalidInput("all sweeps in one results file must share the group count");
    }
    const auto header = results_header(num_groups);
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << '\n';
    std::size_t rows = 0;
    for (const auto& r : results) {
        const auto& cfg = r.config;
        const std::string prefix = to_string(cfg.algorithm) + "," + detail::quote_csv(cfg.dataset_name()) + "," +
                                   std::to_string(r.n) + "," + cfg.p.to_string() + "," + cfg.q.to_string() + "," +
                                   to_string(cfg.phi_mode) + "," + format_double(cfg.epsilon) + "," +
                                   format_double(cfg.delta) + ",";
        for (const auto& rec : r.records) {
            for (const auto& pt : rec.curve) {
                out << prefix << rec.trial_id << ',' << pt.checkpoint << ',' << format_double(pt.err_fair);
                for (double e : pt.err_group) out << ',' << format_double(e);
                out << '\n';
                ++rows;
            }
        }
        for (const auto& agg : r.aggregate) {
            out << prefix << "mean," << agg.checkpoint << ',' << format_double(agg.mean_fair);
            for (double e : agg.mean_group) out << ',' << format_double(e);
            out << '\n';
            out << prefix << "std," << agg.checkpoint << ',' << format_double(agg.std_fair);
            for (double e : agg.std_group) out << ',' << format_double(e);
            out << '\n';
            rows += 2;
        }
    }
    return rows;
}

inline nlohmann::json run_manifest(std::span<const ExperimentConfig> configs, const std::string& results_path,
                                   std::size_t rows, double wall_seconds) {
    nlohmann::json cfgs = nlohmann::json::array();
    for (const auto& c : configs) cfgs.push_back(to_json(c));
    return {{"configs", cfgs},
            {"results", results_path},
            {"rows", rows},
            {"fairpac_version",
#ifdef FAIRPAC_VERSION
             FAIRPAC_VERSION
#else
             "unknown"
#endif
            },
            {"compiler", __VERSION__},
            {"nlohmann_json_version", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                          std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                          std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
            {"wall_time_seconds", wall_seconds}};
}

}  // namespace fairpac
