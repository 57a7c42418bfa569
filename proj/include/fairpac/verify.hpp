// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The fairpac Authors

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fairpac/error.hpp"
#include "fairpac/instances.hpp"
#include "fairpac/metrics.hpp"
#include "fairpac/oracle.hpp"
#include "fairpac/types.hpp"

namespace fairpac {

// ─── Reference metric ─────────────────────────────────────────
// Straight transcription of the definitions with plain loops over raw
// vectors. Shares no code with metrics.hpp so the two can check each other.
// An exponent of +infinity selects the max.

namespace reference {

inline double item_error(std::span<const std::size_t> order, std::span<const double> scores, std::size_t item) {
    std::size_t item_pos = 0;
    while (order[item_pos] != item) ++item_pos;
    double worst = 0.0;
    for (std::size_t other = 0; other < scores.size(); ++other) {
        std::size_t other_pos = 0;
        while (order[other_pos] != other) ++other_pos;
        if (scores[item] > scores[other] && item_pos > other_pos) {
            worst = std::max(worst, scores[item] - scores[other]);
        }
    }
    return worst;
}

inline double fair_error(std::span<const std::size_t> order, std::span<const double> scores,
                         std::span<const std::size_t> group_of, std::size_t num_groups, double p, double q,
                         std::span<const double> weights) {
    std::vector<double> group_err(num_groups, 0.0);
    for (std::size_t h = 0; h < num_groups; ++h) {
        double acc = 0.0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            if (group_of[i] != h) continue;
            const double d = item_error(order, scores, i);
            if (std::isinf(p)) {
                acc = std::max(acc, d);
            } else {
                acc += std::pow(d, p);
            }
        }
        group_err[h] = std::isinf(p) ? acc : std::pow(acc, 1.0 / p);
    }
    double total = 0.0;
    for (std::size_t h = 0; h < num_groups; ++h) {
        if (weights[h] <= 0.0) continue;
        if (std::isinf(q)) {
            total = std::max(total, group_err[h]);
        } else {
            total += weights[h] * std::pow(group_err[h], q);
        }
    }
    return std::isinf(q) ? total : std::pow(total, 1.0 / q);
}

inline double fair_error(const Ranking& r, const Instance& inst, const FairnessSpec& spec) {
    std::vector<double> w(inst.groups.num_groups());
    for (std::size_t h = 0; h < w.size(); ++h) w[h] = spec.phi.at(h) / static_cast<double>(inst.groups.group_size(h));
    return fair_error(r.order(), inst.scores.values(), inst.groups.labels(), inst.groups.num_groups(),
                      spec.p.value(), spec.q.value(), w);
}

}  // namespace reference

// ─── Exhaustive minimum ───────────────────────────────────────

struct BruteForceResult {
    Ranking ranking;
    double value;
};

constexpr std::size_t kBruteForceMaxItems = 9;

/// Enumerates all n! rankings and returns the lexicographically first
/// minimizer of the reference fair error. Refuses n > 9.
inline BruteForceResult brute_force_min_fair_error(const Instance& inst, const FairnessSpec& spec) {
    if (inst.size() > kBruteForceMaxItems) {
        throw InvalidInput("brute force refuses n = " + std::to_string(inst.size()) + " (limit " +
                           std::to_string(kBruteForceMaxItems) + ")");
    }
    spec.validate_against(inst.groups);
    std::vector<std::size_t> order(inst.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<std::size_t> best = order;
    double best_value = std::numeric_limits<double>::infinity();
    std::vector<double> w(inst.groups.num_groups());
    for (std::size_t h = 0; h < w.size(); ++h) w[h] = spec.phi[h] / static_cast<double>(inst.groups.group_size(h));
    do {
        const double v = reference::fair_error(order, inst.scores.values(), inst.groups.labels(),
                                               inst.groups.num_groups(), spec.p.value(), spec.q.value(), w);
        if (v < best_value) {
            best_value = v;
            best = order;
        }
    } while (std::next_permutation(order.begin(), order.end()));
    return {Ranking(std::move(best)), best_value};
}

// ─── Metric suite ─────────────────────────────────────────────

struct MetricSuiteReport {
    std::size_t tuples = 0;
    std::size_t mismatches = 0;
    std::size_t brute_force_failures = 0;
    double max_abs_diff = 0.0;
    double tolerance = 1e-12;

    bool passed() const noexcept { return mismatches == 0 && brute_force_failures == 0; }
};

struct RandomTuple {
    Instance instance;
    Ranking ranking;
    FairnessSpec spec;
};

/// Random (scores, groups, ranking, spec) with n <= max_n. A quarter of the
/// draws round scores to one decimal so that ties occur.
inline RandomTuple random_metric_tuple(std::mt19937_64& rng, std::size_t max_n, bool group_size_phi) {
    std::uniform_int_distribution<std::size_t> size_dist(1, max_n);
    const std::size_t n = size_dist(rng);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const bool coarse = unit(rng) < 0.25;
    std::vector<double> scores(n);
    for (double& s : scores) {
        s = 1.0 - unit(rng);  // (0, 1]
        if (coarse) s = std::max(0.1, std::round(s * 10.0) / 10.0);
    }
    std::uniform_int_distribution<std::size_t> gamma_dist(1, n);
    const std::size_t gamma = gamma_dist(rng);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::size_t> group_of(n);
    std::uniform_int_distribution<std::size_t> group_dist(0, gamma - 1);
    for (std::size_t k = 0; k < n; ++k) group_of[perm[k]] = k < gamma ? k : group_dist(rng);
    GroupAssignment groups(std::move(group_of), gamma);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);

    const NormOrder choices[] = {NormOrder(1.0), NormOrder(2.0), NormOrder::infinity()};
    std::uniform_int_distribution<int> norm_dist(0, 2);
    const NormOrder p = choices[norm_dist(rng)];
    const NormOrder q = choices[norm_dist(rng)];
    auto spec = group_size_phi ? FairnessSpec::group_size_phi(p, q, groups) : FairnessSpec::unit_phi(p, q, groups);
    return {Instance(ScoreVector(std::move(scores)), std::move(groups)), Ranking(std::move(order)), std::move(spec)};
}

/// Compares the library metric against the reference on random tuples
/// (alternating φ modes) and checks that the exhaustive minimum is 0 and
/// attained by optimal_ranking.
inline MetricSuiteReport run_metric_suite(std::size_t tuples, std::uint64_t seed, std::size_t max_n = 7) {
    std::mt19937_64 rng(derive_stream_seed(seed, 0x5EED));
    MetricSuiteReport report;
    report.tuples = tuples;
    for (std::size_t k = 0; k < tuples; ++k) {
        const auto t = random_metric_tuple(rng, max_n, k % 2 == 1);
        const double lib = fair_error(t.ranking, t.instance.scores, t.instance.groups, t.spec);
        const double ref = reference::fair_error(t.ranking, t.instance, t.spec);
        const double diff = std::abs(lib - ref);
        report.max_abs_diff = std::max(report.max_abs_diff, diff);
        if (!(diff <= report.tolerance)) ++report.mismatches;

        const auto best = brute_force_min_fair_error(t.instance, t.spec);
        const auto opt = optimal_ranking(t.instance.scores);
        const double at_opt = fair_error(opt, t.instance.scores, t.instance.groups, t.spec);
        if (best.value != 0.0 || at_opt != 0.0 || reference::fair_error(opt, t.instance, t.spec) != best.value) {
            ++report.brute_force_failures;
        }
    }
    return report;
}

// ─── KL bound ─────────────────────────────────────────────────

struct KlReport {
    std::size_t n = 0;
    double epsilon = 0.0;
    NormOrder p;
    double epsilon_tilde = 0.0;
    double bound = 0.0;
    double max_kl = 0.0;
    std::uint64_t alternatives_checked = 0;
    std::uint64_t pairs_checked = 0;
    double slack = 1e-12;

    bool passed() const noexcept { return max_kl <= bound + slack; }
};

/// Largest duel KL over every unordered pair of items.
inline double max_pairwise_kl(const Instance& first, const Instance& second) {
    double worst = 0.0;
    for (std::size_t i = 0; i < first.size(); ++i) {
        for (std::size_t j = i + 1; j < first.size(); ++j) {
            worst = std::max(worst, kl_arm_divergence(first, second, i, j));
        }
    }
    return worst;
}

/// Checks KL(ν_{S*}^B, ν_{S̃*}^B) <= 64 ε̃² for every pair B and every
/// (or up to `max_alternatives` sampled) alternative instance.
inline KlReport verify_kl_bound(std::size_t n, double epsilon, NormOrder p, std::uint64_t max_alternatives = 10000,
                                std::uint64_t seed = 0) {
    const auto hard = gen_hard_instance(n, epsilon, p);
    KlReport report;
    report.n = n;
    report.epsilon = epsilon;
    report.p = p;
    report.epsilon_tilde = hard.epsilon_tilde();
    report.bound = 64.0 * hard.epsilon_tilde() * hard.epsilon_tilde();
    const std::uint64_t pairs = static_cast<std::uint64_t>(n) * (n - 1) / 2;
    report.alternatives_checked = hard.for_each_alternative(
        [&](std::span<const std::size_t> promoted) {
            const auto alt = hard.alternative(promoted);
            report.max_kl = std::max(report.max_kl, max_pairwise_kl(hard.true_instance(), alt));
            report.pairs_checked += pairs;
        },
        max_alternatives, seed);
    return report;
}

}  // namespace fairpac
