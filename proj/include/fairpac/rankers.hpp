// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The fairpac Authors

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "fairpac/error.hpp"
#include "fairpac/oracle.hpp"
#include "fairpac/types.hpp"

namespace fairpac {

// ─── Parameters ───────────────────────────────────────────────

/// Top-level (ε, δ) accuracy/confidence pair, both in (0, 1).
struct PacParams {
    double epsilon = 0.1;
    double delta = 0.1;

    void validate() const {
        if (!(epsilon > 0.0 && epsilon < 1.0)) {
            throw InvalidInput("epsilon must lie in (0, 1), got " + std::to_string(epsilon));
        }
        if (!(delta > 0.0 && delta < 1.0)) {
            throw InvalidInput("delta must lie in (0, 1), got " + std::to_string(delta));
        }
    }
};

/// Per-group tolerances ε_h = ε (n_h / (φ_h γ))^(1/q) and ε̃_h = ε_h (2 / n_h)^(1/p).
struct GroupTolerances {
    std::vector<double> epsilon;
    std::vector<double> epsilon_tilde;
};

inline GroupTolerances compute_group_tolerances(const FairnessSpec& spec, const GroupAssignment& groups,
                                                double epsilon) {
    spec.validate_against(groups);
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InvalidInput("epsilon must be positive");
    const auto gamma = static_cast<double>(groups.num_groups());
    GroupTolerances out;
    out.epsilon.resize(groups.num_groups());
    out.epsilon_tilde.resize(groups.num_groups());
    for (std::size_t h = 0; h < groups.num_groups(); ++h) {
        const auto n_h = static_cast<double>(groups.group_size(h));
        out.epsilon[h] = epsilon * std::pow(n_h / (spec.phi[h] * gamma), spec.q.reciprocal());
        out.epsilon_tilde[h] = out.epsilon[h] * std::pow(2.0 / n_h, spec.p.reciprocal());
    }
    return out;
}

// ─── Budgets ──────────────────────────────────────────────────

namespace detail {

inline void check_tolerance(double epsilon, double delta) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
        throw InvalidInput("tolerance must be finite and positive, got " + std::to_string(epsilon));
    }
    if (!(delta > 0.0 && delta < 1.0)) {
        throw InvalidInput("confidence must lie in (0, 1), got " + std::to_string(delta));
    }
}

constexpr std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) noexcept {
    if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
        return std::numeric_limits<std::uint64_t>::max();
    }
    return a * b;
}

constexpr std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) noexcept {
    return b > std::numeric_limits<std::uint64_t>::max() - a ? std::numeric_limits<std::uint64_t>::max()
                                                               : a + b;
}

}  // namespace detail

/// Samples per pairwise decision: m(ε, δ) = ceil((32 / ε²) ln(2 / δ)), at least 1.
///
/// With scores normalized to (0, 1], a score gap of ε gives a win-probability
/// gap of at least ε/4; Hoeffding at deviation ε/8 then needs this many draws.
inline std::uint64_t pair_sample_budget(double epsilon, double delta) {
    detail::check_tolerance(epsilon, delta);
    const double m = std::ceil((32.0 / (epsilon * epsilon)) * std::log(2.0 / delta));
    if (!(m < 0x1.0p62)) {
        std::ostringstream msg;
        msg << "pairwise sample budget overflows for epsilon " << epsilon;
        throw InvalidInput(msg.str());
    }
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(m));
}

/// Union-bound split C = n ceil(log2 n) + 1 used by pac_rank.
constexpr std::uint64_t comparison_bound(std::size_t n) noexcept {
    if (n <= 1) return 1;
    const auto ceil_log2 = static_cast<std::uint64_t>(std::bit_width(n - 1));
    return static_cast<std::uint64_t>(n) * ceil_log2 + 1;
}

/// Exact worst-case number of decisions made by the top-down merge sort in pac_rank.
constexpr std::uint64_t merge_sort_worst_case(std::size_t n) noexcept {
    if (n <= 1) return 0;
    const std::size_t left = n / 2;
    return merge_sort_worst_case(left) + merge_sort_worst_case(n - left) + n - 1;
}

// ─── Pairwise decision ────────────────────────────────────────

enum class PairOrder { first_above, second_above };

/// Fixed-budget majority vote between two items. Consumes exactly
/// pair_sample_budget(ε, δ) oracle queries; a tied vote favours the lower index.
template <PairwiseOracle O>
PairOrder pac_pair_compare(O& oracle, std::size_t first, std::size_t second, double epsilon, double delta) {
    if (first == second) throw InvalidInput("pac_pair_compare needs two distinct items");
    const std::uint64_t m = pair_sample_budget(epsilon, delta);
    std::uint64_t first_wins = 0;
    for (std::uint64_t k = 0; k < m; ++k) {
        if (static_cast<std::size_t>(oracle.sample_pair(first, second)) == first) ++first_wins;
    }
    const std::uint64_t second_wins = m - first_wins;
    if (first_wins != second_wins) return first_wins > second_wins ? PairOrder::first_above : PairOrder::second_above;
    return first < second ? PairOrder::first_above : PairOrder::second_above;
}

// ─── Outcomes ─────────────────────────────────────────────────

/// A labelled point in a ranker's execution. `queries` is cumulative from
/// the ranker's start; `round`/`list` locate group-aware merge steps
/// (round 0 is the per-group sort).
struct TraceEntry {
    std::uint64_t queries = 0;
    std::string label;
    double tolerance = 0.0;
    std::size_t round = 0;
    std::size_t list = 0;
};

struct RankOutcome {
    std::vector<std::size_t> order;
    std::uint64_t queries_used = 0;
    std::vector<TraceEntry> trace;

    /// Only valid when the ranked items are exactly 0..n-1.
    Ranking ranking() const { return Ranking(order); }
};

namespace detail {

inline void check_distinct(std::span<const std::size_t> items, const char* what) {
    std::vector<std::size_t> sorted(items.begin(), items.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw InvalidInput(std::string(what) + " contains a repeated item");
    }
}

template <PairwiseOracle O>
std::vector<std::size_t> merge_lists(O& oracle, std::span<const std::size_t> upper,
                                     std::span<const std::size_t> lower, double epsilon, double delta) {
    std::vector<std::size_t> merged;
    merged.reserve(upper.size() + lower.size());
    std::size_t a = 0;
    std::size_t b = 0;
    // Only the winner leaves its list; the loser stays at the head for the next decision.
    while (a < upper.size() && b < lower.size()) {
        if (pac_pair_compare(oracle, upper[a], lower[b], epsilon, delta) == PairOrder::first_above) {
            merged.push_back(upper[a++]);
        } else {
            merged.push_back(lower[b++]);
        }
    }
    merged.insert(merged.end(), upper.begin() + static_cast<std::ptrdiff_t>(a), upper.end());
    merged.insert(merged.end(), lower.begin() + static_cast<std::ptrdiff_t>(b), lower.end());
    return merged;
}

template <PairwiseOracle O>
std::vector<std::size_t> noisy_merge_sort(O& oracle, std::span<const std::size_t> items, double epsilon,
                                          double delta) {
    if (items.size() <= 1) return {items.begin(), items.end()};
    const std::size_t mid = items.size() / 2;
    const auto left = noisy_merge_sort(oracle, items.first(mid), epsilon, delta);
    const auto right = noisy_merge_sort(oracle, items.subspan(mid), epsilon, delta);
    return merge_lists(oracle, left, right, epsilon, delta);
}

}  // namespace detail

/// Merges two disjoint rankings, deciding each head-to-head with
/// pac_pair_compare(ε, δ).
template <PairwiseOracle O>
std::vector<std::size_t> merge(O& oracle, std::span<const std::size_t> upper, std::span<const std::size_t> lower,
                               double epsilon, double delta) {
    detail::check_tolerance(epsilon, delta);
    std::vector<std::size_t> all(upper.begin(), upper.end());
    all.insert(all.end(), lower.begin(), lower.end());
    detail::check_distinct(all, "merge input");
    return detail::merge_lists(oracle, upper, lower, epsilon, delta);
}

/// Full-set PAC ranker: noisy merge sort whose decisions each run at
/// confidence δ / comparison_bound(|items|). Returns an ε-Best-Ranking of
/// `items` with probability at least 1 − δ.
template <PairwiseOracle O>
RankOutcome pac_rank(O& oracle, std::span<const std::size_t> items, double epsilon, double delta) {
    if (items.empty()) throw InvalidInput("pac_rank needs at least one item");
    detail::check_tolerance(epsilon, delta);
    detail::check_distinct(items, "pac_rank input");
    const std::uint64_t start = oracle.query_count();
    const double per_decision = delta / static_cast<double>(comparison_bound(items.size()));
    RankOutcome out;
    out.order = detail::noisy_merge_sort(oracle, items, epsilon, per_decision);
    out.queries_used = oracle.query_count() - start;
    out.trace.push_back({out.queries_used, "pac-rank", epsilon, 0, 0});
    return out;
}

inline std::uint64_t pac_rank_budget(std::size_t n, double epsilon, double delta) {
    if (n <= 1) return 0;
    const double per_decision = delta / static_cast<double>(comparison_bound(n));
    return detail::saturating_mul(merge_sort_worst_case(n), pair_sample_budget(epsilon, per_decision));
}

// ─── Group-blind ──────────────────────────────────────────────

/// ε̃ = ε / n^max(1/p, 1/q).
inline double group_blind_tolerance(std::size_t n, double epsilon, NormOrder p, NormOrder q) {
    if (n == 0) throw InvalidInput("group-blind tolerance needs n >= 1");
    const double exponent = std::max(p.reciprocal(), q.reciprocal());
    return epsilon / std::pow(static_cast<double>(n), exponent);
}

/// Ranks `items` without any access to group labels.
template <PairwiseOracle O>
RankOutcome group_blind_rank(O& oracle, std::span<const std::size_t> items, double epsilon, double delta,
                             NormOrder p, NormOrder q) {
    if (items.empty()) throw InvalidInput("group_blind_rank needs at least one item");
    const double tolerance = group_blind_tolerance(items.size(), epsilon, p, q);
    auto out = pac_rank(oracle, items, tolerance, delta);
    out.trace.back().label = "group-blind";
    return out;
}

/// Ranks items 0..n-1. Only p and q of `spec` are read.
template <PairwiseOracle O>
RankOutcome group_blind_rank(O& oracle, std::size_t n, double epsilon, double delta, const FairnessSpec& spec) {
    std::vector<std::size_t> items(n);
    for (std::size_t i = 0; i < n; ++i) items[i] = i;
    return group_blind_rank(oracle, items, epsilon, delta, spec.p, spec.q);
}

inline std::uint64_t group_blind_budget(std::size_t n, double epsilon, double delta, NormOrder p, NormOrder q) {
    return pac_rank_budget(n, group_blind_tolerance(n, epsilon, p, q), delta);
}

// ─── Group-aware ──────────────────────────────────────────────
//
// Step 1 sorts each group with tolerance ε̃_h / 2 at confidence δ/(2nγ).
// Step 2 merges adjacent lists pairwise, round after round, deciding each
// head-to-head at tolerance min(ε̃_h, ε̃_{h+1}) and confidence δ/(2n²γ);
// the merged list inherits the smaller tolerance and an unpaired last
// list is carried to the next round unchanged.

struct GroupAwareSchedule {
    double group_delta = 0.0;
    double merge_delta = 0.0;
    GroupTolerances tolerances;
};

inline GroupAwareSchedule group_aware_schedule(const GroupAssignment& groups, double epsilon, double delta,
                                               const FairnessSpec& spec) {
    detail::check_tolerance(epsilon, delta);
    const auto n = static_cast<double>(groups.size());
    const auto gamma = static_cast<double>(groups.num_groups());
    return {delta / (2.0 * n * gamma), delta / (2.0 * n * n * gamma),
            compute_group_tolerances(spec, groups, epsilon)};
}

template <PairwiseOracle O>
RankOutcome group_aware_rank(O& oracle, const GroupAssignment& groups, double epsilon, double delta,
                             const FairnessSpec& spec) {
    const auto plan = group_aware_schedule(groups, epsilon, delta, spec);
    const std::uint64_t start = oracle.query_count();
    RankOutcome out;

    struct SortedList {
        std::vector<std::size_t> items;
        double tolerance;
    };
    std::vector<SortedList> lists;
    lists.reserve(groups.num_groups());
    for (std::size_t h = 0; h < groups.num_groups(); ++h) {
        const double tilde = plan.tolerances.epsilon_tilde[h];
        auto sorted = pac_rank(oracle, groups.members(h), tilde / 2.0, plan.group_delta);
        lists.push_back({std::move(sorted.order), tilde});
        out.trace.push_back({oracle.query_count() - start, "group " + std::to_string(h), tilde, 0, h});
    }

    std::size_t round = 1;
    while (lists.size() > 1) {
        std::vector<SortedList> next;
        next.reserve((lists.size() + 1) / 2);
        for (std::size_t k = 0; k < lists.size(); k += 2) {
            if (k + 1 == lists.size()) {
                out.trace.push_back({oracle.query_count() - start, "carry", lists[k].tolerance, round, next.size()});
                next.push_back(std::move(lists[k]));
                continue;
            }
            const double tolerance = std::min(lists[k].tolerance, lists[k + 1].tolerance);
            auto merged = detail::merge_lists(oracle, lists[k].items, lists[k + 1].items, tolerance, plan.merge_delta);
            out.trace.push_back({oracle.query_count() - start, "merge", tolerance, round, next.size()});
            next.push_back({std::move(merged), tolerance});
        }
        lists = std::move(next);
        ++round;
    }

    out.order = std::move(lists.front().items);
    out.queries_used = oracle.query_count() - start;
    return out;
}

/// Worst-case query count of group_aware_rank for these parameters.
inline std::uint64_t group_aware_budget(const GroupAssignment& groups, double epsilon, double delta,
                                        const FairnessSpec& spec) {
    const auto plan = group_aware_schedule(groups, epsilon, delta, spec);
    std::uint64_t total = 0;
    struct Shape {
        std::size_t size;
        double tolerance;
    };
    std::vector<Shape> lists;
    for (std::size_t h = 0; h < groups.num_groups(); ++h) {
        const double tilde = plan.tolerances.epsilon_tilde[h];
        total = detail::saturating_add(total, pac_rank_budget(groups.group_size(h), tilde / 2.0, plan.group_delta));
        lists.push_back({groups.group_size(h), tilde});
    }
    while (lists.size() > 1) {
        std::vector<Shape> next;
        for (std::size_t k = 0; k < lists.size(); k += 2) {
            if (k + 1 == lists.size()) {
                next.push_back(lists[k]);
                continue;
            }
            const double tolerance = std::min(lists[k].tolerance, lists[k + 1].tolerance);
            const std::uint64_t decisions = lists[k].size + lists[k + 1].size - 1;
            total = detail::saturating_add(
                total, detail::saturating_mul(decisions, pair_sample_budget(tolerance, plan.merge_delta)));
            next.push_back({lists[k].size + lists[k + 1].size, tolerance});
        }
        lists = std::move(next);
    }
    return total;
}

}  // namespace fairpac
