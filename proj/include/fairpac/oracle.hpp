// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The fairpac Authors

#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fairpac/error.hpp"
#include "fairpac/types.hpp"

namespace fairpac {

/// Anything a ranker may query: pairwise winner sampling plus a query counter.
/// Rankers are written against this concept so they never see the scores.
template <class O>
concept PairwiseOracle = requires(O& o, const O& co, std::size_t i, std::size_t j) {
    { o.sample_pair(i, j) } -> std::convertible_to<std::size_t>;
    { co.query_count() } -> std::convertible_to<std::uint64_t>;
};

/// splitmix64 finalizer; used to derive independent per-trial streams.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_stream_seed(std::uint64_t base_seed, std::uint64_t trial_id) noexcept {
    return mix64(mix64(base_seed) ^ mix64(trial_id + 0xD1B54A32D192ED03ULL));
}

/// Pr[i beats j] = θ_i / (θ_i + θ_j).
inline double win_probability(const ScoreVector& s, std::size_t i, std::size_t j) {
    if (i == j) throw InvalidInput("win probability needs two distinct items");
    const double a = s.at(i);
    const double b = s.at(j);
    return a / (a + b);
}

struct QueryRecord {
    std::size_t first;
    std::size_t second;
    std::size_t winner;

    friend bool operator==(const QueryRecord&, const QueryRecord&) = default;
};

// ─── ComparisonOracle ─────────────────────────────────────────
// Plackett-Luce pairwise feedback. Owns the hidden scores, a
// deterministic stream seeded from (base_seed, trial_id), and the
// query counter. Confined to one thread at a time.

class ComparisonOracle {
public:
    ComparisonOracle(ScoreVector scores, std::uint64_t base_seed, std::uint64_t trial_id)
        : scores_(std::move(scores)), rng_(derive_stream_seed(base_seed, trial_id)) {}

    /// Draws one duel between i and j and returns the winner.
    std::size_t sample_pair(std::size_t i, std::size_t j) {
        if (i == j) throw InvalidInput("cannot compare item " + std::to_string(i) + " with itself");
        if (i >= scores_.size() || j >= scores_.size()) {
            throw InvalidInput("item index out of range in sample_pair");
        }
        const double a = scores_[i];
        const double threshold = a / (a + scores_[j]);
        // 53 random mantissa bits; std::uniform_real_distribution is not
        // bit-identical across standard libraries.
        const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
        ++queries_;
        const std::size_t winner = u < threshold ? i : j;
        if (logging_) log_.push_back({i, j, winner});
        return winner;
    }

    std::uint64_t query_count() const noexcept { return queries_; }
    std::size_t size() const noexcept { return scores_.size(); }

    /// Keeps every (i, j, winner) triple from now on. Meant for small runs.
    void enable_query_log(bool on = true) { logging_ = on; }
    const std::vector<QueryRecord>& query_log() const noexcept { return log_; }

private:
    ScoreVector scores_;
    std::mt19937_64 rng_;
    std::uint64_t queries_ = 0;
    bool logging_ = false;
    std::vector<QueryRecord> log_;
};

static_assert(PairwiseOracle<ComparisonOracle>);

}  // namespace fairpac
