// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The fairpac Authors

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairpac/error.hpp"

namespace fairpac {

// ─── NormOrder ────────────────────────────────────────────────
// Exponent of an l_p norm. Infinity is a distinguished state rather
// than a large float so the max-limit can be evaluated exactly.

class NormOrder {
public:
    constexpr NormOrder() = default;

    explicit NormOrder(double p) : value_(p) {
        if (!std::isfinite(p) || p < 1.0) {
            throw InvalidInput("norm order must be a finite real >= 1 or infinity, got " +
                               std::to_string(p));
        }
    }

    static constexpr NormOrder infinity() noexcept {
        NormOrder n;
        n.infinite_ = true;
        n.value_ = std::numeric_limits<double>::infinity();
        return n;
    }

    /// Accepts "inf", "infinity", "∞" or a decimal literal >= 1.
    static NormOrder parse(std::string_view text) {
        if (text == "inf" || text == "infinity" || text == "Inf" || text == "INF" ||
            text == "\xE2\x88\x9E") {
            return infinity();
        }
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(std::string(text), &used);
        } catch (const std::exception&) {
            throw InvalidInput("cannot parse norm order '" + std::string(text) + "'");
        }
        if (used != text.size()) {
            throw InvalidInput("cannot parse norm order '" + std::string(text) + "'");
        }
        return NormOrder(v);
    }

    constexpr bool is_infinite() const noexcept { return infinite_; }
    constexpr double value() const noexcept { return value_; }

    /// 1/p, with 1/inf = 0.
    constexpr double reciprocal() const noexcept { return infinite_ ? 0.0 : 1.0 / value_; }

    std::string to_string() const {
        if (infinite_) return "inf";
        double whole = 0.0;
        if (std::modf(value_, &whole) == 0.0 && std::abs(value_) < 1e15) {
            return std::to_string(static_cast<long long>(value_));
        }
        return std::to_string(value_);
    }

    friend constexpr bool operator==(const NormOrder& a, const NormOrder& b) noexcept {
        return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
    }

private:
    double value_ = 1.0;
    bool infinite_ = false;
};

// ─── ScoreVector ──────────────────────────────────────────────
// True Plackett-Luce utilities, one per item. Every score is finite
// and strictly positive; the vector is never empty.

class ScoreVector {
public:
    explicit ScoreVector(std::vector<double> scores) : scores_(std::move(scores)) {
        if (scores_.empty()) throw InvalidInput("score vector must contain at least one item");
        for (std::size_t i = 0; i < scores_.size(); ++i) {
            if (!std::isfinite(scores_[i]) || !(scores_[i] > 0.0)) {
                throw InvalidInput("score of item " + std::to_string(i) +
                                   " must be finite and > 0, got " + std::to_string(scores_[i]));
            }
        }
    }

    std::size_t size() const noexcept { return scores_.size(); }
    double operator[](std::size_t i) const { return scores_[i]; }
    double at(std::size_t i) const {
        if (i >= scores_.size()) throw InvalidInput("item index " + std::to_string(i) + " out of range");
        return scores_[i];
    }
    std::span<const double> values() const noexcept { return scores_; }
    auto begin() const noexcept { return scores_.begin(); }
    auto end() const noexcept { return scores_.end(); }

    double max_score() const noexcept { return *std::max_element(scores_.begin(), scores_.end()); }

    friend bool operator==(const ScoreVector&, const ScoreVector&) = default;

private:
    std::vector<double> scores_;
};

// ─── GroupAssignment ──────────────────────────────────────────
// Partition of items 0..n-1 into groups 0..γ-1, every group non-empty.

class GroupAssignment {
public:
    explicit GroupAssignment(std::vector<std::size_t> group_of)
        : GroupAssignment(group_of,
                          group_of.empty() ? 0 : *std::max_element(group_of.begin(), group_of.end()) + 1) {}

    GroupAssignment(std::vector<std::size_t> group_of, std::size_t num_groups)
        : group_of_(std::move(group_of)), members_(num_groups) {
        if (group_of_.empty()) throw InvalidInput("group assignment must cover at least one item");
        if (num_groups == 0) throw InvalidInput("number of groups must be positive");
        for (std::size_t i = 0; i < group_of_.size(); ++i) {
            if (group_of_[i] >= num_groups) {
                throw InvalidInput("item " + std::to_string(i) + " assigned to group " +
                                   std::to_string(group_of_[i]) + " but only " +
                                   std::to_string(num_groups) + " groups exist");
            }
            members_[group_of_[i]].push_back(i);
        }
        for (std::size_t h = 0; h < num_groups; ++h) {
            if (members_[h].empty()) throw InvalidInput("group " + std::to_string(h) + " is empty");
        }
    }

    static GroupAssignment single_group(std::size_t n) {
        return GroupAssignment(std::vector<std::size_t>(n, 0), 1);
    }

    std::size_t size() const noexcept { return group_of_.size(); }
    std::size_t num_groups() const noexcept { return members_.size(); }
    std::size_t group_of(std::size_t item) const { return group_of_.at(item); }
    std::size_t group_size(std::size_t h) const { return members_.at(h).size(); }
    /// Items of group h in ascending index order.
    std::span<const std::size_t> members(std::size_t h) const { return members_.at(h); }
    std::span<const std::size_t> labels() const noexcept { return group_of_; }

    friend bool operator==(const GroupAssignment& a, const GroupAssignment& b) {
        return a.group_of_ == b.group_of_ && a.members_.size() == b.members_.size();
    }

private:
    std::vector<std::size_t> group_of_;
    std::vector<std::vector<std::size_t>> members_;
};

// ─── Ranking ──────────────────────────────────────────────────
// Permutation of 0..n-1. order()[0] is the best position.

class Ranking {
public:
    explicit Ranking(std::vector<std::size_t> order) : order_(std::move(order)), position_(order_.size()) {
        constexpr auto unset = std::numeric_limits<std::size_t>::max();
        std::fill(position_.begin(), position_.end(), unset);
        for (std::size_t pos = 0; pos < order_.size(); ++pos) {
            const std::size_t item = order_[pos];
            if (item >= order_.size() || position_[item] != unset) {
                throw InvalidInput("ranking is not a permutation of 0.." +
                                   std::to_string(order_.size()) + "-1");
            }
            position_[item] = pos;
        }
    }

    static Ranking identity(std::size_t n) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        return Ranking(std::move(order));
    }

    std::size_t size() const noexcept { return order_.size(); }
    std::size_t item_at(std::size_t position) const { return order_.at(position); }
    std::size_t position_of(std::size_t item) const { return position_.at(item); }
    std::span<const std::size_t> order() const noexcept { return order_; }

    friend bool operator==(const Ranking& a, const Ranking& b) { return a.order_ == b.order_; }

private:
    std::vector<std::size_t> order_;
    std::vector<std::size_t> position_;
};

// ─── FairnessSpec ─────────────────────────────────────────────
// (p, q, φ) of the cascaded error. Group weights are w(h) = φ_h / n_h.

struct FairnessSpec {
    NormOrder p;
    NormOrder q;
    std::vector<double> phi;

    static FairnessSpec unit_phi(NormOrder p, NormOrder q, const GroupAssignment& groups) {
        return {p, q, std::vector<double>(groups.num_groups(), 1.0)};
    }

    static FairnessSpec group_size_phi(NormOrder p, NormOrder q, const GroupAssignment& groups) {
        FairnessSpec spec{p, q, {}};
        spec.phi.reserve(groups.num_groups());
        for (std::size_t h = 0; h < groups.num_groups(); ++h) {
            spec.phi.push_back(static_cast<double>(groups.group_size(h)));
        }
        return spec;
    }

    /// Requires one φ_h per group with 1 <= φ_h <= n_h.
    void validate_against(const GroupAssignment& groups) const {
        if (phi.size() != groups.num_groups()) {
            throw InvalidInput("fairness spec has " + std::to_string(phi.size()) +
                               " weights but there are " + std::to_string(groups.num_groups()) +
                               " groups");
        }
        for (std::size_t h = 0; h < phi.size(); ++h) {
            const auto n_h = static_cast<double>(groups.group_size(h));
            if (!std::isfinite(phi[h]) || phi[h] < 1.0 || phi[h] > n_h) {
                throw InvalidInput("phi[" + std::to_string(h) + "] = " + std::to_string(phi[h]) +
                                   " must lie in [1, " + std::to_string(groups.group_size(h)) + "]");
            }
        }
    }

    std::vector<double> weights(const GroupAssignment& groups) const {
        validate_against(groups);
        std::vector<double> w(phi.size());
        for (std::size_t h = 0; h < phi.size(); ++h) {
            w[h] = phi[h] / static_cast<double>(groups.group_size(h));
        }
        return w;
    }
};

// ─── Instance ─────────────────────────────────────────────────

struct Instance {
    Instance(ScoreVector s, GroupAssignment g, std::vector<std::string> item_labels = {})
        : scores(std::move(s)), groups(std::move(g)), labels(std::move(item_labels)) {
        if (scores.size() != groups.size()) {
            throw InvalidInput("instance has " + std::to_string(scores.size()) + " scores but " +
                               std::to_string(groups.size()) + " group labels");
        }
        if (!labels.empty() && labels.size() != scores.size()) {
            throw InvalidInput("instance label count does not match item count");
        }
    }

    std::size_t size() const noexcept { return scores.size(); }

    /// Display name of an item; falls back to its index.
    std::string label(std::size_t i) const { return labels.empty() ? std::to_string(i) : labels.at(i); }

    ScoreVector scores;
    GroupAssignment groups;
    std::vector<std::string> labels;
};

// ─── Score helpers ────────────────────────────────────────────

inline ScoreVector normalize_scores(std::span<const double> raw) {
    if (raw.empty()) throw InvalidInput("cannot normalize an empty score vector");
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (!std::isfinite(raw[i]) || !(raw[i] > 0.0)) {
            throw InvalidInput("score of item " + std::to_string(i) + " must be finite and > 0");
        }
    }
    const double top = *std::max_element(raw.begin(), raw.end());
    std::vector<double> out(raw.begin(), raw.end());
    for (double& v : out) v /= top;
    return ScoreVector(std::move(out));
}

inline ScoreVector normalize_scores(const ScoreVector& s) { return normalize_scores(s.values()); }

/// Descending by score; equal scores keep ascending item index.
inline Ranking optimal_ranking(const ScoreVector& s) {
    std::vector<std::size_t> order(s.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
    return Ranking(std::move(order));
}

}  // namespace fairpac
