// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The fairpac Authors

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "fairpac/error.hpp"
#include "fairpac/types.hpp"

namespace fairpac {

namespace detail {

inline void check_same_size(const Ranking& r, const ScoreVector& s) {
    if (r.size() != s.size()) {
        throw InvalidInput("ranking covers " + std::to_string(r.size()) + " items but scores cover " +
                           std::to_string(s.size()));
    }
}

inline void check_same_size(const Ranking& r, const ScoreVector& s, const GroupAssignment& g) {
    check_same_size(r, s);
    if (g.size() != s.size()) {
        throw InvalidInput("group assignment covers " + std::to_string(g.size()) +
                           " items but scores cover " + std::to_string(s.size()));
    }
}

}  // namespace detail

/// l_p norm of non-negative values, evaluated as m * (Σ (v/m)^p)^(1/p)
/// with m = max v so that large p cannot overflow.
inline double lp_norm(std::span<const double> values, NormOrder p) {
    double top = 0.0;
    for (double v : values) top = std::max(top, v);
    if (top == 0.0) return 0.0;
    if (p.is_infinite()) return top;
    double acc = 0.0;
    for (double v : values) acc += std::pow(v / top, p.value());
    return top * std::pow(acc, 1.0 / p.value());
}

/// Weighted l_q aggregation (Σ w_h v_h^q)^(1/q). Zero-weight terms are
/// ignored, including by the q = ∞ limit which returns max over w_h > 0.
inline double weighted_lq_norm(std::span<const double> values, std::span<const double> weights, NormOrder q) {
    if (values.size() != weights.size()) throw InvalidInput("value and weight counts differ");
    double top = 0.0;
    for (std::size_t h = 0; h < values.size(); ++h) {
        if (!(weights[h] >= 0.0) || !std::isfinite(weights[h])) {
            throw InvalidInput("group weights must be finite and non-negative");
        }
        if (weights[h] > 0.0) top = std::max(top, values[h]);
    }
    if (top == 0.0) return 0.0;
    if (q.is_infinite()) return top;
    double acc = 0.0;
    for (std::size_t h = 0; h < values.size(); ++h) {
        if (weights[h] > 0.0) acc += weights[h] * std::pow(values[h] / top, q.value());
    }
    return top * std::pow(acc, 1.0 / q.value());
}

/// d_i for every item: the largest score deficit θ_i − θ_j over items j
/// with θ_j < θ_i placed above i, or 0 when there is none.
inline std::vector<double> item_errors(const Ranking& r, const ScoreVector& s) {
    detail::check_same_size(r, s);
    std::vector<double> d(s.size(), 0.0);
    // The worst item seen so far above the current position gives the max deficit.
    double lowest_above = std::numeric_limits<double>::infinity();
    for (std::size_t pos = 0; pos < r.size(); ++pos) {
        const std::size_t item = r.item_at(pos);
        if (lowest_above < s[item]) d[item] = s[item] - lowest_above;
        lowest_above = std::min(lowest_above, s[item]);
    }
    return d;
}

inline double item_error(const Ranking& r, const ScoreVector& s, std::size_t item) {
    detail::check_same_size(r, s);
    if (item >= s.size()) throw InvalidInput("item index " + std::to_string(item) + " out of range");
    const std::size_t pos = r.position_of(item);
    double worst = 0.0;
    for (std::size_t above = 0; above < pos; ++above) {
        const double other = s[r.item_at(above)];
        if (other < s[item]) worst = std::max(worst, s[item] - other);
    }
    return worst;
}

/// err(σ; θ) = max_i d_i. σ is an ε-Best-Ranking iff this is < ε.
inline double best_ranking_error(const Ranking& r, const ScoreVector& s) {
    const auto d = item_errors(r, s);
    return *std::max_element(d.begin(), d.end());
}

inline std::vector<double> group_errors(const Ranking& r, const ScoreVector& s, const GroupAssignment& g,
                                        NormOrder p) {
    detail::check_same_size(r, s, g);
    const auto d = item_errors(r, s);
    std::vector<double> out(g.num_groups());
    std::vector<double> members;
    for (std::size_t h = 0; h < g.num_groups(); ++h) {
        members.clear();
        for (std::size_t i : g.members(h)) members.push_back(d[i]);
        out[h] = lp_norm(members, p);
    }
    return out;
}

/// err_h: l_p norm of the item errors inside group h.
inline double group_error(const Ranking& r, const ScoreVector& s, const GroupAssignment& g, std::size_t h,
                          NormOrder p) {
    detail::check_same_size(r, s, g);
    if (h >= g.num_groups()) throw InvalidInput("group index " + std::to_string(h) + " out of range");
    const auto d = item_errors(r, s);
    std::vector<double> members;
    for (std::size_t i : g.members(h)) members.push_back(d[i]);
    return lp_norm(members, p);
}

/// Cascaded error with raw, non-negative group weights.
inline double fair_error(const Ranking& r, const ScoreVector& s, const GroupAssignment& g, NormOrder p,
                         NormOrder q, std::span<const double> weights) {
    if (weights.size() != g.num_groups()) {
        throw InvalidInput("expected one weight per group (" + std::to_string(g.num_groups()) + "), got " +
                           std::to_string(weights.size()));
    }
    const auto per_group = group_errors(r, s, g, p);
    return weighted_lq_norm(per_group, weights, q);
}

/// err^fair with w(h) = φ_h / n_h. σ is an ε-Best-Fair-Ranking iff this is < ε.
inline double fair_error(const Ranking& r, const ScoreVector& s, const GroupAssignment& g,
                         const FairnessSpec& spec) {
    const auto w = spec.weights(g);
    return fair_error(r, s, g, spec.p, spec.q, w);
}

}  // namespace fairpac
