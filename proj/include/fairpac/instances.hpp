// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The fairpac Authors

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairpac/error.hpp"
#include "fairpac/oracle.hpp"
#include "fairpac/types.hpp"

namespace fairpac {

// ─── Text helpers ─────────────────────────────────────────────

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

/// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
inline std::vector<std::string> split_csv_record(std::string_view line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
        const char c = line[k];
        if (quoted) {
            if (c == '"') {
                if (k + 1 < line.size() && line[k + 1] == '"') {
                    current.push_back('"');
                    ++k;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
            was_quoted = true;
        } else if (c == ',') {
            fields.push_back(was_quoted ? current : std::string(trim(current)));
            current.clear();
            was_quoted = false;
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(was_quoted ? current : std::string(trim(current)));
    return fields;
}

inline std::string quote_csv(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

inline std::optional<double> parse_double(std::string_view text) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size() || text.empty()) return std::nullopt;
    return v;
}

}  // namespace detail

// ─── CSV ingestion ────────────────────────────────────────────

enum class ScoreTransform { identity, negate_and_shift, rank_decile };

inline ScoreTransform parse_score_transform(std::string_view name) {
    if (name == "identity") return ScoreTransform::identity;
    if (name == "negate-and-shift") return ScoreTransform::negate_and_shift;
    if (name == "rank-decile") return ScoreTransform::rank_decile;
    throw InvalidInput("unknown score_transform '" + std::string(name) +
                       "' (expected identity, negate-and-shift or rank-decile)");
}

inline std::string to_string(ScoreTransform t) {
    switch (t) {
        case ScoreTransform::identity: return "identity";
        case ScoreTransform::negate_and_shift: return "negate-and-shift";
        case ScoreTransform::rank_decile: return "rank-decile";
    }
    return "identity";
}

struct ColumnMapping {
    std::string id_column = "id";
    std::string score_column = "score";
    std::string group_column = "group";
    ScoreTransform score_transform = ScoreTransform::identity;
    std::optional<std::size_t> top_n;

    static ColumnMapping from_json(const nlohmann::json& doc) {
        if (!doc.is_object()) throw SchemaError("column mapping must be a JSON object");
        static const std::set<std::string> known{"id_column", "score_column", "group_column", "score_transform",
                                                 "top_n"};
        for (const auto& [key, value] : doc.items()) {
            if (!known.contains(key)) throw SchemaError("unknown column mapping key '" + key + "'");
        }
        ColumnMapping m;
        try {
            if (doc.contains("id_column")) m.id_column = doc.at("id_column").get<std::string>();
            if (doc.contains("score_column")) m.score_column = doc.at("score_column").get<std::string>();
            if (doc.contains("group_column")) m.group_column = doc.at("group_column").get<std::string>();
            if (doc.contains("score_transform")) {
                m.score_transform = parse_score_transform(doc.at("score_transform").get<std::string>());
            }
            if (doc.contains("top_n") && !doc.at("top_n").is_null()) {
                const auto top = doc.at("top_n").get<long long>();
                if (top <= 0) throw InvalidInput("top_n must be a positive integer");
                m.top_n = static_cast<std::size_t>(top);
            }
        } catch (const nlohmann::json::exception& e) {
            throw SchemaError(std::string("malformed column mapping: ") + e.what());
        }
        return m;
    }

    nlohmann::json to_json() const {
        nlohmann::json doc{{"id_column", id_column},
                           {"score_column", score_column},
                           {"group_column", group_column},
                           {"score_transform", to_string(score_transform)}};
        doc["top_n"] = top_n ? nlohmann::json(*top_n) : nlohmann::json(nullptr);
        return doc;
    }
};

inline ColumnMapping load_mapping(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open mapping file '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("mapping file '" + path + "' is not valid JSON: " + e.what());
    }
    return ColumnMapping::from_json(doc);
}

struct LoadReport {
    std::size_t rows_read = 0;
    std::size_t duplicate_ids = 0;
    std::size_t items_kept = 0;
    std::vector<std::string> group_names;  // index h -> original token
};

struct LoadedInstance {
    Instance instance;
    LoadReport report;
};

/// Parses `id,score,group`-style rows (column names from the mapping),
/// transforms and normalizes scores, optionally keeps only the top_n
/// items, and relabels groups 0..γ-1 by first appearance.
/// A repeated id replaces the earlier row's values in place.
inline LoadedInstance load_csv(std::istream& in, const ColumnMapping& mapping) {
    std::string line;
    std::size_t row = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++row;
        if (row == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
        if (!detail::trim(line).empty()) {
            header = detail::split_csv_record(line);
            break;
        }
    }
    if (header.empty()) throw SchemaError("CSV input has no header line");

    auto column = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw SchemaError("CSV header has no column named '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t id_col = column(mapping.id_column);
    const std::size_t score_col = column(mapping.score_column);
    const std::size_t group_col = column(mapping.group_column);

    struct Row {
        std::string id;
        double raw;
        std::string group;
    };
    std::vector<Row> rows;
    std::unordered_map<std::string, std::size_t> index_of;
    LoadReport report;
    while (std::getline(in, line)) {
        ++row;
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split_csv_record(line);
        if (fields.size() != header.size()) {
            throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                                 std::to_string(fields.size()),
                             row);
        }
        const auto raw = detail::parse_double(fields[score_col]);
        if (!raw || !std::isfinite(*raw)) {
            throw ParseError("score '" + fields[score_col] + "' is not a finite number", row);
        }
        ++report.rows_read;
        Row parsed{fields[id_col], *raw, fields[group_col]};
        if (const auto it = index_of.find(parsed.id); it != index_of.end()) {
            ++report.duplicate_ids;
            rows[it->second] = std::move(parsed);
        } else {
            index_of.emplace(parsed.id, rows.size());
            rows.push_back(std::move(parsed));
        }
    }
    if (rows.empty()) throw InvalidInput("CSV input has no data rows");

    std::vector<double> score(rows.size());
    const double raw_max =
        std::max_element(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.raw < b.raw; })->raw;
    switch (mapping.score_transform) {
        case ScoreTransform::identity:
            for (std::size_t k = 0; k < rows.size(); ++k) score[k] = rows[k].raw;
            break;
        case ScoreTransform::negate_and_shift:
            if (!(raw_max > 0.0)) throw InvalidInput("negate-and-shift needs a positive maximum raw score");
            for (std::size_t k = 0; k < rows.size(); ++k) score[k] = (raw_max + 1.0 - rows[k].raw) / raw_max;
            break;
        case ScoreTransform::rank_decile: {
            // Decile of the ascending rank; tied raw values share the lowest rank of their block.
            std::vector<std::size_t> by_raw(rows.size());
            std::iota(by_raw.begin(), by_raw.end(), std::size_t{0});
            std::stable_sort(by_raw.begin(), by_raw.end(),
                             [&](std::size_t a, std::size_t b) { return rows[a].raw < rows[b].raw; });
            std::size_t block_rank = 0;
            for (std::size_t r = 0; r < by_raw.size(); ++r) {
                if (r > 0 && rows[by_raw[r]].raw != rows[by_raw[r - 1]].raw) block_rank = r;
                const auto decile = 10 * block_rank / rows.size() + 1;
                score[by_raw[r]] = static_cast<double>(decile) / 10.0;
            }
            break;
        }
    }
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (!(score[k] > 0.0)) {
            throw InvalidInput("item '" + rows[k].id + "' has non-positive score " + format_double(score[k]) +
                               " after transform");
        }
    }

    std::vector<std::size_t> kept(rows.size());
    std::iota(kept.begin(), kept.end(), std::size_t{0});
    if (mapping.top_n) {
        if (*mapping.top_n == 0) throw InvalidInput("top_n leaves no items");
        std::stable_sort(kept.begin(), kept.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
        kept.resize(std::min(kept.size(), *mapping.top_n));
        std::sort(kept.begin(), kept.end());
    }
    if (kept.empty()) throw InvalidInput("no items left after top_n selection");

    std::vector<double> kept_scores;
    std::vector<std::size_t> group_of;
    std::vector<std::string> labels;
    std::map<std::string, std::size_t> group_index;
    for (std::size_t k : kept) {
        kept_scores.push_back(score[k]);
        labels.push_back(rows[k].id);
        auto [it, inserted] = group_index.emplace(rows[k].group, report.group_names.size());
        if (inserted) report.group_names.push_back(rows[k].group);
        group_of.push_back(it->second);
    }
    report.items_kept = kept.size();
    const std::size_t gamma = report.group_names.size();
    return {Instance(normalize_scores(kept_scores), GroupAssignment(std::move(group_of), gamma), std::move(labels)),
            std::move(report)};
}

inline LoadedInstance load_csv(const std::string& path, const ColumnMapping& mapping) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open CSV file '" + path + "'");
    return load_csv(in, mapping);
}

/// Writes the canonical `id,score,group` form. Group h is written as "g<h>".
inline void write_csv(std::ostream& out, const Instance& inst) {
    out << "id,score,group\n";
    for (std::size_t i = 0; i < inst.size(); ++i) {
        out << detail::quote_csv(inst.label(i)) << ',' << format_double(inst.scores[i]) << ",g"
            << inst.groups.group_of(i) << '\n';
    }
}

inline void write_csv(const std::string& path, const Instance& inst) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write CSV file '" + path + "'");
    write_csv(out, inst);
}

/// Share of items in each group, in group index order.
inline std::vector<double> group_proportions(const GroupAssignment& groups) {
    std::vector<double> out;
    for (std::size_t h = 0; h < groups.num_groups(); ++h) {
        out.push_back(static_cast<double>(groups.group_size(h)) / static_cast<double>(groups.size()));
    }
    return out;
}

// ─── Synthetic families ───────────────────────────────────────

enum class SyntheticKind { geo, arith, steps, har };

inline SyntheticKind parse_synthetic_kind(std::string_view name) {
    if (name == "geo") return SyntheticKind::geo;
    if (name == "arith") return SyntheticKind::arith;
    if (name == "steps") return SyntheticKind::steps;
    if (name == "har") return SyntheticKind::har;
    throw InvalidInput("unknown synthetic family '" + std::string(name) + "' (expected geo, arith, steps or har)");
}

inline std::string to_string(SyntheticKind k) {
    switch (k) {
        case SyntheticKind::geo: return "geo";
        case SyntheticKind::arith: return "arith";
        case SyntheticKind::steps: return "steps";
        case SyntheticKind::har: return "har";
    }
    return "geo";
}

struct SyntheticParams {
    double geo_ratio = 0.8;
    /// Score of the last item for arith, and of the last plateau for steps.
    double arith_end = 0.1;
    /// Overrides the arith/steps decrement when set.
    std::optional<double> arith_step;
    std::size_t step_width = 5;
};

/// Scores of a synthetic family in descending order, θ_1 = 1.
inline std::vector<double> synthetic_scores(SyntheticKind kind, std::size_t n, const SyntheticParams& params = {}) {
    if (n == 0) throw InvalidInput("synthetic instance needs n >= 1");
    std::vector<double> s(n);
    auto decrement = [&](std::size_t levels) {
        if (params.arith_step) return *params.arith_step;
        return levels <= 1 ? 0.0 : (1.0 - params.arith_end) / static_cast<double>(levels - 1);
    };
    switch (kind) {
        case SyntheticKind::geo:
            if (!(params.geo_ratio > 0.0 && params.geo_ratio <= 1.0)) {
                throw InvalidInput("geo ratio must lie in (0, 1]");
            }
            for (std::size_t i = 0; i < n; ++i) s[i] = std::pow(params.geo_ratio, static_cast<double>(i));
            break;
        case SyntheticKind::arith: {
            const double d = decrement(n);
            for (std::size_t i = 0; i < n; ++i) s[i] = 1.0 - static_cast<double>(i) * d;
            break;
        }
        case SyntheticKind::steps: {
            if (params.step_width == 0) throw InvalidInput("step width must be positive");
            const std::size_t levels = (n + params.step_width - 1) / params.step_width;
            const double d = decrement(levels);
            for (std::size_t i = 0; i < n; ++i) {
                s[i] = 1.0 - static_cast<double>(i / params.step_width) * d;
            }
            break;
        }
        case SyntheticKind::har:
            for (std::size_t i = 0; i < n; ++i) s[i] = 1.0 / static_cast<double>(i + 1);
            break;
    }
    for (double v : s) {
        if (!(v > 0.0)) throw InvalidInput("synthetic parameters produce a non-positive score");
    }
    return s;
}

/// Group sizes by largest remainder, then a smooth weighted round-robin over
/// the score order so every prefix stays close to the target proportions.
/// The seed rotates the pattern.
inline GroupAssignment proportional_groups(std::size_t n, std::span<const double> proportions, std::uint64_t seed) {
    if (proportions.empty()) throw InvalidInput("group pattern must list at least one proportion");
    double total = 0.0;
    for (double p : proportions) {
        if (!(p > 0.0) || !std::isfinite(p)) throw InvalidInput("group proportions must be positive");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw InvalidInput("group proportions sum to " + format_double(total) + ", expected 1");
    }
    const std::size_t gamma = proportions.size();
    std::vector<std::size_t> count(gamma);
    std::vector<std::pair<double, std::size_t>> remainder;
    std::size_t assigned = 0;
    for (std::size_t h = 0; h < gamma; ++h) {
        const double exact = proportions[h] * static_cast<double>(n);
        // Guard against 0.8*15 landing at 11.999...
        count[h] = static_cast<std::size_t>(std::floor(exact + 1e-9));
        assigned += count[h];
        remainder.emplace_back(exact - static_cast<double>(count[h]), h);
    }
    std::stable_sort(remainder.begin(), remainder.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++count[remainder[k % gamma].second];
    for (std::size_t h = 0; h < gamma; ++h) {
        if (count[h] == 0) {
            throw InvalidInput("group pattern leaves group " + std::to_string(h) + " empty for n = " +
                               std::to_string(n));
        }
    }

    std::vector<std::size_t> sequence(n);
    std::vector<long long> credit(gamma, 0);
    for (std::size_t t = 0; t < n; ++t) {
        std::size_t pick = 0;
        for (std::size_t h = 0; h < gamma; ++h) {
            credit[h] += static_cast<long long>(count[h]);
            if (credit[h] > credit[pick]) pick = h;
        }
        credit[pick] -= static_cast<long long>(n);
        sequence[t] = pick;
    }
    const std::size_t shift = static_cast<std::size_t>(seed % n);
    std::vector<std::size_t> group_of(n);
    for (std::size_t i = 0; i < n; ++i) group_of[i] = sequence[(i + shift) % n];
    return GroupAssignment(std::move(group_of), gamma);
}

inline Instance gen_synthetic(SyntheticKind kind, std::size_t n, std::span<const double> group_pattern,
                              std::uint64_t seed, const SyntheticParams& params = {}) {
    auto scores = synthetic_scores(kind, n, params);
    return Instance(ScoreVector(std::move(scores)), proportional_groups(n, group_pattern, seed));
}

// ─── Hard instances ───────────────────────────────────────────
//
// Items are split into S (high level θ(1/2+ε̃)²), T (middle level
// θ(1/4−ε̃²)) and the rest (low level θ(1/2−ε̃)²), with ε̃ = ε (4/n)^(1/p).
// T is the last n/4 indices and the true S* the first n/4. Each
// alternative promotes a further n/4 items from the rest to the high level.

constexpr std::uint64_t kAlternativeEnumerationLimit = 100000;

inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) noexcept {
    if (k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 result = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        result = result * (n - k + i) / i;
        if (result > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
    }
    return static_cast<std::uint64_t>(result);
}

class HardInstancePair {
public:
    HardInstancePair(std::size_t n, double epsilon, NormOrder p, double theta_margin)
        : n_(n), true_instance_(build(n, epsilon, p, theta_margin)) {}

    std::size_t size() const noexcept { return n_; }
    const Instance& true_instance() const noexcept { return true_instance_; }
    double epsilon_tilde() const noexcept { return epsilon_tilde_; }
    double theta_base() const noexcept { return theta_; }

    double high_level() const noexcept { return theta_ * (0.5 + epsilon_tilde_) * (0.5 + epsilon_tilde_); }
    double middle_level() const noexcept { return theta_ * (0.25 - epsilon_tilde_ * epsilon_tilde_); }
    double low_level() const noexcept { return theta_ * (0.5 - epsilon_tilde_) * (0.5 - epsilon_tilde_); }

    std::span<const std::size_t> s_star() const noexcept { return s_star_; }
    std::span<const std::size_t> t_set() const noexcept { return t_set_; }
    std::span<const std::size_t> rest() const noexcept { return rest_; }

    /// C(n/2, n/4), saturating.
    std::uint64_t alternative_count() const noexcept { return binomial(rest_.size(), n_ / 4); }

    /// Instance whose high-level set is S* ∪ promoted; `promoted` must be an
    /// n/4-subset of rest().
    Instance alternative(std::span<const std::size_t> promoted) const {
        if (promoted.size() != n_ / 4) throw InvalidInput("alternative must promote exactly n/4 items");
        std::vector<double> s(true_instance_.scores.begin(), true_instance_.scores.end());
        for (std::size_t i : promoted) {
            if (!std::binary_search(rest_.begin(), rest_.end(), i) || s[i] != low_level()) {
                throw InvalidInput("promoted item " + std::to_string(i) + " is not a distinct member of the rest set");
            }
            s[i] = high_level();
        }
        return Instance(ScoreVector(std::move(s)), true_instance_.groups, true_instance_.labels);
    }

    /// Calls fn(promoted_subset) for every alternative when there are at most
    /// min(limit, 10^5) of them (lexicographic order); otherwise for
    /// min(limit, 10^5) distinct subsets drawn uniformly without replacement.
    template <class Fn>
    std::uint64_t for_each_alternative(Fn&& fn, std::uint64_t limit = kAlternativeEnumerationLimit,
                                       std::uint64_t seed = 0) const {
        const std::uint64_t cap = std::min(limit, kAlternativeEnumerationLimit);
        const std::uint64_t total = alternative_count();
        const std::size_t k = n_ / 4;
        std::vector<std::size_t> subset(k);
        if (total <= cap) {
            std::vector<std::size_t> idx(k);
            std::iota(idx.begin(), idx.end(), std::size_t{0});
            for (std::uint64_t visited = 0;; ++visited) {
                for (std::size_t j = 0; j < k; ++j) subset[j] = rest_[idx[j]];
                fn(std::span<const std::size_t>(subset));
                // Advance to the next k-combination of rest_ indices.
                std::size_t j = k;
                while (j > 0 && idx[j - 1] == rest_.size() - k + (j - 1)) --j;
                if (j == 0) return visited + 1;
                ++idx[j - 1];
                for (std::size_t t = j; t < k; ++t) idx[t] = idx[t - 1] + 1;
            }
        }
        std::mt19937_64 rng(derive_stream_seed(seed, 0xA17E));
        std::set<std::vector<std::size_t>> seen;
        std::vector<std::size_t> pool(rest_.begin(), rest_.end());
        while (seen.size() < cap) {
            for (std::size_t j = 0; j < k; ++j) {
                std::uniform_int_distribution<std::size_t> pick(j, pool.size() - 1);
                std::swap(pool[j], pool[pick(rng)]);
            }
            subset.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
            std::sort(subset.begin(), subset.end());
            if (seen.insert(subset).second) fn(std::span<const std::size_t>(subset));
        }
        return cap;
    }

private:
    Instance build(std::size_t n, double epsilon, NormOrder p, double theta_margin) {
        if (n == 0 || n % 4 != 0) throw InvalidInput("hard instance needs n divisible by 4, got " + std::to_string(n));
        if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InvalidInput("epsilon must be positive");
        if (!(theta_margin > 0.0)) throw InvalidInput("theta margin must be positive");
        epsilon_tilde_ = epsilon * std::pow(4.0 / static_cast<double>(n), p.reciprocal());
        if (!(epsilon_tilde_ < 0.5)) {
            throw InvalidInput("effective tolerance " + format_double(epsilon_tilde_) +
                               " must be below 1/2 for distinct positive score levels");
        }
        theta_ = 1.0 / (1.0 - 2.0 * epsilon_tilde_) + theta_margin;
        const std::size_t quarter = n / 4;
        std::vector<double> s(n);
        std::vector<std::string> labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (i < quarter) {
                s_star_.push_back(i);
                s[i] = high_level();
                labels[i] = "s" + std::to_string(i);
            } else if (i >= n - quarter) {
                t_set_.push_back(i);
                s[i] = middle_level();
                labels[i] = "t" + std::to_string(i);
            } else {
                rest_.push_back(i);
                s[i] = low_level();
                labels[i] = "r" + std::to_string(i);
            }
        }
        return Instance(ScoreVector(std::move(s)), GroupAssignment::single_group(n), std::move(labels));
    }

    std::size_t n_;
    double epsilon_tilde_ = 0.0;
    double theta_ = 0.0;
    std::vector<std::size_t> s_star_;
    std::vector<std::size_t> t_set_;
    std::vector<std::size_t> rest_;
    Instance true_instance_;
};

inline HardInstancePair gen_hard_instance(std::size_t n, double epsilon, NormOrder p, double theta_margin = 1e-6) {
    return HardInstancePair(n, epsilon, p, theta_margin);
}

// ─── KL divergence ────────────────────────────────────────────

/// kl(a, b) between Bernoulli(a) and Bernoulli(b), a, b in (0, 1).
inline double bernoulli_kl(double a, double b) {
    if (!(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0)) {
        throw InvalidInput("Bernoulli KL needs probabilities strictly inside (0, 1)");
    }
    if (a == b) return 0.0;
    return a * std::log(a / b) + (1.0 - a) * std::log((1.0 - a) / (1.0 - b));
}

/// KL between the winner distributions of the duel {i, j} under two instances.
inline double kl_arm_divergence(const Instance& first, const Instance& second, std::size_t i, std::size_t j) {
    if (first.size() != second.size()) throw InvalidInput("instances must share the same item universe");
    return bernoulli_kl(win_probability(first.scores, i, j), win_probability(second.scores, i, j));
}

}  // namespace fairpac
