// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The fairpac Authors

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>

#include "fairpac/types.hpp"

using namespace fairpac;
using Catch::Matchers::WithinAbs;

TEST_CASE("NormOrder parses numbers and infinity") {
    CHECK(NormOrder::parse("inf").is_infinite());
    CHECK(NormOrder::parse("infinity").is_infinite());
    CHECK(NormOrder::parse("2").value() == 2.0);
    CHECK(NormOrder::parse("1.5").value() == 1.5);
    CHECK(NormOrder::parse("3").to_string() == "3");
    CHECK(NormOrder::infinity().to_string() == "inf");
    CHECK(NormOrder::infinity().reciprocal() == 0.0);
    CHECK(NormOrder(4.0).reciprocal() == 0.25);
    CHECK(NormOrder() == NormOrder(1.0));
}

TEST_CASE("NormOrder rejects orders below one") {
    CHECK_THROWS_AS(NormOrder(0.5), InvalidInput);
    CHECK_THROWS_AS(NormOrder(std::numeric_limits<double>::infinity()), InvalidInput);
    CHECK_THROWS_AS(NormOrder::parse("abc"), InvalidInput);
    CHECK_THROWS_AS(NormOrder::parse("2x"), InvalidInput);
    CHECK_THROWS_AS(NormOrder::parse("0"), InvalidInput);
}

TEST_CASE("ScoreVector requires positive finite scores") {
    CHECK_THROWS_AS(ScoreVector({}), InvalidInput);
    CHECK_THROWS_AS(ScoreVector({1.0, 0.0}), InvalidInput);
    CHECK_THROWS_AS(ScoreVector({1.0, -0.5}), InvalidInput);
    CHECK_THROWS_AS(ScoreVector({std::nan("")}), InvalidInput);
    CHECK_THROWS_AS(ScoreVector({std::numeric_limits<double>::infinity()}), InvalidInput);
    const ScoreVector s({0.3, 0.9});
    CHECK(s.size() == 2);
    CHECK(s.max_score() == 0.9);
    CHECK_THROWS(s.at(2));
}

TEST_CASE("normalize_scores divides by the maximum") {
    CHECK(normalize_scores(ScoreVector({2.0, 1.0, 0.5})) == ScoreVector({1.0, 0.5, 0.25}));
    CHECK(normalize_scores(ScoreVector({1.0})) == ScoreVector({1.0}));
    CHECK(normalize_scores(ScoreVector({0.91, 0.82, 1.0})) == ScoreVector({0.91, 0.82, 1.0}));
    const std::vector<double> bad{1.0, -1.0};
    CHECK_THROWS_AS(normalize_scores(bad), InvalidInput);
}

TEST_CASE("normalize_scores keeps order and caps at one", "[property]") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dist(1e-6, 1e6);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> raw(1 + rng() % 30);
        for (double& v : raw) v = dist(rng);
        const auto s = normalize_scores(raw);
        CHECK(s.max_score() == 1.0);
        for (std::size_t i = 0; i < raw.size(); ++i) {
            CHECK(s[i] > 0.0);
            CHECK(s[i] <= 1.0);
            for (std::size_t j = 0; j < raw.size(); ++j) CHECK((raw[i] < raw[j]) == (s[i] < s[j]));
        }
    }
}

TEST_CASE("GroupAssignment validates the partition") {
    const GroupAssignment g({0, 1, 0, 2});
    CHECK(g.num_groups() == 3);
    CHECK(g.group_size(0) == 2);
    CHECK(std::vector<std::size_t>(g.members(0).begin(), g.members(0).end()) == std::vector<std::size_t>{0, 2});
    CHECK(g.group_of(3) == 2);
    CHECK_THROWS_AS(GroupAssignment({0, 2}), InvalidInput);       // group 1 empty
    CHECK_THROWS_AS(GroupAssignment({0, 1}, 1), InvalidInput);    // label out of range
    CHECK_THROWS_AS(GroupAssignment(std::vector<std::size_t>{}), InvalidInput);
    CHECK(GroupAssignment::single_group(4).num_groups() == 1);
}

TEST_CASE("Ranking is a bijection with inverse lookup") {
    const Ranking r({2, 0, 1});
    CHECK(r.item_at(0) == 2);
    CHECK(r.position_of(2) == 0);
    CHECK(r.position_of(1) == 2);
    for (std::size_t pos = 0; pos < 3; ++pos) CHECK(r.position_of(r.item_at(pos)) == pos);
    CHECK_THROWS_AS(Ranking({0, 0, 1}), InvalidInput);
    CHECK_THROWS_AS(Ranking({0, 3, 1}), InvalidInput);
    CHECK(Ranking::identity(3) == Ranking({0, 1, 2}));
}

TEST_CASE("FairnessSpec weights and validation") {
    const GroupAssignment g({0, 0, 0, 1});
    const auto unit = FairnessSpec::unit_phi(NormOrder(1.0), NormOrder(2.0), g);
    const auto sized = FairnessSpec::group_size_phi(NormOrder(1.0), NormOrder(2.0), g);
    CHECK_THAT(unit.weights(g)[0], WithinAbs(1.0 / 3.0, 1e-15));
    CHECK(unit.weights(g)[1] == 1.0);
    CHECK(sized.weights(g) == std::vector<double>{1.0, 1.0});
    FairnessSpec bad{NormOrder(1.0), NormOrder(1.0), {4.0, 1.0}};
    CHECK_THROWS_AS(bad.validate_against(g), InvalidInput);  // φ_0 > n_0
    bad.phi = {0.5, 1.0};
    CHECK_THROWS_AS(bad.validate_against(g), InvalidInput);  // φ_0 < 1
    bad.phi = {1.0};
    CHECK_THROWS_AS(bad.validate_against(g), InvalidInput);
}

TEST_CASE("Instance checks sizes and labels") {
    CHECK_THROWS_AS(Instance(ScoreVector({1.0, 0.5}), GroupAssignment::single_group(3)), InvalidInput);
    CHECK_THROWS_AS(Instance(ScoreVector({1.0}), GroupAssignment::single_group(1), {"a", "b"}), InvalidInput);
    const Instance inst(ScoreVector({1.0, 0.5}), GroupAssignment::single_group(2));
    CHECK(inst.label(1) == "1");
}

TEST_CASE("optimal_ranking sorts descending with index tie-break") {
    CHECK(optimal_ranking(ScoreVector({0.5, 1.0, 0.7})) == Ranking({1, 2, 0}));
    CHECK(optimal_ranking(ScoreVector({0.4, 0.4, 0.4})) == Ranking::identity(3));
    std::vector<double> family;
    for (int i = 1; i <= 9; ++i) family.push_back(1.0 - (i - 1) * 0.09);
    CHECK(optimal_ranking(ScoreVector(family)) == Ranking::identity(9));
    CHECK(optimal_ranking(ScoreVector({0.2, 0.9, 0.2, 0.9})) == Ranking({1, 3, 0, 2}));
}
