#include "targeval/core.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <unordered_map>

#include "test_util.hpp"

namespace {

using namespace targeval;
using targeval_tests::identity_method;
using targeval_tests::make_population;
using targeval_tests::random_method;
using targeval_tests::random_outcomes;

Population abc_population(const std::vector<std::string>& ids, const std::vector<int>& outcomes) {
    std::vector<Unit> units;
    for (std::size_t i = 0; i < ids.size(); ++i) units.push_back(Unit{ids[i], outcomes[i]});
    return Population(std::move(units));
}

std::vector<std::string> ranking_ids(const TargetingMethod& method, const Population& population) {
    std::vector<std::string> ids;
    for (const auto idx : method.order()) ids.push_back(population.unit(idx).id);
    return ids;
}

TEST(PopulationTest, RejectsInvalidInput) {
    EXPECT_THROW(Population({Unit{"a", 1}}), ValidationError);
    EXPECT_THROW(abc_population({"a", "b"}, {1, 2}), ValidationError);
    EXPECT_THROW(abc_population({"a", "a"}, {1, 0}), ValidationError);
}

TEST(PopulationTest, LookupAndCounts) {
    const Population pop = abc_population({"a", "b", "c"}, {1, 0, 1});
    EXPECT_EQ(pop.size(), 3U);
    EXPECT_EQ(pop.index_of("b"), 1U);
    EXPECT_THROW(pop.index_of("z"), ValidationError);
    EXPECT_EQ(pop.positive_count(), 2);
}

TEST(RankFromScoresTest, StrictOrdering) {
    const Population pop = abc_population({"a", "b", "c"}, {1, 0, 1});
    const TargetingMethod method =
        rank_from_scores(pop, {{"a", 0.9}, {"b", 0.5}, {"c", 0.1}});
    EXPECT_EQ(ranking_ids(method, pop), (std::vector<std::string>{"a", "b", "c"}));
}

TEST(RankFromScoresTest, TieBreakById) {
    const Population pop = abc_population({"b", "a"}, {0, 1});
    const TargetingMethod method = rank_from_scores(pop, {{"a", 0.5}, {"b", 0.5}});
    EXPECT_EQ(ranking_ids(method, pop), (std::vector<std::string>{"a", "b"}));
}

TEST(RankFromScoresTest, SeededTieBreakIsDeterministic) {
    const Population pop = abc_population({"a", "b", "c"}, {1, 0, 1});
    const std::unordered_map<std::string, double> scores{{"a", 0.5}, {"b", 0.5}, {"c", 0.4}};
    const TargetingMethod first = rank_from_scores(pop, scores, TieBreak::seeded(7));
    const TargetingMethod second = rank_from_scores(pop, scores, TieBreak::seeded(7));
    EXPECT_EQ(first.order(), second.order());
    // c is not tied, so it stays last regardless of the shuffle.
    EXPECT_EQ(ranking_ids(first, pop).back(), "c");
}

TEST(RankFromScoresTest, MissingScoreNamesUnit) {
    const Population pop = abc_population({"a", "b"}, {1, 0});
    try {
        rank_from_scores(pop, {{"a", 0.9}});
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("'b'"), std::string::npos);
    }
}

TEST(RankFromScoresTest, PureFunctionUnderIdTies) {
    const Population pop = abc_population({"d", "b", "a", "c"}, {1, 0, 1, 0});
    std::unordered_map<std::string, double> forward;
    forward.emplace("a", 0.3);
    forward.emplace("b", 0.3);
    forward.emplace("c", 0.7);
    forward.emplace("d", 0.3);
    std::unordered_map<std::string, double> backward;
    backward.emplace("d", 0.3);
    backward.emplace("c", 0.7);
    backward.emplace("b", 0.3);
    backward.emplace("a", 0.3);
    EXPECT_EQ(rank_from_scores(pop, forward).order(), rank_from_scores(pop, backward).order());
}

TEST(SelectTopTest, IdentityCase) {
    const Population pop = abc_population({"a", "b", "c", "d"}, {1, 0, 1, 0});
    const TargetingMethod method = identity_method(pop);
    EXPECT_EQ(select_top(method, pop, {"a", "b", "c", "d"}, 4),
              (std::vector<std::string>{"a", "b", "c", "d"}));
}

TEST(SelectTopTest, RestrictionProperty) {
    const Population pop = abc_population({"a", "b", "c", "d"}, {1, 0, 1, 0});
    const TargetingMethod method = identity_method(pop);
    EXPECT_EQ(select_top(method, pop, {"b", "d"}, 1), (std::vector<std::string>{"b"}));
    EXPECT_EQ(select_top(method, pop, {"c", "d", "a"}, 2), (std::vector<std::string>{"a", "c"}));
}

TEST(SelectTopTest, RejectsBadArguments) {
    const Population pop = abc_population({"a", "b", "c", "d"}, {1, 0, 1, 0});
    const TargetingMethod method = identity_method(pop);
    EXPECT_THROW(select_top(method, pop, {"a", "b"}, 3), ValidationError);
    EXPECT_THROW(select_top(method, pop, {"a", "a"}, 1), ValidationError);
    EXPECT_THROW(select_top(method, pop, {"a", "z"}, 1), ValidationError);
}

// Nested-subset consistency: whenever the top-j of a superset lies entirely
// inside a subset of it, both must select exactly the same units.
TEST(SelectTopTest, NestedSubsetConsistency) {
    SplitMix64 rng = SplitMix64::stream(11, 0);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 6 + rng.below(10);
        const Population pop = make_population(random_outcomes(n, rng));
        const TargetingMethod method = random_method(pop, rng);

        std::vector<std::string> outer;
        for (std::size_t i = 0; i < n; ++i) {
            if (rng.below(4) != 0) outer.push_back(pop.unit(i).id);
        }
        if (outer.size() < 2) continue;
        const std::size_t j = 1 + rng.below(outer.size() / 2 + 1);
        const std::vector<std::string> top_outer = select_top(method, pop, outer, j);

        std::vector<std::string> inner = top_outer; // keep the selected units...
        for (const auto& id : outer) {              // ...and a random remainder
            if (std::find(top_outer.begin(), top_outer.end(), id) == top_outer.end() &&
                rng.below(2) == 0) {
                inner.push_back(id);
            }
        }
        EXPECT_EQ(select_top(method, pop, inner, j), top_outer);
    }
}

TEST(PrecisionCurveTest, DirectDefinition) {
    const Population pop = make_population({1, 1, 0, 1});
    const PrecisionCurve curve = precision_curve(identity_method(pop), pop);
    EXPECT_DOUBLE_EQ(curve.at(1), 1.0);
    EXPECT_DOUBLE_EQ(curve.at(2), 1.0);
    EXPECT_DOUBLE_EQ(curve.at(3), 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(curve.at(4), 3.0 / 4.0);
    EXPECT_EQ(curve.positives_at(4), 3);
}

TEST(PrecisionCurveTest, ConstantCase) {
    const Population pop = make_population({1, 1, 1, 1, 1});
    const PrecisionCurve curve = precision_curve(identity_method(pop), pop);
    for (std::size_t j = 1; j <= 5; ++j) EXPECT_DOUBLE_EQ(curve.at(j), 1.0);
}

TEST(PrecisionCurveTest, TwoUnits) {
    const Population pop = make_population({0, 1});
    const PrecisionCurve curve = precision_curve(identity_method(pop), pop);
    EXPECT_DOUBLE_EQ(curve.at(1), 0.0);
    EXPECT_DOUBLE_EQ(curve.at(2), 0.5);
}

// Final curve value is the population positive rate for any ranking.
TEST(PrecisionCurveTest, FinalValueIsPositiveRate) {
    SplitMix64 rng = SplitMix64::stream(13, 0);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 2 + rng.below(40);
        const Population pop = make_population(random_outcomes(n, rng));
        const PrecisionCurve curve = precision_curve(random_method(pop, rng), pop);
        EXPECT_DOUBLE_EQ(curve.at(n), static_cast<double>(pop.positive_count()) /
                                          static_cast<double>(n));
        // Step bound: consecutive values can move by at most 1/(j+1).
        for (std::size_t j = 1; j < n; ++j) {
            EXPECT_LE(std::abs(curve.at(j + 1) - curve.at(j)),
                      1.0 / static_cast<double>(j + 1) + 1e-15);
        }
    }
}

TEST(DeltaTrueTest, IdenticalMethods) {
    const Population pop = make_population({1, 0, 1, 0});
    const TargetingMethod method = identity_method(pop);
    EXPECT_DOUBLE_EQ(delta_true(method, method, pop, 3), 0.0);
}

TEST(DeltaTrueTest, ExtremeCase) {
    const Population pop = make_population({1, 1, 0, 0});
    const TargetingMethod s = identity_method(pop);
    EXPECT_DOUBLE_EQ(delta_true(s, s.reversed(), pop, 2), 1.0);
}

TEST(DeltaTrueTest, SixUnitInstance) {
    const Population pop = make_population({1, 1, 0, 1, 0, 0});
    const TargetingMethod s = identity_method(pop);
    const TargetingMethod t = s.reversed();
    EXPECT_DOUBLE_EQ(precision_curve(s, pop).at(2), 1.0);
    EXPECT_DOUBLE_EQ(precision_curve(t, pop).at(2), 0.0);
    EXPECT_DOUBLE_EQ(delta_true(s, t, pop, 2), 1.0);
}

TEST(DeltaTrueTest, AntisymmetryAndRangeChecks) {
    SplitMix64 rng = SplitMix64::stream(17, 0);
    const Population pop = make_population(random_outcomes(12, rng));
    const TargetingMethod s = random_method(pop, rng);
    const TargetingMethod t = random_method(pop, rng);
    for (std::size_t k = 1; k <= 12; ++k) {
        EXPECT_DOUBLE_EQ(delta_true(s, t, pop, k), -delta_true(t, s, pop, k));
    }
    EXPECT_THROW(delta_true(s, t, pop, 0), ValidationError);
    EXPECT_THROW(delta_true(s, t, pop, 13), ValidationError);
}

TEST(TargetingMethodTest, ValidatesBijection) {
    const Population pop = abc_population({"a", "b", "c"}, {1, 0, 1});
    EXPECT_THROW(TargetingMethod::from_ranking(pop, {"a", "b"}), ValidationError);
    EXPECT_THROW(TargetingMethod::from_ranking(pop, {"a", "b", "b"}), ValidationError);
    EXPECT_THROW(TargetingMethod::from_ranking(pop, {"a", "b", "z"}), ValidationError);
    const TargetingMethod method = TargetingMethod::from_ranking(pop, {"c", "a", "b"});
    EXPECT_EQ(method.rank_of(pop.index_of("c")), 1U);
    EXPECT_EQ(method.rank_of(pop.index_of("b")), 3U);
}

} // namespace
