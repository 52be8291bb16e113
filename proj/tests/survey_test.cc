#include "targeval/survey.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "targeval/oracle.hpp"
#include "test_util.hpp"

namespace {

using namespace targeval;
using targeval_tests::identity_method;
using targeval_tests::make_population;
using targeval_tests::random_method;
using targeval_tests::random_outcomes;

// Directly assembled design for distribution-level fixtures.
SurveyDesign make_design(std::int64_t k, std::vector<int> s_excl, std::vector<int> t_excl,
                         std::vector<int> intersection) {
    SurveyDesign design;
    design.k = k;
    design.s_excl_outcomes = std::move(s_excl);
    design.t_excl_outcomes = std::move(t_excl);
    design.intersection_outcomes = std::move(intersection);
    design.intersection.resize(design.intersection_outcomes.size());
    design.positives_s_excl =
        std::accumulate(design.s_excl_outcomes.begin(), design.s_excl_outcomes.end(), 0LL);
    design.positives_t_excl =
        std::accumulate(design.t_excl_outcomes.begin(), design.t_excl_outcomes.end(), 0LL);
    design.alpha = static_cast<double>(design.excluded_size()) / static_cast<double>(k);
    design.sample_size_s = std::min(k / 2, design.excluded_size());
    design.sample_size_t = design.sample_size_s;
    return design;
}

TEST(BuildSurveyDesignTest, FullOverlap) {
    const Population pop = make_population({1, 0, 1, 0});
    const TargetingMethod s = identity_method(pop);
    const SurveyDesign design = build_survey_design(s, s, pop, 2);
    EXPECT_DOUBLE_EQ(design.alpha, 0.0);
    EXPECT_TRUE(design.s_excl_outcomes.empty());
    EXPECT_TRUE(design.t_excl_outcomes.empty());
    EXPECT_EQ(design.sample_size_s, 0);
    EXPECT_TRUE(survey_is_degenerate(design));
}

TEST(BuildSurveyDesignTest, DisjointTops) {
    const Population pop = make_population({1, 1, 0, 0, 0, 0});
    const TargetingMethod s = identity_method(pop);
    const SurveyDesign design = build_survey_design(s, s.reversed(), pop, 2);
    EXPECT_DOUBLE_EQ(design.alpha, 1.0);
    EXPECT_EQ(design.excluded_size(), 2);
    EXPECT_EQ(design.sample_size_s, 1); // k/2 per arm
    EXPECT_EQ(design.positives_s_excl, 2);
    EXPECT_EQ(design.positives_t_excl, 0);
}

TEST(BuildSurveyDesignTest, PartialOverlap) {
    // S ranks a,b,c,d,...; T ranks c,d,e,f,...; top-4 intersection is {c,d}.
    const Population pop = make_population({1, 0, 1, 0, 1, 0});
    const TargetingMethod s = identity_method(pop);
    const TargetingMethod t =
        TargetingMethod::from_ranking(pop, {"u03", "u04", "u05", "u06", "u01", "u02"});
    const SurveyDesign design = build_survey_design(s, t, pop, 4);
    EXPECT_EQ(design.intersection_size(), 2);
    EXPECT_DOUBLE_EQ(design.alpha, 0.5);
    EXPECT_EQ(design.excluded_size(), 2);
    EXPECT_EQ(design.sample_size_s, 2); // census: k - |I| = 2 < k/2 is false, min(2,2)=2
    EXPECT_EQ(design.intersection_outcomes, (std::vector<int>{1, 0}));
    EXPECT_THROW(build_survey_design(s, t, pop, 7), ValidationError);
}

TEST(BuildSurveyDesignTest, CensusWhenOverlapIsHigh) {
    // Top-6 of S is a..f, of T is a..e,g: intersection 5, arm 1 < k/2 = 3.
    const Population pop = make_population({1, 0, 1, 0, 1, 0, 1, 0});
    const TargetingMethod s = identity_method(pop);
    const TargetingMethod t = TargetingMethod::from_ranking(
        pop, {"u01", "u02", "u03", "u04", "u05", "u07", "u06", "u08"});
    const SurveyDesign design = build_survey_design(s, t, pop, 6);
    EXPECT_EQ(design.intersection_size(), 5);
    EXPECT_EQ(design.excluded_size(), 1);
    EXPECT_EQ(design.sample_size_s, 1); // whole arm observed
}

TEST(ExactSurveyDistributionTest, TwoAtomExample) {
    const SurveyDesign design = make_design(2, {1, 0}, {0, 0}, {});
    const ExactEstimatorDistribution dist = exact_survey_distribution(design);
    ASSERT_EQ(dist.support.size(), 2U);
    EXPECT_DOUBLE_EQ(dist.support[0], 0.0);
    EXPECT_DOUBLE_EQ(dist.support[1], 1.0);
    EXPECT_DOUBLE_EQ(dist.pmf[0], 0.5);
    EXPECT_DOUBLE_EQ(dist.pmf[1], 0.5);
    EXPECT_DOUBLE_EQ(dist.mean, 0.5);
    EXPECT_DOUBLE_EQ(dist.variance, 0.25);
}

TEST(ExactSurveyDistributionTest, DegenerateFullOverlap) {
    const SurveyDesign design = make_design(4, {}, {}, {1, 0, 1, 1});
    const ExactEstimatorDistribution dist = exact_survey_distribution(design);
    ASSERT_EQ(dist.support.size(), 1U);
    EXPECT_DOUBLE_EQ(dist.support[0], 0.0);
    EXPECT_DOUBLE_EQ(dist.pmf[0], 1.0);
    EXPECT_DOUBLE_EQ(dist.mean, 0.0);
}

TEST(ExactSurveyDistributionTest, ZeroSampleSizeWithPositiveAlphaIsAnError) {
    SurveyDesign design = make_design(2, {1, 0}, {0, 0}, {});
    design.sample_size_s = 0;
    design.sample_size_t = 0;
    EXPECT_THROW(exact_survey_distribution(design), ValidationError);
}

TEST(ExactSurveyDistributionTest, UnbiasedOnRandomInstances) {
    SplitMix64 rng = SplitMix64::stream(51, 0);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 4 + rng.below(40);
        const Population pop = make_population(random_outcomes(n, rng));
        const TargetingMethod s = random_method(pop, rng);
        const TargetingMethod t = random_method(pop, rng);
        const auto k = static_cast<std::int64_t>(2 + rng.below(n - 1));
        const SurveyDesign design = build_survey_design(s, t, pop, k);
        if (!survey_is_degenerate(design) && design.sample_size_s < 1) continue;
        const ExactEstimatorDistribution dist = exact_survey_distribution(design);
        EXPECT_NEAR(dist.mean, delta_true(s, t, pop, static_cast<std::size_t>(k)), 1e-12)
            << "N=" << n << " k=" << k;
        double total = 0.0;
        for (const double p : dist.pmf) total += p;
        EXPECT_NEAR(total, 1.0, 1e-12);
        double mean_check = 0.0;
        for (std::size_t i = 0; i < dist.support.size(); ++i) {
            mean_check += dist.support[i] * dist.pmf[i];
        }
        EXPECT_NEAR(dist.mean, mean_check, 1e-12);
    }
}

// Arms above the exact-integer limit take the recurrence path; unbiasedness
// and normalization must survive it.
TEST(ExactSurveyDistributionTest, LargeArmPath) {
    SplitMix64 rng = SplitMix64::stream(53, 0);
    const std::size_t n = 600;
    const Population pop = make_population(random_outcomes(n, rng));
    const TargetingMethod s = random_method(pop, rng);
    const TargetingMethod t = random_method(pop, rng);
    for (const std::int64_t k : {100, 251, 400}) {
        const SurveyDesign design = build_survey_design(s, t, pop, k);
        ASSERT_GT(design.excluded_size(), 15);
        const ExactEstimatorDistribution dist = exact_survey_distribution(design);
        EXPECT_NEAR(dist.mean, delta_true(s, t, pop, static_cast<std::size_t>(k)), 1e-12)
            << "k=" << k;
        double total = 0.0;
        for (const double p : dist.pmf) total += p;
        EXPECT_NEAR(total, 1.0, 1e-12);
    }
}

TEST(ExactSurveyDistributionTest, VarianceWeaklyDecreasesWithOverlap) {
    // k=8 throughout; arm size shrinks as the intersection grows while the
    // arm positive fraction stays 1/2. Exact variances: 1/14, 9/320, 0, 0.
    std::vector<double> variances;
    for (const std::int64_t i_size : {0, 2, 4, 6}) {
        const std::int64_t arm = 8 - i_size;
        std::vector<int> outcomes;
        for (std::int64_t j = 0; j < arm; ++j) outcomes.push_back(j < arm / 2 ? 1 : 0);
        const SurveyDesign design =
            make_design(8, outcomes, outcomes, std::vector<int>(i_size, 1));
        variances.push_back(exact_survey_distribution(design).variance);
    }
    EXPECT_NEAR(variances[0], 1.0 / 14.0, 1e-15);
    EXPECT_NEAR(variances[1], 9.0 / 320.0, 1e-15);
    EXPECT_DOUBLE_EQ(variances[2], 0.0);
    EXPECT_DOUBLE_EQ(variances[3], 0.0);
    for (std::size_t i = 1; i < variances.size(); ++i) {
        EXPECT_LE(variances[i], variances[i - 1] + 1e-15);
    }
}

TEST(SimulateSurveyTest, MeanMatchesExactLaw) {
    const SurveyDesign design = make_design(8, {1, 1, 0, 0, 1, 0}, {0, 1, 0, 0, 1, 1}, {1, 0});
    const ExactEstimatorDistribution exact = exact_survey_distribution(design);
    const EmpiricalDistribution draws = simulate_survey(design, 20000, 77);
    EXPECT_LE(std::abs(draws.mean() - exact.mean), 4.0 * draws.std_error());
}

TEST(SimulateSurveyTest, EmpiricalSupportIsSubsetOfExactSupport) {
    const SurveyDesign design = make_design(6, {1, 0, 1, 0}, {1, 1, 0, 0}, {1, 1});
    const ExactEstimatorDistribution exact = exact_survey_distribution(design);
    const EmpiricalDistribution draws = simulate_survey(design, 5000, 5);
    for (const double v : draws.values) {
        EXPECT_NE(std::find(exact.support.begin(), exact.support.end(), v), exact.support.end())
            << "draw " << v << " not an exact atom";
    }
}

// Per-atom agreement between the exact law and 1e5 simulated draws, within a
// binomial two-sided bound on each atom's frequency.
TEST(SimulateSurveyTest, FrequenciesMatchExactLawPerAtom) {
    const SurveyDesign design = make_design(8, {1, 1, 0, 0, 1, 0}, {0, 1, 0, 0, 1, 1}, {1, 0});
    const ExactEstimatorDistribution exact = exact_survey_distribution(design);
    const std::int64_t replicates = 100000;
    const EmpiricalDistribution draws = simulate_survey(design, replicates, 2718);

    std::map<double, std::int64_t> counts;
    for (const double v : draws.values) ++counts[v];
    for (const auto& [value, count] : counts) {
        EXPECT_NE(std::find(exact.support.begin(), exact.support.end(), value),
                  exact.support.end());
    }
    const auto r = static_cast<double>(replicates);
    for (std::size_t i = 0; i < exact.support.size(); ++i) {
        const double p = exact.pmf[i];
        const auto it = counts.find(exact.support[i]);
        const double freq = it == counts.end() ? 0.0 : static_cast<double>(it->second) / r;
        const double bound = 5.0 * std::sqrt(p * (1.0 - p) / r) + 1.0 / r;
        EXPECT_LE(std::abs(freq - p), bound) << "atom " << exact.support[i];
    }
}

TEST(SimulateSurveyTest, CensusArmIsDeterministic) {
    const SurveyDesign design = make_design(2, {1}, {0}, {1});
    ASSERT_EQ(design.sample_size_s, 1);
    const EmpiricalDistribution draws = simulate_survey(design, 500, 11);
    for (const double v : draws.values) {
        EXPECT_DOUBLE_EQ(v, design.alpha); // alpha * (1/1 - 0/1)
    }
}

TEST(SimulateSurveyTest, ReproducibleAndThreadCountInvariant) {
    const SurveyDesign design = make_design(8, {1, 1, 0, 0, 1, 0}, {0, 1, 0, 0, 1, 1}, {1, 0});
    const EmpiricalDistribution a = simulate_survey(design, 4000, 21, 1);
    const EmpiricalDistribution b = simulate_survey(design, 4000, 21, 3);
    EXPECT_EQ(a.values, b.values);
}

TEST(SurveyIdentityCheckTest, EqualsTrueDelta) {
    SplitMix64 rng = SplitMix64::stream(59, 0);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 4 + rng.below(30);
        const Population pop = make_population(random_outcomes(n, rng));
        const TargetingMethod s = random_method(pop, rng);
        const TargetingMethod t = random_method(pop, rng);
        const auto k = static_cast<std::int64_t>(1 + rng.below(n));
        EXPECT_NEAR(survey_identity_check(s, t, pop, k),
                    delta_true(s, t, pop, static_cast<std::size_t>(k)), 1e-12);
    }
}

TEST(SurveyIdentityCheckTest, SixUnitInstance) {
    const Population pop = make_population({1, 1, 0, 1, 0, 0});
    const TargetingMethod s = identity_method(pop);
    const TargetingMethod t = s.reversed();
    EXPECT_DOUBLE_EQ(survey_identity_check(s, t, pop, 2), 1.0);
    EXPECT_DOUBLE_EQ(survey_identity_check(s, s, pop, 2), 0.0); // alpha = 0
}

TEST(SimulateWithIntersectionTest, AbsolutePrecisionEstimatesAreUnbiased) {
    // S top-4 = {u1..u4}, T top-4 = {u4..u7}: intersection {u4}, arms of 3
    // sampled 2 at a time.
    const Population pop = make_population({1, 1, 0, 1, 0, 0, 1, 0});
    const TargetingMethod s = identity_method(pop);
    const TargetingMethod t = TargetingMethod::from_ranking(
        pop, {"u04", "u05", "u06", "u07", "u01", "u02", "u03", "u08"});
    const SurveyDesign design = build_survey_design(s, t, pop, 4);
    ASSERT_EQ(design.intersection_size(), 1);
    ASSERT_EQ(design.sample_size_s, 2);
    const SurveyAbsoluteSimulation sim = simulate_survey_with_intersection(design, 40000, 13);

    const PrecisionCurve cs = precision_curve(s, pop);
    const PrecisionCurve ct = precision_curve(t, pop);
    EXPECT_LE(std::abs(sim.mu_s_hat.mean() - cs.at(4)), 4.0 * sim.mu_s_hat.std_error());
    EXPECT_LE(std::abs(sim.mu_t_hat.mean() - ct.at(4)), 4.0 * sim.mu_t_hat.std_error());
    EXPECT_LE(std::abs(sim.delta_hat.mean() - delta_true(s, t, pop, 4)),
              4.0 * sim.delta_hat.std_error());
}

} // namespace
