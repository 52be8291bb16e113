#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_set>
#include <vector>

#include "targeval/core.hpp"
#include "targeval/errors.hpp"
#include "targeval/rational.hpp"
#include "targeval/rct.hpp"
#include "targeval/rng.hpp"

namespace targeval {

/// The survey layout for one (S, T, k): both top-k target sets, their
/// intersection, the rescaling factor alpha = 1 - |I|/k, and the two
/// excluded arms that actually get sampled.
///
/// Sample sizes are min(k/2, k - |I|) per arm: when the overlap leaves
/// fewer than k/2 units in an arm, the whole arm is observed (a census),
/// which keeps the estimator unbiased.
struct SurveyDesign {
    std::int64_t k = 0;
    std::vector<std::string> s_top;        // ids, S-rank order
    std::vector<std::string> t_top;        // ids, T-rank order
    std::vector<std::string> intersection; // ids, S-rank order
    double alpha = 0.0;
    std::int64_t sample_size_s = 0;
    std::int64_t sample_size_t = 0;
    std::int64_t positives_s_excl = 0;
    std::int64_t positives_t_excl = 0;
    std::vector<int> s_excl_outcomes; // outcomes of S_k \ I, S-rank order
    std::vector<int> t_excl_outcomes; // outcomes of T_k \ I, T-rank order
    std::vector<int> intersection_outcomes;

    std::int64_t intersection_size() const {
        return static_cast<std::int64_t>(intersection.size());
    }
    std::int64_t excluded_size() const { return k - intersection_size(); }
};

/// The point mass the estimator collapses to when the two target sets agree.
inline bool survey_is_degenerate(const SurveyDesign& design) { return design.alpha == 0.0; }

/// Estimator value of the atom with integer key d = a*n_t - b*n_s. Shared by
/// the exact law, the enumeration oracle and the simulator so their support
/// values agree bit for bit.
inline double survey_atom_value(double alpha, std::int64_t d, std::int64_t sample_size_s,
                                std::int64_t sample_size_t) {
    return alpha * (static_cast<double>(d) /
                    static_cast<double>(sample_size_s * sample_size_t));
}

inline SurveyDesign build_survey_design(const TargetingMethod& method_s,
                                        const TargetingMethod& method_t,
                                        const Population& population, std::int64_t k) {
    detail::check_k_in_range(static_cast<std::size_t>(k), population.size());
    detail::check_same_population(method_s, population, "build_survey_design");
    detail::check_same_population(method_t, population, "build_survey_design");

    SurveyDesign design;
    design.k = k;
    std::unordered_set<std::uint32_t> t_top_set;
    for (std::int64_t r = 0; r < k; ++r) {
        const std::uint32_t idx = method_t.order()[static_cast<std::size_t>(r)];
        design.t_top.push_back(population.unit(idx).id);
        t_top_set.insert(idx);
    }
    std::unordered_set<std::uint32_t> intersection_set;
    for (std::int64_t r = 0; r < k; ++r) {
        const std::uint32_t idx = method_s.order()[static_cast<std::size_t>(r)];
        design.s_top.push_back(population.unit(idx).id);
        if (t_top_set.count(idx)) {
            design.intersection.push_back(population.unit(idx).id);
            design.intersection_outcomes.push_back(population.outcome(idx));
            intersection_set.insert(idx);
        } else {
            design.s_excl_outcomes.push_back(population.outcome(idx));
            design.positives_s_excl += population.outcome(idx);
        }
    }
    for (std::int64_t r = 0; r < k; ++r) {
        const std::uint32_t idx = method_t.order()[static_cast<std::size_t>(r)];
        if (!intersection_set.count(idx)) {
            design.t_excl_outcomes.push_back(population.outcome(idx));
            design.positives_t_excl += population.outcome(idx);
        }
    }
    design.alpha = static_cast<double>(design.excluded_size()) / static_cast<double>(k);
    const std::int64_t n = std::min(k / 2, design.excluded_size());
    design.sample_size_s = n;
    design.sample_size_t = n;
    return design;
}

/// Finite discrete law of an estimator: support points, probabilities, and
/// the first two moments.
struct ExactEstimatorDistribution {
    std::vector<double> support; // ascending
    std::vector<double> pmf;
    double mean = 0.0;
    double variance = 0.0;
};

namespace detail {

inline void check_survey_samplable(const SurveyDesign& design) {
    if (design.sample_size_s < 1 || design.sample_size_t < 1) {
        throw ValidationError("survey design has a zero sample size but alpha > 0");
    }
}

// Hypergeometric pmf over the whole support, by the two-sided recurrence
// from the mode, normalized so the values sum to 1 to machine precision.
inline std::vector<double> hypergeometric_arm_pmf(std::int64_t population, std::int64_t successes,
                                                  std::int64_t draws, std::int64_t& support_lo) {
    const std::int64_t lo = std::max<std::int64_t>(0, draws + successes - population);
    const std::int64_t hi = std::min(draws, successes);
    support_lo = lo;
    std::vector<double> pmf(static_cast<std::size_t>(hi - lo + 1), 0.0);
    const std::int64_t anchor =
        std::clamp((draws + 1) * (successes + 1) / (population + 2), lo, hi);
    pmf[static_cast<std::size_t>(anchor - lo)] = 1.0;
    for (std::int64_t x = anchor; x < hi; ++x) {
        const double step = static_cast<double>((successes - x) * (draws - x)) /
                            static_cast<double>((x + 1) * (population - successes - draws + x + 1));
        pmf[static_cast<std::size_t>(x + 1 - lo)] = pmf[static_cast<std::size_t>(x - lo)] * step;
    }
    for (std::int64_t x = anchor; x > lo; --x) {
        const double step = static_cast<double>(x * (population - successes - draws + x)) /
                            static_cast<double>((successes - x + 1) * (draws - x + 1));
        pmf[static_cast<std::size_t>(x - 1 - lo)] = pmf[static_cast<std::size_t>(x - lo)] * step;
    }
    std::vector<double> ascending(pmf);
    std::sort(ascending.begin(), ascending.end());
    double total = 0.0;
    for (const double p : ascending) total += p;
    for (double& p : pmf) p /= total;
    return pmf;
}

// Arm sizes up to this bound take the exact integer path, which makes the
// resulting doubles bit-identical to the enumeration oracle's.
inline constexpr std::int64_t kSurveyExactArmLimit = 15;

} // namespace detail

/// Exact sampling law of the survey estimator: the positives drawn in each
/// arm are independent hypergeometric counts, and every (a, b) pair maps to
/// the atom alpha * (a/n_s - b/n_t). Atoms are keyed by the exact integer
/// a*n_t - b*n_s, so no two distinct values ever merge.
inline ExactEstimatorDistribution exact_survey_distribution(const SurveyDesign& design) {
    ExactEstimatorDistribution dist;
    if (survey_is_degenerate(design)) {
        dist.support = {0.0};
        dist.pmf = {1.0};
        return dist;
    }
    detail::check_survey_samplable(design);
    const std::int64_t arm = design.excluded_size();
    const std::int64_t ns = design.sample_size_s;
    const std::int64_t nt = design.sample_size_t;

    if (arm <= detail::kSurveyExactArmLimit) {
        const BigInt denom_s = binomial_exact(arm, ns);
        const BigInt denom_t = binomial_exact(arm, nt);
        std::map<std::int64_t, Rational> atoms;
        for (std::int64_t a = 0; a <= ns; ++a) {
            const BigInt ways_a = binomial_exact(design.positives_s_excl, a) *
                                  binomial_exact(arm - design.positives_s_excl, ns - a);
            if (ways_a == 0) continue;
            const Rational pa(ways_a, denom_s);
            for (std::int64_t b = 0; b <= nt; ++b) {
                const BigInt ways_b = binomial_exact(design.positives_t_excl, b) *
                                      binomial_exact(arm - design.positives_t_excl, nt - b);
                if (ways_b == 0) continue;
                atoms[a * nt - b * ns] += pa * Rational(ways_b, denom_t);
            }
        }
        const Rational alpha_exact(design.excluded_size(), design.k);
        Rational mean_exact(0);
        Rational second_moment(0);
        for (const auto& [d, p] : atoms) {
            const Rational value = alpha_exact * Rational(d, ns * nt);
            mean_exact += value * p;
            second_moment += value * value * p;
            dist.support.push_back(survey_atom_value(design.alpha, d, ns, nt));
            dist.pmf.push_back(to_double(p));
        }
        dist.mean = to_double(mean_exact);
        dist.variance = to_double(second_moment - mean_exact * mean_exact);
        return dist;
    }

    std::int64_t lo_s = 0;
    std::int64_t lo_t = 0;
    const std::vector<double> pmf_s =
        detail::hypergeometric_arm_pmf(arm, design.positives_s_excl, ns, lo_s);
    const std::vector<double> pmf_t =
        detail::hypergeometric_arm_pmf(arm, design.positives_t_excl, nt, lo_t);
    std::map<std::int64_t, double> atoms;
    for (std::size_t ia = 0; ia < pmf_s.size(); ++ia) {
        const std::int64_t a = lo_s + static_cast<std::int64_t>(ia);
        for (std::size_t ib = 0; ib < pmf_t.size(); ++ib) {
            const std::int64_t b = lo_t + static_cast<std::int64_t>(ib);
            atoms[a * nt - b * ns] += pmf_s[ia] * pmf_t[ib];
        }
    }
    double mean = 0.0;
    for (const auto& [d, p] : atoms) {
        const double value = survey_atom_value(design.alpha, d, ns, nt);
        dist.support.push_back(value);
        dist.pmf.push_back(p);
        mean += value * p;
    }
    double variance = 0.0;
    for (std::size_t i = 0; i < dist.support.size(); ++i) {
        const double centered = dist.support[i] - mean;
        variance += centered * centered * dist.pmf[i];
    }
    dist.mean = mean;
    dist.variance = variance;
    return dist;
}

/// Seeded simulation: each replicate draws without replacement from each
/// excluded arm independently. Same per-replicate stream contract as
/// simulate_rct.
inline EmpiricalDistribution simulate_survey(const SurveyDesign& design, std::int64_t replicates,
                                             std::uint64_t seed, int threads = 1) {
    if (replicates < 1) throw ValidationError("simulate_survey: replicates must be >= 1");
    EmpiricalDistribution result;
    result.values.resize(static_cast<std::size_t>(replicates), 0.0);
    result.replicate_count = replicates;
    result.seed = seed;
    if (survey_is_degenerate(design)) {
        return result; // point mass at zero, nothing to draw
    }
    detail::check_survey_samplable(design);
    const std::size_t arm = static_cast<std::size_t>(design.excluded_size());
    const auto ns = static_cast<std::size_t>(design.sample_size_s);
    const auto nt = static_cast<std::size_t>(design.sample_size_t);

    parallel_chunks(replicates, threads, [&](std::int64_t lo, std::int64_t hi) {
        std::vector<std::uint32_t> scratch;
        for (std::int64_t rep = lo; rep < hi; ++rep) {
            SplitMix64 rng = SplitMix64::stream(seed, static_cast<std::uint64_t>(rep));
            partial_shuffle(scratch, arm, ns, rng);
            std::int64_t a = 0;
            for (std::size_t i = 0; i < ns; ++i) a += design.s_excl_outcomes[scratch[i]];
            partial_shuffle(scratch, arm, nt, rng);
            std::int64_t b = 0;
            for (std::size_t i = 0; i < nt; ++i) b += design.t_excl_outcomes[scratch[i]];
            result.values[static_cast<std::size_t>(rep)] =
                survey_atom_value(design.alpha, a * design.sample_size_t - b * design.sample_size_s,
                                  design.sample_size_s, design.sample_size_t);
        }
    });
    return result;
}

/// Simulation that also samples the intersection (min(k/2, |I|) draws) and
/// reports absolute precision estimates for both methods, combining the arm
/// and intersection samples with their subpopulation weights.
struct SurveyAbsoluteSimulation {
    EmpiricalDistribution delta_hat;
    EmpiricalDistribution mu_s_hat;
    EmpiricalDistribution mu_t_hat;
    std::int64_t intersection_sample_size = 0;
};

inline SurveyAbsoluteSimulation simulate_survey_with_intersection(const SurveyDesign& design,
                                                                  std::int64_t replicates,
                                                                  std::uint64_t seed,
                                                                  int threads = 1) {
    if (replicates < 1) throw ValidationError("simulate_survey: replicates must be >= 1");
    if (!survey_is_degenerate(design)) detail::check_survey_samplable(design);
    const std::int64_t i_size = design.intersection_size();
    const std::int64_t ni = std::min(design.k / 2, i_size);
    if (i_size > 0 && ni < 1) {
        throw ValidationError("cannot sample a non-empty intersection with zero draws (k too small)");
    }

    SurveyAbsoluteSimulation sim;
    sim.intersection_sample_size = ni;
    for (EmpiricalDistribution* d : {&sim.delta_hat, &sim.mu_s_hat, &sim.mu_t_hat}) {
        d->values.resize(static_cast<std::size_t>(replicates), 0.0);
        d->replicate_count = replicates;
        d->seed = seed;
    }
    const std::size_t arm = static_cast<std::size_t>(design.excluded_size());
    const auto ns = static_cast<std::size_t>(design.sample_size_s);
    const auto nt = static_cast<std::size_t>(design.sample_size_t);

    parallel_chunks(replicates, threads, [&](std::int64_t lo, std::int64_t hi) {
        std::vector<std::uint32_t> scratch;
        for (std::int64_t rep = lo; rep < hi; ++rep) {
            SplitMix64 rng = SplitMix64::stream(seed, static_cast<std::uint64_t>(rep));
            double arm_mean_s = 0.0;
            double arm_mean_t = 0.0;
            if (!survey_is_degenerate(design)) {
                partial_shuffle(scratch, arm, ns, rng);
                std::int64_t a = 0;
                for (std::size_t i = 0; i < ns; ++i) a += design.s_excl_outcomes[scratch[i]];
                partial_shuffle(scratch, arm, nt, rng);
                std::int64_t b = 0;
                for (std::size_t i = 0; i < nt; ++i) b += design.t_excl_outcomes[scratch[i]];
                sim.delta_hat.values[static_cast<std::size_t>(rep)] = survey_atom_value(
                    design.alpha, a * design.sample_size_t - b * design.sample_size_s,
                    design.sample_size_s, design.sample_size_t);
                arm_mean_s = static_cast<double>(a) / static_cast<double>(ns);
                arm_mean_t = static_cast<double>(b) / static_cast<double>(nt);
            }
            double intersection_mean = 0.0;
            if (i_size > 0) {
                partial_shuffle(scratch, static_cast<std::size_t>(i_size),
                                static_cast<std::size_t>(ni), rng);
                std::int64_t c = 0;
                for (std::int64_t i = 0; i < ni; ++i) c += design.intersection_outcomes[scratch[i]];
                intersection_mean = static_cast<double>(c) / static_cast<double>(ni);
            }
            const double excluded_weight = static_cast<double>(design.excluded_size());
            const double intersection_weight = static_cast<double>(i_size);
            const double total = static_cast<double>(design.k);
            sim.mu_s_hat.values[static_cast<std::size_t>(rep)] =
                (excluded_weight * arm_mean_s + intersection_weight * intersection_mean) / total;
            sim.mu_t_hat.values[static_cast<std::size_t>(rep)] =
                (excluded_weight * arm_mean_t + intersection_weight * intersection_mean) / total;
        }
    });
    return sim;
}

/// Evaluates alpha * (mean outcome of S_k\I - mean outcome of T_k\I) from
/// full outcome knowledge. Algebraically identical to the true delta, so it
/// doubles as a self-check of the design bookkeeping.
inline double survey_identity_check(const TargetingMethod& method_s,
                                    const TargetingMethod& method_t,
                                    const Population& population, std::int64_t k) {
    const SurveyDesign design = build_survey_design(method_s, method_t, population, k);
    if (survey_is_degenerate(design)) return 0.0;
    const auto arm = static_cast<double>(design.excluded_size());
    return design.alpha * (static_cast<double>(design.positives_s_excl) / arm -
                           static_cast<double>(design.positives_t_excl) / arm);
}

} // namespace targeval
