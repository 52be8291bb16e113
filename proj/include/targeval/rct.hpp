#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "targeval/combinatorics.hpp"
#include "targeval/core.hpp"
#include "targeval/errors.hpp"
#include "targeval/rational.hpp"
#include "targeval/rng.hpp"

namespace targeval {

/// Analytic comparison of the split-half trial's expectation against the
/// full-population estimand at resource level k.
struct RctAnalysis {
    std::int64_t k = 0;
    double expected_precision_s = 0.0;
    double expected_precision_t = 0.0;
    double expected_delta = 0.0; // expected_precision_s - expected_precision_t
    double true_delta = 0.0;
    double bias = 0.0; // expected_delta - true_delta
};

/// Multiset of estimator draws from a seeded simulation.
struct EmpiricalDistribution {
    std::vector<double> values;
    std::int64_t replicate_count = 0;
    std::uint64_t seed = 0;

    double mean() const {
        double total = 0.0;
        for (const double v : values) total += v;
        return total / static_cast<double>(values.size());
    }

    /// Sample standard deviation (n-1 denominator).
    double std_dev() const {
        const double m = mean();
        double ss = 0.0;
        for (const double v : values) ss += (v - m) * (v - m);
        return std::sqrt(ss / static_cast<double>(values.size() - 1));
    }

    double std_error() const { return std_dev() / std::sqrt(static_cast<double>(values.size())); }
};

namespace detail {

inline void check_rct_arguments(std::size_t population_size, std::int64_t k) {
    check_even_population_and_k(static_cast<std::int64_t>(population_size), k);
}

} // namespace detail

/// Reweighted precision at m: the mean outcome of a half-population top k/2
/// conditional on its worst member having population rank m,
///
///     nu = ((k/2 - 1) * mu_{m-1} + y_m) / (k/2)
///
/// computed as a single ratio of integers from the curve's prefix counts.
inline double nu(const PrecisionCurve& curve, std::int64_t m, std::int64_t k) {
    const auto n = static_cast<std::int64_t>(curve.size());
    if (k < 2 || k % 2 != 0 || k > 2 * n) {
        throw ValidationError("nu: invalid even resource level k=" + std::to_string(k));
    }
    const std::int64_t half_k = k / 2;
    if (m < 1 || m > n || m < half_k) {
        throw ValidationError("nu: rank m=" + std::to_string(m) + " outside [max(1, k/2), N]");
    }
    if (m == 1) {
        return static_cast<double>(curve.outcome_at_rank(1));
    }
    const std::int64_t numerator = (half_k - 1) * curve.positives_at(m - 1) +
                                   (m - 1) * curve.outcome_at_rank(m);
    return static_cast<double>(numerator) / static_cast<double>((m - 1) * half_k);
}

inline double nu(const TargetingMethod& method, const Population& population, std::int64_t m,
                 std::int64_t k) {
    return nu(precision_curve(method, population), m, k);
}

/// Expected value, over uniform random halves, of the precision observed on
/// the half's top k/2: the pmf of M marginalized against nu. The weights are
/// normalized by their computed total so a flat curve is reproduced exactly.
inline double expected_rct_precision(const PrecisionCurve& curve, std::int64_t k) {
    const auto population_size = static_cast<std::int64_t>(curve.size());
    detail::check_rct_arguments(curve.size(), k);
    const RankDistribution dist = m_distribution(population_size, k);
    double weighted = 0.0;
    double total_weight = 0.0;
    for (std::int64_t m = dist.support_lo; m <= dist.support_hi; ++m) {
        const double p = dist.pmf_at(m);
        weighted += p * nu(curve, m, k);
        total_weight += p;
    }
    return weighted / total_weight;
}

inline double expected_rct_precision(const TargetingMethod& method, const Population& population,
                                     std::int64_t k) {
    return expected_rct_precision(precision_curve(method, population), k);
}

/// Exact-rational evaluation of the same marginalization, for oracle
/// equality tests. Guarded to N <= 30 through m_pmf_exact.
inline Rational expected_rct_precision_exact(const PrecisionCurve& curve, std::int64_t k) {
    const auto population_size = static_cast<std::int64_t>(curve.size());
    detail::check_rct_arguments(curve.size(), k);
    const std::int64_t half_k = k / 2;
    Rational total(0);
    for (std::int64_t m = half_k; m <= (population_size + k) / 2; ++m) {
        Rational reweighted;
        if (m == 1) {
            reweighted = Rational(curve.outcome_at_rank(1));
        } else {
            reweighted = Rational((half_k - 1) * curve.positives_at(m - 1) +
                                      (m - 1) * curve.outcome_at_rank(m),
                                  (m - 1) * half_k);
        }
        total += m_pmf_exact(population_size, k, m) * reweighted;
    }
    return total;
}

/// Expected split-half estimate for both methods, their difference, and its
/// bias against the true estimand.
inline RctAnalysis rct_analysis(const TargetingMethod& method_s, const TargetingMethod& method_t,
                                const Population& population, std::int64_t k) {
    detail::check_rct_arguments(population.size(), k);
    const PrecisionCurve cs = precision_curve(method_s, population);
    const PrecisionCurve ct = precision_curve(method_t, population);
    RctAnalysis analysis;
    analysis.k = k;
    analysis.expected_precision_s = expected_rct_precision(cs, k);
    analysis.expected_precision_t = expected_rct_precision(ct, k);
    analysis.expected_delta = analysis.expected_precision_s - analysis.expected_precision_t;
    analysis.true_delta =
        static_cast<double>(cs.positives_at(k) - ct.positives_at(k)) / static_cast<double>(k);
    analysis.bias = analysis.expected_delta - analysis.true_delta;
    return analysis;
}

/// Seeded simulation of the split-half trial. Each replicate draws a uniform
/// random half X', scores method S on the top k/2 of X' and method T on the
/// top k/2 of the complement, and records the difference of the two observed
/// precisions. Replicate i consumes only stream (seed, i), so the result is
/// identical for any thread count.
inline EmpiricalDistribution simulate_rct(const TargetingMethod& method_s,
                                          const TargetingMethod& method_t,
                                          const Population& population, std::int64_t k,
                                          std::int64_t replicates, std::uint64_t seed,
                                          int threads = 1) {
    detail::check_rct_arguments(population.size(), k);
    detail::check_same_population(method_s, population, "simulate_rct");
    detail::check_same_population(method_t, population, "simulate_rct");
    if (replicates < 1) throw ValidationError("simulate_rct: replicates must be >= 1");

    const std::size_t n = population.size();
    const std::size_t half_n = n / 2;
    const auto half_k = static_cast<std::size_t>(k / 2);
    std::vector<int> outcomes(n);
    for (std::size_t i = 0; i < n; ++i) outcomes[i] = population.outcome(i);

    EmpiricalDistribution result;
    result.values.resize(static_cast<std::size_t>(replicates));
    result.replicate_count = replicates;
    result.seed = seed;

    parallel_chunks(replicates, threads, [&](std::int64_t lo, std::int64_t hi) {
        std::vector<std::uint32_t> scratch;
        std::vector<std::uint8_t> in_first_half(n);
        for (std::int64_t rep = lo; rep < hi; ++rep) {
            SplitMix64 rng = SplitMix64::stream(seed, static_cast<std::uint64_t>(rep));
            partial_shuffle(scratch, n, half_n, rng);
            std::fill(in_first_half.begin(), in_first_half.end(), std::uint8_t{0});
            for (std::size_t i = 0; i < half_n; ++i) in_first_half[scratch[i]] = 1;

            std::int64_t positives_s = 0;
            std::size_t taken = 0;
            for (const std::uint32_t idx : method_s.order()) {
                if (in_first_half[idx]) {
                    positives_s += outcomes[idx];
                    if (++taken == half_k) break;
                }
            }
            std::int64_t positives_t = 0;
            taken = 0;
            for (const std::uint32_t idx : method_t.order()) {
                if (!in_first_half[idx]) {
                    positives_t += outcomes[idx];
                    if (++taken == half_k) break;
                }
            }
            result.values[static_cast<std::size_t>(rep)] =
                static_cast<double>(positives_s - positives_t) / static_cast<double>(half_k);
        }
    });
    return result;
}

} // namespace targeval
