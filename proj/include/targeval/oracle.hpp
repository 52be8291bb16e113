#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "targeval/core.hpp"
#include "targeval/errors.hpp"
#include "targeval/rational.hpp"
#include "targeval/survey.hpp"

namespace targeval {

namespace detail {

/// Visits every r-subset of {0..n-1} in lexicographic order. The visitor
/// receives the current combination as a sorted index vector it must not
/// mutate. Streaming: no combination list is ever materialized.
template <typename Visitor>
void for_each_combination(std::size_t n, std::size_t r, Visitor&& visit) {
    std::vector<std::size_t> combo(r);
    for (std::size_t i = 0; i < r; ++i) combo[i] = i;
    while (true) {
        visit(static_cast<const std::vector<std::size_t>&>(combo));
        if (r == 0) return;
        std::size_t i = r;
        while (i > 0 && combo[i - 1] == n - r + i - 1) --i;
        if (i == 0) return;
        ++combo[i - 1];
        for (std::size_t j = i; j < r; ++j) combo[j] = combo[j - 1] + 1;
    }
}

} // namespace detail

/// Exact ground truth for the split-half trial, by iterating every half.
struct RctEnumeration {
    Rational expected_precision_s;
    Rational expected_precision_t;
    Rational expected_delta;
    std::vector<Rational> m_law; // m_law[m-1] = P(M = m) under method S, m = 1..N
    std::int64_t partition_count = 0;
};

/// Iterates all C(N, N/2) halves X' in lexicographic order, applies S to X'
/// and T to the complement, and averages the two observed precisions with
/// equal weight. Also tallies the population rank of the worst unit in each
/// half's top k/2, which yields the exact law of M. Everything is exact
/// rational arithmetic; guarded to N <= 16.
inline RctEnumeration enumerate_rct(const TargetingMethod& method_s,
                                    const TargetingMethod& method_t,
                                    const Population& population, std::int64_t k) {
    const auto n = static_cast<std::int64_t>(population.size());
    if (n > 16) {
        throw GuardError("enumerate_rct is guarded to N <= 16, got N=" + std::to_string(n));
    }
    detail::check_even_population_and_k(n, k);
    detail::check_same_population(method_s, population, "enumerate_rct");
    detail::check_same_population(method_t, population, "enumerate_rct");

    const auto half_n = static_cast<std::size_t>(n / 2);
    const auto half_k = static_cast<std::size_t>(k / 2);
    std::vector<int> outcomes(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < outcomes.size(); ++i) outcomes[i] = population.outcome(i);

    std::vector<std::uint8_t> in_first_half(static_cast<std::size_t>(n));
    std::vector<std::int64_t> rank_tally(static_cast<std::size_t>(n), 0);
    std::int64_t total_positives_s = 0;
    std::int64_t total_positives_t = 0;
    std::int64_t partitions = 0;

    detail::for_each_combination(static_cast<std::size_t>(n), half_n,
                                 [&](const std::vector<std::size_t>& half) {
        std::fill(in_first_half.begin(), in_first_half.end(), std::uint8_t{0});
        for (const std::size_t idx : half) in_first_half[idx] = 1;

        std::size_t taken = 0;
        for (std::size_t r = 0; r < static_cast<std::size_t>(n); ++r) {
            const std::uint32_t idx = method_s.order()[r];
            if (in_first_half[idx]) {
                total_positives_s += outcomes[idx];
                if (++taken == half_k) {
                    ++rank_tally[r];
                    break;
                }
            }
        }
        taken = 0;
        for (const std::uint32_t idx : method_t.order()) {
            if (!in_first_half[idx]) {
                total_positives_t += outcomes[idx];
                if (++taken == half_k) break;
            }
        }
        ++partitions;
    });

    RctEnumeration result;
    result.partition_count = partitions;
    result.expected_precision_s = Rational(total_positives_s, partitions * (k / 2));
    result.expected_precision_t = Rational(total_positives_t, partitions * (k / 2));
    result.expected_delta = result.expected_precision_s - result.expected_precision_t;
    result.m_law.reserve(static_cast<std::size_t>(n));
    for (std::int64_t m = 1; m <= n; ++m) {
        result.m_law.emplace_back(rank_tally[static_cast<std::size_t>(m - 1)], partitions);
    }
    return result;
}

/// Exact ground truth for the survey estimator, by iterating every pair of
/// samples.
struct SurveyEnumeration {
    std::vector<std::int64_t> atom_keys; // d = a*n_t - b*n_s, ascending
    std::vector<double> support;         // estimator values, same atom order
    std::vector<Rational> pmf;
    Rational mean;
};

/// Iterates every (sample from S-arm, sample from T-arm) pair with equal
/// weight and aggregates estimator atoms exactly. Guarded to arm sizes <= 8
/// (at most C(8,4)^2 = 4900 pairs).
inline SurveyEnumeration enumerate_survey(const SurveyDesign& design) {
    SurveyEnumeration result;
    if (survey_is_degenerate(design)) {
        result.atom_keys = {0};
        result.support = {0.0};
        result.pmf = {Rational(1)};
        result.mean = Rational(0);
        return result;
    }
    detail::check_survey_samplable(design);
    const std::int64_t arm = design.excluded_size();
    if (arm > 8) {
        throw GuardError("enumerate_survey is guarded to arm sizes <= 8, got " +
                         std::to_string(arm));
    }
    const std::int64_t ns = design.sample_size_s;
    const std::int64_t nt = design.sample_size_t;

    std::vector<std::int64_t> positives_s; // one entry per possible S sample
    detail::for_each_combination(static_cast<std::size_t>(arm), static_cast<std::size_t>(ns),
                                 [&](const std::vector<std::size_t>& sample) {
        std::int64_t a = 0;
        for (const std::size_t idx : sample) a += design.s_excl_outcomes[idx];
        positives_s.push_back(a);
    });
    std::vector<std::int64_t> positives_t;
    detail::for_each_combination(static_cast<std::size_t>(arm), static_cast<std::size_t>(nt),
                                 [&](const std::vector<std::size_t>& sample) {
        std::int64_t b = 0;
        for (const std::size_t idx : sample) b += design.t_excl_outcomes[idx];
        positives_t.push_back(b);
    });

    std::map<std::int64_t, std::int64_t> tally;
    for (const std::int64_t a : positives_s) {
        for (const std::int64_t b : positives_t) {
            ++tally[a * nt - b * ns];
        }
    }
    const auto pair_count =
        static_cast<std::int64_t>(positives_s.size()) * static_cast<std::int64_t>(positives_t.size());
    const Rational alpha_exact(design.excluded_size(), design.k);
    for (const auto& [d, count] : tally) {
        result.atom_keys.push_back(d);
        result.support.push_back(survey_atom_value(design.alpha, d, ns, nt));
        result.pmf.emplace_back(count, pair_count);
        result.mean += alpha_exact * Rational(d, ns * nt) * result.pmf.back();
    }
    return result;
}

} // namespace targeval
