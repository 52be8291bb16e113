#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "targeval/errors.hpp"
#include "targeval/rational.hpp"

namespace targeval {

namespace detail {

// Exact C(n, r) for n <= 60; every value fits in uint64 (C(60,30) ~ 1.2e17).
inline constexpr std::int64_t kSmallBinomialMax = 60;

inline const std::vector<std::vector<std::uint64_t>>& small_binomials() {
    static const std::vector<std::vector<std::uint64_t>> table = [] {
        std::vector<std::vector<std::uint64_t>> t(kSmallBinomialMax + 1);
        for (std::int64_t n = 0; n <= kSmallBinomialMax; ++n) {
            t[n].assign(n + 1, 1);
            for (std::int64_t r = 1; r < n; ++r) {
                t[n][r] = t[n - 1][r - 1] + t[n - 1][r];
            }
        }
        return t;
    }();
    return table;
}

inline void check_even_population_and_k(std::int64_t population_size, std::int64_t k) {
    if (population_size % 2 != 0 || k % 2 != 0) {
        throw ValidationError("half-partition formulas require even N and even k, got N=" +
                              std::to_string(population_size) + ", k=" + std::to_string(k));
    }
    if (k < 2 || k > population_size) {
        throw ValidationError("resource level k=" + std::to_string(k) + " out of range [2, " +
                              std::to_string(population_size) + "]");
    }
}

} // namespace detail

/// ln C(n, r). Exact integer path for n <= 60, log-gamma beyond.
inline double log_binomial(std::int64_t n, std::int64_t r) {
    if (n < 0 || r < 0 || r > n) {
        throw ValidationError("log_binomial: invalid arguments n=" + std::to_string(n) +
                              ", r=" + std::to_string(r));
    }
    if (n <= detail::kSmallBinomialMax) {
        return std::log(static_cast<double>(detail::small_binomials()[n][r]));
    }
    return std::lgamma(static_cast<double>(n + 1)) - std::lgamma(static_cast<double>(r + 1)) -
           std::lgamma(static_cast<double>(n - r + 1));
}

/// P(X = x) for X hypergeometric: x successes in n draws without replacement
/// from a population of size N containing K successes. Evaluated in log
/// space; zero outside [max(0, n+K-N), min(n, K)].
inline double hypergeometric_pmf(std::int64_t x, std::int64_t population, std::int64_t successes,
                                 std::int64_t draws) {
    if (successes < 0 || successes > population || draws < 0 || draws > population) {
        throw ValidationError("hypergeometric_pmf: invalid parameters");
    }
    if (x < std::max<std::int64_t>(0, draws + successes - population) ||
        x > std::min(draws, successes)) {
        return 0.0;
    }
    return std::exp(log_binomial(successes, x) +
                    log_binomial(population - successes, draws - x) -
                    log_binomial(population, draws));
}

/// Log of P(M = m), where M is the worst population rank appearing among the
/// top k/2 of a uniform random half of an N-unit population:
///
///     P(M = m) = C(m-1, k/2-1) * C(N-m, (N-k)/2) / C(N, N/2)
///
/// Returns -infinity outside the support [k/2, (N+k)/2].
inline double log_m_pmf(std::int64_t population_size, std::int64_t k, std::int64_t m) {
    detail::check_even_population_and_k(population_size, k);
    const std::int64_t half_k = k / 2;
    if (m < half_k || m > (population_size + k) / 2) {
        return -std::numeric_limits<double>::infinity();
    }
    return log_binomial(m - 1, half_k - 1) +
           log_binomial(population_size - m, (population_size - k) / 2) -
           log_binomial(population_size, population_size / 2);
}

/// P(M = m); zero outside the support.
inline double m_pmf(std::int64_t population_size, std::int64_t k, std::int64_t m) {
    const double log_p = log_m_pmf(population_size, k, m);
    return std::isinf(log_p) ? 0.0 : std::exp(log_p);
}

/// Exact rational P(M = m) for bit-exact oracle comparisons. Guarded to
/// N <= 30, where the binomials stay tiny.
inline Rational m_pmf_exact(std::int64_t population_size, std::int64_t k, std::int64_t m) {
    detail::check_even_population_and_k(population_size, k);
    if (population_size > 30) {
        throw GuardError("m_pmf_exact is guarded to N <= 30, got N=" +
                         std::to_string(population_size));
    }
    const std::int64_t half_k = k / 2;
    if (m < half_k || m > (population_size + k) / 2) return Rational(0);
    const BigInt numerator = binomial_exact(m - 1, half_k - 1) *
                             binomial_exact(population_size - m, (population_size - k) / 2);
    return Rational(numerator, binomial_exact(population_size, population_size / 2));
}

/// Closed-form ratio P(M = m+1) / P(M = m):
///
///     m * ((N+k)/2 - m) / ((m - k/2 + 1) * (N - m))
///
/// Requires both m and m+1 inside the support.
inline double m_ratio(std::int64_t population_size, std::int64_t k, std::int64_t m) {
    detail::check_even_population_and_k(population_size, k);
    const std::int64_t half_k = k / 2;
    if (m < half_k || m + 1 > (population_size + k) / 2) {
        throw ValidationError("m_ratio: m=" + std::to_string(m) +
                              " and m+1 must both lie in the support [" +
                              std::to_string(half_k) + ", " +
                              std::to_string((population_size + k) / 2) + "]");
    }
    const double numerator = static_cast<double>(m) *
                             static_cast<double>((population_size + k) / 2 - m);
    const double denominator = static_cast<double>(m - half_k + 1) *
                               static_cast<double>(population_size - m);
    return numerator / denominator;
}

/// The rank m below which P(M = m) is still rising: the pmf increases
/// strictly while m < (k-2)N/(N-2), ties exactly at it, and decreases
/// strictly beyond. For k <= N/2 this puts the unique mode at k-1.
inline double m_mode_threshold(std::int64_t population_size, std::int64_t k) {
    detail::check_even_population_and_k(population_size, k);
    return static_cast<double>((k - 2)) * static_cast<double>(population_size) /
           static_cast<double>(population_size - 2);
}

/// Full distribution of M for one (N, k).
struct RankDistribution {
    std::int64_t population_size = 0;
    std::int64_t resource_level = 0;
    std::int64_t support_lo = 0;
    std::int64_t support_hi = 0;
    std::vector<double> pmf; // pmf[i] = P(M = support_lo + i)

    double pmf_at(std::int64_t m) const {
        if (m < support_lo || m > support_hi) return 0.0;
        return pmf[static_cast<std::size_t>(m - support_lo)];
    }

    /// Argmax of the pmf (smallest rank on a tie).
    std::int64_t mode() const {
        const auto it = std::max_element(pmf.begin(), pmf.end());
        return support_lo + static_cast<std::int64_t>(it - pmf.begin());
    }
};

/// Assembles P(M = m) over the whole support and verifies that the values
/// sum to 1 within 1e-9 (summed smallest-first to keep the check sharp).
inline RankDistribution m_distribution(std::int64_t population_size, std::int64_t k) {
    detail::check_even_population_and_k(population_size, k);
    RankDistribution dist;
    dist.population_size = population_size;
    dist.resource_level = k;
    dist.support_lo = k / 2;
    dist.support_hi = (population_size + k) / 2;
    dist.pmf.reserve(static_cast<std::size_t>(dist.support_hi - dist.support_lo + 1));
    for (std::int64_t m = dist.support_lo; m <= dist.support_hi; ++m) {
        dist.pmf.push_back(m_pmf(population_size, k, m));
    }
    std::vector<double> ascending(dist.pmf);
    std::sort(ascending.begin(), ascending.end());
    double total = 0.0;
    for (const double p : ascending) total += p;
    if (std::abs(total - 1.0) > 1e-9) {
        throw GuardError("m_distribution: pmf sums to " + std::to_string(total) +
                         ", drift exceeds 1e-9");
    }
    return dist;
}

} // namespace targeval
