#pragma once

#include <cstdint>

#include <boost/multiprecision/cpp_int.hpp>

#include "targeval/errors.hpp"

namespace targeval {

using BigInt = boost::multiprecision::cpp_int;

/// Exact rational number, canonical form (gcd 1, positive denominator).
/// Used by the brute-force oracles and the exact analytic paths so that
/// closed forms can be checked for literal equality, not just tolerance.
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline Rational make_rational(std::int64_t numerator, std::int64_t denominator) {
    if (denominator == 0) throw ValidationError("rational with zero denominator");
    return Rational(numerator, denominator);
}

/// Exact binomial coefficient C(n, r).
inline BigInt binomial_exact(std::int64_t n, std::int64_t r) {
    if (n < 0 || r < 0) throw ValidationError("binomial_exact: negative argument");
    if (r > n) return BigInt(0);
    if (r > n - r) r = n - r;
    BigInt result = 1;
    for (std::int64_t i = 1; i <= r; ++i) {
        result *= n - r + i;
        result /= i; // divides exactly at every step
    }
    return result;
}

} // namespace targeval
