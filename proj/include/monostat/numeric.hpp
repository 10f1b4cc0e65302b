#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "monostat/errors.hpp"

namespace monostat {

/// Neumaier-compensated accumulator. Summation order is fixed by the
/// caller, so results are reproducible bit-for-bit.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }

    [[nodiscard]] double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// ln(e^t - 1) without overflow or cancellation. For t > 1 the identity
/// ln(e^t - 1) = t + ln(1 - e^{-t}) avoids overflow; below, expm1 keeps
/// full precision as t -> 0.
inline double log_expm1(double t) {
    if (!(t > 0.0))
        throw std::invalid_argument("log_expm1: argument must be positive");
    if (t > 1.0)
        return t + std::log1p(-std::exp(-t));
    return std::log(std::expm1(t));
}

/// 1 - e^{-t}, exact to full precision for small t.
inline double one_minus_exp_neg(double t) { return -std::expm1(-t); }

/// ln n! accumulated term by term; matches the accumulation order used
/// by the Delta_n evaluations so that the x = 1 cancellation is exact.
inline double log_factorial(std::uint64_t n) {
    double acc = 0.0;
    for (std::uint64_t k = 2; k <= n; ++k) acc += std::log(static_cast<double>(k));
    return acc;
}

/// Exact binomial(n, k) in 64-bit arithmetic; throws instead of wrapping.
inline std::uint64_t binomial_checked(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    unsigned __int128 acc = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        acc = acc * (n - k + i) / i;
        if (acc > std::numeric_limits<std::uint64_t>::max())
            throw degeneracy_overflow("binomial(" + std::to_string(n) + "," +
                                      std::to_string(k) + ") exceeds 64 bits");
    }
    return static_cast<std::uint64_t>(acc);
}

/// Saturating u64 arithmetic for state counting.
inline std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
    const std::uint64_t m = std::numeric_limits<std::uint64_t>::max();
    return (a > m - b) ? m : a + b;
}

inline std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
    const std::uint64_t m = std::numeric_limits<std::uint64_t>::max();
    if (a == 0 || b == 0) return 0;
    if (a > m / b) return m;
    return a * b;
}

} // namespace monostat
