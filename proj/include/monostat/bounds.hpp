#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "monostat/numeric.hpp"
#include "monostat/series.hpp"
#include "monostat/spectrum.hpp"

namespace monostat {

/// f(u, z) = z^2 e^u / (4 (e^u - 1)) = z^2 / (4 (1 - e^{-u})), the width of
/// the lower sandwich bound. The second form stays fully accurate as u -> 0.
inline double f_lower(double u, double z) {
    if (!(u > 0.0)) throw std::invalid_argument("f_lower: u must be > 0");
    if (!(z >= 0.0)) throw std::invalid_argument("f_lower: z must be >= 0");
    return z * z / (4.0 * one_minus_exp_neg(u));
}

/// (1 - f) Z_0 <= Z_m <= Z_0 checked at one point. `holds_with_certainty`
/// accounts for the truncation of Z_m: the lower test uses the computed
/// partial sum (an under-estimate) and the upper test widens it by its
/// tail bound.
struct SandwichResult {
    double f = 0.0;
    double lower = 0.0;
    double zm = 0.0;
    double zm_tail = 0.0;
    double upper = 0.0;
    bool holds_with_certainty = false;
};

inline SandwichResult sandwich_check(double u, double z, std::size_t n_max) {
    const double z0 = z_boltzmann(zeta_ho_closed(u), z);
    SandwichResult s;
    s.f = f_lower(u, z);
    s.lower = (1.0 - s.f) * z0;
    s.upper = z0;
    const SeriesResult r = z_monotone_ho(u, z, n_max);
    s.zm = r.value;
    s.zm_tail = r.coeff_tail_bound;
    s.holds_with_certainty = (s.lower <= s.zm) && (s.zm + s.zm_tail <= s.upper);
    return s;
}

inline SandwichResult sandwich_check(double u, double z) {
    return sandwich_check(u, z, default_n_max(zeta_ho_closed(u) * z));
}

namespace detail {

/// L(x) = sum_{k=2..n} ln S_k(x) with S_k the k-term geometric sum, plus its
/// first two derivatives and ln n! accumulated with the same additions, so
/// that L(1) - ln n! cancels exactly.
struct DeltaLogSums {
    double log_nfact = 0.0;
    double l = 0.0;
    double l1 = 0.0;
    double l2 = 0.0;
};

inline DeltaLogSums delta_log_sums(std::size_t n, double x) {
    if (n < 1) throw std::invalid_argument("delta: n must be >= 1");
    if (!(x > 0.0)) throw std::invalid_argument("delta: x must be > 0");
    DeltaLogSums out;
    // S, S', S'' of the k-term geometric sum, grown one term at a time.
    double s = 1.0, s1 = 0.0, s2 = 0.0;
    double xp0 = 1.0;  // x^{k-2}
    for (std::size_t k = 2; k <= n; ++k) {
        const double j = static_cast<double>(k - 1);  // new top power
        const double xp1 = xp0 * x;                   // x^{k-1}
        s += xp1;
        s1 += j * xp0;
        if (k >= 3) s2 += j * (j - 1.0) * (xp0 / x);
        out.log_nfact += std::log(static_cast<double>(k));
        out.l += std::log(s);
        out.l1 += s1 / s;
        out.l2 += (s2 * s - s1 * s1) / (s * s);
        xp0 = xp1;
    }
    return out;
}

} // namespace detail

/// Delta_n(x) = 1 - n! / (S_2(x) S_3(x) ... S_n(x)), evaluated as
/// -expm1(ln n! - L) so that the x = 1 cancellation is exact.
inline double delta(std::size_t n, double x) {
    const auto ls = detail::delta_log_sums(n, x);
    return -std::expm1(ls.log_nfact - ls.l);
}

/// First derivative, via Delta' = n! e^{-L} L'.
inline double delta_d1(std::size_t n, double x) {
    const auto ls = detail::delta_log_sums(n, x);
    return std::exp(ls.log_nfact - ls.l) * ls.l1;
}

/// Second derivative, via Delta'' = n! e^{-L} (L'' - L'^2).
inline double delta_d2(std::size_t n, double x) {
    const auto ls = detail::delta_log_sums(n, x);
    return std::exp(ls.log_nfact - ls.l) * (ls.l2 - ls.l1 * ls.l1);
}

/// Delta_n and its first two derivatives at x = e^{beta hbar omega} > 1.
struct DeltaReport {
    std::size_t n = 1;
    double x = 1.0;
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

inline DeltaReport delta_report(std::size_t n, double x) {
    if (!(x > 1.0)) throw std::invalid_argument("delta_report: x must be > 1");
    const auto ls = detail::delta_log_sums(n, x);
    const double scale = std::exp(ls.log_nfact - ls.l);
    DeltaReport rep;
    rep.n = n;
    rep.x = x;
    rep.value = -std::expm1(ls.log_nfact - ls.l);
    rep.d1 = scale * ls.l1;
    rep.d2 = scale * (ls.l2 - ls.l1 * ls.l1);
    return rep;
}

/// Closed form for Delta_n''(1)/2, a quartic polynomial in n:
///   -n^2(n-1)^2/32 + n(n-1)(2n-1)/144 - n(n-1)/12.
inline double delta_d2_half_at1_exact(std::size_t n) {
    if (n < 1) throw std::invalid_argument("delta_d2_half_at1_exact: n must be >= 1");
    const double nn = static_cast<double>(n);
    return -nn * nn * (nn - 1.0) * (nn - 1.0) / 32.0 +
           nn * (nn - 1.0) * (2.0 * nn - 1.0) / 144.0 - nn * (nn - 1.0) / 12.0;
}

/// Delta_n''(1) itself.
inline double delta_d2_at1_exact(std::size_t n) { return 2.0 * delta_d2_half_at1_exact(n); }

/// Degree-4 polynomial fit b4 n^4 + ... + b0 of Delta_n''(1)/2.
struct QuarticFit {
    std::array<double, 5> b{};  // b[0] = constant term .. b[4] = n^4
    double max_residual = 0.0;
};

/// Least-squares fit over n = n_min .. n_max via a column-equilibrated
/// Householder QR (no normal equations).
inline QuarticFit fit_delta2(std::size_t n_min, std::size_t n_max) {
    if (n_min < 1) throw std::invalid_argument("fit_delta2: n_min must be >= 1");
    if (n_max < n_min + 5)
        throw std::invalid_argument("fit_delta2: need n_max - n_min >= 5");
    const std::size_t rows = n_max - n_min + 1;
    Eigen::MatrixXd a(rows, 5);
    Eigen::VectorXd y(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        const double nn = static_cast<double>(n_min + i);
        double p = 1.0;
        for (int j = 0; j < 5; ++j) {
            a(static_cast<Eigen::Index>(i), j) = p;
            p *= nn;
        }
        y(static_cast<Eigen::Index>(i)) = delta_d2(n_min + i, 1.0) / 2.0;
    }
    Eigen::VectorXd scale(5);
    for (int j = 0; j < 5; ++j) {
        scale(j) = a.col(j).norm();
        a.col(j) /= scale(j);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    if (qr.rank() < 5)
        throw std::runtime_error("fit_delta2: rank-deficient design matrix");
    const Eigen::VectorXd xs = qr.solve(y);
    QuarticFit fit;
    for (int j = 0; j < 5; ++j) fit.b[static_cast<std::size_t>(j)] = xs(j) / scale(j);
    const Eigen::VectorXd resid = a * xs - y;
    fit.max_residual = resid.cwiseAbs().maxCoeff();
    return fit;
}

/// Membership in the region R: u > -ln(1 - (z/2)^{2 gamma}) with 0 <= z < 2.
inline bool region_r(double u, double z, double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("region_r: gamma must lie in (0, 1)");
    if (!(z >= 0.0 && z < 2.0))
        throw std::domain_error("region_r: z must lie in [0, 2)");
    if (!(u > 0.0)) throw std::invalid_argument("region_r: u must be > 0");
    if (z == 0.0) return true;
    const double t = std::exp(2.0 * gamma * std::log(z / 2.0));
    return u > -std::log1p(-t);
}

/// Z_m / Z_0 with the interval implied by the Z_m truncation bound.
struct RatioResult {
    double ratio = 1.0;
    double lo = 1.0;
    double hi = 1.0;
};

inline RatioResult ratio_zm_z0(double u, double z, std::size_t n_max) {
    const double z0 = z_boltzmann(zeta_ho_closed(u), z);
    const SeriesResult r = z_monotone_ho(u, z, n_max);
    RatioResult out;
    out.ratio = r.value / z0;
    out.lo = out.ratio;
    out.hi = (r.value + r.coeff_tail_bound) / z0;
    return out;
}

inline RatioResult ratio_zm_z0(double u, double z) {
    return ratio_zm_z0(u, z, default_n_max(zeta_ho_closed(u) * z));
}

/// Normalized high-temperature ratio a_n n! u^n, which tends to 1 as u -> 0.
inline double asym_low_beta(std::size_t n, double u) {
    if (!(u > 0.0)) throw std::invalid_argument("asym_low_beta: u must be > 0");
    if (n == 0) return 1.0;
    return std::exp(log_coeff_monotone_ho(n, u) +
                    std::lgamma(static_cast<double>(n) + 1.0) +
                    static_cast<double>(n) * std::log(u));
}

/// Normalized low-temperature exponent ln a_n / (-n^2 u / 2), which tends
/// to 1 as u grows.
inline double asym_high_beta(std::size_t n, double u) {
    if (n < 1) throw std::invalid_argument("asym_high_beta: n must be >= 1");
    if (!(u > 0.0)) throw std::invalid_argument("asym_high_beta: u must be > 0");
    const double nn = static_cast<double>(n);
    return log_coeff_monotone_ho(n, u) / (-0.5 * nn * nn * u);
}

} // namespace monostat
