#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>
#include <vector>

#include "monostat/csv.hpp"
#include "monostat/errors.hpp"
#include "monostat/fock.hpp"
#include "monostat/numeric.hpp"
#include "monostat/spectrum.hpp"

namespace monostat {

/// A truncated grand-partition expansion Z = sum a_n z^n together with
/// certified bounds on both truncation directions:
///  - coeff_tail_bound dominates the dropped orders sum_{n>N} a_n z^n of
///    the *true* coefficients;
///  - mode_tail_bound dominates the under-count of the retained orders
///    caused by the mode cutoff (zero when coefficients are exact);
///  - number_tail_bound is the same two tails weighted by n, used for
///    average-number intervals.
/// `certified` is false whenever a needed bound could not be established.
struct SeriesResult {
    std::vector<double> coefficients;
    std::vector<double> coeff_mode_tail;
    double value = 0.0;
    double coeff_tail_bound = 0.0;
    double mode_tail_bound = 0.0;
    double number_tail_bound = 0.0;
    bool certified = false;

    [[nodiscard]] std::size_t n_max() const { return coefficients.size() - 1; }
};

/// zeta^n / n!. Direct product below n = 20, log space above.
inline double coeff_boltzmann(std::size_t n, double zeta) {
    if (!(zeta >= 0.0)) throw std::invalid_argument("coeff_boltzmann: zeta must be >= 0");
    if (n == 0) return 1.0;
    if (zeta == 0.0) return 0.0;
    if (n <= 20) {
        double acc = 1.0;
        for (std::size_t k = 1; k <= n; ++k) acc *= zeta / static_cast<double>(k);
        return acc;
    }
    return std::exp(static_cast<double>(n) * std::log(zeta) -
                    std::lgamma(static_cast<double>(n) + 1.0));
}

/// Z_0 = e^{zeta z}: the Gibbs-corrected classical grand-partition function.
inline double z_boltzmann(double zeta, double z) {
    if (!(zeta >= 0.0) || !(z >= 0.0))
        throw std::invalid_argument("z_boltzmann: arguments must be >= 0");
    return std::exp(zeta * z);
}

/// The uncorrected full-Fock trace 1 / (1 - zeta z), which converges only
/// while the activity stays below the one-particle ground state
/// (mu < min of the spectrum).
inline double z_full_uncorrected(double zeta, double z) {
    if (!(zeta >= 0.0) || !(z >= 0.0))
        throw std::invalid_argument("z_full_uncorrected: arguments must be >= 0");
    if (zeta * z >= 1.0)
        throw std::domain_error(
            "z_full_uncorrected: zeta*z >= 1 (requires mu < min of the spectrum)");
    return 1.0 / (1.0 - zeta * z);
}

/// ln of the monotone oscillator coefficient
///   a_n = e^{n u / 2} * prod_{k=1..n} 1/(e^{k u} - 1),   u = beta*hbar*omega.
inline double log_coeff_monotone_ho(std::size_t n, double u) {
    if (!(u > 0.0)) throw std::invalid_argument("coeff_monotone_ho: u must be > 0");
    double log_prod = 0.0;
    for (std::size_t k = 1; k <= n; ++k)
        log_prod += log_expm1(static_cast<double>(k) * u);
    return 0.5 * static_cast<double>(n) * u - log_prod;
}

inline double coeff_monotone_ho(std::size_t n, double u) {
    if (n == 0) {
        if (!(u > 0.0)) throw std::invalid_argument("coeff_monotone_ho: u must be > 0");
        return 1.0;
    }
    return std::exp(log_coeff_monotone_ho(n, u));
}

namespace detail {

/// Remainder of the exponential series: sum_{n>N} x^n/n! <= x^{N+1}/(N+1)! e^x.
inline double boltzmann_remainder(double x, std::size_t n_max) {
    if (x == 0.0) return 0.0;
    return std::exp(static_cast<double>(n_max + 1) * std::log(x) -
                    std::lgamma(static_cast<double>(n_max) + 2.0) + x);
}

/// sum_{n>N} n x^n/n! = x * sum_{m>=N} x^m/m! <= x * x^N/N! * e^x.
inline double boltzmann_remainder_weighted(double x, std::size_t n_max) {
    if (x == 0.0) return 0.0;
    return x * std::exp(static_cast<double>(n_max) * std::log(x) -
                        std::lgamma(static_cast<double>(n_max) + 1.0) + x);
}

/// sum_{n>N} q^n for q < 1; infinity otherwise.
inline double geometric_remainder(double q, std::size_t n_max) {
    if (q == 0.0) return 0.0;
    if (!(q < 1.0)) return std::numeric_limits<double>::infinity();
    return std::pow(q, static_cast<double>(n_max + 1)) / (1.0 - q);
}

/// sum_{n>N} n q^n = q^{N+1} ((N+1) - N q) / (1-q)^2 for q < 1.
inline double geometric_remainder_weighted(double q, std::size_t n_max) {
    if (q == 0.0) return 0.0;
    if (!(q < 1.0)) return std::numeric_limits<double>::infinity();
    const double n = static_cast<double>(n_max);
    return std::pow(q, n + 1.0) * ((n + 1.0) - n * q) / ((1.0 - q) * (1.0 - q));
}

} // namespace detail

/// Smallest N whose exponential-series remainder at x = zeta*z drops below
/// `tol`, capped at 512. This drives the default truncation order for the
/// Boltzmann-dominated engines.
inline std::size_t default_n_max(double zeta_z, double tol = 1e-12,
                                 std::size_t cap = 512) {
    if (!(zeta_z >= 0.0)) throw std::invalid_argument("default_n_max: need zeta*z >= 0");
    std::size_t n = 0;
    while (n < cap && !(detail::boltzmann_remainder(zeta_z, n) < tol)) ++n;
    return n;
}

/// Geometric analogue for the engines whose coefficients are only bounded
/// by zeta^n; requires zeta*z < 1.
inline std::size_t default_n_max_geometric(double zeta_z, double tol = 1e-12,
                                           std::size_t cap = 512) {
    if (!(zeta_z >= 0.0) || !(zeta_z < 1.0))
        throw std::domain_error("default_n_max_geometric: need 0 <= zeta*z < 1");
    std::size_t n = 0;
    while (n < cap && !(detail::geometric_remainder(zeta_z, n) < tol)) ++n;
    return n;
}

/// Monotone grand-partition function of the 1-d oscillator from the closed
/// product coefficients. Coefficients are exact (no mode truncation); the
/// dropped orders are dominated by the Boltzmann series remainder, valid
/// because a_n <= zeta^n/n! term by term.
inline SeriesResult z_monotone_ho(double u, double z, std::size_t n_max) {
    if (!(u > 0.0)) throw std::invalid_argument("z_monotone_ho: u must be > 0");
    if (!(z >= 0.0)) throw std::invalid_argument("z_monotone_ho: z must be >= 0");
    SeriesResult r;
    r.coefficients.resize(n_max + 1);
    r.coeff_mode_tail.assign(n_max + 1, 0.0);
    for (std::size_t n = 0; n <= n_max; ++n) r.coefficients[n] = coeff_monotone_ho(n, u);
    CompensatedSum acc;
    double zn = 1.0;
    for (std::size_t n = 0; n <= n_max; ++n) {
        acc.add(r.coefficients[n] * zn);
        zn *= z;
    }
    r.value = acc.value();
    const double x = zeta_ho_closed(u) * z;
    r.coeff_tail_bound = detail::boltzmann_remainder(x, n_max);
    r.number_tail_bound = detail::boltzmann_remainder_weighted(x, n_max);
    r.mode_tail_bound = 0.0;
    r.certified = std::isfinite(r.coeff_tail_bound);
    return r;
}

inline SeriesResult z_monotone_ho(double u, double z) {
    return z_monotone_ho(u, z, default_n_max(zeta_ho_closed(u) * z));
}

/// Grand-partition series by direct traversal of the admissible basis:
/// a_n = sum over admissible n-particle states on modes < mode_cutoff of
/// e^{-beta * energy}. States are visited in lexicographic order and
/// accumulated with compensated summation, so results are reproducible.
inline SeriesResult grand_partition_enumerated(const Spectrum& s, const ModeOrder& order,
                                               StatisticsKind kind, double beta, double z,
                                               std::size_t n_max, std::size_t mode_cutoff,
                                               std::uint64_t capacity = kDefaultCapacity) {
    if (!(beta > 0.0)) throw std::invalid_argument("grand_partition_enumerated: beta must be > 0");
    if (!(z >= 0.0)) throw std::invalid_argument("grand_partition_enumerated: z must be >= 0");
    detail::require_total_order(kind, order);
    const std::vector<double> energy = detail::mode_energies(s, order);
    if (mode_cutoff > energy.size())
        throw std::invalid_argument("mode_cutoff exceeds the number of modes");

    std::uint64_t total = 0;
    for (std::size_t n = 0; n <= n_max; ++n)
        total = sat_add(total, count_basis(order, kind, n, mode_cutoff));
    if (total > capacity)
        throw capacity_error("grand_partition_enumerated: " + std::to_string(total) +
                                 " states exceed the cap of " + std::to_string(capacity),
                             total);

    std::vector<double> weight(mode_cutoff);
    for (std::size_t m = 0; m < mode_cutoff; ++m) weight[m] = std::exp(-beta * energy[m]);

    std::vector<CompensatedSum> acc(n_max + 1);
    acc[0].add(1.0);

    auto first_successor = [&](std::size_t last) -> std::size_t {
        switch (kind) {
            case StatisticsKind::full_distinguishable: return 0;
            case StatisticsKind::monotone: return last + 1;
            case StatisticsKind::weakly_monotone_total: return last;
            case StatisticsKind::block_monotone:
                return order.block_start(order.block_of(last) + 1);
            case StatisticsKind::block_weakly_monotone:
                return order.block_start(order.block_of(last));
        }
        return mode_cutoff;
    };

    auto descend = [&](auto&& self, std::size_t depth, std::size_t last, double w) -> void {
        if (depth == n_max) return;
        const std::size_t start = depth == 0 ? 0 : first_successor(last);
        for (std::size_t next = start; next < mode_cutoff; ++next) {
            const double wn = w * weight[next];
            acc[depth + 1].add(wn);
            self(self, depth + 1, next, wn);
        }
    };
    descend(descend, 0, 0, 1.0);

    SeriesResult r;
    r.coefficients.resize(n_max + 1);
    for (std::size_t n = 0; n <= n_max; ++n) r.coefficients[n] = acc[n].value();

    CompensatedSum val;
    double zn = 1.0;
    for (std::size_t n = 0; n <= n_max; ++n) {
        val.add(r.coefficients[n] * zn);
        zn *= z;
    }
    r.value = val.value();

    // One-particle sums: retained modes below / above the cutoff, plus the
    // spectrum's own omitted-level bound.
    CompensatedSum zeta_in, zeta_rest;
    for (std::size_t m = 0; m < mode_cutoff; ++m) zeta_in.add(weight[m]);
    for (std::size_t m = mode_cutoff; m < energy.size(); ++m)
        zeta_rest.add(std::exp(-beta * energy[m]));
    double tail_levels = std::numeric_limits<double>::quiet_NaN();
    switch (s.tail_kind()) {
        case TailKind::complete: tail_levels = 0.0; break;
        case TailKind::geometric: {
            const auto& t = s.tail();
            const double q = t.weight_ratio * std::exp(-beta * t.energy_gap);
            if (q < 1.0 && std::isfinite(t.first_weight))
                tail_levels = t.first_weight * std::exp(-beta * t.first_energy) / (1.0 - q);
            break;
        }
        case TailKind::unknown: break;
    }
    const double missing = zeta_rest.value() + tail_levels;  // NaN if unknown
    const double zeta_ub = zeta_in.value() + missing;

    // Under-count of a retained order: every missing n-particle state owns
    // at least one mode >= mode_cutoff; stripping it maps the state
    // injectively into (bounded (n-1)-state, missing mode), giving
    // m_n <= B_{n-1} * missing with a kind-dependent bound B on the full
    // (n-1)-coefficient (an extra factor n tracks the strip position for
    // the unordered kinds).
    r.coeff_mode_tail.assign(n_max + 1, 0.0);
    auto full_coeff_bound = [&](std::size_t n) -> double {
        const double nn = static_cast<double>(n);
        if (zeta_ub == 0.0) return n == 0 ? 1.0 : 0.0;
        switch (kind) {
            case StatisticsKind::monotone:
            case StatisticsKind::block_monotone:
                return std::exp(nn * std::log(zeta_ub) - std::lgamma(nn + 1.0));
            case StatisticsKind::weakly_monotone_total:
                return std::pow(zeta_ub, nn);
            case StatisticsKind::block_weakly_monotone:
            case StatisticsKind::full_distinguishable:
                return (nn + 1.0) * std::pow(zeta_ub, nn);
        }
        return std::numeric_limits<double>::infinity();
    };
    if (missing == 0.0) {
        r.mode_tail_bound = 0.0;
    } else {
        CompensatedSum mode_tail;
        double zpow = 1.0;
        for (std::size_t n = 1; n <= n_max; ++n) {
            zpow *= z;
            r.coeff_mode_tail[n] = full_coeff_bound(n - 1) * missing;
            mode_tail.add(r.coeff_mode_tail[n] * zpow);
        }
        r.mode_tail_bound = mode_tail.value();
    }

    // Dropped orders. Chains cannot outgrow the full mode/block count, so a
    // complete spectrum makes the series terminate exactly for the strict
    // kinds; otherwise fall back on the Boltzmann or geometric majorant.
    const bool terminated =
        s.tail_kind() == TailKind::complete &&
        ((kind == StatisticsKind::monotone && n_max >= s.num_modes()) ||
         (kind == StatisticsKind::block_monotone && n_max >= s.num_levels()));
    if (terminated) {
        r.coeff_tail_bound = 0.0;
        r.number_tail_bound = 0.0;
    } else {
        switch (kind) {
            case StatisticsKind::monotone:
            case StatisticsKind::block_monotone:
                r.coeff_tail_bound = detail::boltzmann_remainder(zeta_ub * z, n_max);
                r.number_tail_bound = detail::boltzmann_remainder_weighted(zeta_ub * z, n_max);
                break;
            default:
                r.coeff_tail_bound = detail::geometric_remainder(zeta_ub * z, n_max);
                r.number_tail_bound = detail::geometric_remainder_weighted(zeta_ub * z, n_max);
                break;
        }
    }
    // Mode under-count of the number weights.
    if (missing != 0.0) {
        CompensatedSum wtail;
        double zpow = 1.0;
        for (std::size_t n = 1; n <= n_max; ++n) {
            zpow *= z;
            wtail.add(static_cast<double>(n) * r.coeff_mode_tail[n] * zpow);
        }
        r.number_tail_bound += wtail.value();
    }

    r.certified = std::isfinite(r.coeff_tail_bound) && std::isfinite(r.mode_tail_bound) &&
                  std::isfinite(r.number_tail_bound);
    if (!r.certified) {
        r.coeff_tail_bound = std::numeric_limits<double>::quiet_NaN();
        r.mode_tail_bound = std::numeric_limits<double>::quiet_NaN();
        r.number_tail_bound = std::numeric_limits<double>::quiet_NaN();
    }
    return r;
}

/// Gibbs-corrected Boltzmann series on the truncated one-particle trace:
/// a_n = zeta_trunc^n / n!.
inline SeriesResult boltzmann_corrected_from_enumeration(const Spectrum& s, double beta,
                                                         double z, std::size_t n_max,
                                                         std::size_t mode_cutoff) {
    if (!(beta > 0.0))
        throw std::invalid_argument("boltzmann_corrected_from_enumeration: beta must be > 0");
    if (!(z >= 0.0))
        throw std::invalid_argument("boltzmann_corrected_from_enumeration: z must be >= 0");
    if (static_cast<std::uint64_t>(mode_cutoff) > s.num_modes())
        throw std::invalid_argument("mode_cutoff exceeds the number of modes");

    CompensatedSum zeta_in, zeta_rest;
    std::uint64_t seen = 0;
    for (const auto& lv : s.levels()) {
        for (std::uint64_t g = 0; g < lv.degeneracy; ++g) {
            const double w = std::exp(-beta * lv.energy);
            if (seen < mode_cutoff)
                zeta_in.add(w);
            else
                zeta_rest.add(w);
            ++seen;
        }
    }
    double tail_levels = std::numeric_limits<double>::quiet_NaN();
    switch (s.tail_kind()) {
        case TailKind::complete: tail_levels = 0.0; break;
        case TailKind::geometric: {
            const auto& t = s.tail();
            const double q = t.weight_ratio * std::exp(-beta * t.energy_gap);
            if (q < 1.0 && std::isfinite(t.first_weight))
                tail_levels = t.first_weight * std::exp(-beta * t.first_energy) / (1.0 - q);
            break;
        }
        case TailKind::unknown: break;
    }
    const double zeta_trunc = zeta_in.value();
    const double missing = zeta_rest.value() + tail_levels;
    const double zeta_ub = zeta_trunc + missing;

    SeriesResult r;
    r.coefficients.resize(n_max + 1);
    r.coeff_mode_tail.assign(n_max + 1, 0.0);
    for (std::size_t n = 0; n <= n_max; ++n)
        r.coefficients[n] = coeff_boltzmann(n, zeta_trunc);
    CompensatedSum val;
    double zn = 1.0;
    for (std::size_t n = 0; n <= n_max; ++n) {
        val.add(r.coefficients[n] * zn);
        zn *= z;
    }
    r.value = val.value();

    // (zeta_full^n - zeta_trunc^n)/n! <= missing * zeta_ub^{n-1}/(n-1)!.
    if (missing == 0.0) {
        r.mode_tail_bound = 0.0;
    } else {
        CompensatedSum mode_tail;
        double zpow = 1.0;
        for (std::size_t n = 1; n <= n_max; ++n) {
            zpow *= z;
            const double nn = static_cast<double>(n - 1);
            r.coeff_mode_tail[n] =
                missing * std::exp(nn * std::log(zeta_ub) - std::lgamma(nn + 1.0));
            mode_tail.add(r.coeff_mode_tail[n] * zpow);
        }
        r.mode_tail_bound = mode_tail.value();
    }
    r.coeff_tail_bound = detail::boltzmann_remainder(zeta_ub * z, n_max);
    r.number_tail_bound = detail::boltzmann_remainder_weighted(zeta_ub * z, n_max);
    if (missing != 0.0) {
        CompensatedSum wtail;
        double zpow = 1.0;
        for (std::size_t n = 1; n <= n_max; ++n) {
            zpow *= z;
            wtail.add(static_cast<double>(n) * r.coeff_mode_tail[n] * zpow);
        }
        r.number_tail_bound += wtail.value();
    }
    r.certified = std::isfinite(r.mode_tail_bound) && std::isfinite(r.coeff_tail_bound);
    if (!r.certified) {
        r.coeff_tail_bound = std::numeric_limits<double>::quiet_NaN();
        r.mode_tail_bound = std::numeric_limits<double>::quiet_NaN();
        r.number_tail_bound = std::numeric_limits<double>::quiet_NaN();
    }
    return r;
}

/// Columns: n, a_n, partial_sum, tail_bound. The per-row tail bound covers
/// everything the partial sum still misses (later retained orders, dropped
/// orders, and mode under-count).
inline void write_series_csv(std::ostream& os, const SeriesResult& r, double z) {
    os << "n,a_n,partial_sum,tail_bound\n";
    CompensatedSum partial;
    double zn = 1.0;
    for (std::size_t n = 0; n < r.coefficients.size(); ++n) {
        partial.add(r.coefficients[n] * zn);
        zn *= z;
        const double rest = (r.value - partial.value()) + r.coeff_tail_bound +
                            r.mode_tail_bound;
        csv_row(os, n, r.coefficients[n], partial.value(), rest);
    }
}

} // namespace monostat
