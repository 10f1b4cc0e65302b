#pragma once

#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "monostat/csv.hpp"
#include "monostat/errors.hpp"
#include "monostat/fock.hpp"
#include "monostat/numeric.hpp"
#include "monostat/parallel.hpp"
#include "monostat/series.hpp"
#include "monostat/spectrum.hpp"

namespace monostat {

/// Average particle number with the interval implied by the series bounds.
struct AvgNumber {
    double value = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

/// N = z dln Z/dz evaluated exactly on the truncated series as
/// (sum n a_n z^n) / (sum a_n z^n); no numerical differentiation.
inline AvgNumber avg_number_series(const SeriesResult& r, double z) {
    if (!(z >= 0.0)) throw std::invalid_argument("avg_number_series: z must be >= 0");
    if (!(r.value > 0.0))
        throw std::domain_error("avg_number_series: partition value must be positive");
    CompensatedSum num;
    double zn = 1.0;
    for (std::size_t n = 1; n < r.coefficients.size(); ++n) {
        zn *= z;
        num.add(static_cast<double>(n) * r.coefficients[n] * zn);
    }
    const double s1 = num.value();
    const double s0 = r.value;
    const double t0 = r.coeff_tail_bound + r.mode_tail_bound;
    AvgNumber out;
    out.value = s1 / s0;
    out.lo = s1 / (s0 + t0);
    out.hi = (s1 + r.number_tail_bound) / s0;
    return out;
}

/// ln Z_0 = zeta z, hence N_0 = zeta z.
inline double avg_number_boltzmann(double zeta, double z) {
    if (!(zeta >= 0.0) || !(z >= 0.0))
        throw std::invalid_argument("avg_number_boltzmann: arguments must be >= 0");
    return zeta * z;
}

/// Low-density approximation for the oscillator:
///   N_m ~ N_0 - z^2 e^u / (2 ((e^u - 1) - (z/2)^2 e^u)),
/// valid only where the denominator is positive. Evaluated with the
/// common e^u factor cancelled, which stays accurate for small u.
inline double avg_number_monotone_approx(double u, double z) {
    if (!(u > 0.0)) throw std::invalid_argument("avg_number_monotone_approx: u must be > 0");
    if (!(z >= 0.0)) throw std::invalid_argument("avg_number_monotone_approx: z must be >= 0");
    const double denom = one_minus_exp_neg(u) - 0.25 * z * z;
    if (!(denom > 0.0))
        throw outside_validity(
            "avg_number_monotone_approx: (e^u - 1) - (z/2)^2 e^u must be positive");
    const double correction = z * z / (2.0 * denom);
    return zeta_ho_closed(u) * z - correction;
}

/// One comparison-table entry. Errors are interval half-widths derived from
/// the truncation bounds; NaN marks an uncertified row.
struct ObservableRow {
    double beta = 0.0;
    double z = 0.0;
    std::string kind;
    double partition = 0.0;
    double partition_err = 0.0;
    double number = 0.0;
    double number_err = 0.0;
};

/// One row per (point, engine): the corrected Boltzmann reference first
/// (when requested), then each enumerated kind in the caller's order.
/// Points evaluate concurrently; the row order is fixed by the inputs.
inline std::vector<ObservableRow> compare_statistics(
    const Spectrum& s, const ModeOrder& order, const std::vector<StatisticsKind>& kinds,
    const std::vector<ThermoPoint>& grid, std::size_t n_max, std::size_t mode_cutoff,
    std::uint64_t capacity = kDefaultCapacity, bool include_boltzmann = true) {
    const std::size_t per_point = kinds.size() + (include_boltzmann ? 1 : 0);
    std::vector<ObservableRow> rows(grid.size() * per_point);
    parallel_for_indexed(grid.size(), [&](std::size_t p) {
        const ThermoPoint& pt = grid[p];
        std::size_t slot = p * per_point;
        auto emit = [&](const std::string& label, const SeriesResult& r) {
            ObservableRow row;
            row.beta = pt.beta;
            row.z = pt.z;
            row.kind = label;
            row.partition = r.value;
            row.partition_err = r.coeff_tail_bound + r.mode_tail_bound;
            const AvgNumber n = avg_number_series(r, pt.z);
            row.number = n.value;
            row.number_err = std::max(n.hi - n.value, n.value - n.lo);
            rows[slot++] = std::move(row);
        };
        if (include_boltzmann)
            emit("boltzmann", boltzmann_corrected_from_enumeration(s, pt.beta, pt.z, n_max,
                                                                   mode_cutoff));
        for (StatisticsKind kind : kinds)
            emit(to_string(kind), grand_partition_enumerated(s, order, kind, pt.beta, pt.z,
                                                             n_max, mode_cutoff, capacity));
    });
    return rows;
}

/// Columns: u, z, kind, Z, Z_err, N, N_err. `energy_scale` converts the
/// stored beta to the dimensionless u column (u = beta * energy_scale).
inline void write_observables_csv(std::ostream& os, const std::vector<ObservableRow>& rows,
                                  double energy_scale = 1.0) {
    os << "u,z,kind,Z,Z_err,N,N_err\n";
    for (const auto& r : rows)
        csv_row(os, r.beta * energy_scale, r.z, r.kind, r.partition, r.partition_err,
                r.number, r.number_err);
}

} // namespace monostat
