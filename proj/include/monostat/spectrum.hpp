#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "monostat/errors.hpp"
#include "monostat/numeric.hpp"

namespace monostat {

/// One eigenvalue of the one-particle Hamiltonian together with its
/// multiplicity.
struct EnergyLevel {
    double energy = 0.0;
    std::uint64_t degeneracy = 1;
};

/// Geometric majorant for the levels omitted by a finite truncation.
/// The omitted level sum is dominated by
///   first_weight * e^{-beta * first_energy} / (1 - weight_ratio * e^{-beta * energy_gap})
/// whenever weight_ratio * e^{-beta * energy_gap} < 1.
struct GeometricTail {
    double first_energy = 0.0;  // energy of the first omitted level
    double energy_gap = 0.0;    // lower bound on the spacing of omitted levels
    double first_weight = 1.0;  // upper bound on the first omitted degeneracy
    double weight_ratio = 1.0;  // upper bound on successive degeneracy ratios
};

enum class TailKind {
    complete,   // the listed levels are the whole spectrum
    geometric,  // omitted levels dominated by a GeometricTail
    unknown,    // truncation error cannot be certified
};

/// Value of the one-particle partition sum over the retained levels,
/// plus a bound on the omitted-level contribution when one is known.
struct PartitionValue {
    double value = 0.0;
    double tail_bound = std::numeric_limits<double>::quiet_NaN();
    bool certified = false;
};

/// Finite, strictly increasing list of energy levels with an optional
/// description of what lies beyond the last retained one. Immutable
/// after construction and safe to share across threads.
class Spectrum {
public:
    static Spectrum complete(std::vector<EnergyLevel> levels) {
        return Spectrum(std::move(levels), TailKind::complete, {});
    }

    static Spectrum truncated(std::vector<EnergyLevel> levels, GeometricTail tail) {
        return Spectrum(std::move(levels), TailKind::geometric, tail);
    }

    static Spectrum uncertified(std::vector<EnergyLevel> levels) {
        return Spectrum(std::move(levels), TailKind::unknown, {});
    }

    [[nodiscard]] const std::vector<EnergyLevel>& levels() const { return levels_; }
    [[nodiscard]] TailKind tail_kind() const { return tail_kind_; }
    [[nodiscard]] const GeometricTail& tail() const { return tail_; }

    [[nodiscard]] std::size_t num_levels() const { return levels_.size(); }

    /// Total number of one-particle modes (levels counted with degeneracy).
    [[nodiscard]] std::uint64_t num_modes() const {
        std::uint64_t n = 0;
        for (const auto& lv : levels_) n = sat_add(n, lv.degeneracy);
        return n;
    }

    /// Energy of the i-th mode when levels are expanded by degeneracy.
    [[nodiscard]] double mode_energy(std::uint64_t mode) const {
        std::uint64_t seen = 0;
        for (const auto& lv : levels_) {
            seen += lv.degeneracy;
            if (mode < seen) return lv.energy;
        }
        throw std::invalid_argument("mode index " + std::to_string(mode) +
                                    " out of range (" + std::to_string(num_modes()) +
                                    " modes)");
    }

private:
    Spectrum(std::vector<EnergyLevel> levels, TailKind kind, GeometricTail tail)
        : levels_(std::move(levels)), tail_kind_(kind), tail_(tail) {
        validate();
    }

    void validate() const {
        double prev = -1.0;
        for (std::size_t i = 0; i < levels_.size(); ++i) {
            const auto& lv = levels_[i];
            if (!(lv.energy >= 0.0) || !std::isfinite(lv.energy))
                throw std::invalid_argument("level " + std::to_string(i) +
                                            ": energy must be finite and >= 0");
            if (lv.degeneracy < 1)
                throw std::invalid_argument("level " + std::to_string(i) +
                                            ": degeneracy must be >= 1");
            if (i > 0 && !(lv.energy > prev))
                throw std::invalid_argument("level " + std::to_string(i) +
                                            ": energies must be strictly increasing");
            prev = lv.energy;
        }
        if (tail_kind_ == TailKind::geometric) {
            if (!(tail_.energy_gap > 0.0) || !(tail_.first_weight > 0.0) ||
                !(tail_.weight_ratio > 0.0))
                throw std::invalid_argument("geometric tail: gap, weight and ratio must be positive");
            if (!levels_.empty() && !(tail_.first_energy > levels_.back().energy))
                throw std::invalid_argument(
                    "geometric tail: first omitted energy must exceed the last retained one");
        }
    }

    std::vector<EnergyLevel> levels_;
    TailKind tail_kind_;
    GeometricTail tail_;
};

/// A point of the grand-canonical plane: inverse temperature and activity.
struct ThermoPoint {
    double beta = 1.0;
    double z = 0.0;

    ThermoPoint(double beta_, double z_) : beta(beta_), z(z_) {
        if (!(beta > 0.0)) throw std::invalid_argument("ThermoPoint: beta must be > 0");
        if (!(z >= 0.0)) throw std::invalid_argument("ThermoPoint: z must be >= 0");
    }
};

/// z = e^{beta * mu}.
inline double fugacity_from_mu(double beta, double mu) {
    if (!(beta > 0.0)) throw std::invalid_argument("fugacity_from_mu: beta must be > 0");
    return std::exp(beta * mu);
}

/// First `num_levels` levels of the 1-d oscillator, hbar*omega*(n + 1/2),
/// all non-degenerate, with the exact geometric tail attached.
inline Spectrum harmonic_spectrum(double hbar_omega, std::uint64_t num_levels) {
    if (!(hbar_omega > 0.0))
        throw std::invalid_argument("harmonic_spectrum: hbar_omega must be > 0");
    if (num_levels < 1)
        throw std::invalid_argument("harmonic_spectrum: need at least one level");
    std::vector<EnergyLevel> levels;
    levels.reserve(num_levels);
    for (std::uint64_t n = 0; n < num_levels; ++n)
        levels.push_back({hbar_omega * (static_cast<double>(n) + 0.5), 1});
    GeometricTail tail;
    tail.first_energy = hbar_omega * (static_cast<double>(num_levels) + 0.5);
    tail.energy_gap = hbar_omega;
    tail.first_weight = 1.0;
    tail.weight_ratio = 1.0;
    return Spectrum::truncated(std::move(levels), tail);
}

/// First `num_shells` shells of the d-dimensional isotropic oscillator:
/// energies hbar*omega*(n + d/2), shell degeneracy binom(d+n-1, n).
/// Degeneracies are exact integers; overflow raises instead of wrapping.
inline Spectrum iso_oscillator_spectrum(std::uint32_t dim, double hbar_omega,
                                        std::uint64_t num_shells) {
    if (dim < 1) throw std::invalid_argument("iso_oscillator_spectrum: dim must be >= 1");
    if (!(hbar_omega > 0.0))
        throw std::invalid_argument("iso_oscillator_spectrum: hbar_omega must be > 0");
    if (num_shells < 1)
        throw std::invalid_argument("iso_oscillator_spectrum: need at least one shell");
    std::vector<EnergyLevel> levels;
    levels.reserve(num_shells);
    // Pascal recurrence g(n) = g(n-1) * (d+n-1) / n, exact at every step.
    std::uint64_t g = 1;
    for (std::uint64_t n = 0; n < num_shells; ++n) {
        if (n > 0) {
            const unsigned __int128 wide =
                static_cast<unsigned __int128>(g) * (dim + n - 1);
            const unsigned __int128 next = wide / n;
            if (wide % n != 0)
                throw std::logic_error("iso_oscillator_spectrum: recurrence not integral");
            if (next > std::numeric_limits<std::uint64_t>::max())
                throw degeneracy_overflow("iso_oscillator_spectrum: degeneracy at shell " +
                                          std::to_string(n) + " exceeds 64 bits");
            g = static_cast<std::uint64_t>(next);
        }
        levels.push_back({hbar_omega * (static_cast<double>(n) + dim / 2.0), g});
    }
    GeometricTail tail;
    tail.first_energy = hbar_omega * (static_cast<double>(num_shells) + dim / 2.0);
    tail.energy_gap = hbar_omega;
    // binom(d+n-1, n) grows by a factor (d+n)/(n+1) per shell, decreasing in n,
    // so the first omitted ratio bounds all later ones.
    double first_weight;
    try {
        first_weight = static_cast<double>(binomial_checked(dim + num_shells - 1, num_shells));
    } catch (const degeneracy_overflow&) {
        first_weight = std::numeric_limits<double>::infinity();
    }
    tail.first_weight = first_weight;
    tail.weight_ratio = static_cast<double>(dim + num_shells) /
                        static_cast<double>(num_shells + 1);
    return Spectrum::truncated(std::move(levels), tail);
}

/// Tail bound of the one-particle sum at inverse temperature beta.
/// Returns NaN (uncertified) when the descriptor cannot dominate the tail.
inline PartitionValue partition_function(const Spectrum& s, double beta) {
    if (!(beta > 0.0))
        throw std::invalid_argument("partition_function: beta must be > 0");
    CompensatedSum acc;
    for (const auto& lv : s.levels())
        acc.add(static_cast<double>(lv.degeneracy) * std::exp(-beta * lv.energy));
    PartitionValue out;
    out.value = acc.value();
    switch (s.tail_kind()) {
        case TailKind::complete:
            out.tail_bound = 0.0;
            out.certified = true;
            break;
        case TailKind::geometric: {
            const auto& t = s.tail();
            const double q = t.weight_ratio * std::exp(-beta * t.energy_gap);
            if (q < 1.0 && std::isfinite(t.first_weight)) {
                out.tail_bound = t.first_weight * std::exp(-beta * t.first_energy) / (1.0 - q);
                out.certified = true;
            }
            break;
        }
        case TailKind::unknown:
            break;
    }
    return out;
}

/// Closed form for the 1-d oscillator: 1 / (2 sinh(u/2)) with u = beta*hbar*omega.
/// A series branch handles u below 1e-8 where e^u - 1 cancels.
inline double zeta_ho_closed(double u) {
    if (!(u > 0.0)) throw std::invalid_argument("zeta_ho_closed: argument must be > 0");
    if (u < 1e-8) return 1.0 / u - u / 24.0;
    return 1.0 / (2.0 * std::sinh(0.5 * u));
}

} // namespace monostat
