#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "monostat/csv.hpp"
#include "monostat/errors.hpp"
#include "monostat/numeric.hpp"
#include "monostat/spectrum.hpp"

namespace monostat {

enum class StatisticsKind {
    full_distinguishable,   // every mode sequence admissible
    monotone,               // strictly increasing mode indices (total order)
    weakly_monotone_total,  // non-decreasing mode indices (total order)
    block_monotone,         // strictly increasing block indices
    block_weakly_monotone,  // no strict block descent between neighbours
};

inline const char* to_string(StatisticsKind k) {
    switch (k) {
        case StatisticsKind::full_distinguishable: return "full";
        case StatisticsKind::monotone: return "monotone";
        case StatisticsKind::weakly_monotone_total: return "weakly-monotone";
        case StatisticsKind::block_monotone: return "block-monotone";
        case StatisticsKind::block_weakly_monotone: return "block-weakly-monotone";
    }
    return "?";
}

inline StatisticsKind parse_statistics_kind(const std::string& name) {
    if (name == "full") return StatisticsKind::full_distinguishable;
    if (name == "monotone") return StatisticsKind::monotone;
    if (name == "weakly-monotone") return StatisticsKind::weakly_monotone_total;
    if (name == "block-monotone") return StatisticsKind::block_monotone;
    if (name == "block-weakly-monotone") return StatisticsKind::block_weakly_monotone;
    throw std::invalid_argument("unknown statistics kind: " + name);
}

/// Partial order on modes: modes are grouped into consecutive blocks and
/// compare by block index only (modes within a block are incomparable).
class ModeOrder {
public:
    static ModeOrder from_block_sizes(std::vector<std::uint64_t> sizes) {
        return ModeOrder(std::move(sizes));
    }

    /// One singleton block per mode, i.e. the usual total order.
    static ModeOrder total_order(std::uint64_t num_modes) {
        return ModeOrder(std::vector<std::uint64_t>(num_modes, 1));
    }

    /// Block j = the g_j modes of level j.
    static ModeOrder from_spectrum(const Spectrum& s) {
        std::vector<std::uint64_t> sizes;
        sizes.reserve(s.num_levels());
        for (const auto& lv : s.levels()) sizes.push_back(lv.degeneracy);
        return ModeOrder(std::move(sizes));
    }

    [[nodiscard]] std::size_t num_modes() const { return block_of_.size(); }
    [[nodiscard]] std::size_t num_blocks() const { return block_start_.size() - 1; }

    [[nodiscard]] std::size_t block_of(std::size_t mode) const {
        if (mode >= block_of_.size())
            throw std::invalid_argument("mode index " + std::to_string(mode) +
                                        " out of range");
        return block_of_[mode];
    }

    /// First mode of block j; block_start(num_blocks()) == num_modes().
    [[nodiscard]] std::size_t block_start(std::size_t block) const {
        return block_start_[block];
    }

    [[nodiscard]] std::uint64_t block_size(std::size_t block) const {
        return block_start_[block + 1] - block_start_[block];
    }

    [[nodiscard]] bool totally_ordered() const {
        return num_blocks() == num_modes();
    }

private:
    explicit ModeOrder(std::vector<std::uint64_t> sizes) {
        block_start_.push_back(0);
        for (std::size_t j = 0; j < sizes.size(); ++j) {
            if (sizes[j] < 1)
                throw std::invalid_argument("block " + std::to_string(j) +
                                            ": size must be >= 1");
            for (std::uint64_t m = 0; m < sizes[j]; ++m) block_of_.push_back(j);
            block_start_.push_back(block_of_.size());
        }
    }

    std::vector<std::size_t> block_of_;
    std::vector<std::size_t> block_start_;
};

/// An n-particle basis vector: the (possibly empty) sequence of occupied
/// mode indices. The empty sequence is the vacuum.
struct BasisState {
    std::vector<std::size_t> modes;

    [[nodiscard]] std::size_t particles() const { return modes.size(); }

    bool operator==(const BasisState& other) const { return modes == other.modes; }
};

namespace detail {

inline void require_total_order(StatisticsKind kind, const ModeOrder& order) {
    if ((kind == StatisticsKind::monotone ||
         kind == StatisticsKind::weakly_monotone_total) &&
        !order.totally_ordered())
        throw kind_order_mismatch(std::string(to_string(kind)) +
                                  " requires singleton blocks (a total order)");
}

} // namespace detail

/// Whether `state` belongs to the n-particle subspace selected by `kind`.
inline bool admissible(const BasisState& state, StatisticsKind kind,
                       const ModeOrder& order) {
    detail::require_total_order(kind, order);
    for (std::size_t m : state.modes)
        if (m >= order.num_modes())
            throw std::invalid_argument("mode index " + std::to_string(m) +
                                        " out of range");
    for (std::size_t i = 1; i < state.modes.size(); ++i) {
        const std::size_t prev = state.modes[i - 1];
        const std::size_t cur = state.modes[i];
        switch (kind) {
            case StatisticsKind::full_distinguishable:
                break;
            case StatisticsKind::monotone:
                if (!(cur > prev)) return false;
                break;
            case StatisticsKind::weakly_monotone_total:
                if (cur < prev) return false;
                break;
            case StatisticsKind::block_monotone:
                if (!(order.block_of(cur) > order.block_of(prev))) return false;
                break;
            case StatisticsKind::block_weakly_monotone:
                if (order.block_of(cur) < order.block_of(prev)) return false;
                break;
        }
    }
    return true;
}

/// Number of admissible n-particle states on modes < mode_cutoff,
/// saturating at uint64 max. Costs O(n * blocks), not O(count).
inline std::uint64_t count_basis(const ModeOrder& order, StatisticsKind kind,
                                 std::size_t n_particles, std::size_t mode_cutoff) {
    detail::require_total_order(kind, order);
    if (mode_cutoff > order.num_modes())
        throw std::invalid_argument("mode_cutoff exceeds the number of modes");
    const std::uint64_t m = mode_cutoff;
    const std::size_t n = n_particles;
    if (n == 0) return 1;
    if (m == 0) return 0;

    auto sat_binomial = [](std::uint64_t nn, std::uint64_t kk) -> std::uint64_t {
        if (kk > nn) return 0;
        if (kk > nn - kk) kk = nn - kk;
        unsigned __int128 acc = 1;
        const unsigned __int128 cap = std::numeric_limits<std::uint64_t>::max();
        for (std::uint64_t i = 1; i <= kk; ++i) {
            acc = acc * (nn - kk + i) / i;
            if (acc > cap) return std::numeric_limits<std::uint64_t>::max();
        }
        return static_cast<std::uint64_t>(acc);
    };

    switch (kind) {
        case StatisticsKind::full_distinguishable: {
            std::uint64_t acc = 1;
            for (std::size_t i = 0; i < n; ++i) acc = sat_mul(acc, m);
            return acc;
        }
        case StatisticsKind::monotone:
            return sat_binomial(m, n);
        case StatisticsKind::weakly_monotone_total:
            return sat_binomial(m + n - 1, n);
        case StatisticsKind::block_monotone:
        case StatisticsKind::block_weakly_monotone: {
            // Effective block sizes after the mode cutoff (the last block
            // may be partially retained).
            std::vector<std::uint64_t> sizes;
            for (std::size_t j = 0; j < order.num_blocks(); ++j) {
                const std::size_t lo = order.block_start(j);
                if (lo >= mode_cutoff) break;
                const std::size_t hi = std::min<std::size_t>(order.block_start(j + 1), mode_cutoff);
                sizes.push_back(hi - lo);
            }
            // Elementary symmetric e_n (strict chains) or complete
            // homogeneous h_n (repeats allowed) in the block sizes.
            std::vector<std::uint64_t> dp(n + 1, 0);
            dp[0] = 1;
            for (std::uint64_t g : sizes) {
                if (kind == StatisticsKind::block_monotone) {
                    for (std::size_t j = n; j >= 1; --j)
                        dp[j] = sat_add(dp[j], sat_mul(dp[j - 1], g));
                } else {
                    for (std::size_t j = 1; j <= n; ++j)
                        dp[j] = sat_add(dp[j], sat_mul(dp[j - 1], g));
                }
            }
            return dp[n];
        }
    }
    return 0;
}

inline constexpr std::uint64_t kDefaultCapacity = 10'000'000;

namespace detail {

/// Depth-first traversal of all admissible states with up to `max_depth`
/// particles on modes < mode_cutoff, in lexicographic order. `visit` is
/// called once per state (including the vacuum) with the current prefix.
template <typename Visit>
void walk_states(const ModeOrder& order, StatisticsKind kind,
                 std::size_t max_depth, std::size_t mode_cutoff, Visit&& visit) {
    std::vector<std::size_t> prefix;
    prefix.reserve(max_depth);

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

    auto descend = [&](auto&& self) -> void {
        visit(static_cast<const std::vector<std::size_t>&>(prefix));
        if (prefix.size() == max_depth) return;
        const std::size_t start = prefix.empty() ? 0 : first_successor(prefix.back());
        for (std::size_t next = start; next < mode_cutoff; ++next) {
            prefix.push_back(next);
            self(self);
            prefix.pop_back();
        }
    };
    descend(descend);
}

} // namespace detail

/// All admissible n-particle states on modes < mode_cutoff, in
/// lexicographic order. Throws capacity_error (with the would-be count)
/// before materializing anything too large.
inline std::vector<BasisState> enumerate_basis(const ModeOrder& order,
                                               StatisticsKind kind,
                                               std::size_t n_particles,
                                               std::size_t mode_cutoff,
                                               std::uint64_t capacity = kDefaultCapacity) {
    const std::uint64_t count = count_basis(order, kind, n_particles, mode_cutoff);
    if (count > capacity)
        throw capacity_error("enumerate_basis: " + std::to_string(count) +
                                 " states exceed the cap of " + std::to_string(capacity),
                             count);
    std::vector<BasisState> out;
    out.reserve(static_cast<std::size_t>(count));
    detail::walk_states(order, kind, n_particles, mode_cutoff,
                        [&](const std::vector<std::size_t>& prefix) {
                            if (prefix.size() == n_particles) out.push_back({prefix});
                        });
    return out;
}

namespace detail {

/// Per-mode energies with the alignment check: the order must carve the
/// spectrum's modes (levels expanded by degeneracy) into blocks that never
/// straddle a level boundary.
inline std::vector<double> mode_energies(const Spectrum& s, const ModeOrder& order) {
    if (static_cast<std::uint64_t>(order.num_modes()) != s.num_modes())
        throw alignment_error("spectrum has " + std::to_string(s.num_modes()) +
                              " modes but order has " + std::to_string(order.num_modes()));
    std::vector<double> energy;
    std::vector<std::size_t> level_of;
    energy.reserve(order.num_modes());
    for (std::size_t j = 0; j < s.num_levels(); ++j)
        for (std::uint64_t g = 0; g < s.levels()[j].degeneracy; ++g) {
            energy.push_back(s.levels()[j].energy);
            level_of.push_back(j);
        }
    for (std::size_t b = 0; b < order.num_blocks(); ++b)
        if (level_of[order.block_start(b)] != level_of[order.block_start(b + 1) - 1])
            throw alignment_error("block " + std::to_string(b) +
                                  " straddles a level boundary");
    return energy;
}

} // namespace detail

/// Total energy of a basis state under the additive n-particle Hamiltonian.
inline double state_energy(const BasisState& state, const Spectrum& s,
                           const ModeOrder& order) {
    const std::vector<double> energy = detail::mode_energies(s, order);
    CompensatedSum acc;
    for (std::size_t m : state.modes) {
        if (m >= energy.size())
            throw std::invalid_argument("mode index " + std::to_string(m) +
                                        " out of range");
        acc.add(energy[m]);
    }
    return acc.value();
}

/// Sparse 0/1 matrix with at most one nonzero per column, the shape of
/// every creator/annihilator here.
class OperatorMatrix {
public:
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

    OperatorMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), col_to_row_(cols, npos) {}

    [[nodiscard]] std::size_t rows() const { return rows_; }
    [[nodiscard]] std::size_t cols() const { return cols_; }

    void set(std::size_t col, std::size_t row) {
        col_to_row_.at(col) = row;
    }

    /// Row of the single 1 in this column, or npos for a zero column.
    [[nodiscard]] std::size_t row_of(std::size_t col) const { return col_to_row_.at(col); }

    [[nodiscard]] bool is_zero() const {
        return std::all_of(col_to_row_.begin(), col_to_row_.end(),
                           [](std::size_t r) { return r == npos; });
    }

    [[nodiscard]] std::vector<double> dense() const {
        std::vector<double> m(rows_ * cols_, 0.0);
        for (std::size_t c = 0; c < cols_; ++c)
            if (col_to_row_[c] != npos) m[col_to_row_[c] * cols_ + c] = 1.0;
        return m;
    }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<std::size_t> col_to_row_;
};

namespace detail {

inline std::size_t index_of(const std::vector<BasisState>& basis, const BasisState& s) {
    const auto it = std::lower_bound(basis.begin(), basis.end(), s,
                                     [](const BasisState& a, const BasisState& b) {
                                         return a.modes < b.modes;
                                     });
    if (it == basis.end() || !(*it == s))
        throw std::logic_error("state missing from enumerated basis");
    return static_cast<std::size_t>(it - basis.begin());
}

/// {i} strictly precedes every mode of `state` under the kind's order.
inline bool precedes_all(std::size_t i, const BasisState& state, StatisticsKind kind,
                         const ModeOrder& order) {
    if (state.modes.empty()) return true;
    const std::size_t head = state.modes.front();
    if (kind == StatisticsKind::monotone) return i < head;
    return order.block_of(i) < order.block_of(head);
}

} // namespace detail

/// Creator a_i† restricted to the n-particle truncated basis: maps e_alpha
/// to e_(i,alpha) when {i} strictly precedes alpha, and to 0 otherwise.
inline OperatorMatrix creation(std::size_t mode, std::size_t n_particles,
                               const ModeOrder& order, StatisticsKind kind,
                               std::size_t mode_cutoff,
                               std::uint64_t capacity = kDefaultCapacity) {
    if (kind != StatisticsKind::monotone && kind != StatisticsKind::block_monotone)
        throw kind_order_mismatch("creation operators are defined for the strict kinds");
    if (mode >= mode_cutoff)
        throw std::invalid_argument("mode must lie below mode_cutoff");
    const auto domain = enumerate_basis(order, kind, n_particles, mode_cutoff, capacity);
    const auto codomain = enumerate_basis(order, kind, n_particles + 1, mode_cutoff, capacity);
    OperatorMatrix a(codomain.size(), domain.size());
    for (std::size_t c = 0; c < domain.size(); ++c) {
        if (!detail::precedes_all(mode, domain[c], kind, order)) continue;
        BasisState image;
        image.modes.reserve(n_particles + 1);
        image.modes.push_back(mode);
        image.modes.insert(image.modes.end(), domain[c].modes.begin(),
                           domain[c].modes.end());
        a.set(c, detail::index_of(codomain, image));
    }
    return a;
}

/// Annihilator a_i restricted to the n-particle truncated basis: strips the
/// leading mode when it equals i, otherwise 0. The vacuum maps to 0.
inline OperatorMatrix annihilation(std::size_t mode, std::size_t n_particles,
                                   const ModeOrder& order, StatisticsKind kind,
                                   std::size_t mode_cutoff,
                                   std::uint64_t capacity = kDefaultCapacity) {
    if (kind != StatisticsKind::monotone && kind != StatisticsKind::block_monotone)
        throw kind_order_mismatch("annihilation operators are defined for the strict kinds");
    if (mode >= mode_cutoff)
        throw std::invalid_argument("mode must lie below mode_cutoff");
    const auto domain = enumerate_basis(order, kind, n_particles, mode_cutoff, capacity);
    if (n_particles == 0) return OperatorMatrix(0, domain.size());
    const auto codomain = enumerate_basis(order, kind, n_particles - 1, mode_cutoff, capacity);
    OperatorMatrix a(codomain.size(), domain.size());
    for (std::size_t c = 0; c < domain.size(); ++c) {
        if (domain[c].modes.front() != mode) continue;
        BasisState image;
        image.modes.assign(domain[c].modes.begin() + 1, domain[c].modes.end());
        a.set(c, detail::index_of(codomain, image));
    }
    return a;
}

/// Deviations of the defining operator identities, measured separately on
/// the interior subspace (states whose modes all lie below
/// mode_cutoff - n_max, where truncation cannot interfere) and on the rest.
struct RelationReport {
    double creation_pair_dev = 0.0;      // a_i† a_j† = 0 for i >= j
    double annihilation_pair_dev = 0.0;  // a_j a_i = 0 for i >= j
    double mixed_dev = 0.0;              // a_i a_j† = 0 for i != j
    double commutation_dev = 0.0;        // a_i a_i† = 1 - sum_{k<=i} a_k† a_k
    double adjoint_dev = 0.0;            // a_i† is the transpose of a_i
    double boundary_dev = 0.0;           // worst deviation on non-interior columns
    bool interior_exact = false;

    [[nodiscard]] double max_interior_dev() const {
        return std::max({creation_pair_dev, annihilation_pair_dev, mixed_dev,
                         commutation_dev, adjoint_dev});
    }
};

/// Checks the monotone operator algebra on truncated bases.
inline RelationReport verify_relations(const ModeOrder& order, StatisticsKind kind,
                                       std::size_t mode_cutoff, std::size_t n_max,
                                       std::uint64_t capacity = kDefaultCapacity) {
    if (kind != StatisticsKind::monotone)
        throw kind_order_mismatch("verify_relations requires the monotone kind");
    detail::require_total_order(kind, order);
    if (mode_cutoff < 2) throw std::invalid_argument("mode_cutoff must be >= 2");
    if (mode_cutoff > order.num_modes())
        throw std::invalid_argument("mode_cutoff exceeds the number of modes");

    // Bases for n = 0 .. n_max+2 (pair products climb two levels).
    std::vector<std::vector<BasisState>> basis;
    for (std::size_t n = 0; n <= n_max + 2; ++n)
        basis.push_back(enumerate_basis(order, kind, n, mode_cutoff, capacity));

    const std::size_t interior_limit =
        mode_cutoff > n_max ? mode_cutoff - n_max : 0;
    auto interior = [&](const BasisState& s) {
        return std::all_of(s.modes.begin(), s.modes.end(),
                           [&](std::size_t m) { return m < interior_limit; });
    };

    // Dense products keep the bookkeeping obvious; dimensions are tiny.
    auto mul = [](const std::vector<double>& a, std::size_t ar, std::size_t ac,
                  const std::vector<double>& b, std::size_t br, std::size_t bc) {
        if (ac != br) throw std::logic_error("dimension mismatch");
        std::vector<double> out(ar * bc, 0.0);
        for (std::size_t i = 0; i < ar; ++i)
            for (std::size_t k = 0; k < ac; ++k) {
                const double v = a[i * ac + k];
                if (v == 0.0) continue;
                for (std::size_t j = 0; j < bc; ++j) out[i * bc + j] += v * b[k * bc + j];
            }
        return out;
    };

    RelationReport rep;
    auto record = [&](const std::vector<double>& m, std::size_t rows, std::size_t cols,
                      const std::vector<BasisState>& domain, double& family) {
        for (std::size_t c = 0; c < cols; ++c) {
            double dev = 0.0;
            for (std::size_t r = 0; r < rows; ++r)
                dev = std::max(dev, std::abs(m[r * cols + c]));
            if (interior(domain[c]))
                family = std::max(family, dev);
            else
                rep.boundary_dev = std::max(rep.boundary_dev, dev);
        }
    };

    for (std::size_t n = 0; n <= n_max; ++n) {
        const std::size_t dim = basis[n].size();
        const std::size_t d1 = basis[n + 1].size();
        const std::size_t d2 = basis[n + 2].size();
        const std::size_t d0 = n > 0 ? basis[n - 1].size() : 0;
        const std::size_t dm2 = n > 1 ? basis[n - 2].size() : 0;

        std::vector<std::vector<double>> create_n, create_n1, annih_n1, annih_n,
            create_down, annih_down;
        for (std::size_t i = 0; i < mode_cutoff; ++i) {
            create_n.push_back(creation(i, n, order, kind, mode_cutoff, capacity).dense());
            create_n1.push_back(creation(i, n + 1, order, kind, mode_cutoff, capacity).dense());
            annih_n1.push_back(annihilation(i, n + 1, order, kind, mode_cutoff, capacity).dense());
            annih_n.push_back(annihilation(i, n, order, kind, mode_cutoff, capacity).dense());
            if (n > 0)
                create_down.push_back(
                    creation(i, n - 1, order, kind, mode_cutoff, capacity).dense());
            if (n > 1)
                annih_down.push_back(
                    annihilation(i, n - 1, order, kind, mode_cutoff, capacity).dense());
        }

        for (std::size_t i = 0; i < mode_cutoff; ++i) {
            // Adjointness: creation(i, n) equals annihilation(i, n+1) transposed.
            double adev = 0.0;
            for (std::size_t r = 0; r < d1; ++r)
                for (std::size_t c = 0; c < dim; ++c)
                    adev = std::max(adev, std::abs(create_n[i][r * dim + c] -
                                                   annih_n1[i][c * d1 + r]));
            rep.adjoint_dev = std::max(rep.adjoint_dev, adev);

            for (std::size_t j = 0; j < mode_cutoff; ++j) {
                if (i >= j) {
                    // a_i† a_j† = 0
                    record(mul(create_n1[i], d2, d1, create_n[j], d1, dim), d2, dim,
                           basis[n], rep.creation_pair_dev);
                    // a_j a_i = 0
                    if (n > 1)
                        record(mul(annih_down[j], dm2, d0, annih_n[i], d0, dim), dm2, dim,
                               basis[n], rep.annihilation_pair_dev);
                } else {
                    // a_i a_j† = 0 (i != j; the i > j half is covered by the
                    // swapped iteration order)
                    record(mul(annih_n1[i], dim, d1, create_n[j], d1, dim), dim, dim,
                           basis[n], rep.mixed_dev);
                    record(mul(annih_n1[j], dim, d1, create_n[i], d1, dim), dim, dim,
                           basis[n], rep.mixed_dev);
                }
            }

            // a_i a_i† - (1 - sum_{k<=i} a_k† a_k) on the n-particle space;
            // the sum term vanishes on the vacuum.
            std::vector<double> lhs = mul(annih_n1[i], dim, d1, create_n[i], d1, dim);
            for (std::size_t r = 0; r < dim; ++r) lhs[r * dim + r] -= 1.0;
            if (n > 0)
                for (std::size_t k = 0; k <= i; ++k) {
                    const auto term = mul(create_down[k], dim, d0, annih_n[k], d0, dim);
                    for (std::size_t t = 0; t < dim * dim; ++t) lhs[t] += term[t];
                }
            record(lhs, dim, dim, basis[n], rep.commutation_dev);
        }
    }
    rep.interior_exact = rep.max_interior_dev() == 0.0;
    return rep;
}

/// One row per state: n, modes (semicolon-joined), energy.
inline void write_basis_csv(std::ostream& os, const std::vector<BasisState>& states,
                            const Spectrum& s, const ModeOrder& order) {
    const std::vector<double> energy = detail::mode_energies(s, order);
    os << "n,modes,energy\n";
    for (const auto& st : states) {
        std::string joined;
        for (std::size_t i = 0; i < st.modes.size(); ++i) {
            if (i) joined += ';';
            joined += std::to_string(st.modes[i]);
        }
        CompensatedSum e;
        for (std::size_t m : st.modes) e.add(energy.at(m));
        csv_row(os, st.particles(), joined, e.value());
    }
}

} // namespace monostat
