#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "monostat/fock.hpp"

using namespace monostat;
using Catch::Matchers::WithinRel;

namespace {

// The two-level example: one doubly degenerate level h plus a simple level k.
const Spectrum kTwoLevel = Spectrum::complete({{0.4, 2}, {1.0, 1}});
const ModeOrder kTwoBlocks = ModeOrder::from_spectrum(kTwoLevel);

} // namespace

TEST_CASE("admissibility per statistics kind") {
    CHECK(admissible({{}}, StatisticsKind::monotone, ModeOrder::total_order(3)));
    CHECK(admissible({{}}, StatisticsKind::block_monotone, kTwoBlocks));
    CHECK(admissible({{}}, StatisticsKind::full_distinguishable, kTwoBlocks));

    // Modes 0 and 1 share a block: incomparable, so only the weak rule admits.
    CHECK_FALSE(admissible({{0, 1}}, StatisticsKind::block_monotone, kTwoBlocks));
    CHECK(admissible({{0, 1}}, StatisticsKind::block_weakly_monotone, kTwoBlocks));
    CHECK(admissible({{1, 0}}, StatisticsKind::block_weakly_monotone, kTwoBlocks));
    CHECK(admissible({{0, 2}}, StatisticsKind::block_monotone, kTwoBlocks));
    CHECK_FALSE(admissible({{2, 0}}, StatisticsKind::block_weakly_monotone, kTwoBlocks));

    const ModeOrder total = ModeOrder::total_order(5);
    CHECK(admissible({{0, 2, 4}}, StatisticsKind::monotone, total));
    CHECK_FALSE(admissible({{0, 2, 2}}, StatisticsKind::monotone, total));
    CHECK(admissible({{0, 2, 2}}, StatisticsKind::weakly_monotone_total, total));
    CHECK_FALSE(admissible({{2, 0}}, StatisticsKind::weakly_monotone_total, total));
    CHECK(admissible({{2, 0}}, StatisticsKind::full_distinguishable, total));

    SECTION("errors") {
        CHECK_THROWS_AS(admissible({{0, 1}}, StatisticsKind::monotone, kTwoBlocks),
                        kind_order_mismatch);
        CHECK_THROWS_AS(
            admissible({{0, 1}}, StatisticsKind::weakly_monotone_total, kTwoBlocks),
            kind_order_mismatch);
        CHECK_THROWS_AS(admissible({{7}}, StatisticsKind::monotone, ModeOrder::total_order(3)),
                        std::invalid_argument);
    }
}

TEST_CASE("basis enumeration") {
    const ModeOrder total3 = ModeOrder::total_order(3);
    const auto mono2 = enumerate_basis(total3, StatisticsKind::monotone, 2, 3);
    REQUIRE(mono2.size() == 3);
    CHECK(mono2[0].modes == std::vector<std::size_t>{0, 1});
    CHECK(mono2[1].modes == std::vector<std::size_t>{0, 2});
    CHECK(mono2[2].modes == std::vector<std::size_t>{1, 2});

    const auto bm2 = enumerate_basis(kTwoBlocks, StatisticsKind::block_monotone, 2, 3);
    REQUIRE(bm2.size() == 2);
    CHECK(bm2[0].modes == std::vector<std::size_t>{0, 2});
    CHECK(bm2[1].modes == std::vector<std::size_t>{1, 2});

    CHECK(enumerate_basis(total3, StatisticsKind::monotone, 4, 3).empty());
    CHECK(enumerate_basis(total3, StatisticsKind::monotone, 0, 3).size() == 1);

    SECTION("deterministic and lexicographic") {
        const auto again = enumerate_basis(total3, StatisticsKind::monotone, 2, 3);
        CHECK(again == mono2);
        const auto wm = enumerate_basis(total3, StatisticsKind::weakly_monotone_total, 3, 3);
        for (std::size_t i = 1; i < wm.size(); ++i) CHECK(wm[i - 1].modes < wm[i].modes);
    }

    SECTION("capacity error reports the count") {
        try {
            enumerate_basis(ModeOrder::total_order(40), StatisticsKind::monotone, 4, 40, 100);
            FAIL("expected capacity_error");
        } catch (const capacity_error& e) {
            CHECK(e.requested == binomial_checked(40, 4));
        }
    }

    SECTION("cutoff above the mode count is rejected") {
        CHECK_THROWS_AS(enumerate_basis(total3, StatisticsKind::monotone, 1, 4),
                        std::invalid_argument);
    }
}

TEST_CASE("counting identities match direct enumeration") {
    for (std::size_t m = 1; m <= 7; ++m) {
        const ModeOrder total = ModeOrder::total_order(m);
        for (std::size_t n = 0; n <= 5; ++n) {
            CHECK(count_basis(total, StatisticsKind::monotone, n, m) ==
                  binomial_checked(m, n));
            CHECK(count_basis(total, StatisticsKind::weakly_monotone_total, n, m) ==
                  binomial_checked(m + n - (n ? 1 : 0), n));
            std::uint64_t pw = 1;
            for (std::size_t i = 0; i < n; ++i) pw *= m;
            CHECK(count_basis(total, StatisticsKind::full_distinguishable, n, m) == pw);
        }
    }
    const std::vector<std::vector<std::uint64_t>> shapes = {{2, 1}, {1, 2, 3}, {3, 3}, {4}};
    for (const auto& sizes : shapes) {
        const ModeOrder order = ModeOrder::from_block_sizes(sizes);
        const std::size_t m = order.num_modes();
        for (StatisticsKind kind : {StatisticsKind::block_monotone,
                                    StatisticsKind::block_weakly_monotone,
                                    StatisticsKind::full_distinguishable}) {
            for (std::size_t n = 0; n <= 4; ++n)
                CHECK(count_basis(order, kind, n, m) ==
                      enumerate_basis(order, kind, n, m).size());
        }
    }
}

TEST_CASE("singleton blocks reduce block-monotone to monotone") {
    const ModeOrder total = ModeOrder::total_order(5);
    for (std::size_t n = 0; n <= 4; ++n) {
        CHECK(enumerate_basis(total, StatisticsKind::block_monotone, n, 5) ==
              enumerate_basis(total, StatisticsKind::monotone, n, 5));
        CHECK(enumerate_basis(total, StatisticsKind::block_weakly_monotone, n, 5) ==
              enumerate_basis(total, StatisticsKind::weakly_monotone_total, n, 5));
    }
}

TEST_CASE("state energies are additive") {
    CHECK(state_energy({{}}, kTwoLevel, kTwoBlocks) == 0.0);
    CHECK_THAT(state_energy({{0, 2}}, kTwoLevel, kTwoBlocks), WithinRel(1.4, 1e-15));
    CHECK_THAT(state_energy({{0, 1, 2}}, kTwoLevel, kTwoBlocks), WithinRel(1.8, 1e-15));

    SECTION("alignment errors") {
        CHECK_THROWS_AS(state_energy({{0}}, kTwoLevel, ModeOrder::total_order(2)),
                        alignment_error);
        CHECK_THROWS_AS(state_energy({{0}}, kTwoLevel, ModeOrder::from_block_sizes({3})),
                        alignment_error);
        // A refinement of the level grouping is fine.
        CHECK(state_energy({{2}}, kTwoLevel, ModeOrder::total_order(3)) == 1.0);
    }
}

TEST_CASE("creation and annihilation act by prepending and stripping") {
    const ModeOrder total = ModeOrder::total_order(6);
    const auto basis1 = enumerate_basis(total, StatisticsKind::monotone, 1, 6);
    const auto basis2 = enumerate_basis(total, StatisticsKind::monotone, 2, 6);
    const auto basis3 = enumerate_basis(total, StatisticsKind::monotone, 3, 6);
    const auto idx = [](const std::vector<BasisState>& basis, std::vector<std::size_t> m) {
        for (std::size_t i = 0; i < basis.size(); ++i)
            if (basis[i].modes == m) return i;
        FAIL("state not found");
        return std::size_t{0};
    };

    const OperatorMatrix a0_vac = creation(0, 0, total, StatisticsKind::monotone, 6);
    CHECK(a0_vac.row_of(0) == idx(basis1, {0}));

    const OperatorMatrix a0 = creation(0, 2, total, StatisticsKind::monotone, 6);
    CHECK(a0.row_of(idx(basis2, {1, 4})) == idx(basis3, {0, 1, 4}));

    const OperatorMatrix a2 = creation(2, 2, total, StatisticsKind::monotone, 6);
    CHECK(a2.row_of(idx(basis2, {1, 4})) == OperatorMatrix::npos);

    const OperatorMatrix k1 = annihilation(1, 2, total, StatisticsKind::monotone, 6);
    CHECK(k1.row_of(idx(basis2, {1, 4})) == idx(basis1, {4}));

    const OperatorMatrix k4 = annihilation(4, 2, total, StatisticsKind::monotone, 6);
    CHECK(k4.row_of(idx(basis2, {1, 4})) == OperatorMatrix::npos);

    const OperatorMatrix on_vacuum = annihilation(3, 0, total, StatisticsKind::monotone, 6);
    CHECK(on_vacuum.rows() == 0);
    CHECK(on_vacuum.is_zero());
}

TEST_CASE("creation and annihilation are mutual transposes with unit norm") {
    const ModeOrder total = ModeOrder::total_order(6);
    for (std::size_t n = 0; n <= 3; ++n) {
        const std::size_t dim = enumerate_basis(total, StatisticsKind::monotone, n, 6).size();
        const std::size_t dim1 =
            enumerate_basis(total, StatisticsKind::monotone, n + 1, 6).size();
        for (std::size_t i = 0; i < 6; ++i) {
            const auto c = creation(i, n, total, StatisticsKind::monotone, 6).dense();
            const auto a = annihilation(i, n + 1, total, StatisticsKind::monotone, 6).dense();
            for (std::size_t r = 0; r < dim1; ++r)
                for (std::size_t col = 0; col < dim; ++col)
                    CHECK(c[r * dim + col] == a[col * dim1 + r]);
            // Norm 1 whenever nonzero: columns carry at most a single 1.
            const OperatorMatrix op = creation(i, n, total, StatisticsKind::monotone, 6);
            if (!op.is_zero()) {
                double max_col = 0.0;
                for (std::size_t col = 0; col < op.cols(); ++col)
                    if (op.row_of(col) != OperatorMatrix::npos) max_col = 1.0;
                CHECK(max_col == 1.0);
            }
        }
    }
}

TEST_CASE("block-monotone creators follow the partial order") {
    const OperatorMatrix up = creation(0, 1, kTwoBlocks, StatisticsKind::block_monotone, 3);
    const auto basis1 = enumerate_basis(kTwoBlocks, StatisticsKind::block_monotone, 1, 3);
    const auto basis2 = enumerate_basis(kTwoBlocks, StatisticsKind::block_monotone, 2, 3);
    // e_0 can only precede the lone mode of the second block.
    for (std::size_t c = 0; c < basis1.size(); ++c) {
        if (basis1[c].modes == std::vector<std::size_t>{2})
            CHECK(up.row_of(c) != OperatorMatrix::npos);
        else
            CHECK(up.row_of(c) == OperatorMatrix::npos);
    }
    CHECK(basis2.size() == 2);
}

TEST_CASE("operator relations hold exactly on the interior") {
    const RelationReport rep =
        verify_relations(ModeOrder::total_order(6), StatisticsKind::monotone, 6, 3);
    CHECK(rep.creation_pair_dev == 0.0);
    CHECK(rep.annihilation_pair_dev == 0.0);
    CHECK(rep.mixed_dev == 0.0);
    CHECK(rep.commutation_dev == 0.0);
    CHECK(rep.adjoint_dev == 0.0);
    CHECK(rep.interior_exact);

    CHECK_THROWS_AS(verify_relations(kTwoBlocks, StatisticsKind::block_monotone, 3, 2),
                    kind_order_mismatch);
    CHECK_THROWS_AS(verify_relations(ModeOrder::total_order(6), StatisticsKind::monotone, 1, 1),
                    std::invalid_argument);
}

TEST_CASE("basis CSV dump") {
    const auto states = enumerate_basis(kTwoBlocks, StatisticsKind::block_monotone, 2, 3);
    std::ostringstream os;
    write_basis_csv(os, states, kTwoLevel, kTwoBlocks);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "n,modes,energy");
    std::getline(in, line);
    CHECK(line == "2,0;2,1.3999999999999999");
    std::getline(in, line);
    CHECK(line == "2,1;2,1.3999999999999999");
}
