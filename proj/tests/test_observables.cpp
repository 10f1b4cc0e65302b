#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "monostat/observables.hpp"

using namespace monostat;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
constexpr double kLn2 = 0.69314718055994530942;
constexpr double kSqrt2 = 1.41421356237309504880;
} // namespace

TEST_CASE("average number from a truncated series") {
    SECTION("vacuum only at z = 0") {
        const AvgNumber n = avg_number_series(z_monotone_ho(kLn2, 0.0, 4), 0.0);
        CHECK(n.value == 0.0);
        CHECK(n.lo == 0.0);
        CHECK(n.hi >= 0.0);
    }
    SECTION("frozen monotone value") {
        const AvgNumber n = avg_number_series(z_monotone_ho(kLn2, 0.1, 6), 0.1);
        CHECK_THAT(n.value, WithinRel(0.13513379005161685, 1e-12));
        CHECK(n.lo <= n.value);
        CHECK(n.value <= n.hi);
    }
    SECTION("Boltzmann series differentiates to zeta*z") {
        const Spectrum s = harmonic_spectrum(1.0, 400);
        for (double u : {0.3, kLn2, 2.0})
            for (double z : {0.05, 0.4, 1.5}) {
                const double zeta = zeta_ho_closed(u);
                const std::size_t n_max = default_n_max(zeta * z);
                const SeriesResult r =
                    boltzmann_corrected_from_enumeration(s, u, z, n_max, 400);
                CompensatedSum zeta_trunc;
                for (const auto& lv : s.levels()) zeta_trunc.add(std::exp(-u * lv.energy));
                const double expected = avg_number_boltzmann(zeta_trunc.value(), z);
                CHECK_THAT(avg_number_series(r, z).value, WithinAbs(expected, 1e-10));
            }
    }
    CHECK_THROWS_AS(avg_number_series(z_monotone_ho(kLn2, 0.1, 4), -1.0),
                    std::invalid_argument);
}

TEST_CASE("closed Boltzmann number") {
    CHECK(avg_number_boltzmann(2.2, 0.0) == 0.0);
    CHECK_THAT(avg_number_boltzmann(kSqrt2, 0.1), WithinRel(0.14142135623730951, 1e-15));
    CHECK_THROWS_AS(avg_number_boltzmann(-1.0, 0.1), std::invalid_argument);
}

TEST_CASE("low-density approximation for the oscillator") {
    CHECK(avg_number_monotone_approx(kLn2, 0.0) == 0.0);
    CHECK_THAT(avg_number_monotone_approx(kLn2, 0.2), WithinRel(0.2420263859440068, 1e-12));

    SECTION("outside the validity region") {
        CHECK_THROWS_AS(avg_number_monotone_approx(0.01, 1.0), outside_validity);
    }
    SECTION("correction is negative and within 10% of the series for small z") {
        for (double u : {0.5, 0.8, 1.0})
            for (double z : {0.05, 0.1, 0.2}) {
                const double approx = avg_number_monotone_approx(u, z);
                const double n0 = avg_number_boltzmann(zeta_ho_closed(u), z);
                CHECK(approx < n0);
                const double exact = avg_number_series(z_monotone_ho(u, z), z).value;
                CHECK(std::abs(approx - exact) <= 0.10 * exact);
            }
    }
}

TEST_CASE("number grows with activity") {
    for (double u : {0.5, 1.5}) {
        double prev = -1.0;
        for (double z = 0.0; z < 1.01; z += 0.1) {
            const double n = avg_number_series(z_monotone_ho(u, z), z).value;
            CHECK(n > prev);
            prev = n;
        }
    }
}

TEST_CASE("monotone number stays below the Boltzmann number in region R") {
    for (double u : {0.5, 1.0, 2.0, 4.0})
        for (double z : {0.05, 0.2, 0.5}) {
            const AvgNumber n = avg_number_series(z_monotone_ho(u, z), z);
            const double n0 = avg_number_boltzmann(zeta_ho_closed(u), z);
            CHECK(n.value <= n0 + (n.hi - n.value));
        }
}

TEST_CASE("comparison table") {
    const Spectrum s = Spectrum::complete({{0.4, 2}, {1.0, 1}});
    const ModeOrder order = ModeOrder::from_spectrum(s);
    std::vector<ThermoPoint> grid;
    for (double beta : {0.5, 1.0})
        for (double z : {0.0, 0.3, 0.8}) grid.emplace_back(beta, z);

    const std::vector<StatisticsKind> kinds = {StatisticsKind::block_monotone,
                                               StatisticsKind::block_weakly_monotone};
    const auto rows = compare_statistics(s, order, kinds, grid, 8, 3);
    REQUIRE(rows.size() == grid.size() * 3);

    SECTION("z = 0 rows are the bare vacuum") {
        for (const auto& row : rows)
            if (row.z == 0.0) {
                CHECK(row.partition == 1.0);
                CHECK(row.number == 0.0);
            }
    }
    SECTION("deterministic ordering and repeatability") {
        const auto again = compare_statistics(s, order, kinds, grid, 8, 3);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            CHECK(rows[i].kind == again[i].kind);
            CHECK(rows[i].partition == again[i].partition);
            CHECK(rows[i].number == again[i].number);
        }
        CHECK(rows[0].kind == "boltzmann");
        CHECK(rows[1].kind == "block-monotone");
        CHECK(rows[2].kind == "block-weakly-monotone");
    }
    SECTION("monotone kinds never exceed the Boltzmann partition value") {
        for (std::size_t p = 0; p < grid.size(); ++p) {
            const auto& boltzmann = rows[3 * p];
            const auto& bm = rows[3 * p + 1];
            CHECK(bm.partition <=
                  boltzmann.partition + boltzmann.partition_err + 1e-13);
        }
    }
    SECTION("block series caps the particle number at the block count") {
        for (const auto& row : rows)
            if (row.kind == "block-monotone") CHECK(row.number <= 2.0 + 1e-12);
    }
    SECTION("CSV layout") {
        std::ostringstream os;
        write_observables_csv(os, rows);
        std::istringstream in(os.str());
        std::string line;
        std::getline(in, line);
        CHECK(line == "u,z,kind,Z,Z_err,N,N_err");
        std::size_t count = 0;
        while (std::getline(in, line)) ++count;
        CHECK(count == rows.size());
    }
}
