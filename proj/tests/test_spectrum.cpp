#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "monostat/spectrum.hpp"
#include "monostat/spectrum_io.hpp"

using namespace monostat;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
constexpr double kLn2 = 0.69314718055994530942;
constexpr double kSqrt2 = 1.41421356237309504880;
} // namespace

TEST_CASE("harmonic spectrum lists hbar_omega*(n+1/2) without degeneracy") {
    const Spectrum s = harmonic_spectrum(1.0, 3);
    REQUIRE(s.num_levels() == 3);
    CHECK(s.levels()[0].energy == 0.5);
    CHECK(s.levels()[1].energy == 1.5);
    CHECK(s.levels()[2].energy == 2.5);
    for (const auto& lv : s.levels()) CHECK(lv.degeneracy == 1);

    const Spectrum single = harmonic_spectrum(2.0, 1);
    REQUIRE(single.num_levels() == 1);
    CHECK(single.levels()[0].energy == 1.0);

    CHECK_THROWS_AS(harmonic_spectrum(0.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(harmonic_spectrum(1.0, 0), std::invalid_argument);
}

TEST_CASE("harmonic spectrum stays strictly increasing at large sizes") {
    const Spectrum s = harmonic_spectrum(1.0, 1'000'000);
    double prev = -1.0;
    for (const auto& lv : s.levels()) {
        CHECK(lv.energy > prev);
        prev = lv.energy;
    }
}

TEST_CASE("isotropic oscillator degeneracies") {
    const Spectrum d3 = iso_oscillator_spectrum(3, 1.0, 3);
    CHECK(d3.levels()[0].degeneracy == 1);
    CHECK(d3.levels()[1].degeneracy == 3);
    CHECK(d3.levels()[2].degeneracy == 6);
    CHECK(d3.levels()[0].energy == 1.5);

    const Spectrum d2 = iso_oscillator_spectrum(2, 1.0, 2);
    CHECK(d2.levels()[0].degeneracy == 1);
    CHECK(d2.levels()[1].degeneracy == 2);

    const Spectrum d1 = iso_oscillator_spectrum(1, 1.0, 12);
    for (const auto& lv : d1.levels()) CHECK(lv.degeneracy == 1);

    SECTION("matches binomials for several dimensions") {
        for (std::uint32_t d = 2; d <= 6; ++d) {
            const Spectrum s = iso_oscillator_spectrum(d, 0.7, 30);
            for (std::uint64_t n = 0; n < 30; ++n)
                CHECK(s.levels()[n].degeneracy == binomial_checked(d + n - 1, n));
        }
    }

    SECTION("overflow raises instead of wrapping") {
        CHECK_THROWS_AS(iso_oscillator_spectrum(50, 1.0, 60), degeneracy_overflow);
    }
}

TEST_CASE("partition function of a complete single level") {
    const Spectrum s = Spectrum::complete({{0.0, 1}});
    for (double beta : {0.1, 1.0, 7.5}) {
        const PartitionValue pf = partition_function(s, beta);
        CHECK(pf.value == 1.0);
        CHECK(pf.tail_bound == 0.0);
        CHECK(pf.certified);
    }
    CHECK_THROWS_AS(partition_function(s, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(partition_function(s, -1.0), std::invalid_argument);
}

TEST_CASE("truncated harmonic partition sums approach the closed form") {
    const double closed = zeta_ho_closed(kLn2);
    CHECK_THAT(closed, WithinRel(kSqrt2, 1e-15));
    for (std::uint64_t m : {1, 2, 5, 10, 20, 40}) {
        const PartitionValue pf = partition_function(harmonic_spectrum(1.0, m), kLn2);
        REQUIRE(pf.certified);
        // The geometric tail is exact for this spectrum, so the bound equals
        // the missing remainder up to roundoff.
        const double expected_tail = std::exp(-kLn2 / 2.0) * std::pow(2.0, -double(m)) * 2.0;
        CHECK_THAT(pf.tail_bound, WithinRel(expected_tail, 1e-12));
        CHECK(std::abs(pf.value - closed) <= pf.tail_bound + 16 * 1e-16 * closed);
        CHECK(pf.value < closed);
    }
}

TEST_CASE("partition function decreases in beta") {
    const Spectrum s = iso_oscillator_spectrum(3, 1.0, 20);
    double prev = std::numeric_limits<double>::infinity();
    for (double beta = 0.2; beta < 4.0; beta += 0.3) {
        const double v = partition_function(s, beta).value;
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("zeta_ho_closed branches") {
    CHECK_THAT(zeta_ho_closed(kLn2), WithinRel(kSqrt2, 1e-15));
    CHECK_THROWS_AS(zeta_ho_closed(0.0), std::invalid_argument);
    CHECK_THROWS_AS(zeta_ho_closed(-1.0), std::invalid_argument);

    SECTION("series branch near zero") {
        const double u = 1e-10;
        const double v = zeta_ho_closed(u);
        CHECK(std::isfinite(v));
        CHECK_THAT(v, WithinRel(1.0 / u, 1e-12));
    }
    SECTION("continuity across the branch point") {
        const double lo = zeta_ho_closed(0.99e-8);
        const double hi = zeta_ho_closed(1.01e-8);
        CHECK_THAT(lo / hi, WithinRel(1.01 / 0.99, 1e-8));
    }
    SECTION("monotone decreasing") {
        double prev = std::numeric_limits<double>::infinity();
        for (double u = 0.05; u < 40.0; u *= 1.7) {
            CHECK(zeta_ho_closed(u) < prev);
            prev = zeta_ho_closed(u);
        }
    }
    SECTION("large-u asymptote e^{-u/2}") {
        CHECK_THAT(zeta_ho_closed(40.0), WithinRel(std::exp(-20.0), 1e-12));
    }
}

TEST_CASE("uncertified spectra are flagged") {
    const Spectrum s = Spectrum::uncertified({{0.2, 1}, {0.9, 2}});
    const PartitionValue pf = partition_function(s, 1.0);
    CHECK_FALSE(pf.certified);
    CHECK(std::isnan(pf.tail_bound));
    CHECK(pf.value > 0.0);
}

TEST_CASE("spectrum validation") {
    CHECK_THROWS_AS(Spectrum::complete({{1.0, 1}, {1.0, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(Spectrum::complete({{2.0, 1}, {1.0, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(Spectrum::complete({{-0.5, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(Spectrum::complete({{0.5, 0}}), std::invalid_argument);
    GeometricTail bad;
    bad.first_energy = 0.5;  // below the last retained energy
    bad.energy_gap = 1.0;
    CHECK_THROWS_AS(Spectrum::truncated({{1.0, 1}}, bad), std::invalid_argument);
}

TEST_CASE("thermo point and fugacity") {
    CHECK_THROWS_AS(ThermoPoint(0.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(ThermoPoint(1.0, -0.1), std::invalid_argument);
    CHECK_THAT(fugacity_from_mu(2.0, -0.5), WithinRel(std::exp(-1.0), 1e-15));
    CHECK(fugacity_from_mu(1.0, 0.0) == 1.0);
}

TEST_CASE("spectrum JSON ingestion") {
    SECTION("well-formed document with a geometric tail") {
        const Spectrum s = spectrum_from_json(
            R"({"levels":[{"energy":0.5,"degeneracy":1},{"energy":1.5,"degeneracy":2}],
                "tail":{"ratio_energy":1.0}})");
        REQUIRE(s.num_levels() == 2);
        CHECK(s.tail_kind() == TailKind::geometric);
        CHECK(s.tail().first_energy == 2.5);
        CHECK(s.levels()[1].degeneracy == 2);
    }
    SECTION("null tail is uncertified") {
        const Spectrum s = spectrum_from_json(
            R"({"levels":[{"energy":0.0,"degeneracy":1}],"tail":null})");
        CHECK(s.tail_kind() == TailKind::unknown);
    }
    SECTION("complete marker") {
        const Spectrum s = spectrum_from_json(
            R"({"levels":[{"energy":0.0,"degeneracy":1}],"tail":{"complete":true}})");
        CHECK(s.tail_kind() == TailKind::complete);
    }
    SECTION("violations carry the field path") {
        try {
            spectrum_from_json(
                R"({"levels":[{"energy":1.0,"degeneracy":1},{"energy":0.5,"degeneracy":1}]})");
            FAIL("expected spectrum_parse_error");
        } catch (const spectrum_parse_error& e) {
            CHECK(e.field == "levels[1].energy");
        }
        try {
            spectrum_from_json(R"({"levels":[{"energy":1.0}]})");
            FAIL("expected spectrum_parse_error");
        } catch (const spectrum_parse_error& e) {
            CHECK(e.field == "levels[0].degeneracy");
        }
        CHECK_THROWS_AS(spectrum_from_json("not json"), spectrum_parse_error);
        CHECK_THROWS_AS(spectrum_from_json(R"({"levels":[]})"), spectrum_parse_error);
        CHECK_THROWS_AS(
            spectrum_from_json(
                R"({"levels":[{"energy":1.0,"degeneracy":1}],"tail":{"ratio_energy":-1}})"),
            spectrum_parse_error);
    }
}
