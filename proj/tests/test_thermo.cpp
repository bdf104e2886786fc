#include "doctest.h"

#include "rflow/error.hpp"
#include "rflow/thermo.hpp"
#include "species_data.hpp"

#include <cmath>
#include <random>

using namespace rflow;

namespace {

std::vector<SpeciesDef> griSet() {
    return {testdata::H2(), testdata::O2(), testdata::H2O(), testdata::N2(), testdata::OH(), testdata::H(), testdata::O()};
}

std::vector<double> randomY(std::mt19937_64& rng, std::size_t n) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> y(n);
    double s = 0.0;
    for (double& v : y) s += (v = e(rng));
    for (double& v : y) v /= s;
    return y;
}

} // namespace

TEST_CASE("polynomial evaluation") {
    SpeciesDef c = testdata::constantCp("C", 10.0, 3.5, 0.0);
    for (double T : {300.0, 1234.0, 3000.0}) CHECK(cpR(c.thermo, T) == doctest::Approx(3.5));
    Nasa7 only6;
    only6.low = {0, 0, 0, 0, 0, 1234.0, 0};
    only6.high = only6.low;
    CHECK(hRT(only6, 617.0) == doctest::Approx(2.0));

    ThermoDiagnostics d;
    double inRange = cpR(testdata::O2().thermo, 3500.0);
    CHECK(cpR(testdata::O2().thermo, 5000.0, &d) == inRange);
    CHECK(d.clampedEvaluations == 1);
}

TEST_CASE("fits are continuous at the common temperature") {
    for (const SpeciesDef& s : griSet()) {
        CAPTURE(s.name);
        const auto& t = s.thermo;
        auto eval = [&](const std::array<double, 7>& a, double T) {
            Nasa7 one = t;
            one.low = a;
            one.high = a;
            return std::array<double, 3>{cpR(one, T), hRT(one, T), sR(one, T)};
        };
        auto lo = eval(t.low, t.Tcommon), hi = eval(t.high, t.Tcommon);
        for (int q = 0; q < 3; ++q) CHECK(std::abs(lo[q] - hi[q]) <= 1e-3 * std::max(1.0, std::abs(lo[q])));
    }
}

TEST_CASE("cp, h and s are mutually consistent") {
    const double dT = 1e-3;
    for (const SpeciesDef& s : griSet()) {
        CAPTURE(s.name);
        for (double T = 300.0; T <= 2500.0; T += 37.0) {
            if (std::abs(T - s.thermo.Tcommon) < 2 * dT || T - dT < s.thermo.Tlow) continue;
            double h1 = hRT(s.thermo, T + dT) * (T + dT), h0 = hRT(s.thermo, T - dT) * (T - dT);
            double cp = cpR(s.thermo, T);
            CHECK(std::abs((h1 - h0) / (2 * dT) - cp) <= 1e-6 * cp);
            double ds = (sR(s.thermo, T + dT) - sR(s.thermo, T - dT)) / (2 * dT);
            CHECK(std::abs(ds - cp / T) <= 1e-6 * cp / T);
        }
    }
    Mixture mix(griSet());
    std::mt19937_64 rng(1);
    auto Y = randomY(rng, mix.nSpecies());
    for (double T = 310.0; T <= 2500.0; T += 55.0) {
        double fd = (mix.h(T + dT, Y) - mix.h(T - dT, Y)) / (2 * dT);
        CHECK(std::abs(fd - mix.cp(T, Y)) <= 1e-6 * mix.cp(T, Y));
    }
}

TEST_CASE("mixture rules") {
    Mixture single({testdata::N2()});
    std::vector<double> one{1.0};
    CHECK(single.cp(800.0, one) == doctest::Approx(kRu * cpR(testdata::N2().thermo, 800.0) / 28.0134));
    CHECK(single.meanW(one) == doctest::Approx(28.0134));

    // Equimolar W = 2 and W = 28: harmonic mass-fraction rule vs mole fractions.
    Mixture two({testdata::constantCp("L", 2.0, 2.5, 0.0), testdata::constantCp("M", 28.0, 3.5, 0.0)});
    std::vector<double> Y{2.0 / 30.0, 28.0 / 30.0};
    CHECK(two.meanW(Y) == doctest::Approx(0.5 * 2.0 + 0.5 * 28.0).epsilon(1e-14));

    std::mt19937_64 rng(4);
    Mixture mix(griSet());
    for (int i = 0; i < 20; ++i) {
        auto Ya = randomY(rng, mix.nSpecies());
        double T = 400.0 + 100.0 * i, p = 1e5 * (1 + i);
        CHECK(mix.density(p, T, Ya) * kRu * T / (p * mix.meanW(Ya)) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(mix.density(p, T, Ya) == doctest::Approx(mix.psi(T, Ya) * p).epsilon(1e-15));
        // h is affine in Y.
        auto Yb = randomY(rng, mix.nSpecies());
        double a = 0.3;
        std::vector<double> Yc(Ya.size());
        for (std::size_t k = 0; k < Yc.size(); ++k) Yc[k] = a * Ya[k] + (1 - a) * Yb[k];
        CHECK(mix.h(T, Yc) == doctest::Approx(a * mix.h(T, Ya) + (1 - a) * mix.h(T, Yb)).epsilon(1e-12));
    }

    std::vector<double> bad(mix.nSpecies(), 0.0);
    bad[0] = 0.9;
    CHECK_THROWS_AS(mix.checkY(bad), InvalidArgument);
    bad[0] = 1.0;
    CHECK_NOTHROW(mix.checkY(bad));
}

TEST_CASE("temperature from enthalpy") {
    Mixture mix(griSet());
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 5; ++trial) {
        auto Y = randomY(rng, mix.nSpecies());
        for (int i = 0; i < 50; ++i) {
            double T = 300.0 + 2200.0 * i / 49.0;
            double Tr = mix.TfromH(mix.h(T, Y), 1e5, Y, 1000.0);
            CHECK(std::abs(Tr - T) < 1e-6);
        }
        double far = mix.TfromH(mix.h(2400.0, Y), 1e5, Y, 300.0);
        CHECK(std::abs(far - 2400.0) < 1e-6);
    }

    Mixture cc({testdata::constantCp("C", 20.0, 3.5, -1000.0)});
    std::vector<double> one{1.0};
    auto r = cc.solveT(cc.h(1700.0, one), one, 400.0);
    CHECK(r.iterations == 1);
    CHECK(r.T == doctest::Approx(1700.0).epsilon(1e-14));

    std::vector<double> Y(mix.nSpecies(), 1.0 / double(mix.nSpecies()));
    CHECK_THROWS_AS(mix.TfromH(mix.h(mix.Tmax(), Y) + 1e6, 1e5, Y, 1000.0), InvalidArgument);
    CHECK_THROWS_AS(mix.TfromH(mix.h(mix.Tmin(), Y) - 1e6, 1e5, Y, 1000.0), InvalidArgument);
}

TEST_CASE("transport closures") {
    SpeciesDef s = testdata::N2();
    s.transport.As = 2e-6;
    s.transport.Ts = 0.0;
    Mixture zeroTs({s});
    std::vector<double> one{1.0};
    CHECK(zeroTs.viscosity(400.0, one) == doctest::Approx(2e-6 * 20.0));

    Mixture air({testdata::N2()});
    double ratio = air.viscosity(600.0, one) / air.viscosity(300.0, one);
    double hand = std::sqrt(2.0) * (1.0 + 110.4 / 300.0) / (1.0 + 110.4 / 600.0);
    CHECK(ratio == doctest::Approx(hand).epsilon(1e-14));

    double p = 101325.0, T = 900.0;
    CHECK(air.diffusivity(p, T, one, 0) ==
          doctest::Approx(air.conductivity(T, one) / (air.density(p, T, one) * air.cp(T, one))).epsilon(1e-14));
    CHECK(air.conductivity(T, one) == doctest::Approx(air.viscosity(T, one) * air.cp(T, one) / 0.71).epsilon(1e-14));
}

TEST_CASE("invalid species are rejected") {
    SpeciesDef s = testdata::N2();
    s.W = 0.0;
    CHECK_THROWS_AS(Mixture({s}), InvalidArgument);
    s = testdata::N2();
    s.thermo.Tcommon = 6000.0;
    CHECK_THROWS_AS(Mixture({s}), InvalidArgument);
    CHECK_THROWS_AS(Mixture({testdata::N2(), testdata::N2()}), InvalidArgument);
}
