#include "doctest.h"

#include "mechanisms.hpp"
#include "oracles.hpp"
#include "rflow/chemistry.hpp"
#include "rflow/error.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace rflow;

namespace {

std::vector<double> dirichlet(std::mt19937_64& rng, std::size_t n) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> y(n);
    double s = 0.0;
    for (double& v : y) s += (v = e(rng));
    for (double& v : y) v /= s;
    return y;
}

// RK4 on the (Y, T) reactor system, independent of the integrator.
std::vector<double> rk4Reactor(const Mechanism& mech, double p, double T, const std::vector<double>& Y, double dt,
                               std::size_t steps) {
    const std::size_t n = Y.size();
    std::vector<double> y(Y);
    y.push_back(T);
    auto f = [&](const std::vector<double>& s) {
        std::vector<double> d(n + 1);
        double dT = 0.0;
        reactorRhs(mech, p, s[n], std::span<const double>(s.data(), n), std::span<double>(d.data(), n), dT);
        d[n] = dT;
        return d;
    };
    return oracle::rk4(f, y, dt, steps);
}

} // namespace

TEST_CASE("arrhenius rates") {
    Reaction r = testdata::elementary({{0, 1}}, {{1, 1}}, 3.0, 0.0, 0.0);
    for (double T : {300.0, 1000.0, 2000.0}) CHECK(rateForward(r, T) == 3.0);
    r.beta = 0.5;
    r.Ea = kRu * 1000.0;
    CHECK(rateForward(r, 1000.0) / r.A == doctest::Approx(std::sqrt(1000.0) * std::exp(-1.0)).epsilon(1e-14));
    double prev = 0.0;
    for (double T = 300.0; T < 3000.0; T += 100.0) {
        CHECK(rateForward(r, T) > prev);
        prev = rateForward(r, T);
    }
}

TEST_CASE("equilibrium constants") {
    Mechanism eq = testdata::equilibriumToy();
    CHECK(equilibriumKc(eq.reactions()[0], eq.mixture(), 1000.0) == doctest::Approx(4.0).epsilon(1e-14));

    Mixture same({testdata::toySpecies("P", 10, 0, 0, {{"X", 1}}), testdata::toySpecies("Q", 10, 0, 0, {{"X", 1}})});
    Mechanism sym(same, {testdata::elementary({{0, 1}}, {{1, 1}}, 10.0, 0.0, 0.0, true)});
    CHECK(equilibriumKc(sym.reactions()[0], same, 1234.0) == doctest::Approx(1.0).epsilon(1e-14));
    std::vector<double> Y{0.5, 0.5}, w(2);
    productionRates(sym, 1e5, 1000.0, Y, w);
    CHECK(std::abs(w[0]) < 1e-15);

    // A <=> B relaxes to Y_B / Y_A = 4.
    std::vector<double> Yeq{0.7, 0.1, 0.2};
    double T = 1000.0;
    integrateCell(eq, 101325.0, T, Yeq, 1.0);
    CHECK(Yeq[0] == doctest::Approx(0.8 / 5.0).epsilon(1e-6));
    CHECK(Yeq[1] == doctest::Approx(0.8 * 4.0 / 5.0).epsilon(1e-6));
    CHECK(T == doctest::Approx(1000.0).epsilon(1e-12));
}

TEST_CASE("production rates") {
    Mechanism toy = testdata::toyAB();
    std::vector<double> noA{0.0, 0.4, 0.6}, w(3);
    productionRates(toy, 101325.0, 1200.0, noA, w);
    for (double v : w) CHECK(v == 0.0);

    // kf = 2, [A] = 3 kmol/m^3: choose rho so that rho Y_A / W_A = 3.
    Mixture one({testdata::toySpecies("A", 29, 0, 0, {{"X", 1}}), testdata::toySpecies("B", 29, 0, 0, {{"X", 1}})});
    Mechanism simple(one, {testdata::elementary({{0, 1}}, {{1, 1}}, 2.0, 0.0, 0.0)});
    const double T = 1000.0;
    const double p = 3.0 * kRu * T; // rho = p W / (Ru T) = 3 W, so [A] = 3 for Y_A = 1
    std::vector<double> Y{1.0, 0.0}, wd(2);
    productionRates(simple, p, T, Y, wd);
    CHECK(wd[0] == doctest::Approx(-6.0).epsilon(1e-14));
    CHECK(wd[1] == doctest::Approx(6.0).epsilon(1e-14));

    std::mt19937_64 rng(3);
    std::vector<Mechanism> mechs{testdata::toyAB(), testdata::stiffToy(), testdata::h2o2()};
    for (const Mechanism& m : mechs) {
        std::vector<double> wdot(m.nSpecies());
        for (int i = 0; i < 100; ++i) {
            auto Yr = dirichlet(rng, m.nSpecies());
            productionRates(m, 101325.0, 800.0 + 10.0 * i, Yr, wdot);
            double s = 0.0, scale = 0.0;
            for (std::size_t k = 0; k < m.nSpecies(); ++k) {
                s += wdot[k] * m.mixture().species(k).W;
                scale += std::abs(wdot[k] * m.mixture().species(k).W);
            }
            CHECK(std::abs(s) <= 1e-12 * std::max(scale, 1e-300));
        }
    }

    KineticsDiagnostics d;
    std::vector<double> neg{-1e-5, 0.5, 0.5 + 1e-5};
    productionRates(toy, 101325.0, 1200.0, neg, w, &d);
    CHECK(d.clippedConcentrations == 1);
    CHECK(w[0] == 0.0);
}

TEST_CASE("reactor right-hand side") {
    Mechanism toy = testdata::toyAB();
    std::vector<double> Y{0.3, 0.3, 0.4}, dY(3);
    double dT = 0.0;
    reactorRhs(toy, 101325.0, 1200.0, Y, dY, dT);
    CHECK(dT > 0.0);
    // d/dt (sum Y_k h_k) = sum h_k dY_k + cp dT/dt = 0.
    std::vector<double> hk(3);
    toy.mixture().speciesH(1200.0, hk);
    double dh = toy.mixture().cp(1200.0, Y) * dT, scale = std::abs(toy.mixture().cp(1200.0, Y) * dT);
    for (std::size_t k = 0; k < 3; ++k) dh += hk[k] * dY[k];
    CHECK(std::abs(dh) <= 1e-10 * scale);

    Mechanism eq = testdata::equilibriumToy();
    std::vector<double> Ye{0.16, 0.64, 0.2};
    reactorRhs(eq, 101325.0, 1000.0, Ye, dY, dT);
    for (double v : dY) CHECK(std::abs(v) < 1e-12);
    CHECK(std::abs(dT) < 1e-9);
}

TEST_CASE("integrator identity, decay and oracle agreement") {
    Mixture inertOnly({testdata::N2(), testdata::O2()});
    Mechanism none(inertOnly, {});
    std::vector<double> Y{0.7, 0.3};
    double T = 1500.0;
    integrateCell(none, 1e5, T, Y, 1e-3);
    CHECK(Y[0] == 0.7);
    CHECK(T == 1500.0);

    // Isothermal first-order decay: identical thermo for A and B.
    Mixture iso({testdata::toySpecies("A", 29, 0, 0, {{"X", 1}}), testdata::toySpecies("B", 29, 0, 0, {{"X", 1}})});
    Mechanism decay(iso, {testdata::elementary({{0, 1}}, {{1, 1}}, 500.0, 0.0, 0.0)});
    std::vector<double> Yd{0.9, 0.1};
    double Td = 1000.0;
    ChemStats st;
    integrateCell(decay, 101325.0, Td, Yd, 4e-3, {}, &st);
    double exact = 0.9 * std::exp(-500.0 * 4e-3);
    CHECK(std::abs(Yd[0] - exact) <= 1e-6 * exact + 1e-10);
    CHECK(st.substeps > 0);

    std::mt19937_64 rng(42);
    struct Case {
        Mechanism mech;
        double dt, Tlo, Thi;
    };
    std::vector<Case> cases{{testdata::toyAB(), 1e-5, 1000.0, 1500.0}, {testdata::stiffToy(), 1e-2, 900.0, 1500.0}};
    for (const Case& c : cases) {
        double worst = 0.0;
        for (int i = 0; i < 20; ++i) {
            std::uniform_real_distribution<double> uT(c.Tlo, c.Thi);
            double T0 = uT(rng);
            auto Y0 = dirichlet(rng, c.mech.nSpecies());
            auto ref = rk4Reactor(c.mech, 101325.0, T0, Y0, c.dt, 20000);
            std::vector<double> Yi = Y0;
            double Ti = T0;
            integrateCell(c.mech, 101325.0, Ti, Yi, c.dt);
            for (std::size_t k = 0; k < Yi.size(); ++k) worst = std::max(worst, std::abs(Yi[k] - ref[k]));
        }
        MESSAGE("worst |Y - Y_rk4| = " << worst);
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("conservation across integration") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Mechanism m = testdata::h2o2();
    auto check = [&](const std::vector<double>& Y0, double T0, double dt) {
        std::vector<double> Y = Y0;
        double T = T0;
        integrateCell(m, 101325.0, T, Y, dt);
        double s = 0.0;
        for (double v : Y) {
            CHECK(v >= 0.0);
            s += v;
        }
        CHECK(std::abs(s - 1.0) < 1e-8);
        auto e0 = m.elementMoles(Y0), e1 = m.elementMoles(Y);
        for (std::size_t e = 0; e < e0.size(); ++e) CHECK(std::abs(e1[e] - e0[e]) <= 1e-8 * std::max(e0[e], 1e-300));
        double h0 = m.mixture().h(T0, Y0), h1 = m.mixture().h(T, Y);
        CHECK(std::abs(h1 - h0) <= 1e-8 * std::abs(h0));
        CHECK(Y[6] == Y0[6]);
    };
    // Premixed H2/O2/N2 with trace radicals, through ignition.
    for (int i = 0; i < 8; ++i) {
        std::vector<double> Y0(m.nSpecies());
        Y0[0] = 0.02 + 0.04 * u(rng);
        Y0[1] = 0.15 + 0.1 * u(rng);
        Y0[2] = 0.1 * u(rng);
        for (int k = 3; k < 6; ++k) Y0[k] = 1e-3 * u(rng);
        double s = 0.0;
        for (int k = 0; k < 6; ++k) s += Y0[k];
        Y0[6] = 1.0 - s;
        check(Y0, 1100.0 + 100.0 * i, 2e-6);
    }
    // Arbitrary compositions over a short interval.
    for (int i = 0; i < 8; ++i) check(dirichlet(rng, m.nSpecies()), 1200.0 + 100.0 * i, 5e-8);
}

TEST_CASE("mechanism validation") {
    Mixture mix({testdata::H2(), testdata::O2(), testdata::H2O()});
    // H2 + O2 => H2O loses one O atom.
    CHECK_THROWS_AS(Mechanism(mix, {testdata::elementary({{0, 1}, {1, 1}}, {{2, 1}}, 1.0, 0, 0)}), InvalidArgument);
    CHECK_NOTHROW(Mechanism(mix, {testdata::elementary({{0, 2}, {1, 1}}, {{2, 2}}, 1.0, 0, 0)}));
    CHECK_THROWS_AS(Mechanism(mix, {testdata::elementary({{0, 2}, {1, 1}}, {{2, 2}}, 0.0, 0, 0)}), InvalidArgument);
    CHECK_THROWS_AS(Mechanism(mix, {testdata::elementary({{0, 2}, {1, 1}}, {{2, 2}}, 1.0, 0, 0)}, {0}), InvalidArgument);
}

TEST_CASE("field integration") {
    Mesh mesh = buildCartesianMesh({3, 2, 2}, {1, 1, 1}, PatchSpec::allPeriodic());
    Mechanism m = testdata::toyAB();
    CellField T(mesh, 1, "T", 1250.0), Y(mesh, 3, "Y");
    for (std::size_t c = 0; c < mesh.nCells(); ++c) {
        Y(0, c) = 0.5;
        Y(1, c) = 0.1;
        Y(2, c) = 0.4;
    }
    integrateField(m, 101325.0, T, Y, 2e-5);
    for (std::size_t c = 1; c < mesh.nCells(); ++c) {
        CHECK(T.data[c] == T.data[0]);
        CHECK(Y(0, c) == Y(0, 0));
    }

    // Independent of visitation order / worker count.
    std::mt19937_64 rng(9);
    CellField T1(mesh, 1, "T"), Y1(mesh, 3, "Y");
    for (std::size_t c = 0; c < mesh.nCells(); ++c) {
        auto y = dirichlet(rng, 3);
        for (int k = 0; k < 3; ++k) Y1(k, c) = y[k];
        T1.data[c] = 1000.0 + 30.0 * double(c);
    }
    CellField T2 = T1, Y2 = Y1;
    integrateField(m, 101325.0, T1, Y1, 1e-5, {}, 1);
    integrateField(m, 101325.0, T2, Y2, 1e-5, {}, 3);
    CHECK(T1.data == T2.data);
    CHECK(Y1.data == Y2.data);
}

TEST_CASE("sample generation and table io") {
    Mechanism m = testdata::toyAB();
    SamplerConfig sc;
    sc.seed = 17;
    SampleTable t = generateSamples(m, sc, 1e-5, 25);
    REQUIRE(t.rows.size() == 25);
    CHECK(t.nColumns() == 2 + 2 * 3);
    for (const auto& row : t.rows) {
        CHECK(row.size() == t.nColumns());
        CHECK(row[0] >= sc.Tmin);
        CHECK(row[0] <= sc.Tmax);
        CHECK(row[1] == sc.p);
        CHECK(row[2 + 3 + 2] == 0.0); // inert rate
    }
    std::stringstream ss;
    writeSampleTable(ss, t);
    SampleTable back = readSampleTable(ss);
    CHECK(back.species == t.species);
    CHECK(back.rows == t.rows);

    // Re-integrating a recorded input reproduces its label bitwise.
    const auto& row = back.rows[7];
    std::vector<double> Y(row.begin() + 2, row.begin() + 5), Y0 = Y;
    double T = row[0];
    integrateCell(m, row[1], T, Y, 1e-5);
    for (int k = 0; k < 3; ++k) CHECK((Y[k] - Y0[k]) / 1e-5 == row[5 + k]);

    std::stringstream bad("T,p,Y_A,rate_B\n");
    CHECK_THROWS_AS(readSampleTable(bad), ParseError);
}
