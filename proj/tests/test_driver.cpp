#include "rflow/driver.hpp"
#include "rflow/error.hpp"

#include "mechanisms.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace rflow;
namespace fs = std::filesystem;

namespace {

const std::string kCases = RFLOW_CASES_DIR;

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path scratchDir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("rflow_test_driver_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string errorOf(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.what();
    }
    return "";
}

const char* kMiniMech = R"(
[units]
A = kmol-m3-s
Ea = J/kmol

[species A]
W = 29
elements = X:1
nasa7.T = 200 1000 3500
nasa7.low = 3.5 0 0 0 0 0 0
nasa7.high = 3.5 0 0 0 0 0 0
viscosity = constant 1e-5

[species B]
W = 29
elements = X:1
nasa7.T = 200 1000 3500
nasa7.low = 3.5 0 0 0 0 0 0
nasa7.high = 3.5 0 0 0 0 0 0
viscosity = constant 1e-5
)";

std::string miniMechWith(const std::string& units, const std::string& reaction) {
    std::string s = kMiniMech;
    s.replace(s.find("A = kmol-m3-s\nEa = J/kmol"), std::string("A = kmol-m3-s\nEa = J/kmol").size(), units);
    return s + "\n[reaction]\n" + reaction;
}

// Small non-reactive TGV case resolved against the shipped cases directory.
std::string smallCase(std::size_t n, double endTime, std::size_t writeInterval = 0) {
    std::ostringstream os;
    os << "[mesh]\ndims = " << n << " " << n << " " << n << "\n";
    os << "[time]\ndt = 2e-5\nendTime = " << endTime << "\nmaxCo = 0.5\nwriteInterval = " << writeInterval << "\n";
    os << "[schemes]\nddt = backward2\n";
    os << "[chemistry]\nmode = none\nmechanism = air.mech\n";
    os << "[init]\nkind = tgv\ncomposition = N2:1\n";
    return os.str();
}

std::vector<std::vector<double>> readCsv(const fs::path& p, std::string& header) {
    std::ifstream in(p);
    std::getline(in, header);
    std::vector<std::vector<double>> rows;
    for (std::string line; std::getline(in, line);) {
        std::vector<double> row;
        std::istringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) row.push_back(std::strtod(cell.c_str(), nullptr));
        rows.push_back(row);
    }
    return rows;
}

} // namespace

TEST_CASE("shipped mechanisms emit a canonical text that parses back to itself") {
    for (const char* name : {"toy_ab.mech", "stiff_toy.mech", "h2o2.mech", "air.mech"}) {
        CAPTURE(name);
        const Mechanism m = parseMechanism(kCases + "/" + name);
        const std::string once = emitMechanism(m);
        const Mechanism back = parseMechanismText(once, "emitted");
        CHECK(emitMechanism(back) == once);
        REQUIRE(back.reactions().size() == m.reactions().size());
        for (std::size_t r = 0; r < m.reactions().size(); ++r)
            for (double T : {500.0, 1200.0, 2400.0})
                CHECK(rateForward(back.reactions()[r], T) == rateForward(m.reactions()[r], T));
    }
}

TEST_CASE("shipped mechanism files reproduce the built-in test mechanisms") {
    const auto same = [](const Mechanism& file, const Mechanism& ref) {
        REQUIRE(file.nSpecies() == ref.nSpecies());
        REQUIRE(file.reactions().size() == ref.reactions().size());
        CHECK(file.inert() == ref.inert());
        for (std::size_t r = 0; r < ref.reactions().size(); ++r) {
            const Reaction &a = file.reactions()[r], &b = ref.reactions()[r];
            CHECK(a.reversible == b.reversible);
            CHECK(a.thirdBody == b.thirdBody);
            for (double T : {400.0, 1000.0, 2000.0})
                CHECK(rateForward(a, T) == doctest::Approx(rateForward(b, T)).epsilon(1e-12));
        }
        for (double T : {400.0, 1000.0, 2000.0})
            for (std::size_t k = 0; k < ref.nSpecies(); ++k)
                CHECK(hRT(file.mixture().species(k).thermo, T) ==
                      doctest::Approx(hRT(ref.mixture().species(k).thermo, T)).epsilon(1e-12));
    };
    same(parseMechanism(kCases + "/toy_ab.mech"), testdata::toyAB());
    same(parseMechanism(kCases + "/stiff_toy.mech"), testdata::stiffToy());
    same(parseMechanism(kCases + "/h2o2.mech"), testdata::h2o2());
}

TEST_CASE("third-body reactions carry M and efficiencies") {
    const Mechanism m = parseMechanismText(
        miniMechWith("A = kmol-m3-s\nEa = J/kmol", "equation = 2A + M <=> 2 B + M\nA = 1e3\nefficiencies = B:2.5\n"));
    const Reaction& r = m.reactions().at(0);
    CHECK(r.thirdBody);
    CHECK(r.reversible);
    REQUIRE(r.reactants.size() == 1);
    CHECK(r.reactants[0].nu == 2.0);
    CHECK(r.efficiencies == std::vector<double>{1.0, 2.5});
    CHECK(reactionEquation(r, m.mixture()) == "2 A + M <=> 2 B + M");

    const std::string err = errorOf([] {
        parseMechanismText(miniMechWith("A = kmol-m3-s\nEa = J/kmol", "equation = A => B\nA = 1\nefficiencies = B:2\n"));
    });
    CHECK(err.find("efficiencies") != std::string::npos);
}

TEST_CASE("unit conversions to kmol, m^3, s and J/kmol") {
    const auto reaction = [](const std::string& units, const std::string& rx) {
        return parseMechanismText(miniMechWith(units, rx)).reactions().at(0);
    };
    // Second order: (cm^3/mol)/s to (m^3/kmol)/s is a factor 1e-3.
    const Reaction bi = reaction("A = mol-cm3-s\nEa = cal/mol", "equation = 2 A => 2 B\nA = 1e13\nEa = 1000\n");
    CHECK(bi.A == doctest::Approx(1e10).epsilon(1e-15));
    CHECK(bi.Ea == doctest::Approx(4.184e6).epsilon(1e-15));
    // First order rates carry no concentration units.
    const Reaction uni = reaction("A = mol-cm3-s\nEa = kcal/mol", "equation = A => B\nA = 5e6\nEa = 2\n");
    CHECK(uni.A == 5e6);
    CHECK(uni.Ea == doctest::Approx(8.368e6).epsilon(1e-15));
    const Reaction k = reaction("A = kmol-m3-s\nEa = K", "equation = A => B\nA = 1\nEa = 1000\n");
    CHECK(k.Ea == doctest::Approx(1000.0 * kRu).epsilon(1e-15));
    const Reaction jmol = reaction("A = kmol-m3-s\nEa = J/mol", "equation = A => B\nA = 1\nEa = 1000\n");
    CHECK(jmol.Ea == doctest::Approx(1e6).epsilon(1e-15));
}

TEST_CASE("mechanism errors name the file, line and culprit") {
    const std::string unbalanced = errorOf([] {
        parseMechanismText(miniMechWith("A = kmol-m3-s\nEa = J/kmol", "equation = 2 A => B\nA = 1\n"), "mini.mech");
    });
    CHECK(unbalanced.find("element X is unbalanced") != std::string::npos);
    CHECK(unbalanced.find("A:2") != std::string::npos);
    CHECK(unbalanced.find("B:1") != std::string::npos);

    const std::string unknownKey = errorOf([] {
        parseMechanismText(miniMechWith("A = kmol-m3-s\nEa = J/kmol", "equation = A => B\nA = 1\nbetta = 1\n"),
                           "mini.mech");
    });
    CHECK(unknownKey.find("mini.mech:") == 0);
    CHECK(unknownKey.find("betta") != std::string::npos);

    const std::string badSpecies = errorOf([] {
        parseMechanismText(miniMechWith("A = kmol-m3-s\nEa = J/kmol", "equation = A => C\nA = 1\n"), "mini.mech");
    });
    CHECK(badSpecies.find("C") != std::string::npos);
    CHECK(badSpecies.find("mini.mech:") == 0);

    CHECK_THROWS_AS(parseMechanismText(std::string(kMiniMech).substr(std::string(kMiniMech).find("[species A]"))),
                    ParseError);
}

TEST_CASE("case files round-trip through the canonical emitter") {
    for (const char* name : {"tgv3d.cfg", "tgv2d.cfg", "reactive_ode.cfg", "reactive_surrogate.cfg"}) {
        CAPTURE(name);
        const CaseConfig c = parseCase(kCases + "/" + name);
        const std::string once = emitCase(c);
        const CaseConfig back = parseCaseText(once, "emitted", c.baseDir);
        CHECK(emitCase(back) == once);
        CHECK(back.stepCount() == c.stepCount());
    }
    const CaseConfig c = parseCase(kCases + "/tgv3d.cfg");
    CHECK(c.stepCount() == 50);
    CHECK(c.boxLengths()[0] == doctest::Approx(2.0 * std::numbers::pi * 1e-3));
    CHECK(bool(c.piso.chemistryMode == ChemistryMode::None));
    const CaseConfig d2 = parseCase(kCases + "/tgv2d.cfg");
    CHECK(d2.init.twoD);
    CHECK(d2.dims[2] == 1);
}

TEST_CASE("case errors are strict and located") {
    const std::string base = smallCase(8, 0.0);
    const std::string unknown = errorOf([&] { parseCaseText(base + "speling = 1\n", "bad.cfg", kCases); });
    CHECK(unknown.find("bad.cfg:") == 0);
    CHECK(unknown.find("speling") != std::string::npos);
    // line:col of the offending key
    const std::size_t line = static_cast<std::size_t>(std::count(base.begin(), base.end(), '\n')) + 1;
    CHECK(unknown.find("bad.cfg:" + std::to_string(line) + ":1:") == 0);

    const std::string pair = errorOf([&] {
        std::string s = base;
        s.replace(s.find("[mesh]\n"), 7, "[mesh]\npatches = periodic zeroGradient periodic periodic periodic periodic\n");
        parseCaseText(s, "pair.cfg", kCases);
    });
    CHECK(pair.find("periodic patch xmin has no periodic pair xmax") != std::string::npos);

    CHECK_THROWS_AS(parseCaseText(base + "[time]\ndt = 1\n", "dup.cfg", kCases), ParseError);
    CHECK_THROWS_AS(parseCaseText("[mesh]\ndims = 8 8 8\n", "short.cfg", kCases), ParseError);
    const std::string missing = errorOf([] { parseCase(kCases + "/does_not_exist.cfg"); });
    CHECK(missing.find("does_not_exist.cfg") != std::string::npos);
}

TEST_CASE("Taylor-Green initial state") {
    const CaseConfig c = parseCase(kCases + "/tgv3d.cfg");
    Simulation sim(c);
    const Mesh& mesh = sim.mesh();
    const SimulationState& s = sim.state();
    const std::size_t n = mesh.nCells();

    double umax = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        umax = std::max(umax, std::hypot(s.U(0, i), s.U(1, i), s.U(2, i)));
    // Cell centres sit half a cell off the extrema of sin and cos.
    const double h = std::numbers::pi / 16.0;
    CHECK(umax <= 4.0);
    CHECK(umax >= 4.0 * std::pow(std::cos(h / 2.0), 3) - 1e-12);

    const FaceField phi = faceFluxOf(s.U);
    std::vector<double> div(n, 0.0);
    for (std::size_t f = 0; f < mesh.nInternalFaces(); ++f) {
        div[mesh.faces.owner[f]] += phi(0, f);
        div[mesh.faces.neighbor[f]] -= phi(0, f);
    }
    double worst = 0.0, scale = 0.0;
    for (std::size_t f = 0; f < mesh.nInternalFaces(); ++f) scale = std::max(scale, std::abs(phi(0, f)));
    for (double d : div) worst = std::max(worst, std::abs(d));
    CHECK(worst < 1e-10 * scale);

    CHECK(sim.reynolds() == doctest::Approx(250.0).epsilon(0.03));
    for (std::size_t i = 0; i < n; ++i) {
        REQUIRE(s.T(0, i) == 300.0);
        REQUIRE(s.p(0, i) == 0.0);
    }
}

TEST_CASE("reactive layer blends fuel into oxidizer") {
    const CaseConfig c = parseCase(kCases + "/reactive_ode.cfg");
    const Mechanism mech = parseMechanism(kCases + "/toy_ab.mech");
    const Mesh mesh = buildCartesianMesh(c.dims, c.boxLengths(), c.patches);
    CellField U, T, Y;
    initTgv(mesh, mech.mixture(), c.init, U, T, Y);
    const std::size_t n = mesh.nCells(), a = mech.mixture().index("A");
    double lo = 1.0, hi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t k = 0; k < mech.nSpecies(); ++k) sum += Y(k, i);
        REQUIRE(sum == doctest::Approx(1.0).epsilon(1e-14));
        lo = std::min(lo, Y(a, i));
        hi = std::max(hi, Y(a, i));
        const double y = mesh.cells.cellCenters[i][1];
        if (std::abs(y - c.boxLengths()[1] / 2.0) < 1e-4) REQUIRE(Y(a, i) > 0.29);
    }
    CHECK(lo < 1e-3);
    CHECK(hi == doctest::Approx(0.3).epsilon(1e-6));
}

TEST_CASE("endTime zero writes the initial state only") {
    const fs::path dir = scratchDir("zero");
    Simulation sim(parseCaseText(smallCase(8, 0.0, 1), "zero.cfg", kCases));
    RunOptions opt;
    opt.outputDir = dir.string();
    const RunResult r = run(sim, opt);
    CHECK(r.steps == 0);
    CHECK(r.history.size() == 1);
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(dir)) {
        ++files;
        CHECK((e.path().filename() == "diagnostics.csv" || e.path().filename() == "state_000000.vtk"));
    }
    CHECK(files == 2);
    std::string header;
    CHECK(readCsv(dir / "diagnostics.csv", header).size() == 1);
    CHECK(header == kDiagnosticsHeader);
}

TEST_CASE("run writes monotone diagnostics and lands on endTime") {
    const fs::path dir = scratchDir("run");
    // 4.5 steps of 2e-5: the last step is shortened.
    Simulation sim(parseCaseText(smallCase(8, 9e-5, 2), "run.cfg", kCases));
    RunOptions opt;
    opt.outputDir = dir.string();
    std::size_t calls = 0;
    opt.onStep = [&](const StepReport&) { ++calls; };
    const RunResult r = run(sim, opt);
    CHECK(r.steps == 5);
    CHECK(calls == 5);
    CHECK(sim.state().time == 9e-5);
    std::string header;
    const auto rows = readCsv(dir / "diagnostics.csv", header);
    // t = 0, steps 2 and 4, and the final step
    REQUIRE(rows.size() == 4);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i][0] > rows[i - 1][0]);
        CHECK(rows[i][1] < rows[i - 1][1]);
    }
    for (const char* f : {"state_000000.vtk", "state_000002.vtk", "state_000004.vtk", "state_000005.vtk"})
        CHECK(fs::exists(dir / f));
}

TEST_CASE("VTK output reloads to the exact field values") {
    Simulation sim(parseCaseText(smallCase(6, 2e-5), "vtk.cfg", kCases));
    sim.step(2e-5);
    std::ostringstream os;
    writeVtk(os, sim.state(), sim.mechanism().mixture(), "check");
    const SimulationState& s = sim.state();
    const std::size_t n = sim.mesh().nCells();

    // Independent reader: tokens after each data header.
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "# vtk DataFile Version 3.0");
    std::getline(in, line);
    CHECK(line == "check");
    std::size_t checked = 0;
    for (std::string tok; in >> tok;) {
        if (tok == "DIMENSIONS") {
            std::size_t a, b, c;
            in >> a >> b >> c;
            CHECK((a == 6 && b == 6 && c == 6));
        } else if (tok == "VECTORS") {
            in >> tok >> tok;
            for (std::size_t i = 0; i < n; ++i)
                for (int d = 0; d < 3; ++d) {
                    in >> tok;
                    REQUIRE(std::strtod(tok.c_str(), nullptr) == s.U(d, i));
                }
            ++checked;
        } else if (tok == "SCALARS") {
            std::string name;
            in >> name >> tok >> tok >> tok >> tok; // type, components, LOOKUP_TABLE default
            const CellField* f = name == "p" ? &s.p : name == "T" ? &s.T : name == "rho" ? &s.rho : name == "h" ? &s.h
                                                                                                            : &s.Y;
            for (std::size_t i = 0; i < n; ++i) {
                in >> tok;
                REQUIRE(std::strtod(tok.c_str(), nullptr) == (*f)(0, i));
            }
            ++checked;
        }
    }
    CHECK(checked == 6); // U, p, T, rho, h, Y_N2
}

TEST_CASE("Courant limit violation stops the run and dumps the state") {
    const fs::path dir = scratchDir("courant");
    std::string text = smallCase(8, 1e-3);
    text.replace(text.find("maxCo = 0.5"), 11, "maxCo = 0.01");
    Simulation sim(parseCaseText(text, "co.cfg", kCases));
    RunOptions opt;
    opt.outputDir = dir.string();
    const std::string err = errorOf([&] { run(sim, opt); });
    CHECK(err.find("Courant number") != std::string::npos);
    CHECK(fs::exists(dir / "failed.vtk"));
}

TEST_CASE("bench report schema and timing sum") {
    Simulation sim(parseCaseText(smallCase(12, 1e-4), "bench.cfg", kCases));
    const BenchReport r = bench(sim, 3);
    CHECK(r.steps == 3);
    CHECK(r.cells == 1728);
    CHECK(r.total.sum() == doctest::Approx(r.total.total).epsilon(0.05));
    CHECK(r.fluid() == doctest::Approx(r.total.sum() - r.total.chemistry).epsilon(1e-12));
    std::ostringstream os;
    writeBenchReport(os, r);
    std::istringstream in(os.str());
    std::vector<std::string> lines;
    for (std::string l; std::getline(in, l);) lines.push_back(l);
    REQUIRE(lines.size() == 11);
    CHECK(lines[0] == "# cells 1728, steps 3, chemistry none");
    CHECK(lines[1] == "stage,seconds_per_step,fraction_of_total");
    const char* stages[] = {"discretisation", "linear_solve", "chemistry", "thermo", "sum", "total"};
    for (int i = 0; i < 6; ++i) CHECK(lines[2 + i].rfind(std::string(stages[i]) + ",", 0) == 0);
    CHECK(lines[7].rfind("total,", 0) == 0);
    CHECK(lines[7].substr(lines[7].rfind(',') + 1) == "1");
    CHECK(lines[8].empty());
    CHECK(lines[9] == "sum,chemistry,fluid");
    CHECK_THROWS_AS(bench(sim, 0), InvalidArgument);
}

TEST_CASE("surrogate case loads the shipped weights and steps") {
    std::string text = slurp(kCases + "/reactive_surrogate.cfg");
    text.replace(text.find("dims = 32 32 32"), 15, "dims = 8 8 8");
    Simulation sim(parseCaseText(text, "surrogate.cfg", kCases));
    const double T0 = maxTemperature(sim.state());
    const StepReport r = sim.step(1e-5);
    CHECK(r.timings.chemistry > 0.0);
    CHECK(maxTemperature(sim.state()) > T0);
}
