#include "rflow/driver.hpp"

#include "rflow/error.hpp"
#include "rflow/surrogate.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

namespace rflow {

namespace {

std::vector<double> massFractions(const Mixture& mix, const std::map<std::string, double>& comp, const char* what) {
    std::vector<double> y(mix.nSpecies(), 0.0);
    double sum = 0.0;
    for (const auto& [name, v] : comp) {
        if (!(v >= 0.0)) throw InvalidArgument(std::string(what) + ": mass fraction of " + name + " is negative");
        y[mix.index(name)] = v;
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6)
        throw InvalidArgument(std::string(what) + ": mass fractions sum to " + std::to_string(sum) + ", not 1");
    for (double& v : y) v /= sum;
    return y;
}

void put(std::ostream& os, double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    os.write(buf, p - buf);
}

void scalars(std::ostream& os, const std::string& name, std::span<const double> v) {
    os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (double x : v) {
        put(os, x);
        os << '\n';
    }
}

} // namespace

void initTgv(const Mesh& mesh, const Mixture& mix, const TgvInit& init, CellField& U, CellField& T, CellField& Y) {
    const bool periodic = mesh.allPeriodic() || (init.twoD && mesh.cells.dims[2] == 1 && [&] {
        for (const auto& p : mesh.patches)
            if (p.kind != PatchKind::Periodic && p.side != Side::ZMin && p.side != Side::ZMax) return false;
        return true;
    }());
    if (!periodic) throw InvalidArgument("initTgv: the Taylor-Green case needs a periodic mesh");
    const std::size_t n = mesh.nCells(), ns = mix.nSpecies();
    U = CellField(mesh, 3, "U");
    T = CellField(mesh, 1, "T", init.T);
    Y = CellField(mesh, ns, "Y");
    const double L = init.L;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 c = mesh.cells.cellCenters[i];
        const double x = c[0] / L, y = c[1] / L, z = c[2] / L;
        const double cz = init.twoD ? 1.0 : std::cos(z);
        U(0, i) = init.u0 * std::sin(x) * std::cos(y) * cz;
        U(1, i) = -init.u0 * std::cos(x) * std::sin(y) * cz;
        U(2, i) = 0.0;
    }
    if (!init.reactive) {
        const auto y = massFractions(mix, init.composition, "init.composition");
        for (std::size_t k = 0; k < ns; ++k)
            for (std::size_t i = 0; i < n; ++i) Y(k, i) = y[k];
        return;
    }
    const auto yf = massFractions(mix, init.fuel, "init.fuel");
    const auto yo = massFractions(mix, init.oxidizer, "init.oxidizer");
    const double Ly = mesh.cells.lengths[1];
    const double centre = 0.5 * Ly, half = 0.25 * init.width * Ly, delta = init.thickness * L;
    for (std::size_t i = 0; i < n; ++i) {
        const double y = mesh.cells.cellCenters[i][1];
        const double f = 0.5 * (std::tanh((y - centre + half) / delta) - std::tanh((y - centre - half) / delta));
        T(0, i) = f * init.Tfuel + (1.0 - f) * init.Toxidizer;
        double sum = 0.0;
        for (std::size_t k = 0; k < ns; ++k) sum += (Y(k, i) = f * yf[k] + (1.0 - f) * yo[k]);
        for (std::size_t k = 0; k < ns; ++k) Y(k, i) /= sum;
    }
}

Simulation::Simulation(const CaseConfig& c) : config_(c) {
    config_.validate(true);
    mech_ = std::make_unique<Mechanism>(parseMechanism(config_.resolve(config_.mechanismPath)));
    mesh_ = std::make_unique<Mesh>(buildCartesianMesh(config_.dims, config_.boxLengths(), config_.patches));
    if (config_.piso.chemistryMode == ChemistryMode::Surrogate)
        bundle_ = std::make_unique<SurrogateBundle>(loadWeights(config_.resolve(config_.weightsPath)));
    config_.piso.maxCo = config_.maxCo;
    solver_ = std::make_unique<PisoSolver>(*mech_, config_.piso, bundle_.get(), config_.trainingDt);
    CellField U, T, Y;
    initTgv(*mesh_, mech_->mixture(), config_.init, U, T, Y);
    state_ = solver_->initialState(U, T, Y, config_.init.p);
    double rho = 0.0, mu = 0.0;
    for (std::size_t i = 0; i < mesh_->nCells(); ++i) {
        rho += state_.rho.data[i];
        mu += state_.mu.data[i];
    }
    reynolds_ = mu > 0.0 ? config_.init.u0 * config_.init.L * rho / mu : INFINITY;
}

StepReport Simulation::step(double dt) { return solver_->advance(state_, dt); }

void writeVtk(std::ostream& os, const SimulationState& s, const Mixture& mix, const std::string& title) {
    const StructuredMesh& m = s.mesh->cells;
    os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET STRUCTURED_POINTS\n";
    os << "DIMENSIONS " << m.dims[0] << " " << m.dims[1] << " " << m.dims[2] << "\nORIGIN";
    for (int d = 0; d < 3; ++d) {
        os << ' ';
        put(os, 0.5 * m.spacing[d]);
    }
    os << "\nSPACING";
    for (int d = 0; d < 3; ++d) {
        os << ' ';
        put(os, m.spacing[d]);
    }
    os << "\nPOINT_DATA " << m.nCells << "\nVECTORS U double\n";
    for (std::size_t i = 0; i < m.nCells; ++i) {
        for (int d = 0; d < 3; ++d) {
            if (d) os << ' ';
            put(os, s.U(d, i));
        }
        os << '\n';
    }
    scalars(os, "p", s.p.component(0));
    scalars(os, "T", s.T.component(0));
    scalars(os, "rho", s.rho.component(0));
    scalars(os, "h", s.h.component(0));
    for (std::size_t k = 0; k < mix.nSpecies(); ++k) scalars(os, "Y_" + mix.species(k).name, s.Y.component(k));
}

void writeVtk(const std::string& path, const SimulationState& s, const Mixture& mix, const std::string& title) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    writeVtk(out, s, mix, title);
    if (!out) throw IoError("write failed for '" + path + "'");
}

void writeDiagnosticsRow(std::ostream& os, const Diagnostics& d) {
    put(os, d.t);
    for (double v : {d.kineticEnergy, d.maxT, d.maxCo, d.continuityResidual}) {
        os << ',';
        put(os, v);
    }
    os << '\n';
}

RunResult run(Simulation& sim, const RunOptions& opt) {
    namespace fs = std::filesystem;
    const CaseConfig& c = sim.config();
    const Mixture& mix = sim.mechanism().mixture();
    SimulationState& s = sim.state();
    std::error_code ec;
    fs::create_directories(opt.outputDir, ec);
    if (ec) throw IoError("cannot create output directory '" + opt.outputDir + "': " + ec.message());
    const fs::path dir(opt.outputDir);
    std::ofstream csv(dir / "diagnostics.csv", std::ios::binary);
    if (!csv) throw IoError("cannot write '" + (dir / "diagnostics.csv").string() + "'");
    csv << kDiagnosticsHeader << '\n';

    auto vtkName = [](std::size_t step) {
        std::ostringstream os;
        os << "state_" << std::setw(6) << std::setfill('0') << step << ".vtk";
        return os.str();
    };
    auto output = [&](const Diagnostics& d) {
        writeDiagnosticsRow(csv, d);
        csv.flush();
        if (opt.writeVtk) {
            std::ostringstream title;
            title << "rflow step " << s.step << " t ";
            put(title, s.time);
            writeVtk((dir / vtkName(s.step)).string(), s, mix, title.str());
        }
    };

    RunResult res;
    Diagnostics d0;
    d0.t = s.time;
    d0.kineticEnergy = kineticEnergy(s);
    d0.maxT = maxTemperature(s);
    {
        FaceField vol = faceFluxOf(s.U);
        d0.maxCo = courantNumber(vol, *s.mesh, c.dt).maxCo;
    }
    res.history.push_back(d0);
    output(d0);

    const std::size_t steps = c.stepCount();
    for (std::size_t n = 0; n < steps; ++n) {
        double dt = c.dt;
        // A short last step lands on endTime; accumulated roundoff keeps dt.
        if (n + 1 == steps && std::abs(c.endTime - s.time - c.dt) > 1e-9 * c.dt) dt = c.endTime - s.time;
        StepReport r;
        try {
            if (!(dt > 0.0)) break;
            r = sim.step(dt);
            if (r.maxCo > c.maxCo) {
                std::ostringstream os;
                os << "Courant number " << r.maxCo << " exceeds maxCo " << c.maxCo << " at step " << s.step;
                throw ConvergenceError(os.str());
            }
        } catch (const Error&) {
            if (opt.writeVtk) {
                try {
                    writeVtk((dir / "failed.vtk").string(), s, mix, "rflow failed state");
                } catch (const Error&) {
                }
            }
            throw;
        }
        res.timings += r.timings;
        ++res.steps;
        Diagnostics d;
        d.t = s.time;
        d.kineticEnergy = kineticEnergy(s);
        d.maxT = maxTemperature(s);
        d.maxCo = r.maxCo;
        d.continuityResidual = r.continuityResidual;
        res.history.push_back(d);
        if (opt.onStep) opt.onStep(r);
        const bool last = n + 1 == steps;
        if (last || (c.writeInterval > 0 && s.step % c.writeInterval == 0)) output(d);
    }
    return res;
}

BenchReport bench(Simulation& sim, std::size_t steps) {
    if (steps == 0) throw InvalidArgument("bench: steps must be positive");
    BenchReport r;
    r.cells = sim.mesh().nCells();
    r.chemistryMode = toString(sim.config().piso.chemistryMode);
    for (std::size_t n = 0; n < steps; ++n) {
        StepReport s = sim.step(sim.config().dt);
        r.total += s.timings;
        ++r.steps;
    }
    return r;
}

void writeBenchReport(std::ostream& os, const BenchReport& r) {
    auto row = [&](const char* name, double v) {
        os << name << ',';
        put(os, r.perStep(v));
        os << ',';
        put(os, r.total.total > 0.0 ? v / r.total.total : 0.0);
        os << '\n';
    };
    os << "# cells " << r.cells << ", steps " << r.steps << ", chemistry " << r.chemistryMode << '\n';
    os << "stage,seconds_per_step,fraction_of_total\n";
    row("discretisation", r.total.discretisation);
    row("linear_solve", r.total.linearSolve);
    row("chemistry", r.total.chemistry);
    row("thermo", r.total.thermo);
    row("sum", r.total.sum());
    row("total", r.total.total);
    os << "\nsum,chemistry,fluid\n";
    put(os, r.perStep(r.total.sum()));
    os << ',';
    put(os, r.perStep(r.total.chemistry));
    os << ',';
    put(os, r.perStep(r.fluid()));
    os << '\n';
}

} // namespace rflow
