#include "rflow/piso.hpp"

#include "rflow/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace rflow {

const char* toString(ChemistryMode m) {
    switch (m) {
        case ChemistryMode::None:      return "none";
        case ChemistryMode::Ode:       return "ode";
        case ChemistryMode::Surrogate: return "surrogate";
    }
    return "?";
}

ChemistryMode chemistryModeFromString(const std::string& s) {
    if (s == "none") return ChemistryMode::None;
    if (s == "ode") return ChemistryMode::Ode;
    if (s == "surrogate") return ChemistryMode::Surrogate;
    throw InvalidArgument("unknown chemistry mode '" + s + "' (expected none, ode or surrogate)");
}

void PisoConfig::validate() const {
    if (nCorrectors < 1) throw InvalidArgument("piso: nCorrectors must be at least 1");
    if (!(maxCo > 0.0)) throw InvalidArgument("piso: maxCo must be positive");
    pressure.validate();
    momentum.validate();
    scalar.validate();
    chemistry.validate();
}

StageTimings& StageTimings::operator+=(const StageTimings& o) {
    discretisation += o.discretisation;
    linearSolve += o.linearSolve;
    chemistry += o.chemistry;
    thermo += o.thermo;
    total += o.total;
    return *this;
}

namespace {

using Clock = std::chrono::steady_clock;

class ScopedTimer {
public:
    explicit ScopedTimer(double& sink) : sink_(sink), start_(Clock::now()) {}
    ~ScopedTimer() { sink_ += std::chrono::duration<double>(Clock::now() - start_).count(); }
    ScopedTimer(const ScopedTimer&) = delete;
    ScopedTimer& operator=(const ScopedTimer&) = delete;

private:
    double& sink_;
    Clock::time_point start_;
};

CellField componentOf(const CellField& f, std::size_t comp, const std::string& name) {
    CellField out(*f.mesh, 1, name);
    auto src = f.component(comp);
    std::copy(src.begin(), src.end(), out.data.begin());
    for (std::size_t p = 0; p < f.boundary.size(); ++p) {
        out.boundary[p].kind = f.boundary[p].kind;
        const std::size_t sz = f.mesh->patches[p].size();
        if (f.boundary[p].values.size() == f.nComponents * sz)
            out.boundary[p].values.assign(f.boundary[p].values.begin() + comp * sz,
                                          f.boundary[p].values.begin() + (comp + 1) * sz);
    }
    return out;
}

void setComponent(CellField& f, std::size_t comp, const CellField& src) {
    std::copy(src.data.begin(), src.data.end(), f.component(comp).begin());
}

// Runs a stage and tags any error with its name.
template <class F>
void stage(const char* name, F&& f) {
    try {
        f();
    } catch (const ConvergenceError& e) {
        throw ConvergenceError(std::string(name) + ": " + e.what());
    } catch (const InvalidArgument& e) {
        throw InvalidArgument(std::string(name) + ": " + e.what());
    } catch (const Error& e) {
        throw Error(std::string(name) + ": " + e.what());
    }
}

// Transport equations: relTol is taken relative to the right-hand side norm
// of the flattened system.
SolverReport solveTransport(const FvMatrix& eq, CellField& psi, SolverControls ctl) {
    if (ctl.relTol > 0.0) {
        FlatSystem fs = flatten(eq);
        const std::size_t n = psi.nCells();
        double worst = 0.0;
        for (std::size_t c = 0; c < psi.nComponents; ++c) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += fs.rhs[c * n + i] * fs.rhs[c * n + i];
            worst = std::max(worst, std::sqrt(s));
        }
        ctl.absTol = std::max(ctl.absTol, ctl.relTol * worst);
        ctl.relTol = 0.0;
    }
    return solveFv(eq, psi, ctl);
}

} // namespace

CellField propertyField(const Mesh& mesh, std::size_t nComp, const std::string& name, double value) {
    CellField f(mesh, nComp, name, value);
    for (std::size_t p = 0; p < mesh.patches.size(); ++p)
        if (mesh.patches[p].kind != PatchKind::Periodic) f.setClosure(p, Closure::ZeroGradient);
    return f;
}

double kineticEnergy(const SimulationState& s) {
    const std::size_t n = s.mesh->nCells();
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double u2 = 0.0;
        for (int d = 0; d < 3; ++d) u2 += s.U(d, i) * s.U(d, i);
        e += 0.5 * u2;
    }
    return e / static_cast<double>(n);
}

double maxTemperature(const SimulationState& s) { return *std::max_element(s.T.data.begin(), s.T.data.end()); }

PisoSolver::PisoSolver(const Mechanism& mech, PisoConfig config, const SurrogateBundle* bundle, double trainingDt)
    : mech_(mech), config_(std::move(config)), bundle_(bundle), trainingDt_(trainingDt) {
    config_.validate();
    if (config_.chemistryMode == ChemistryMode::Surrogate) {
        if (!bundle_) throw InvalidArgument("piso: surrogate chemistry needs a weights bundle");
        bundle_->validate(mech_);
        if (!(trainingDt_ > 0.0)) throw InvalidArgument("piso: surrogate chemistry needs the training time step");
    }
}

FaceField PisoSolver::massFlux(const CellField& rho, const CellField& U) const {
    FaceField vol = faceFluxOf(U);
    FaceField rf = interpolateLinear(rho);
    for (std::size_t f = 0; f < vol.data.size(); ++f) vol.data[f] *= rf.data[f];
    for (std::size_t p = 0; p < vol.boundary.size(); ++p)
        for (std::size_t l = 0; l < vol.boundary[p].size(); ++l) vol.boundary[p][l] *= rf.boundary[p][l];
    return vol;
}

SimulationState PisoSolver::initialState(const CellField& U, const CellField& T, const CellField& Y,
                                         double pThermo) const {
    const Mesh& mesh = *U.mesh;
    const Mixture& mix = mech_.mixture();
    const std::size_t n = mesh.nCells(), ns = mix.nSpecies();
    if (U.nComponents != 3 || T.nComponents != 1 || Y.nComponents != ns || T.mesh != &mesh || Y.mesh != &mesh)
        throw InvalidArgument("initialState: U, T and Y do not match the mesh and mechanism");
    if (!(pThermo > 0.0)) throw InvalidArgument("initialState: pressure must be positive");
    SimulationState s;
    s.mesh = &mesh;
    s.U = U;
    s.T = T;
    s.Y = Y;
    s.p = propertyField(mesh, 1, "p");
    s.pThermo = s.pThermoOld = pThermo;
    s.h = CellField(mesh, 1, "h");
    std::vector<double> y(ns);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < ns; ++k) y[k] = Y(k, i);
        mix.checkY(y);
        s.h(0, i) = mix.h(T(0, i), y);
    }
    for (std::size_t p = 0; p < mesh.patches.size(); ++p) {
        const BoundaryPatch& bp = mesh.patches[p];
        s.h.boundary[p].kind = T.boundary[p].kind;
        if (T.boundary[p].kind == Closure::FixedValue) {
            s.h.boundary[p].values.resize(bp.size());
            for (std::size_t l = 0; l < bp.size(); ++l) {
                for (std::size_t k = 0; k < ns; ++k) y[k] = Y.boundaryValue(p, k, l);
                s.h.boundary[p].values[l] = mix.h(T.boundaryValue(p, 0, l), y);
            }
        }
    }
    s.h.correctBoundary();
    s.rho = propertyField(mesh, 1, "rho");
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < ns; ++k) y[k] = Y(k, i);
        s.rho(0, i) = mix.density(pThermo, T(0, i), y);
    }
    s.rho.correctBoundary();
    s.mass = 0.0;
    for (double r : s.rho.data) s.mass += r * mesh.cells.cellVolume;
    s.rhoT = s.rho;
    s.mu = propertyField(mesh, 1, "mu");
    s.alpha = propertyField(mesh, 1, "alpha");
    s.rhoD = propertyField(mesh, ns, "rhoD");
    // Transport properties only; pThermo and rho already hold.
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < ns; ++k) y[k] = Y(k, i);
        const double Ti = T(0, i);
        s.mu(0, i) = mix.viscosity(Ti, y);
        s.alpha(0, i) = mix.conductivity(Ti, y) / mix.cp(Ti, y);
        for (std::size_t k = 0; k < ns; ++k) s.rhoD(k, i) = s.rho(0, i) * mix.diffusivity(pThermo, Ti, y, k);
    }
    s.mu.correctBoundary();
    s.alpha.correctBoundary();
    s.rhoD.correctBoundary();
    s.phi = massFlux(s.rho, s.U);
    s.rhoOld = s.rho;
    s.UOld = s.U;
    s.YOld = s.Y;
    s.hOld = s.h;
    return s;
}

std::array<double, 3> PisoSolver::ddtCoeffs(const SimulationState& s) const {
    if (config_.ddt == DdtScheme::Backward2 && s.hasOldOld) return {1.5, -2.0, 0.5};
    return {1.0, -1.0, 0.0};
}

TimeLevels PisoSolver::levels(const CellField& rhoOld, const CellField& psiOld, const CellField* rhoOldOld,
                              const CellField* psiOldOld) const {
    TimeLevels t{&rhoOld, &psiOld, nullptr, nullptr};
    if (config_.ddt == DdtScheme::Backward2 && rhoOldOld) {
        t.rhoOldOld = rhoOldOld;
        t.psiOldOld = psiOldOld;
    }
    return t;
}

CellField PisoSolver::ddtRho(const SimulationState& s, const CellField& rhoNew, double dt) const {
    const auto c = ddtCoeffs(s);
    CellField out = propertyField(*s.mesh, 1, "ddtRho");
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        double v = c[0] * rhoNew.data[i] + c[1] * s.rhoOld.data[i];
        if (c[2] != 0.0) v += c[2] * s.rhoOldOld.data[i];
        out.data[i] = v / dt;
    }
    return out;
}

double PisoSolver::continuityResidual(const SimulationState& s, const FaceField& phi, double dt) const {
    CellField div = explicitDivergence(phi);
    CellField d = ddtRho(s, s.rho, dt);
    const double V = s.mesh->cells.cellVolume;
    double worst = 0.0;
    for (std::size_t i = 0; i < div.data.size(); ++i) worst = std::max(worst, std::abs(d.data[i] + div.data[i]) * V);
    return worst;
}

void PisoSolver::beginStep(SimulationState& s, double dt) {
    ScopedTimer t(timings_.discretisation);
    if (!(dt > 0.0)) throw InvalidArgument("advance: dt must be positive");
    if (s.step > 0) {
        s.rhoOldOld = std::move(s.rhoOld);
        s.UOldOld = std::move(s.UOld);
        s.YOldOld = std::move(s.YOld);
        s.hOldOld = std::move(s.hOld);
        s.hasOldOld = true;
    }
    s.rhoOld = s.rho;
    s.UOld = s.U;
    s.YOld = s.Y;
    s.hOld = s.h;
    // Explicit continuity with the last corrected flux.
    const auto c = ddtCoeffs(s);
    CellField div = explicitDivergence(s.phi);
    s.rhoT = s.rho;
    for (std::size_t i = 0; i < s.rhoT.data.size(); ++i) {
        double rest = c[1] * s.rhoOld.data[i];
        if (c[2] != 0.0) rest += c[2] * s.rhoOldOld.data[i];
        s.rhoT.data[i] = (-dt * div.data[i] - rest) / c[0];
    }
    s.rhoT.correctBoundary();
}

void PisoSolver::speciesStep(SimulationState& s, double dt) {
    const std::size_t ns = s.Y.nComponents, n = s.mesh->nCells();
    for (std::size_t k = 0; k + 1 < ns; ++k) {
        const std::string name = "Y_" + mech_.mixture().species(k).name;
        FvMatrix eq;
        CellField Yk = componentOf(s.Y, k, name);
        CellField YkOld = componentOf(s.YOld, k, name);
        CellField YkOldOld = s.hasOldOld ? componentOf(s.YOldOld, k, name) : CellField();
        {
            ScopedTimer t(timings_.discretisation);
            CellField gamma = componentOf(s.rhoD, k, "rhoD");
            eq = fvmDdt(s.rhoT, Yk, dt, config_.ddt,
                        levels(s.rhoOld, YkOld, s.hasOldOld ? &s.rhoOldOld : nullptr, s.hasOldOld ? &YkOldOld : nullptr)) +
                 fvmDiv(s.phi, Yk, config_.divScalar) - fvmLaplacian(gamma, Yk);
        }
        {
            ScopedTimer t(timings_.linearSolve);
            solveTransport(eq, Yk, config_.scalar);
        }
        setComponent(s.Y, k, Yk);
    }
    ScopedTimer t(timings_.discretisation);
    // The last species closes the sum; roundoff-level negatives are clipped.
    for (std::size_t i = 0; i < n; ++i) {
        double rest = 1.0;
        for (std::size_t k = 0; k + 1 < ns; ++k) rest -= s.Y(k, i);
        s.Y(ns - 1, i) = rest;
        double sum = 0.0;
        for (std::size_t k = 0; k < ns; ++k) sum += (s.Y(k, i) = std::max(0.0, s.Y(k, i)));
        if (sum != 1.0)
            for (std::size_t k = 0; k < ns; ++k) s.Y(k, i) /= sum;
    }
    s.Y.correctBoundary();
}

void PisoSolver::chemistryStep(SimulationState& s, double dt, StepReport* report) {
    ScopedTimer t(timings_.chemistry);
    switch (config_.chemistryMode) {
        case ChemistryMode::None: return;
        case ChemistryMode::Ode: {
            ChemStats st = integrateField(mech_, s.pThermo, s.T, s.Y, dt, config_.chemistry, config_.chemistryWorkers);
            if (report) report->chemistry += st;
            break;
        }
        case ChemistryMode::Surrogate: {
            SurrogateDiagnostics d = applySurrogateField(*bundle_, mech_, s.pThermo, s.T, s.Y, dt, trainingDt_);
            if (report) report->surrogate = d;
            break;
        }
    }
    s.T.correctBoundary();
    s.Y.correctBoundary();
}

void PisoSolver::energyStep(SimulationState& s, double dt) {
    FvMatrix eq;
    {
        ScopedTimer t(timings_.discretisation);
        eq = fvmDdt(s.rhoT, s.h, dt, config_.ddt,
                    levels(s.rhoOld, s.hOld, s.hasOldOld ? &s.rhoOldOld : nullptr, s.hasOldOld ? &s.hOldOld : nullptr)) +
             fvmDiv(s.phi, s.h, config_.divScalar) - fvmLaplacian(s.alpha, s.h);
        if (config_.dpdt) {
            CellField src = propertyField(*s.mesh, 1, "dpdt", (s.pThermo - s.pThermoOld) / dt);
            eq += fvmSu(src, s.h);
        }
    }
    {
        ScopedTimer t(timings_.linearSolve);
        solveTransport(eq, s.h, config_.scalar);
    }
    ScopedTimer t(timings_.thermo);
    const Mixture& mix = mech_.mixture();
    const std::size_t ns = mix.nSpecies();
    std::vector<double> y(ns);
    for (std::size_t i = 0; i < s.mesh->nCells(); ++i) {
        for (std::size_t k = 0; k < ns; ++k) y[k] = s.Y(k, i);
        try {
            s.T(0, i) = mix.TfromH(s.h(0, i), s.pThermo, y, s.T(0, i));
        } catch (const Error& e) {
            throw ConvergenceError("cell " + std::to_string(i) + ": " + e.what());
        }
    }
    s.T.correctBoundary();
}

void PisoSolver::updateProperties(SimulationState& s) {
    ScopedTimer t(timings_.thermo);
    const Mixture& mix = mech_.mixture();
    const Mesh& mesh = *s.mesh;
    const std::size_t n = mesh.nCells(), ns = mix.nSpecies();
    const double V = mesh.cells.cellVolume;
    std::vector<double> y(ns), psi(n);
    double psiV = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < ns; ++k) y[k] = s.Y(k, i);
        psi[i] = mix.psi(s.T(0, i), y);
        psiV += psi[i] * V;
    }
    bool closed = true;
    for (const auto& pf : s.p.boundary)
        if (pf.kind == Closure::FixedValue) closed = false;
    s.pThermoOld = s.pThermo;
    // A closed domain keeps its mass: pThermo follows the mean compressibility.
    if (closed) s.pThermo = s.mass / psiV;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < ns; ++k) y[k] = s.Y(k, i);
        const double Ti = s.T(0, i);
        s.rho(0, i) = psi[i] * s.pThermo;
        s.mu(0, i) = mix.viscosity(Ti, y);
        s.alpha(0, i) = mix.conductivity(Ti, y) / mix.cp(Ti, y);
        for (std::size_t k = 0; k < ns; ++k) s.rhoD(k, i) = s.rho(0, i) * mix.diffusivity(s.pThermo, Ti, y, k);
    }
    if (!closed) s.mass = s.pThermo * psiV;
    s.rho.correctBoundary();
    s.mu.correctBoundary();
    s.alpha.correctBoundary();
    s.rhoD.correctBoundary();
}

FvMatrix PisoSolver::momentumPredictor(SimulationState& s, double dt) {
    FvMatrix UEqn;
    CellField gradP;
    {
        ScopedTimer t(timings_.discretisation);
        UEqn = fvmDdt(s.rhoT, s.U, dt, config_.ddt,
                      levels(s.rhoOld, s.UOld, s.hasOldOld ? &s.rhoOldOld : nullptr, s.hasOldOld ? &s.UOldOld : nullptr)) +
               fvmDiv(s.phi, s.U, config_.divMomentum) - fvmLaplacian(s.mu, s.U);
        if (!config_.momentumPredictor) return UEqn;
        gradP = gaussGradient(s.p);
        for (double& g : gradP.data) g = -g;
    }
    FvMatrix eq;
    {
        ScopedTimer t(timings_.discretisation);
        eq = UEqn + fvmSu(gradP, s.U);
    }
    ScopedTimer t(timings_.linearSolve);
    solveTransport(eq, s.U, config_.momentum);
    return UEqn;
}

PressureReport PisoSolver::pressureCorrect(SimulationState& s, const FvMatrix& UEqn, double dt, int nCorrectors) {
    if (nCorrectors < 1) throw InvalidArgument("pressureCorrect: need at least one corrector");
    const Mesh& mesh = *s.mesh;
    const std::size_t n = mesh.nCells(), nf = mesh.nInternalFaces();
    PressureReport rep;
    rep.tolerance = config_.pressure.absTol;
    CellField rAU, rhorAU;
    CellField dRho;
    FaceField rhoF;
    bool singular = true;
    {
        ScopedTimer t(timings_.discretisation);
        CellField A = diagA(UEqn);
        rAU = propertyField(mesh, 1, "rAU");
        rhorAU = propertyField(mesh, 1, "rhorAU");
        for (std::size_t i = 0; i < n; ++i) {
            rAU.data[i] = 1.0 / A.data[i];
            rhorAU.data[i] = s.rho.data[i] * rAU.data[i];
        }
        rAU.correctBoundary();
        rhorAU.correctBoundary();
        dRho = ddtRho(s, s.rho, dt);
        rhoF = interpolateLinear(s.rho);
        for (const auto& pf : s.p.boundary)
            if (pf.kind == Closure::FixedValue) singular = false;
    }
    CellField H;
    {
        ScopedTimer t(timings_.discretisation);
        H = hOperator(UEqn, s.U);
    }
    for (int corr = 0; corr < nCorrectors; ++corr) {
        CellField HbyA;
        FaceField phiHbyA;
        FvMatrix pEqn;
        {
            ScopedTimer t(timings_.discretisation);
            HbyA = s.U;
            for (std::size_t d = 0; d < 3; ++d)
                for (std::size_t i = 0; i < n; ++i) HbyA(d, i) = H(d, i) * rAU.data[i];
            phiHbyA = faceFluxOf(HbyA);
            for (std::size_t f = 0; f < nf; ++f) phiHbyA.data[f] *= rhoF.data[f];
            for (std::size_t p = 0; p < phiHbyA.boundary.size(); ++p)
                for (std::size_t l = 0; l < phiHbyA.boundary[p].size(); ++l) phiHbyA.boundary[p][l] *= rhoF.boundary[p][l];
            CellField src = explicitDivergence(phiHbyA);
            for (std::size_t i = 0; i < n; ++i) src.data[i] += dRho.data[i];
            if (singular) {
                // Project onto the range of the singular operator.
                double mean = 0.0;
                for (double v : src.data) mean += v;
                mean /= static_cast<double>(n);
                for (double& v : src.data) v -= mean;
            }
            pEqn = fvmLaplacian(rhorAU, s.p) + fvmSu(src, s.p);
        }
        {
            ScopedTimer t(timings_.linearSolve);
            SolverReport r = solveFv(pEqn, s.p, config_.pressure);
            rep.iterations += r.iterations();
        }
        ScopedTimer t(timings_.discretisation);
        if (singular) {
            double mean = 0.0;
            for (double v : s.p.data) mean += v;
            mean /= static_cast<double>(n);
            for (double& v : s.p.data) v -= mean;
            s.p.correctBoundary();
        }
        // Flux from the matrix coefficients, so it satisfies the discrete pressure equation.
        s.phi = phiHbyA;
        for (std::size_t f = 0; f < nf; ++f)
            s.phi.data[f] -= pEqn.ldu.upper[f] * (s.p.data[mesh.faces.neighbor[f]] - s.p.data[mesh.faces.owner[f]]);
        for (std::size_t b = 0; b < mesh.nBoundaryFaces(); ++b) {
            auto [patch, local] = mesh.boundaryFaceLocation(b);
            const std::size_t cell = mesh.patches[patch].faceCells[local];
            s.phi.boundary[patch][local] -= pEqn.internalCoeffs[b] * s.p.data[cell] - pEqn.boundaryCoeffs[b];
        }
        CellField gradP = gaussGradient(s.p);
        for (std::size_t d = 0; d < 3; ++d)
            for (std::size_t i = 0; i < n; ++i) s.U(d, i) = HbyA(d, i) - rAU.data[i] * gradP(d, i);
        s.U.correctBoundary();
        rep.continuityResidual.push_back(continuityResidual(s, s.phi, dt));
        rep.velocityResidual.push_back(continuityResidual(s, massFlux(s.rho, s.U), dt));
        // A U - H(U) + grad p = H(U_prev) - H(U); the next corrector starts from this H.
        H = hOperator(UEqn, s.U);
        double worst = 0.0;
        for (std::size_t d = 0; d < 3; ++d)
            for (std::size_t i = 0; i < n; ++i)
                worst = std::max(worst, std::abs(HbyA(d, i) - H(d, i) * rAU.data[i]) / rAU.data[i]);
        rep.momentumResidual.push_back(worst);
    }
    return rep;
}

StepReport PisoSolver::advance(SimulationState& s, double dt) {
    const auto start = Clock::now();
    timings_ = {};
    StepReport rep;
    rep.dt = dt;
    {
        ScopedTimer t(timings_.discretisation);
        FaceField vol = s.phi;
        FaceField rf = interpolateLinear(s.rho);
        for (std::size_t f = 0; f < vol.data.size(); ++f) vol.data[f] /= rf.data[f];
        rep.maxCo = courantNumber(vol, *s.mesh, dt).maxCo;
    }
    stage("begin", [&] { beginStep(s, dt); });
    stage("species", [&] { speciesStep(s, dt); });
    stage("chemistry", [&] { chemistryStep(s, dt, &rep); });
    stage("energy", [&] { energyStep(s, dt); });
    stage("properties", [&] { updateProperties(s); });
    FvMatrix UEqn;
    stage("momentum", [&] { UEqn = momentumPredictor(s, dt); });
    PressureReport pr;
    stage("pressure", [&] { pr = pressureCorrect(s, UEqn, dt, config_.nCorrectors); });
    rep.continuityResidual = pr.continuityResidual.back();
    rep.pressureTolerance = pr.tolerance;
    rep.pressureIterations = pr.iterations;
    s.time += dt;
    ++s.step;
    rep.time = s.time;
    timings_.total = std::chrono::duration<double>(Clock::now() - start).count();
    rep.timings = timings_;
    return rep;
}

void writeTimingTable(std::ostream& os, const StageTimings& t, std::size_t steps) {
    const double per = steps ? 1.0 / static_cast<double>(steps) : 0.0;
    auto line = [&](const char* name, double v) {
        os << std::left << std::setw(16) << name << std::right << std::setw(14) << std::scientific
           << std::setprecision(6) << v << std::setw(14) << v * per << std::setw(10) << std::fixed
           << std::setprecision(1) << (t.total > 0.0 ? 100.0 * v / t.total : 0.0) << "\n";
    };
    os << std::left << std::setw(16) << "stage" << std::right << std::setw(14) << "seconds" << std::setw(14)
       << "per_step" << std::setw(10) << "percent" << "\n";
    line("discretisation", t.discretisation);
    line("linear_solve", t.linearSolve);
    line("chemistry", t.chemistry);
    line("thermo", t.thermo);
    line("sum", t.sum());
    line("total", t.total);
    os.unsetf(std::ios::floatfield);
}

} // namespace rflow
