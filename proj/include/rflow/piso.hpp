#pragma once

#include "rflow/chemistry.hpp"
#include "rflow/field.hpp"
#include "rflow/fvm.hpp"
#include "rflow/surrogate.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace rflow {

enum class ChemistryMode { None, Ode, Surrogate };

const char* toString(ChemistryMode m);
ChemistryMode chemistryModeFromString(const std::string& s);

struct PisoConfig {
    int nCorrectors = 2;
    bool momentumPredictor = true;
    double maxCo = 1.0;
    ChemistryMode chemistryMode = ChemistryMode::None;
    DdtScheme ddt = DdtScheme::Euler;
    DivScheme divMomentum = DivScheme::Linear;
    DivScheme divScalar = DivScheme::Upwind;
    /// Pressure tolerance is absolute, on the continuity residual in kg/s.
    SolverControls pressure{1e-12, 0.0, 1000, SolverKind::AmgPcg};
    /// For momentum and scalars relTol is relative to the right-hand side norm.
    SolverControls momentum{0.0, 1e-12, 1000, SolverKind::BiCgStab};
    SolverControls scalar{0.0, 1e-12, 1000, SolverKind::BiCgStab};
    /// Explicit d(pThermo)/dt source in the energy equation.
    bool dpdt = false;
    ChemTolerances chemistry{};
    unsigned chemistryWorkers = 1;

    void validate() const;
};

/// Low-Mach state: the pressure is split into a uniform thermodynamic part
/// pThermo, which closes the equation of state, and the dynamic field p of
/// the momentum equation. rho always equals psi(T, Y) pThermo between steps.
/// rhoT is the density that explicit continuity predicts from the previous
/// flux; the transport equations use it in their time derivatives.
struct SimulationState {
    const Mesh* mesh = nullptr;
    CellField U, p, Y, h, T, rho, rhoT;
    FaceField phi; ///< mass flux, kg/s
    double pThermo = 0.0;
    double pThermoOld = 0.0;
    double mass = 0.0; ///< sum rho V, held fixed on closed domains
    double time = 0.0;
    std::size_t step = 0;

    CellField mu, alpha;   ///< viscosity and lambda / cp
    CellField rhoD;        ///< rho D_k, one component per species

    CellField rhoOld, UOld, YOld, hOld;
    CellField rhoOldOld, UOldOld, YOldOld, hOldOld;
    bool hasOldOld = false;
};

/// Wall-clock seconds per stage category of one step.
struct StageTimings {
    double discretisation = 0.0;
    double linearSolve = 0.0;
    double chemistry = 0.0;
    double thermo = 0.0;
    double total = 0.0;

    double sum() const { return discretisation + linearSolve + chemistry + thermo; }
    StageTimings& operator+=(const StageTimings& o);
};

struct PressureReport {
    /// max |d rho/dt + div phi| V over cells after each corrector, kg/s.
    std::vector<double> continuityResidual;
    /// Same measure for the flux re-interpolated from the corrected cell
    /// velocity, the field the next corrector starts from.
    std::vector<double> velocityResidual;
    /// max |A U - H(U) + grad p| over cells and components after each
    /// corrector; the quantity the corrector loop drives to zero.
    std::vector<double> momentumResidual;
    std::size_t iterations = 0;
    double tolerance = 0.0;
};

struct StepReport {
    double time = 0.0;
    double dt = 0.0;
    double maxCo = 0.0;
    double continuityResidual = 0.0;
    double pressureTolerance = 0.0;
    std::size_t pressureIterations = 0;
    ChemStats chemistry;
    SurrogateDiagnostics surrogate;
    StageTimings timings;
};

/// Volume-weighted mean of |U|^2 / 2.
double kineticEnergy(const SimulationState& s);
double maxTemperature(const SimulationState& s);

/// Cell field whose non-periodic patches are all zeroGradient.
CellField propertyField(const Mesh& mesh, std::size_t nComp, const std::string& name, double value = 0.0);

class PisoSolver {
public:
    PisoSolver(const Mechanism& mech, PisoConfig config, const SurrogateBundle* bundle = nullptr,
               double trainingDt = 0.0);

    const PisoConfig& config() const { return config_; }
    const Mechanism& mechanism() const { return mech_; }

    /// Builds a state from U, T and Y (their closures carry the boundary
    /// conditions) at thermodynamic pressure pThermo. The dynamic pressure
    /// starts at zero; fixedValue T patches become fixedValue h patches.
    SimulationState initialState(const CellField& U, const CellField& T, const CellField& Y, double pThermo) const;

    /// species, chemistry, energy, properties, momentum, pressure.
    StepReport advance(SimulationState& s, double dt);

    /// Rotates the old levels and predicts rhoT from the current flux.
    void beginStep(SimulationState& s, double dt);
    void speciesStep(SimulationState& s, double dt);
    void chemistryStep(SimulationState& s, double dt, StepReport* report = nullptr);
    void energyStep(SimulationState& s, double dt);
    /// T already follows h; updates pThermo, rho and the transport properties.
    void updateProperties(SimulationState& s);
    /// Momentum matrix without the pressure gradient; solves UEqn = -grad p
    /// when the momentum predictor is enabled.
    FvMatrix momentumPredictor(SimulationState& s, double dt);
    PressureReport pressureCorrect(SimulationState& s, const FvMatrix& UEqn, double dt, int nCorrectors);

    /// (c0 rho + c1 rhoOld + c2 rhoOldOld) / dt with the coefficients of the
    /// time scheme in effect for this step.
    CellField ddtRho(const SimulationState& s, const CellField& rhoNew, double dt) const;
    double continuityResidual(const SimulationState& s, const FaceField& phi, double dt) const;

    const StageTimings& timings() const { return timings_; }

private:
    std::array<double, 3> ddtCoeffs(const SimulationState& s) const;
    TimeLevels levels(const CellField& rhoOld, const CellField& psiOld, const CellField* rhoOldOld,
                      const CellField* psiOldOld) const;
    FaceField massFlux(const CellField& rho, const CellField& U) const;

    const Mechanism& mech_;
    PisoConfig config_;
    const SurrogateBundle* bundle_ = nullptr;
    double trainingDt_ = 0.0;
    StageTimings timings_;
};

/// One line per stage, then the sum and the measured total.
void writeTimingTable(std::ostream& os, const StageTimings& t, std::size_t steps);

} // namespace rflow
