#pragma once

#include "rflow/chemistry.hpp"
#include "rflow/mesh.hpp"
#include "rflow/piso.hpp"

#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace rflow {

// ---- mechanism files ------------------------------------------------------

/// Parses the mechanism text format: a [units] block, an optional [mixture]
/// block, one [species NAME] block per species and one [reaction] block per
/// reaction. Errors carry source:line:col.
Mechanism parseMechanismText(const std::string& text, const std::string& source = "<string>");
Mechanism parseMechanism(const std::string& path);
/// Canonical text in SI units (J/kmol, kmol-m3-s); parse of the result
/// reproduces the mechanism exactly.
std::string emitMechanism(const Mechanism& mech);

/// "2 H + M <=> H2 + M" style text of a reaction.
std::string reactionEquation(const Reaction& r, const Mixture& mix);

// ---- case files -----------------------------------------------------------

struct TgvInit {
    /// tgv2d drops the cos(z/L) factor and needs only x and y periodic.
    bool twoD = false;
    double u0 = 4.0;         ///< m/s
    double L = 1e-3;         ///< m; the box edge is 2 pi L
    double T = 300.0;        ///< K
    double p = 101325.0;     ///< Pa
    std::map<std::string, double> composition; ///< mass fractions, non-reactive
    bool reactive = false;
    /// Reactive variant: a fuel layer |y - pi L| < width pi L / 2 inside
    /// oxidizer, blended with tanh over thickness * L.
    std::map<std::string, double> fuel;
    std::map<std::string, double> oxidizer;
    double Tfuel = 0.0;      ///< K, defaults to T
    double Toxidizer = 0.0;  ///< K, defaults to T
    double width = 1.0;
    double thickness = 0.1;
};

struct CaseConfig {
    std::string source;  ///< path the case was read from
    std::string baseDir; ///< directory relative paths resolve against

    std::array<std::size_t, 3> dims{32, 32, 32};
    Vec3 lengths{};
    PatchSpec patches = PatchSpec::allPeriodic();

    double dt = 0.0;
    double endTime = 0.0;
    double maxCo = 1.0;
    std::size_t writeInterval = 0; ///< steps between outputs; 0 writes only the first and last state

    PisoConfig piso;

    std::string mechanismPath; ///< as written in the file
    std::string weightsPath;
    double trainingDt = 0.0;

    TgvInit init;

    std::string resolve(const std::string& path) const;
    /// Semantic checks; file references are checked when checkFiles.
    void validate(bool checkFiles = true) const;
    /// Box edge lengths for TGV cases follow from L when lengths are unset.
    Vec3 boxLengths() const;
    std::size_t stepCount() const;
};

CaseConfig parseCaseText(const std::string& text, const std::string& source = "<string>",
                         const std::string& baseDir = ".");
CaseConfig parseCase(const std::string& path);
std::string emitCase(const CaseConfig& c);

// ---- simulation -----------------------------------------------------------

/// Mechanism, mesh, solver and state of one case, ready to step.
class Simulation {
public:
    explicit Simulation(const CaseConfig& c);
    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    const CaseConfig& config() const { return config_; }
    const Mechanism& mechanism() const { return *mech_; }
    const Mesh& mesh() const { return *mesh_; }
    SimulationState& state() { return state_; }
    const SimulationState& state() const { return state_; }
    PisoSolver& solver() { return *solver_; }

    StepReport step(double dt);
    /// Reynolds number u0 L rho / mu from the initial mean state.
    double reynolds() const { return reynolds_; }

private:
    CaseConfig config_;
    std::unique_ptr<Mechanism> mech_;
    std::unique_ptr<Mesh> mesh_;
    std::unique_ptr<SurrogateBundle> bundle_;
    std::unique_ptr<PisoSolver> solver_;
    SimulationState state_;
    double reynolds_ = 0.0;
};

/// Taylor-Green velocity, uniform p and T; the reactive variant layers fuel
/// and oxidizer. Throws unless the mesh is periodic in every direction the
/// velocity depends on.
void initTgv(const Mesh& mesh, const Mixture& mix, const TgvInit& init, CellField& U, CellField& T, CellField& Y);

// ---- output ---------------------------------------------------------------

/// Legacy ASCII VTK, STRUCTURED_POINTS at cell centres: U, p, T, rho, h and
/// one Y_<name> per species, every value in shortest round-trip form.
void writeVtk(std::ostream& os, const SimulationState& s, const Mixture& mix, const std::string& title);
void writeVtk(const std::string& path, const SimulationState& s, const Mixture& mix, const std::string& title);

struct Diagnostics {
    double t = 0.0;
    double kineticEnergy = 0.0;
    double maxT = 0.0;
    double maxCo = 0.0;
    double continuityResidual = 0.0;
};

inline constexpr const char* kDiagnosticsHeader = "t,kinetic_energy,max_T,max_Co,continuity_residual";
void writeDiagnosticsRow(std::ostream& os, const Diagnostics& d);

struct RunOptions {
    std::string outputDir = ".";
    bool writeVtk = true;
    /// Called once per step with the step report.
    std::function<void(const StepReport&)> onStep;
};

struct RunResult {
    std::size_t steps = 0;
    std::vector<Diagnostics> history; ///< every step, including t = 0
    StageTimings timings;
};

/// Time loop to endTime. On a stage error the current state is written to
/// <outputDir>/failed.vtk before the error propagates.
RunResult run(Simulation& sim, const RunOptions& opt);

struct BenchReport {
    std::size_t steps = 0;
    std::size_t cells = 0;
    std::string chemistryMode;
    StageTimings total; ///< summed over steps

    double perStep(double v) const { return steps ? v / static_cast<double>(steps) : 0.0; }
    /// Everything except chemistry.
    double fluid() const { return total.discretisation + total.linearSolve + total.thermo; }
};

/// Runs steps without output and accumulates the stage timings.
BenchReport bench(Simulation& sim, std::size_t steps);

/// Stage table followed by the sum/chemistry/fluid split, seconds per step.
void writeBenchReport(std::ostream& os, const BenchReport& r);

} // namespace rflow
