#pragma once

#include "rflow/field.hpp"
#include "rflow/thermo.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace rflow {

struct StoichTerm {
    std::size_t species = 0;
    double nu = 1.0;
};

/// Elementary reaction with modified Arrhenius rate in kmol, m^3, s units.
/// Rates use the stoichiometric coefficients as reaction orders.
struct Reaction {
    std::string label;
    std::vector<StoichTerm> reactants;
    std::vector<StoichTerm> products;
    double A = 0.0;
    double beta = 0.0;
    double Ea = 0.0; ///< J/kmol
    bool reversible = false;
    bool thirdBody = false;
    std::vector<double> efficiencies; ///< per species, used when thirdBody

    double deltaNu() const;
};

class Mechanism {
public:
    Mechanism() = default;
    Mechanism(Mixture mixture, std::vector<Reaction> reactions, std::vector<std::size_t> inert = {});

    const Mixture& mixture() const { return mixture_; }
    const std::vector<Reaction>& reactions() const { return reactions_; }
    const std::vector<std::size_t>& inert() const { return inert_; }
    bool isInert(std::size_t k) const;
    std::size_t nSpecies() const { return mixture_.nSpecies(); }

    /// Sorted element symbols over all species.
    const std::vector<std::string>& elements() const { return elements_; }
    /// Atoms of element e per kg of mixture with mass fractions Y, kmol/kg.
    std::vector<double> elementMoles(std::span<const double> Y) const;

private:
    void validate();

    Mixture mixture_;
    std::vector<Reaction> reactions_;
    std::vector<std::size_t> inert_;
    std::vector<std::string> elements_;
};

double rateForward(const Reaction& r, double T);
/// Kc from Kp = exp(-dG/RuT) at the standard pressure, in kmol/m^3 units.
double equilibriumKc(const Reaction& r, const Mixture& mix, double T);

struct KineticsDiagnostics {
    std::size_t clippedConcentrations = 0;
    double maxClippedY = 0.0; ///< largest |Y| of a negative mass fraction clipped for rate evaluation
};

/// Net molar production rates, kmol/(m^3 s). Negative concentrations are
/// clipped to zero for the rate evaluation.
void productionRates(const Mechanism& mech, double p, double T, std::span<const double> Y, std::span<double> wdot,
                     KineticsDiagnostics* diag = nullptr);

/// Constant-pressure adiabatic reactor: dY_k/dt = wdot_k W_k / rho,
/// dT/dt = -sum_k h_k wdot_k W_k / (rho cp).
void reactorRhs(const Mechanism& mech, double p, double T, std::span<const double> Y, std::span<double> dYdt,
                double& dTdt, KineticsDiagnostics* diag = nullptr);

struct ChemTolerances {
    double absTol = 1e-10;
    double relTol = 1e-6;
    double minStep = 1e-16;    ///< s, substep floor
    std::size_t maxSubsteps = 1000000;
    int maxNewton = 10;

    void validate() const;
};

struct ChemStats {
    std::size_t substeps = 0;
    std::size_t rejected = 0;
    std::size_t newtonFailures = 0;
    std::size_t newtonIterations = 0;
    std::size_t jacobians = 0;
    std::size_t clipped = 0;

    ChemStats& operator+=(const ChemStats& o);
};

/// Advances (T, Y) of one cell over dt at constant p and constant absolute
/// enthalpy: implicit-Euler substeps with a finite-difference Jacobian,
/// step-doubling error control and local extrapolation. T is recovered from
/// the conserved enthalpy after every substep, and each accepted state is
/// projected back onto the initial sum and element moles. Throws
/// ConvergenceError with a state dump when the substep floor is reached.
void integrateCell(const Mechanism& mech, double p, double& T, std::span<double> Y, double dt,
                   const ChemTolerances& tol = {}, ChemStats* stats = nullptr);

/// integrateCell over every cell of (T, Y) with uniform pressure. Cells are
/// independent; `workers` > 1 splits them into contiguous blocks.
ChemStats integrateField(const Mechanism& mech, double p, CellField& T, CellField& Y, double dt,
                         const ChemTolerances& tol = {}, unsigned workers = 1);

struct SamplerConfig {
    double Tmin = 900.0;
    double Tmax = 1500.0;
    double p = 101325.0;
    std::uint64_t seed = 1;
};

/// Columns: T, p, Y_1..Y_n, rate_1..rate_n with rate = (Y(dt) - Y(0)) / dt.
struct SampleTable {
    std::vector<std::string> species;
    std::vector<std::vector<double>> rows;

    std::size_t nColumns() const { return 2 + 2 * species.size(); }
    std::vector<std::string> header() const;
};

/// Draws T uniformly in [Tmin, Tmax] and Y from a flat Dirichlet over the
/// reacting species plus one slot shared evenly by the inert species, then
/// integrates each state over dt.
SampleTable generateSamples(const Mechanism& mech, const SamplerConfig& sampler, double dt, std::size_t n,
                            const ChemTolerances& tol = {});

void writeSampleTable(std::ostream& os, const SampleTable& t);
SampleTable readSampleTable(std::istream& is, const std::string& source = "<stream>");
void writeSampleTable(const std::string& path, const SampleTable& t);
SampleTable readSampleTable(const std::string& path);

} // namespace rflow
