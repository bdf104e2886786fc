#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace rflow {

/// Universal gas constant, J/(kmol K).
inline constexpr double kRu = 8314.46261815324;
/// Standard-state pressure for equilibrium constants, Pa.
inline constexpr double kPStandard = 101325.0;

/// Two-range NASA 7-coefficient fit. low applies on [Tlow, Tcommon].
struct Nasa7 {
    std::array<double, 7> low{};
    std::array<double, 7> high{};
    double Tlow = 200.0;
    double Tcommon = 1000.0;
    double Thigh = 3500.0;

    void validate(const std::string& owner) const;
};

/// Counts evaluations that fell outside the polynomial range and were clamped.
struct ThermoDiagnostics {
    std::size_t clampedEvaluations = 0;
    std::size_t bisectionFallbacks = 0;
};

double cpR(const Nasa7& c, double T, ThermoDiagnostics* diag = nullptr);
double hRT(const Nasa7& c, double T, ThermoDiagnostics* diag = nullptr);
double sR(const Nasa7& c, double T, ThermoDiagnostics* diag = nullptr);
/// g/RT = h/RT - s/R.
double gRT(const Nasa7& c, double T, ThermoDiagnostics* diag = nullptr);

struct TransportDef {
    enum class Kind { Sutherland, Constant };
    Kind kind = Kind::Sutherland;
    double As = 1.458e-6; ///< Pa s K^-1/2
    double Ts = 110.4;    ///< K
    double mu = 0.0;      ///< Pa s, constant model
};

struct SpeciesDef {
    std::string name;
    double W = 0.0; ///< kg/kmol
    Nasa7 thermo;
    TransportDef transport;
    double lewis = 1.0;
    std::map<std::string, double> elements; ///< atoms per molecule

    void validate() const;
};

double speciesViscosity(const SpeciesDef& s, double T);

/// Ideal-gas mixture of NASA-7 species with Sutherland/constant viscosity,
/// constant Prandtl number and per-species Lewis numbers. Mixture viscosity
/// is the mass-fraction-weighted species viscosity.
class Mixture {
public:
    Mixture() = default;
    explicit Mixture(std::vector<SpeciesDef> species, double prandtl = 0.71);

    std::size_t nSpecies() const { return species_.size(); }
    const SpeciesDef& species(std::size_t k) const { return species_[k]; }
    const std::vector<SpeciesDef>& allSpecies() const { return species_; }
    /// Index of a species by name; throws when absent.
    std::size_t index(const std::string& name) const;
    double prandtl() const { return prandtl_; }
    /// Common range of every species' fit.
    double Tmin() const { return Tmin_; }
    double Tmax() const { return Tmax_; }

    /// Throws when a mass fraction lies outside [0, 1] or the sum deviates from 1 by more than 1e-8.
    void checkY(std::span<const double> Y) const;

    double meanW(std::span<const double> Y) const;                  ///< kg/kmol
    double cp(double T, std::span<const double> Y, ThermoDiagnostics* d = nullptr) const; ///< J/(kg K)
    double h(double T, std::span<const double> Y, ThermoDiagnostics* d = nullptr) const;  ///< J/kg, absolute
    /// Species absolute enthalpies h_k(T), J/kg.
    void speciesH(double T, std::span<double> hk, ThermoDiagnostics* d = nullptr) const;
    double density(double p, double T, std::span<const double> Y) const;
    /// Compressibility W/(Ru T), so rho = psi p.
    double psi(double T, std::span<const double> Y) const;

    struct TSolve {
        double T = 0.0;
        int iterations = 0;
        bool bisection = false;
    };
    /// Newton inversion of h(T) = hTarget with a bisection fallback; throws
    /// when hTarget lies outside h over [Tmin, Tmax].
    TSolve solveT(double hTarget, std::span<const double> Y, double Tguess, ThermoDiagnostics* d = nullptr) const;
    double TfromH(double hTarget, double p, std::span<const double> Y, double Tguess,
                  ThermoDiagnostics* d = nullptr) const;

    double viscosity(double T, std::span<const double> Y) const;                  ///< Pa s
    double conductivity(double T, std::span<const double> Y) const;               ///< W/(m K), mu cp / Pr
    double diffusivity(double p, double T, std::span<const double> Y, std::size_t k) const; ///< m^2/s

private:
    std::vector<SpeciesDef> species_;
    double prandtl_ = 0.71;
    double Tmin_ = 0.0;
    double Tmax_ = 0.0;
};

} // namespace rflow
