#include "rflow/thermo.hpp"

#include "rflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rflow {

void Nasa7::validate(const std::string& owner) const {
    if (!(Tlow < Tcommon && Tcommon < Thigh)) {
        throw InvalidArgument("species " + owner + ": NASA-7 ranges need Tlow < Tcommon < Thigh");
    }
    for (double a : low)
        if (!std::isfinite(a)) throw InvalidArgument("species " + owner + ": non-finite NASA-7 coefficient");
    for (double a : high)
        if (!std::isfinite(a)) throw InvalidArgument("species " + owner + ": non-finite NASA-7 coefficient");
}

namespace {

const std::array<double, 7>& branch(const Nasa7& c, double& T, ThermoDiagnostics* diag) {
    if (T < c.Tlow || T > c.Thigh) {
        T = std::clamp(T, c.Tlow, c.Thigh);
        if (diag) ++diag->clampedEvaluations;
    }
    return T <= c.Tcommon ? c.low : c.high;
}

} // namespace

double cpR(const Nasa7& c, double T, ThermoDiagnostics* diag) {
    const auto& a = branch(c, T, diag);
    return a[0] + T * (a[1] + T * (a[2] + T * (a[3] + T * a[4])));
}

double hRT(const Nasa7& c, double T, ThermoDiagnostics* diag) {
    const auto& a = branch(c, T, diag);
    return a[0] + T * (a[1] / 2.0 + T * (a[2] / 3.0 + T * (a[3] / 4.0 + T * a[4] / 5.0))) + a[5] / T;
}

double sR(const Nasa7& c, double T, ThermoDiagnostics* diag) {
    const auto& a = branch(c, T, diag);
    return a[0] * std::log(T) + T * (a[1] + T * (a[2] / 2.0 + T * (a[3] / 3.0 + T * a[4] / 4.0))) + a[6];
}

double gRT(const Nasa7& c, double T, ThermoDiagnostics* diag) {
    return hRT(c, T, diag) - sR(c, T, nullptr);
}

void SpeciesDef::validate() const {
    if (name.empty()) throw InvalidArgument("species without a name");
    if (!(W > 0.0)) throw InvalidArgument("species " + name + ": molar mass must be positive");
    if (!(lewis > 0.0)) throw InvalidArgument("species " + name + ": Lewis number must be positive");
    thermo.validate(name);
    if (transport.kind == TransportDef::Kind::Constant) {
        if (!(transport.mu >= 0.0)) throw InvalidArgument("species " + name + ": negative viscosity");
    } else if (!(transport.As >= 0.0 && transport.Ts >= 0.0)) {
        throw InvalidArgument("species " + name + ": Sutherland constants must be non-negative");
    }
}

double speciesViscosity(const SpeciesDef& s, double T) {
    if (s.transport.kind == TransportDef::Kind::Constant) return s.transport.mu;
    return s.transport.As * std::sqrt(T) / (1.0 + s.transport.Ts / T);
}

Mixture::Mixture(std::vector<SpeciesDef> species, double prandtl) : species_(std::move(species)), prandtl_(prandtl) {
    if (species_.empty()) throw InvalidArgument("mixture needs at least one species");
    if (!(prandtl_ > 0.0)) throw InvalidArgument("Prandtl number must be positive");
    Tmin_ = -INFINITY;
    Tmax_ = INFINITY;
    for (std::size_t k = 0; k < species_.size(); ++k) {
        species_[k].validate();
        for (std::size_t j = 0; j < k; ++j)
            if (species_[j].name == species_[k].name) throw InvalidArgument("duplicate species " + species_[k].name);
        Tmin_ = std::max(Tmin_, species_[k].thermo.Tlow);
        Tmax_ = std::min(Tmax_, species_[k].thermo.Thigh);
    }
    if (!(Tmin_ < Tmax_)) throw InvalidArgument("species temperature ranges do not overlap");
}

std::size_t Mixture::index(const std::string& name) const {
    for (std::size_t k = 0; k < species_.size(); ++k)
        if (species_[k].name == name) return k;
    throw InvalidArgument("unknown species '" + name + "'");
}

void Mixture::checkY(std::span<const double> Y) const {
    if (Y.size() != species_.size()) throw InvalidArgument("mass fraction vector has the wrong length");
    double sum = 0.0;
    for (std::size_t k = 0; k < Y.size(); ++k) {
        if (!(Y[k] >= 0.0 && Y[k] <= 1.0)) {
            std::ostringstream os;
            os << "mass fraction of " << species_[k].name << " is " << Y[k];
            throw InvalidArgument(os.str());
        }
        sum += Y[k];
    }
    if (std::abs(sum - 1.0) > 1e-8) {
        std::ostringstream os;
        os.precision(17);
        os << "mass fractions sum to " << sum;
        throw InvalidArgument(os.str());
    }
}

double Mixture::meanW(std::span<const double> Y) const {
    double s = 0.0;
    for (std::size_t k = 0; k < species_.size(); ++k) s += Y[k] / species_[k].W;
    return 1.0 / s;
}

double Mixture::cp(double T, std::span<const double> Y, ThermoDiagnostics* d) const {
    double s = 0.0;
    for (std::size_t k = 0; k < species_.size(); ++k) s += Y[k] * cpR(species_[k].thermo, T, d) / species_[k].W;
    return kRu * s;
}

double Mixture::h(double T, std::span<const double> Y, ThermoDiagnostics* d) const {
    double s = 0.0;
    for (std::size_t k = 0; k < species_.size(); ++k) s += Y[k] * hRT(species_[k].thermo, T, d) / species_[k].W;
    return kRu * T * s;
}

void Mixture::speciesH(double T, std::span<double> hk, ThermoDiagnostics* d) const {
    for (std::size_t k = 0; k < species_.size(); ++k) hk[k] = kRu * T * hRT(species_[k].thermo, T, d) / species_[k].W;
}

double Mixture::density(double p, double T, std::span<const double> Y) const { return p * psi(T, Y); }

double Mixture::psi(double T, std::span<const double> Y) const { return meanW(Y) / (kRu * T); }

Mixture::TSolve Mixture::solveT(double hTarget, std::span<const double> Y, double Tguess, ThermoDiagnostics* d) const {
    constexpr double tolK = 1e-9;
    TSolve out;
    double T = std::isfinite(Tguess) ? std::clamp(Tguess, Tmin_, Tmax_) : 0.5 * (Tmin_ + Tmax_);
    for (int it = 0; it < 50; ++it) {
        double r = (hTarget - h(T, Y)) / cp(T, Y);
        if (!std::isfinite(r)) break;
        if (std::abs(r) < tolK) {
            out.T = T;
            return out;
        }
        T += r;
        ++out.iterations;
        if (T < Tmin_ || T > Tmax_) break;
    }
    // Bisection over the common range; h is monotone because cp > 0.
    double lo = Tmin_, hi = Tmax_;
    double hLo = h(lo, Y), hHi = h(hi, Y);
    double slack = 1e-12 * std::max({std::abs(hLo), std::abs(hHi), 1.0});
    if (hTarget < hLo - slack || hTarget > hHi + slack) {
        std::ostringstream os;
        os.precision(10);
        os << "enthalpy " << hTarget << " J/kg outside the range [" << hLo << ", " << hHi << "] reachable over ["
           << lo << ", " << hi << "] K";
        throw InvalidArgument(os.str());
    }
    if (d) ++d->bisectionFallbacks;
    out.bisection = true;
    for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
        double mid = 0.5 * (lo + hi);
        (h(mid, Y) < hTarget ? lo : hi) = mid;
    }
    // Polish with Newton inside the bracket.
    T = 0.5 * (lo + hi);
    for (int it = 0; it < 3; ++it) {
        double Tn = T + (hTarget - h(T, Y)) / cp(T, Y);
        if (Tn < Tmin_ || Tn > Tmax_) break;
        T = Tn;
    }
    out.T = T;
    return out;
}

double Mixture::TfromH(double hTarget, double, std::span<const double> Y, double Tguess, ThermoDiagnostics* d) const {
    return solveT(hTarget, Y, Tguess, d).T;
}

double Mixture::viscosity(double T, std::span<const double> Y) const {
    double mu = 0.0;
    for (std::size_t k = 0; k < species_.size(); ++k) mu += Y[k] * speciesViscosity(species_[k], T);
    return mu;
}

double Mixture::conductivity(double T, std::span<const double> Y) const {
    return viscosity(T, Y) * cp(T, Y) / prandtl_;
}

double Mixture::diffusivity(double p, double T, std::span<const double> Y, std::size_t k) const {
    return conductivity(T, Y) / (density(p, T, Y) * cp(T, Y) * species_[k].lewis);
}

} // namespace rflow
