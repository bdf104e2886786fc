#include "rflow/chemistry.hpp"

#include "rflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace rflow {

double Reaction::deltaNu() const {
    double d = 0.0;
    for (const auto& t : products) d += t.nu;
    for (const auto& t : reactants) d -= t.nu;
    return d;
}

Mechanism::Mechanism(Mixture mixture, std::vector<Reaction> reactions, std::vector<std::size_t> inert)
    : mixture_(std::move(mixture)), reactions_(std::move(reactions)), inert_(std::move(inert)) {
    validate();
}

bool Mechanism::isInert(std::size_t k) const { return std::find(inert_.begin(), inert_.end(), k) != inert_.end(); }

void Mechanism::validate() {
    const std::size_t n = mixture_.nSpecies();
    std::set<std::string> el;
    for (const auto& s : mixture_.allSpecies())
        for (const auto& [e, c] : s.elements) {
            if (c < 0.0) throw InvalidArgument("species " + s.name + ": negative atom count for " + e);
            el.insert(e);
        }
    elements_.assign(el.begin(), el.end());
    for (std::size_t k : inert_)
        if (k >= n) throw InvalidArgument("inert species index out of range");
    for (const Reaction& r : reactions_) {
        const std::string tag = "reaction '" + r.label + "'";
        if (!(r.A > 0.0)) throw InvalidArgument(tag + ": pre-exponential factor must be positive");
        if (r.reactants.empty() || r.products.empty()) throw InvalidArgument(tag + ": needs reactants and products");
        for (const auto* side : {&r.reactants, &r.products})
            for (const auto& t : *side) {
                if (t.species >= n) throw InvalidArgument(tag + ": species index out of range");
                if (!(t.nu > 0.0)) throw InvalidArgument(tag + ": stoichiometric coefficients must be positive");
                if (isInert(t.species))
                    throw InvalidArgument(tag + ": inert species " + mixture_.species(t.species).name + " reacts");
            }
        if (r.thirdBody && r.efficiencies.size() != n) throw InvalidArgument(tag + ": efficiencies need one entry per species");
        for (const std::string& e : elements_) {
            double bal = 0.0, scale = 0.0;
            for (const auto& t : r.products) {
                auto it = mixture_.species(t.species).elements.find(e);
                if (it != mixture_.species(t.species).elements.end()) bal += t.nu * it->second, scale += t.nu * it->second;
            }
            for (const auto& t : r.reactants) {
                auto it = mixture_.species(t.species).elements.find(e);
                if (it != mixture_.species(t.species).elements.end()) bal -= t.nu * it->second, scale += t.nu * it->second;
            }
            if (std::abs(bal) > 1e-12 * std::max(1.0, scale)) {
                std::ostringstream os;
                os << tag << ": element " << e << " unbalanced by " << bal << " atoms";
                throw InvalidArgument(os.str());
            }
        }
    }
}

std::vector<double> Mechanism::elementMoles(std::span<const double> Y) const {
    std::vector<double> out(elements_.size(), 0.0);
    for (std::size_t e = 0; e < elements_.size(); ++e)
        for (std::size_t k = 0; k < nSpecies(); ++k) {
            const auto& s = mixture_.species(k);
            auto it = s.elements.find(elements_[e]);
            if (it != s.elements.end()) out[e] += it->second * Y[k] / s.W;
        }
    return out;
}

double rateForward(const Reaction& r, double T) {
    double k = r.A;
    if (r.beta != 0.0) k *= std::pow(T, r.beta);
    if (r.Ea != 0.0) k *= std::exp(-r.Ea / (kRu * T));
    return k;
}

double equilibriumKc(const Reaction& r, const Mixture& mix, double T) {
    double dG = 0.0;
    for (const auto& t : r.products) dG += t.nu * gRT(mix.species(t.species).thermo, T);
    for (const auto& t : r.reactants) dG -= t.nu * gRT(mix.species(t.species).thermo, T);
    double Kc = std::exp(-dG);
    double dn = r.deltaNu();
    if (dn != 0.0) Kc *= std::pow(kPStandard / (kRu * T), dn);
    return Kc;
}

namespace {

double concentrationProduct(const std::vector<StoichTerm>& side, std::span<const double> C) {
    double q = 1.0;
    for (const auto& t : side) {
        double c = C[t.species];
        q *= t.nu == 1.0 ? c : t.nu == 2.0 ? c * c : std::pow(c, t.nu);
    }
    return q;
}

} // namespace

void productionRates(const Mechanism& mech, double p, double T, std::span<const double> Y, std::span<double> wdot,
                     KineticsDiagnostics* diag) {
    const Mixture& mix = mech.mixture();
    const std::size_t n = mix.nSpecies();
    thread_local std::vector<double> scratch;
    scratch.resize(2 * n);
    double* y = scratch.data();
    double* C = y + n;
    for (std::size_t k = 0; k < n; ++k) {
        y[k] = Y[k];
        if (y[k] < 0.0) {
            if (diag) {
                ++diag->clippedConcentrations;
                diag->maxClippedY = std::max(diag->maxClippedY, -y[k]);
            }
            y[k] = 0.0;
        }
    }
    std::span<const double> ys(y, n);
    const double rho = mix.density(p, T, ys);
    for (std::size_t k = 0; k < n; ++k) C[k] = rho * y[k] / mix.species(k).W;
    std::span<const double> Cs(C, n);
    for (std::size_t k = 0; k < n; ++k) wdot[k] = 0.0;
    for (const Reaction& r : mech.reactions()) {
        double kf = rateForward(r, T);
        double q = kf * concentrationProduct(r.reactants, Cs);
        if (r.reversible) q -= kf / equilibriumKc(r, mix, T) * concentrationProduct(r.products, Cs);
        if (r.thirdBody) {
            double M = 0.0;
            for (std::size_t k = 0; k < n; ++k) M += r.efficiencies[k] * C[k];
            q *= M;
        }
        for (const auto& t : r.reactants) wdot[t.species] -= t.nu * q;
        for (const auto& t : r.products) wdot[t.species] += t.nu * q;
    }
}

void reactorRhs(const Mechanism& mech, double p, double T, std::span<const double> Y, std::span<double> dYdt,
                double& dTdt, KineticsDiagnostics* diag) {
    const Mixture& mix = mech.mixture();
    const std::size_t n = mix.nSpecies();
    thread_local std::vector<double> hk, Yc;
    hk.resize(n);
    productionRates(mech, p, T, Y, dYdt, diag);
    Yc.assign(Y.begin(), Y.end());
    for (double& v : Yc) v = std::max(v, 0.0);
    const double rho = mix.density(p, T, Yc);
    mix.speciesH(T, hk);
    double q = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        dYdt[k] *= mix.species(k).W / rho;
        q += hk[k] * dYdt[k];
    }
    dTdt = -q / mix.cp(T, Yc);
}

void ChemTolerances::validate() const {
    if (!(absTol > 0.0) || !(relTol > 0.0)) throw InvalidArgument("chemistry tolerances must be positive");
    if (!(minStep > 0.0)) throw InvalidArgument("chemistry minStep must be positive");
    if (maxSubsteps < 1 || maxNewton < 1) throw InvalidArgument("chemistry iteration limits must be >= 1");
}

ChemStats& ChemStats::operator+=(const ChemStats& o) {
    substeps += o.substeps;
    rejected += o.rejected;
    newtonFailures += o.newtonFailures;
    newtonIterations += o.newtonIterations;
    jacobians += o.jacobians;
    clipped += o.clipped;
    return *this;
}

namespace {

// State vector y = (Y_1..Y_n, T).
class Reactor {
public:
    Reactor(const Mechanism& mech, double p, const ChemTolerances& tol, ChemStats& stats)
        : mech_(mech), p_(p), tol_(tol), stats_(stats), n_(mech.nSpecies()), m_(n_ + 1), f_(m_), jac_(m_ * m_),
          lu_(m_ * m_), piv_(m_), work_(m_), g_(m_), dy_(m_) {}

    void rhs(const std::vector<double>& y, std::vector<double>& f) {
        KineticsDiagnostics d;
        double dT = 0.0;
        reactorRhs(mech_, p_, y[n_], std::span<const double>(y.data(), n_), std::span<double>(f.data(), n_), dT, &d);
        f[n_] = dT;
        stats_.clipped += d.clippedConcentrations;
    }

    void jacobian(const std::vector<double>& y) {
        ++stats_.jacobians;
        rhs(y, f_);
        std::vector<double> yp = y, fp(m_);
        for (std::size_t j = 0; j < m_; ++j) {
            double scale = j < n_ ? std::max(std::abs(y[j]), 1e-6) : std::abs(y[j]);
            double h = 1.5e-8 * scale;
            yp[j] = y[j] + h;
            h = yp[j] - y[j];
            rhs(yp, fp);
            for (std::size_t i = 0; i < m_; ++i) jac_[i * m_ + j] = (fp[i] - f_[i]) / h;
            yp[j] = y[j];
        }
    }

    // Factor I - h J; false when singular.
    bool factor(double h) {
        for (std::size_t i = 0; i < m_; ++i)
            for (std::size_t j = 0; j < m_; ++j) lu_[i * m_ + j] = (i == j ? 1.0 : 0.0) - h * jac_[i * m_ + j];
        for (std::size_t k = 0; k < m_; ++k) {
            std::size_t p = k;
            for (std::size_t i = k + 1; i < m_; ++i)
                if (std::abs(lu_[i * m_ + k]) > std::abs(lu_[p * m_ + k])) p = i;
            piv_[k] = p;
            if (lu_[p * m_ + k] == 0.0 || !std::isfinite(lu_[p * m_ + k])) return false;
            if (p != k)
                for (std::size_t j = 0; j < m_; ++j) std::swap(lu_[k * m_ + j], lu_[p * m_ + j]);
            for (std::size_t i = k + 1; i < m_; ++i) {
                double f = lu_[i * m_ + k] /= lu_[k * m_ + k];
                for (std::size_t j = k + 1; j < m_; ++j) lu_[i * m_ + j] -= f * lu_[k * m_ + j];
            }
        }
        return true;
    }

    void luSolve(std::vector<double>& b) {
        for (std::size_t k = 0; k < m_; ++k) {
            std::swap(b[k], b[piv_[k]]);
            for (std::size_t i = k + 1; i < m_; ++i) b[i] -= lu_[i * m_ + k] * b[k];
        }
        for (std::size_t i = m_; i-- > 0;) {
            double s = b[i];
            for (std::size_t j = i + 1; j < m_; ++j) s -= lu_[i * m_ + j] * b[j];
            b[i] = s / lu_[i * m_ + i];
        }
    }

    double weight(double a, double b) const { return tol_.absTol + tol_.relTol * std::max(std::abs(a), std::abs(b)); }

    // One implicit-Euler step y = y0 + h f(y), starting from the Jacobian held
    // in jac_ and refreshing it at the iterate when Newton contracts slowly.
    bool implicitEuler(const std::vector<double>& y0, double h, std::vector<double>& y) {
        if (!factor(h)) return false;
        y = y0;
        double prev = INFINITY;
        for (int it = 0; it < tol_.maxNewton; ++it) {
            ++stats_.newtonIterations;
            rhs(y, work_);
            for (std::size_t i = 0; i < m_; ++i) g_[i] = y0[i] + h * work_[i] - y[i];
            luSolve(g_);
            // Damp the update so fractions stop at zero and T moves at most 10 %;
            // a scaled step keeps the linear invariants.
            double lambda = 1.0;
            for (std::size_t i = 0; i < n_; ++i)
                if (y[i] + g_[i] < -tol_.absTol && y[i] > 0.0) lambda = std::min(lambda, 0.9 * y[i] / -g_[i]);
            if (std::abs(g_[n_]) > 0.1 * y[n_]) lambda = std::min(lambda, 0.1 * y[n_] / std::abs(g_[n_]));
            double norm = 0.0;
            for (std::size_t i = 0; i < m_; ++i) {
                norm = std::max(norm, std::abs(g_[i]) / weight(y[i] + g_[i], y0[i]));
                y[i] += lambda * g_[i];
                if (!std::isfinite(y[i])) return false;
            }
            if (y[n_] <= 0.0) return false;
            if (norm < 0.1 && lambda == 1.0) return true;
            if (norm > 0.3 * prev) {
                jacobian(y);
                if (!factor(h)) return false;
            }
            prev = norm;
        }
        return false;
    }

    void saveJacobian() { saved_ = jac_; }
    void restoreJacobian() { jac_ = saved_; }

private:
    const Mechanism& mech_;
    double p_;
    const ChemTolerances& tol_;
    ChemStats& stats_;
    std::size_t n_, m_;
    std::vector<double> f_, jac_, lu_;
    std::vector<std::size_t> piv_;
    std::vector<double> work_, g_, dy_, saved_;
};

std::span<const double> clippedY(const std::vector<double>& y, std::size_t n) {
    thread_local std::vector<double> c;
    c.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n));
    for (double& v : c) v = std::max(v, 0.0);
    return c;
}

// Orthonormal basis of the linear invariants (sum of mass fractions and
// element moles) restricted to the reacting species.
class InvariantProjector {
public:
    explicit InvariantProjector(const Mechanism& mech) : n_(mech.nSpecies()) {
        std::vector<std::vector<double>> rows(1, std::vector<double>(n_, 0.0));
        for (std::size_t k = 0; k < n_; ++k) rows[0][k] = mech.isInert(k) ? 0.0 : 1.0;
        for (const std::string& e : mech.elements()) {
            std::vector<double> r(n_, 0.0);
            for (std::size_t k = 0; k < n_; ++k) {
                const SpeciesDef& sp = mech.mixture().species(k);
                auto it = sp.elements.find(e);
                if (!mech.isInert(k) && it != sp.elements.end()) r[k] = it->second / sp.W;
            }
            rows.push_back(std::move(r));
        }
        for (auto& r : rows) {
            double n0 = std::sqrt(dot(r, r));
            if (n0 == 0.0) continue;
            for (const auto& q : basis_) {
                double c = dot(q, r);
                for (std::size_t k = 0; k < n_; ++k) r[k] -= c * q[k];
            }
            double n1 = std::sqrt(dot(r, r));
            if (n1 <= 1e-10 * n0) continue;
            for (double& v : r) v /= n1;
            basis_.push_back(std::move(r));
        }
    }

    // Restores the invariants of ref in y[0..n) by an orthogonal correction.
    void project(std::span<double> y, std::span<const double> ref) const {
        for (const auto& q : basis_) {
            double c = 0.0;
            for (std::size_t k = 0; k < n_; ++k) c += q[k] * (y[k] - ref[k]);
            for (std::size_t k = 0; k < n_; ++k) y[k] -= c * q[k];
        }
    }

private:
    static double dot(const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
        return s;
    }

    std::size_t n_;
    std::vector<std::vector<double>> basis_;
};

std::string stateDump(const Mechanism& mech, double p, double T, std::span<const double> Y) {
    std::ostringstream os;
    os << std::setprecision(17) << "p = " << p << " Pa, T = " << T << " K";
    for (std::size_t k = 0; k < Y.size(); ++k) os << ", Y_" << mech.mixture().species(k).name << " = " << Y[k];
    return os.str();
}

} // namespace

void integrateCell(const Mechanism& mech, double p, double& T, std::span<double> Y, double dt,
                   const ChemTolerances& tol, ChemStats* statsOut) {
    if (!(dt > 0.0)) throw InvalidArgument("integrateCell: dt must be positive");
    if (Y.size() != mech.nSpecies()) throw InvalidArgument("integrateCell: mass fraction vector has the wrong length");
    if (mech.reactions().empty()) return;
    ChemStats stats;
    const Mixture& mix = mech.mixture();
    const std::size_t n = mech.nSpecies();
    const double h0 = mix.h(T, Y);
    Reactor reactor(mech, p, tol, stats);
    const InvariantProjector projector(mech);

    std::vector<double> y(n + 1), yFull(n + 1), yHalf(n + 1), yTwo(n + 1);
    std::copy(Y.begin(), Y.end(), y.begin());
    y[n] = T;
    const std::vector<double> yStart = y;
    double t = 0.0, h = dt;
    bool hold = false;
    while (t < dt) {
        if (stats.substeps + stats.rejected >= tol.maxSubsteps) {
            throw ConvergenceError("chemistry: substep limit reached at t = " + std::to_string(t) + " of " +
                                   std::to_string(dt) + " s; " + stateDump(mech, p, y[n], std::span(y.data(), n)));
        }
        h = std::min(h, dt - t);
        bool last = h >= dt - t;
        reactor.jacobian(y);
        reactor.saveJacobian();
        bool ok = reactor.implicitEuler(y, h, yFull);
        if (ok) {
            reactor.restoreJacobian();
            ok = reactor.implicitEuler(y, 0.5 * h, yHalf);
        }
        if (ok) {
            reactor.jacobian(yHalf);
            ok = reactor.implicitEuler(yHalf, 0.5 * h, yTwo);
        }
        double err = INFINITY;
        if (ok) {
            err = 0.0;
            for (std::size_t i = 0; i <= n; ++i) err = std::max(err, std::abs(yTwo[i] - yFull[i]) / reactor.weight(y[i], yTwo[i]));
        }
        if (!ok || err > 1.0) {
            ++stats.rejected;
            if (!ok) ++stats.newtonFailures;
            hold = !ok;
            h *= ok ? std::max(0.2, 0.9 / std::sqrt(err)) : 0.25;
            if (h < tol.minStep) {
                std::ostringstream os;
                os << "chemistry: step size " << h << " s below the floor " << tol.minStep << " s at t = " << t
                   << "; " << stateDump(mech, p, y[n], std::span(y.data(), n));
                if (statsOut) *statsOut += stats;
                throw ConvergenceError(os.str());
            }
            continue;
        }
        ++stats.substeps;
        // Tolerance-sized negative fractions are carried internally (rates clip
        // them) so the linear invariants stay exact; they are clipped at exit.
        // Extrapolation that overshoots below -absTol falls back to the two half steps.
        bool overshoot = false;
        for (std::size_t k = 0; k < n; ++k) overshoot |= 2.0 * yTwo[k] - yFull[k] < -tol.absTol;
        for (std::size_t i = 0; i <= n; ++i) y[i] = overshoot ? yTwo[i] : 2.0 * yTwo[i] - yFull[i];
        projector.project(std::span(y.data(), n), std::span(yStart.data(), n));
        y[n] = mix.TfromH(h0, p, clippedY(y, n), y[n]);
        t = last ? dt : t + h;
        h *= std::min(hold ? 1.0 : 4.0, 0.9 / std::sqrt(std::max(err, 1e-10)));
        hold = false;
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) sum += (y[k] = std::max(0.0, y[k]));
    double sum0 = 0.0;
    for (std::size_t k = 0; k < n; ++k) sum0 += yStart[k];
    if (std::abs(sum - sum0) > 1e-8) {
        if (statsOut) *statsOut += stats;
        throw ConvergenceError("chemistry: mass fraction sum drifted by " + std::to_string(sum - sum0) + "; " +
                               stateDump(mech, p, y[n], std::span(y.data(), n)));
    }
    // Renormalise over the reacting species only so inert fractions stay bitwise unchanged.
    double inertSum = 0.0, reactSum = 0.0;
    for (std::size_t k = 0; k < n; ++k) (mech.isInert(k) ? inertSum : reactSum) += y[k];
    double scale = reactSum > 0.0 ? (sum0 - inertSum) / reactSum : 1.0;
    for (std::size_t k = 0; k < n; ++k) Y[k] = mech.isInert(k) ? y[k] : y[k] * scale;
    T = mix.TfromH(h0, p, Y, y[n]);
    if (statsOut) *statsOut += stats;
}

ChemStats integrateField(const Mechanism& mech, double p, CellField& T, CellField& Y, double dt,
                         const ChemTolerances& tol, unsigned workers) {
    const std::size_t nc = T.nCells();
    const std::size_t ns = mech.nSpecies();
    if (Y.nComponents != ns || Y.nCells() != nc || T.nComponents != 1) {
        throw InvalidArgument("integrateField: fields do not match the mechanism");
    }
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(nc, 1))));
    std::vector<ChemStats> stats(workers);
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::size_t> failedCell(workers, nc);
    auto block = [&](unsigned w) {
        std::size_t begin = nc * w / workers, end = nc * (w + 1) / workers;
        std::vector<double> y(ns);
        for (std::size_t c = begin; c < end; ++c) {
            for (std::size_t k = 0; k < ns; ++k) y[k] = Y(k, c);
            try {
                integrateCell(mech, p, T.data[c], y, dt, tol, &stats[w]);
            } catch (...) {
                errors[w] = std::current_exception();
                failedCell[w] = c;
                return;
            }
            for (std::size_t k = 0; k < ns; ++k) Y(k, c) = y[k];
        }
    };
    if (workers == 1) {
        block(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(block, w);
        for (auto& th : pool) th.join();
    }
    ChemStats total;
    for (const auto& s : stats) total += s;
    for (unsigned w = 0; w < workers; ++w) {
        if (!errors[w]) continue;
        try {
            std::rethrow_exception(errors[w]);
        } catch (const Error& e) {
            throw ConvergenceError("cell " + std::to_string(failedCell[w]) + ": " + e.what());
        }
    }
    return total;
}

std::vector<std::string> SampleTable::header() const {
    std::vector<std::string> h{"T", "p"};
    for (const auto& s : species) h.push_back("Y_" + s);
    for (const auto& s : species) h.push_back("rate_" + s);
    return h;
}

SampleTable generateSamples(const Mechanism& mech, const SamplerConfig& sampler, double dt, std::size_t n,
                            const ChemTolerances& tol) {
    if (!(sampler.Tmin > 0.0 && sampler.Tmin <= sampler.Tmax)) throw InvalidArgument("sampler: need 0 < Tmin <= Tmax");
    if (!(sampler.p > 0.0)) throw InvalidArgument("sampler: pressure must be positive");
    if (!(dt > 0.0)) throw InvalidArgument("sampler: dt must be positive");
    const std::size_t ns = mech.nSpecies();
    SampleTable table;
    for (std::size_t k = 0; k < ns; ++k) table.species.push_back(mech.mixture().species(k).name);
    std::vector<std::size_t> reacting;
    for (std::size_t k = 0; k < ns; ++k)
        if (!mech.isInert(k)) reacting.push_back(k);
    const std::size_t slots = reacting.size() + (mech.inert().empty() ? 0 : 1);
    std::mt19937_64 rng(sampler.seed);
    std::uniform_real_distribution<double> uT(sampler.Tmin, sampler.Tmax);
    std::exponential_distribution<double> expo(1.0);
    table.rows.reserve(n);
    std::vector<double> g(slots), Y0(ns), Y(ns);
    for (std::size_t s = 0; s < n; ++s) {
        double T0 = uT(rng);
        double sum = 0.0;
        for (double& v : g) sum += (v = expo(rng));
        std::fill(Y0.begin(), Y0.end(), 0.0);
        for (std::size_t i = 0; i < reacting.size(); ++i) Y0[reacting[i]] = g[i] / sum;
        for (std::size_t k : mech.inert()) Y0[k] = g.back() / sum / double(mech.inert().size());
        Y = Y0;
        double T = T0;
        integrateCell(mech, sampler.p, T, Y, dt, tol);
        std::vector<double> row;
        row.reserve(table.nColumns());
        row.push_back(T0);
        row.push_back(sampler.p);
        row.insert(row.end(), Y0.begin(), Y0.end());
        for (std::size_t k = 0; k < ns; ++k) row.push_back((Y[k] - Y0[k]) / dt);
        table.rows.push_back(std::move(row));
    }
    return table;
}

void writeSampleTable(std::ostream& os, const SampleTable& t) {
    auto h = t.header();
    for (std::size_t i = 0; i < h.size(); ++i) os << (i ? "," : "") << h[i];
    os << '\n';
    char buf[32];
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", row[i]);
            os << (i ? "," : "") << buf;
        }
        os << '\n';
    }
}

SampleTable readSampleTable(std::istream& is, const std::string& source) {
    SampleTable t;
    std::string line;
    if (!std::getline(is, line)) throw ParseError(source + ":1: empty sample table");
    std::vector<std::string> cols;
    {
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cols.push_back(c);
    }
    if (cols.size() < 4 || cols.size() % 2 != 0 || cols[0] != "T" || cols[1] != "p") {
        throw ParseError(source + ":1: header must be T,p,Y_...,rate_...");
    }
    const std::size_t ns = (cols.size() - 2) / 2;
    for (std::size_t k = 0; k < ns; ++k) {
        const std::string& y = cols[2 + k];
        const std::string& r = cols[2 + ns + k];
        if (y.rfind("Y_", 0) != 0 || r != "rate_" + y.substr(2)) {
            throw ParseError(source + ":1: column " + std::to_string(3 + k) + " does not pair Y_ with rate_");
        }
        t.species.push_back(y.substr(2));
    }
    std::size_t lineNo = 1;
    while (std::getline(is, line)) {
        ++lineNo;
        if (line.empty()) continue;
        std::vector<double> row;
        const char* p = line.c_str();
        char* end = nullptr;
        for (std::size_t c = 0; c < cols.size(); ++c) {
            double v = std::strtod(p, &end);
            if (end == p) throw ParseError(source + ":" + std::to_string(lineNo) + ": bad number in column " + std::to_string(c + 1));
            row.push_back(v);
            p = end;
            if (c + 1 < cols.size()) {
                if (*p != ',') throw ParseError(source + ":" + std::to_string(lineNo) + ": expected " + std::to_string(cols.size()) + " columns");
                ++p;
            }
        }
        while (*p == ' ' || *p == '\r') ++p;
        if (*p) throw ParseError(source + ":" + std::to_string(lineNo) + ": trailing characters");
        t.rows.push_back(std::move(row));
    }
    return t;
}

void writeSampleTable(const std::string& path, const SampleTable& t) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path + " for writing");
    writeSampleTable(os, t);
    if (!os) throw IoError("failed writing " + path);
}

SampleTable readSampleTable(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path);
    return readSampleTable(is, path);
}

} // namespace rflow
