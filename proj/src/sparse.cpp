#include "rflow/sparse.hpp"

#include "rflow/error.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numeric>

namespace rflow {

LduMatrix::LduMatrix(const Mesh& mesh)
    : addressing(&mesh.faces), diag(mesh.nCells(), 0.0), upper(mesh.nInternalFaces(), 0.0),
      lower(mesh.nInternalFaces(), 0.0) {}

double CsrMatrix::at(std::size_t row, std::size_t col) const {
    auto b = colIdx.begin() + static_cast<std::ptrdiff_t>(rowPtr[row]);
    auto e = colIdx.begin() + static_cast<std::ptrdiff_t>(rowPtr[row + 1]);
    auto it = std::lower_bound(b, e, col);
    if (it == e || *it != col) return 0.0;
    return vals[static_cast<std::size_t>(it - colIdx.begin())];
}

const char* toString(SolverKind kind) {
    switch (kind) {
        case SolverKind::Pcg:      return "pcg";
        case SolverKind::BiCgStab: return "bicgstab";
        case SolverKind::AmgPcg:   return "amg-pcg";
    }
    return "unknown";
}

SolverKind solverKindFromString(const std::string& s) {
    if (s == "pcg") return SolverKind::Pcg;
    if (s == "bicgstab") return SolverKind::BiCgStab;
    if (s == "amg-pcg") return SolverKind::AmgPcg;
    throw InvalidArgument("unknown solver kind '" + s + "'");
}

void SolverControls::validate() const {
    if (!(absTol >= 0.0)) throw InvalidArgument("absTol must be >= 0");
    if (!(relTol >= 0.0 && relTol < 1.0)) throw InvalidArgument("relTol must lie in [0, 1)");
    if (maxIter < 1) throw InvalidArgument("maxIter must be >= 1");
}

CsrMatrix lduToCsr(const LduMatrix& ldu) {
    const std::size_t n = ldu.nCells();
    CsrMatrix csr;
    csr.nRows = n;
    if (!ldu.addressing) {
        if (!ldu.upper.empty()) throw InvalidArgument("LDU matrix without addressing has off-diagonals");
    }
    const std::size_t nf = ldu.upper.size();
    const auto* owner = ldu.addressing ? ldu.addressing->owner.data() : nullptr;
    const auto* neigh = ldu.addressing ? ldu.addressing->neighbor.data() : nullptr;

    // Each row: diagonal first, then its off-diagonals in face order.
    std::vector<std::size_t> count(n, 1);
    for (std::size_t f = 0; f < nf; ++f) {
        ++count[owner[f]];
        ++count[neigh[f]];
    }
    std::vector<std::size_t> start(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) start[i + 1] = start[i] + count[i];
    std::vector<std::size_t> cols(start[n]);
    std::vector<double> vals(start[n]);
    std::vector<std::size_t> fill(start.begin(), start.end() - 1);
    for (std::size_t i = 0; i < n; ++i) {
        cols[fill[i]] = i;
        vals[fill[i]++] = ldu.diag[i];
    }
    for (std::size_t f = 0; f < nf; ++f) {
        std::size_t o = owner[f], nb = neigh[f];
        cols[fill[o]] = nb;
        vals[fill[o]++] = ldu.upper[f];
        cols[fill[nb]] = o;
        vals[fill[nb]++] = ldu.lower[f];
    }

    csr.rowPtr.assign(n + 1, 0);
    csr.colIdx.reserve(start[n]);
    csr.vals.reserve(start[n]);
    std::vector<std::size_t> perm;
    for (std::size_t i = 0; i < n; ++i) {
        perm.resize(count[i]);
        std::iota(perm.begin(), perm.end(), start[i]);
        std::stable_sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) { return cols[a] < cols[b]; });
        std::size_t k = 0;
        while (k < perm.size()) {
            std::size_t col = cols[perm[k]];
            double v = 0.0;
            std::size_t m = k;
            // The diagonal is stored explicitly; duplicates sum starting from it.
            while (m < perm.size() && cols[perm[m]] == col) v += vals[perm[m++]];
            csr.colIdx.push_back(col);
            csr.vals.push_back(v);
            k = m;
        }
        csr.rowPtr[i + 1] = csr.colIdx.size();
    }
    return csr;
}

void spmv(const CsrMatrix& A, std::span<const double> x, std::span<double> y) {
    if (x.size() != A.nRows || y.size() != A.nRows) throw InvalidArgument("spmv: vector length mismatch");
    const std::size_t* rp = A.rowPtr.data();
    const std::size_t* ci = A.colIdx.data();
    const double* v = A.vals.data();
    for (std::size_t i = 0; i < A.nRows; ++i) {
        double s = 0.0;
        for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) s += v[k] * x[ci[k]];
        y[i] = s;
    }
}

std::vector<double> spmv(const CsrMatrix& A, std::span<const double> x) {
    std::vector<double> y(A.nRows);
    spmv(A, x, y);
    return y;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void residual(const CsrMatrix& A, std::span<const double> x, std::span<const double> b, std::span<double> r) {
    spmv(A, x, r);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
}

std::vector<double> invDiagonal(const CsrMatrix& A) {
    std::vector<double> d(A.nRows);
    for (std::size_t i = 0; i < A.nRows; ++i) {
        double a = A.at(i, i);
        if (a == 0.0) throw InvalidArgument("zero diagonal entry in row " + std::to_string(i));
        d[i] = 1.0 / a;
    }
    return d;
}

void checkSizes(const CsrMatrix& A, std::span<const double> b, std::span<double> x) {
    if (b.size() != A.nRows || x.size() != A.nRows) throw InvalidArgument("solver: vector length mismatch");
}

} // namespace

double residualNorm(const CsrMatrix& A, std::span<const double> x, std::span<const double> b) {
    const std::size_t n = A.nRows;
    if (n == 0) return 0.0;
    std::vector<double> ax = spmv(A, x);
    double xbar = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    std::vector<double> xb(n, xbar);
    std::vector<double> axb = spmv(A, xb);
    double num = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        num += std::abs(b[i] - ax[i]);
        norm += std::abs(ax[i] - axb[i]) + std::abs(b[i] - axb[i]);
    }
    return num / std::max(norm, DBL_MIN);
}

// ---------------------------------------------------------------------------
// AMG
// ---------------------------------------------------------------------------

namespace {

bool rowSumsVanish(const CsrMatrix& A) {
    for (std::size_t i = 0; i < A.nRows; ++i) {
        double s = 0.0, d = 0.0;
        for (std::size_t k = A.rowPtr[i]; k < A.rowPtr[i + 1]; ++k) {
            s += A.vals[k];
            if (A.colIdx[k] == i) d = std::abs(A.vals[k]);
        }
        if (std::abs(s) > 1e-10 * d) return false;
    }
    return true;
}

/// Greedy pairwise matching along the strongest negative coupling. Nodes are
/// visited in index order; ties pick the lowest column.
std::size_t pairwiseAggregate(const CsrMatrix& A, double threshold, std::vector<std::size_t>& agg) {
    const std::size_t n = A.nRows;
    agg.assign(n, SIZE_MAX);
    std::size_t nc = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (agg[i] != SIZE_MAX) continue;
        double strongest = 0.0;
        for (std::size_t k = A.rowPtr[i]; k < A.rowPtr[i + 1]; ++k)
            if (A.colIdx[k] != i) strongest = std::max(strongest, -A.vals[k]);
        std::size_t best = SIZE_MAX;
        double bestVal = 0.0;
        if (strongest > 0.0) {
            for (std::size_t k = A.rowPtr[i]; k < A.rowPtr[i + 1]; ++k) {
                std::size_t j = A.colIdx[k];
                if (j == i || agg[j] != SIZE_MAX) continue;
                double s = -A.vals[k];
                if (s >= threshold * strongest && s > bestVal) {
                    bestVal = s;
                    best = j;
                }
            }
        }
        agg[i] = nc;
        if (best != SIZE_MAX) agg[best] = nc;
        ++nc;
    }
    return nc;
}

CsrMatrix galerkin(const CsrMatrix& A, const std::vector<std::size_t>& agg, std::size_t nc) {
    std::vector<std::vector<std::pair<std::size_t, double>>> rows(nc);
    for (std::size_t i = 0; i < A.nRows; ++i) {
        auto& row = rows[agg[i]];
        for (std::size_t k = A.rowPtr[i]; k < A.rowPtr[i + 1]; ++k) row.emplace_back(agg[A.colIdx[k]], A.vals[k]);
    }
    CsrMatrix C;
    C.nRows = nc;
    C.rowPtr.assign(nc + 1, 0);
    for (std::size_t I = 0; I < nc; ++I) {
        auto& row = rows[I];
        std::stable_sort(row.begin(), row.end(), [](auto& a, auto& b) { return a.first < b.first; });
        std::size_t k = 0;
        while (k < row.size()) {
            std::size_t col = row[k].first;
            double v = 0.0;
            while (k < row.size() && row[k].first == col) v += row[k++].second;
            C.colIdx.push_back(col);
            C.vals.push_back(v);
        }
        C.rowPtr[I + 1] = C.colIdx.size();
    }
    return C;
}

void luFactor(std::vector<double>& a, std::vector<std::size_t>& piv, std::size_t n) {
    piv.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a[i * n + k]) > std::abs(a[p * n + k])) p = i;
        piv[k] = p;
        if (a[p * n + k] == 0.0) throw InvalidArgument("AMG: singular coarsest-level matrix");
        if (p != k)
            for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[p * n + j]);
        for (std::size_t i = k + 1; i < n; ++i) {
            double l = a[i * n + k] / a[k * n + k];
            a[i * n + k] = l;
            for (std::size_t j = k + 1; j < n; ++j) a[i * n + j] -= l * a[k * n + j];
        }
    }
}

void luSolve(const std::vector<double>& lu, const std::vector<std::size_t>& piv, std::span<double> x) {
    const std::size_t n = piv.size();
    for (std::size_t k = 0; k < n; ++k) std::swap(x[k], x[piv[k]]);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) x[i] -= lu[i * n + j] * x[j];
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t j = i + 1; j < n; ++j) x[i] -= lu[i * n + j] * x[j];
        x[i] /= lu[i * n + i];
    }
}

void gaussSeidel(const CsrMatrix& A, const std::vector<double>& invDiag, std::span<const double> b,
                 std::span<double> x, bool backward) {
    const std::size_t n = A.nRows;
    for (std::size_t s = 0; s < n; ++s) {
        std::size_t i = backward ? n - 1 - s : s;
        double acc = b[i];
        for (std::size_t k = A.rowPtr[i]; k < A.rowPtr[i + 1]; ++k)
            if (A.colIdx[k] != i) acc -= A.vals[k] * x[A.colIdx[k]];
        x[i] = acc * invDiag[i];
    }
}

void vcycle(const AmgHierarchy& h, std::size_t level, std::span<const double> b, std::span<double> x) {
    const AmgLevel& L = h.levels[level];
    if (level + 1 == h.levels.size()) {
        std::copy(b.begin(), b.end(), x.begin());
        luSolve(h.coarseLu, h.coarsePivot, x);
        return;
    }
    const std::size_t n = L.A.nRows;
    gaussSeidel(L.A, L.invDiag, b, x, false);
    std::vector<double> r(n);
    residual(L.A, x, b, r);
    std::vector<double> rc(L.nCoarse, 0.0), xc(L.nCoarse, 0.0);
    for (std::size_t i = 0; i < n; ++i) rc[L.aggregate[i]] += r[i];
    vcycle(h, level + 1, rc, xc);
    for (std::size_t i = 0; i < n; ++i) x[i] += xc[L.aggregate[i]];
    gaussSeidel(L.A, L.invDiag, b, x, true);
}

} // namespace

AmgHierarchy amgSetup(const CsrMatrix& A, const AmgOptions& options) {
    AmgHierarchy h;
    CsrMatrix current = A;
    for (;;) {
        for (std::size_t i = 0; i < current.nRows; ++i) {
            if (current.rowPtr[i] == current.rowPtr[i + 1]) {
                throw InvalidArgument("AMG setup: row " + std::to_string(i) + " is empty");
            }
        }
        AmgLevel level;
        level.A = std::move(current);
        level.invDiag = invDiagonal(level.A);
        bool coarsest = level.A.nRows <= options.maxCoarse || h.levels.size() + 1 >= options.maxLevels;
        if (!coarsest) {
            level.nCoarse = pairwiseAggregate(level.A, options.strengthThreshold, level.aggregate);
            if (level.nCoarse == level.A.nRows) coarsest = true; // no coupling left to exploit
        }
        if (coarsest) {
            level.aggregate.clear();
            level.nCoarse = 0;
            const std::size_t n = level.A.nRows;
            h.coarseLu.assign(n * n, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t k = level.A.rowPtr[i]; k < level.A.rowPtr[i + 1]; ++k)
                    h.coarseLu[i * n + level.A.colIdx[k]] = level.A.vals[k];
            h.coarseSingular = n > 1 && rowSumsVanish(level.A);
            if (h.coarseSingular) {
                // Rank-one shift along the constant null vector.
                double alpha = 0.0;
                for (std::size_t i = 0; i < n; ++i) alpha += std::abs(h.coarseLu[i * n + i]);
                alpha /= static_cast<double>(n * n);
                for (auto& v : h.coarseLu) v += alpha;
            }
            luFactor(h.coarseLu, h.coarsePivot, n);
            h.levels.push_back(std::move(level));
            break;
        }
        current = galerkin(level.A, level.aggregate, level.nCoarse);
        h.levels.push_back(std::move(level));
    }
    return h;
}

void amgVcycle(const AmgHierarchy& h, std::span<const double> b, std::span<double> x) {
    if (h.levels.empty()) throw InvalidArgument("AMG hierarchy is empty");
    if (b.size() != h.levels[0].A.nRows || x.size() != b.size()) throw InvalidArgument("amgVcycle: size mismatch");
    vcycle(h, 0, b, x);
}

// ---------------------------------------------------------------------------
// Krylov solvers
// ---------------------------------------------------------------------------

SolveResult pcgSolve(const CsrMatrix& A, std::span<const double> b, std::span<double> x,
                     const SolverControls& controls, const AmgHierarchy* amg) {
    controls.validate();
    checkSizes(A, b, x);
    const std::size_t n = A.nRows;
    SolveResult res;
    res.solver = controls.kind == SolverKind::AmgPcg ? "amg-pcg" : "pcg";

    AmgHierarchy local;
    std::vector<double> invD;
    if (controls.kind == SolverKind::AmgPcg) {
        if (!amg) {
            local = amgSetup(A);
            amg = &local;
        }
    } else {
        invD = invDiagonal(A);
    }
    auto precondition = [&](std::span<const double> r, std::span<double> z) {
        if (amg) {
            std::fill(z.begin(), z.end(), 0.0);
            amgVcycle(*amg, r, z);
        } else {
            for (std::size_t i = 0; i < n; ++i) z[i] = invD[i] * r[i];
        }
    };

    std::vector<double> r(n), z(n), p(n), q(n);
    residual(A, x, b, r);
    double rn = norm2(r);
    res.initialResidual = rn;
    const double target = std::max(controls.absTol, controls.relTol * rn);
    if (rn <= target) {
        res.finalResidual = rn;
        res.converged = true;
        res.normalizedResidual = residualNorm(A, x, b);
        return res;
    }
    precondition(r, z);
    p = z;
    double rz = dot(r, z);
    for (std::size_t it = 1; it <= controls.maxIter; ++it) {
        spmv(A, p, q);
        double pq = dot(p, q);
        if (!(pq > 0.0)) {
            throw ConvergenceError("pcg breakdown: p'Ap = " + std::to_string(pq) + " (matrix is not SPD)");
        }
        double alpha = rz / pq;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        rn = norm2(r);
        res.iterations = it;
        res.history.push_back(rn);
        if (rn <= target) {
            res.converged = true;
            break;
        }
        precondition(r, z);
        double rzNew = dot(r, z);
        double beta = rzNew / rz;
        rz = rzNew;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    // Report the true residual, not the recurrence.
    residual(A, x, b, r);
    res.finalResidual = norm2(r);
    res.normalizedResidual = residualNorm(A, x, b);
    if (!res.converged) res.diagnostic = "maximum iterations reached";
    return res;
}

SolveResult bicgstabSolve(const CsrMatrix& A, std::span<const double> b, std::span<double> x,
                          const SolverControls& controls) {
    controls.validate();
    checkSizes(A, b, x);
    const std::size_t n = A.nRows;
    SolveResult res;
    res.solver = "bicgstab";
    std::vector<double> invD = invDiagonal(A);

    std::vector<double> r(n), r0(n), p(n, 0.0), v(n, 0.0), s(n), t(n), ph(n), sh(n);
    residual(A, x, b, r);
    double rn = norm2(r);
    res.initialResidual = rn;
    const double target = std::max(controls.absTol, controls.relTol * rn);
    if (rn <= target) {
        res.finalResidual = rn;
        res.converged = true;
        res.normalizedResidual = residualNorm(A, x, b);
        return res;
    }
    r0 = r;
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    for (std::size_t it = 1; it <= controls.maxIter; ++it) {
        double rhoNew = dot(r0, r);
        if (rhoNew == 0.0) {
            res.diagnostic = "rho breakdown";
            break;
        }
        if (it == 1) {
            p = r;
        } else {
            double beta = (rhoNew / rho) * (alpha / omega);
            for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        rho = rhoNew;
        for (std::size_t i = 0; i < n; ++i) ph[i] = invD[i] * p[i];
        spmv(A, ph, v);
        double r0v = dot(r0, v);
        if (r0v == 0.0) {
            res.diagnostic = "r0'v breakdown";
            break;
        }
        alpha = rho / r0v;
        for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
        res.iterations = it;
        if (norm2(s) <= target) {
            for (std::size_t i = 0; i < n; ++i) x[i] += alpha * ph[i];
            rn = norm2(s);
            res.history.push_back(rn);
            res.converged = true;
            break;
        }
        for (std::size_t i = 0; i < n; ++i) sh[i] = invD[i] * s[i];
        spmv(A, sh, t);
        double tt = dot(t, t);
        if (tt == 0.0) {
            res.diagnostic = "t't breakdown";
            break;
        }
        omega = dot(t, s) / tt;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * ph[i] + omega * sh[i];
            r[i] = s[i] - omega * t[i];
        }
        rn = norm2(r);
        res.history.push_back(rn);
        if (rn <= target) {
            res.converged = true;
            break;
        }
        if (omega == 0.0) {
            res.diagnostic = "omega breakdown";
            break;
        }
    }
    residual(A, x, b, r);
    res.finalResidual = norm2(r);
    res.normalizedResidual = residualNorm(A, x, b);
    if (res.converged && res.finalResidual > 10.0 * target && res.finalResidual > controls.absTol) {
        // Recurrence drifted from the true residual.
        res.converged = false;
        res.diagnostic = "true residual above tolerance";
    }
    if (!res.converged && res.diagnostic.empty()) res.diagnostic = "maximum iterations reached";
    return res;
}

SolveResult solve(const CsrMatrix& A, std::span<const double> b, std::span<double> x,
                  const SolverControls& controls) {
    if (controls.kind == SolverKind::BiCgStab) return bicgstabSolve(A, b, x, controls);
    return pcgSolve(A, b, x, controls);
}

} // namespace rflow
