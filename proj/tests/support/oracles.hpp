#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. Nothing here reuses the library's addressing or assembly code.

#include "rflow/field.hpp"
#include "rflow/fvm.hpp"
#include "rflow/mesh.hpp"
#include "rflow/sparse.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oracle {

/// Row-major dense matrix.
struct Dense {
    std::size_t n = 0;
    std::vector<double> a;
    explicit Dense(std::size_t size = 0) : n(size), a(size * size, 0.0) {}
    double& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
};

inline std::vector<double> matvec(const Dense& A, const std::vector<double>& x) {
    std::vector<double> y(A.n, 0.0);
    for (std::size_t i = 0; i < A.n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < A.n; ++j) s += A(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

/// Gaussian elimination with partial pivoting.
inline std::vector<double> luSolve(Dense A, std::vector<double> b) {
    const std::size_t n = A.n;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(A(i, k)) > std::abs(A(p, k))) p = i;
        if (A(p, k) == 0.0) throw std::runtime_error("oracle: singular matrix");
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(A(k, j), A(p, j));
            std::swap(b[k], b[p]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            double f = A(i, k) / A(k, k);
            if (f == 0.0) continue;
            for (std::size_t j = k; j < n; ++j) A(i, j) -= f * A(k, j);
            b[i] -= f * b[k];
        }
    }
    std::vector<double> x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t j = ii + 1; j < n; ++j) s -= A(ii, j) * x[j];
        x[ii] = s / A(ii, ii);
    }
    return x;
}

inline Dense densify(const rflow::LduMatrix& m) {
    Dense D(m.nCells());
    for (std::size_t i = 0; i < m.nCells(); ++i) D(i, i) += m.diag[i];
    for (std::size_t f = 0; f < m.upper.size(); ++f) {
        std::size_t o = m.addressing->owner[f], nb = m.addressing->neighbor[f];
        D(o, nb) += m.upper[f];
        D(nb, o) += m.lower[f];
    }
    return D;
}

inline Dense densify(const rflow::CsrMatrix& m) {
    Dense D(m.nRows);
    for (std::size_t i = 0; i < m.nRows; ++i)
        for (std::size_t k = m.rowPtr[i]; k < m.rowPtr[i + 1]; ++k) D(i, m.colIdx[k]) += m.vals[k];
    return D;
}

/// Geometric neighbour of cell (i,j,k) across side s, computed from the
/// index arithmetic alone. Returns false when the side is a non-periodic wall.
struct Box {
    std::array<std::size_t, 3> dims;
    rflow::Vec3 h;
    std::array<bool, 3> periodic;
    std::size_t idx(std::size_t i, std::size_t j, std::size_t k) const { return i + dims[0] * (j + dims[1] * k); }
};

struct Link {
    std::size_t cell;      // neighbour, or the cell itself for walls
    bool wall;
    int side;              // 0..5 = xmin,xmax,ymin,ymax,zmin,zmax
    double area;
    double delta;          // 1 / centre distance
    double outwardSign;    // +1 on the max side
};

inline std::vector<Link> links(const Box& b, std::size_t cell) {
    std::array<std::size_t, 3> ijk{cell % b.dims[0], (cell / b.dims[0]) % b.dims[1], cell / (b.dims[0] * b.dims[1])};
    std::vector<Link> out;
    for (int d = 0; d < 3; ++d) {
        double area = b.h[(d + 1) % 3] * b.h[(d + 2) % 3];
        for (int s = 0; s < 2; ++s) {
            auto q = ijk;
            bool atWall = s == 0 ? ijk[d] == 0 : ijk[d] + 1 == b.dims[d];
            Link l{cell, false, 2 * d + s, area, 1.0 / b.h[d], s == 0 ? -1.0 : 1.0};
            if (atWall && !b.periodic[d]) {
                l.wall = true;
                l.delta = 2.0 / b.h[d];
            } else {
                if (b.dims[d] == 1) continue; // self-coupling cancels
                q[d] = s == 0 ? (ijk[d] + b.dims[d] - 1) % b.dims[d] : (ijk[d] + 1) % b.dims[d];
                l.cell = b.idx(q[0], q[1], q[2]);
            }
            out.push_back(l);
        }
    }
    return out;
}

/// Dense assembly of the transported-scalar operator
///   ddt(rho psi) + div(F psi) - laplacian(gamma psi)
/// with flux F given per ordered (cell, side) pair consistent across faces.
/// Walls use fixedValue psiB (per side) and outward flux F_b.
struct ScalarProblem {
    Box box;
    std::vector<double> rho, rhoOld, psiOld, gamma;
    std::vector<std::array<double, 6>> flux; // outward flux through each side of each cell
    std::array<double, 6> psiWall{};
    std::array<bool, 6> zeroGradient{};
    bool upwind = true;
    double dt = 0.5;
};

inline std::pair<Dense, std::vector<double>> assemble(const ScalarProblem& p) {
    const std::size_t n = p.rho.size();
    const double V = p.box.h[0] * p.box.h[1] * p.box.h[2];
    Dense A(n);
    std::vector<double> b(n, 0.0);
    for (std::size_t c = 0; c < n; ++c) {
        A(c, c) += p.rho[c] * V / p.dt;
        b[c] += p.rhoOld[c] * p.psiOld[c] * V / p.dt;
        for (const Link& l : links(p.box, c)) {
            double F = p.flux[c][l.side];
            if (l.wall) {
                if (p.zeroGradient[l.side]) {
                    A(c, c) += F;
                    continue;
                }
                double g = p.gamma[c] * l.area * l.delta;
                A(c, c) += g;
                b[c] += g * p.psiWall[l.side];
                if (F >= 0.0 && p.upwind) A(c, c) += F;
                else b[c] -= F * p.psiWall[l.side];
                continue;
            }
            double g = 0.5 * (p.gamma[c] + p.gamma[l.cell]) * l.area * l.delta;
            A(c, c) += g;
            A(c, l.cell) -= g;
            if (p.upwind) {
                if (F >= 0.0) A(c, c) += F;
                else A(c, l.cell) += F;
            } else {
                A(c, c) += 0.5 * F;
                A(c, l.cell) += 0.5 * F;
            }
        }
    }
    return {A, b};
}

/// Exactly representable random value k / 2^s with |k| <= range * 2^s.
inline double dyadic(std::mt19937_64& rng, int shift, int range, bool positive = false) {
    std::uniform_int_distribution<int> dist(positive ? 1 : -range << shift, range << shift);
    return std::ldexp(static_cast<double>(dist(rng)), -shift);
}

/// Classical RK4 integration of y' = f(y) with a fixed number of steps.
template <class F>
std::vector<double> rk4(F&& f, std::vector<double> y, double t, std::size_t steps) {
    const double h = t / static_cast<double>(steps);
    const std::size_t n = y.size();
    std::vector<double> k1, k2, k3, k4, tmp(n);
    for (std::size_t s = 0; s < steps; ++s) {
        k1 = f(y);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
        k2 = f(tmp);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
        k3 = f(tmp);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
        k4 = f(tmp);
        for (std::size_t i = 0; i < n; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return y;
}

} // namespace oracle
