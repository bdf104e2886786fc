#pragma once

#include "rflow/mesh.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rflow {

/// Assembly-format matrix: diagonal per cell, upper/lower per internal face.
/// upper[f] is the coefficient of neighbor[f] in row owner[f]; lower[f] the
/// coefficient of owner[f] in row neighbor[f].
struct LduMatrix {
    const FaceConnectivity* addressing = nullptr;
    std::vector<double> diag;
    std::vector<double> upper;
    std::vector<double> lower;

    LduMatrix() = default;
    LduMatrix(const Mesh& mesh);

    std::size_t nCells() const { return diag.size(); }
    bool symmetric() const { return upper == lower; }
};

/// Solve-format matrix. Column indices ascend strictly within a row and every
/// row stores its diagonal.
struct CsrMatrix {
    std::size_t nRows = 0;
    std::vector<std::size_t> rowPtr;
    std::vector<std::size_t> colIdx;
    std::vector<double> vals;

    std::size_t nnz() const { return vals.size(); }
    /// Value at (row, col), zero when not stored.
    double at(std::size_t row, std::size_t col) const;
};

enum class SolverKind { Pcg, BiCgStab, AmgPcg };

const char* toString(SolverKind kind);
SolverKind solverKindFromString(const std::string& s);

struct SolverControls {
    double absTol = 1e-12;
    double relTol = 0.0;
    std::size_t maxIter = 1000;
    SolverKind kind = SolverKind::Pcg;

    void validate() const;
};

struct SolveResult {
    std::string solver;
    std::size_t iterations = 0;
    double initialResidual = 0.0; ///< ||b - A x0||_2
    double finalResidual = 0.0;   ///< ||b - A x||_2
    double normalizedResidual = 0.0;
    bool converged = false;
    std::string diagnostic;
    std::vector<double> history; ///< ||r||_2 after each iteration
};

/// Row `owner` receives upper[f] at column `neighbor`, row `neighbor`
/// receives lower[f] at column `owner`. Duplicate (row, col) pairs, which a
/// two-cell periodic direction produces, are summed in face order.
CsrMatrix lduToCsr(const LduMatrix& ldu);

void spmv(const CsrMatrix& A, std::span<const double> x, std::span<double> y);
std::vector<double> spmv(const CsrMatrix& A, std::span<const double> x);

/// Normalised L1 residual, fixed as
///   sum|b - Ax| / max(sum(|Ax - A xbar| + |b - A xbar|), DBL_MIN)
/// where xbar is the vector filled with the mean of x.
double residualNorm(const CsrMatrix& A, std::span<const double> x, std::span<const double> b);

struct AmgLevel {
    CsrMatrix A;
    std::vector<double> invDiag;
    std::vector<std::size_t> aggregate; ///< fine row -> coarse row of the next level
    std::size_t nCoarse = 0;
};

struct AmgOptions {
    std::size_t maxCoarse = 16;
    double strengthThreshold = 0.25;
    std::size_t maxLevels = 40;
};

/// Pairwise-aggregation hierarchy with piecewise-constant interpolation and a
/// dense LU at the coarsest level.
struct AmgHierarchy {
    std::vector<AmgLevel> levels;
    std::vector<double> coarseLu; ///< row-major LU factors of the coarsest matrix
    std::vector<std::size_t> coarsePivot;
    bool coarseSingular = false;  ///< constant null space regularised at the coarsest level

    std::size_t nLevels() const { return levels.size(); }
};

AmgHierarchy amgSetup(const CsrMatrix& A, const AmgOptions& options = {});

/// One V-cycle: forward Gauss-Seidel pre-smoothing, coarse correction,
/// backward Gauss-Seidel post-smoothing (the cycle is symmetric).
void amgVcycle(const AmgHierarchy& h, std::span<const double> b, std::span<double> x);

/// Preconditioned CG. kind Pcg uses Jacobi, AmgPcg one V-cycle per iteration
/// (the hierarchy is built on demand when not supplied). Works on consistent
/// singular systems with a constant null space.
SolveResult pcgSolve(const CsrMatrix& A, std::span<const double> b, std::span<double> x,
                     const SolverControls& controls, const AmgHierarchy* amg = nullptr);

/// Jacobi-preconditioned BiCGStab for nonsymmetric systems.
SolveResult bicgstabSolve(const CsrMatrix& A, std::span<const double> b, std::span<double> x,
                          const SolverControls& controls);

/// Dispatches on controls.kind.
SolveResult solve(const CsrMatrix& A, std::span<const double> b, std::span<double> x,
                  const SolverControls& controls);

} // namespace rflow
