#pragma once

#include "rflow/field.hpp"
#include "rflow/sparse.hpp"

#include <string>
#include <vector>

namespace rflow {

enum class DdtScheme { Euler, Backward2 };
enum class DivScheme { Upwind, Linear };

const char* toString(DdtScheme s);
const char* toString(DivScheme s);
DdtScheme ddtSchemeFromString(const std::string& s);
DivScheme divSchemeFromString(const std::string& s);

/// Previous time levels for fvmDdt. backward2 without the second level
/// falls back to Euler (the first step of a run).
struct TimeLevels {
    const CellField* rhoOld = nullptr;
    const CellField* psiOld = nullptr;
    const CellField* rhoOldOld = nullptr;
    const CellField* psiOldOld = nullptr;
};

/// Discretised equation M psi = source in LDU form. internalCoeffs (one per
/// boundary face) fold into the diagonal of the adjacent cell; boundaryCoeffs
/// (component-major over boundary faces) fold into its source. Matrix
/// coefficients are shared by all components of the unknown.
///
/// Sign convention: each operator returns the V-integrated term T(psi) as
/// M psi - source, so an equation is assembled by adding and subtracting
/// operators and reads sum(M) psi = sum(source). fvmLaplacian represents
/// +div(gamma grad psi): positive off-diagonals, negative diagonal.
class FvMatrix {
public:
    FvMatrix() = default;
    FvMatrix(const Mesh& mesh, std::string psiName, std::size_t nComponents, std::string dimensions = {});

    const Mesh& mesh() const { return *mesh_; }
    const std::string& psiName() const { return psiName_; }
    std::size_t nComponents() const { return nComponents_; }
    const std::string& dimensions() const { return dimensions_; }
    bool isFlattened() const { return flattened_; }

    LduMatrix ldu;
    std::vector<double> source;
    std::vector<double> internalCoeffs;
    std::vector<double> boundaryCoeffs;

    /// Copy with internal/boundary coefficients folded in; idempotent.
    FvMatrix flattened() const;

    FvMatrix& operator+=(const FvMatrix& other);
    FvMatrix& operator-=(const FvMatrix& other);
    FvMatrix& operator*=(double s);
    FvMatrix operator-() const;

private:
    void checkCompatible(const FvMatrix& other) const;

    const Mesh* mesh_ = nullptr;
    std::string psiName_;
    std::size_t nComponents_ = 0;
    std::string dimensions_;
    bool flattened_ = false;
};

FvMatrix operator+(FvMatrix a, const FvMatrix& b);
FvMatrix operator-(FvMatrix a, const FvMatrix& b);
FvMatrix combine(const FvMatrix& a, const FvMatrix& b, double sign);

struct FlatSystem {
    LduMatrix ldu;
    std::vector<double> rhs; ///< component-major, nComponents x nCells
};

FlatSystem flatten(const FvMatrix& m);

/// rho V / dt (Euler) or the three-level backward coefficients 3/2, -2, 1/2.
FvMatrix fvmDdt(const CellField& rho, const CellField& psi, double dt, DdtScheme scheme, const TimeLevels& old);

/// Implicit convection of psi by the mass flux through each face.
FvMatrix fvmDiv(const FaceField& flux, const CellField& psi, DivScheme scheme);

/// +div(gamma grad psi). gamma_f is interpolated inline (never stored);
/// boundary faces use the adjacent cell gamma.
FvMatrix fvmLaplacian(const CellField& gamma, const CellField& psi);

/// Face diffusivity used by fvmLaplacian, exposed so flux corrections use
/// exactly the coefficient the matrix was built from.
double faceGamma(const CellField& gamma, std::size_t face);

/// Implicit source: coeff * V on the diagonal (a sink for coeff > 0).
FvMatrix fvmSp(const CellField& coeff, const CellField& psi);
/// Explicit source: value * V added to the right-hand side, so adding
/// fvmSu(c) to an equation contributes +c to d(psi)/dt.
FvMatrix fvmSu(const CellField& value, const CellField& psi);

/// A = diag / V of the flattened system.
CellField diagA(const FvMatrix& m);
/// H(psi) = (source - sum_offdiag coeff * psi_across) / V of the flattened system.
CellField hOperator(const FvMatrix& m, const CellField& psi);

struct SolverReport {
    std::string solver;
    bool symmetric = false;
    std::vector<SolveResult> components;

    bool converged() const;
    std::size_t iterations() const;
    double maxFinalResidual() const;
};

/// Converts to CSR and solves each component. Symmetric systems go to the
/// configured CG variant (negated first when the diagonal is negative);
/// nonsymmetric systems go to BiCGStab. Writes the solution into psi and
/// refreshes its zeroGradient boundary values. Throws ConvergenceError when
/// a component fails to converge.
SolverReport solveFv(const FvMatrix& m, CellField& psi, const SolverControls& controls);

} // namespace rflow
