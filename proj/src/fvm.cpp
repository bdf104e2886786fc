#include "rflow/fvm.hpp"

#include "rflow/error.hpp"

#include <algorithm>
#include <cmath>

namespace rflow {

const char* toString(DdtScheme s) { return s == DdtScheme::Euler ? "euler" : "backward2"; }
const char* toString(DivScheme s) { return s == DivScheme::Upwind ? "upwind" : "linear"; }

DdtScheme ddtSchemeFromString(const std::string& s) {
    if (s == "euler") return DdtScheme::Euler;
    if (s == "backward2") return DdtScheme::Backward2;
    throw InvalidArgument("unknown ddt scheme '" + s + "'");
}

DivScheme divSchemeFromString(const std::string& s) {
    if (s == "upwind") return DivScheme::Upwind;
    if (s == "linear") return DivScheme::Linear;
    throw InvalidArgument("unknown div scheme '" + s + "'");
}

FvMatrix::FvMatrix(const Mesh& mesh, std::string psiName, std::size_t nComponents, std::string dimensions)
    : ldu(mesh), source(nComponents * mesh.nCells(), 0.0), internalCoeffs(mesh.nBoundaryFaces(), 0.0),
      boundaryCoeffs(nComponents * mesh.nBoundaryFaces(), 0.0), mesh_(&mesh), psiName_(std::move(psiName)),
      nComponents_(nComponents), dimensions_(std::move(dimensions)) {}

void FvMatrix::checkCompatible(const FvMatrix& other) const {
    if (mesh_ != other.mesh_) throw InvalidArgument("FvMatrix combine: different meshes");
    if (psiName_ != other.psiName_ || nComponents_ != other.nComponents_) {
        throw InvalidArgument("FvMatrix combine: unknown '" + psiName_ + "' does not match '" + other.psiName_ + "'");
    }
    if (!dimensions_.empty() && !other.dimensions_.empty() && dimensions_ != other.dimensions_) {
        throw InvalidArgument("FvMatrix combine: dimensions [" + dimensions_ + "] vs [" + other.dimensions_ + "]");
    }
}

namespace {

void axpy(std::vector<double>& a, const std::vector<double>& b, double s) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += s * b[i];
}

} // namespace

FvMatrix& FvMatrix::operator+=(const FvMatrix& o) {
    checkCompatible(o);
    axpy(ldu.diag, o.ldu.diag, 1.0);
    axpy(ldu.upper, o.ldu.upper, 1.0);
    axpy(ldu.lower, o.ldu.lower, 1.0);
    axpy(source, o.source, 1.0);
    axpy(internalCoeffs, o.internalCoeffs, 1.0);
    axpy(boundaryCoeffs, o.boundaryCoeffs, 1.0);
    if (dimensions_.empty()) dimensions_ = o.dimensions_;
    flattened_ = flattened_ && o.flattened_;
    return *this;
}

FvMatrix& FvMatrix::operator-=(const FvMatrix& o) {
    checkCompatible(o);
    axpy(ldu.diag, o.ldu.diag, -1.0);
    axpy(ldu.upper, o.ldu.upper, -1.0);
    axpy(ldu.lower, o.ldu.lower, -1.0);
    axpy(source, o.source, -1.0);
    axpy(internalCoeffs, o.internalCoeffs, -1.0);
    axpy(boundaryCoeffs, o.boundaryCoeffs, -1.0);
    if (dimensions_.empty()) dimensions_ = o.dimensions_;
    flattened_ = flattened_ && o.flattened_;
    return *this;
}

FvMatrix& FvMatrix::operator*=(double s) {
    for (auto* v : {&ldu.diag, &ldu.upper, &ldu.lower, &source, &internalCoeffs, &boundaryCoeffs})
        for (double& x : *v) x *= s;
    return *this;
}

FvMatrix FvMatrix::operator-() const {
    FvMatrix m = *this;
    m *= -1.0;
    return m;
}

FvMatrix operator+(FvMatrix a, const FvMatrix& b) { return a += b; }
FvMatrix operator-(FvMatrix a, const FvMatrix& b) { return a -= b; }

FvMatrix combine(const FvMatrix& a, const FvMatrix& b, double sign) {
    FvMatrix m = a;
    if (sign >= 0.0) m += b;
    else m -= b;
    return m;
}

FvMatrix FvMatrix::flattened() const {
    FvMatrix m = *this;
    if (flattened_) return m;
    const Mesh& mesh = *mesh_;
    const std::size_t n = mesh.nCells();
    const std::size_t nb = mesh.nBoundaryFaces();
    for (std::size_t cell = 0; cell < n; ++cell) {
        for (std::size_t b : mesh.cellBoundaryFaces(cell)) {
            m.ldu.diag[cell] += internalCoeffs[b];
            for (std::size_t c = 0; c < nComponents_; ++c) m.source[c * n + cell] += boundaryCoeffs[c * nb + b];
        }
    }
    std::fill(m.internalCoeffs.begin(), m.internalCoeffs.end(), 0.0);
    std::fill(m.boundaryCoeffs.begin(), m.boundaryCoeffs.end(), 0.0);
    m.flattened_ = true;
    return m;
}

FlatSystem flatten(const FvMatrix& m) {
    FvMatrix f = m.flattened();
    return {std::move(f.ldu), std::move(f.source)};
}

namespace {

void requireField(const CellField& f, const char* what) {
    if (!f.mesh || f.data.size() != f.nComponents * f.mesh->nCells()) {
        throw InvalidArgument(std::string(what) + " field '" + f.name + "' does not match its mesh");
    }
}

void requireSameMesh(const CellField& a, const CellField& b) {
    if (a.mesh != b.mesh) throw InvalidArgument("fields '" + a.name + "' and '" + b.name + "' live on different meshes");
}

} // namespace

FvMatrix fvmDdt(const CellField& rho, const CellField& psi, double dt, DdtScheme scheme, const TimeLevels& old) {
    requireField(rho, "density");
    requireField(psi, "unknown");
    requireSameMesh(rho, psi);
    if (!(dt > 0.0)) throw InvalidArgument("fvmDdt: dt must be positive");
    if (!old.rhoOld || !old.psiOld) throw InvalidArgument("fvmDdt: missing old time level for '" + psi.name + "'");
    const Mesh& mesh = *psi.mesh;
    const std::size_t n = mesh.nCells();
    const std::size_t nc = psi.nComponents;
    FvMatrix m(mesh, psi.name, nc);
    const double rDeltaT = mesh.cells.cellVolume / dt;
    bool threeLevel = scheme == DdtScheme::Backward2 && old.rhoOldOld && old.psiOldOld;
    if (!threeLevel) {
        for (std::size_t i = 0; i < n; ++i) m.ldu.diag[i] = rho.data[i] * rDeltaT;
        for (std::size_t c = 0; c < nc; ++c)
            for (std::size_t i = 0; i < n; ++i)
                m.source[c * n + i] = old.rhoOld->data[i] * (*old.psiOld)(c, i) * rDeltaT;
    } else {
        for (std::size_t i = 0; i < n; ++i) m.ldu.diag[i] = 1.5 * rho.data[i] * rDeltaT;
        for (std::size_t c = 0; c < nc; ++c)
            for (std::size_t i = 0; i < n; ++i)
                m.source[c * n + i] = (2.0 * old.rhoOld->data[i] * (*old.psiOld)(c, i) -
                                       0.5 * old.rhoOldOld->data[i] * (*old.psiOldOld)(c, i)) *
                                      rDeltaT;
    }
    return m;
}

FvMatrix fvmDiv(const FaceField& flux, const CellField& psi, DivScheme scheme) {
    requireField(psi, "unknown");
    const Mesh& mesh = *psi.mesh;
    if (flux.mesh != &mesh || flux.nComponents != 1 || flux.data.size() != mesh.nInternalFaces()) {
        throw InvalidArgument("fvmDiv: flux does not match the mesh of '" + psi.name + "'");
    }
    const auto& fc = mesh.faces;
    const std::size_t nf = fc.nInternalFaces;
    const std::size_t n = mesh.nCells();
    const std::size_t nb = mesh.nBoundaryFaces();
    FvMatrix m(mesh, psi.name, psi.nComponents);
    std::vector<double> ownDiag(nf), neiDiag(nf);
    for (std::size_t f = 0; f < nf; ++f) {
        double phi = flux.data[f];
        if (scheme == DivScheme::Upwind) {
            ownDiag[f] = std::max(phi, 0.0);
            m.ldu.upper[f] = std::min(phi, 0.0);
            neiDiag[f] = -std::min(phi, 0.0);
            m.ldu.lower[f] = -std::max(phi, 0.0);
        } else {
            double w = fc.interpWeight[f];
            ownDiag[f] = w * phi;
            m.ldu.upper[f] = (1.0 - w) * phi;
            neiDiag[f] = -(1.0 - w) * phi;
            m.ldu.lower[f] = -w * phi;
        }
    }
    for (std::size_t cell = 0; cell < n; ++cell) {
        double d = 0.0;
        for (const auto& e : mesh.cellFaces(cell)) d += e.sign > 0.0 ? ownDiag[e.face] : neiDiag[e.face];
        m.ldu.diag[cell] = d;
    }
    for (std::size_t p = 0; p < mesh.patches.size(); ++p) {
        const auto& bp = mesh.patches[p];
        if (bp.kind == PatchKind::Periodic) continue;
        Closure kind = psi.boundary[p].kind;
        if (kind != Closure::FixedValue && kind != Closure::ZeroGradient) {
            throw InvalidArgument("fvmDiv: '" + psi.name + "' has no closure on patch " + bp.name);
        }
        for (std::size_t l = 0; l < bp.size(); ++l) {
            double phi = flux.boundary[p][l];
            std::size_t b = bp.start + l;
            bool useCell = kind == Closure::ZeroGradient || (scheme == DivScheme::Upwind && phi >= 0.0);
            if (useCell) {
                m.internalCoeffs[b] = phi;
            } else {
                for (std::size_t c = 0; c < psi.nComponents; ++c)
                    m.boundaryCoeffs[c * nb + b] = -phi * psi.boundary[p].values[c * bp.size() + l];
            }
        }
    }
    return m;
}

double faceGamma(const CellField& gamma, std::size_t face) {
    const auto& fc = gamma.mesh->faces;
    double w = fc.interpWeight[face];
    return w * gamma.data[fc.owner[face]] + (1.0 - w) * gamma.data[fc.neighbor[face]];
}

FvMatrix fvmLaplacian(const CellField& gamma, const CellField& psi) {
    requireField(gamma, "diffusivity");
    requireField(psi, "unknown");
    requireSameMesh(gamma, psi);
    if (gamma.nComponents != 1) throw InvalidArgument("fvmLaplacian: diffusivity must be scalar");
    for (double g : gamma.data) {
        if (g < 0.0) throw InvalidArgument("fvmLaplacian: negative diffusivity in '" + gamma.name + "'");
    }
    const Mesh& mesh = *psi.mesh;
    const auto& fc = mesh.faces;
    const std::size_t nf = fc.nInternalFaces;
    const std::size_t nb = mesh.nBoundaryFaces();
    FvMatrix m(mesh, psi.name, psi.nComponents);
    for (std::size_t f = 0; f < nf; ++f) {
        double w = fc.interpWeight[f];
        double gf = w * gamma.data[fc.owner[f]] + (1.0 - w) * gamma.data[fc.neighbor[f]];
        double coeff = gf * fc.deltaCoeff[f] * fc.faceArea[f];
        m.ldu.upper[f] = coeff;
        m.ldu.lower[f] = coeff;
    }
    for (std::size_t cell = 0; cell < mesh.nCells(); ++cell) {
        double d = 0.0;
        for (const auto& e : mesh.cellFaces(cell)) d -= e.sign > 0.0 ? m.ldu.upper[e.face] : m.ldu.lower[e.face];
        m.ldu.diag[cell] = d;
    }
    for (std::size_t p = 0; p < mesh.patches.size(); ++p) {
        const auto& bp = mesh.patches[p];
        if (bp.kind == PatchKind::Periodic) continue;
        Closure kind = psi.boundary[p].kind;
        if (kind == Closure::ZeroGradient) continue;
        if (kind != Closure::FixedValue) {
            throw InvalidArgument("fvmLaplacian: '" + psi.name + "' has no closure on patch " + bp.name);
        }
        for (std::size_t l = 0; l < bp.size(); ++l) {
            std::size_t b = bp.start + l;
            double coeff = gamma.data[bp.faceCells[l]] * bp.deltaCoeff * bp.faceArea;
            m.internalCoeffs[b] = -coeff;
            for (std::size_t c = 0; c < psi.nComponents; ++c)
                m.boundaryCoeffs[c * nb + b] = -coeff * psi.boundary[p].values[c * bp.size() + l];
        }
    }
    return m;
}

FvMatrix fvmSp(const CellField& coeff, const CellField& psi) {
    requireField(coeff, "coefficient");
    requireField(psi, "unknown");
    requireSameMesh(coeff, psi);
    const Mesh& mesh = *psi.mesh;
    FvMatrix m(mesh, psi.name, psi.nComponents);
    const double V = mesh.cells.cellVolume;
    for (std::size_t i = 0; i < mesh.nCells(); ++i) m.ldu.diag[i] = coeff.data[i] * V;
    return m;
}

FvMatrix fvmSu(const CellField& value, const CellField& psi) {
    requireField(value, "source");
    requireField(psi, "unknown");
    requireSameMesh(value, psi);
    if (value.nComponents != psi.nComponents) throw InvalidArgument("fvmSu: component count mismatch");
    const Mesh& mesh = *psi.mesh;
    FvMatrix m(mesh, psi.name, psi.nComponents);
    const double V = mesh.cells.cellVolume;
    for (std::size_t i = 0; i < m.source.size(); ++i) m.source[i] = value.data[i] * V;
    return m;
}

CellField diagA(const FvMatrix& m) {
    FvMatrix f = m.flattened();
    const Mesh& mesh = m.mesh();
    CellField a(mesh, 1, "A(" + m.psiName() + ")");
    const double invV = 1.0 / mesh.cells.cellVolume;
    for (std::size_t i = 0; i < mesh.nCells(); ++i) a.data[i] = f.ldu.diag[i] * invV;
    a.correctBoundary();
    return a;
}

CellField hOperator(const FvMatrix& m, const CellField& psi) {
    if (psi.nComponents != m.nComponents() || psi.mesh != &m.mesh()) {
        throw InvalidArgument("hOperator: field '" + psi.name + "' does not match the matrix");
    }
    FvMatrix f = m.flattened();
    const Mesh& mesh = m.mesh();
    const auto& fc = mesh.faces;
    const std::size_t n = mesh.nCells();
    CellField h(mesh, psi.nComponents, "H(" + psi.name + ")");
    const double invV = 1.0 / mesh.cells.cellVolume;
    for (std::size_t c = 0; c < psi.nComponents; ++c) {
        auto x = psi.component(c);
        for (std::size_t cell = 0; cell < n; ++cell) {
            double s = f.source[c * n + cell];
            for (const auto& e : mesh.cellFaces(cell)) {
                if (e.sign > 0.0) s -= f.ldu.upper[e.face] * x[fc.neighbor[e.face]];
                else s -= f.ldu.lower[e.face] * x[fc.owner[e.face]];
            }
            h.data[c * n + cell] = s * invV;
        }
    }
    h.correctBoundary();
    return h;
}

bool SolverReport::converged() const {
    return std::all_of(components.begin(), components.end(), [](const SolveResult& r) { return r.converged; });
}

std::size_t SolverReport::iterations() const {
    std::size_t it = 0;
    for (const auto& r : components) it = std::max(it, r.iterations);
    return it;
}

double SolverReport::maxFinalResidual() const {
    double r = 0.0;
    for (const auto& c : components) r = std::max(r, c.finalResidual);
    return r;
}

SolverReport solveFv(const FvMatrix& m, CellField& psi, const SolverControls& controls) {
    if (psi.name != m.psiName() || psi.nComponents != m.nComponents() || psi.mesh != &m.mesh()) {
        throw InvalidArgument("solveFv: field '" + psi.name + "' is not the unknown '" + m.psiName() + "'");
    }
    FlatSystem sys = flatten(m);
    const std::size_t n = m.mesh().nCells();
    SolverReport report;
    report.symmetric = sys.ldu.symmetric();
    bool negate = false;
    if (report.symmetric) {
        negate = std::all_of(sys.ldu.diag.begin(), sys.ldu.diag.end(), [](double d) { return d <= 0.0; }) &&
                 std::any_of(sys.ldu.diag.begin(), sys.ldu.diag.end(), [](double d) { return d < 0.0; });
        if (negate) {
            for (auto* v : {&sys.ldu.diag, &sys.ldu.upper, &sys.ldu.lower, &sys.rhs})
                for (double& x : *v) x = -x;
        }
    }
    CsrMatrix A = lduToCsr(sys.ldu);
    SolverControls ctl = controls;
    if (!report.symmetric) ctl.kind = SolverKind::BiCgStab;
    report.solver = toString(ctl.kind);
    AmgHierarchy amg;
    if (ctl.kind == SolverKind::AmgPcg) amg = amgSetup(A);
    for (std::size_t c = 0; c < psi.nComponents; ++c) {
        std::span<const double> b(sys.rhs.data() + c * n, n);
        std::span<double> x = psi.component(c);
        SolveResult r = ctl.kind == SolverKind::BiCgStab ? bicgstabSolve(A, b, x, ctl)
                        : ctl.kind == SolverKind::AmgPcg ? pcgSolve(A, b, x, ctl, &amg)
                                                         : pcgSolve(A, b, x, ctl);
        report.components.push_back(std::move(r));
    }
    psi.correctBoundary();
    if (!report.converged()) {
        std::string msg = "solver " + report.solver + " did not converge for '" + psi.name + "'";
        for (std::size_t c = 0; c < report.components.size(); ++c) {
            const auto& r = report.components[c];
            msg += "; component " + std::to_string(c) + ": " + r.diagnostic + ", residual " +
                   std::to_string(r.finalResidual) + " after " + std::to_string(r.iterations) + " iterations";
            if (!r.history.empty()) {
                msg += " (history:";
                std::size_t step = std::max<std::size_t>(1, r.history.size() / 8);
                for (std::size_t k = 0; k < r.history.size(); k += step) msg += " " + std::to_string(r.history[k]);
                msg += ")";
            }
        }
        throw ConvergenceError(msg);
    }
    return report;
}

} // namespace rflow
