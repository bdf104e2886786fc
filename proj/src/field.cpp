#include "rflow/field.hpp"

#include "rflow/error.hpp"

#include <cmath>

namespace rflow {

namespace {

Closure closureOf(PatchKind kind) {
    switch (kind) {
        case PatchKind::FixedValue:   return Closure::FixedValue;
        case PatchKind::ZeroGradient: return Closure::ZeroGradient;
        case PatchKind::Periodic:     return Closure::Periodic;
    }
    return Closure::Undefined;
}

void requireMesh(const CellField& f) {
    if (!f.mesh) throw InvalidArgument("field '" + f.name + "' is not attached to a mesh");
    if (f.data.size() != f.nComponents * f.mesh->nCells()) {
        throw InvalidArgument("field '" + f.name + "' size does not match its mesh");
    }
}

void requireFlux(const FaceField& flux, const Mesh& mesh) {
    if (flux.mesh != &mesh || flux.nComponents != 1 || flux.data.size() != mesh.nInternalFaces()) {
        throw InvalidArgument("face flux does not match the mesh of the field");
    }
}

} // namespace

CellField::CellField(const Mesh& m, std::size_t nComp, std::string fieldName, double value)
    : mesh(&m), name(std::move(fieldName)), nComponents(nComp), data(nComp * m.nCells(), value) {
    boundary.resize(m.patches.size());
    for (std::size_t p = 0; p < m.patches.size(); ++p) {
        boundary[p].kind = closureOf(m.patches[p].kind);
        if (boundary[p].kind == Closure::FixedValue) {
            boundary[p].values.assign(nComp * m.patches[p].size(), value);
        }
    }
}

double CellField::boundaryValue(std::size_t patch, std::size_t comp, std::size_t localFace) const {
    const PatchField& pf = boundary[patch];
    const BoundaryPatch& bp = mesh->patches[patch];
    switch (pf.kind) {
        case Closure::FixedValue:   return pf.values[comp * bp.size() + localFace];
        case Closure::ZeroGradient: return (*this)(comp, bp.faceCells[localFace]);
        default:
            throw InvalidArgument("field '" + name + "' has no boundary closure on patch " + bp.name);
    }
}

void CellField::setFixedValue(std::size_t patch, std::span<const double> perComponent) {
    if (perComponent.size() != nComponents) throw InvalidArgument("fixed value needs one entry per component");
    const BoundaryPatch& bp = mesh->patches.at(patch);
    if (bp.kind == PatchKind::Periodic) throw InvalidArgument("cannot fix a value on periodic patch " + bp.name);
    PatchField& pf = boundary[patch];
    pf.kind = Closure::FixedValue;
    pf.values.resize(nComponents * bp.size());
    for (std::size_t c = 0; c < nComponents; ++c)
        for (std::size_t l = 0; l < bp.size(); ++l) pf.values[c * bp.size() + l] = perComponent[c];
}

void CellField::setClosure(std::size_t patch, Closure kind) {
    const BoundaryPatch& bp = mesh->patches.at(patch);
    if ((bp.kind == PatchKind::Periodic) != (kind == Closure::Periodic) && kind != Closure::Undefined) {
        throw InvalidArgument("closure does not match periodicity of patch " + bp.name);
    }
    boundary[patch].kind = kind;
    if (kind == Closure::ZeroGradient) {
        boundary[patch].values.resize(nComponents * bp.size());
        correctBoundary();
    }
}

void CellField::correctBoundary() {
    for (std::size_t p = 0; p < boundary.size(); ++p) {
        if (boundary[p].kind != Closure::ZeroGradient) continue;
        const BoundaryPatch& bp = mesh->patches[p];
        boundary[p].values.resize(nComponents * bp.size());
        for (std::size_t c = 0; c < nComponents; ++c)
            for (std::size_t l = 0; l < bp.size(); ++l)
                boundary[p].values[c * bp.size() + l] = (*this)(c, bp.faceCells[l]);
    }
}

FaceField::FaceField(const Mesh& m, std::size_t nComp, double value)
    : mesh(&m), nComponents(nComp), data(nComp * m.nInternalFaces(), value) {
    boundary.resize(m.patches.size());
    for (std::size_t p = 0; p < m.patches.size(); ++p) {
        if (m.patches[p].kind != PatchKind::Periodic) boundary[p].assign(nComp * m.patches[p].size(), value);
    }
}

FaceField interpolateLinear(const CellField& field) {
    requireMesh(field);
    const Mesh& mesh = *field.mesh;
    const auto& fc = mesh.faces;
    FaceField out(mesh, field.nComponents);
    const std::size_t nf = fc.nInternalFaces;
    for (std::size_t c = 0; c < field.nComponents; ++c) {
        auto psi = field.component(c);
        double* dst = out.data.data() + c * nf;
        for (std::size_t f = 0; f < nf; ++f) {
            double w = fc.interpWeight[f];
            dst[f] = w * psi[fc.owner[f]] + (1.0 - w) * psi[fc.neighbor[f]];
        }
    }
    for (std::size_t p = 0; p < mesh.patches.size(); ++p) {
        const auto& bp = mesh.patches[p];
        if (bp.kind == PatchKind::Periodic) continue;
        for (std::size_t c = 0; c < field.nComponents; ++c)
            for (std::size_t l = 0; l < bp.size(); ++l)
                out.boundary[p][c * bp.size() + l] = field.boundaryValue(p, c, l);
    }
    return out;
}

FaceField interpolateUpwind(const CellField& field, const FaceField& flux) {
    requireMesh(field);
    const Mesh& mesh = *field.mesh;
    requireFlux(flux, mesh);
    const auto& fc = mesh.faces;
    FaceField out(mesh, field.nComponents);
    const std::size_t nf = fc.nInternalFaces;
    for (std::size_t c = 0; c < field.nComponents; ++c) {
        auto psi = field.component(c);
        double* dst = out.data.data() + c * nf;
        for (std::size_t f = 0; f < nf; ++f) {
            dst[f] = flux.data[f] >= 0.0 ? psi[fc.owner[f]] : psi[fc.neighbor[f]];
        }
    }
    for (std::size_t p = 0; p < mesh.patches.size(); ++p) {
        const auto& bp = mesh.patches[p];
        if (bp.kind == PatchKind::Periodic) continue;
        for (std::size_t c = 0; c < field.nComponents; ++c)
            for (std::size_t l = 0; l < bp.size(); ++l)
                out.boundary[p][c * bp.size() + l] = flux.boundary[p][l] >= 0.0
                                                         ? field(c, bp.faceCells[l])
                                                         : field.boundaryValue(p, c, l);
    }
    return out;
}

CellField gaussGradient(const CellField& scalar) {
    requireMesh(scalar);
    if (scalar.nComponents != 1) throw InvalidArgument("gaussGradient expects a scalar field");
    const Mesh& mesh = *scalar.mesh;
    for (std::size_t p = 0; p < mesh.patches.size(); ++p) {
        if (mesh.patches[p].kind != PatchKind::Periodic && scalar.boundary[p].kind != Closure::FixedValue &&
            scalar.boundary[p].kind != Closure::ZeroGradient) {
            throw InvalidArgument("field '" + scalar.name + "' has undefined closure on patch " +
                                  mesh.patches[p].name);
        }
    }
    FaceField psiF = interpolateLinear(scalar);
    const auto& fc = mesh.faces;
    CellField grad(mesh, 3, "grad(" + scalar.name + ")");
    for (auto& pf : grad.boundary) {
        if (pf.kind != Closure::Periodic) pf.kind = Closure::ZeroGradient;
    }
    const double invV = 1.0 / mesh.cells.cellVolume;
    const std::size_t n = mesh.nCells();
    for (std::size_t cell = 0; cell < n; ++cell) {
        Vec3 g{0.0, 0.0, 0.0};
        for (const auto& e : mesh.cellFaces(cell)) {
            double s = psiF.data[e.face] * fc.faceArea[e.face] * e.sign;
            for (int d = 0; d < 3; ++d) g[d] += s * fc.faceNormal[e.face][d];
        }
        for (std::size_t b : mesh.cellBoundaryFaces(cell)) {
            auto [p, l] = mesh.boundaryFaceLocation(b);
            const auto& bp = mesh.patches[p];
            double s = psiF.boundary[p][l] * bp.faceArea;
            for (int d = 0; d < 3; ++d) g[d] += s * bp.normal[d];
        }
        for (int d = 0; d < 3; ++d) grad.data[d * n + cell] = g[d] * invV;
    }
    grad.correctBoundary();
    return grad;
}

CellField explicitDivergence(const FaceField& flux) {
    if (!flux.mesh) throw InvalidArgument("face flux is not attached to a mesh");
    const Mesh& mesh = *flux.mesh;
    requireFlux(flux, mesh);
    CellField div(mesh, 1, "div");
    const double invV = 1.0 / mesh.cells.cellVolume;
    for (std::size_t cell = 0; cell < mesh.nCells(); ++cell) {
        double s = 0.0;
        for (const auto& e : mesh.cellFaces(cell)) s += e.sign * flux.data[e.face];
        for (std::size_t b : mesh.cellBoundaryFaces(cell)) {
            auto [p, l] = mesh.boundaryFaceLocation(b);
            s += flux.boundary[p][l];
        }
        div.data[cell] = s * invV;
    }
    return div;
}

CourantReport courantNumber(const FaceField& flux, const Mesh& mesh, double dt) {
    requireFlux(flux, mesh);
    CourantReport rep;
    const double scale = dt / (2.0 * mesh.cells.cellVolume);
    for (std::size_t cell = 0; cell < mesh.nCells(); ++cell) {
        double s = 0.0;
        for (const auto& e : mesh.cellFaces(cell)) s += std::abs(flux.data[e.face]);
        for (std::size_t b : mesh.cellBoundaryFaces(cell)) {
            auto [p, l] = mesh.boundaryFaceLocation(b);
            s += std::abs(flux.boundary[p][l]);
        }
        double co = s * scale;
        if (co > rep.maxCo) {
            rep.maxCo = co;
            rep.cell = cell;
        }
    }
    return rep;
}

FaceField faceFluxOf(const CellField& velocity) {
    if (velocity.nComponents != 3) throw InvalidArgument("faceFluxOf expects a vector field");
    FaceField uf = interpolateLinear(velocity);
    const Mesh& mesh = *velocity.mesh;
    const auto& fc = mesh.faces;
    FaceField flux(mesh, 1);
    const std::size_t nf = fc.nInternalFaces;
    for (std::size_t f = 0; f < nf; ++f) {
        double s = 0.0;
        for (int d = 0; d < 3; ++d) s += uf.data[d * nf + f] * fc.faceNormal[f][d];
        flux.data[f] = s * fc.faceArea[f];
    }
    for (std::size_t p = 0; p < mesh.patches.size(); ++p) {
        const auto& bp = mesh.patches[p];
        if (bp.kind == PatchKind::Periodic) continue;
        for (std::size_t l = 0; l < bp.size(); ++l) {
            double s = 0.0;
            for (int d = 0; d < 3; ++d) s += uf.boundary[p][d * bp.size() + l] * bp.normal[d];
            flux.boundary[p][l] = s * bp.faceArea;
        }
    }
    return flux;
}

} // namespace rflow
