#pragma once

#include "rflow/mesh.hpp"

#include <span>
#include <string>
#include <vector>

namespace rflow {

/// Boundary closure of a field on one patch. Undefined is only legal on
/// periodic patches; operators that need a closure reject it elsewhere.
enum class Closure { Undefined, FixedValue, ZeroGradient, Periodic };

struct PatchField {
    Closure kind = Closure::Undefined;
    std::vector<double> values; // fixedValue data, component-major over the patch faces
};

/// Cell-centred data in component-major layout: all cells of component 0,
/// then all cells of component 1, and so on. The layout is part of the
/// contract; kernels iterate cells innermost.
struct CellField {
    const Mesh* mesh = nullptr;
    std::string name;
    std::size_t nComponents = 0;
    std::vector<double> data;
    std::vector<PatchField> boundary;

    CellField() = default;
    /// Closures default from the mesh patch kinds; fixedValue patches start at `value`.
    CellField(const Mesh& m, std::size_t nComp, std::string fieldName = {}, double value = 0.0);

    std::size_t nCells() const { return mesh ? mesh->nCells() : 0; }
    double& operator()(std::size_t comp, std::size_t cell) { return data[comp * nCells() + cell]; }
    double operator()(std::size_t comp, std::size_t cell) const { return data[comp * nCells() + cell]; }
    std::span<double> component(std::size_t comp) { return {data.data() + comp * nCells(), nCells()}; }
    std::span<const double> component(std::size_t comp) const {
        return {data.data() + comp * nCells(), nCells()};
    }

    /// Closure-resolved face value on a non-periodic patch.
    double boundaryValue(std::size_t patch, std::size_t comp, std::size_t localFace) const;
    void setFixedValue(std::size_t patch, std::span<const double> perComponent);
    void setClosure(std::size_t patch, Closure kind);
    /// Refresh stored values of zeroGradient patches from the adjacent cells.
    void correctBoundary();
};

/// Face-centred data over internal faces (component-major) plus per-patch
/// boundary face values. Periodic patches carry no boundary values.
struct FaceField {
    const Mesh* mesh = nullptr;
    std::size_t nComponents = 0;
    std::vector<double> data;
    std::vector<std::vector<double>> boundary;

    FaceField() = default;
    FaceField(const Mesh& m, std::size_t nComp, double value = 0.0);

    std::size_t nInternalFaces() const { return mesh ? mesh->nInternalFaces() : 0; }
    double& operator()(std::size_t comp, std::size_t face) { return data[comp * nInternalFaces() + face]; }
    double operator()(std::size_t comp, std::size_t face) const { return data[comp * nInternalFaces() + face]; }
};

/// Face value = w*owner + (1-w)*neighbor; boundary faces take the closure value.
FaceField interpolateLinear(const CellField& field);

/// Face value = owner value when flux >= 0, neighbor value otherwise. On
/// boundary faces, outflow takes the cell value and inflow the closure value.
FaceField interpolateUpwind(const CellField& field, const FaceField& flux);

/// Gauss gradient (1/V) sum psi_f S_f n_f of a scalar field; returns three components.
CellField gaussGradient(const CellField& scalar);

/// (1/V) times the net outgoing flux of each cell; flux already includes area.
CellField explicitDivergence(const FaceField& flux);

struct CourantReport {
    double maxCo = 0.0;
    std::size_t cell = 0;
};

/// Co = dt * max_cells (sum_f |flux_f|) / (2V) with a volumetric face flux.
CourantReport courantNumber(const FaceField& volumetricFlux, const Mesh& mesh, double dt);

/// Volumetric flux of a cell velocity field, U_f . S_f, using linear interpolation.
FaceField faceFluxOf(const CellField& velocity);

} // namespace rflow
