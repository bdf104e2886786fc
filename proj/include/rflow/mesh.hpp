#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace rflow {

using Vec3 = std::array<double, 3>;

enum class PatchKind { FixedValue, ZeroGradient, Periodic };

/// Sides of the box, in the order patches are emitted.
enum class Side { XMin = 0, XMax, YMin, YMax, ZMin, ZMax };

const char* toString(PatchKind kind);
const char* toString(Side side);
PatchKind patchKindFromString(const std::string& s);

struct PatchSpec {
    std::array<PatchKind, 6> kinds{};

    static PatchSpec uniform(PatchKind kind);
    static PatchSpec allPeriodic() { return uniform(PatchKind::Periodic); }
    PatchKind& operator[](Side s) { return kinds[static_cast<int>(s)]; }
    PatchKind operator[](Side s) const { return kinds[static_cast<int>(s)]; }
};

/// Uniform Cartesian cells. Cell index = i + nx*j + nx*ny*k (i fastest).
struct StructuredMesh {
    std::array<std::size_t, 3> dims{};
    Vec3 lengths{};
    Vec3 spacing{};
    std::size_t nCells = 0;
    double cellVolume = 0.0;
    std::vector<Vec3> cellCenters;

    std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
        return i + dims[0] * (j + dims[1] * k);
    }
};

/// Internal-face addressing of the LDU layout. Faces are sorted by
/// (owner, neighbor) and owner < neighbor always holds; the normal points
/// from owner to neighbor (across the wrap for periodic faces).
struct FaceConnectivity {
    std::size_t nInternalFaces = 0;
    std::vector<std::size_t> owner;
    std::vector<std::size_t> neighbor;
    std::vector<double> faceArea;
    std::vector<Vec3> faceNormal;
    std::vector<double> deltaCoeff;
    std::vector<double> interpWeight;
    std::vector<Vec3> faceCenter; // owner-side position for wrap faces
};

struct BoundaryPatch {
    std::string name;
    PatchKind kind = PatchKind::ZeroGradient;
    Side side = Side::XMin;
    std::vector<std::size_t> faceCells; // adjacent cell per face, (j,k)-ordered
    double faceArea = 0.0;
    double deltaCoeff = 0.0;            // 2 / spacing along the normal
    Vec3 normal{};                      // outward
    std::string pairPatch;              // periodic only
    std::size_t start = 0;              // offset into boundary-face numbering (non-periodic)
    std::vector<std::size_t> wrapFaces; // internal faces realising this periodic side

    std::size_t size() const { return faceCells.size(); }
};

struct FaceGeometry {
    double area;
    Vec3 normal;
    double deltaCoeff;
};

/// Faces of a cell, listed in ascending face order. sign = +1 when the cell
/// owns the internal face, -1 when it is the neighbor.
struct CellFaceEntry {
    std::size_t face;
    double sign;
};

class Mesh {
public:
    StructuredMesh cells;
    FaceConnectivity faces;
    std::vector<BoundaryPatch> patches;

    std::size_t nCells() const { return cells.nCells; }
    std::size_t nInternalFaces() const { return faces.nInternalFaces; }
    /// Faces on non-periodic patches; periodic sides contribute none.
    std::size_t nBoundaryFaces() const { return nBoundaryFaces_; }

    std::size_t patchFaceCount(std::size_t patch) const;
    /// Global face numbering: [0, nInternal) internal, then boundary faces
    /// of non-periodic patches in patch order.
    FaceGeometry faceGeometry(std::size_t face) const;

    /// Per-cell face lists used by every face-to-cell accumulation.
    const std::vector<CellFaceEntry>& cellFaces(std::size_t cell) const { return cellFaces_[cell]; }
    /// Boundary face indices (boundary numbering) adjacent to a cell.
    const std::vector<std::size_t>& cellBoundaryFaces(std::size_t cell) const {
        return cellBoundaryFaces_[cell];
    }
    /// Patch and local index of a boundary face.
    std::pair<std::size_t, std::size_t> boundaryFaceLocation(std::size_t bface) const {
        return boundaryFaceLoc_[bface];
    }
    bool allPeriodic() const;

private:
    friend Mesh buildCartesianMesh(const std::array<std::size_t, 3>&, const Vec3&, const PatchSpec&);
    std::size_t nBoundaryFaces_ = 0;
    std::vector<std::vector<CellFaceEntry>> cellFaces_;
    std::vector<std::vector<std::size_t>> cellBoundaryFaces_;
    std::vector<std::pair<std::size_t, std::size_t>> boundaryFaceLoc_;
};

/// Periodic directions wrap the last cell layer onto the first via internal
/// faces. A periodic direction with a single cell emits no faces at all: a
/// face joining a cell to itself carries equal and opposite contributions in
/// every conservative operator.
Mesh buildCartesianMesh(const std::array<std::size_t, 3>& dims, const Vec3& lengths,
                        const PatchSpec& patches);

} // namespace rflow
