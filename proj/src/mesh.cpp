#include "rflow/mesh.hpp"

#include "rflow/error.hpp"

#include <algorithm>
#include <numeric>

namespace rflow {

const char* toString(PatchKind kind) {
    switch (kind) {
        case PatchKind::FixedValue:   return "fixedValue";
        case PatchKind::ZeroGradient: return "zeroGradient";
        case PatchKind::Periodic:     return "periodic";
    }
    return "unknown";
}

const char* toString(Side side) {
    static const char* names[] = {"xmin", "xmax", "ymin", "ymax", "zmin", "zmax"};
    return names[static_cast<int>(side)];
}

PatchKind patchKindFromString(const std::string& s) {
    if (s == "fixedValue") return PatchKind::FixedValue;
    if (s == "zeroGradient") return PatchKind::ZeroGradient;
    if (s == "periodic") return PatchKind::Periodic;
    throw InvalidArgument("unknown patch kind '" + s + "'");
}

PatchSpec PatchSpec::uniform(PatchKind kind) {
    PatchSpec spec;
    spec.kinds.fill(kind);
    return spec;
}

std::size_t Mesh::patchFaceCount(std::size_t patch) const {
    if (patch >= patches.size()) {
        throw InvalidArgument("patch index " + std::to_string(patch) + " out of range");
    }
    return patches[patch].size();
}

FaceGeometry Mesh::faceGeometry(std::size_t face) const {
    if (face < faces.nInternalFaces) {
        return {faces.faceArea[face], faces.faceNormal[face], faces.deltaCoeff[face]};
    }
    std::size_t b = face - faces.nInternalFaces;
    if (b >= nBoundaryFaces_) {
        throw InvalidArgument("face index " + std::to_string(face) + " out of range");
    }
    const auto& p = patches[boundaryFaceLoc_[b].first];
    return {p.faceArea, p.normal, p.deltaCoeff};
}

bool Mesh::allPeriodic() const {
    return std::all_of(patches.begin(), patches.end(),
                       [](const BoundaryPatch& p) { return p.kind == PatchKind::Periodic; });
}

namespace {

struct RawFace {
    std::size_t owner, neighbor;
    int dir;
    bool wrap;
    Vec3 center;
};

} // namespace

Mesh buildCartesianMesh(const std::array<std::size_t, 3>& dims, const Vec3& lengths,
                        const PatchSpec& spec) {
    for (int d = 0; d < 3; ++d) {
        if (dims[d] < 1) throw InvalidArgument("mesh dimension " + std::to_string(d) + " has zero extent");
        if (!(lengths[d] > 0.0)) throw InvalidArgument("mesh length " + std::to_string(d) + " must be positive");
        bool lo = spec.kinds[2 * d] == PatchKind::Periodic;
        bool hi = spec.kinds[2 * d + 1] == PatchKind::Periodic;
        if (lo != hi) {
            throw InvalidArgument(std::string("periodic side ") + toString(static_cast<Side>(lo ? 2 * d : 2 * d + 1)) +
                                  " has no periodic partner");
        }
    }

    Mesh mesh;
    auto& sm = mesh.cells;
    sm.dims = dims;
    sm.lengths = lengths;
    for (int d = 0; d < 3; ++d) sm.spacing[d] = lengths[d] / static_cast<double>(dims[d]);
    sm.nCells = dims[0] * dims[1] * dims[2];
    sm.cellVolume = sm.spacing[0] * sm.spacing[1] * sm.spacing[2];
    sm.cellCenters.resize(sm.nCells);
    for (std::size_t k = 0; k < dims[2]; ++k)
        for (std::size_t j = 0; j < dims[1]; ++j)
            for (std::size_t i = 0; i < dims[0]; ++i)
                sm.cellCenters[sm.index(i, j, k)] = {(i + 0.5) * sm.spacing[0], (j + 0.5) * sm.spacing[1],
                                                     (k + 0.5) * sm.spacing[2]};

    auto area = [&](int d) { return sm.spacing[(d + 1) % 3] * sm.spacing[(d + 2) % 3]; };

    std::vector<RawFace> raw;
    raw.reserve(3 * sm.nCells);
    for (std::size_t k = 0; k < dims[2]; ++k) {
        for (std::size_t j = 0; j < dims[1]; ++j) {
            for (std::size_t i = 0; i < dims[0]; ++i) {
                std::array<std::size_t, 3> ijk{i, j, k};
                std::size_t c = sm.index(i, j, k);
                for (int d = 0; d < 3; ++d) {
                    Vec3 center = sm.cellCenters[c];
                    if (ijk[d] + 1 < dims[d]) {
                        auto n = ijk;
                        ++n[d];
                        center[d] += 0.5 * sm.spacing[d];
                        raw.push_back({c, sm.index(n[0], n[1], n[2]), d, false, center});
                    } else if (spec.kinds[2 * d] == PatchKind::Periodic && dims[d] >= 2) {
                        auto o = ijk;
                        o[d] = 0;
                        std::size_t own = sm.index(o[0], o[1], o[2]);
                        center = sm.cellCenters[own];
                        center[d] -= 0.5 * sm.spacing[d];
                        raw.push_back({own, c, d, true, center});
                    }
                }
            }
        }
    }

    std::vector<std::size_t> order(raw.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (raw[a].owner != raw[b].owner) return raw[a].owner < raw[b].owner;
        return raw[a].neighbor < raw[b].neighbor;
    });
    std::vector<std::size_t> sortedIndex(raw.size());

    auto& fc = mesh.faces;
    fc.nInternalFaces = raw.size();
    fc.owner.resize(raw.size());
    fc.neighbor.resize(raw.size());
    fc.faceArea.resize(raw.size());
    fc.faceNormal.resize(raw.size());
    fc.deltaCoeff.resize(raw.size());
    fc.interpWeight.assign(raw.size(), 0.5);
    fc.faceCenter.resize(raw.size());
    for (std::size_t f = 0; f < order.size(); ++f) {
        const RawFace& r = raw[order[f]];
        sortedIndex[order[f]] = f;
        fc.owner[f] = r.owner;
        fc.neighbor[f] = r.neighbor;
        fc.faceArea[f] = area(r.dir);
        Vec3 n{0.0, 0.0, 0.0};
        n[r.dir] = r.wrap ? -1.0 : 1.0;
        fc.faceNormal[f] = n;
        fc.deltaCoeff[f] = 1.0 / sm.spacing[r.dir];
        fc.faceCenter[f] = r.center;
    }

    // Wrap faces keyed by the cell on the min side, for the periodic patch listing.
    std::vector<std::array<std::size_t, 3>> wrapOf(sm.nCells, {SIZE_MAX, SIZE_MAX, SIZE_MAX});
    for (std::size_t r = 0; r < raw.size(); ++r) {
        if (raw[r].wrap) wrapOf[raw[r].owner][raw[r].dir] = sortedIndex[r];
    }

    std::size_t bStart = 0;
    for (int s = 0; s < 6; ++s) {
        int d = s / 2;
        bool hi = (s % 2) == 1;
        BoundaryPatch p;
        p.side = static_cast<Side>(s);
        p.name = toString(p.side);
        p.kind = spec.kinds[s];
        p.faceArea = area(d);
        p.deltaCoeff = 2.0 / sm.spacing[d];
        p.normal = {0.0, 0.0, 0.0};
        p.normal[d] = hi ? 1.0 : -1.0;
        int a = (d + 1) % 3, b = (d + 2) % 3;
        if (a > b) std::swap(a, b); // lower axis varies fastest
        for (std::size_t ib = 0; ib < dims[b]; ++ib) {
            for (std::size_t ia = 0; ia < dims[a]; ++ia) {
                std::array<std::size_t, 3> ijk{};
                ijk[d] = hi ? dims[d] - 1 : 0;
                ijk[a] = ia;
                ijk[b] = ib;
                std::size_t c = sm.index(ijk[0], ijk[1], ijk[2]);
                p.faceCells.push_back(c);
                if (p.kind == PatchKind::Periodic && dims[d] >= 2) {
                    auto lo = ijk;
                    lo[d] = 0;
                    p.wrapFaces.push_back(wrapOf[sm.index(lo[0], lo[1], lo[2])][d]);
                }
            }
        }
        if (p.kind == PatchKind::Periodic) {
            p.pairPatch = toString(static_cast<Side>(hi ? s - 1 : s + 1));
        } else {
            p.start = bStart;
            bStart += p.faceCells.size();
        }
        mesh.patches.push_back(std::move(p));
    }
    mesh.nBoundaryFaces_ = bStart;

    mesh.cellFaces_.assign(sm.nCells, {});
    for (std::size_t f = 0; f < fc.nInternalFaces; ++f) {
        mesh.cellFaces_[fc.owner[f]].push_back({f, 1.0});
        mesh.cellFaces_[fc.neighbor[f]].push_back({f, -1.0});
    }
    mesh.cellBoundaryFaces_.assign(sm.nCells, {});
    mesh.boundaryFaceLoc_.resize(bStart);
    for (std::size_t pi = 0; pi < mesh.patches.size(); ++pi) {
        const auto& p = mesh.patches[pi];
        if (p.kind == PatchKind::Periodic) continue;
        for (std::size_t l = 0; l < p.size(); ++l) {
            mesh.boundaryFaceLoc_[p.start + l] = {pi, l};
            mesh.cellBoundaryFaces_[p.faceCells[l]].push_back(p.start + l);
        }
    }
    return mesh;
}

} // namespace rflow
