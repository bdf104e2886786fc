#pragma once

// Random dyadic transport problems shared by the assembly tests. Every value
// is a short dyadic rational and every spacing a power of two, so sums are
// exact in any order and the dense oracle can be compared with ==.

#include "oracles.hpp"

#include <memory>

namespace oracle {

struct AssemblyCase {
    std::unique_ptr<rflow::Mesh> mesh;
    ScalarProblem problem;
    rflow::CellField rho, rhoOld, psi, psiOld, gamma;
    rflow::FaceField flux;
};

inline AssemblyCase randomAssemblyCase(std::mt19937_64& rng) {
    AssemblyCase ac;
    std::uniform_int_distribution<int> dimDist(1, 4), expDist(-3, 1), coin(0, 1);
    std::array<std::size_t, 3> dims;
    rflow::Vec3 lengths;
    rflow::PatchSpec spec;
    Box box;
    for (int d = 0; d < 3; ++d) {
        dims[d] = static_cast<std::size_t>(dimDist(rng));
        box.h[d] = std::ldexp(1.0, expDist(rng));
        lengths[d] = box.h[d] * static_cast<double>(dims[d]);
        box.periodic[d] = coin(rng) == 1;
        for (int s = 0; s < 2; ++s) {
            spec.kinds[2 * d + s] = box.periodic[d] ? rflow::PatchKind::Periodic
                                    : coin(rng)     ? rflow::PatchKind::FixedValue
                                                    : rflow::PatchKind::ZeroGradient;
        }
    }
    box.dims = dims;
    ac.mesh = std::make_unique<rflow::Mesh>(rflow::buildCartesianMesh(dims, lengths, spec));
    const rflow::Mesh& m = *ac.mesh;
    const std::size_t n = m.nCells();

    ScalarProblem& p = ac.problem;
    p.box = box;
    p.upwind = coin(rng) == 1;
    p.rho.resize(n);
    p.rhoOld.resize(n);
    p.psiOld.resize(n);
    p.gamma.resize(n);
    for (std::size_t c = 0; c < n; ++c) {
        p.rho[c] = dyadic(rng, 3, 4, true);
        p.rhoOld[c] = dyadic(rng, 3, 4, true);
        p.psiOld[c] = dyadic(rng, 3, 4);
        p.gamma[c] = dyadic(rng, 3, 4, true);
    }
    // Outward flux through the max side of every cell along each axis, plus
    // independent values for min-side walls.
    std::vector<std::array<double, 3>> fPlus(n), fWallMin(n);
    for (std::size_t c = 0; c < n; ++c)
        for (int d = 0; d < 3; ++d) {
            fPlus[c][d] = dyadic(rng, 3, 4);
            fWallMin[c][d] = dyadic(rng, 3, 4);
        }
    p.flux.assign(n, {});
    for (std::size_t c = 0; c < n; ++c) {
        for (const Link& l : links(box, c)) {
            int d = l.side / 2;
            if (l.side % 2 == 1) p.flux[c][l.side] = fPlus[c][d];
            else p.flux[c][l.side] = l.wall ? fWallMin[c][d] : -fPlus[l.cell][d];
        }
    }
    for (int s = 0; s < 6; ++s) {
        p.psiWall[s] = dyadic(rng, 3, 4);
        p.zeroGradient[s] = spec.kinds[s] == rflow::PatchKind::ZeroGradient;
    }

    auto fill = [&](rflow::CellField& f, const std::vector<double>& v, const char* name) {
        f = rflow::CellField(m, 1, name);
        f.data = v;
    };
    fill(ac.rho, p.rho, "rho");
    fill(ac.rhoOld, p.rhoOld, "rho");
    fill(ac.psiOld, p.psiOld, "psi");
    fill(ac.gamma, p.gamma, "gamma");
    ac.psi = rflow::CellField(m, 1, "psi");
    for (std::size_t pi = 0; pi < m.patches.size(); ++pi) {
        const auto& bp = m.patches[pi];
        if (bp.kind != rflow::PatchKind::FixedValue) continue;
        double v = p.psiWall[static_cast<int>(bp.side)];
        ac.psi.setFixedValue(pi, std::span<const double>(&v, 1));
    }
    ac.psi.correctBoundary();

    ac.flux = rflow::FaceField(m, 1);
    for (std::size_t f = 0; f < m.nInternalFaces(); ++f) {
        std::size_t o = m.faces.owner[f], nb = m.faces.neighbor[f];
        const auto& nrm = m.faces.faceNormal[f];
        int d = std::abs(nrm[0]) > 0.5 ? 0 : std::abs(nrm[1]) > 0.5 ? 1 : 2;
        ac.flux.data[f] = nrm[d] > 0.0 ? fPlus[o][d] : -fPlus[nb][d];
    }
    for (std::size_t pi = 0; pi < m.patches.size(); ++pi) {
        const auto& bp = m.patches[pi];
        if (bp.kind == rflow::PatchKind::Periodic) continue;
        int side = static_cast<int>(bp.side);
        int d = side / 2;
        for (std::size_t l = 0; l < bp.size(); ++l) {
            std::size_t c = bp.faceCells[l];
            ac.flux.boundary[pi][l] = side % 2 == 1 ? fPlus[c][d] : fWallMin[c][d];
        }
    }
    return ac;
}

/// Library assembly of the same operator, flattened and densified.
inline std::pair<Dense, std::vector<double>> libraryAssemble(const AssemblyCase& ac) {
    rflow::TimeLevels old{&ac.rhoOld, &ac.psiOld, nullptr, nullptr};
    rflow::DivScheme div = ac.problem.upwind ? rflow::DivScheme::Upwind : rflow::DivScheme::Linear;
    rflow::FvMatrix eq = rflow::fvmDdt(ac.rho, ac.psi, ac.problem.dt, rflow::DdtScheme::Euler, old) +
                         rflow::fvmDiv(ac.flux, ac.psi, div) - rflow::fvmLaplacian(ac.gamma, ac.psi);
    rflow::FlatSystem sys = rflow::flatten(eq);
    return {densify(sys.ldu), sys.rhs};
}

} // namespace oracle
