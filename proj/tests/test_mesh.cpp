#include "doctest.h"

#include "rflow/error.hpp"
#include "rflow/mesh.hpp"

#include <cmath>
#include <random>
#include <set>

using namespace rflow;

namespace {

// Brute-force enumeration of face-sharing pairs in a fully periodic box,
// counting one face per (cell, positive direction) pair.
std::size_t bruteForcePeriodicFaceCount(std::size_t n) {
    std::size_t count = 0;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < n; ++i)
                for (int d = 0; d < 3; ++d) {
                    std::array<std::size_t, 3> a{i, j, k}, b = a;
                    b[d] = (b[d] + 1) % n;
                    if (a != b) ++count;
                }
    return count;
}

} // namespace

TEST_CASE("two-cell wall mesh has a single internal face") {
    Mesh m = buildCartesianMesh({2, 1, 1}, {1.0, 0.5, 0.5}, PatchSpec::uniform(PatchKind::FixedValue));
    REQUIRE(m.nInternalFaces() == 1);
    CHECK(m.faces.owner[0] == 0);
    CHECK(m.faces.neighbor[0] == 1);
    CHECK(m.faces.deltaCoeff[0] == doctest::Approx(2.0));
    CHECK(m.faces.faceArea[0] == doctest::Approx(0.25));
    CHECK(m.nBoundaryFaces() == 10);
}

TEST_CASE("periodic face counts match enumeration") {
    for (std::size_t n : {1u, 2u, 3u, 4u, 5u}) {
        Mesh m = buildCartesianMesh({n, n, n}, {1.0, 1.0, 1.0}, PatchSpec::allPeriodic());
        CHECK(m.nInternalFaces() == bruteForcePeriodicFaceCount(n));
        CHECK(m.nBoundaryFaces() == 0);
        if (n > 1) CHECK(m.nInternalFaces() == 3 * n * n * n);
    }
    Mesh m3 = buildCartesianMesh({3, 3, 3}, {1.0, 1.0, 1.0}, PatchSpec::allPeriodic());
    CHECK(m3.nInternalFaces() == 81);
}

TEST_CASE("edge length 2 pi L spacing") {
    const double L = 1e-3, edge = 2.0 * M_PI * L;
    Mesh m = buildCartesianMesh({8, 8, 8}, {edge, edge, edge}, PatchSpec::allPeriodic());
    for (int d = 0; d < 3; ++d) CHECK(m.cells.spacing[d] == doctest::Approx(edge / 8.0).epsilon(1e-15));
    CHECK(m.cells.cellVolume == doctest::Approx(std::pow(edge / 8.0, 3)).epsilon(1e-14));
}

TEST_CASE("face geometry") {
    Mesh unit = buildCartesianMesh({1, 1, 1}, {1.0, 1.0, 1.0}, PatchSpec::uniform(PatchKind::ZeroGradient));
    REQUIRE(unit.nBoundaryFaces() == 6);
    for (std::size_t f = 0; f < 6; ++f) CHECK(unit.faceGeometry(f).area == doctest::Approx(1.0));
    CHECK_THROWS_AS(unit.faceGeometry(6), InvalidArgument);
    CHECK_THROWS_AS(unit.patchFaceCount(6), InvalidArgument);

    Mesh half = buildCartesianMesh({2, 1, 1}, {1.0, 1.0, 1.0}, PatchSpec::uniform(PatchKind::FixedValue));
    CHECK(half.faceGeometry(0).deltaCoeff == doctest::Approx(2.0));
    CHECK(half.patches[0].deltaCoeff == doctest::Approx(4.0));
    CHECK(half.faceGeometry(1).deltaCoeff == doctest::Approx(4.0));
    CHECK(half.patchFaceCount(0) == 1);
    CHECK(half.patchFaceCount(2) == 2);
}

TEST_CASE("invalid specifications are rejected") {
    CHECK_THROWS_AS(buildCartesianMesh({0, 1, 1}, {1, 1, 1}, PatchSpec::allPeriodic()), InvalidArgument);
    CHECK_THROWS_AS(buildCartesianMesh({1, 1, 1}, {1, -1, 1}, PatchSpec::allPeriodic()), InvalidArgument);
    PatchSpec bad = PatchSpec::uniform(PatchKind::FixedValue);
    bad[Side::XMin] = PatchKind::Periodic;
    CHECK_THROWS_AS(buildCartesianMesh({2, 2, 2}, {1, 1, 1}, bad), InvalidArgument);
}

TEST_CASE("connectivity invariants on random meshes") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> dimDist(1, 5), kindDist(0, 2);
    for (int trial = 0; trial < 40; ++trial) {
        std::array<std::size_t, 3> dims;
        PatchSpec spec;
        for (int d = 0; d < 3; ++d) {
            dims[d] = static_cast<std::size_t>(dimDist(rng));
            PatchKind k = static_cast<PatchKind>(kindDist(rng));
            spec.kinds[2 * d] = k;
            spec.kinds[2 * d + 1] = k == PatchKind::Periodic ? k : static_cast<PatchKind>(kindDist(rng) % 2);
        }
        Vec3 lengths{0.3 * double(dims[0]), 0.7, 1.1};
        Mesh m = buildCartesianMesh(dims, lengths, spec);
        const auto& fc = m.faces;
        CHECK(m.nCells() == dims[0] * dims[1] * dims[2]);
        for (std::size_t f = 0; f < fc.nInternalFaces; ++f) {
            CHECK(fc.owner[f] < fc.neighbor[f]);
            CHECK(fc.deltaCoeff[f] > 0.0);
            CHECK(fc.interpWeight[f] == 0.5);
            if (f > 0) {
                bool sorted = std::pair(fc.owner[f - 1], fc.neighbor[f - 1]) <= std::pair(fc.owner[f], fc.neighbor[f]);
                CHECK(sorted);
            }
        }
        // Closed control volumes: outward S_f n_f sums to zero per cell.
        std::vector<Vec3> sum(m.nCells(), Vec3{0, 0, 0});
        for (std::size_t f = 0; f < fc.nInternalFaces; ++f)
            for (int d = 0; d < 3; ++d) {
                sum[fc.owner[f]][d] += fc.faceArea[f] * fc.faceNormal[f][d];
                sum[fc.neighbor[f]][d] -= fc.faceArea[f] * fc.faceNormal[f][d];
            }
        std::size_t exterior = 0;
        for (const auto& bp : m.patches) {
            if (bp.kind == PatchKind::Periodic) continue;
            exterior += bp.size();
            for (std::size_t c : bp.faceCells)
                for (int d = 0; d < 3; ++d) sum[c][d] += bp.faceArea * bp.normal[d];
        }
        for (const auto& s : sum)
            for (int d = 0; d < 3; ++d) CHECK(std::abs(s[d]) < 1e-14);
        CHECK(exterior == m.nBoundaryFaces());
        // Periodic pairs have equal counts.
        for (const auto& bp : m.patches) {
            if (bp.kind != PatchKind::Periodic) continue;
            for (const auto& other : m.patches)
                if (other.name == bp.pairPatch) CHECK(other.size() == bp.size());
        }

        Mesh again = buildCartesianMesh(dims, lengths, spec);
        CHECK(again.faces.owner == fc.owner);
        CHECK(again.faces.neighbor == fc.neighbor);
    }
}
