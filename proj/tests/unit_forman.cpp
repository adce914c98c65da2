#include "doctest.h"
#include "poreflow/forman.hpp"
#include "poreflow/grid.hpp"
#include "support/checks.hpp"
#include "support/oracles.hpp"

#include <set>

using namespace pf;
using pftest::expect_error;
using pftest::sp_max_abs;

namespace {

// compares the constructed cell lists against the boolean-product oracle
void check_census_against_oracle(const CellComplex& M, const FormanComplex& K) {
    pftest::PairCensus census = pftest::enumerate_pairs(M);
    for (int g = 0; g < 4; ++g) {
        REQUIRE(long(K.N[g]) == census.count[g]);
        std::vector<std::array<int, 4>> got;
        for (const FormanCell& c : K.cells[g]) got.push_back({c.ud, c.ui, c.ld, c.li});
        std::sort(got.begin(), got.end());
        CHECK(got == census.pairs[g]);
    }
}

void check_k_invariants(const CellComplex& M, const FormanComplex& K) {
    int total = M.N[0] + M.N[1] + M.N[2] + M.N[3];
    CHECK(K.N[0] == total);
    CHECK(K.euler() == M.euler());
    CHECK(sp_max_abs(SpMat(K.D[1] * K.D[2])) == 0.0);
    CHECK(sp_max_abs(SpMat(K.D[2] * K.D[3])) == 0.0);

    // compatible orientation: interior quads see two cubes with opposite signs
    std::vector<int> cnt(K.N[2], 0);
    std::vector<double> sum(K.N[2], 0.0);
    for (int k = 0; k < K.D[3].outerSize(); ++k)
        for (SpMat::InnerIterator it(K.D[3], k); it; ++it) {
            cnt[it.row()]++;
            sum[it.row()] += it.value();
        }
    for (int f = 0; f < K.N[2]; ++f) {
        CHECK(cnt[f] <= 2);
        if (cnt[f] == 2) CHECK(sum[f] == 0.0);
    }
}

void check_measure_partitions(const CellComplex& M, const FormanComplex& K, double tol = 1e-9) {
    // quasi-cube volumes tile each M 3-cell, kite quads tile each face,
    // segments tile each edge (exact only for planar faces; callers pass a
    // loose tolerance for warped geometry)
    std::vector<double> vol(M.N[3], 0.0), area(M.N[2], 0.0), len(M.N[1], 0.0);
    for (int n = 0; n < K.N[3]; ++n) vol[K.cells[3][n].ui] += K.mu[3][n];
    for (int n = 0; n < K.N[2]; ++n)
        if (K.cells[2][n].ud == 2) area[K.cells[2][n].ui] += K.mu[2][n];
    for (int n = 0; n < K.N[1]; ++n)
        if (K.cells[1][n].ud == 1) len[K.cells[1][n].ui] += K.mu[1][n];
    for (int i = 0; i < M.N[3]; ++i) CHECK(vol[i] == doctest::Approx(M.mu[3][i]).epsilon(tol));
    for (int i = 0; i < M.N[2]; ++i) CHECK(area[i] == doctest::Approx(M.mu[2][i]).epsilon(tol));
    for (int i = 0; i < M.N[1]; ++i) CHECK(len[i] == doctest::Approx(M.mu[1][i]).epsilon(1e-12));
}

RawComplex square_pyramid() {
    RawComplex R;
    R.nodes = {V3(0, 0, 0), V3(1, 0, 0), V3(1, 1, 0), V3(0, 1, 0), V3(0.5, 0.5, 1)};
    R.edges = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {0, 4}, {1, 4}, {2, 4}, {3, 4}};
    R.faces = {{0, 1, 2, 3}, {0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {3, 0, 4}};
    R.vols = {{0, 1, 2, 3, 4}};
    return R;
}

} // namespace

TEST_CASE("tetrahedron subdivision census") {
    CellComplex M = tetra_fixture();
    FormanComplex K = build_forman(M);
    CHECK(K.N == std::array<int, 4>{15, 28, 18, 4});
    CHECK(K.euler() == 1);
    check_census_against_oracle(M, K);
    check_k_invariants(M, K);
    check_measure_partitions(M, K);
}

TEST_CASE("hexahedron subdivision census and kite values") {
    CellComplex M = structured_grid(1, 1, 1);
    FormanComplex K = build_forman(M);
    CHECK(K.N == std::array<int, 4>{27, 54, 36, 8});
    check_census_against_oracle(M, K);
    check_k_invariants(M, K);
    check_measure_partitions(M, K);

    // each of the 8 quasi-cubes of the unit cube has volume 1/8
    for (int n = 0; n < K.N[3]; ++n) CHECK(K.mu[3][n] == doctest::Approx(0.125).epsilon(1e-12));
    // the (volume -> face) segments have length 1/2
    for (int n = 0; n < K.N[1]; ++n) {
        const FormanCell& c = K.cells[1][n];
        if (c.ud == 3 && c.ld == 2) CHECK(K.mu[1][n] == doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("two-cube and perturbed grids") {
    CellComplex M = structured_grid(2, 1, 1, 2, 1, 1);
    CHECK(M.N == std::array<int, 4>{12, 20, 11, 2});
    FormanComplex K = build_forman(M);
    check_census_against_oracle(M, K);
    check_k_invariants(M, K);
    check_measure_partitions(M, K);

    // sheared grid: faces stay planar, so partitions remain exact away from
    // the axis-aligned special case
    RawComplex R = structured_grid_raw(3, 2, 2, 1, 1, 1);
    Eigen::Matrix3d A;
    A << 1.0, 0.3, -0.1, 0.0, 0.9, 0.25, 0.05, -0.2, 1.1;
    for (auto& p : R.nodes) p = A * p;
    CellComplex Ms = build_complex(R);
    FormanComplex Ks = build_forman(Ms);
    check_census_against_oracle(Ms, Ks);
    check_k_invariants(Ms, Ks);
    check_measure_partitions(Ms, Ks);

    // randomly warped interior: faces go nonplanar, combinatorics stay exact
    // and partitions only approximate (the kite split and the face fan span
    // different surfaces)
    RawComplex Rw = structured_grid_raw(3, 2, 2, 1, 1, 1);
    pftest::TestRng rng(7);
    for (auto& p : Rw.nodes) {
        bool inside = true;
        for (int c = 0; c < 3; ++c)
            if (p[c] == 0.0 || p[c] == 1.0) inside = false;
        if (!inside) continue;
        for (int c = 0; c < 3; ++c) p[c] += 0.04 * rng.sym();
    }
    CellComplex Mp = build_complex(Rw);
    FormanComplex Kp = build_forman(Mp);
    check_k_invariants(Mp, Kp);
    check_measure_partitions(Mp, Kp, 1e-2);
}

TEST_CASE("quasi-cube charts are Boolean intervals") {
    CellComplex M = tetra_fixture();
    FormanComplex K = build_forman(M);
    for (int n = 0; n < K.N[3]; ++n) {
        const QuasiCubeChart& ch = quasi_cube_chart(K, n);
        CHECK(ch.self == n);
        // base corner is the lower 0-cell, top the volume, whole cube free
        const FormanCell& c = K.cells[3][n];
        CHECK(ch.corner_mcell[0] == CellId{0, c.li});
        CHECK(ch.corner_mcell[7] == CellId{3, c.ui});
        // direction labels ascend
        CHECK(ch.dir_edges[0] < ch.dir_edges[1]);
        CHECK(ch.dir_edges[1] < ch.dir_edges[2]);
        // chart is a bijection onto the 27 closure cells
        std::set<std::pair<int, int>> seen; // (dim, id)
        for (int m = 0; m < 8; ++m) seen.insert({0, ch.corner[m]});
        for (int e = 0; e < 12; ++e) seen.insert({1, ch.edge[e]});
        for (int f = 0; f < 6; ++f) seen.insert({2, ch.face[f]});
        seen.insert({3, ch.self});
        CHECK(seen.size() == 27);
        // vertices are exactly the interval cells {(e -> e)}
        for (int m = 0; m < 8; ++m) {
            const FormanCell& vc = K.cells[0][ch.corner[m]];
            CHECK(vc.ud == vc.ld);
            CHECK(vc.ui == vc.li);
        }
        CHECK(std::abs(ch.sign) == 1.0);
    }
}

TEST_CASE("non-simple polyhedron is rejected with a topology error") {
    CellComplex M = build_complex(square_pyramid());
    // M itself is a valid complex
    CHECK(M.euler() == 1);
    expect_error(ErrKind::topology, [&] { build_forman(M); });
    try {
        build_forman(M);
    } catch (const Error& e) {
        // diagnostic names the offending vertex (the apex, node 4)
        CHECK(std::string(e.what()).find("vertex 4") != std::string::npos);
    }
}

TEST_CASE("forman usage error on empty complex") {
    CellComplex M;
    expect_error(ErrKind::usage, [&] { build_forman(M); });
}
