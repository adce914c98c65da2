#include "poreflow/forman.hpp"
#include "poreflow/errors.hpp"

#include <algorithm>
#include <cmath>

namespace pf {

namespace {

constexpr double kZeroMeasure = 1e-18;

bool contains(const std::vector<int>& sorted, int x) {
    return std::binary_search(sorted.begin(), sorted.end(), x);
}

// +1 if b is a rotation of a, -1 if a rotation of reversed a
double cyc_match(const std::array<int, 4>& a, const std::array<int, 4>& b) {
    for (int r = 0; r < 4; ++r) {
        bool ok = true;
        for (int k = 0; k < 4 && ok; ++k) ok = a[k] == b[(k + r) % 4];
        if (ok) return +1.0;
    }
    std::array<int, 4> rb{b[3], b[2], b[1], b[0]};
    for (int r = 0; r < 4; ++r) {
        bool ok = true;
        for (int k = 0; k < 4 && ok; ++k) ok = a[k] == rb[(k + r) % 4];
        if (ok) return -1.0;
    }
    fail(ErrKind::topology, "quadrilateral cycles do not match as sets");
}

double tet(const V3& o, const V3& a, const V3& b, const V3& c) {
    return (a - o).dot((b - o).cross(c - o)) / 6.0;
}

SpMat from_triplets(int rows, int cols, std::vector<Trip>& t) {
    SpMat m(rows, cols);
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    return m;
}

} // namespace

FormanComplex build_forman(const CellComplex& M) {
    if (M.N[0] == 0) fail(ErrKind::usage, "build_forman: complex not built");
    FormanComplex K;
    K.M = &M;

    // K 0-cells: one per M-cell, ordered by (dim, index)
    for (int d = 0; d < 4; ++d) {
        K.kvert[d].resize(M.N[d]);
        for (int i = 0; i < M.N[d]; ++i) {
            K.kvert[d][i] = int(K.vx.size());
            K.cells[0].push_back({d, i, d, i});
            K.vx.push_back(M.centroid[d][i]);
        }
    }

    // p-cells: closure pairs with dimension gap p
    for (int g = 1; g < 4; ++g)
        for (int ud = g; ud < 4; ++ud)
            for (int ui = 0; ui < M.N[ud]; ++ui)
                for (int li : M.closure[ud][ui][ud - g]) K.cells[g].push_back({ud, ui, ud - g, li});
    for (int g = 0; g < 4; ++g) {
        K.N[g] = int(K.cells[g].size());
        K.index[g].reserve(size_t(K.N[g]) * 2);
        for (int n = 0; n < K.N[g]; ++n) {
            const FormanCell& c = K.cells[g][n];
            K.index[g].emplace(FormanComplex::pack(c.ud, c.ui, c.ld, c.li), n);
        }
    }

    auto kv = [&](int d, int i) { return K.kvert[d][i]; };

    // canonical vertex cycles of K 2-cells: start at the lower centroid, end
    // at the upper, middle pair ordered by M id so every chart sees one cycle
    K.cyc2.resize(K.N[2]);
    for (int n = 0; n < K.N[2]; ++n) {
        const FormanCell& c = K.cells[2][n];
        if (c.ud == 2) { // (face -> node)
            const auto& cyc = M.face_cycles[c.ui];
            const auto& fe = M.face_edges[c.ui];
            int len = int(cyc.size());
            int pos = int(std::find(cyc.begin(), cyc.end(), c.li) - cyc.begin());
            int e_next = fe[pos];
            int e_prev = fe[(pos + len - 1) % len];
            int a = std::min(e_next, e_prev), b = std::max(e_next, e_prev);
            K.cyc2[n] = {kv(0, c.li), kv(1, a), kv(2, c.ui), kv(1, b)};
        } else { // (volume -> edge)
            int f1 = -1, f2 = -1;
            for (int f : M.closure[3][c.ui][2])
                if (contains(M.closure[2][f][1], c.li)) {
                    if (f1 < 0)
                        f1 = f;
                    else if (f2 < 0)
                        f2 = f;
                    else
                        fail(ErrKind::topology, "edge " + std::to_string(c.li) + " lies on more than two faces of volume " +
                                                    std::to_string(c.ui));
                }
            if (f2 < 0)
                fail(ErrKind::topology, "edge " + std::to_string(c.li) + " is not shared by two faces of volume " +
                                            std::to_string(c.ui));
            K.cyc2[n] = {kv(1, c.li), kv(2, f1), kv(3, c.ui), kv(2, f2)};
        }
    }

    // D1: segment oriented from the lower M-cell centroid to the upper
    {
        std::vector<Trip> t;
        t.reserve(size_t(K.N[1]) * 2);
        K.edge_by_vv.reserve(size_t(K.N[1]) * 2);
        for (int n = 0; n < K.N[1]; ++n) {
            const FormanCell& c = K.cells[1][n];
            int lo = kv(c.ld, c.li), hi = kv(c.ud, c.ui);
            t.emplace_back(lo, n, -1.0);
            t.emplace_back(hi, n, +1.0);
            K.edge_by_vv.emplace((uint64_t(uint32_t(lo)) << 32) | uint32_t(hi), n);
        }
        K.D[1] = from_triplets(K.N[0], K.N[1], t);
    }

    // D2 by walking the canonical cycles
    {
        std::vector<Trip> t;
        t.reserve(size_t(K.N[2]) * 4);
        for (int n = 0; n < K.N[2]; ++n)
            for (int k = 0; k < 4; ++k) {
                auto [e, s] = K.edge_between(K.cyc2[n][k], K.cyc2[n][(k + 1) % 4]);
                t.emplace_back(e, n, s);
            }
        K.D[2] = from_triplets(K.N[1], K.N[2], t);
    }

    // quasi-cube charts
    K.charts.resize(K.N[3]);
    for (int n = 0; n < K.N[3]; ++n) {
        const FormanCell& c = K.cells[3][n];
        const int V = c.ui, n0 = c.li;
        QuasiCubeChart& ch = K.charts[n];
        ch.self = n;

        int ne = 0;
        for (int e : M.closure[3][V][1])
            if (M.edges[e][0] == n0 || M.edges[e][1] == n0) {
                if (ne < 3) ch.dir_edges[ne] = e;
                ++ne;
            }
        if (ne != 3)
            fail(ErrKind::topology, "non-simple polyhedron: vertex " + std::to_string(n0) + " of volume " +
                                        std::to_string(V) + " has " + std::to_string(ne) + " edges");

        ch.corner_mcell[0] = {0, n0};
        for (int t = 0; t < 3; ++t) ch.corner_mcell[1 << t] = {1, ch.dir_edges[t]};
        int found = 0;
        for (int f : M.closure[3][V][2]) {
            if (!contains(M.closure[2][f][0], n0)) continue;
            int mask = 0, cnt = 0;
            for (int t = 0; t < 3; ++t)
                if (contains(M.closure[2][f][1], ch.dir_edges[t])) {
                    mask |= 1 << t;
                    ++cnt;
                }
            if (cnt != 2)
                fail(ErrKind::topology, "non-Boolean interval at vertex " + std::to_string(n0) + " of volume " +
                                            std::to_string(V));
            ch.corner_mcell[mask] = {2, f};
            ++found;
        }
        if (found != 3)
            fail(ErrKind::topology, "non-Boolean interval at vertex " + std::to_string(n0) + " of volume " +
                                        std::to_string(V) + ": " + std::to_string(found) + " corner faces");
        ch.corner_mcell[7] = {3, V};

        for (int m = 0; m < 8; ++m) ch.corner[m] = kv(ch.corner_mcell[m].dim, ch.corner_mcell[m].index);

        auto cell_at = [&](int f1, int fr) {
            const CellId lo = ch.corner_mcell[f1];
            const CellId hi = ch.corner_mcell[f1 | fr];
            int id = K.cell_id(hi.dim, hi.index, lo.dim, lo.index);
            if (id < 0)
                fail(ErrKind::topology, "interval cell missing in quasi-cube of volume " + std::to_string(V));
            return id;
        };
        for (int d = 0; d < 3; ++d) {
            int o1 = d == 0 ? 1 : 0, o2 = d == 2 ? 1 : 2;
            for (int b1 = 0; b1 < 2; ++b1)
                for (int b2 = 0; b2 < 2; ++b2) {
                    int f1 = (b1 << o1) | (b2 << o2);
                    ch.edge[QuasiCubeChart::edge_slot(d, f1)] = cell_at(f1, 1 << d);
                }
        }
        for (int t = 0; t < 3; ++t)
            for (int v = 0; v < 2; ++v) ch.face[t * 2 + v] = cell_at(v << t, 7 ^ (1 << t));
    }

    // kite measures: segments, two-triangle quads, chart-signed volumes
    K.mu[0].assign(K.N[0], 1.0);
    K.mu[1].resize(K.N[1]);
    for (int n = 0; n < K.N[1]; ++n) {
        const FormanCell& c = K.cells[1][n];
        K.mu[1][n] = (M.centroid[c.ud][c.ui] - M.centroid[c.ld][c.li]).norm();
        if (K.mu[1][n] < kZeroMeasure)
            fail(ErrKind::degeneracy, "degenerate kite segment " + std::to_string(n));
    }
    K.mu[2].resize(K.N[2]);
    for (int n = 0; n < K.N[2]; ++n) {
        const auto& q = K.cyc2[n];
        const V3 &p0 = K.vx[q[0]], &p1 = K.vx[q[1]], &p2 = K.vx[q[2]], &p3 = K.vx[q[3]];
        // split along the lower-centroid -> upper-centroid diagonal
        double a = 0.5 * ((p1 - p0).cross(p2 - p0)).norm() + 0.5 * ((p2 - p0).cross(p3 - p0)).norm();
        if (a < kZeroMeasure) fail(ErrKind::degeneracy, "degenerate kite quad " + std::to_string(n));
        K.mu[2][n] = a;
    }
    K.mu[3].resize(K.N[3]);
    for (int n = 0; n < K.N[3]; ++n) {
        QuasiCubeChart& ch = K.charts[n];
        const V3& o = K.vx[ch.corner[0]];
        double vol = 0.0;
        for (int t = 0; t < 3; ++t) {
            int d1 = t == 0 ? 1 : 0, d2 = t == 2 ? 1 : 2;
            for (int v = 0; v < 2; ++v) {
                int m0 = v << t;
                const V3& q0 = K.vx[ch.corner[m0]];
                const V3& q1 = K.vx[ch.corner[m0 | (1 << d1)]];
                const V3& q2 = K.vx[ch.corner[m0 | (1 << d1) | (1 << d2)]];
                const V3& q3 = K.vx[ch.corner[m0 | (1 << d2)]];
                double s = (t % 2 == 0 ? 1.0 : -1.0) * (v == 1 ? 1.0 : -1.0);
                vol += s * (tet(o, q0, q1, q2) + tet(o, q0, q2, q3));
            }
        }
        K.mu[3][n] = std::abs(vol);
        if (K.mu[3][n] < kZeroMeasure)
            fail(ErrKind::degeneracy, "degenerate quasi-cube " + std::to_string(n));
        ch.sign = vol > 0 ? 1.0 : -1.0;
    }

    // D3: global quasi-cube orientation is the geometrically positive one, so
    // chart-derived face signs are corrected by the chart handedness
    {
        std::vector<Trip> t;
        t.reserve(size_t(K.N[3]) * 6);
        for (int n = 0; n < K.N[3]; ++n) {
            QuasiCubeChart& ch = K.charts[n];
            for (int tt = 0; tt < 3; ++tt) {
                int d1 = tt == 0 ? 1 : 0, d2 = tt == 2 ? 1 : 2;
                for (int v = 0; v < 2; ++v) {
                    int m0 = v << tt;
                    std::array<int, 4> chart_cyc{ch.corner[m0], ch.corner[m0 | (1 << d1)],
                                                 ch.corner[m0 | (1 << d1) | (1 << d2)],
                                                 ch.corner[m0 | (1 << d2)]};
                    int fi = ch.face[tt * 2 + v];
                    double o = cyc_match(K.cyc2[fi], chart_cyc);
                    ch.face_o[tt * 2 + v] = o;
                    double eps = ch.sign * (tt % 2 == 0 ? 1.0 : -1.0) * (v == 1 ? 1.0 : -1.0) * o;
                    t.emplace_back(fi, n, eps);
                }
            }
        }
        K.D[3] = from_triplets(K.N[2], K.N[3], t);
    }

    // boundary flags mirror those of M (a pair lies on the boundary exactly
    // when its upper cell does)
    for (int g = 0; g < 4; ++g) {
        K.on_bnd[g].assign(K.N[g], 0);
        for (int n = 0; n < K.N[g]; ++n) {
            const FormanCell& c = K.cells[g][n];
            if (c.ud < 3 && M.on_bnd[c.ud][c.ui]) K.on_bnd[g][n] = 1;
        }
    }
    return K;
}

const std::array<std::vector<double>, 4>& kite_measures(const FormanComplex& K) { return K.mu; }

const QuasiCubeChart& quasi_cube_chart(const FormanComplex& K, int cube) {
    if (cube < 0 || cube >= K.N[3]) fail(ErrKind::usage, "quasi_cube_chart: cube id out of range");
    return K.charts[cube];
}

} // namespace pf
