#include "poreflow/cell_complex.hpp"
#include "poreflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

namespace pf {

namespace {

constexpr double kZeroMeasure = 1e-18;

uint64_t edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (uint64_t(uint32_t(a)) << 32) | uint32_t(b);
}

SpMat from_triplets(int rows, int cols, std::vector<Trip>& t) {
    SpMat m(rows, cols);
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    return m;
}

double max_abs(const SpMat& m) {
    double mx = 0.0;
    for (int k = 0; k < m.outerSize(); ++k)
        for (SpMat::InnerIterator it(m, k); it; ++it) mx = std::max(mx, std::abs(it.value()));
    return mx;
}

} // namespace

CellComplex build_complex(const RawComplex& raw) {
    CellComplex M;
    const int n0 = int(raw.nodes.size());
    const int n1 = int(raw.edges.size());
    const int n2 = int(raw.faces.size());
    const int n3 = int(raw.vols.size());
    M.N = {n0, n1, n2, n3};
    M.nodes = raw.nodes;

    // normalize edges to (low, high) and index them by endpoint pair
    M.edges.reserve(n1);
    std::unordered_map<uint64_t, int> emap;
    emap.reserve(size_t(n1) * 2);
    for (int i = 0; i < n1; ++i) {
        auto [a, b] = raw.edges[i];
        if (a < 0 || b < 0 || a >= n0 || b >= n0)
            fail(ErrKind::structural, "edge " + std::to_string(i) + " references missing node");
        if (a == b) fail(ErrKind::structural, "edge " + std::to_string(i) + " is a loop");
        if (a > b) std::swap(a, b);
        if (!emap.emplace(edge_key(a, b), i).second)
            fail(ErrKind::structural, "duplicate edge " + std::to_string(i));
        M.edges.push_back({a, b});
    }

    // d1: edge oriented from lower to higher node id
    {
        std::vector<Trip> t;
        t.reserve(size_t(n1) * 2);
        for (int i = 0; i < n1; ++i) {
            t.emplace_back(M.edges[i][0], i, -1.0);
            t.emplace_back(M.edges[i][1], i, +1.0);
        }
        M.d[1] = from_triplets(n0, n1, t);
    }

    // d2 from vertex cycles: +1 where traversal runs low -> high node
    M.face_cycles.resize(n2);
    M.face_edges.resize(n2);
    {
        std::vector<Trip> t;
        for (int i = 0; i < n2; ++i) {
            const auto& cyc = raw.faces[i];
            if (cyc.size() < 3)
                fail(ErrKind::structural, "face " + std::to_string(i) + " has fewer than 3 vertices");
            std::set<int> uniq(cyc.begin(), cyc.end());
            if (uniq.size() != cyc.size())
                fail(ErrKind::structural, "face " + std::to_string(i) + " repeats a vertex");
            M.face_cycles[i] = cyc;
            for (size_t k = 0; k < cyc.size(); ++k) {
                int a = cyc[k], b = cyc[(k + 1) % cyc.size()];
                if (a < 0 || a >= n0 || b < 0 || b >= n0)
                    fail(ErrKind::structural, "face " + std::to_string(i) + " references missing node");
                auto it = emap.find(edge_key(a, b));
                if (it == emap.end())
                    fail(ErrKind::structural, "face " + std::to_string(i) + " references missing edge (" +
                                                  std::to_string(a) + "," + std::to_string(b) + ")");
                M.face_edges[i].push_back(it->second);
                t.emplace_back(it->second, i, a < b ? +1.0 : -1.0);
            }
        }
        M.d[2] = from_triplets(n1, n2, t);
    }

    // measures and centroids for nodes, edges, faces
    M.mu[0].assign(n0, 1.0);
    M.centroid[0] = M.nodes;
    M.mu[1].resize(n1);
    M.centroid[1].resize(n1);
    for (int i = 0; i < n1; ++i) {
        const V3& a = M.nodes[M.edges[i][0]];
        const V3& b = M.nodes[M.edges[i][1]];
        M.mu[1][i] = (b - a).norm();
        M.centroid[1][i] = 0.5 * (a + b);
        if (M.mu[1][i] < kZeroMeasure)
            fail(ErrKind::degeneracy, "edge " + std::to_string(i) + " has zero length");
    }

    // polygon area/centroid by fan triangulation about the vertex average;
    // tolerates mildly nonplanar faces
    M.mu[2].resize(n2);
    M.centroid[2].resize(n2);
    M.face_area_vec.assign(n2, V3::Zero());
    for (int i = 0; i < n2; ++i) {
        const auto& cyc = M.face_cycles[i];
        V3 pbar = V3::Zero();
        for (int v : cyc) pbar += M.nodes[v];
        pbar /= double(cyc.size());
        double area = 0.0;
        V3 cen = V3::Zero(), avec = V3::Zero();
        for (size_t k = 0; k < cyc.size(); ++k) {
            const V3& a = M.nodes[cyc[k]];
            const V3& b = M.nodes[cyc[(k + 1) % cyc.size()]];
            V3 cr = (a - pbar).cross(b - pbar);
            avec += 0.5 * cr;
            double ta = 0.5 * cr.norm();
            area += ta;
            cen += ta / 3.0 * (pbar + a + b);
        }
        if (area < kZeroMeasure)
            fail(ErrKind::degeneracy, "face " + std::to_string(i) + " has zero area");
        M.mu[2][i] = area;
        M.centroid[2][i] = cen / area;
        M.face_area_vec[i] = avec;
    }

    // volume orientation by outward-normal test against the vertex average,
    // then measure/centroid from signed tetrahedra (o, pbar, a, b)
    M.vol_faces.resize(n3);
    M.mu[3].resize(n3);
    M.centroid[3].resize(n3);
    {
        std::vector<Trip> t;
        for (int i = 0; i < n3; ++i) {
            const auto& fl = raw.vols[i];
            if (fl.size() < 2)
                fail(ErrKind::structural, "volume " + std::to_string(i) + " has fewer than 2 faces");
            M.vol_faces[i] = fl;
            std::set<int> vset;
            for (int f : fl) {
                if (f < 0 || f >= n2)
                    fail(ErrKind::structural, "volume " + std::to_string(i) + " references missing face");
                for (int v : M.face_cycles[f]) vset.insert(v);
            }
            V3 o = V3::Zero();
            for (int v : vset) o += M.nodes[v];
            o /= double(vset.size());

            double vol = 0.0;
            V3 cen = V3::Zero();
            for (int f : fl) {
                double outward = M.face_area_vec[f].dot(M.centroid[2][f] - o);
                double eps = outward > 0 ? 1.0 : -1.0;
                t.emplace_back(f, i, eps);
                const auto& cyc = M.face_cycles[f];
                V3 pbar = V3::Zero();
                for (int v : cyc) pbar += M.nodes[v];
                pbar /= double(cyc.size());
                for (size_t k = 0; k < cyc.size(); ++k) {
                    const V3& a = M.nodes[cyc[k]];
                    const V3& b = M.nodes[cyc[(k + 1) % cyc.size()]];
                    double tv = eps * (pbar - o).dot((a - o).cross(b - o)) / 6.0;
                    vol += tv;
                    cen += tv / 4.0 * (o + pbar + a + b);
                }
            }
            if (vol <= 0)
                fail(ErrKind::orientation, "volume " + std::to_string(i) + " has nonpositive signed volume");
            if (vol < kZeroMeasure)
                fail(ErrKind::degeneracy, "volume " + std::to_string(i) + " has zero measure");
            M.mu[3][i] = vol;
            M.centroid[3][i] = cen / vol;
        }
        M.d[3] = from_triplets(n2, n3, t);
    }

    // closures
    for (int d = 0; d < 4; ++d) M.closure[d].resize(M.N[d]);
    for (int i = 0; i < n0; ++i) M.closure[0][i][0] = {i};
    for (int i = 0; i < n1; ++i) {
        M.closure[1][i][0] = {M.edges[i][0], M.edges[i][1]};
        M.closure[1][i][1] = {i};
    }
    for (int i = 0; i < n2; ++i) {
        auto& c = M.closure[2][i];
        c[0] = M.face_cycles[i];
        std::sort(c[0].begin(), c[0].end());
        c[1] = M.face_edges[i];
        std::sort(c[1].begin(), c[1].end());
        c[1].erase(std::unique(c[1].begin(), c[1].end()), c[1].end());
        c[2] = {i};
    }
    for (int i = 0; i < n3; ++i) {
        auto& c = M.closure[3][i];
        std::set<int> ns, es;
        for (int f : M.vol_faces[i]) {
            ns.insert(M.closure[2][f][0].begin(), M.closure[2][f][0].end());
            es.insert(M.closure[2][f][1].begin(), M.closure[2][f][1].end());
        }
        c[0].assign(ns.begin(), ns.end());
        c[1].assign(es.begin(), es.end());
        c[2] = M.vol_faces[i];
        std::sort(c[2].begin(), c[2].end());
        c[3] = {i};
    }

    // validation gates: del.del = 0 exactly, compatible orientation
    if (n2 > 0 && max_abs(SpMat(M.d[1] * M.d[2])) != 0.0)
        fail(ErrKind::orientation, "del1.del2 != 0 after orientation assignment");
    if (n3 > 0 && max_abs(SpMat(M.d[2] * M.d[3])) != 0.0)
        fail(ErrKind::orientation, "del2.del3 != 0 after orientation assignment");
    {
        // interior 2-cells must be shared by exactly two volumes with opposite eps
        std::vector<int> cnt(n2, 0);
        std::vector<double> sum(n2, 0.0);
        for (int k = 0; k < M.d[3].outerSize(); ++k)
            for (SpMat::InnerIterator it(M.d[3], k); it; ++it) {
                cnt[it.row()] += 1;
                sum[it.row()] += it.value();
            }
        for (int f = 0; f < n2; ++f) {
            if (cnt[f] > 2)
                fail(ErrKind::structural, "face " + std::to_string(f) + " has more than two cofaces");
            if (cnt[f] == 2 && sum[f] != 0.0)
                fail(ErrKind::orientation,
                     "face " + std::to_string(f) + " has equal orientation in both cofaces");
        }
        // boundary flags
        M.on_bnd[2].assign(n2, 0);
        M.on_bnd[1].assign(n1, 0);
        M.on_bnd[0].assign(n0, 0);
        M.on_bnd[3].assign(n3, 0);
        for (int f = 0; f < n2; ++f)
            if (cnt[f] == 1) {
                M.on_bnd[2][f] = 1;
                for (int e : M.closure[2][f][1]) M.on_bnd[1][e] = 1;
                for (int v : M.closure[2][f][0]) M.on_bnd[0][v] = 1;
            }
    }
    return M;
}

const SpMat& boundary_matrix(const CellComplex& M, int p) {
    if (p < 1 || p > 3) fail(ErrKind::usage, "boundary_matrix: p must be in 1..3");
    return M.d[p];
}

SpMat coboundary_matrix(const CellComplex& M, int p) {
    if (p < 0 || p > 2) fail(ErrKind::usage, "coboundary_matrix: p must be in 0..2");
    return SpMat(M.d[p + 1].transpose());
}

BoundarySub boundary_subcomplex(const CellComplex& M) {
    BoundarySub B;
    std::vector<int> cnt(M.N[2], 0);
    std::vector<double> eps(M.N[2], 0.0);
    for (int k = 0; k < M.d[3].outerSize(); ++k)
        for (SpMat::InnerIterator it(M.d[3], k); it; ++it) {
            cnt[it.row()] += 1;
            eps[it.row()] = it.value();
        }
    std::set<int> es, ns;
    for (int f = 0; f < M.N[2]; ++f)
        if (cnt[f] == 1) {
            B.faces.push_back(f);
            B.face_eps.push_back(eps[f]);
            for (int e : M.closure[2][f][1]) es.insert(e);
            for (int v : M.closure[2][f][0]) ns.insert(v);
        }
    B.edges.assign(es.begin(), es.end());
    B.nodes.assign(ns.begin(), ns.end());
    return B;
}

} // namespace pf
