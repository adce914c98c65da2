#pragma once
#include "poreflow/cell_complex.hpp"

#include <unordered_map>

namespace pf {

// p-cell of the subdivision K: an ordered pair of M-cells (upper, lower) with
// lower in the closure of upper; p = upper dim - lower dim.
struct FormanCell {
    int ud, ui; // upper M-cell
    int ld, li; // lower M-cell
};

// Chart of one quasi-cube (c3 -> c0). Direction labels are the three M-edges
// of c3 meeting c0, in ascending edge-id order. A corner bitmask m has bit d
// set when cube coordinate d equals 1; a closure cell is addressed by its
// fixed-at-1 mask and its free-direction mask.
struct QuasiCubeChart {
    std::array<int, 3> dir_edges;
    std::array<CellId, 8> corner_mcell;
    std::array<int, 8> corner; // K 0-cell ids by corner mask
    std::array<int, 12> edge;  // [d*4 + packed fixed bits of the other two dirs]
    std::array<int, 6> face;   // [t*2 + v]: free = all dirs but t, dir t fixed at v
    std::array<double, 6> face_o; // stored 4-cycle vs chart cycle: +1 rotation, -1 reversal
    double sign;                  // +1 when the chart is geometrically right-handed
    int self;                     // K 3-cell id

    // chart-local edge slot for free dir d and fixed-at-1 mask f1 (bits of the
    // other two directions, compressed in ascending order)
    static int edge_slot(int d, int f1) {
        int lo = d == 0 ? 1 : 0, hi = d == 2 ? 1 : 2;
        return d * 4 + ((f1 >> lo) & 1) + 2 * ((f1 >> hi) & 1);
    }
};

// Forman subdivision: 0-cells at the centroids of all M-cells, p-cells the
// dimension-gap-p pairs, boundary matrices, kite measures, quasi-cube charts.
struct FormanComplex {
    const CellComplex* M = nullptr; // non-owning; M must outlive K

    std::array<int, 4> N{0, 0, 0, 0};
    std::array<std::vector<FormanCell>, 4> cells;
    std::vector<V3> vx;                     // K 0-cell coordinates
    std::array<std::vector<int>, 4> kvert;  // K 0-cell id of M-cell (d, i)
    std::array<std::vector<double>, 4> mu;  // kite measures, mu[0] = 1
    std::array<SpMat, 4> D;                 // boundary matrices, D[1..3]
    std::vector<std::array<int, 4>> cyc2;   // canonical vertex 4-cycle per K 2-cell
    std::vector<QuasiCubeChart> charts;     // one per K 3-cell
    std::array<std::vector<char>, 4> on_bnd;

    std::array<std::unordered_map<uint64_t, int>, 4> index; // packed pair -> id
    std::unordered_map<uint64_t, int> edge_by_vv; // (lower vert, upper vert) -> K 1-cell

    int euler() const { return N[0] - N[1] + N[2] - N[3]; }
    static uint64_t pack(int ud, int ui, int ld, int li) {
        return uint64_t(ud) | (uint64_t(ld) << 2) | (uint64_t(uint32_t(ui)) << 4) |
               (uint64_t(uint32_t(li)) << 34);
    }
    int cell_id(int ud, int ui, int ld, int li) const {
        int g = ud - ld;
        auto it = index[g].find(pack(ud, ui, ld, li));
        return it == index[g].end() ? -1 : it->second;
    }
    // K 1-cell joining two K 0-cells, with +1 when oriented a -> b
    std::pair<int, double> edge_between(int a, int b) const {
        uint64_t k = (uint64_t(uint32_t(a)) << 32) | uint32_t(b);
        auto it = edge_by_vv.find(k);
        if (it != edge_by_vv.end()) return {it->second, +1.0};
        it = edge_by_vv.find((uint64_t(uint32_t(b)) << 32) | uint32_t(a));
        return {it->second, -1.0};
    }
};

// Builds K from a valid M. Rejects non-simple polyhedra (vertices without
// exactly 3 cell edges) and non-Boolean vertex intervals with topology errors.
FormanComplex build_forman(const CellComplex& M);

// measure accessors mandated by the module interface
const std::array<std::vector<double>, 4>& kite_measures(const FormanComplex& K);
const QuasiCubeChart& quasi_cube_chart(const FormanComplex& K, int cube);

} // namespace pf
