#pragma once
#include "poreflow/types.hpp"

namespace pf {

// Ingestion target for tessellation parsers and grid generators. Edges may be
// listed in any vertex order; faces are closed vertex cycles; volumes list the
// ids of their faces (unsigned, the builder recovers outward orientation).
struct RawComplex {
    std::vector<V3> nodes;
    std::vector<std::array<int, 2>> edges;
    std::vector<std::vector<int>> faces;
    std::vector<std::vector<int>> vols;
};

// Material cell complex M: graded 0..3 cells with incidence, +-1 relative
// orientations, measures and centroids. Immutable once built.
struct CellComplex {
    std::array<int, 4> N{0, 0, 0, 0};

    std::vector<V3> nodes;
    std::vector<std::array<int, 2>> edges; // normalized: lower node id first
    std::vector<std::vector<int>> face_cycles;
    std::vector<std::vector<int>> face_edges; // edge k joins cycle[k] and cycle[k+1]
    std::vector<std::vector<int>> vol_faces;

    std::array<std::vector<double>, 4> mu;  // mu[0] is all ones
    std::array<std::vector<V3>, 4> centroid; // centroid[0] aliases node coords
    std::vector<V3> face_area_vec;           // oriented area vector per 2-cell

    // boundary matrices: d[p] is N_{p-1} x N_p with entries +-1, p = 1..3
    std::array<SpMat, 4> d;

    // closure[d][i][q] = sorted q-cell ids in the closure of cell (d, i), q <= d
    std::array<std::vector<std::array<std::vector<int>, 4>>, 4> closure;

    std::array<std::vector<char>, 4> on_bnd; // lies on the boundary of M

    int euler() const { return N[0] - N[1] + N[2] - N[3]; }
};

// Builds the complex, assigns relative orientations (edge low->high node,
// face by cycle traversal, volume by outward-normal test), computes measures
// (fan triangulation for faces, signed tetrahedra for volumes) and validates
// del.del = 0, compatible orientation and positive measures.
CellComplex build_complex(const RawComplex& raw);

// del_p as a sparse matrix, p in 1..3.
const SpMat& boundary_matrix(const CellComplex& M, int p);

// delta_p = transpose of del_{p+1}, p in 0..2.
SpMat coboundary_matrix(const CellComplex& M, int p);

// Boundary 2-cells (exactly one coface) with their outward orientation sign,
// plus the boundary 1- and 0-cells they induce.
struct BoundarySub {
    std::vector<int> faces;
    std::vector<double> face_eps; // outward sign relative to the stored face orientation
    std::vector<int> edges;
    std::vector<int> nodes;
};
BoundarySub boundary_subcomplex(const CellComplex& M);

} // namespace pf
