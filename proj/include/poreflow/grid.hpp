#pragma once
#include "poreflow/cell_complex.hpp"

namespace pf {

// Structured hexahedral tessellation of the box [0,Lx]x[0,Ly]x[0,Lz] with
// nx*ny*nz cells. Desk-scale oracle geometry and built-in mesh source.
RawComplex structured_grid_raw(int nx, int ny, int nz, double Lx, double Ly, double Lz);
CellComplex structured_grid(int nx, int ny, int nz, double Lx = 1.0, double Ly = 1.0,
                            double Lz = 1.0);

// Single regular tetrahedron spanned by the origin and the three unit axes.
// Fixture geometry for the subdivision and operator tests.
CellComplex tetra_fixture();

} // namespace pf
