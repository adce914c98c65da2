#pragma once
#include "poreflow/calculus.hpp"

#include <string>

namespace pf {

// boundary condition on a group of M boundary 2-cells
struct DirichletBC {
    std::string name;
    std::vector<int> faces; // M 2-cell ids, must lie on the boundary
    double value = 0.0;     // pressure, Pa
};

struct NeumannBC {
    std::string name;
    std::vector<int> faces;
    double flux_per_face = 0.0; // volumetric rate through each face, m^3/s
};

// Dirichlet/Neumann split of the M boundary together with the induced cell
// sets on K. Dirichlet groups are ordered: when closures overlap, the first
// group that reaches a K-vertex keeps it (value and flux attribution alike).
// Boundary faces not listed anywhere become an implicit zero-flux patch, so
// the partition always covers the boundary.
struct BoundaryPartition {
    std::vector<DirichletBC> dirichlet;
    std::vector<NeumannBC> neumann;

    std::array<std::vector<int>, 3> gamma_d; // induced K p-cells, p = 0..2
    std::array<std::vector<int>, 3> gamma_n;
    std::vector<int> owner; // K-vertex -> dirichlet group index, -1 when free
    Vec dir_value;          // prescribed pressure per K-vertex (0 where free)
};

BoundaryPartition induce_boundary_sets(const CellComplex& M, const FormanComplex& K,
                                       std::vector<DirichletBC> dirichlet,
                                       std::vector<NeumannBC> neumann);

struct FlowProblem {
    const Calculus* C = nullptr;
    Vec Pi1; // edge conductivity diagonal on K 1-cells, >= 0
    Vec Pi0; // compressibility diagonal on K 0-cells (transient runs only)
    BoundaryPartition bc;
    double solver_tol = 1e-10; // relative residual gate on the reduced solve

    // optional reference pressure pin for otherwise all-Neumann problems
    int pin_vertex = -1;
    double pin_value = 0.0;
};

// reduced steady system: conservation rows at every non-Dirichlet K-vertex,
// Dirichlet columns eliminated into the right-hand side, Neumann face rates
// lumped quarter-per-corner of their boundary quads
struct SteadySystem {
    std::vector<int> unknown; // reduced row -> K-vertex
    std::vector<int> row_of;  // K-vertex -> reduced row, -1 for Dirichlet
    SpMat A;                  // reduced symmetric positive definite block
    Vec b;
    SpMat S;    // full conservation operator, kept for reaction totals
    Vec load;   // full Neumann nodal load vector, m^3/s
    Vec pinned; // prescribed pressures on eliminated vertices (0 elsewhere)
};

SteadySystem assemble_steady(const FlowProblem& prob);

struct FlowSolution {
    Vec pi;   // pressure on K 0-cells, Pa
    Vec v1;   // edge velocities Pi1 * (coboundary pi), m^2/s
    Vec psi2; // star of v1 on K 2-cells, m^3/s

    // nodal reaction S pi - load per K-vertex: zero (to solver tolerance) at
    // free vertices, the discrete flux absorbed at eliminated ones
    Vec reaction;

    // net volumetric inflow per Dirichlet group: reaction sums over the
    // group's closure vertices, shared vertices attributed first-claim-wins
    std::vector<double> group_total;
    double residual = 0.0;
};

FlowSolution solve_steady(const FlowProblem& prob);

// one implicit-Euler step of (Pi0/dt + material laplacian) pi = Pi0/dt pi_n
// with the same boundary handling as the steady assembly; the factorisation
// is reused across steps of equal size
class TransientStepper {
  public:
    TransientStepper(const FlowProblem& prob, double dt);
    Vec step(const Vec& pi_n) const;

  private:
    const FlowProblem* prob_;
    SteadySystem sys_;
    Vec mass_; // W0 .* Pi0 / dt
    Eigen::SimplicialLDLT<SpMat> fact_;
};

Vec step_transient(const FlowProblem& prob, const Vec& pi_n, double dt);

struct Permeability {
    double Q;      // m^3/s, magnitude of the outlet total
    double K_cond; // m^3 s / kg
    double k;      // m^2
};

// K_cond = Q L / ((p2 - p1) A), k = K_cond * dynamic viscosity
Permeability permeability(const FlowSolution& sol, int outlet_group, double L, double A,
                          double p1, double p2, double mu_dyn);

// diagonal Hodge star on a boundary patch (2-complex of K boundary quads):
// vertex weights are quarter-sums of incident quad areas. Only exercised by
// flux diagnostics; the solve path lumps Neumann data directly.
struct BoundaryStar {
    std::vector<int> quads; // K 2-cell ids over the patch
    std::vector<int> verts; // K 0-cell ids in the patch closure
    Vec w0;                 // aligned with verts
    SpMat star2;            // verts x quads (global K indices)
};

BoundaryStar boundary_star2(const FormanComplex& K, const std::vector<int>& patch_faces);

} // namespace pf
