#pragma once
#include "poreflow/forman.hpp"

namespace pf {

// Metric operators on K. All matrices are assembled eagerly at build time and
// immutable afterwards; concurrent read access is safe.
struct Calculus {
    const FormanComplex* K = nullptr;

    // diagonal inner-product weights per dimension:
    //   w_p(c) = (1 / (8 mu(c))) * sum of mu(b) over cells b orthogonal to c
    std::array<Vec, 4> W;
    // partners[p][i] = sorted ids of the (3-p)-cells topologically orthogonal
    // to p-cell i (shared quasi-cube, exactly one common vertex)
    std::array<std::vector<std::vector<int>>, 4> partners;
    int floored_weights = 0; // cells with an empty partner sum (diagnostic)

    // cup-product pairing against the fundamental class:
    //   Cp[p](b, c) = (b^{3-p} cup c^p)[K],  an N_{3-p} x N_p matrix
    std::array<SpMat, 4> Cp;
    // Hodge stars star[p] = diag(W_{3-p})^-1 * Cp[p]
    std::array<SpMat, 4> star;
    // adjoint coboundaries dstar[p] = diag(W_{p-1})^-1 * D_p * diag(W_p), p 1..3
    std::array<SpMat, 4> dstar;
};

Calculus build_calculus(const FormanComplex& K);

// (c_p, b_{3-p}) pairs sharing exactly one vertex within a common quasi-cube
std::vector<std::pair<int, int>> orthogonal_pairs(const FormanComplex& K, const Calculus& C,
                                                  int p);

// Evaluates (tau^p cup sigma^q) as a (p+q)-cochain, each cell through the
// first quasi-cube chart containing it. Independent of the Cp assembly path.
Vec cup_product(const FormanComplex& K, int p, int q, const Vec& tau, const Vec& sigma);

// material-modified Laplacian  delta*_1 Pi_1 delta_0  (an N0 x N0 operator)
SpMat material_laplacian(const Calculus& C, const Vec& Pi1);

// W0-symmetrized form  S = D_1 diag(W_1 Pi_1) D_1^T; material_laplacian equals
// diag(W0)^-1 S. S is what the flow solver factorizes and what nodal flux
// reactions are read from.
SpMat conservation_operator(const Calculus& C, const Vec& Pi1);

} // namespace pf
