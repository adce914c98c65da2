#include "poreflow/flow.hpp"
#include "poreflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace pf {

namespace {

// union-find over K-vertices, used by the connectivity pre-check
struct DSU {
    std::vector<int> p;
    explicit DSU(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
    int find(int x) {
        while (p[x] != x) x = p[x] = p[p[x]];
        return x;
    }
    void unite(int a, int b) { p[find(a)] = find(b); }
};

void check_group_faces(const CellComplex& M, const std::string& name,
                       const std::vector<int>& faces, std::vector<char>& seen) {
    for (int f : faces) {
        if (f < 0 || f >= M.N[2])
            fail(ErrKind::validation, "boundary group '" + name + "': no such face " +
                                          std::to_string(f));
        if (!M.on_bnd[2][f])
            fail(ErrKind::validation, "boundary group '" + name + "': face " +
                                          std::to_string(f) + " is interior");
        if (seen[f])
            fail(ErrKind::validation, "boundary group '" + name + "': face " +
                                          std::to_string(f) + " claimed twice");
        seen[f] = 1;
    }
}

} // namespace

BoundaryPartition induce_boundary_sets(const CellComplex& M, const FormanComplex& K,
                                       std::vector<DirichletBC> dirichlet,
                                       std::vector<NeumannBC> neumann) {
    BoundaryPartition bp;
    bp.dirichlet = std::move(dirichlet);
    bp.neumann = std::move(neumann);

    std::vector<char> seen(M.N[2], 0);
    for (const auto& g : bp.dirichlet) {
        if (!std::isfinite(g.value))
            fail(ErrKind::validation, "boundary group '" + g.name + "': value not finite");
        check_group_faces(M, g.name, g.faces, seen);
    }
    for (const auto& g : bp.neumann) {
        if (!std::isfinite(g.flux_per_face))
            fail(ErrKind::validation, "boundary group '" + g.name + "': flux not finite");
        check_group_faces(M, g.name, g.faces, seen);
    }

    // unclaimed boundary faces default to a no-flow patch so the partition
    // covers the whole boundary
    NeumannBC rest{"(no-flow)", {}, 0.0};
    for (int f = 0; f < M.N[2]; ++f)
        if (M.on_bnd[2][f] && !seen[f]) rest.faces.push_back(f);
    if (!rest.faces.empty()) bp.neumann.push_back(std::move(rest));

    // transported partition on M: closures of the Dirichlet faces win shared
    // lower cells
    std::array<std::vector<char>, 3> sd, sn;
    for (int q = 0; q < 3; ++q) {
        sd[q].assign(M.N[q], 0);
        sn[q].assign(M.N[q], 0);
    }
    for (const auto& g : bp.dirichlet)
        for (int f : g.faces)
            for (int q = 0; q < 3; ++q)
                for (int e : M.closure[2][f][q]) sd[q][e] = 1;
    for (const auto& g : bp.neumann)
        for (int f : g.faces)
            for (int q = 0; q < 3; ++q)
                for (int e : M.closure[2][f][q])
                    if (!sd[q][e]) sn[q][e] = 1;

    // induced K cells: membership by the upper cell of the pair
    for (int p = 0; p < 3; ++p) {
        for (int i = 0; i < K.N[p]; ++i) {
            const FormanCell& fc = K.cells[p][i];
            if (fc.ud > 2) continue;
            if (sd[fc.ud][fc.ui]) bp.gamma_d[p].push_back(i);
            else if (sn[fc.ud][fc.ui]) bp.gamma_n[p].push_back(i);
        }
    }

    // pressure claims, first group wins
    bp.owner.assign(K.N[0], -1);
    bp.dir_value = Vec::Zero(K.N[0]);
    for (size_t g = 0; g < bp.dirichlet.size(); ++g) {
        for (int f : bp.dirichlet[g].faces) {
            for (int q = 0; q < 3; ++q) {
                for (int e : M.closure[2][f][q]) {
                    int v = K.kvert[q][e];
                    if (bp.owner[v] < 0) {
                        bp.owner[v] = int(g);
                        bp.dir_value(v) = bp.dirichlet[g].value;
                    }
                }
            }
        }
    }
    return bp;
}

SteadySystem assemble_steady(const FlowProblem& prob) {
    if (!prob.C || !prob.C->K) fail(ErrKind::usage, "flow problem has no operators attached");
    const Calculus& C = *prob.C;
    const FormanComplex& K = *C.K;
    const int n = K.N[0];
    if (prob.Pi1.size() != K.N[1]) fail(ErrKind::usage, "Pi1 length mismatch");
    if ((int)prob.bc.owner.size() != n)
        fail(ErrKind::usage, "boundary partition built for a different complex");

    SteadySystem sys;
    sys.S = conservation_operator(C, prob.Pi1);

    // eliminated vertices: Dirichlet claims plus the optional reference pin
    std::vector<char> dmask(n, 0);
    sys.pinned = prob.bc.dir_value;
    for (int v = 0; v < n; ++v) dmask[v] = prob.bc.owner[v] >= 0;
    if (prob.pin_vertex >= 0) {
        if (prob.pin_vertex >= n) fail(ErrKind::usage, "pin vertex out of range");
        if (!dmask[prob.pin_vertex]) {
            dmask[prob.pin_vertex] = 1;
            sys.pinned(prob.pin_vertex) = prob.pin_value;
        }
    }
    if (std::find(dmask.begin(), dmask.end(), char(1)) == dmask.end())
        fail(ErrKind::numeric,
             "all-Neumann problem is singular up to a constant; pin a reference pressure");

    // every unknown needs a conductive path to some pinned vertex
    {
        Vec g = C.W[1].cwiseProduct(prob.Pi1);
        DSU dsu(n);
        for (int k = 0; k < K.N[1]; ++k) {
            if (g(k) <= 0.0) continue;
            const FormanCell& fc = K.cells[1][k];
            dsu.unite(K.kvert[fc.ld][fc.li], K.kvert[fc.ud][fc.ui]);
        }
        std::vector<char> anchored(n, 0);
        for (int v = 0; v < n; ++v)
            if (dmask[v]) anchored[dsu.find(v)] = 1;
        for (int v = 0; v < n; ++v)
            if (!dmask[v] && !anchored[dsu.find(v)])
                fail(ErrKind::numeric, "K-vertex " + std::to_string(v) +
                                           " has no conductive path to a pressure anchor");
    }

    // Neumann loads: each face rate is split over its quads by area and then
    // lumped quarter-per-corner
    sys.load = Vec::Zero(n);
    bool any_flux = false;
    for (const auto& gqr : prob.bc.neumann)
        any_flux = any_flux || gqr.flux_per_face != 0.0;
    if (any_flux) {
        std::unordered_map<int, std::vector<int>> quads_of;
        for (int q = 0; q < K.N[2]; ++q)
            if (K.cells[2][q].ud == 2) quads_of[K.cells[2][q].ui].push_back(q);
        for (const auto& g : prob.bc.neumann) {
            if (g.flux_per_face == 0.0) continue;
            for (int f : g.faces) {
                const auto& qs = quads_of.at(f);
                double patch = 0.0;
                for (int q : qs) patch += K.mu[2][q];
                for (int q : qs) {
                    double share = g.flux_per_face * K.mu[2][q] / patch / 4.0;
                    for (int v : K.cyc2[q]) sys.load(v) += share;
                }
            }
        }
    }

    sys.row_of.assign(n, -1);
    for (int v = 0; v < n; ++v) {
        if (!dmask[v]) {
            sys.row_of[v] = int(sys.unknown.size());
            sys.unknown.push_back(v);
        }
    }

    const int m = int(sys.unknown.size());
    sys.b = Vec::Zero(m);
    for (int i = 0; i < m; ++i) sys.b(i) = sys.load(sys.unknown[i]);
    std::vector<Trip> t;
    for (int c = 0; c < sys.S.outerSize(); ++c) {
        for (SpMat::InnerIterator it(sys.S, c); it; ++it) {
            int r = int(it.row());
            if (sys.row_of[r] < 0) continue;
            if (sys.row_of[c] >= 0) t.emplace_back(sys.row_of[r], sys.row_of[c], it.value());
            else sys.b(sys.row_of[r]) -= it.value() * sys.pinned(c);
        }
    }
    sys.A.resize(m, m);
    sys.A.setFromTriplets(t.begin(), t.end());
    sys.A.makeCompressed();
    return sys;
}

namespace {

Vec expand_solution(const SteadySystem& sys, const Vec& x) {
    Vec pi = sys.pinned;
    for (size_t i = 0; i < sys.unknown.size(); ++i) pi(sys.unknown[i]) = x(i);
    return pi;
}

double check_residual(const SpMat& A, const Vec& x, const Vec& b, double tol) {
    double denom = std::max(b.cwiseAbs().maxCoeff(), 1e-300);
    double res = (A * x - b).cwiseAbs().maxCoeff() / denom;
    if (!(res <= tol))
        fail(ErrKind::numeric,
             "linear solve missed the residual gate: " + std::to_string(res));
    return res;
}

std::vector<double> reaction_totals(const BoundaryPartition& bc, const Vec& r) {
    std::vector<double> out(bc.dirichlet.size(), 0.0);
    for (size_t v = 0; v < bc.owner.size(); ++v)
        if (bc.owner[v] >= 0) out[bc.owner[v]] += r(v);
    return out;
}

} // namespace

FlowSolution solve_steady(const FlowProblem& prob) {
    SteadySystem sys = assemble_steady(prob);
    Eigen::SimplicialLDLT<SpMat> fact(sys.A);
    if (fact.info() != Eigen::Success)
        fail(ErrKind::numeric, "factorisation of the reduced system failed");
    Vec x = fact.solve(sys.b);

    FlowSolution sol;
    sol.residual = check_residual(sys.A, x, sys.b, prob.solver_tol);
    sol.pi = expand_solution(sys, x);
    const Calculus& C = *prob.C;
    sol.v1 = prob.Pi1.cwiseProduct(SpMat(C.K->D[1].transpose()) * sol.pi);
    sol.psi2 = C.star[1] * sol.v1;
    sol.reaction = sys.S * sol.pi - sys.load;
    sol.group_total = reaction_totals(prob.bc, sol.reaction);
    return sol;
}

TransientStepper::TransientStepper(const FlowProblem& prob, double dt) : prob_(&prob) {
    if (!(dt > 0.0)) fail(ErrKind::validation, "time step must be positive");
    const Calculus& C = *prob.C;
    sys_ = assemble_steady(prob);
    if (prob.Pi0.size() != C.K->N[0]) fail(ErrKind::usage, "Pi0 length mismatch");
    for (int v : sys_.unknown)
        if (!(prob.Pi0(v) > 0.0))
            fail(ErrKind::validation,
                 "zero compressibility on unknown K-vertex " + std::to_string(v));
    mass_ = C.W[0].cwiseProduct(prob.Pi0) / dt;

    SpMat A = sys_.A;
    std::vector<Trip> t;
    for (size_t i = 0; i < sys_.unknown.size(); ++i)
        t.emplace_back(int(i), int(i), mass_(sys_.unknown[i]));
    SpMat Mm(A.rows(), A.cols());
    Mm.setFromTriplets(t.begin(), t.end());
    A += Mm;
    fact_.compute(A);
    if (fact_.info() != Eigen::Success)
        fail(ErrKind::numeric, "factorisation of the transient system failed");
}

Vec TransientStepper::step(const Vec& pi_n) const {
    if (pi_n.size() != sys_.pinned.size()) fail(ErrKind::usage, "state length mismatch");
    Vec b = sys_.b;
    for (size_t i = 0; i < sys_.unknown.size(); ++i) {
        int v = sys_.unknown[i];
        b(i) += mass_(v) * pi_n(v);
    }
    Vec x = fact_.solve(b);
    return expand_solution(sys_, x);
}

Vec step_transient(const FlowProblem& prob, const Vec& pi_n, double dt) {
    return TransientStepper(prob, dt).step(pi_n);
}

Permeability permeability(const FlowSolution& sol, int outlet_group, double L, double A,
                          double p1, double p2, double mu_dyn) {
    if (outlet_group < 0 || outlet_group >= int(sol.group_total.size()))
        fail(ErrKind::usage, "no such boundary group");
    if (!(L > 0.0)) fail(ErrKind::validation, "sample length must be positive");
    if (!(A > 0.0)) fail(ErrKind::validation, "cross-section area must be positive");
    if (!(mu_dyn > 0.0)) fail(ErrKind::validation, "viscosity must be positive");
    if (p2 == p1) fail(ErrKind::validation, "pressure drop is zero");
    Permeability out;
    out.Q = std::abs(sol.group_total[outlet_group]);
    out.K_cond = out.Q * L / ((p2 - p1) * A);
    out.k = out.K_cond * mu_dyn;
    return out;
}

BoundaryStar boundary_star2(const FormanComplex& K, const std::vector<int>& patch_faces) {
    const CellComplex& M = *K.M;
    BoundaryStar bs;
    std::vector<char> in_patch(M.N[2], 0);
    for (int f : patch_faces) {
        if (f < 0 || f >= M.N[2] || !M.on_bnd[2][f])
            fail(ErrKind::validation, "patch face " + std::to_string(f) +
                                          " is missing or interior");
        in_patch[f] = 1;
    }
    for (int q = 0; q < K.N[2]; ++q) {
        const FormanCell& fc = K.cells[2][q];
        if (fc.ud == 2 && in_patch[fc.ui]) bs.quads.push_back(q);
    }
    for (int q : bs.quads)
        for (int v : K.cyc2[q]) bs.verts.push_back(v);
    std::sort(bs.verts.begin(), bs.verts.end());
    bs.verts.erase(std::unique(bs.verts.begin(), bs.verts.end()), bs.verts.end());
    std::unordered_map<int, int> vslot;
    for (size_t i = 0; i < bs.verts.size(); ++i) vslot[bs.verts[i]] = int(i);

    bs.w0 = Vec::Zero(bs.verts.size());
    for (int q : bs.quads)
        for (int v : K.cyc2[q]) bs.w0(vslot.at(v)) += 0.25 * K.mu[2][q];

    // the pairing of a quad lands on its base corner, mirroring the bulk cup
    std::vector<Trip> t;
    for (int q : bs.quads) {
        int s = vslot.at(K.cyc2[q][0]);
        t.emplace_back(s, q, 1.0 / bs.w0(s));
    }
    bs.star2.resize(int(bs.verts.size()), K.N[2]);
    bs.star2.setFromTriplets(t.begin(), t.end());
    return bs;
}

} // namespace pf
