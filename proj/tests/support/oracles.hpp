#pragma once
// Independent reference implementations the unit/acceptance tests compare
// against. Everything here is deliberately naive: boolean matrix products for
// poset enumeration, dense Gaussian elimination for solves. None of it shares
// code with the library's assembly or factorization paths.
#include "poreflow/cell_complex.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <vector>

namespace pftest {

// dense row-major matrix with partial-pivot Gaussian elimination
using DenseMat = std::vector<std::vector<double>>;
std::vector<double> gauss_solve(DenseMat A, std::vector<double> b);

// enumerates all (upper cell, lower cell) poset pairs of M per dimension gap
// from the nonzero patterns of the boundary matrices alone
struct PairCensus {
    // pairs[g] = sorted list of (upper dim, upper idx, lower dim, lower idx)
    std::array<std::vector<std::array<int, 4>>, 4> pairs;
    std::array<long, 4> count{0, 0, 0, 0};
};
PairCensus enumerate_pairs(const pf::CellComplex& M);

// Kirchhoff solve on an explicit conductance network: unknown pressures at
// nodes not pinned, net nodal flow zero. Returns pressures for all node ids.
struct Network {
    int n_nodes = 0;
    std::vector<std::array<int, 2>> edges;
    std::vector<double> conductance;
    std::map<int, double> pinned; // node -> pressure
};
std::vector<double> network_solve(const Network& net);
// total signed flow entering the network at a set of pinned nodes
double network_inflow(const Network& net, const std::vector<double>& p,
                      const std::vector<int>& nodes);

// deterministic test rng (splitmix64 stepping, uniform via 53-bit mantissa)
struct TestRng {
    uint64_t state;
    explicit TestRng(uint64_t seed) : state(seed) {}
    uint64_t next() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }
    double sym() { return 2.0 * uniform() - 1.0; } // in (-1, 1)
};

inline double rel_diff(double a, double b) {
    double s = std::max(std::abs(a), std::abs(b));
    return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

} // namespace pftest
