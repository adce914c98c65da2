#include "poreflow/calculus.hpp"
#include "poreflow/errors.hpp"

#include <algorithm>
#include <bit>

namespace pf {

namespace {

constexpr double kWeightFloor = 1e-30;

struct ChartCellRef {
    int dim;
    int id;
    double o; // chart-local orientation relative to the stored cell
};

// cell addressed by fixed-at-1 mask f1 and free mask fr inside one chart
ChartCellRef chart_cell(const QuasiCubeChart& ch, int f1, int fr) {
    switch (std::popcount(unsigned(fr))) {
        case 0: return {0, ch.corner[f1], 1.0};
        case 1: {
            int d = std::countr_zero(unsigned(fr));
            return {1, ch.edge[QuasiCubeChart::edge_slot(d, f1)], 1.0};
        }
        case 2: {
            int t = std::countr_zero(unsigned(~fr & 7));
            int v = (f1 >> t) & 1;
            return {2, ch.face[t * 2 + v], ch.face_o[t * 2 + v]};
        }
        default: return {3, ch.self, ch.sign};
    }
}

// parity sign of the shuffle (I, J): (-1)^#{(i,j) in I x J : i > j}
double shuffle_sign(int I, int J) {
    int s = 0;
    for (int i = 0; i < 3; ++i)
        if (I >> i & 1)
            for (int j = 0; j < i; ++j)
                if (J >> j & 1) ++s;
    return s % 2 ? -1.0 : 1.0;
}

// all submasks of m in decreasing order, including m and 0
template <class F> void for_submasks(int m, F&& f) {
    int s = m;
    while (true) {
        f(s);
        if (s == 0) break;
        s = (s - 1) & m;
    }
}

} // namespace

Calculus build_calculus(const FormanComplex& K) {
    if (!K.M) fail(ErrKind::usage, "build_calculus: subdivision not built");
    Calculus C;
    C.K = &K;

    // orthogonal partners: inside every chart, cells with complementary free
    // masks intersect in exactly one corner; collect them globally
    for (int g = 0; g < 4; ++g) C.partners[g].resize(K.N[g]);
    for (const QuasiCubeChart& ch : K.charts) {
        for (int fra = 0; fra < 8; ++fra) {
            int frb = 7 ^ fra;
            for_submasks(frb, [&](int f1a) {
                ChartCellRef a = chart_cell(ch, f1a, fra);
                for_submasks(fra, [&](int f1b) {
                    ChartCellRef b = chart_cell(ch, f1b, frb);
                    C.partners[a.dim][a.id].push_back(b.id);
                });
            });
        }
    }
    for (int g = 0; g < 4; ++g)
        for (auto& v : C.partners[g]) {
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
        }

    for (int g = 0; g < 4; ++g) {
        C.W[g].resize(K.N[g]);
        for (int i = 0; i < K.N[g]; ++i) {
            double s = 0.0;
            for (int j : C.partners[g][i]) s += K.mu[3 - g][j];
            if (s == 0.0) {
                // keeps the diagonal invertible; flagged for audit
                s = kWeightFloor * 8.0 * K.mu[g][i];
                ++C.floored_weights;
            }
            C.W[g](i) = s / (8.0 * K.mu[g][i]);
        }
    }

    // cup pairing against the fundamental class; the global cube orientation
    // is the geometrically positive one, hence the ch.sign factor
    for (int p = 0; p < 4; ++p) {
        std::vector<Trip> t;
        for (const QuasiCubeChart& ch : K.charts) {
            for (int I = 0; I < 8; ++I) {
                if (std::popcount(unsigned(I)) != 3 - p) continue;
                int J = 7 ^ I;
                double rho = shuffle_sign(I, J);
                ChartCellRef front = chart_cell(ch, 0, I);
                ChartCellRef back = chart_cell(ch, I, J);
                t.emplace_back(front.id, back.id, rho * front.o * back.o * ch.sign);
            }
        }
        SpMat m(K.N[3 - p], K.N[p]);
        m.setFromTriplets(t.begin(), t.end());
        m.makeCompressed();
        C.Cp[p] = std::move(m);
        // materialise the inverse first: feeding asDiagonal a lazy expression
        // sends Eigen down a coefficient-wise path that costs seconds at
        // a few thousand polyhedra
        Vec winv = C.W[3 - p].cwiseInverse();
        C.star[p] = winv.asDiagonal() * C.Cp[p];
    }

    for (int p = 1; p <= 3; ++p) {
        Vec winv = C.W[p - 1].cwiseInverse();
        C.dstar[p] = winv.asDiagonal() * K.D[p] * C.W[p].asDiagonal();
    }

    return C;
}

std::vector<std::pair<int, int>> orthogonal_pairs(const FormanComplex& K, const Calculus& C,
                                                  int p) {
    if (p < 0 || p > 3) fail(ErrKind::usage, "orthogonal_pairs: p must be in 0..3");
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < K.N[p]; ++i)
        for (int j : C.partners[p][i]) out.emplace_back(i, j);
    return out;
}

Vec cup_product(const FormanComplex& K, int p, int q, const Vec& tau, const Vec& sigma) {
    if (p < 0 || q < 0 || p + q > 3)
        fail(ErrKind::usage, "cup_product: need p, q >= 0 with p + q <= 3");
    if (tau.size() != K.N[p] || sigma.size() != K.N[q])
        fail(ErrKind::usage, "cup_product: cochain length mismatch");
    Vec out = Vec::Zero(K.N[p + q]);
    std::vector<char> done(K.N[p + q], 0);
    const int pq = p + q;
    for (const QuasiCubeChart& ch : K.charts) {
        for (int fr = 0; fr < 8; ++fr) {
            if (std::popcount(unsigned(fr)) != pq) continue;
            for_submasks(7 ^ fr, [&](int f1) {
                ChartCellRef F = chart_cell(ch, f1, fr);
                if (done[F.id]) return;
                done[F.id] = 1;
                double val = 0.0;
                for_submasks(fr, [&](int I) {
                    if (std::popcount(unsigned(I)) != p) return;
                    int J = fr ^ I;
                    ChartCellRef front = chart_cell(ch, f1, I);
                    ChartCellRef back = chart_cell(ch, f1 | I, J);
                    val += shuffle_sign(I, J) * front.o * tau(front.id) * back.o * sigma(back.id);
                });
                out(F.id) = F.o * val;
            });
        }
    }
    return out;
}

SpMat conservation_operator(const Calculus& C, const Vec& Pi1) {
    const FormanComplex& K = *C.K;
    if (Pi1.size() != K.N[1]) fail(ErrKind::usage, "conservation_operator: Pi1 length mismatch");
    if ((Pi1.array() < 0).any())
        fail(ErrKind::validation, "conductivity must be nonnegative");
    Vec g = C.W[1].cwiseProduct(Pi1);
    return K.D[1] * g.asDiagonal() * SpMat(K.D[1].transpose());
}

SpMat material_laplacian(const Calculus& C, const Vec& Pi1) {
    SpMat S = conservation_operator(C, Pi1);
    Vec winv = C.W[0].cwiseInverse();
    return winv.asDiagonal() * S;
}

} // namespace pf
