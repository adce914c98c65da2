#include "poreflow/fabric.hpp"
#include "poreflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace pf {

FeatureClass classify(double L, double I, double S) {
    if (!(L >= I && I >= S && S > 0.0))
        fail(ErrKind::validation, "extents must satisfy L >= I >= S > 0");
    if (I / L < 0.35) return FeatureClass::ThinLong;
    if (S / L > 0.64) return FeatureClass::Voluminous;
    return FeatureClass::Expansive;
}

SplitVoids split_voids(const std::vector<VoidFeature>& voids, double smallest_grain_volume) {
    SplitVoids out;
    for (const VoidFeature& v : voids) {
        if (!(v.volume > 0.0)) fail(ErrKind::validation, "void volume must be positive");
        if (v.volume < smallest_grain_volume) {
            out.expansive.push_back(v.volume);
            continue;
        }
        switch (classify(v.L, v.I, v.S)) {
            case FeatureClass::Voluminous: out.voluminous.push_back(v.volume); break;
            case FeatureClass::Expansive: out.expansive.push_back(v.volume); break;
            case FeatureClass::ThinLong: out.thin_long.push_back(v.volume); break;
        }
    }
    return out;
}

namespace {

// two-column CSV: comments and blank lines skipped, one optional header row
std::vector<std::pair<double, double>> read_two_columns(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrKind::io, "cannot open " + path);
    std::vector<std::pair<double, double>> rows;
    std::string line;
    int lineno = 0;
    bool header_allowed = true;
    while (std::getline(in, line)) {
        ++lineno;
        size_t a = line.find_first_not_of(" \t\r");
        if (a == std::string::npos || line[a] == '#') continue;
        for (char& ch : line)
            if (ch == ',' || ch == ';') ch = ' ';
        std::istringstream ss(line);
        double x, y;
        if (!(ss >> x >> y)) {
            if (header_allowed) {
                header_allowed = false;
                continue;
            }
            fail(ErrKind::format, path + ":" + std::to_string(lineno) + ": expected two numbers");
        }
        header_allowed = false;
        rows.emplace_back(x, y);
    }
    return rows;
}

} // namespace

void validate_stats(const FeatureStats& stats) {
    if (!(stats.target_porosity >= 0.0 && stats.target_porosity < 1.0))
        fail(ErrKind::validation, "target porosity must lie in [0, 1)");
    if (stats.smallest_grain_volume < 0.0)
        fail(ErrKind::validation, "smallest grain volume must be nonnegative");
    const auto& cdf = stats.expansive_cdf;
    for (size_t i = 0; i < cdf.size(); ++i) {
        if (!(cdf[i].first > 0.0))
            fail(ErrKind::validation, "expansive CDF volumes must be positive");
        if (!(cdf[i].second >= 0.0))
            fail(ErrKind::validation, "expansive CDF probabilities must be nonnegative");
        if (i > 0 && (cdf[i].first < cdf[i - 1].first || cdf[i].second < cdf[i - 1].second))
            fail(ErrKind::validation, "expansive CDF must be nondecreasing");
    }
    if (!cdf.empty() && std::abs(cdf.back().second - 1.0) > 1e-9)
        fail(ErrKind::validation, "expansive CDF must end at probability 1");
    for (double v : stats.voluminous_volumes)
        if (!(v > 0.0)) fail(ErrKind::validation, "voluminous void volumes must be positive");
}

FeatureStats load_feature_stats(const std::string& expansive_cdf_csv,
                                const std::string& voluminous_csv, double target_porosity,
                                double smallest_grain_volume) {
    FeatureStats stats;
    stats.target_porosity = target_porosity;
    stats.smallest_grain_volume = smallest_grain_volume;
    if (!expansive_cdf_csv.empty()) stats.expansive_cdf = read_two_columns(expansive_cdf_csv);
    if (!voluminous_csv.empty()) {
        for (auto [vol, count] : read_two_columns(voluminous_csv)) {
            double r = std::round(count);
            if (!(count >= 0.0) || std::abs(count - r) > 1e-9)
                fail(ErrKind::format, voluminous_csv + ": counts must be whole numbers");
            for (long i = 0; i < long(r); ++i) stats.voluminous_volumes.push_back(vol);
        }
    }
    validate_stats(stats);
    return stats;
}

double cdf_inverse(const FeatureStats& stats, double u) {
    const auto& cdf = stats.expansive_cdf;
    if (cdf.empty()) fail(ErrKind::usage, "empty expansive CDF");
    if (u <= cdf.front().second) return cdf.front().first;
    for (size_t i = 1; i < cdf.size(); ++i) {
        if (u <= cdf[i].second) {
            double dp = cdf[i].second - cdf[i - 1].second;
            double t = dp > 0.0 ? (u - cdf[i - 1].second) / dp : 1.0;
            return cdf[i - 1].first + t * (cdf[i].first - cdf[i - 1].first);
        }
    }
    return cdf.back().first;
}

FabricAssignment empty_assignment(const CellComplex& M) {
    FabricAssignment fa;
    fa.role3.assign(M.N[3], Role3::Grain);
    fa.role2.assign(M.N[2], Role2::None);
    fa.aperture.assign(M.N[2], 0.0);
    fa.volume2.assign(M.N[2], 0.0);
    fa.rng_algorithm = SplitMix64::algorithm;
    return fa;
}

namespace {

double domain_volume(const CellComplex& M) {
    double s = 0.0;
    for (double v : M.mu[3]) s += v;
    return s;
}

} // namespace

void map_voluminous(const CellComplex& M, const std::vector<double>& targets, SplitMix64& rng,
                    FabricAssignment& fa) {
    if (targets.size() > size_t(M.N[3]))
        fail(ErrKind::capacity, "only " + std::to_string(M.N[3]) + " 3-cells for " +
                                    std::to_string(targets.size()) + " voluminous voids");
    std::vector<int> cands;
    for (int c = 0; c < M.N[3]; ++c)
        if (fa.role3[c] == Role3::Grain) cands.push_back(c);

    for (double v : targets) {
        if (!(v > 0.0)) fail(ErrKind::validation, "voluminous target volume must be positive");
        if (cands.empty()) fail(ErrKind::capacity, "voluminous targets exceed unassigned 3-cells");
        double best = -1.0;
        std::vector<size_t> ties;
        for (size_t i = 0; i < cands.size(); ++i) {
            double d = std::abs(M.mu[3][cands[i]] - v);
            if (best < 0.0 || d < best) {
                best = d;
                ties.assign(1, i);
            } else if (d == best) {
                ties.push_back(i);
            }
        }
        size_t slot = ties.size() > 1 ? ties[rng.pick(int(ties.size()))] : ties[0];
        int cell = cands[slot];
        cands.erase(cands.begin() + long(slot));

        fa.role3[cell] = Role3::VoluminousVoid;
        fa.voluminous_volume += M.mu[3][cell];
        for (int f : M.vol_faces[cell]) fa.role2[f] = Role2::VoluminousBoundary;
    }
    fa.achieved_porosity = (fa.voluminous_volume + fa.expansive_volume) / domain_volume(M);
}

void map_expansive(const CellComplex& M, const FeatureStats& stats, SplitMix64& rng,
                   FabricAssignment& fa) {
    validate_stats(stats);
    const double vdom = domain_volume(M);
    const double target = stats.target_porosity * vdom;
    double cum = fa.voluminous_volume + fa.expansive_volume;

    std::vector<int> eligible;
    for (int f = 0; f < M.N[2]; ++f)
        if (!M.on_bnd[2][f] && fa.role2[f] == Role2::None) eligible.push_back(f);

    while (cum < target) {
        if (eligible.empty())
            fail(ErrKind::capacity, "ran out of eligible 2-cells at porosity " +
                                        std::to_string(cum / vdom) + " of " +
                                        std::to_string(stats.target_porosity));
        double u = rng.uniform();
        while (u == 0.0) u = rng.uniform(); // the draw is on the open interval
        double v = cdf_inverse(stats, u);
        int slot = rng.pick(int(eligible.size()));
        int f = eligible[slot];
        eligible[slot] = eligible.back();
        eligible.pop_back();

        fa.role2[f] = Role2::ExpansiveVoid;
        fa.volume2[f] = v;
        fa.aperture[f] = v / M.mu[2][f];
        fa.expansive_volume += v;
        cum += v;
    }
    fa.achieved_porosity = cum / vdom;
}

FabricAssignment map_fabric(const CellComplex& M, const FeatureStats& stats, uint64_t seed) {
    validate_stats(stats);
    FabricAssignment fa = empty_assignment(M);
    fa.seed = seed;
    SplitMix64 rng(seed);
    map_voluminous(M, stats.voluminous_volumes, rng, fa);
    map_expansive(M, stats, rng, fa);
    return fa;
}

void assign_conductivities(const CellComplex& M, const FormanComplex& K, FabricAssignment& fa,
                           const AssignParams& params) {
    if (int(fa.role3.size()) != M.N[3] || int(fa.role2.size()) != M.N[2] ||
        int(fa.aperture.size()) != M.N[2])
        fail(ErrKind::usage, "assignment does not match the complex");
    if (!(params.mu_dyn > 0.0)) fail(ErrKind::validation, "viscosity must be positive");
    if (!(params.default_pi > 0.0))
        fail(ErrKind::validation, "default conductivity must be positive");
    if (!(params.c_fluid > 0.0 && params.c_solid > 0.0))
        fail(ErrKind::validation, "compressibilities must be positive");
    for (int f = 0; f < M.N[2]; ++f)
        if (fa.role2[f] == Role2::ExpansiveVoid && !(fa.aperture[f] > 0.0))
            fail(ErrKind::validation, "expansive 2-cell " + std::to_string(f) +
                                          " has no aperture");

    const double mu = params.mu_dyn;
    auto plate = [mu](double h) { return h * h / (12.0 * mu); };
    auto cylinder = [mu](double r) { return r * r / (8.0 * mu); };

    // per-M-edge claims feeding the (c0<c1) pairs
    std::vector<double> ap_edge(M.N[1], 0.0); // largest expansive aperture
    std::vector<char> vol_edge(M.N[1], 0);    // edge of some voluminous void
    std::vector<double> h_face(M.N[2], 0.0);  // plate width on voluminous walls
    for (int f = 0; f < M.N[2]; ++f)
        if (fa.role2[f] == Role2::ExpansiveVoid)
            for (int e : M.closure[2][f][1]) ap_edge[e] = std::max(ap_edge[e], fa.aperture[f]);
    for (int c = 0; c < M.N[3]; ++c) {
        if (fa.role3[c] != Role3::VoluminousVoid) continue;
        for (int e : M.closure[3][c][1]) vol_edge[e] = 1;
        for (int f : M.vol_faces[c]) {
            int ke = K.cell_id(3, c, 2, f);
            h_face[f] = std::max(h_face[f], K.mu[1][ke]);
        }
    }

    fa.Pi1 = Vec::Constant(K.N[1], params.default_pi);
    std::vector<char> claimed(K.N[1], 0);
    for (int k = 0; k < K.N[1]; ++k) {
        const FormanCell& fc = K.cells[1][k];
        double best = -1.0;
        if (fc.ud == 2 && fc.ld == 1) {
            if (fa.role2[fc.ui] == Role2::ExpansiveVoid)
                best = std::max(best, plate(fa.aperture[fc.ui]));
            if (fa.role2[fc.ui] == Role2::VoluminousBoundary)
                best = std::max(best, plate(h_face[fc.ui]));
        } else if (fc.ud == 1 && fc.ld == 0) {
            if (ap_edge[fc.ui] > 0.0) best = std::max(best, cylinder(0.5 * ap_edge[fc.ui]));
            if (vol_edge[fc.ui]) best = std::max(best, cylinder(0.5 * K.mu[1][k]));
        } else if (fc.ud == 3 && fc.ld == 2) {
            if (fa.role3[fc.ui] == Role3::VoluminousVoid)
                best = std::max(best, cylinder(std::sqrt(M.mu[2][fc.li] / std::numbers::pi)));
        }
        if (best >= 0.0) {
            fa.Pi1(k) = best;
            claimed[k] = 1;
        }
    }

    // vertices on the conductive network carry the fluid compressibility
    fa.Pi0 = Vec::Constant(K.N[0], params.c_solid);
    for (int k = 0; k < K.N[1]; ++k) {
        if (!claimed[k]) continue;
        const FormanCell& fc = K.cells[1][k];
        fa.Pi0(K.kvert[fc.ld][fc.li]) = params.c_fluid;
        fa.Pi0(K.kvert[fc.ud][fc.ui]) = params.c_fluid;
    }
}

} // namespace pf
