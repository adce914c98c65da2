#pragma once
#include "poreflow/forman.hpp"
#include "poreflow/rng.hpp"

#include <string>

namespace pf {

enum class FeatureClass { ThinLong, Voluminous, Expansive };

// extent-based classification: L >= I >= S are the box extents of a feature.
// Both cuts are strict, so I/L = 0.35 is not thin-long and S/L = 0.64 is not
// voluminous.
FeatureClass classify(double L, double I, double S);

struct VoidFeature {
    double volume; // m^3
    double L, I, S;
};

struct SplitVoids {
    std::vector<double> voluminous; // volumes to map onto 3-cells
    std::vector<double> expansive;  // volumes feeding the empirical CDF
    std::vector<double> thin_long;  // recorded but not mappable
};

// voids below the smallest grain volume are expansive outright; the rest get
// the extent classification
SplitVoids split_voids(const std::vector<VoidFeature>& voids, double smallest_grain_volume);

// measured fabric statistics driving one stochastic realisation
struct FeatureStats {
    // empirical CDF of expansive void volumes: (volume m^3, cumulative
    // probability), volumes ascending, probabilities ending at 1
    std::vector<std::pair<double, double>> expansive_cdf;
    std::vector<double> voluminous_volumes; // void volume targets, m^3
    double target_porosity = 0.0;           // fraction of the domain volume
    double smallest_grain_volume = 0.0;     // m^3
};

// CSV loaders; voluminous path may be empty when the sample has no resolved
// voluminous voids. Column layout is documented in docs/formats.md.
FeatureStats load_feature_stats(const std::string& expansive_cdf_csv,
                                const std::string& voluminous_csv, double target_porosity,
                                double smallest_grain_volume);
void validate_stats(const FeatureStats& stats);

// piecewise-linear inverse of the empirical CDF; u below the first recorded
// probability returns the first volume
double cdf_inverse(const FeatureStats& stats, double u);

enum class Role3 : uint8_t { Grain, VoluminousVoid };
enum class Role2 : uint8_t { None, ExpansiveVoid, VoluminousBoundary };

struct AssignParams {
    double mu_dyn = 1e-3;     // Pa s
    double default_pi = 1e-12;
    double c_fluid = 4.5e-10; // 1/Pa
    double c_solid = 1e-11;
};

struct FabricAssignment {
    std::vector<Role3> role3;     // per M 3-cell
    std::vector<Role2> role2;     // per M 2-cell
    std::vector<double> aperture; // m, nonzero only on expansive 2-cells
    std::vector<double> volume2;  // assigned void volume per 2-cell

    double voluminous_volume = 0.0;
    double expansive_volume = 0.0;
    double achieved_porosity = 0.0;

    Vec Pi1; // conductivity per K 1-cell, filled by assign_conductivities
    Vec Pi0; // compressibility per K 0-cell

    uint64_t seed = 0;
    std::string rng_algorithm;
};

FabricAssignment empty_assignment(const CellComplex& M);

// greedy volume matching: each target takes the unassigned 3-cell with the
// closest volume, ties broken by a uniform draw so repeated volumes spread
// over uniform meshes instead of piling into low cell ids
void map_voluminous(const CellComplex& M, const std::vector<double>& targets, SplitMix64& rng,
                    FabricAssignment& fa);

// random (volume, internal 2-cell) draws until the accumulated void volume
// (voluminous included) reaches the porosity target
void map_expansive(const CellComplex& M, const FeatureStats& stats, SplitMix64& rng,
                   FabricAssignment& fa);

// both mapping stages off one seed
FabricAssignment map_fabric(const CellComplex& M, const FeatureStats& stats, uint64_t seed);

// Poiseuille-style local conductivities on K plus per-vertex compressibility.
// Pair rules, with mu the dynamic viscosity:
//   expansive face of aperture h:   (b1<b2) plate h^2/(12 mu),
//                                   (b0<b1) cylinder of r = h/2
//   voluminous volume c3:           (c2<c3) cylinder, r = equal-area disk of c2
//                                   (c1<c2) plate, h = length of the (c2<c3) K-edge
//                                   (c0<c1) cylinder, r = half the K-edge length
// A K 1-cell claimed by several features keeps the largest conductivity; the
// rest sit at params.default_pi. Vertices touching a claimed edge count as
// fluid for the compressibility diagonal.
void assign_conductivities(const CellComplex& M, const FormanComplex& K, FabricAssignment& fa,
                           const AssignParams& params);

} // namespace pf
