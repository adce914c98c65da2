#pragma once
#include "poreflow/calculus.hpp"
#include "poreflow/exports.hpp"
#include "poreflow/fabric.hpp"
#include "poreflow/flow.hpp"
#include "poreflow/forman.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace pf {

// Structured-grid mesh source: nx*ny*nz cells over [0,Lx]x[0,Ly]x[0,Lz].
// nx == 0 means "not configured" (a .tess path is used instead).
struct GridSpec {
    int nx = 0, ny = 0, nz = 0;
    double Lx = 1.0, Ly = 1.0, Lz = 1.0;
};

// Everything a run needs, file-loadable as flat `key = value` lines with
// dotted keys (see load_config) and overridable one key at a time from the
// command line. Defaults here are the working defaults of every subcommand.
struct RunConfig {
    std::string tess_path; // exactly one of tess_path / grid must be set
    GridSpec grid;

    std::string expansive_csv;  // (volume m^3, cumulative probability)
    std::string voluminous_csv; // (volume m^3, frequency)
    double phi_target = 0.0;
    double thr_thin_long = 0.35;  // I/L below this would be thin-long
    double thr_voluminous = 0.64; // S/L above this is voluminous
    double default_pi = 1e-12;    // m^3 s/kg, non-conductive background
    double c_fluid = 4.5e-10;     // 1/Pa
    double c_solid = 1e-11;       // 1/Pa

    double mu_dyn = 1e-3; // Pa s
    double dp = 1.0;      // Pa, inlet minus outlet
    double p_out = 1.0;   // Pa, absolute pressure on the outlet side
    double solver_tol = 1e-10;

    std::vector<std::string> directions = {"x", "y", "z"};
    int realisations = 30;
    std::uint64_t base_seed = 1;
    int jobs = 1;
    bool retessellate = false; // rebuild the mesh per realisation

    double face_angle_deg = 10.0; // cone half-angle for axis face detection
    // optional explicit face-set files, order x- x+ y- y+ z- z+; each file
    // lists dense 2-cell ids, one per line
    std::array<std::string, 6> face_set_path;

    std::string output_dir = ".";
};

RunConfig load_config(const std::string& path);
// "key=value" override, same keys as the file format
void apply_override(RunConfig& cfg, const std::string& assignment);
void validate_config(const RunConfig& cfg);

// Boundary 2-cells bucketed by outward normal: within face_angle_deg of -x,
// +x, -y, +y, -z, +z in that order. Faces aligned with nothing stay out of
// every bucket and end up insulated.
struct FaceGroups {
    std::array<std::vector<int>, 6> sets;
    static int slot(const std::string& direction, bool max_side);
};
FaceGroups domain_face_groups(const CellComplex& M, double angle_deg);

// Immutable per-tessellation state shared by all realisations. Heap-held
// parts because the subdivision and calculus keep pointers back into the
// complex; moving the bundle must not move the pointees.
struct MeshBundle {
    std::unique_ptr<CellComplex> M;
    std::unique_ptr<FormanComplex> K;
    std::unique_ptr<Calculus> C;
    FaceGroups groups;
    V3 lo, hi; // node bounding box
};
MeshBundle build_bundle(const RunConfig& cfg, std::ostream* log);

// One fabric realisation plus the flow solves for each requested direction.
// Fabric depends on (mesh, stats, seed) alone, so the same seed re-measured
// in another direction reuses the identical conductivity field.
struct SingleResult {
    ResultRow row;
    FlowSolution sol;
    BoundaryPartition bc;
};
SingleResult run_single_on(const RunConfig& cfg, const MeshBundle& bundle,
                           const FabricAssignment& fabric, int realisation, std::uint64_t seed,
                           const std::string& direction, std::ostream* log);

// Stats loading and fabric construction as the runner performs them:
// smallest-grain volume taken from the mesh, conductivity parameters from
// the config.
FeatureStats load_run_stats(const RunConfig& cfg, const CellComplex& M);
FabricAssignment build_run_fabric(const RunConfig& cfg, const MeshBundle& bundle,
                                  const FeatureStats& stats, std::uint64_t seed);

// Convenience wrapper matching "one config, one seed, one direction": builds
// the bundle, loads stats, maps the fabric, solves.
SingleResult run_single(const RunConfig& cfg, std::uint64_t seed, const std::string& direction,
                        std::ostream* log);

struct DirectionSummary {
    std::string direction;
    int n_ok = 0, n_failed = 0;
    double mean = 0, stddev = 0, min = 0, max = 0; // over k_m2 of successful rows
};

struct MonteCarloResult {
    std::vector<ResultRow> rows; // realisations x directions, fixed order
    std::vector<DirectionSummary> summary;
};

// seeds = base_seed + realisation index; rows ordered by (realisation,
// direction) regardless of jobs; per-row failures recorded, run continues
MonteCarloResult run_montecarlo(const RunConfig& cfg, std::ostream* log);

std::vector<DirectionSummary> summarize(const std::vector<ResultRow>& rows,
                                        const std::vector<std::string>& directions);

// Per-boundary-face flux table for a solved model: Dirichlet faces get
// reaction sums over closure vertices (first face in id order claims a
// shared vertex, so group totals are preserved exactly), Neumann faces the
// prescribed rate, everything else zero.
struct FaceFlux {
    int face = 0;
    std::string kind; // dirichlet group name, neumann group name, "insulated"
    double area = 0;
    double flux = 0; // m^3/s, positive into the domain
};
std::vector<FaceFlux> flux_report(const CellComplex& M, const FormanComplex& K,
                                  const BoundaryPartition& bc, const FlowSolution& sol);

// current process peak RSS in MiB, from getrusage
double peak_rss_mib();

} // namespace pf
