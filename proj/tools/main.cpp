// Command-line front end: wires config + flags into the library pipeline
// (mesh -> subdivision -> fabric -> flow -> permeability) and writes the CSV
// and operator outputs. All real work lives in the library; this file is
// argument plumbing and exit-code policy.
#include "CLI11.hpp"

#include "poreflow/errors.hpp"
#include "poreflow/exports.hpp"
#include "poreflow/runner.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace pf;

namespace {

int exit_code_for(ErrKind k) {
    switch (k) {
        case ErrKind::usage:
        case ErrKind::validation:
        case ErrKind::capacity: return 2;
        case ErrKind::format:
        case ErrKind::io:
        case ErrKind::structural:
        case ErrKind::orientation:
        case ErrKind::degeneracy:
        case ErrKind::topology: return 3;
        case ErrKind::numeric: return 4;
    }
    return 1;
}

// Options shared by every subcommand. Precedence: config file, then named
// flags, then --set overrides, latest wins.
struct CommonOpts {
    std::string config_path;
    std::vector<std::string> sets;
    std::string tess, grid, directions;
    std::string stats_expansive, stats_voluminous, output;
    double phi = -1, mu = -1, dp = -1;
    long long seed = -1;
    int realisations = -1, jobs = -1;
    bool retessellate = false;
    bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("-c,--config", o.config_path, "config file of 'key = value' lines");
    cmd->add_option("--set", o.sets, "override a config key, e.g. --set flow.mu=1e-3")
        ->take_all();
    cmd->add_option("--tess", o.tess, "Neper .tess tessellation path (mesh.tess)");
    cmd->add_option("--grid", o.grid,
                    "structured grid 'n' or 'nx ny nz [Lx Ly Lz]' in m (mesh.grid)");
    cmd->add_option("--stats-expansive", o.stats_expansive,
                    "CSV of (volume m^3, cumulative probability) for expansive voids");
    cmd->add_option("--stats-voluminous", o.stats_voluminous,
                    "CSV of (volume m^3, frequency) for voluminous features");
    cmd->add_option("--phi", o.phi, "target porosity, fraction in [0,1)");
    cmd->add_option("--mu", o.mu, "dynamic viscosity, Pa s (default 1e-3)");
    cmd->add_option("--dp", o.dp, "pressure difference across the sample, Pa (default 1)");
    cmd->add_option("--seed", o.seed, "base RNG seed (mc.seed)");
    cmd->add_option("--realisations", o.realisations, "Monte Carlo realisation count");
    cmd->add_option("--directions", o.directions, "subset of 'x y z' to measure");
    cmd->add_option("--jobs", o.jobs, "realisation-level worker threads");
    cmd->add_flag("--retessellate", o.retessellate, "rebuild the mesh for every realisation");
    cmd->add_option("-o,--output", o.output, "output directory (default .)");
    cmd->add_flag("-q,--quiet", o.quiet, "suppress progress logging");
}

RunConfig make_config(const CommonOpts& o) {
    RunConfig cfg;
    if (!o.config_path.empty()) cfg = load_config(o.config_path);
    if (!o.tess.empty()) apply_override(cfg, "mesh.tess=" + o.tess);
    if (!o.grid.empty()) apply_override(cfg, "mesh.grid=" + o.grid);
    if (!o.stats_expansive.empty()) apply_override(cfg, "stats.expansive=" + o.stats_expansive);
    if (!o.stats_voluminous.empty())
        apply_override(cfg, "stats.voluminous=" + o.stats_voluminous);
    if (o.phi >= 0) apply_override(cfg, "fabric.phi=" + fmt_double(o.phi));
    if (o.mu > 0) apply_override(cfg, "flow.mu=" + fmt_double(o.mu));
    if (o.dp > 0) apply_override(cfg, "flow.dp=" + fmt_double(o.dp));
    if (o.seed >= 0) apply_override(cfg, "mc.seed=" + std::to_string(o.seed));
    if (o.realisations > 0)
        apply_override(cfg, "mc.realisations=" + std::to_string(o.realisations));
    if (!o.directions.empty()) apply_override(cfg, "mc.directions=" + o.directions);
    if (o.jobs > 0) apply_override(cfg, "mc.jobs=" + std::to_string(o.jobs));
    if (o.retessellate) apply_override(cfg, "mc.retessellate=true");
    if (!o.output.empty()) apply_override(cfg, "output.dir=" + o.output);
    for (const auto& s : o.sets) apply_override(cfg, s);
    return cfg;
}

std::ostream* logger(const CommonOpts& o) { return o.quiet ? nullptr : &std::cerr; }

void require_mesh_only(RunConfig& cfg) {
    // mesh-in commands don't need fabric stats; keep validate_config happy
    if (cfg.tess_path.empty() && cfg.grid.nx == 0)
        fail(ErrKind::validation, "a mesh source is required: --tess or --grid");
}

std::string out_file(const RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.output_dir);
    return (fs::path(cfg.output_dir) / name).string();
}

void write_flux_csv(const std::string& path, const std::vector<FaceFlux>& fluxes) {
    std::ofstream out(path);
    if (!out) fail(ErrKind::io, "cannot open for writing: " + path);
    out << "face,kind,area_m2,flux_m3_per_s\n";
    for (const auto& f : fluxes)
        out << f.face << "," << f.kind << "," << fmt_double(f.area) << "," << fmt_double(f.flux)
            << "\n";
    if (!out.flush()) fail(ErrKind::io, "write failed on " + path);
}

void write_summary_csv(const std::string& path, const std::vector<DirectionSummary>& summary) {
    std::ofstream out(path);
    if (!out) fail(ErrKind::io, "cannot open for writing: " + path);
    out << "direction,n_ok,n_failed,mean_k_m2,std_k_m2,min_k_m2,max_k_m2\n";
    for (const auto& s : summary)
        out << s.direction << "," << s.n_ok << "," << s.n_failed << "," << fmt_double(s.mean)
            << "," << fmt_double(s.stddev) << "," << fmt_double(s.min) << ","
            << fmt_double(s.max) << "\n";
    if (!out.flush()) fail(ErrKind::io, "write failed on " + path);
}

int cmd_mesh_info(const CommonOpts& o) {
    RunConfig cfg = make_config(o);
    require_mesh_only(cfg);
    MeshBundle b = build_bundle(cfg, logger(o));
    const CellComplex& M = *b.M;
    std::cout << "cells: " << M.N[0] << " nodes, " << M.N[1] << " edges, " << M.N[2]
              << " faces, " << M.N[3] << " volumes\n";
    std::cout << "euler characteristic: " << M.euler() << "\n";
    std::cout << "bounding box: [" << fmt_double(b.lo.x()) << "," << fmt_double(b.hi.x())
              << "] x [" << fmt_double(b.lo.y()) << "," << fmt_double(b.hi.y()) << "] x ["
              << fmt_double(b.lo.z()) << "," << fmt_double(b.hi.z()) << "] m\n";
    double len = 0, area = 0, vol = 0;
    for (double m : M.mu[1]) len += m;
    for (double m : M.mu[2]) area += m;
    for (double m : M.mu[3]) vol += m;
    std::cout << "total edge length " << fmt_double(len) << " m, face area " << fmt_double(area)
              << " m^2, volume " << fmt_double(vol) << " m^3\n";
    static const char* names[6] = {"x-", "x+", "y-", "y+", "z-", "z+"};
    for (int s = 0; s < 6; ++s)
        std::cout << "face group " << names[s] << ": " << b.groups.sets[s].size()
                  << " boundary faces\n";
    return 0;
}

int cmd_forman(const CommonOpts& o) {
    RunConfig cfg = make_config(o);
    require_mesh_only(cfg);
    MeshBundle b = build_bundle(cfg, logger(o));
    const FormanComplex& K = *b.K;
    std::cout << "subdivision cells: " << K.N[0] << " / " << K.N[1] << " / " << K.N[2] << " / "
              << K.N[3] << "\n";
    // census by (upper dim, lower dim) of the generating pair
    for (int p = 0; p <= 3; ++p) {
        std::array<std::array<long, 4>, 4> census{};
        for (const auto& c : K.cells[p]) ++census[c.ud][c.ld];
        std::cout << "dim " << p << ":";
        for (int ud = 0; ud <= 3; ++ud)
            for (int ld = 0; ld <= ud; ++ld)
                if (census[ud][ld])
                    std::cout << "  (" << ud << "," << ld << ") x" << census[ud][ld];
        std::cout << "\n";
    }
    // the subdivision cells sitting inside dim-p parents tile them exactly
    for (int p = 0; p <= 3; ++p) {
        double sk = 0, sm = 0;
        for (int i = 0; i < K.N[p]; ++i)
            if (K.cells[p][i].ud == p) sk += K.mu[p][i];
        for (double m : b.M->mu[p]) sm += m;
        std::cout << "measure partition dim " << p << ": K " << fmt_double(sk) << " vs M "
                  << fmt_double(sm) << "\n";
    }
    return 0;
}

int cmd_fabric(const CommonOpts& o) {
    RunConfig cfg = make_config(o);
    validate_config(cfg);
    MeshBundle b = build_bundle(cfg, logger(o));
    FeatureStats stats = load_run_stats(cfg, *b.M);
    FabricAssignment fa = build_run_fabric(cfg, b, stats, cfg.base_seed);

    long n_vol = 0, n_exp = 0, n_wall = 0;
    for (auto r : fa.role3)
        if (r == Role3::VoluminousVoid) ++n_vol;
    for (auto r : fa.role2) {
        if (r == Role2::ExpansiveVoid) ++n_exp;
        if (r == Role2::VoluminousBoundary) ++n_wall;
    }
    long n_default = 0;
    for (Eigen::Index i = 0; i < fa.Pi1.size(); ++i)
        if (fa.Pi1[i] == cfg.default_pi) ++n_default;
    std::cout << "seed " << fa.seed << " rng " << fa.rng_algorithm << "\n";
    std::cout << "achieved porosity " << fmt_double(fa.achieved_porosity) << " (target "
              << fmt_double(cfg.phi_target) << ")\n";
    std::cout << "voluminous 3-cells " << n_vol << ", expansive 2-cells " << n_exp
              << ", voluminous-boundary 2-cells " << n_wall << "\n";
    std::cout << "conductivities: " << fa.Pi1.size() << " K-edges, " << n_default
              << " at default " << fmt_double(cfg.default_pi) << ", max "
              << fmt_double(fa.Pi1.maxCoeff()) << "\n";
    return 0;
}

int cmd_solve(const CommonOpts& o, const std::string& direction, bool export_fields) {
    RunConfig cfg = make_config(o);
    validate_config(cfg);
    std::uint64_t seed = cfg.base_seed;
    MeshBundle b = build_bundle(cfg, logger(o));
    FeatureStats stats = load_run_stats(cfg, *b.M);
    FabricAssignment fabric = build_run_fabric(cfg, b, stats, seed);
    SingleResult res = run_single_on(cfg, b, fabric, 0, seed, direction, logger(o));

    write_results_csv(out_file(cfg, "results.csv"), {res.row});
    if (export_fields) {
        write_point_field_csv(out_file(cfg, "pressure.csv"), b.K->vx, res.sol.pi, "pressure");
        write_point_field_vtk(out_file(cfg, "pressure.vtk"), b.K->vx, res.sol.pi, "pressure");
        write_flux_csv(out_file(cfg, "fluxes.csv"),
                       flux_report(*b.M, *b.K, res.bc, res.sol));
    }
    std::cout << "direction " << direction << " seed " << seed << ": Q "
              << fmt_double(res.row.Q) << " m^3/s, K_cond " << fmt_double(res.row.K_cond)
              << ", k " << fmt_double(res.row.k) << " m^2, residual "
              << fmt_double(res.row.residual) << "\n";
    return 0;
}

int cmd_montecarlo(const CommonOpts& o) {
    RunConfig cfg = make_config(o);
    MonteCarloResult mc = run_montecarlo(cfg, logger(o));
    write_results_csv(out_file(cfg, "results.csv"), mc.rows);
    write_summary_csv(out_file(cfg, "summary.csv"), mc.summary);
    for (const auto& s : mc.summary)
        std::cout << "direction " << s.direction << ": n " << s.n_ok << " failed " << s.n_failed
                  << " mean k " << fmt_double(s.mean) << " m^2 std " << fmt_double(s.stddev)
                  << " min " << fmt_double(s.min) << " max " << fmt_double(s.max) << "\n";
    int failed = 0;
    for (const auto& s : mc.summary) failed += s.n_failed;
    if (failed) std::cerr << failed << " of " << mc.rows.size() << " rows failed; see results.csv\n";
    return 0;
}

int cmd_export_operators(const CommonOpts& o) {
    RunConfig cfg = make_config(o);
    require_mesh_only(cfg);
    MeshBundle b = build_bundle(cfg, logger(o));
    auto put = [&](const SpMat& A, const std::string& name, const std::string& desc) {
        write_matrix_market(A, out_file(cfg, name + ".mtx"), desc);
        std::cout << name << ".mtx: " << A.rows() << " x " << A.cols() << ", " << A.nonZeros()
                  << " entries\n";
    };
    for (int p = 1; p <= 3; ++p)
        put(b.K->D[p], "K_D" + std::to_string(p), "coboundary incidence, dim " + std::to_string(p));
    for (int p = 0; p <= 3; ++p) {
        SpMat W(b.C->W[p].size(), 1);
        std::vector<Trip> t;
        for (Eigen::Index i = 0; i < b.C->W[p].size(); ++i)
            t.emplace_back(static_cast<int>(i), 0, b.C->W[p][i]);
        W.setFromTriplets(t.begin(), t.end());
        put(W, "K_W" + std::to_string(p), "orthogonality weights, dim " + std::to_string(p));
        put(b.C->star[p], "K_star" + std::to_string(p), "hodge star, dim " + std::to_string(p));
    }
    for (int p = 1; p <= 3; ++p)
        put(b.C->dstar[p], "K_dstar" + std::to_string(p),
            "adjoint coboundary, dim " + std::to_string(p));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"poreflow: permeability of porous/fractured rock fabrics on cell complexes"};
    app.require_subcommand(1);

    CommonOpts o;
    std::string direction = "x";

    CLI::App* c_info = app.add_subcommand("mesh-info", "parse/build a mesh and print its shape");
    add_common(c_info, o);
    CLI::App* c_forman =
        app.add_subcommand("forman", "print subdivision censuses and measure sums");
    add_common(c_forman, o);
    CLI::App* c_fabric = app.add_subcommand("fabric", "map one fabric realisation and summarise");
    add_common(c_fabric, o);
    CLI::App* c_solve =
        app.add_subcommand("solve", "one realisation, one direction, with field exports");
    add_common(c_solve, o);
    c_solve->add_option("-d,--direction", direction, "flow direction: x, y or z");
    CLI::App* c_perm = app.add_subcommand("perm", "one realisation, one direction, row only");
    add_common(c_perm, o);
    c_perm->add_option("-d,--direction", direction, "flow direction: x, y or z");
    CLI::App* c_mc = app.add_subcommand("montecarlo", "full realisation x direction sweep");
    add_common(c_mc, o);
    CLI::App* c_ops =
        app.add_subcommand("export-operators", "write the discrete operators as Matrix Market");
    add_common(c_ops, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (c_info->parsed()) return cmd_mesh_info(o);
        if (c_forman->parsed()) return cmd_forman(o);
        if (c_fabric->parsed()) return cmd_fabric(o);
        if (c_solve->parsed()) return cmd_solve(o, direction, true);
        if (c_perm->parsed()) return cmd_solve(o, direction, false);
        if (c_mc->parsed()) return cmd_montecarlo(o);
        if (c_ops->parsed()) return cmd_export_operators(o);
    } catch (const Error& e) {
        std::cerr << "error (" << err_kind_name(e.kind()) << "): " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
