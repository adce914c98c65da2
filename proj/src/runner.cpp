#include "poreflow/runner.hpp"

#include "poreflow/errors.hpp"
#include "poreflow/grid.hpp"
#include "poreflow/tess.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <sys/resource.h>
#include <thread>

namespace pf {
namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> tokens(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ' ' || c == '\t' || c == ',') {
            if (!cur.empty()) out.push_back(cur), cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

double cfg_double(const std::string& key, const std::string& v) {
    double x = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc{} || p != v.data() + v.size())
        fail(ErrKind::validation, "config key " + key + ": expected a number, got '" + v + "'");
    return x;
}

long long cfg_int(const std::string& key, const std::string& v) {
    long long x = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc{} || p != v.data() + v.size())
        fail(ErrKind::validation, "config key " + key + ": expected an integer, got '" + v + "'");
    return x;
}

bool cfg_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail(ErrKind::validation, "config key " + key + ": expected true/false, got '" + v + "'");
}

void set_key(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "mesh.tess") {
        cfg.tess_path = value;
    } else if (key == "mesh.grid") {
        auto t = tokens(value);
        if (t.size() != 1 && t.size() != 3 && t.size() != 6)
            fail(ErrKind::validation,
                 "config key mesh.grid: expected 'n', 'nx ny nz' or 'nx ny nz Lx Ly Lz'");
        GridSpec g;
        g.nx = static_cast<int>(cfg_int(key, t[0]));
        g.ny = t.size() >= 3 ? static_cast<int>(cfg_int(key, t[1])) : g.nx;
        g.nz = t.size() >= 3 ? static_cast<int>(cfg_int(key, t[2])) : g.nx;
        if (t.size() == 6) {
            g.Lx = cfg_double(key, t[3]);
            g.Ly = cfg_double(key, t[4]);
            g.Lz = cfg_double(key, t[5]);
        }
        cfg.grid = g;
    } else if (key == "stats.expansive") {
        cfg.expansive_csv = value;
    } else if (key == "stats.voluminous") {
        cfg.voluminous_csv = value;
    } else if (key == "fabric.phi") {
        cfg.phi_target = cfg_double(key, value);
    } else if (key == "fabric.thin_long_threshold") {
        cfg.thr_thin_long = cfg_double(key, value);
    } else if (key == "fabric.voluminous_threshold") {
        cfg.thr_voluminous = cfg_double(key, value);
    } else if (key == "fabric.default_pi") {
        cfg.default_pi = cfg_double(key, value);
    } else if (key == "fabric.c_fluid") {
        cfg.c_fluid = cfg_double(key, value);
    } else if (key == "fabric.c_solid") {
        cfg.c_solid = cfg_double(key, value);
    } else if (key == "flow.mu") {
        cfg.mu_dyn = cfg_double(key, value);
    } else if (key == "flow.dp") {
        cfg.dp = cfg_double(key, value);
    } else if (key == "flow.p_out") {
        cfg.p_out = cfg_double(key, value);
    } else if (key == "flow.tol") {
        cfg.solver_tol = cfg_double(key, value);
    } else if (key == "mc.directions") {
        cfg.directions = tokens(value);
    } else if (key == "mc.realisations") {
        cfg.realisations = static_cast<int>(cfg_int(key, value));
    } else if (key == "mc.seed") {
        long long s = cfg_int(key, value);
        if (s < 0) fail(ErrKind::validation, "config key mc.seed: must be nonnegative");
        cfg.base_seed = static_cast<std::uint64_t>(s);
    } else if (key == "mc.jobs") {
        cfg.jobs = static_cast<int>(cfg_int(key, value));
    } else if (key == "mc.retessellate") {
        cfg.retessellate = cfg_bool(key, value);
    } else if (key == "faces.angle_deg") {
        cfg.face_angle_deg = cfg_double(key, value);
    } else if (key == "faces.x_min") {
        cfg.face_set_path[0] = value;
    } else if (key == "faces.x_max") {
        cfg.face_set_path[1] = value;
    } else if (key == "faces.y_min") {
        cfg.face_set_path[2] = value;
    } else if (key == "faces.y_max") {
        cfg.face_set_path[3] = value;
    } else if (key == "faces.z_min") {
        cfg.face_set_path[4] = value;
    } else if (key == "faces.z_max") {
        cfg.face_set_path[5] = value;
    } else if (key == "output.dir") {
        cfg.output_dir = value;
    } else {
        fail(ErrKind::validation, "unknown config key '" + key + "'");
    }
}

std::vector<int> load_face_set(const std::string& path, int n_faces) {
    std::ifstream in(path);
    if (!in) fail(ErrKind::io, "cannot open face-set file: " + path);
    std::vector<int> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        long long id = cfg_int(path, t);
        if (id < 0 || id >= n_faces)
            fail(ErrKind::validation, path + ":" + std::to_string(lineno) + ": face id " +
                                          std::to_string(id) + " outside [0," +
                                          std::to_string(n_faces) + ")");
        out.push_back(static_cast<int>(id));
    }
    return out;
}

int axis_of(const std::string& direction) {
    if (direction == "x") return 0;
    if (direction == "y") return 1;
    if (direction == "z") return 2;
    fail(ErrKind::validation, "direction must be one of x, y, z; got '" + direction + "'");
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

ResultRow failure_row(int realisation, const std::string& direction, std::uint64_t seed,
                      const Error& e) {
    ResultRow row;
    row.realisation = realisation;
    row.direction = direction;
    row.seed = seed;
    double nan = std::numeric_limits<double>::quiet_NaN();
    row.achieved_porosity = row.Q = row.K_cond = row.k = row.residual = nan;
    std::string msg = std::string(err_kind_name(e.kind())) + ": " + e.what();
    // commas would break the fixed CSV schema
    std::replace(msg.begin(), msg.end(), ',', ';');
    row.error = msg;
    return row;
}

} // namespace

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrKind::io, "cannot open config file: " + path);
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            fail(ErrKind::validation,
                 path + ":" + std::to_string(lineno) + ": expected 'key = value'");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            fail(ErrKind::validation, path + ":" + std::to_string(lineno) + ": empty key");
        set_key(cfg, key, value);
    }
    return cfg;
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
    size_t eq = assignment.find('=');
    if (eq == std::string::npos)
        fail(ErrKind::validation, "override must look like key=value, got '" + assignment + "'");
    set_key(cfg, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void validate_config(const RunConfig& cfg) {
    bool has_tess = !cfg.tess_path.empty();
    bool has_grid = cfg.grid.nx > 0;
    if (has_tess == has_grid)
        fail(ErrKind::validation,
             "exactly one mesh source required: set mesh.tess or mesh.grid");
    if (has_grid && (cfg.grid.ny < 1 || cfg.grid.nz < 1))
        fail(ErrKind::validation, "mesh.grid: all cell counts must be >= 1");
    if (!(cfg.phi_target >= 0.0 && cfg.phi_target < 1.0))
        fail(ErrKind::validation, "fabric.phi must lie in [0,1)");
    if (!(cfg.mu_dyn > 0.0)) fail(ErrKind::validation, "flow.mu must be positive");
    if (!(cfg.dp > 0.0)) fail(ErrKind::validation, "flow.dp must be positive");
    if (!(cfg.solver_tol > 0.0)) fail(ErrKind::validation, "flow.tol must be positive");
    if (cfg.realisations < 1) fail(ErrKind::validation, "mc.realisations must be >= 1");
    if (cfg.jobs < 1) fail(ErrKind::validation, "mc.jobs must be >= 1");
    if (cfg.directions.empty()) fail(ErrKind::validation, "mc.directions must not be empty");
    for (const auto& d : cfg.directions) axis_of(d);
    for (size_t i = 0; i < cfg.directions.size(); ++i)
        for (size_t j = i + 1; j < cfg.directions.size(); ++j)
            if (cfg.directions[i] == cfg.directions[j])
                fail(ErrKind::validation, "mc.directions lists '" + cfg.directions[i] + "' twice");
    if (!(cfg.face_angle_deg > 0.0 && cfg.face_angle_deg < 45.0))
        fail(ErrKind::validation, "faces.angle_deg must lie in (0,45)");
    if (!(cfg.thr_thin_long > 0.0 && cfg.thr_thin_long < 1.0) ||
        !(cfg.thr_voluminous > 0.0 && cfg.thr_voluminous < 1.0))
        fail(ErrKind::validation, "classification thresholds must lie in (0,1)");
    if (!(cfg.default_pi > 0.0)) fail(ErrKind::validation, "fabric.default_pi must be positive");
}

int FaceGroups::slot(const std::string& direction, bool max_side) {
    return axis_of(direction) * 2 + (max_side ? 1 : 0);
}

FaceGroups domain_face_groups(const CellComplex& M, double angle_deg) {
    // boundary faces have exactly one volume coface; its incidence sign tells
    // us whether the stored area vector already points out of the domain
    std::vector<int> cofaces(M.N[2], 0);
    std::vector<double> out_sign(M.N[2], 0.0);
    for (int v = 0; v < M.N[3]; ++v)
        for (SpMat::InnerIterator it(M.d[3], v); it; ++it) {
            ++cofaces[it.row()];
            out_sign[it.row()] = it.value();
        }

    FaceGroups g;
    double cos_tol = std::cos(angle_deg * std::numbers::pi / 180.0);
    for (int f = 0; f < M.N[2]; ++f) {
        if (cofaces[f] != 1) continue;
        V3 n = out_sign[f] * M.face_area_vec[f].normalized();
        for (int axis = 0; axis < 3; ++axis) {
            if (n[axis] <= -cos_tol) g.sets[axis * 2].push_back(f);
            if (n[axis] >= cos_tol) g.sets[axis * 2 + 1].push_back(f);
        }
    }
    return g;
}

MeshBundle build_bundle(const RunConfig& cfg, std::ostream* log) {
    MeshBundle b;
    if (!cfg.tess_path.empty()) {
        TessellationFile tf = parse_tess(cfg.tess_path);
        if (log)
            for (const auto& n : tf.notices) *log << "[tess] " << n << "\n";
        b.M = std::make_unique<CellComplex>(build_complex(to_raw(tf)));
    } else {
        b.M = std::make_unique<CellComplex>(structured_grid(
            cfg.grid.nx, cfg.grid.ny, cfg.grid.nz, cfg.grid.Lx, cfg.grid.Ly, cfg.grid.Lz));
    }
    b.K = std::make_unique<FormanComplex>(build_forman(*b.M));
    b.C = std::make_unique<Calculus>(build_calculus(*b.K));

    b.groups = domain_face_groups(*b.M, cfg.face_angle_deg);
    for (int s = 0; s < 6; ++s)
        if (!cfg.face_set_path[s].empty())
            b.groups.sets[s] = load_face_set(cfg.face_set_path[s], b.M->N[2]);

    b.lo = b.M->nodes.front();
    b.hi = b.M->nodes.front();
    for (const V3& p : b.M->nodes) {
        b.lo = b.lo.cwiseMin(p);
        b.hi = b.hi.cwiseMax(p);
    }
    return b;
}

SingleResult run_single_on(const RunConfig& cfg, const MeshBundle& bundle,
                           const FabricAssignment& fabric, int realisation, std::uint64_t seed,
                           const std::string& direction, std::ostream* log) {
    Timer wall;
    int axis = axis_of(direction);
    const auto& inlet = bundle.groups.sets[axis * 2];
    const auto& outlet = bundle.groups.sets[axis * 2 + 1];
    static const char* side_key[6] = {"faces.x_min", "faces.x_max", "faces.y_min",
                                      "faces.y_max", "faces.z_min", "faces.z_max"};
    if (inlet.empty())
        fail(ErrKind::validation, "no boundary faces align with -" + direction + " within " +
                                      fmt_double(cfg.face_angle_deg) + " degrees; provide " +
                                      side_key[axis * 2]);
    if (outlet.empty())
        fail(ErrKind::validation, "no boundary faces align with +" + direction + " within " +
                                      fmt_double(cfg.face_angle_deg) + " degrees; provide " +
                                      side_key[axis * 2 + 1]);

    FlowProblem prob;
    prob.C = bundle.C.get();
    prob.Pi1 = fabric.Pi1;
    prob.Pi0 = fabric.Pi0;
    prob.solver_tol = cfg.solver_tol;
    // pressure drop along +axis; the four remaining sides stay insulated
    // through the implicit zero-flux patch
    prob.bc = induce_boundary_sets(*bundle.M, *bundle.K,
                                   {DirichletBC{"inlet", inlet, cfg.p_out + cfg.dp},
                                    DirichletBC{"outlet", outlet, cfg.p_out}},
                                   {});

    SingleResult res;
    res.sol = solve_steady(prob);
    res.bc = std::move(prob.bc);

    double L = bundle.hi[axis] - bundle.lo[axis];
    double A = 1.0;
    for (int a = 0; a < 3; ++a)
        if (a != axis) A *= bundle.hi[a] - bundle.lo[a];
    Permeability perm =
        permeability(res.sol, 1, L, A, cfg.p_out, cfg.p_out + cfg.dp, cfg.mu_dyn);

    ResultRow& row = res.row;
    row.realisation = realisation;
    row.direction = direction;
    row.seed = seed;
    row.achieved_porosity = fabric.achieved_porosity;
    row.Q = perm.Q;
    row.K_cond = perm.K_cond;
    row.k = perm.k;
    row.residual = res.sol.residual;
    row.wall_s = wall.seconds();

    if (log) {
        const auto& N = bundle.M->N;
        *log << "[run] realisation " << realisation << " dir " << direction << " seed " << seed
             << ": cells " << N[0] << "/" << N[1] << "/" << N[2] << "/" << N[3]
             << " porosity " << fmt_double(fabric.achieved_porosity) << " k "
             << fmt_double(perm.k) << " m^2 residual " << fmt_double(res.sol.residual)
             << " wall " << fmt_double(row.wall_s) << " s rss " << fmt_double(peak_rss_mib())
             << " MiB\n";
    }
    return res;
}

FeatureStats load_run_stats(const RunConfig& cfg, const CellComplex& M) {
    if (cfg.expansive_csv.empty() || cfg.voluminous_csv.empty())
        fail(ErrKind::validation,
             "fabric statistics required: set stats.expansive and stats.voluminous");
    double grain = *std::min_element(M.mu[3].begin(), M.mu[3].end());
    return load_feature_stats(cfg.expansive_csv, cfg.voluminous_csv, cfg.phi_target, grain);
}

FabricAssignment build_run_fabric(const RunConfig& cfg, const MeshBundle& bundle,
                                  const FeatureStats& stats, std::uint64_t seed) {
    FabricAssignment fa = map_fabric(*bundle.M, stats, seed);
    AssignParams params;
    params.mu_dyn = cfg.mu_dyn;
    params.default_pi = cfg.default_pi;
    params.c_fluid = cfg.c_fluid;
    params.c_solid = cfg.c_solid;
    assign_conductivities(*bundle.M, *bundle.K, fa, params);
    return fa;
}

SingleResult run_single(const RunConfig& cfg, std::uint64_t seed, const std::string& direction,
                        std::ostream* log) {
    validate_config(cfg);
    MeshBundle bundle = build_bundle(cfg, log);
    FeatureStats stats = load_run_stats(cfg, *bundle.M);
    FabricAssignment fabric = build_run_fabric(cfg, bundle, stats, seed);
    return run_single_on(cfg, bundle, fabric, 0, seed, direction, log);
}

MonteCarloResult run_montecarlo(const RunConfig& cfg, std::ostream* log) {
    validate_config(cfg);

    // shared immutable mesh/operator state; with retessellate each
    // realisation rebuilds its own copy instead (same geometry for a fixed
    // source, but the config surface supports per-realisation tessellations)
    MeshBundle shared;
    FeatureStats stats;
    if (!cfg.retessellate) {
        shared = build_bundle(cfg, log);
        stats = load_run_stats(cfg, *shared.M);
    } else {
        MeshBundle probe = build_bundle(cfg, nullptr);
        stats = load_run_stats(cfg, *probe.M);
    }

    const int R = cfg.realisations;
    const int D = static_cast<int>(cfg.directions.size());
    MonteCarloResult mc;
    mc.rows.resize(static_cast<size_t>(R) * D);

    std::mutex log_mu;
    std::atomic<int> next{0};
    auto worker = [&]() {
        std::ostringstream local_log;
        for (;;) {
            int r = next.fetch_add(1);
            if (r >= R) break;
            std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(r);

            const MeshBundle* bundle = &shared;
            MeshBundle own;
            FabricAssignment fabric;
            bool fabric_ok = true;
            Error fabric_err(ErrKind::numeric, "");
            try {
                if (cfg.retessellate) {
                    own = build_bundle(cfg, nullptr);
                    bundle = &own;
                }
                fabric = build_run_fabric(cfg, *bundle, stats, seed);
            } catch (const Error& e) {
                fabric_ok = false;
                fabric_err = e;
            }

            for (int d = 0; d < D; ++d) {
                ResultRow row;
                if (!fabric_ok) {
                    row = failure_row(r, cfg.directions[d], seed, fabric_err);
                } else {
                    try {
                        row = run_single_on(cfg, *bundle, fabric, r, seed, cfg.directions[d],
                                            log ? &local_log : nullptr)
                                  .row;
                    } catch (const Error& e) {
                        row = failure_row(r, cfg.directions[d], seed, e);
                    }
                }
                mc.rows[static_cast<size_t>(r) * D + d] = std::move(row);
            }
            if (log) {
                std::lock_guard<std::mutex> lk(log_mu);
                *log << local_log.str();
                local_log.str("");
            }
        }
    };

    int n_threads = std::min(cfg.jobs, R);
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(n_threads));
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    mc.summary = summarize(mc.rows, cfg.directions);
    if (log) {
        for (const auto& s : mc.summary)
            *log << "[mc] dir " << s.direction << ": n " << s.n_ok << " failed " << s.n_failed
                 << " k mean " << fmt_double(s.mean) << " std " << fmt_double(s.stddev)
                 << " min " << fmt_double(s.min) << " max " << fmt_double(s.max) << " m^2\n";
    }
    return mc;
}

std::vector<DirectionSummary> summarize(const std::vector<ResultRow>& rows,
                                        const std::vector<std::string>& directions) {
    std::vector<DirectionSummary> out;
    for (const auto& dir : directions) {
        DirectionSummary s;
        s.direction = dir;
        std::vector<double> ks;
        for (const auto& r : rows) {
            if (r.direction != dir) continue;
            if (r.error.empty())
                ks.push_back(r.k);
            else
                ++s.n_failed;
        }
        s.n_ok = static_cast<int>(ks.size());
        if (!ks.empty()) {
            double sum = 0;
            for (double k : ks) sum += k;
            s.mean = sum / ks.size();
            double ss = 0;
            for (double k : ks) ss += (k - s.mean) * (k - s.mean);
            s.stddev = ks.size() > 1 ? std::sqrt(ss / (ks.size() - 1)) : 0.0;
            s.min = *std::min_element(ks.begin(), ks.end());
            s.max = *std::max_element(ks.begin(), ks.end());
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<FaceFlux> flux_report(const CellComplex& M, const FormanComplex& K,
                                  const BoundaryPartition& bc, const FlowSolution& sol) {
    std::vector<int> cofaces(M.N[2], 0);
    for (int v = 0; v < M.N[3]; ++v)
        for (SpMat::InnerIterator it(M.d[3], v); it; ++it) ++cofaces[it.row()];

    std::vector<FaceFlux> out;
    std::vector<char> listed(M.N[2], 0);
    std::vector<char> claimed(K.N[0], 0);

    // Dirichlet faces: distribute the group's reaction total over its faces
    // by claiming closure vertices in face-id order; sums per group match
    // sol.group_total exactly because the claims partition the owned set
    for (size_t g = 0; g < bc.dirichlet.size(); ++g) {
        std::vector<int> faces = bc.dirichlet[g].faces;
        std::sort(faces.begin(), faces.end());
        for (int f : faces) {
            FaceFlux ff;
            ff.face = f;
            ff.kind = bc.dirichlet[g].name;
            ff.area = M.mu[2][f];
            std::vector<int> verts;
            verts.push_back(K.kvert[2][f]);
            for (SpMat::InnerIterator it(M.d[2], f); it; ++it) {
                int e = static_cast<int>(it.row());
                verts.push_back(K.kvert[1][e]);
                verts.push_back(K.kvert[0][M.edges[e][0]]);
                verts.push_back(K.kvert[0][M.edges[e][1]]);
            }
            for (int kv : verts) {
                if (claimed[kv] || bc.owner[kv] != static_cast<int>(g)) continue;
                claimed[kv] = 1;
                ff.flux += sol.reaction[kv];
            }
            listed[f] = 1;
            out.push_back(std::move(ff));
        }
    }

    for (const auto& nb : bc.neumann) {
        for (int f : nb.faces) {
            if (listed[f]) continue;
            FaceFlux ff;
            ff.face = f;
            ff.kind = nb.name;
            ff.area = M.mu[2][f];
            ff.flux = nb.flux_per_face;
            listed[f] = 1;
            out.push_back(std::move(ff));
        }
    }

    for (int f = 0; f < M.N[2]; ++f) {
        if (cofaces[f] != 1 || listed[f]) continue;
        FaceFlux ff;
        ff.face = f;
        ff.kind = "insulated";
        ff.area = M.mu[2][f];
        out.push_back(std::move(ff));
    }

    std::sort(out.begin(), out.end(),
              [](const FaceFlux& a, const FaceFlux& b) { return a.face < b.face; });
    return out;
}

double peak_rss_mib() {
    rusage ru{};
    getrusage(RUSAGE_SELF, &ru);
    return static_cast<double>(ru.ru_maxrss) / 1024.0; // Linux reports KiB
}

} // namespace pf
