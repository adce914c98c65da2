#include "doctest.h"

#include "poreflow/calculus.hpp"
#include "poreflow/cell_complex.hpp"
#include "poreflow/exports.hpp"
#include "poreflow/forman.hpp"
#include "poreflow/grid.hpp"
#include "poreflow/tess.hpp"
#include "support/checks.hpp"
#include "support/tessgen.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace pf;
using namespace pftest;
namespace fs = std::filesystem;

namespace {

std::string fixture(const std::string& name) { return std::string(PF_FIXTURE_DIR) + "/" + name; }

std::string tmp_path(const std::string& name) {
    return (fs::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

} // namespace

TEST_CASE("tess parse: hand-written unit cube") {
    TessellationFile tf = parse_tess(fixture("cube.tess"));

    CHECK(tf.format_version == "3.3");
    CHECK(tf.vertices.size() == 8);
    CHECK(tf.edges.size() == 12);
    CHECK(tf.face_cycles.size() == 6);
    CHECK(tf.poly_faces.size() == 1);
    CHECK(tf.poly_faces[0].size() == 6);

    // crystal orientation subsections are skipped loudly, not silently
    REQUIRE(tf.notices.size() == 2);
    CHECK(tf.notices[0].find("*crysym") != std::string::npos);
    CHECK(tf.notices[1].find("*ori") != std::string::npos);

    CHECK((tf.bbox_lo - V3(0, 0, 0)).norm() == 0.0);
    CHECK((tf.bbox_hi - V3(1, 1, 1)).norm() == 0.0);

    CellComplex M = build_complex(to_raw(tf));
    CHECK(M.N == std::array<int, 4>{8, 12, 6, 1});
    CHECK(M.euler() == 1);
    CHECK(M.mu[3][0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("tess parse: non-contiguous ids densify with the original map kept") {
    TessellationFile tf = parse_tess(fixture("cube_sparse_ids.tess"));

    CHECK(tf.format_version == "2.0");
    REQUIRE(tf.vertices.size() == 8);
    CHECK(tf.orig_vertex == std::vector<int>{10, 20, 30, 40, 50, 60, 70, 80});
    CHECK(tf.orig_edge.front() == 13);
    CHECK(tf.orig_edge.back() == 123);
    CHECK(tf.orig_face == std::vector<int>{7, 9, 11, 13, 15, 17});
    CHECK(tf.orig_poly == std::vector<int>{9});

    // dense map is the inverse of the retained original-id list
    for (size_t i = 0; i < tf.orig_vertex.size(); ++i)
        CHECK(tf.vertex_of_orig.at(tf.orig_vertex[i]) == static_cast<int>(i));

    // same cube as the contiguous fixture once ids are washed out
    CellComplex M = build_complex(to_raw(tf));
    CHECK(M.N == std::array<int, 4>{8, 12, 6, 1});
    CHECK(M.mu[3][0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("tess parse: generated grid matches the built-in mesher") {
    std::string path = tmp_path("pf_grid333.tess");
    write_structured_tess(path, 3, 3, 3, 2.0, 1.0, 1.0);

    TessellationFile tf = parse_tess(path);
    CellComplex Mt = build_complex(to_raw(tf));
    CellComplex Mg = structured_grid(3, 3, 3, 2.0, 1.0, 1.0);

    CHECK(Mt.N == Mg.N);
    CHECK(Mt.euler() == Mg.euler());
    for (int d = 0; d <= 3; ++d) {
        double st = 0, sg = 0;
        for (double m : Mt.mu[d]) st += m;
        for (double m : Mg.mu[d]) sg += m;
        CHECK(st == doctest::Approx(sg).epsilon(1e-12));
    }
    // writer walks the mesher's own ordering, so geometry lines up 1:1
    for (int v = 0; v < Mt.N[0]; ++v) CHECK((Mt.nodes[v] - Mg.nodes[v]).norm() == 0.0);
}

TEST_CASE("tess parse: malformed input fails with typed errors") {
    std::string good = slurp(fixture("cube.tess"));

    SUBCASE("nonexistent path is an io error") {
        expect_error(ErrKind::io, [] { parse_tess("/no/such/dir/x.tess"); });
    }
    SUBCASE("not a tess file at all") {
        std::string p = tmp_path("pf_bad0.tess");
        spit(p, "hello world\n1 2 3\n");
        expect_error(ErrKind::format, [&] { parse_tess(p); });
    }
    SUBCASE("unsupported format version") {
        std::string p = tmp_path("pf_bad1.tess");
        std::string t = good;
        t.replace(t.find("3.3"), 3, "5.1");
        spit(p, t);
        expect_error(ErrKind::format, [&] { parse_tess(p); });
    }
    SUBCASE("truncated mid-face is a format error, not a crash") {
        std::string p = tmp_path("pf_bad2.tess");
        spit(p, good.substr(0, good.find("4 2 11 -6 -10")));
        try {
            parse_tess(p);
            FAIL("expected a format error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrKind::format);
            CHECK(std::string(e.what()).find("**face") != std::string::npos);
        }
    }
    SUBCASE("missing **edge section is named in the error") {
        std::string p = tmp_path("pf_bad3.tess");
        std::string t = good;
        size_t a = t.find(" **edge");
        size_t b = t.find(" **face");
        t.erase(a, b - a);
        spit(p, t);
        try {
            parse_tess(p);
            FAIL("expected a format error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrKind::format);
            CHECK(std::string(e.what()).find("**edge") != std::string::npos);
        }
    }
    SUBCASE("cell count disagreeing with polyhedron count") {
        std::string p = tmp_path("pf_bad4.tess");
        std::string t = good;
        t.replace(t.find("   1\n  *id"), 4, "   2");
        spit(p, t);
        expect_error(ErrKind::format, [&] { parse_tess(p); });
    }
    SUBCASE("reference to an unknown vertex carries the line number") {
        std::string p = tmp_path("pf_bad5.tess");
        std::string t = good;
        t.replace(t.find("1 1 2 0"), 7, "1 1 99 0");
        spit(p, t);
        try {
            parse_tess(p);
            FAIL("expected a format error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrKind::format);
            // message shape is path:line: ...
            CHECK(std::string(e.what()).find(".tess:") != std::string::npos);
            CHECK(std::string(e.what()).find("99") != std::string::npos);
        }
    }
    SUBCASE("repeated id") {
        std::string p = tmp_path("pf_bad6.tess");
        std::string t = good;
        t.replace(t.find("   2 1.000000000000 0.000000000000 0.000000000000 0"), 4, "   1");
        spit(p, t);
        expect_error(ErrKind::format, [&] { parse_tess(p); });
    }
    SUBCASE("garbage where a number belongs") {
        std::string p = tmp_path("pf_bad7.tess");
        std::string t = good;
        t.replace(t.find("8\n   1 0.000000000000"), 1, "x");
        spit(p, t);
        expect_error(ErrKind::format, [&] { parse_tess(p); });
    }
}

TEST_CASE("matrix market: single-edge boundary operator lands as two signed entries") {
    RawComplex raw;
    raw.nodes = {V3(0, 0, 0), V3(1, 0, 0)};
    raw.edges = {{0, 1}};
    CellComplex M = build_complex(raw);

    std::string p = tmp_path("pf_d1.mtx");
    write_matrix_market(M.d[1], p);

    // exact bytes: banner, size line, then the -1/+1 pair
    std::string text = slurp(p);
    CHECK(text == "%%MatrixMarket matrix coordinate real general\n2 1 2\n1 1 -1\n2 1 1\n");

    SpMat back = read_matrix_market(p);
    CHECK(back.rows() == 2);
    CHECK(back.cols() == 1);
    CHECK(back.coeff(0, 0) == -1.0);
    CHECK(back.coeff(1, 0) == 1.0);
}

TEST_CASE("matrix market: operators round-trip exactly") {
    CellComplex M = structured_grid(2, 2, 2, 1.0, 0.7, 1.3);
    FormanComplex K = build_forman(M);
    Calculus C = build_calculus(K);

    auto roundtrip = [&](const SpMat& A, const std::string& name) {
        std::string p = tmp_path("pf_rt_" + name + ".mtx");
        write_matrix_market(A, p, name);
        SpMat B = read_matrix_market(p);
        REQUIRE(B.rows() == A.rows());
        REQUIRE(B.cols() == A.cols());
        SpMat diff = A - B;
        CHECK(sp_max_abs(diff) == 0.0); // bitwise, not approximately
        CHECK(B.nonZeros() == A.nonZeros());
    };
    roundtrip(K.D[1], "d1");
    roundtrip(K.D[3], "d3");
    roundtrip(C.star[1], "star1"); // awkward reals, not just +-1
    roundtrip(C.dstar[2], "dstar2");
}

TEST_CASE("matrix market: malformed input fails with typed errors") {
    SUBCASE("missing file") {
        expect_error(ErrKind::io, [] { read_matrix_market("/no/such/file.mtx"); });
    }
    SUBCASE("wrong banner") {
        std::string p = tmp_path("pf_m1.mtx");
        spit(p, "%%MatrixMarket matrix array real general\n2 2\n1\n0\n0\n1\n");
        expect_error(ErrKind::format, [&] { read_matrix_market(p); });
    }
    SUBCASE("entry count mismatch") {
        std::string p = tmp_path("pf_m2.mtx");
        spit(p, "%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1.5\n");
        expect_error(ErrKind::format, [&] { read_matrix_market(p); });
    }
    SUBCASE("index out of bounds") {
        std::string p = tmp_path("pf_m3.mtx");
        spit(p, "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.5\n");
        expect_error(ErrKind::format, [&] { read_matrix_market(p); });
    }
}

TEST_CASE("shortest round-trip decimals") {
    CHECK(fmt_double(0.1) == "0.1");
    CHECK(fmt_double(1.0) == "1");
    CHECK(fmt_double(-2.5e17) == "-2.5e+17");
    CHECK(fmt_double(1.4322916666666666e-10) == "1.4322916666666666e-10");

    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> mant(-1.0, 1.0);
    std::uniform_int_distribution<int> expo(-300, 300);
    for (int i = 0; i < 2000; ++i) {
        double x = mant(gen) * std::pow(10.0, expo(gen));
        std::string s = fmt_double(x);
        double back = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), back);
        REQUIRE(ec == std::errc{});
        REQUIRE(ptr == s.data() + s.size());
        CHECK(back == x);
    }
}

TEST_CASE("point field csv and vtk") {
    CellComplex M = structured_grid(2, 1, 1);
    FormanComplex K = build_forman(M);

    Vec vals(K.N[0]);
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    for (int i = 0; i < K.N[0]; ++i) vals[i] = u(gen) * 1e5;

    SUBCASE("csv round trip is exact") {
        std::string p = tmp_path("pf_field.csv");
        write_point_field_csv(p, K.vx, vals, "pressure");

        std::ifstream in(p);
        std::string header;
        std::getline(in, header);
        CHECK(header == "cell_id,x,y,z,pressure");

        PointFieldCsv f = read_point_field_csv(p);
        REQUIRE(f.ids.size() == K.vx.size());
        for (size_t i = 0; i < f.ids.size(); ++i) {
            CHECK(f.ids[i] == static_cast<int>(i));
            CHECK((f.xyz[i] - K.vx[i]).norm() == 0.0);
            CHECK(f.values[static_cast<Eigen::Index>(i)] == vals[static_cast<Eigen::Index>(i)]);
        }
    }

    SUBCASE("vtk layout is the legacy point format") {
        std::string p = tmp_path("pf_field.vtk");
        write_point_field_vtk(p, K.vx, vals, "pressure");
        std::string text = slurp(p);
        CHECK(text.rfind("# vtk DataFile Version 3.0\n", 0) == 0);
        CHECK(text.find("DATASET POLYDATA\n") != std::string::npos);
        CHECK(text.find("POINTS " + std::to_string(K.N[0]) + " double\n") != std::string::npos);
        CHECK(text.find("POINT_DATA " + std::to_string(K.N[0]) + "\n") != std::string::npos);
        CHECK(text.find("SCALARS pressure double 1\nLOOKUP_TABLE default\n") != std::string::npos);
    }

    SUBCASE("size mismatch is refused") {
        Vec bad = Vec::Ones(3);
        expect_error(ErrKind::usage,
                     [&] { write_point_field_csv(tmp_path("pf_x.csv"), K.vx, bad, "v"); });
    }
    SUBCASE("unwritable path is an io error") {
        expect_error(ErrKind::io,
                     [&] { write_point_field_csv("/no/such/dir/f.csv", K.vx, vals, "v"); });
    }
}

TEST_CASE("results table") {
    SUBCASE("empty run still writes the header") {
        std::string p = tmp_path("pf_res_empty.csv");
        write_results_csv(p, {});
        CHECK(slurp(p) == std::string(kResultsHeader) + "\n");
        CHECK(read_results_csv(p).empty());
    }

    SUBCASE("rows round-trip including a failed realisation") {
        ResultRow ok;
        ok.realisation = 0;
        ok.direction = "x";
        ok.seed = 424242;
        ok.achieved_porosity = 0.2103;
        ok.Q = 3.25e-9;
        ok.K_cond = 1.625e-6;
        ok.k = 1.625e-9;
        ok.residual = 2.2e-15;
        ok.wall_s = 0.125;

        ResultRow bad;
        bad.realisation = 1;
        bad.direction = "z";
        bad.seed = 424243;
        bad.achieved_porosity = std::nan("");
        bad.Q = bad.K_cond = bad.k = bad.residual = std::nan("");
        bad.wall_s = 0.02;
        bad.error = "numeric: solve failed";

        std::string p = tmp_path("pf_res.csv");
        write_results_csv(p, {ok, bad});
        auto rows = read_results_csv(p);
        REQUIRE(rows.size() == 2);
        CHECK(rows[0].realisation == 0);
        CHECK(rows[0].direction == "x");
        CHECK(rows[0].seed == 424242);
        CHECK(rows[0].k == 1.625e-9);
        CHECK(rows[0].residual == 2.2e-15);
        CHECK(rows[0].error.empty());
        CHECK(rows[1].direction == "z");
        CHECK(std::isnan(rows[1].k));
        CHECK(rows[1].error == "numeric: solve failed");
    }
}
