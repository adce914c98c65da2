#include "poreflow/exports.hpp"

#include "poreflow/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace pf {
namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(ErrKind::io, "cannot open for writing: " + path);
    return out;
}

void check_write(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) fail(ErrKind::io, "write failed on " + path);
}

double parse_double_tok(const std::string& path, int lineno, std::string_view tok) {
    double v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size())
        fail(ErrKind::format, path + ":" + std::to_string(lineno) + ": expected a number, got '" +
                                  std::string(tok) + "'");
    return v;
}

long long parse_int_tok(const std::string& path, int lineno, std::string_view tok) {
    long long v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size())
        fail(ErrKind::format, path + ":" + std::to_string(lineno) +
                                  ": expected an integer, got '" + std::string(tok) + "'");
    return v;
}

std::string_view trim_line(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    size_t b = s.find_last_not_of(" \t\r\n");
    return std::string_view(s).substr(a, b - a + 1);
}

std::uint64_t parse_u64_tok(const std::string& path, int lineno, std::string_view tok) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size())
        fail(ErrKind::format, path + ":" + std::to_string(lineno) +
                                  ": expected an unsigned integer, got '" + std::string(tok) + "'");
    return v;
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
        size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

std::string fmt_double(double x) {
    char buf[40];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    (void)ec; // 40 chars always suffice for shortest-round-trip doubles
    return std::string(buf, p);
}

void write_matrix_market(const SpMat& A, const std::string& path, const std::string& comment) {
    std::ofstream out = open_out(path);
    out << "%%MatrixMarket matrix coordinate real general\n";
    if (!comment.empty()) out << "% " << comment << "\n";
    // Drop stored zeros so the round trip compares clean against compressed.
    long long nnz = 0;
    for (int c = 0; c < A.outerSize(); ++c)
        for (SpMat::InnerIterator it(A, c); it; ++it)
            if (it.value() != 0.0) ++nnz;
    out << A.rows() << " " << A.cols() << " " << nnz << "\n";
    for (int c = 0; c < A.outerSize(); ++c)
        for (SpMat::InnerIterator it(A, c); it; ++it)
            if (it.value() != 0.0)
                out << (it.row() + 1) << " " << (it.col() + 1) << " " << fmt_double(it.value())
                    << "\n";
    check_write(out, path);
}

SpMat read_matrix_market(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrKind::io, "cannot open matrix file: " + path);

    std::string line;
    int lineno = 0;
    if (!std::getline(in, line)) fail(ErrKind::format, path + ": empty file");
    ++lineno;
    {
        auto toks = split_ws(line);
        if (toks.size() < 5 || toks[0] != "%%MatrixMarket" || toks[1] != "matrix" ||
            toks[2] != "coordinate" || toks[3] != "real" || toks[4] != "general")
            fail(ErrKind::format,
                 path + ":1: expected banner '%%MatrixMarket matrix coordinate real general'");
    }

    long long rows = -1, cols = -1, nnz = -1;
    while (std::getline(in, line)) {
        ++lineno;
        auto t = trim_line(line);
        if (t.empty() || t[0] == '%') continue;
        auto toks = split_ws(t);
        if (toks.size() != 3)
            fail(ErrKind::format,
                 path + ":" + std::to_string(lineno) + ": expected 'rows cols nnz'");
        rows = parse_int_tok(path, lineno, toks[0]);
        cols = parse_int_tok(path, lineno, toks[1]);
        nnz = parse_int_tok(path, lineno, toks[2]);
        break;
    }
    if (rows < 0) fail(ErrKind::format, path + ": missing size line");
    if (rows == 0 || cols == 0)
        fail(ErrKind::format, path + ": zero-dimension matrix");

    std::vector<Trip> trips;
    trips.reserve(static_cast<size_t>(nnz));
    while (std::getline(in, line)) {
        ++lineno;
        auto t = trim_line(line);
        if (t.empty() || t[0] == '%') continue;
        auto toks = split_ws(t);
        if (toks.size() != 3)
            fail(ErrKind::format, path + ":" + std::to_string(lineno) + ": expected 'i j value'");
        long long i = parse_int_tok(path, lineno, toks[0]);
        long long j = parse_int_tok(path, lineno, toks[1]);
        double v = parse_double_tok(path, lineno, toks[2]);
        if (i < 1 || i > rows || j < 1 || j > cols)
            fail(ErrKind::format,
                 path + ":" + std::to_string(lineno) + ": entry index out of bounds");
        trips.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1), v);
    }
    if (static_cast<long long>(trips.size()) != nnz)
        fail(ErrKind::format, path + ": header declares " + std::to_string(nnz) +
                                  " entries but file holds " + std::to_string(trips.size()));

    SpMat A(static_cast<int>(rows), static_cast<int>(cols));
    A.setFromTriplets(trips.begin(), trips.end());
    return A;
}

void write_point_field_csv(const std::string& path, const std::vector<V3>& xyz, const Vec& values,
                           const std::string& value_name) {
    if (static_cast<Eigen::Index>(xyz.size()) != values.size())
        fail(ErrKind::usage, "point field: " + std::to_string(xyz.size()) + " points vs " +
                                 std::to_string(values.size()) + " values");
    std::ofstream out = open_out(path);
    out << "cell_id,x,y,z," << value_name << "\n";
    for (size_t i = 0; i < xyz.size(); ++i)
        out << i << "," << fmt_double(xyz[i].x()) << "," << fmt_double(xyz[i].y()) << ","
            << fmt_double(xyz[i].z()) << "," << fmt_double(values[static_cast<Eigen::Index>(i)])
            << "\n";
    check_write(out, path);
}

PointFieldCsv read_point_field_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrKind::io, "cannot open field file: " + path);
    std::string line;
    if (!std::getline(in, line)) fail(ErrKind::format, path + ": empty file");
    if (split_csv(line).size() != 5)
        fail(ErrKind::format, path + ":1: expected header 'cell_id,x,y,z,<name>'");

    PointFieldCsv f;
    std::vector<double> vals;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim_line(line).empty()) continue;
        auto cells = split_csv(line);
        if (cells.size() != 5)
            fail(ErrKind::format, path + ":" + std::to_string(lineno) + ": expected 5 fields");
        f.ids.push_back(static_cast<int>(parse_int_tok(path, lineno, cells[0])));
        f.xyz.emplace_back(parse_double_tok(path, lineno, cells[1]),
                           parse_double_tok(path, lineno, cells[2]),
                           parse_double_tok(path, lineno, cells[3]));
        vals.push_back(parse_double_tok(path, lineno, cells[4]));
    }
    f.values = Eigen::Map<const Vec>(vals.data(), static_cast<Eigen::Index>(vals.size()));
    return f;
}

void write_point_field_vtk(const std::string& path, const std::vector<V3>& xyz, const Vec& values,
                           const std::string& value_name) {
    if (static_cast<Eigen::Index>(xyz.size()) != values.size())
        fail(ErrKind::usage, "point field: point/value count mismatch");
    std::ofstream out = open_out(path);
    out << "# vtk DataFile Version 3.0\n";
    out << "poreflow point field\n";
    out << "ASCII\n";
    out << "DATASET POLYDATA\n";
    out << "POINTS " << xyz.size() << " double\n";
    for (const V3& p : xyz)
        out << fmt_double(p.x()) << " " << fmt_double(p.y()) << " " << fmt_double(p.z()) << "\n";
    out << "POINT_DATA " << xyz.size() << "\n";
    out << "SCALARS " << value_name << " double 1\n";
    out << "LOOKUP_TABLE default\n";
    for (Eigen::Index i = 0; i < values.size(); ++i) out << fmt_double(values[i]) << "\n";
    check_write(out, path);
}

void write_results_csv(const std::string& path, const std::vector<ResultRow>& rows) {
    std::ofstream out = open_out(path);
    out << kResultsHeader << "\n";
    for (const ResultRow& r : rows) {
        out << r.realisation << "," << r.direction << "," << r.seed << ","
            << fmt_double(r.achieved_porosity) << "," << fmt_double(r.Q) << ","
            << fmt_double(r.K_cond) << "," << fmt_double(r.k) << "," << fmt_double(r.residual)
            << "," << fmt_double(r.wall_s) << "," << r.error << "\n";
    }
    check_write(out, path);
}

std::vector<ResultRow> read_results_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrKind::io, "cannot open results file: " + path);
    std::string line;
    if (!std::getline(in, line)) fail(ErrKind::format, path + ": empty file");
    if (trim_line(line) != kResultsHeader)
        fail(ErrKind::format, path + ":1: unexpected results header");

    std::vector<ResultRow> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim_line(line).empty()) continue;
        auto c = split_csv(line);
        if (c.size() != 10)
            fail(ErrKind::format, path + ":" + std::to_string(lineno) + ": expected 10 fields");
        ResultRow r;
        r.realisation = static_cast<int>(parse_int_tok(path, lineno, c[0]));
        r.direction = c[1];
        r.seed = parse_u64_tok(path, lineno, c[2]);
        r.achieved_porosity = parse_double_tok(path, lineno, c[3]);
        r.Q = parse_double_tok(path, lineno, c[4]);
        r.K_cond = parse_double_tok(path, lineno, c[5]);
        r.k = parse_double_tok(path, lineno, c[6]);
        r.residual = parse_double_tok(path, lineno, c[7]);
        r.wall_s = parse_double_tok(path, lineno, c[8]);
        r.error = c[9];
        rows.push_back(std::move(r));
    }
    return rows;
}

} // namespace pf
