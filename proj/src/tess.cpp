#include "poreflow/tess.hpp"

#include "poreflow/errors.hpp"

#include <charconv>
#include <fstream>
#include <limits>
#include <optional>
#include <string_view>

namespace pf {
namespace {

// Line-oriented cursor over the whole file. .tess is strictly line based
// (one vertex per line, four lines per face, ...), so we keep line numbers
// around for every token we ever complain about.
struct Reader {
    std::string path;
    std::vector<std::string> lines;
    size_t next = 0; // index of the line a subsequent take() returns

    // Returns the next non-blank line, trimmed, or nullopt at EOF.
    std::optional<std::string_view> take(int& lineno) {
        while (next < lines.size()) {
            std::string_view s = trim(lines[next]);
            ++next;
            if (!s.empty()) {
                lineno = static_cast<int>(next); // 1-based
                return s;
            }
        }
        return std::nullopt;
    }

    // Same as take() but without consuming.
    std::optional<std::string_view> peek(int& lineno) {
        size_t save = next;
        auto s = take(lineno);
        next = save;
        return s;
    }

    static std::string_view trim(std::string_view s) {
        size_t a = s.find_first_not_of(" \t\r\n");
        if (a == std::string_view::npos) return {};
        size_t b = s.find_last_not_of(" \t\r\n");
        return s.substr(a, b - a + 1);
    }
};

[[noreturn]] void bad(const Reader& r, int lineno, const std::string& what) {
    fail(ErrKind::format, r.path + ":" + std::to_string(lineno) + ": " + what);
}

std::vector<std::string_view> split(std::string_view s) {
    std::vector<std::string_view> out;
    size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

long long parse_ll(const Reader& r, int lineno, std::string_view tok, const char* ctx) {
    long long v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size())
        bad(r, lineno, std::string(ctx) + ": expected an integer, got '" + std::string(tok) + "'");
    return v;
}

double parse_d(const Reader& r, int lineno, std::string_view tok, const char* ctx) {
    double v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size())
        bad(r, lineno, std::string(ctx) + ": expected a number, got '" + std::string(tok) + "'");
    return v;
}

bool is_section(std::string_view s) { return s.size() >= 2 && s[0] == '*' && s[1] == '*'; }

// Consumes lines until the next **section / ***end marker. Used for the
// sections we have no use for (**domain, **periodicity, cell metadata).
void skip_to_next_section(Reader& r) {
    int ln = 0;
    while (auto s = r.peek(ln)) {
        if (is_section(*s)) return;
        r.take(ln);
    }
}

// Declared entity count at the top of a section; every section opens with one.
int read_count(Reader& r, const char* section) {
    int ln = 0;
    auto s = r.take(ln);
    if (!s) fail(ErrKind::format, r.path + ": unexpected end of file in " + section);
    auto toks = split(*s);
    long long n = parse_ll(r, ln, toks[0], section);
    if (n < 1 || n > std::numeric_limits<int>::max())
        bad(r, ln, std::string(section) + ": entity count " + std::to_string(n) +
                       " out of range");
    return static_cast<int>(n);
}

std::vector<std::string_view> record_line(Reader& r, int& ln, const char* section) {
    auto s = r.take(ln);
    if (!s || is_section(*s))
        fail(ErrKind::format, r.path + ": truncated " + section + " section (expected " +
                                  "more records" + (s ? " before line " + std::to_string(ln) : "") +
                                  ")");
    return split(*s);
}

struct IdMap {
    std::unordered_map<int, int> dense; // file id -> 0-based
    std::vector<int> orig;

    int add(Reader& r, int ln, long long id, const char* kind) {
        if (id < std::numeric_limits<int>::min() || id > std::numeric_limits<int>::max())
            bad(r, ln, std::string(kind) + " id out of range");
        auto [it, fresh] = dense.emplace(static_cast<int>(id), static_cast<int>(orig.size()));
        if (!fresh) bad(r, ln, std::string(kind) + " id " + std::to_string(id) + " repeated");
        orig.push_back(static_cast<int>(id));
        return it->second;
    }

    int lookup(Reader& r, int ln, long long id, const char* kind) const {
        auto it = dense.find(static_cast<int>(id));
        if (it == dense.end())
            bad(r, ln, std::string("reference to unknown ") + kind + " " + std::to_string(id));
        return it->second;
    }
};

} // namespace

TessellationFile parse_tess(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrKind::io, "cannot open tessellation file: " + path);

    Reader r;
    r.path = path;
    for (std::string line; std::getline(in, line);) r.lines.push_back(std::move(line));
    if (in.bad()) fail(ErrKind::io, "read error on " + path);

    int ln = 0;
    auto first = r.take(ln);
    if (!first || *first != "***tess")
        fail(ErrKind::format, path + ": not a .tess file (missing ***tess header)");

    TessellationFile tf;
    IdMap vmap, emap, fmap, pmap;
    bool saw_vertex = false, saw_edge = false, saw_face = false, saw_poly = false;
    int declared_cells = -1;

    while (auto line = r.take(ln)) {
        std::string_view s = *line;
        if (s == "***end") break;
        if (!is_section(s)) bad(r, ln, "expected a section marker, got '" + std::string(s) + "'");

        if (s == "**format") {
            auto rec = record_line(r, ln, "**format");
            tf.format_version = std::string(rec[0]);
            // Version token looks like "3.3"; anything from the 2.x to 4.x
            // era uses the section layout we understand.
            long long major = parse_ll(r, ln, rec[0].substr(0, rec[0].find('.')), "**format");
            if (major < 2 || major > 4)
                bad(r, ln, "unsupported .tess format version " + tf.format_version);

        } else if (s == "**cell") {
            declared_cells = read_count(r, "**cell");
            // Cell metadata lives in *-subsections (*id, *seed, *ori, ...).
            // None of it feeds the complex; orientation data gets a notice so
            // the omission is visible in logs.
            int pln = 0;
            while (auto p = r.peek(pln)) {
                if (is_section(*p)) break;
                if ((*p)[0] == '*') {
                    std::string_view name = split(*p)[0];
                    if (name == "*ori" || name == "*crysym")
                        tf.notices.push_back(path + ":" + std::to_string(pln) + ": " +
                                             std::string(name) +
                                             " crystal orientation data ignored");
                }
                r.take(pln);
            }

        } else if (s == "**vertex") {
            if (saw_vertex) bad(r, ln, "duplicate **vertex section");
            saw_vertex = true;
            int n = read_count(r, "**vertex");
            tf.vertices.reserve(n);
            for (int i = 0; i < n; ++i) {
                auto rec = record_line(r, ln, "**vertex");
                if (rec.size() < 4) bad(r, ln, "**vertex: expected 'id x y z', got fewer fields");
                vmap.add(r, ln, parse_ll(r, ln, rec[0], "**vertex"), "vertex");
                tf.vertices.emplace_back(parse_d(r, ln, rec[1], "**vertex"),
                                         parse_d(r, ln, rec[2], "**vertex"),
                                         parse_d(r, ln, rec[3], "**vertex"));
                // trailing state column (and anything after) is irrelevant
            }

        } else if (s == "**edge") {
            if (saw_edge) bad(r, ln, "duplicate **edge section");
            if (!saw_vertex)
                fail(ErrKind::format, path + ": missing required section **vertex"
                                             " (must precede **edge)");
            saw_edge = true;
            int n = read_count(r, "**edge");
            tf.edges.reserve(n);
            for (int i = 0; i < n; ++i) {
                auto rec = record_line(r, ln, "**edge");
                if (rec.size() < 3) bad(r, ln, "**edge: expected 'id v1 v2', got fewer fields");
                emap.add(r, ln, parse_ll(r, ln, rec[0], "**edge"), "edge");
                int a = vmap.lookup(r, ln, parse_ll(r, ln, rec[1], "**edge"), "vertex");
                int b = vmap.lookup(r, ln, parse_ll(r, ln, rec[2], "**edge"), "vertex");
                if (a == b) bad(r, ln, "**edge: degenerate edge with equal endpoints");
                tf.edges.push_back({a, b});
            }

        } else if (s == "**face") {
            if (saw_face) bad(r, ln, "duplicate **face section");
            if (!saw_edge)
                fail(ErrKind::format, path + ": missing required section **edge"
                                             " (must precede **face)");
            saw_face = true;
            int n = read_count(r, "**face");
            tf.face_cycles.reserve(n);
            // Four lines per face: vertex cycle, edge list, plane equation,
            // state. Only the first two carry structure we check; the edge
            // list is validated then dropped (build_complex re-derives it).
            for (int i = 0; i < n; ++i) {
                auto rec = record_line(r, ln, "**face");
                if (rec.size() < 2) bad(r, ln, "**face: expected 'id n_vertices ...'");
                fmap.add(r, ln, parse_ll(r, ln, rec[0], "**face"), "face");
                long long nv = parse_ll(r, ln, rec[1], "**face");
                if (nv < 3) bad(r, ln, "**face: cycle needs at least 3 vertices");
                if (static_cast<long long>(rec.size()) < 2 + nv)
                    bad(r, ln, "**face: cycle declares " + std::to_string(nv) +
                                   " vertices but lists fewer");
                std::vector<int> cyc(static_cast<size_t>(nv));
                for (long long k = 0; k < nv; ++k)
                    cyc[static_cast<size_t>(k)] =
                        vmap.lookup(r, ln, parse_ll(r, ln, rec[2 + k], "**face"), "vertex");
                tf.face_cycles.push_back(std::move(cyc));

                auto erec = record_line(r, ln, "**face");
                long long ne = parse_ll(r, ln, erec[0], "**face");
                if (ne < 3 || static_cast<long long>(erec.size()) < 1 + ne)
                    bad(r, ln, "**face: malformed edge list");
                for (long long k = 0; k < ne; ++k) {
                    long long e = parse_ll(r, ln, erec[1 + k], "**face");
                    emap.lookup(r, ln, e < 0 ? -e : e, "edge");
                }
                record_line(r, ln, "**face"); // plane equation
                record_line(r, ln, "**face"); // state / interpolation point
            }

        } else if (s == "**polyhedron") {
            if (saw_poly) bad(r, ln, "duplicate **polyhedron section");
            if (!saw_face)
                fail(ErrKind::format, path + ": missing required section **face"
                                             " (must precede **polyhedron)");
            saw_poly = true;
            int n = read_count(r, "**polyhedron");
            tf.poly_faces.reserve(n);
            for (int i = 0; i < n; ++i) {
                auto rec = record_line(r, ln, "**polyhedron");
                if (rec.size() < 2) bad(r, ln, "**polyhedron: expected 'id n_faces ...'");
                pmap.add(r, ln, parse_ll(r, ln, rec[0], "**polyhedron"), "polyhedron");
                long long nf = parse_ll(r, ln, rec[1], "**polyhedron");
                if (nf < 4) bad(r, ln, "**polyhedron: shell needs at least 4 faces");
                if (static_cast<long long>(rec.size()) < 2 + nf)
                    bad(r, ln, "**polyhedron: shell declares " + std::to_string(nf) +
                                   " faces but lists fewer");
                std::vector<int> shell(static_cast<size_t>(nf));
                for (long long k = 0; k < nf; ++k) {
                    long long f = parse_ll(r, ln, rec[2 + k], "**polyhedron");
                    // Signs encode Neper's own orientation convention; we
                    // re-orient from geometry, so only the id survives.
                    shell[static_cast<size_t>(k)] =
                        fmap.lookup(r, ln, f < 0 ? -f : f, "face");
                }
                tf.poly_faces.push_back(std::move(shell));
            }

        } else {
            // **general, **domain, **periodicity, and whatever future
            // sections appear: structurally skippable.
            skip_to_next_section(r);
        }
    }

    if (!saw_vertex) fail(ErrKind::format, path + ": missing required section **vertex");
    if (!saw_edge) fail(ErrKind::format, path + ": missing required section **edge");
    if (!saw_face) fail(ErrKind::format, path + ": missing required section **face");
    if (!saw_poly) fail(ErrKind::format, path + ": missing required section **polyhedron");
    if (declared_cells >= 0 && declared_cells != static_cast<int>(tf.poly_faces.size()))
        fail(ErrKind::format,
             path + ": **cell declares " + std::to_string(declared_cells) +
                 " cells but **polyhedron lists " + std::to_string(tf.poly_faces.size()));

    tf.orig_vertex = std::move(vmap.orig);
    tf.orig_edge = std::move(emap.orig);
    tf.orig_face = std::move(fmap.orig);
    tf.orig_poly = std::move(pmap.orig);
    tf.vertex_of_orig = std::move(vmap.dense);

    tf.bbox_lo = tf.vertices.front();
    tf.bbox_hi = tf.vertices.front();
    for (const V3& v : tf.vertices) {
        tf.bbox_lo = tf.bbox_lo.cwiseMin(v);
        tf.bbox_hi = tf.bbox_hi.cwiseMax(v);
    }
    return tf;
}

RawComplex to_raw(const TessellationFile& tf) {
    RawComplex raw;
    raw.nodes = tf.vertices;
    raw.edges = tf.edges;
    raw.faces = tf.face_cycles;
    raw.vols = tf.poly_faces;
    return raw;
}

} // namespace pf
