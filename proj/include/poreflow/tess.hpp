#pragma once
#include "poreflow/cell_complex.hpp"

#include <string>
#include <unordered_map>
#include <vector>

namespace pf {

// In-memory image of a Neper .tess file, after id densification. Geometry
// only: vertices, edges, face cycles, polyhedron shells and the domain
// bounding box if present. Orientation data and per-cell metadata (seeds,
// crystal orientations, lamellar ids) are skipped; we rebuild incidence and
// orientation from scratch anyway.
struct TessellationFile {
    std::string format_version; // e.g. "3.3", kept verbatim for logs

    // Geometry with ids remapped to dense 0-based. orig_* retains the file's
    // own numbering so diagnostics can point back at the source.
    std::vector<V3> vertices;
    std::vector<std::array<int, 2>> edges;      // dense vertex ids
    std::vector<std::vector<int>> face_cycles;  // dense vertex ids, one cycle per face
    std::vector<std::vector<int>> poly_faces;   // dense face ids, signs stripped

    std::vector<int> orig_vertex, orig_edge, orig_face, orig_poly;
    std::unordered_map<int, int> vertex_of_orig; // file id -> dense id

    // Axis-aligned bounds of the vertex cloud (the **domain section is not
    // parsed; for our flow setups the hull of the vertices is what matters).
    V3 bbox_lo{0, 0, 0}, bbox_hi{0, 0, 0};

    // Sections we recognised but deliberately ignored, e.g. crystal
    // orientations. One human-readable line each; callers may log them.
    std::vector<std::string> notices;
};

// Parse a .tess file (Neper format versions 2.x through 4.x). Malformed
// input raises ErrKind::format with the offending line number and section;
// unreadable paths raise ErrKind::io. Never trips an assert on bad bytes.
TessellationFile parse_tess(const std::string& path);

// Strip a parsed tessellation down to the raw lists build_complex() wants.
RawComplex to_raw(const TessellationFile& tf);

} // namespace pf
