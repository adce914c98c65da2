#pragma once
#include <stdexcept>
#include <string>

namespace pf {

// Typed failures. The CLI maps kinds onto exit codes (see tools/main.cpp):
// bad configuration / usage -> 2, unreadable or malformed input -> 3,
// numerical breakdown -> 4.
enum class ErrKind {
    usage,        // API misuse (bad dimension argument, unbuilt complex, ...)
    validation,   // inconsistent user-provided values (negative conductivity, ...)
    capacity,     // fabric mapping ran out of eligible cells
    structural,   // dangling incidence reference, duplicate cells
    orientation,  // inconsistent relative orientations after propagation
    degeneracy,   // zero-measure cell
    topology,     // non-simple polyhedron, non-Boolean interval
    format,       // malformed input file
    io,           // filesystem failure
    numeric       // solver breakdown, singular system
};

class Error : public std::runtime_error {
  public:
    Error(ErrKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrKind kind() const { return kind_; }

  private:
    ErrKind kind_;
};

[[noreturn]] inline void fail(ErrKind k, const std::string& msg) { throw Error(k, msg); }

inline const char* err_kind_name(ErrKind k) {
    switch (k) {
        case ErrKind::usage: return "usage";
        case ErrKind::validation: return "validation";
        case ErrKind::capacity: return "capacity";
        case ErrKind::structural: return "structural";
        case ErrKind::orientation: return "orientation";
        case ErrKind::degeneracy: return "degeneracy";
        case ErrKind::topology: return "topology";
        case ErrKind::format: return "format";
        case ErrKind::io: return "io";
        case ErrKind::numeric: return "numeric";
    }
    return "unknown";
}

} // namespace pf
