#pragma once
#include "poreflow/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pf {

// Shortest decimal string that parses back to exactly the same double.
// Every numeric text format below goes through this, so files stay small
// and round trips are bit-exact.
std::string fmt_double(double x);

// Sparse operator snapshots in Matrix Market coordinate format (1-based
// "i j value" triplets under a "%%MatrixMarket matrix coordinate real
// general" banner). read_matrix_market(write_matrix_market(A)) == A entry
// for entry, including explicitly stored zeros being dropped on write.
void write_matrix_market(const SpMat& A, const std::string& path,
                         const std::string& comment = "");
SpMat read_matrix_market(const std::string& path);

// Scalar sample field over points, CSV flavour: header
// "cell_id,x,y,z,<name>" then one row per point. The reader exists so tests
// and downstream scripts can consume our own output.
struct PointFieldCsv {
    std::vector<int> ids;
    std::vector<V3> xyz;
    Vec values;
};
void write_point_field_csv(const std::string& path, const std::vector<V3>& xyz,
                           const Vec& values, const std::string& value_name);
PointFieldCsv read_point_field_csv(const std::string& path);

// Same field as a legacy-ASCII VTK polydata file (POINTS + one SCALARS
// array). Enough for ParaView/VisIt point rendering; no cells are written.
void write_point_field_vtk(const std::string& path, const std::vector<V3>& xyz,
                           const Vec& values, const std::string& value_name);

// One Monte Carlo permeability measurement. `error` stays empty on success;
// on a per-realisation failure the numeric fields are NaN and `error` holds
// the reason (written into the CSV as a trailing column so partial runs
// remain analysable).
struct ResultRow {
    int realisation = 0;
    std::string direction; // "x", "y" or "z"
    std::uint64_t seed = 0;
    double achieved_porosity = 0;
    double Q = 0;        // m^3/s through the outlet group
    double K_cond = 0;   // m/s-free conductivity form, Q L / (dP A)
    double k = 0;        // intrinsic permeability, m^2
    double residual = 0; // relative linear-system residual
    double wall_s = 0;
    std::string error;
};

inline const char* kResultsHeader =
    "realisation,direction,seed,achieved_porosity,Q_m3_per_s,K_cond,k_m2,residual,wall_s,error";

// Fixed-schema results table. An empty row set still writes the header line
// so downstream tooling can distinguish "ran, nothing produced" from a
// missing file.
void write_results_csv(const std::string& path, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_results_csv(const std::string& path);

} // namespace pf
