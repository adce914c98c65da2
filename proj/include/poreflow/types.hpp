#pragma once
#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace pf {

using Vec = Eigen::VectorXd;
using V3 = Eigen::Vector3d;
using SpMat = Eigen::SparseMatrix<double>;
using Trip = Eigen::Triplet<double>;

// Cell of the material complex: (dimension, dense index within that dimension).
struct CellId {
    int dim;
    int index;
    bool operator==(const CellId& o) const { return dim == o.dim && index == o.index; }
    bool operator<(const CellId& o) const {
        return dim != o.dim ? dim < o.dim : index < o.index;
    }
};

// Coefficient array over the p-cells of a complex. The unit tag is carried for
// reporting only; arithmetic does not consult it.
struct Cochain {
    int dim = 0;
    Vec values;
    std::string units;
};

} // namespace pf
