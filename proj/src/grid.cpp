#include "poreflow/grid.hpp"
#include "poreflow/errors.hpp"

#include <map>

namespace pf {

RawComplex structured_grid_raw(int nx, int ny, int nz, double Lx, double Ly, double Lz) {
    if (nx < 1 || ny < 1 || nz < 1)
        fail(ErrKind::validation, "structured_grid: cell counts must be >= 1");
    if (Lx <= 0 || Ly <= 0 || Lz <= 0)
        fail(ErrKind::validation, "structured_grid: box lengths must be > 0");

    RawComplex R;
    auto nid = [&](int i, int j, int k) { return i + (nx + 1) * (j + (ny + 1) * k); };
    R.nodes.resize(size_t(nx + 1) * (ny + 1) * (nz + 1));
    for (int k = 0; k <= nz; ++k)
        for (int j = 0; j <= ny; ++j)
            for (int i = 0; i <= nx; ++i)
                R.nodes[nid(i, j, k)] = V3(Lx * i / nx, Ly * j / ny, Lz * k / nz);

    for (int k = 0; k <= nz; ++k)
        for (int j = 0; j <= ny; ++j)
            for (int i = 0; i < nx; ++i) R.edges.push_back({nid(i, j, k), nid(i + 1, j, k)});
    for (int k = 0; k <= nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i <= nx; ++i) R.edges.push_back({nid(i, j, k), nid(i, j + 1, k)});
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j <= ny; ++j)
            for (int i = 0; i <= nx; ++i) R.edges.push_back({nid(i, j, k), nid(i, j, k + 1)});

    // faces normal to x, y, z; cycles chosen so the area vector points +axis
    std::map<std::array<int, 3>, int> fx, fy, fz;
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i <= nx; ++i) {
                fx[{i, j, k}] = int(R.faces.size());
                R.faces.push_back(
                    {nid(i, j, k), nid(i, j + 1, k), nid(i, j + 1, k + 1), nid(i, j, k + 1)});
            }
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j <= ny; ++j)
            for (int i = 0; i < nx; ++i) {
                fy[{i, j, k}] = int(R.faces.size());
                R.faces.push_back(
                    {nid(i, j, k), nid(i, j, k + 1), nid(i + 1, j, k + 1), nid(i + 1, j, k)});
            }
    for (int k = 0; k <= nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                fz[{i, j, k}] = int(R.faces.size());
                R.faces.push_back(
                    {nid(i, j, k), nid(i + 1, j, k), nid(i + 1, j + 1, k), nid(i, j + 1, k)});
            }

    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                R.vols.push_back({fx[{i, j, k}], fx[{i + 1, j, k}], fy[{i, j, k}],
                                  fy[{i, j + 1, k}], fz[{i, j, k}], fz[{i, j, k + 1}]});
    return R;
}

CellComplex structured_grid(int nx, int ny, int nz, double Lx, double Ly, double Lz) {
    return build_complex(structured_grid_raw(nx, ny, nz, Lx, Ly, Lz));
}

CellComplex tetra_fixture() {
    RawComplex R;
    R.nodes = {V3(0, 0, 0), V3(1, 0, 0), V3(0, 1, 0), V3(0, 0, 1)};
    R.edges = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
    R.faces = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
    R.vols = {{0, 1, 2, 3}};
    return build_complex(R);
}

} // namespace pf
