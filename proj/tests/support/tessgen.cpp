#include "tessgen.hpp"

#include "poreflow/errors.hpp"
#include "poreflow/exports.hpp"
#include "poreflow/grid.hpp"

#include <cstdint>
#include <fstream>
#include <unordered_map>

namespace pftest {

void write_structured_tess(const std::string& path, int nx, int ny, int nz, double Lx, double Ly,
                           double Lz) {
    pf::RawComplex raw = pf::structured_grid_raw(nx, ny, nz, Lx, Ly, Lz);

    // edge lookup so face records can carry Neper's signed edge lists
    std::unordered_map<std::uint64_t, int> edge_of;
    auto key = [](int a, int b) {
        return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
    };
    for (size_t e = 0; e < raw.edges.size(); ++e)
        edge_of[key(raw.edges[e][0], raw.edges[e][1])] = static_cast<int>(e);

    std::ofstream out(path);
    if (!out) pf::fail(pf::ErrKind::io, "cannot write " + path);

    out << "***tess\n";
    out << " **format\n   3.3\n";
    out << " **general\n   3 standard\n";
    out << " **cell\n   " << raw.vols.size() << "\n";
    out << "  *id\n  ";
    for (size_t c = 0; c < raw.vols.size(); ++c) {
        out << " " << (c + 1);
        if ((c + 1) % 16 == 0 && c + 1 < raw.vols.size()) out << "\n  ";
    }
    out << "\n";

    out << " **vertex\n   " << raw.nodes.size() << "\n";
    for (size_t v = 0; v < raw.nodes.size(); ++v)
        out << "   " << (v + 1) << " " << pf::fmt_double(raw.nodes[v].x()) << " "
            << pf::fmt_double(raw.nodes[v].y()) << " " << pf::fmt_double(raw.nodes[v].z())
            << " 0\n";

    out << " **edge\n   " << raw.edges.size() << "\n";
    for (size_t e = 0; e < raw.edges.size(); ++e)
        out << "   " << (e + 1) << " " << (raw.edges[e][0] + 1) << " " << (raw.edges[e][1] + 1)
            << " 0\n";

    out << " **face\n   " << raw.faces.size() << "\n";
    for (size_t f = 0; f < raw.faces.size(); ++f) {
        const auto& cyc = raw.faces[f];
        out << "   " << (f + 1) << " " << cyc.size();
        for (int v : cyc) out << " " << (v + 1);
        out << "\n    " << cyc.size();
        for (size_t i = 0; i < cyc.size(); ++i) {
            int a = cyc[i], b = cyc[(i + 1) % cyc.size()];
            auto it = edge_of.find(a < b ? key(a, b) : key(b, a));
            int signed_id = (it->second + 1) * (a < b ? 1 : -1);
            out << " " << signed_id;
        }
        // plane equation and state lines are structural filler here
        out << "\n    0 0 0 0\n    0\n";
    }

    out << " **polyhedron\n   " << raw.vols.size() << "\n";
    for (size_t c = 0; c < raw.vols.size(); ++c) {
        const auto& shell = raw.vols[c];
        out << "   " << (c + 1) << " " << shell.size();
        // alternate the shell signs; readers must not care
        for (size_t i = 0; i < shell.size(); ++i)
            out << " " << ((i % 2 == 0) ? (shell[i] + 1) : -(shell[i] + 1));
        out << "\n";
    }

    out << " **domain\n";
    out << "  *general\n   cube\n";
    out << "***end\n";
    out.flush();
    if (!out) pf::fail(pf::ErrKind::io, "write failed on " + path);
}

} // namespace pftest
