#ifndef PPUM_MESH_IO_HPP
#define PPUM_MESH_IO_HPP

// Mesh file formats: Triangle-style .node/.ele pairs, a JSON mesh document,
// and legacy ASCII VTK export for visualization.

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ppum/mesh.hpp"

namespace ppum {

namespace io_detail {

inline std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

} // namespace io_detail

// .node: "<n> 2 0 1" header, then "<id> <x> <y> <marker>" lines.
inline void write_node(const Mesh& m, std::ostream& os) {
    os << m.vertices.size() << " 2 0 1\n";
    for (VertexId v = 0; v < m.vertices.size(); ++v)
        os << v << ' ' << io_detail::fmt(m.vertices[v].pos.x) << ' '
           << io_detail::fmt(m.vertices[v].pos.y) << ' ' << m.vertices[v].marker << '\n';
}

// .ele: "<n> 3 0" header, then "<id> <v0> <v1> <v2>" lines (live simplices only).
inline void write_ele(const Mesh& m, std::ostream& os) {
    os << m.n_live() << " 3 0\n";
    std::size_t row = 0;
    for (SimplexId t = 0; t < m.simplices.size(); ++t) {
        if (!m.simplices[t].alive) continue;
        const auto& s = m.simplices[t];
        os << row++ << ' ' << s.v[0] << ' ' << s.v[1] << ' ' << s.v[2] << '\n';
    }
}

struct NodeFile {
    std::vector<std::pair<Vec2, int>> vertices;
};

inline NodeFile read_node(std::istream& is) {
    std::size_t n = 0;
    int dim = 0, nattr = 0, nmark = 0;
    if (!(is >> n >> dim >> nattr >> nmark)) throw IoError("read_node: bad header");
    if (dim != 2) throw IoError("read_node: dimension must be 2");
    NodeFile out;
    out.vertices.resize(n);
    std::vector<long> ids(n);
    for (std::size_t i = 0; i < n; ++i) {
        long id;
        double x, y;
        if (!(is >> id >> x >> y)) throw IoError("read_node: bad vertex line");
        double attr;
        for (int a = 0; a < nattr; ++a) is >> attr;
        int marker = 0;
        if (nmark > 0) is >> marker;
        ids[i] = id;
        out.vertices[i] = {{x, y}, marker};
    }
    // Triangle files may be 0- or 1-based; detect from the smallest id
    long base = n > 0 ? *std::min_element(ids.begin(), ids.end()) : 0;
    if (base != 0 && base != 1) throw IoError("read_node: ids must be 0- or 1-based");
    return out;
}

inline std::vector<std::array<VertexId, 3>> read_ele(std::istream& is) {
    std::size_t n = 0;
    int npts = 0, nattr = 0;
    if (!(is >> n >> npts >> nattr)) throw IoError("read_ele: bad header");
    if (npts != 3) throw IoError("read_ele: only 3-node triangles supported");
    std::vector<std::array<long, 3>> raw(n);
    long min_ref = 0;
    bool first = true;
    for (std::size_t i = 0; i < n; ++i) {
        long id, a, b, c;
        if (!(is >> id >> a >> b >> c)) throw IoError("read_ele: bad triangle line");
        double attr;
        for (int k = 0; k < nattr; ++k) is >> attr;
        raw[i] = {a, b, c};
        for (long r : {a, b, c}) {
            if (first || r < min_ref) min_ref = r;
            first = false;
        }
    }
    const long base = (min_ref == 1) ? 1 : 0;
    std::vector<std::array<VertexId, 3>> out(n);
    for (std::size_t i = 0; i < n; ++i)
        for (int k = 0; k < 3; ++k) {
            const long r = raw[i][k] - base;
            if (r < 0) throw IoError("read_ele: negative vertex reference");
            out[i][k] = static_cast<VertexId>(r);
        }
    return out;
}

inline Mesh read_mesh_files(const std::string& node_path, const std::string& ele_path) {
    std::ifstream nf(node_path);
    if (!nf) throw IoError("cannot open " + node_path);
    std::ifstream ef(ele_path);
    if (!ef) throw IoError("cannot open " + ele_path);
    const NodeFile nodes = read_node(nf);
    const auto tris = read_ele(ef);
    return build_mesh(nodes.vertices, tris);
}

inline nlohmann::json mesh_to_json(const Mesh& m) {
    nlohmann::json j;
    j["vertices"] = nlohmann::json::array();
    for (const auto& v : m.vertices)
        j["vertices"].push_back({v.pos.x, v.pos.y, v.marker});
    j["triangles"] = nlohmann::json::array();
    for (const auto& s : m.simplices)
        if (s.alive) j["triangles"].push_back({s.v[0], s.v[1], s.v[2]});
    return j;
}

inline Mesh mesh_from_json(const nlohmann::json& j) {
    if (!j.contains("vertices") || !j.contains("triangles"))
        throw IoError("mesh json: missing vertices/triangles");
    std::vector<std::pair<Vec2, int>> verts;
    for (const auto& v : j.at("vertices")) {
        if (!v.is_array() || v.size() < 2) throw IoError("mesh json: bad vertex entry");
        const int marker = v.size() > 2 ? v.at(2).get<int>() : 0;
        verts.push_back({{v.at(0).get<double>(), v.at(1).get<double>()}, marker});
    }
    std::vector<std::array<VertexId, 3>> tris;
    for (const auto& t : j.at("triangles")) {
        if (!t.is_array() || t.size() != 3) throw IoError("mesh json: bad triangle entry");
        tris.push_back({t.at(0).get<VertexId>(), t.at(1).get<VertexId>(), t.at(2).get<VertexId>()});
    }
    return build_mesh(verts, tris);
}

// Legacy ASCII VTK unstructured grid. Optional per-vertex and per-cell scalar
// fields; cell fields are emitted for live simplices in id order.
inline void write_vtk(const Mesh& m, std::ostream& os, const std::string& title = "mesh",
                      const std::vector<std::pair<std::string, std::vector<double>>>& point_fields = {},
                      const std::vector<std::pair<std::string, std::vector<double>>>& cell_fields = {}) {
    os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << m.vertices.size() << " double\n";
    for (const auto& v : m.vertices)
        os << io_detail::fmt(v.pos.x) << ' ' << io_detail::fmt(v.pos.y) << " 0\n";
    const std::size_t nc = m.n_live();
    os << "CELLS " << nc << ' ' << 4 * nc << '\n';
    for (const auto& s : m.simplices)
        if (s.alive) os << "3 " << s.v[0] << ' ' << s.v[1] << ' ' << s.v[2] << '\n';
    os << "CELL_TYPES " << nc << '\n';
    for (std::size_t i = 0; i < nc; ++i) os << "5\n";
    if (!cell_fields.empty()) {
        os << "CELL_DATA " << nc << '\n';
        for (const auto& [name, data] : cell_fields) {
            os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
            for (SimplexId t = 0; t < m.simplices.size(); ++t)
                if (m.simplices[t].alive) os << io_detail::fmt(t < data.size() ? data[t] : 0.0) << '\n';
        }
    }
    if (!point_fields.empty()) {
        os << "POINT_DATA " << m.vertices.size() << '\n';
        for (const auto& [name, data] : point_fields) {
            os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
            for (VertexId v = 0; v < m.vertices.size(); ++v)
                os << io_detail::fmt(v < data.size() ? data[v] : 0.0) << '\n';
        }
    }
}

} // namespace ppum

#endif // PPUM_MESH_IO_HPP
