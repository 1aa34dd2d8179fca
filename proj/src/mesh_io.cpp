#include "foldsense/mesh_io.hpp"

#include "foldsense/errors.hpp"
#include "foldsense/text.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>

namespace foldsense {

MeshFormat mesh_format_from_string(const std::string& s) {
    if (s == "stl" || s == "STL") return MeshFormat::Stl;
    if (s == "obj" || s == "OBJ") return MeshFormat::Obj;
    throw ValidationError("unsupported mesh format: " + s);
}

namespace {

std::string export_stl(const FoldMesh& m) {
    std::ostringstream out;
    out << "solid foldsense\n";
    for (int f = 0; f < static_cast<int>(m.faces.size()); ++f) {
        const Vec3 n = m.face_normal(f);
        out << " facet normal " << g9(n.x()) << ' ' << g9(n.y()) << ' ' << g9(n.z()) << '\n';
        out << "  outer loop\n";
        for (int i : m.faces[f]) {
            const Vec3& v = m.vertices[i];
            out << "   vertex " << g9(v.x()) << ' ' << g9(v.y()) << ' ' << g9(v.z()) << '\n';
        }
        out << "  endloop\n endfacet\n";
    }
    out << "endsolid foldsense\n";
    return out.str();
}

std::string export_obj(const FoldMesh& m) {
    std::ostringstream out;
    out << "# foldsense mesh: " << m.vertices.size() << " vertices, " << m.faces.size()
        << " faces\n";
    if (m.vent) {
        const auto& v = *m.vent;
        out << "# vent center " << g9(v.center.x()) << ' ' << g9(v.center.y()) << ' '
            << g9(v.center.z()) << " radius " << g9(v.radius) << '\n';
    }
    for (const auto& v : m.vertices)
        out << "v " << g9(v.x()) << ' ' << g9(v.y()) << ' ' << g9(v.z()) << '\n';
    for (const auto& f : m.faces)
        out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
    return out.str();
}

}  // namespace

std::string export_mesh(const FoldMesh& mesh, MeshFormat format) {
    return format == MeshFormat::Stl ? export_stl(mesh) : export_obj(mesh);
}

void write_mesh(const std::string& path, const FoldMesh& mesh, MeshFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << export_mesh(mesh, format);
    if (!out) throw IoError("write failed: " + path);
}

FoldMesh import_stl(std::istream& in) {
    FoldMesh m;
    std::unordered_map<std::string, int> seen;
    std::vector<int> tri;
    std::string tok;
    while (in >> tok) {
        if (tok != "vertex") continue;
        double x, y, z;
        if (!(in >> x >> y >> z)) throw IoError("malformed STL vertex");
        std::string key = g9(x) + "/" + g9(y) + "/" + g9(z);
        auto it = seen.find(key);
        int id;
        if (it == seen.end()) {
            m.vertices.emplace_back(x, y, z);
            id = static_cast<int>(m.vertices.size()) - 1;
            seen.emplace(std::move(key), id);
        } else {
            id = it->second;
        }
        tri.push_back(id);
        if (tri.size() == 3) {
            m.faces.push_back({tri[0], tri[1], tri[2]});
            m.tags.push_back({});
            tri.clear();
        }
    }
    if (!tri.empty()) throw IoError("STL facet with incomplete vertex list");
    return m;
}

FoldMesh import_obj(std::istream& in) {
    FoldMesh m;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        if (tag == "v") {
            double x, y, z;
            if (!(ls >> x >> y >> z)) throw IoError("malformed OBJ vertex");
            m.vertices.emplace_back(x, y, z);
        } else if (tag == "f") {
            std::array<int, 3> f{};
            for (int i = 0; i < 3; ++i) {
                std::string ref;
                if (!(ls >> ref)) throw IoError("OBJ face needs three vertices");
                f[i] = std::stoi(ref.substr(0, ref.find('/'))) - 1;
                if (f[i] < 0) throw IoError("OBJ face index out of range");
            }
            m.faces.push_back(f);
            m.tags.push_back({});
        }
    }
    for (const auto& f : m.faces)
        for (int i : f)
            if (i >= static_cast<int>(m.vertices.size()))
                throw IoError("OBJ face index out of range");
    return m;
}

FoldMesh read_mesh(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    const auto dot = path.rfind('.');
    const std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    if (ext == "stl" || ext == "STL") return import_stl(in);
    if (ext == "obj" || ext == "OBJ") return import_obj(in);
    throw ValidationError("unsupported mesh format: " + ext);
}

}  // namespace foldsense
