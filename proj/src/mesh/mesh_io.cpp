#include "confspec/errors.hpp"
#include "confspec/mesh.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>

namespace confspec {
namespace {

std::string lower_extension(const std::filesystem::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

// Next line that is neither blank nor a comment.
bool next_content_line(std::istream& in, std::string& line) {
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
}

}  // namespace

MeshData read_off_data(std::istream& in) {
    std::string line;
    if (!next_content_line(in, line)) throw ValidationError("OFF: empty input");
    std::istringstream header(line);
    std::string magic;
    header >> magic;
    if (magic != "OFF") throw ValidationError("OFF: missing 'OFF' header");
    long nv = -1, nf = -1, ne = 0;
    if (!(header >> nv)) {
        if (!next_content_line(in, line)) throw ValidationError("OFF: missing counts line");
        header = std::istringstream(line);
        header >> nv;
    }
    if (!(header >> nf)) throw ValidationError("OFF: malformed counts line");
    header >> ne;
    if (nv <= 0 || nf <= 0) throw ValidationError("OFF: vertex and face counts must be positive");

    std::vector<Vec3> positions(static_cast<std::size_t>(nv));
    for (long i = 0; i < nv; ++i) {
        if (!next_content_line(in, line)) throw ValidationError("OFF: truncated vertex list");
        std::istringstream s(line);
        double x, y, z;
        if (!(s >> x >> y >> z))
            throw ValidationError("OFF: malformed vertex " + std::to_string(i));
        positions[i] = Vec3(x, y, z);
    }
    std::vector<Face> faces(static_cast<std::size_t>(nf));
    for (long i = 0; i < nf; ++i) {
        if (!next_content_line(in, line)) throw ValidationError("OFF: truncated face list");
        std::istringstream s(line);
        int count = 0;
        s >> count;
        if (count != 3)
            throw ValidationError("OFF: face " + std::to_string(i) + " has " +
                                  std::to_string(count) + " vertices; only triangles are supported");
        if (!(s >> faces[i][0] >> faces[i][1] >> faces[i][2]))
            throw ValidationError("OFF: malformed face " + std::to_string(i));
    }
    return {std::move(positions), std::move(faces)};
}

MeshData read_obj_data(std::istream& in) {
    std::vector<Vec3> positions;
    std::vector<Face> faces;
    std::string line;
    while (next_content_line(in, line)) {
        std::istringstream s(line);
        std::string tag;
        s >> tag;
        if (tag == "v") {
            double x, y, z;
            if (!(s >> x >> y >> z))
                throw ValidationError("OBJ: malformed vertex " + std::to_string(positions.size()));
            positions.emplace_back(x, y, z);
        } else if (tag == "f") {
            std::vector<int> idx;
            std::string tok;
            while (s >> tok) {
                // Accept v, v/vt, v//vn, v/vt/vn; only the position index matters.
                const int i = std::stoi(tok.substr(0, tok.find('/')));
                idx.push_back(i > 0 ? i - 1 : static_cast<int>(positions.size()) + i);
            }
            if (idx.size() != 3)
                throw ValidationError("OBJ: face " + std::to_string(faces.size()) + " has " +
                                      std::to_string(idx.size()) +
                                      " vertices; only triangles are supported");
            faces.push_back({idx[0], idx[1], idx[2]});
        }
    }
    return {std::move(positions), std::move(faces)};
}

TriangleMesh read_off(std::istream& in) {
    auto d = read_off_data(in);
    return TriangleMesh(std::move(d.positions), std::move(d.faces));
}

TriangleMesh read_obj(std::istream& in) {
    auto d = read_obj_data(in);
    return TriangleMesh(std::move(d.positions), std::move(d.faces));
}

void write_off(const TriangleMesh& mesh, std::ostream& out) {
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    out << "OFF\n" << mesh.vertex_count() << ' ' << mesh.face_count() << ' ' << mesh.edge_count() << '\n';
    for (const Vec3& p : mesh.positions()) out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
    for (const Face& f : mesh.faces()) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

void write_obj(const TriangleMesh& mesh, std::ostream& out) {
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (const Vec3& p : mesh.positions()) out << "v " << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
    for (const Face& f : mesh.faces())
        out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
}

MeshData load_mesh_data(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open mesh file " + path.string());
    const std::string ext = lower_extension(path);
    if (ext == ".off") return read_off_data(in);
    if (ext == ".obj") return read_obj_data(in);
    throw ValidationError("unsupported mesh extension '" + ext + "' (expected .off or .obj)");
}

TriangleMesh load_mesh(const std::filesystem::path& path) {
    auto d = load_mesh_data(path);
    return TriangleMesh(std::move(d.positions), std::move(d.faces));
}

void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path) {
    const std::string ext = lower_extension(path);
    if (ext != ".off" && ext != ".obj")
        throw ValidationError("unsupported mesh extension '" + ext + "' (expected .off or .obj)");
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write mesh file " + path.string());
    if (ext == ".off")
        write_off(mesh, out);
    else
        write_obj(mesh, out);
}

}  // namespace confspec
