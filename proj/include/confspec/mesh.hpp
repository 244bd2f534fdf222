#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace confspec {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Face = std::array<int, 3>;

/// Undirected edge; v0 < v1. face0 holds v0 -> v1, face1 holds v1 -> v0.
struct Edge {
    int v0 = -1;
    int v1 = -1;
    int face0 = -1;
    int face1 = -1;
};

/// Closed, connected, consistently oriented triangle surface.
///
/// Every mesh carries intrinsic edge lengths. Embedded meshes derive them from
/// vertex positions; intrinsic meshes (flat tori, surgery outputs) supply them
/// directly and keep positions only for export. All metric quantities
/// (areas, cotangent weights, geodesic distances) are computed from lengths.
///
/// Immutable after construction, so it may be shared across threads freely.
class TriangleMesh {
public:
    /// Embedded mesh: lengths are Euclidean distances between positions.
    TriangleMesh(std::vector<Vec3> positions, std::vector<Face> faces);

    /// Intrinsic mesh: face_lengths[f][j] is the length of edge (f[j], f[(j+1)%3]).
    /// Both faces of an edge must agree to 1e-9 relative.
    TriangleMesh(std::vector<Vec3> positions, std::vector<Face> faces,
                 const std::vector<std::array<double, 3>>& face_lengths);

    int vertex_count() const noexcept { return static_cast<int>(positions_.size()); }
    int face_count() const noexcept { return static_cast<int>(faces_.size()); }
    int edge_count() const noexcept { return static_cast<int>(edges_.size()); }

    std::span<const Vec3> positions() const noexcept { return positions_; }
    std::span<const Face> faces() const noexcept { return faces_; }
    std::span<const Edge> edges() const noexcept { return edges_; }
    std::span<const double> edge_lengths() const noexcept { return edge_lengths_; }
    bool is_intrinsic() const noexcept { return intrinsic_; }

    /// Edge ids of face f; entry j is the edge (f[j], f[(j+1)%3]).
    const std::array<int, 3>& face_edges(int f) const { return face_edges_[f]; }
    /// Lengths of the edges of face f, same indexing as face_edges.
    std::array<double, 3> face_lengths(int f) const;
    double face_area(int f) const { return face_areas_[f]; }
    std::span<const double> face_areas() const noexcept { return face_areas_; }
    /// One third of the total area of the faces incident to each vertex.
    std::span<const double> vertex_area_shares() const noexcept { return area_shares_; }

    /// Neighbouring vertices of v (one-ring), sorted ascending.
    std::span<const int> neighbors(int v) const;
    /// Faces incident to v.
    std::span<const int> vertex_faces(int v) const;
    /// Edge id joining u and v, or -1.
    int find_edge(int u, int v) const;

    int euler_characteristic() const noexcept {
        return vertex_count() - edge_count() + face_count();
    }
    int genus() const noexcept { return (2 - euler_characteristic()) / 2; }
    double total_area() const noexcept { return total_area_; }

    /// All per-face lengths, for serialization and surgery.
    std::vector<std::array<double, 3>> all_face_lengths() const;

private:
    void build(const std::vector<std::array<double, 3>>* given_lengths);

    std::vector<Vec3> positions_;
    std::vector<Face> faces_;
    std::vector<Edge> edges_;
    std::vector<std::array<int, 3>> face_edges_;
    std::vector<double> edge_lengths_;
    std::vector<double> face_areas_;
    std::vector<double> area_shares_;
    std::vector<int> neighbor_offsets_;
    std::vector<int> neighbor_list_;
    std::vector<int> vface_offsets_;
    std::vector<int> vface_list_;
    double total_area_ = 0.0;
    bool intrinsic_ = false;
};

/// Area of a triangle from its three edge lengths (stable Heron).
double triangle_area(double a, double b, double c);

/// Period lattice Z e1 + Z e2 of a flat torus.
struct Lattice {
    Vec2 e1{1.0, 0.0};
    Vec2 e2{0.0, 1.0};

    double determinant() const { return e1.x() * e2.y() - e1.y() * e2.x(); }
    double area() const;
    /// Angle between e1 and e2 in degrees, in (0, 180).
    double angle_degrees() const;
    /// Dual basis (f1, f2) with e_i . f_j = delta_ij.
    std::array<Vec2, 2> dual() const;
    /// Same shape, uniformly scaled to the given fundamental-domain area.
    Lattice scaled_to_area(double target) const;

    static Lattice square();
    static Lattice equilateral();
    /// Rectangular lattice (1,0), (0, ratio).
    static Lattice rectangular(double ratio);
};

inline constexpr int kMaxIcosphereSubdivisions = 8;
inline constexpr int kMinTorusResolution = 4;
inline constexpr int kMaxTorusResolution = 512;

/// Unit-radius icosphere: 10*4^s + 2 vertices, 20*4^s faces.
TriangleMesh build_icosphere(int subdivisions);

/// Flat torus R^2 / lattice on a resolution x resolution grid with exact flat
/// edge lengths. Each grid cell is split along its shorter diagonal.
TriangleMesh build_flat_torus(const Lattice& lattice, int resolution);

/// Same connectivity with every length (and position) multiplied by factor > 0.
TriangleMesh scaled_mesh(const TriangleMesh& mesh, double factor);

/// True when the faces whose three vertices lie within graph-geodesic distance
/// radius of center form a topological disk that is not the whole surface.
bool ball_is_disk(const TriangleMesh& mesh, int center, double radius);

/// Graph-geodesic (Dijkstra over edge lengths) distances from a source vertex.
std::vector<double> geodesic_distances(const TriangleMesh& mesh, int source);
/// Vertices within graph-geodesic distance radius of center (sorted).
std::vector<int> geodesic_ball_vertices(const TriangleMesh& mesh, int center, double radius);
/// Hop counts from a set of seed vertices.
std::vector<int> graph_hops(const TriangleMesh& mesh, std::span<const int> seeds);

inline int genus(const TriangleMesh& mesh) { return mesh.genus(); }
inline double total_area(const TriangleMesh& mesh) { return mesh.total_area(); }

/// Raw file content before validation.
struct MeshData {
    std::vector<Vec3> positions;
    std::vector<Face> faces;
};

MeshData read_off_data(std::istream& in);
MeshData read_obj_data(std::istream& in);
MeshData load_mesh_data(const std::filesystem::path& path);

/// OFF or OBJ by extension (ASCII, triangles only).
TriangleMesh load_mesh(const std::filesystem::path& path);
void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path);

TriangleMesh read_off(std::istream& in);
TriangleMesh read_obj(std::istream& in);
void write_off(const TriangleMesh& mesh, std::ostream& out);
void write_obj(const TriangleMesh& mesh, std::ostream& out);

}  // namespace confspec
