#include "confspec/mesh.hpp"

#include "confspec/errors.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <string>
#include <unordered_map>

namespace confspec {
namespace {

std::uint64_t directed_key(int u, int v) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) |
           static_cast<std::uint32_t>(v);
}

std::string face_str(const Face& f) {
    std::ostringstream s;
    s << "(" << f[0] << ", " << f[1] << ", " << f[2] << ")";
    return s.str();
}

}  // namespace

double triangle_area(double a, double b, double c) {
    // Kahan's form: sort a >= b >= c.
    if (a < b) std::swap(a, b);
    if (a < c) std::swap(a, c);
    if (b < c) std::swap(b, c);
    const double p = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    return p <= 0.0 ? 0.0 : 0.25 * std::sqrt(p);
}

TriangleMesh::TriangleMesh(std::vector<Vec3> positions, std::vector<Face> faces)
    : positions_(std::move(positions)), faces_(std::move(faces)), intrinsic_(false) {
    build(nullptr);
}

TriangleMesh::TriangleMesh(std::vector<Vec3> positions, std::vector<Face> faces,
                           const std::vector<std::array<double, 3>>& face_lengths)
    : positions_(std::move(positions)), faces_(std::move(faces)), intrinsic_(true) {
    if (face_lengths.size() != faces_.size())
        throw ValidationError("intrinsic mesh: face_lengths has " +
                              std::to_string(face_lengths.size()) + " entries for " +
                              std::to_string(faces_.size()) + " faces");
    build(&face_lengths);
}

void TriangleMesh::build(const std::vector<std::array<double, 3>>* given_lengths) {
    const int nv = static_cast<int>(positions_.size());
    const int nf = static_cast<int>(faces_.size());
    if (nv == 0 || nf == 0) throw ValidationError("mesh has no vertices or no faces");

    for (int f = 0; f < nf; ++f) {
        const Face& t = faces_[f];
        for (int j = 0; j < 3; ++j) {
            if (t[j] < 0 || t[j] >= nv)
                throw ValidationError("face " + std::to_string(f) + " " + face_str(t) +
                                      " references a vertex out of range");
        }
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
            throw ValidationError("face " + std::to_string(f) + " " + face_str(t) +
                                  " repeats a vertex");
    }

    // Directed half-edges: each must be unique, and each needs its twin.
    std::unordered_map<std::uint64_t, int> half;
    half.reserve(static_cast<std::size_t>(nf) * 3);
    for (int f = 0; f < nf; ++f) {
        for (int j = 0; j < 3; ++j) {
            const int u = faces_[f][j];
            const int v = faces_[f][(j + 1) % 3];
            auto [it, inserted] = half.emplace(directed_key(u, v), f);
            if (!inserted)
                throw ValidationError("non-manifold or inconsistently oriented edge (" +
                                      std::to_string(u) + ", " + std::to_string(v) +
                                      "): directed twice, in faces " + std::to_string(it->second) +
                                      " and " + std::to_string(f));
        }
    }

    edges_.clear();
    face_edges_.assign(nf, {-1, -1, -1});
    std::unordered_map<std::uint64_t, int> edge_id;
    edge_id.reserve(half.size() / 2 + 1);
    for (int f = 0; f < nf; ++f) {
        for (int j = 0; j < 3; ++j) {
            const int u = faces_[f][j];
            const int v = faces_[f][(j + 1) % 3];
            const int a = std::min(u, v);
            const int b = std::max(u, v);
            auto it = edge_id.find(directed_key(a, b));
            if (it == edge_id.end()) {
                auto twin = half.find(directed_key(v, u));
                if (twin == half.end())
                    throw ValidationError("boundary edge (" + std::to_string(u) + ", " +
                                          std::to_string(v) + ") of face " + std::to_string(f) +
                                          " has only one incident face");
                Edge e;
                e.v0 = a;
                e.v1 = b;
                e.face0 = (u == a) ? f : twin->second;
                e.face1 = (u == a) ? twin->second : f;
                const int id = static_cast<int>(edges_.size());
                edges_.push_back(e);
                edge_id.emplace(directed_key(a, b), id);
                face_edges_[f][j] = id;
            } else {
                face_edges_[f][j] = it->second;
            }
        }
    }

    // Vertex -> faces.
    vface_offsets_.assign(nv + 1, 0);
    for (const Face& t : faces_)
        for (int v : t) ++vface_offsets_[v + 1];
    for (int v = 0; v < nv; ++v) {
        if (vface_offsets_[v + 1] == 0)
            throw ValidationError("vertex " + std::to_string(v) + " is not used by any face");
        vface_offsets_[v + 1] += vface_offsets_[v];
    }
    vface_list_.assign(vface_offsets_[nv], -1);
    {
        std::vector<int> fill(vface_offsets_.begin(), vface_offsets_.end() - 1);
        for (int f = 0; f < nf; ++f)
            for (int v : faces_[f]) vface_list_[fill[v]++] = f;
    }

    // Each vertex link must be a single cycle (rules out pinched vertices).
    for (int v = 0; v < nv; ++v) {
        const int valence = vface_offsets_[v + 1] - vface_offsets_[v];
        const int start = vface_list_[vface_offsets_[v]];
        int f = start;
        int steps = 0;
        do {
            const Face& t = faces_[f];
            const int j = t[0] == v ? 0 : (t[1] == v ? 1 : 2);
            const int prev = t[(j + 2) % 3];
            // Face holding v -> prev shares edge {v, prev} and continues the fan.
            f = half.at(directed_key(v, prev));
            ++steps;
        } while (f != start && steps <= valence);
        if (steps != valence)
            throw ValidationError("non-manifold vertex " + std::to_string(v) +
                                  ": incident faces do not form a single fan");
    }

    // Neighbours.
    neighbor_offsets_.assign(nv + 1, 0);
    for (const Edge& e : edges_) {
        ++neighbor_offsets_[e.v0 + 1];
        ++neighbor_offsets_[e.v1 + 1];
    }
    for (int v = 0; v < nv; ++v) neighbor_offsets_[v + 1] += neighbor_offsets_[v];
    neighbor_list_.assign(neighbor_offsets_[nv], -1);
    {
        std::vector<int> fill(neighbor_offsets_.begin(), neighbor_offsets_.end() - 1);
        for (const Edge& e : edges_) {
            neighbor_list_[fill[e.v0]++] = e.v1;
            neighbor_list_[fill[e.v1]++] = e.v0;
        }
        for (int v = 0; v < nv; ++v)
            std::sort(neighbor_list_.begin() + neighbor_offsets_[v],
                      neighbor_list_.begin() + neighbor_offsets_[v + 1]);
    }

    // Connectivity.
    {
        std::vector<char> seen(nv, 0);
        std::queue<int> q;
        q.push(0);
        seen[0] = 1;
        int count = 1;
        while (!q.empty()) {
            const int v = q.front();
            q.pop();
            for (int w : neighbors(v)) {
                if (!seen[w]) {
                    seen[w] = 1;
                    ++count;
                    q.push(w);
                }
            }
        }
        if (count != nv)
            throw ValidationError("mesh is not connected: " + std::to_string(nv - count) +
                                  " vertices unreachable from vertex 0");
    }

    // Lengths.
    edge_lengths_.assign(edges_.size(), 0.0);
    if (given_lengths == nullptr) {
        for (std::size_t e = 0; e < edges_.size(); ++e)
            edge_lengths_[e] = (positions_[edges_[e].v0] - positions_[edges_[e].v1]).norm();
    } else {
        std::vector<char> set(edges_.size(), 0);
        for (int f = 0; f < nf; ++f) {
            for (int j = 0; j < 3; ++j) {
                const double len = (*given_lengths)[f][j];
                const int e = face_edges_[f][j];
                if (!(std::isfinite(len) && len > 0.0))
                    throw ValidationError("face " + std::to_string(f) +
                                          " has a non-positive edge length");
                if (!set[e]) {
                    edge_lengths_[e] = len;
                    set[e] = 1;
                } else if (std::abs(edge_lengths_[e] - len) > 1e-9 * std::max(len, edge_lengths_[e])) {
                    throw ValidationError("edge (" + std::to_string(edges_[e].v0) + ", " +
                                          std::to_string(edges_[e].v1) +
                                          ") has inconsistent lengths in its two faces");
                }
            }
        }
    }

    face_areas_.assign(nf, 0.0);
    area_shares_.assign(nv, 0.0);
    total_area_ = 0.0;
    for (int f = 0; f < nf; ++f) {
        const auto l = face_lengths(f);
        const double area = triangle_area(l[0], l[1], l[2]);
        const double scale = std::max({l[0], l[1], l[2]});
        if (!(area > 1e-14 * scale * scale))
            throw ValidationError("degenerate face " + std::to_string(f) + " " +
                                  face_str(faces_[f]) + ": zero area");
        face_areas_[f] = area;
        total_area_ += area;
        for (int v : faces_[f]) area_shares_[v] += area / 3.0;
    }

    const int chi = euler_characteristic();
    if (chi % 2 != 0 || chi > 2)
        throw ValidationError("Euler characteristic " + std::to_string(chi) +
                              " is not that of a closed orientable surface");
}

std::array<double, 3> TriangleMesh::face_lengths(int f) const {
    const auto& e = face_edges_[f];
    return {edge_lengths_[e[0]], edge_lengths_[e[1]], edge_lengths_[e[2]]};
}

std::vector<std::array<double, 3>> TriangleMesh::all_face_lengths() const {
    std::vector<std::array<double, 3>> out(faces_.size());
    for (int f = 0; f < face_count(); ++f) out[f] = face_lengths(f);
    return out;
}

std::span<const int> TriangleMesh::neighbors(int v) const {
    return {neighbor_list_.data() + neighbor_offsets_[v],
            static_cast<std::size_t>(neighbor_offsets_[v + 1] - neighbor_offsets_[v])};
}

std::span<const int> TriangleMesh::vertex_faces(int v) const {
    return {vface_list_.data() + vface_offsets_[v],
            static_cast<std::size_t>(vface_offsets_[v + 1] - vface_offsets_[v])};
}

int TriangleMesh::find_edge(int u, int v) const {
    for (int f : vertex_faces(u)) {
        for (int j = 0; j < 3; ++j) {
            const Edge& e = edges_[face_edges_[f][j]];
            if ((e.v0 == u && e.v1 == v) || (e.v0 == v && e.v1 == u)) return face_edges_[f][j];
        }
    }
    return -1;
}

}  // namespace confspec
