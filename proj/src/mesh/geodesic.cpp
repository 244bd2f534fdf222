#include "confspec/errors.hpp"
#include "confspec/mesh.hpp"

#include <functional>
#include <limits>
#include <queue>
#include <string>
#include <unordered_map>

namespace confspec {

std::vector<double> geodesic_distances(const TriangleMesh& mesh, int source) {
    if (source < 0 || source >= mesh.vertex_count())
        throw ValidationError("vertex " + std::to_string(source) + " out of range");
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(mesh.vertex_count(), inf);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[source] = 0.0;
    heap.emplace(0.0, source);
    while (!heap.empty()) {
        auto [d, v] = heap.top();
        heap.pop();
        if (d > dist[v]) continue;
        for (int w : mesh.neighbors(v)) {
            const double nd = d + mesh.edge_lengths()[mesh.find_edge(v, w)];
            if (nd < dist[w]) {
                dist[w] = nd;
                heap.emplace(nd, w);
            }
        }
    }
    return dist;
}

std::vector<int> geodesic_ball_vertices(const TriangleMesh& mesh, int center, double radius) {
    if (radius < 0.0) throw ValidationError("ball radius must be non-negative");
    const auto dist = geodesic_distances(mesh, center);
    std::vector<int> out;
    for (int v = 0; v < mesh.vertex_count(); ++v)
        if (dist[v] <= radius) out.push_back(v);
    return out;
}

std::vector<int> graph_hops(const TriangleMesh& mesh, std::span<const int> seeds) {
    std::vector<int> hops(mesh.vertex_count(), -1);
    std::queue<int> q;
    for (int s : seeds) {
        if (hops[s] != 0) {
            hops[s] = 0;
            q.push(s);
        }
    }
    while (!q.empty()) {
        const int v = q.front();
        q.pop();
        for (int w : mesh.neighbors(v)) {
            if (hops[w] < 0) {
                hops[w] = hops[v] + 1;
                q.push(w);
            }
        }
    }
    return hops;
}

bool ball_is_disk(const TriangleMesh& mesh, int center, double radius) {
    const auto dist = geodesic_distances(mesh, center);
    std::vector<int> faces;
    for (int f = 0; f < mesh.face_count(); ++f) {
        const Face& t = mesh.faces()[f];
        if (dist[t[0]] <= radius && dist[t[1]] <= radius && dist[t[2]] <= radius) faces.push_back(f);
    }
    if (faces.empty()) return true;
    if (static_cast<int>(faces.size()) == mesh.face_count()) return false;

    std::vector<char> vin(mesh.vertex_count(), 0), ein(mesh.edge_count(), 0);
    std::vector<int> edge_uses(mesh.edge_count(), 0);
    int nv = 0, ne = 0;
    for (int f : faces) {
        for (int j = 0; j < 3; ++j) {
            const int v = mesh.faces()[f][j];
            if (!vin[v]) {
                vin[v] = 1;
                ++nv;
            }
            const int e = mesh.face_edges(f)[j];
            if (!ein[e]) {
                ein[e] = 1;
                ++ne;
            }
            ++edge_uses[e];
        }
    }
    if (nv - ne + static_cast<int>(faces.size()) != 1) return false;

    // Boundary half-edges must chain into one simple loop.
    std::unordered_map<int, int> next;
    int boundary = 0;
    for (int f : faces) {
        for (int j = 0; j < 3; ++j) {
            if (edge_uses[mesh.face_edges(f)[j]] != 1) continue;
            const int u = mesh.faces()[f][j];
            const int v = mesh.faces()[f][(j + 1) % 3];
            if (!next.emplace(u, v).second) return false;
            ++boundary;
        }
    }
    if (boundary == 0) return false;
    int v = next.begin()->first;
    for (int step = 0; step < boundary; ++step) {
        auto it = next.find(v);
        if (it == next.end()) return false;
        v = it->second;
        if (v == next.begin()->first && step + 1 < boundary) return false;
    }
    return v == next.begin()->first;
}

}  // namespace confspec
