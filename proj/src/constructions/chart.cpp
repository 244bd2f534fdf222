#include "confspec/constructions.hpp"
#include "confspec/errors.hpp"

#include <cmath>
#include <queue>
#include <string>

namespace confspec::constructions {
namespace {

// Apex of a triangle on the left of p -> q, given |p apex| = lp and |q apex| = lq.
Vec2 place_left(const Vec2& p, const Vec2& q, double lp, double lq) {
    const Vec2 d = q - p;
    const double base = d.norm();
    const double x = (base * base + lp * lp - lq * lq) / (2.0 * base);
    const double y = std::sqrt(std::max(lp * lp - x * x, 0.0));
    const Vec2 ex = d / base;
    const Vec2 ey(-ex.y(), ex.x());
    return p + x * ex + y * ey;
}

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
    return 0.5 * ((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
}

}  // namespace

LocalChart build_local_chart(const TriangleMesh& mesh, int center, double radius) {
    if (center < 0 || center >= mesh.vertex_count())
        throw ValidationError("chart center " + std::to_string(center) + " out of range");
    const auto dist = geodesic_distances(mesh, center);
    const auto in_ball = [&](int v) { return dist[v] <= radius; };
    const auto face_in = [&](int f) {
        const Face& t = mesh.faces()[f];
        return in_ball(t[0]) && in_ball(t[1]) && in_ball(t[2]);
    };
    const auto lengths = mesh.edge_lengths();

    const int nv = mesh.vertex_count();
    std::vector<Vec2> pos(nv, Vec2::Zero());
    std::vector<char> placed(nv, 0);
    std::vector<char> face_seen(mesh.face_count(), 0);

    int start = -1;
    for (int f : mesh.vertex_faces(center))
        if (face_in(f)) {
            start = f;
            break;
        }
    if (start < 0) throw GuardError("chart radius " + std::to_string(radius) + " contains no face");

    {
        const Face& t = mesh.faces()[start];
        const int j = t[0] == center ? 0 : (t[1] == center ? 1 : 2);
        const int b = t[(j + 1) % 3];
        const int c = t[(j + 2) % 3];
        const auto l = mesh.face_lengths(start);
        // l[j] = |center b|, l[(j+1)%3] = |b c|, l[(j+2)%3] = |c center|
        pos[center] = Vec2::Zero();
        pos[b] = Vec2(l[j], 0.0);
        pos[c] = place_left(pos[center], pos[b], l[(j + 2) % 3], l[(j + 1) % 3]);
        placed[center] = placed[b] = placed[c] = 1;
    }

    std::queue<int> queue;
    queue.push(start);
    face_seen[start] = 1;
    std::vector<int> patch_faces;
    while (!queue.empty()) {
        const int f = queue.front();
        queue.pop();
        patch_faces.push_back(f);
        for (int j = 0; j < 3; ++j) {
            const Edge& e = mesh.edges()[mesh.face_edges(f)[j]];
            const int g = e.face0 == f ? e.face1 : e.face0;
            if (face_seen[g] || !face_in(g)) continue;
            face_seen[g] = 1;
            const Face& t = mesh.faces()[g];
            for (int i = 0; i < 3; ++i) {
                const int w = t[(i + 2) % 3];
                if (placed[w]) continue;
                const int p = t[i];
                const int q = t[(i + 1) % 3];
                if (!placed[p] || !placed[q]) continue;
                const auto l = mesh.face_lengths(g);
                pos[w] = place_left(pos[p], pos[q], l[(i + 2) % 3], l[(i + 1) % 3]);
                placed[w] = 1;
            }
            queue.push(g);
        }
    }

    LocalChart chart;
    chart.center = center;
    for (int v = 0; v < nv; ++v) {
        if (!placed[v]) continue;
        chart.index.emplace(v, static_cast<int>(chart.vertices.size()));
        chart.vertices.push_back(v);
        chart.coords.push_back(pos[v]);
    }

    // Edges among placed vertices.
    std::vector<std::vector<std::pair<int, double>>> adj(chart.vertices.size());
    for (int e = 0; e < mesh.edge_count(); ++e) {
        const Edge& ed = mesh.edges()[e];
        auto a = chart.index.find(ed.v0);
        auto b = chart.index.find(ed.v1);
        if (a == chart.index.end() || b == chart.index.end()) continue;
        adj[a->second].emplace_back(b->second, lengths[e]);
        adj[b->second].emplace_back(a->second, lengths[e]);
    }

    // Gauss-Seidel stress majorization; each vertex update minimizes its own
    // quadratic majorizer, so stress never increases.
    auto& xy = chart.coords;
    const int c0 = chart.index.at(center);
    double scale = 0.0;
    for (const auto& nbrs : adj)
        for (const auto& [j, l] : nbrs) scale = std::max(scale, l);
    for (int sweep = 0; sweep < 500; ++sweep) {
        double moved = 0.0;
        for (std::size_t i = 0; i < xy.size(); ++i) {
            if (static_cast<int>(i) == c0 || adj[i].empty()) continue;
            Vec2 acc = Vec2::Zero();
            for (const auto& [j, l] : adj[i]) {
                const Vec2 d = xy[i] - xy[j];
                const double n = d.norm();
                acc += xy[j];
                if (n > 0.0) acc += (l / n) * d;
            }
            const Vec2 next = acc / static_cast<double>(adj[i].size());
            moved = std::max(moved, (next - xy[i]).norm());
            xy[i] = next;
        }
        if (moved < 1e-13 * scale) break;
    }

    double area = 0.0;
    for (int f : patch_faces) {
        const Face& t = mesh.faces()[f];
        area += signed_area(chart.at(t[0]), chart.at(t[1]), chart.at(t[2]));
    }
    if (area < 0.0)
        for (Vec2& p : xy) p.y() = -p.y();

    double ss = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < xy.size(); ++i)
        for (const auto& [j, l] : adj[i]) {
            const double r = ((xy[i] - xy[j]).norm() - l) / l;
            ss += r * r;
            ++count;
        }
    chart.stress = count ? std::sqrt(ss / count) : 0.0;
    return chart;
}

}  // namespace confspec::constructions
