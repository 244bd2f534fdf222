#include "confspec/constructions.hpp"
#include "confspec/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <string>
#include <unordered_map>
#include <unordered_set>

namespace confspec::constructions {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double a) {
    a = std::fmod(a, kTwoPi);
    return a < 0.0 ? a + kTwoPi : a;
}

double angle_of(const Vec2& p) { return std::atan2(p.y(), p.x()); }

double segment_distance_to_origin(const Vec2& a, const Vec2& b) {
    const Vec2 d = b - a;
    const double len2 = d.squaredNorm();
    const double t = len2 > 0.0 ? std::clamp(-a.dot(d) / len2, 0.0, 1.0) : 0.0;
    return (a + t * d).norm();
}

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
    return 0.5 * ((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
}

// A disk cut out around one vertex and the annulus that refills it up to a
// ring of ring_n vertices at radius epsilon. Vertex references in the fill are
// encoded: v >= 0 is a mesh vertex, v < 0 is new vertex -(v + 1).
struct Hole {
    int center = -1;
    double epsilon = 0.0;
    int ring_n = 0;
    std::vector<char> removed_vertex;
    std::vector<char> removed_face;
    std::vector<int> boundary;  // counter-clockwise in the chart
    std::vector<Vec2> new_coords;  // ring vertices, ring 0 first
    std::vector<Vec3> new_positions;
    std::vector<Face> faces;
    std::vector<std::array<double, 3>> lengths;
    double cap_density = 1.0;
    std::unordered_set<int> touched;  // removed and boundary vertices
    double chart_stress = 0.0;
    int rings = 0;
};

int encode_new(int i) { return -(i + 1); }
int decode_new(int v) { return -v - 1; }

// Triangulates the band between two closed counter-clockwise loops around the
// origin, always taking the shorter of the two candidate diagonals unless that
// would fold a triangle over.
void zip_loops(const std::vector<int>& inner, const std::vector<Vec2>& inner_xy, const std::vector<int>& outer,
               const std::vector<Vec2>& outer_xy, std::vector<Face>& faces) {
    const int a = static_cast<int>(inner.size());
    const int b = static_cast<int>(outer.size());
    const double base = angle_of(inner_xy[0]);

    // Start at the outer vertex angularly closest to inner[0].
    int o0 = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < b; ++k) {
        const double off = wrap_angle(angle_of(outer_xy[k]) - base + std::numbers::pi) - std::numbers::pi;
        if (std::abs(off) < best) {
            best = std::abs(off);
            o0 = k;
        }
    }
    auto in_xy = [&](int i) -> const Vec2& { return inner_xy[i % a]; };
    auto out_xy = [&](int k) -> const Vec2& { return outer_xy[(o0 + k) % b]; };

    int i = 0, k = 0;
    while (i < a || k < b) {
        bool advance_inner;
        if (k == b) {
            advance_inner = true;
        } else if (i == a) {
            advance_inner = false;
        } else {
            const bool inner_ok = signed_area(in_xy(i + 1), in_xy(i), out_xy(k)) > 0.0;
            const bool outer_ok = signed_area(out_xy(k), out_xy(k + 1), in_xy(i)) > 0.0;
            const double d_inner = (in_xy(i + 1) - out_xy(k)).norm();
            const double d_outer = (in_xy(i) - out_xy(k + 1)).norm();
            advance_inner = inner_ok && (!outer_ok || d_inner <= d_outer);
        }
        const int in_cur = inner[i % a];
        const int out_cur = outer[(o0 + k) % b];
        if (advance_inner) {
            faces.push_back({inner[(i + 1) % a], in_cur, out_cur});
            ++i;
        } else {
            faces.push_back({out_cur, outer[(o0 + k + 1) % b], in_cur});
            ++k;
        }
    }
}

Hole cut_hole(const TriangleMesh& mesh, const ConformalDensity& density, int center, double epsilon,
              int ring_n) {
    if (center < 0 || center >= mesh.vertex_count())
        throw ValidationError("surgery center " + std::to_string(center) + " out of range");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ValidationError("neck radius must be positive");
    if (ring_n < 6) throw ValidationError("ring vertex count must be at least 6");
    if (density.size() != mesh.vertex_count()) throw ValidationError("density does not match the mesh");

    if (!ball_is_disk(mesh, center, 5.0 * epsilon))
        throw GuardError("neck radius " + std::to_string(epsilon) + " too large at vertex " +
                         std::to_string(center) + ": the geodesic ball of radius 5*eps is not a disk");

    double h = 0.0;
    for (int f : mesh.vertex_faces(center))
        for (double l : mesh.face_lengths(f)) h = std::max(h, l);
    const double chart_radius = 3.0 * epsilon + 3.0 * h;
    if (!ball_is_disk(mesh, center, chart_radius))
        throw GuardError("mesh too coarse around vertex " + std::to_string(center) +
                         " for a neck of radius " + std::to_string(epsilon));
    const LocalChart chart = build_local_chart(mesh, center, chart_radius);

    Hole hole;
    hole.center = center;
    hole.epsilon = epsilon;
    hole.ring_n = ring_n;
    hole.chart_stress = chart.stress;

    const int nv = mesh.vertex_count();
    const int nf = mesh.face_count();
    double tau = 1.5 * epsilon;
    double dmin = 0.0;
    bool ok = false;
    for (int attempt = 0; attempt < 64 && !ok; ++attempt) {
        hole.removed_vertex.assign(nv, 0);
        hole.removed_face.assign(nf, 0);
        hole.removed_vertex[center] = 1;
        for (std::size_t i = 0; i < chart.vertices.size(); ++i)
            if (chart.coords[i].norm() < tau) hole.removed_vertex[chart.vertices[i]] = 1;

        // Faces touching removed vertices go; vertices left without faces go too.
        bool changed = true;
        while (changed) {
            changed = false;
            for (int v = 0; v < nv; ++v) {
                if (!hole.removed_vertex[v]) continue;
                for (int f : mesh.vertex_faces(v)) hole.removed_face[f] = 1;
            }
            for (int v = 0; v < nv; ++v) {
                if (hole.removed_vertex[v]) continue;
                bool any = false;
                for (int f : mesh.vertex_faces(v)) any = any || !hole.removed_face[f];
                if (!any) {
                    hole.removed_vertex[v] = 1;
                    changed = true;
                }
            }
        }

        // Boundary half-edges of the remaining faces.
        std::unordered_map<int, int> next;
        bool simple = true;
        for (int f = 0; f < nf && simple; ++f) {
            if (hole.removed_face[f]) continue;
            for (int j = 0; j < 3; ++j) {
                const Edge& e = mesh.edges()[mesh.face_edges(f)[j]];
                const int g = e.face0 == f ? e.face1 : e.face0;
                if (!hole.removed_face[g]) continue;
                const int u = mesh.faces()[f][j];
                const int v = mesh.faces()[f][(j + 1) % 3];
                if (!next.emplace(u, v).second) simple = false;
            }
        }
        std::vector<int> loop;
        if (simple && !next.empty()) {
            const int first = next.begin()->first;
            int v = first;
            do {
                loop.push_back(v);
                auto it = next.find(v);
                if (it == next.end() || loop.size() > next.size()) {
                    simple = false;
                    break;
                }
                v = it->second;
            } while (v != first);
            simple = simple && loop.size() == next.size();
        } else {
            simple = false;
        }

        bool in_chart = simple;
        for (int v : loop) in_chart = in_chart && chart.contains(v);
        for (int v = 0; v < nv && in_chart; ++v)
            if (hole.removed_vertex[v]) in_chart = chart.contains(v);
        if (!in_chart && simple)
            throw GuardError("neck radius " + std::to_string(epsilon) + " needs a hole larger than the local chart at vertex " +
                             std::to_string(center));

        bool star = false;
        if (simple) {
            std::vector<Vec2> xy;
            for (int v : loop) xy.push_back(chart.at(v));
            double area = 0.0;
            for (std::size_t i = 0; i < xy.size(); ++i) area += signed_area(Vec2::Zero(), xy[i], xy[(i + 1) % xy.size()]);
            if (area < 0.0) {
                std::reverse(loop.begin(), loop.end());
                std::reverse(xy.begin(), xy.end());
            }
            double turn = 0.0;
            star = true;
            dmin = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < xy.size(); ++i) {
                const Vec2& p = xy[i];
                const Vec2& q = xy[(i + 1) % xy.size()];
                const double step = wrap_angle(angle_of(q) - angle_of(p));
                if (!(step > 0.0 && step < std::numbers::pi)) star = false;
                turn += step;
                dmin = std::min(dmin, segment_distance_to_origin(p, q));
            }
            star = star && std::abs(turn - kTwoPi) < 1e-6;
        }

        if (simple && star && dmin >= 1.3 * epsilon) {
            // Removed region must be a disk: V - E + F = 1.
            std::unordered_set<int> rv;
            std::unordered_set<int> re;
            int rf = 0;
            for (int f = 0; f < nf; ++f) {
                if (!hole.removed_face[f]) continue;
                ++rf;
                for (int j = 0; j < 3; ++j) {
                    rv.insert(mesh.faces()[f][j]);
                    re.insert(mesh.face_edges(f)[j]);
                }
            }
            if (static_cast<int>(rv.size()) - static_cast<int>(re.size()) + rf == 1) {
                hole.boundary = loop;
                ok = true;
                break;
            }
        }
        // Grow the removed set past the nearest surviving vertex and retry.
        double nearest = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < chart.vertices.size(); ++i)
            if (!hole.removed_vertex[chart.vertices[i]]) nearest = std::min(nearest, chart.coords[i].norm());
        if (!std::isfinite(nearest)) break;
        tau = std::max(tau * 1.05, nearest * (1.0 + 1e-9) + 1e-12);
    }
    if (!ok)
        throw GuardError("could not cut a disk of radius " + std::to_string(epsilon) + " around vertex " +
                         std::to_string(center));

    // Flat cap requirement: constant density on everything the fill touches.
    hole.cap_density = density[center];
    for (int v = 0; v < nv; ++v) {
        if (!hole.removed_vertex[v]) continue;
        hole.touched.insert(v);
    }
    for (int v : hole.boundary) hole.touched.insert(v);
    for (int v : hole.touched) {
        if (std::abs(density[v] - hole.cap_density) > 1e-9 * hole.cap_density)
            throw PreparationError("density is not constant on the cap around vertex " + std::to_string(center) +
                                   " (vertex " + std::to_string(v) + "); flatten it first");
    }

    // Concentric rings from epsilon outwards, staggered by half a step.
    std::vector<std::vector<int>> ring_ids;
    std::vector<std::vector<Vec2>> ring_xy;
    double r = epsilon;
    for (int i = 0;; ++i) {
        std::vector<int> ids;
        std::vector<Vec2> xy;
        for (int j = 0; j < ring_n; ++j) {
            const double t = kTwoPi * (j + 0.5 * (i % 2)) / ring_n;
            const Vec2 p(r * std::cos(t), r * std::sin(t));
            ids.push_back(encode_new(static_cast<int>(hole.new_coords.size())));
            hole.new_coords.push_back(p);
            xy.push_back(p);
        }
        ring_ids.push_back(std::move(ids));
        ring_xy.push_back(std::move(xy));
        if (r * kRingGrowth * std::sqrt(kRingGrowth) > dmin) break;
        r *= kRingGrowth;
    }
    hole.rings = static_cast<int>(ring_ids.size());

    for (std::size_t i = 0; i + 1 < ring_ids.size(); ++i)
        zip_loops(ring_ids[i], ring_xy[i], ring_ids[i + 1], ring_xy[i + 1], hole.faces);
    std::vector<Vec2> bxy;
    for (int v : hole.boundary) bxy.push_back(chart.at(v));
    zip_loops(ring_ids.back(), ring_xy.back(), hole.boundary, bxy, hole.faces);

    auto coord = [&](int v) -> Vec2 { return v >= 0 ? chart.at(v) : hole.new_coords[decode_new(v)]; };
    for (const Face& t : hole.faces) {
        std::array<double, 3> l{};
        for (int j = 0; j < 3; ++j) {
            const int u = t[j];
            const int w = t[(j + 1) % 3];
            if (u >= 0 && w >= 0) {
                const int e = mesh.find_edge(u, w);
                if (e < 0) throw GuardError("hole fill produced a chord between boundary vertices");
                l[j] = mesh.edge_lengths()[e];
            } else {
                l[j] = (coord(u) - coord(w)).norm();
            }
        }
        if (!(signed_area(coord(t[0]), coord(t[1]), coord(t[2])) > 0.0) ||
            !(triangle_area(l[0], l[1], l[2]) > 1e-12 * std::max({l[0], l[1], l[2]}) * std::max({l[0], l[1], l[2]})))
        {
            throw GuardError("hole fill around vertex " + std::to_string(center) +
                             " produced a degenerate triangle; try a different neck radius");
        }
        hole.lengths.push_back(l);
    }

    // Export positions: least-squares affine map from the chart to R^3.
    const int m = static_cast<int>(chart.vertices.size());
    Eigen::MatrixXd a(m, 3);
    Eigen::MatrixXd b(m, 3);
    for (int i = 0; i < m; ++i) {
        a(i, 0) = chart.coords[i].x();
        a(i, 1) = chart.coords[i].y();
        a(i, 2) = 1.0;
        b.row(i) = mesh.positions()[chart.vertices[i]].transpose();
    }
    const Eigen::MatrixXd fit = a.colPivHouseholderQr().solve(b);
    for (const Vec2& p : hole.new_coords) {
        const Eigen::RowVector3d row(p.x(), p.y(), 1.0);
        hole.new_positions.push_back((row * fit).transpose());
    }
    return hole;
}

struct Assembly {
    std::vector<Vec3> positions;
    std::vector<Face> faces;
    std::vector<std::array<double, 3>> lengths;
    std::vector<double> density;
    std::vector<int> labels;

    int add_vertex(const Vec3& p, double rho, int label) {
        positions.push_back(p);
        density.push_back(rho);
        labels.push_back(label);
        return static_cast<int>(positions.size()) - 1;
    }
};

// Copies the surviving part of a mesh; returns the old -> new vertex map (-1 if removed).
std::vector<int> add_surviving(Assembly& out, const TriangleMesh& mesh, const ConformalDensity& rho,
                               const std::vector<const Hole*>& holes, int label, const Vec3& shift) {
    std::vector<int> map(mesh.vertex_count(), -1);
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        bool removed = false;
        for (const Hole* h : holes) removed = removed || h->removed_vertex[v];
        if (!removed) map[v] = out.add_vertex(mesh.positions()[v] + shift, rho[v], label);
    }
    for (int f = 0; f < mesh.face_count(); ++f) {
        bool removed = false;
        for (const Hole* h : holes) removed = removed || h->removed_face[f];
        if (removed) continue;
        const Face& t = mesh.faces()[f];
        out.faces.push_back({map[t[0]], map[t[1]], map[t[2]]});
        out.lengths.push_back(mesh.face_lengths(f));
    }
    return map;
}

// Adds the fill of a hole. ring0 (if non-empty) supplies ids for ring 0 instead
// of creating them. Returns the ids of all new vertices of the hole.
std::vector<int> add_fill(Assembly& out, const Hole& hole, const std::vector<int>& map, const std::vector<int>& ring0,
                          int label, const Vec3& shift) {
    std::vector<int> ids(hole.new_coords.size(), -1);
    for (std::size_t i = 0; i < hole.new_coords.size(); ++i) {
        if (!ring0.empty() && static_cast<int>(i) < hole.ring_n)
            ids[i] = ring0[i];
        else
            ids[i] = out.add_vertex(hole.new_positions[i] + shift, hole.cap_density, label);
    }
    for (std::size_t f = 0; f < hole.faces.size(); ++f) {
        Face t{};
        for (int j = 0; j < 3; ++j) {
            const int v = hole.faces[f][j];
            t[j] = v >= 0 ? map[v] : ids[decode_new(v)];
        }
        out.faces.push_back(t);
        out.lengths.push_back(hole.lengths[f]);
    }
    return ids;
}

Json hole_json(const Hole& h) {
    int removed = 0;
    for (char c : h.removed_vertex) removed += c;
    return {{"center", h.center},           {"removed_vertices", removed},
            {"boundary_vertices", h.boundary.size()}, {"rings", h.rings},
            {"cap_density", h.cap_density}, {"chart_stress", h.chart_stress}};
}

SurgeryResult finish(Assembly&& a, std::vector<int> seam, int expected_genus, Json spec,
                     std::vector<std::string> warnings) {
    TriangleMesh mesh(std::move(a.positions), std::move(a.faces), a.lengths);
    if (mesh.genus() != expected_genus)
        throw Error("surgery produced genus " + std::to_string(mesh.genus()) + ", expected " +
                    std::to_string(expected_genus));
    spec["result_genus"] = mesh.genus();
    return SurgeryResult{std::move(mesh),         ConformalDensity(std::move(a.density)),
                         std::move(a.labels),     std::move(seam),
                         expected_genus,          std::move(spec),
                         std::move(warnings)};
}

void stress_warning(const Hole& h, std::vector<std::string>& warnings) {
    if (h.chart_stress > 1e-2)
        warnings.push_back("local chart at vertex " + std::to_string(h.center) + " has relative stress " +
                           std::to_string(h.chart_stress));
}

}  // namespace

SurgeryResult glue_surfaces(const GlueSpec& spec) {
    const Hole host = cut_hole(spec.host, spec.host_density, spec.host_center, spec.epsilon, spec.ring_vertices);
    const Hole guest = cut_hole(spec.guest, spec.guest_density, spec.guest_center, spec.epsilon, spec.ring_vertices);
    if (host.ring_n != guest.ring_n)
        throw PreparationError("neck rings have different vertex counts (" + std::to_string(host.ring_n) + " vs " +
                               std::to_string(guest.ring_n) + ")");
    const int n = host.ring_n;

    // Keep the exported guest clear of the host.
    double host_max = -std::numeric_limits<double>::infinity();
    double guest_min = std::numeric_limits<double>::infinity();
    double span = 0.0;
    for (const Vec3& p : spec.host.positions()) host_max = std::max(host_max, p.x());
    for (const Vec3& p : spec.guest.positions()) {
        guest_min = std::min(guest_min, p.x());
        span = std::max(span, p.norm());
    }
    const Vec3 shift(host_max - guest_min + 0.5 * span, 0.0, 0.0);

    Assembly a;
    const auto hmap = add_surviving(a, spec.host, spec.host_density, {&host}, 0, Vec3::Zero());
    const auto hids = add_fill(a, host, hmap, {}, 0, Vec3::Zero());
    const auto gmap = add_surviving(a, spec.guest, spec.guest_density, {&guest}, 1, shift);
    // z -> eps^2 / z: guest ring vertex m meets host ring vertex (n - m) mod n.
    std::vector<int> ring0(n);
    for (int m = 0; m < n; ++m) ring0[m] = hids[(n - m) % n];
    add_fill(a, guest, gmap, ring0, 1, shift);

    const double seam_rho = std::sqrt(host.cap_density * guest.cap_density);
    std::vector<int> seam(hids.begin(), hids.begin() + n);
    for (int v : seam) a.density[v] = seam_rho;

    std::vector<std::string> warnings;
    stress_warning(host, warnings);
    stress_warning(guest, warnings);
    if (std::abs(host.cap_density - guest.cap_density) > 1e-9 * host.cap_density)
        warnings.push_back("cap densities differ across the neck; seam uses their geometric mean");

    Json js = {{"operation", "glue"},
               {"epsilon", spec.epsilon},
               {"ring_vertices", n},
               {"host", hole_json(host)},
               {"guest", hole_json(guest)},
               {"host_genus", spec.host.genus()},
               {"guest_genus", spec.guest.genus()},
               {"host_area", spec.host.total_area()},
               {"guest_area", spec.guest.total_area()}};
    return finish(std::move(a), std::move(seam), spec.host.genus() + spec.guest.genus(), std::move(js),
                  std::move(warnings));
}

SurgeryResult attach_handle(const TriangleMesh& mesh, const ConformalDensity& density, int a, int b,
                            double epsilon, double length, int ring_vertices) {
    if (!(length > 0.0) || !std::isfinite(length)) throw ValidationError("handle length must be positive");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ValidationError("handle radius must be positive");
    const double aspect = epsilon / length;
    if (aspect < 1e-3 || aspect > 10.0)
        throw GuardError("handle aspect eps/l = " + std::to_string(aspect) + " outside [1e-3, 10]");
    if (a == b) throw GuardError("handle ends must be distinct vertices");

    const Hole ha = cut_hole(mesh, density, a, epsilon, ring_vertices);
    const Hole hb = cut_hole(mesh, density, b, epsilon, ring_vertices);
    for (int v : ha.touched)
        if (hb.touched.count(v))
            throw GuardError("handle caps at vertices " + std::to_string(a) + " and " + std::to_string(b) +
                             " overlap (shared vertex " + std::to_string(v) + ")");

    const int n = ring_vertices;
    const int segments = std::max(4, static_cast<int>(std::ceil(length / epsilon - 1e-12)));
    const double hc = 2.0 * epsilon * std::sin(std::numbers::pi / n);
    const double hl = length / segments;
    const double diag = std::hypot(hc, hl);

    Assembly out;
    const auto map = add_surviving(out, mesh, density, {&ha, &hb}, 0, Vec3::Zero());
    const auto ids_a = add_fill(out, ha, map, {}, 0, Vec3::Zero());
    const auto ids_b = add_fill(out, hb, map, {}, 0, Vec3::Zero());

    std::vector<std::vector<int>> rings(segments + 1, std::vector<int>(n));
    for (int j = 0; j < n; ++j) {
        rings[0][j] = ids_a[j];
        rings[segments][j] = ids_b[(n - j) % n];
    }
    const double la = std::log(ha.cap_density);
    const double lb = std::log(hb.cap_density);
    for (int i = 1; i < segments; ++i) {
        const double t = static_cast<double>(i) / segments;
        const double rho = std::exp((1.0 - t) * la + t * lb);
        for (int j = 0; j < n; ++j) {
            const Vec3 p = (1.0 - t) * out.positions[rings[0][j]] + t * out.positions[rings[segments][j]];
            rings[i][j] = out.add_vertex(p, rho, 1);
        }
    }
    for (int i = 0; i < segments; ++i) {
        for (int j = 0; j < n; ++j) {
            const int jn = (j + 1) % n;
            out.faces.push_back({rings[i][j], rings[i][jn], rings[i + 1][jn]});
            out.lengths.push_back({hc, hl, diag});
            out.faces.push_back({rings[i][j], rings[i + 1][jn], rings[i + 1][j]});
            out.lengths.push_back({diag, hc, hl});
        }
    }

    std::vector<int> seam(ids_a.begin(), ids_a.begin() + n);
    seam.insert(seam.end(), ids_b.begin(), ids_b.begin() + n);
    std::vector<std::string> warnings;
    stress_warning(ha, warnings);
    stress_warning(hb, warnings);
    Json js = {{"operation", "handle"},
               {"epsilon", epsilon},
               {"length", length},
               {"ring_vertices", n},
               {"segments", segments},
               {"end_a", hole_json(ha)},
               {"end_b", hole_json(hb)},
               {"input_genus", mesh.genus()},
               {"input_area", mesh.total_area()}};
    return finish(std::move(out), std::move(seam), mesh.genus() + 1, std::move(js), std::move(warnings));
}

ConformalDensity collapse_component(const SurgeryResult& surgery, int component, double eps) {
    const int nv = surgery.mesh.vertex_count();
    if (static_cast<int>(surgery.component_labels.size()) != nv)
        throw ValidationError("collapse needs a mesh with component labels");
    if (!(eps > 0.0) || !std::isfinite(eps)) throw ValidationError("collapse scale must be positive");
    // The blend lives on the collapsing side: rings at hop 1 and 2 from the
    // rest of the surface get eps^(2/3) and eps^(4/3), deeper vertices eps^2.
    std::vector<int> seeds;
    bool labelled = false;
    for (int v = 0; v < nv; ++v) {
        if (surgery.component_labels[v] == component) labelled = true;
        else seeds.push_back(v);
    }
    if (!labelled) throw ValidationError("no vertex carries component label " + std::to_string(component));
    if (seeds.empty()) throw ValidationError("component " + std::to_string(component) + " is the whole mesh");
    const auto hops = graph_hops(surgery.mesh, seeds);
    std::vector<double> rho(surgery.density.values().begin(), surgery.density.values().end());
    for (int v = 0; v < nv; ++v) {
        if (hops[v] == 0) continue;
        const double power = hops[v] == 1 ? 2.0 / 3.0 : hops[v] == 2 ? 4.0 / 3.0 : 2.0;
        rho[v] *= std::pow(eps, power);
    }
    return ConformalDensity(std::move(rho));
}

FlattenResult flatten_density_near(const TriangleMesh& mesh, const ConformalDensity& density, int vertex,
                                   double radius, double width) {
    if (density.size() != mesh.vertex_count()) throw ValidationError("density does not match the mesh");
    if (vertex < 0 || vertex >= mesh.vertex_count()) throw ValidationError("vertex out of range");
    if (!(radius >= 0.0) || !(width >= 0.0)) throw ValidationError("radius and width must be non-negative");
    if (!ball_is_disk(mesh, vertex, radius + width))
        throw GuardError("flattening radius " + std::to_string(radius + width) + " is too large at vertex " +
                         std::to_string(vertex) + ": the ball is not a disk");
    const auto dist = geodesic_distances(mesh, vertex);
    const double inner = std::log(density[vertex]);
    std::vector<double> out(density.values().begin(), density.values().end());
    int inner_count = 0;
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        const double d = dist[v];
        if (d <= radius) {
            out[v] = density[vertex];
            ++inner_count;
        } else if (d < radius + width) {
            const double t = (d - radius) / width;
            const double w = t * t * (3.0 - 2.0 * t);  // smoothstep
            out[v] = std::exp((1.0 - w) * inner + w * std::log(density[v]));
        }
    }
    double worst = 0.0;
    for (int v = 0; v < mesh.vertex_count(); ++v) worst = std::max(worst, std::abs(std::log(out[v] / density[v])));
    double slope = 0.0;
    for (int e = 0; e < mesh.edge_count(); ++e) {
        const Edge& ed = mesh.edges()[e];
        if (out[ed.v0] == density[ed.v0] && out[ed.v1] == density[ed.v1]) continue;
        slope = std::max(slope, std::abs(std::log(out[ed.v0] / out[ed.v1])) / mesh.edge_lengths()[e]);
    }
    // rho is a squared length factor, so lengths change by at most exp(worst / 2).
    return FlattenResult{ConformalDensity(std::move(out)), std::expm1(0.5 * worst), slope, inner_count};
}

void save_surgery(const SurgeryResult& result, const std::filesystem::path& off_path) {
    save_mesh(result.mesh, off_path);
    Json j;
    j["component_labels"] = result.component_labels;
    j["density"] = std::vector<double>(result.density.values().begin(), result.density.values().end());
    j["genus"] = result.genus;
    j["spec"] = result.spec;
    j["seam_vertices"] = result.seam_vertices;
    j["face_lengths"] = result.mesh.all_face_lengths();
    if (!result.warnings.empty()) j["warnings"] = result.warnings;
    std::ofstream out(off_path.string() + ".json");
    if (!out) throw ValidationError("cannot write " + off_path.string() + ".json");
    out << std::setprecision(std::numeric_limits<double>::max_digits10) << j.dump(1) << '\n';
}

SurgeryResult load_surgery(const std::filesystem::path& off_path) {
    auto data = load_mesh_data(off_path);
    std::ifstream in(off_path.string() + ".json");
    if (!in) throw ValidationError("missing sidecar " + off_path.string() + ".json");
    Json j;
    try {
        in >> j;
    } catch (const Json::exception& e) {
        throw ValidationError("sidecar " + off_path.string() + ".json: " + e.what());
    }
    try {
        const auto lengths = j.at("face_lengths").get<std::vector<std::array<double, 3>>>();
        TriangleMesh mesh(std::move(data.positions), std::move(data.faces), lengths);
        ConformalDensity rho(j.at("density").get<std::vector<double>>());
        if (rho.size() != mesh.vertex_count()) throw ValidationError("sidecar density size mismatch");
        auto labels = j.at("component_labels").get<std::vector<int>>();
        if (static_cast<int>(labels.size()) != mesh.vertex_count())
            throw ValidationError("sidecar label count mismatch");
        const int genus = j.at("genus").get<int>();
        if (genus != mesh.genus()) throw ValidationError("sidecar genus disagrees with the mesh");
        std::vector<std::string> warnings;
        if (j.contains("warnings")) warnings = j["warnings"].get<std::vector<std::string>>();
        return SurgeryResult{std::move(mesh),
                             std::move(rho),
                             std::move(labels),
                             j.value("seam_vertices", std::vector<int>{}),
                             genus,
                             j.value("spec", Json::object()),
                             std::move(warnings)};
    } catch (const Json::exception& e) {
        throw ValidationError("sidecar " + off_path.string() + ".json: " + e.what());
    }
}

}  // namespace confspec::constructions
