#include "confspec/errors.hpp"
#include "confspec/mesh.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <unordered_map>

namespace confspec {

double Lattice::area() const { return std::abs(determinant()); }

double Lattice::angle_degrees() const {
    const double c = e1.dot(e2) / (e1.norm() * e2.norm());
    return std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / std::numbers::pi;
}

std::array<Vec2, 2> Lattice::dual() const {
    Eigen::Matrix2d basis;
    basis.col(0) = e1;
    basis.col(1) = e2;
    const Eigen::Matrix2d dual_basis = basis.inverse().transpose();
    return {Vec2(dual_basis.col(0)), Vec2(dual_basis.col(1))};
}

Lattice Lattice::scaled_to_area(double target) const {
    const double s = std::sqrt(target / area());
    return Lattice{e1 * s, e2 * s};
}

Lattice Lattice::square() { return Lattice{{1.0, 0.0}, {0.0, 1.0}}; }

Lattice Lattice::equilateral() { return Lattice{{1.0, 0.0}, {0.5, std::sqrt(3.0) / 2.0}}; }

Lattice Lattice::rectangular(double ratio) { return Lattice{{1.0, 0.0}, {0.0, ratio}}; }

TriangleMesh build_icosphere(int subdivisions) {
    if (subdivisions < 0) throw ValidationError("icosphere subdivisions must be >= 0");
    if (subdivisions > kMaxIcosphereSubdivisions)
        throw ResourceLimitError("icosphere subdivisions " + std::to_string(subdivisions) +
                                 " exceeds cap " + std::to_string(kMaxIcosphereSubdivisions));

    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0},
                           {0, -1, t}, {0, 1, t},  {0, -1, -t}, {0, 1, -t},
                           {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
    for (Vec3& p : v) p.normalize();
    std::vector<Face> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                           {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                           {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                           {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

    for (int s = 0; s < subdivisions; ++s) {
        std::unordered_map<std::uint64_t, int> midpoint;
        auto mid = [&](int a, int b) {
            const std::uint64_t key = (static_cast<std::uint64_t>(std::min(a, b)) << 32) |
                                      static_cast<std::uint32_t>(std::max(a, b));
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            const int id = static_cast<int>(v.size());
            v.push_back((v[a] + v[b]).normalized());
            midpoint.emplace(key, id);
            return id;
        };
        std::vector<Face> next;
        next.reserve(f.size() * 4);
        for (const Face& tri : f) {
            const int ab = mid(tri[0], tri[1]);
            const int bc = mid(tri[1], tri[2]);
            const int ca = mid(tri[2], tri[0]);
            next.push_back({tri[0], ab, ca});
            next.push_back({tri[1], bc, ab});
            next.push_back({tri[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        f = std::move(next);
    }
    return TriangleMesh(std::move(v), std::move(f));
}

TriangleMesh build_flat_torus(const Lattice& lattice, int resolution) {
    if (resolution < kMinTorusResolution)
        throw ValidationError("torus resolution must be >= " + std::to_string(kMinTorusResolution));
    if (resolution > kMaxTorusResolution)
        throw ResourceLimitError("torus resolution " + std::to_string(resolution) +
                                 " exceeds cap " + std::to_string(kMaxTorusResolution));
    const double angle = lattice.angle_degrees();
    if (!(lattice.area() > 0.0) || angle < 1.0 || angle > 179.0)
        throw IllConditionedError("lattice is near-degenerate (angle " + std::to_string(angle) +
                                  " deg)");

    const int n = resolution;
    const bool flip = lattice.determinant() < 0.0;
    const Vec2 a = lattice.e1 / n;
    const Vec2 b = lattice.e2 / n;
    // Split each cell along the shorter diagonal.
    const bool use_anti = (b - a).norm() < (a + b).norm();

    auto id = [n](int i, int j) { return ((i % n + n) % n) * n + ((j % n + n) % n); };

    // Positions are a ring-torus embedding for export only; the metric is flat.
    std::vector<Vec3> positions(static_cast<std::size_t>(n) * n);
    const double big = 2.0, small = 1.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double th = 2.0 * std::numbers::pi * i / n;
            const double ph = 2.0 * std::numbers::pi * j / n;
            positions[id(i, j)] = Vec3((big + small * std::cos(ph)) * std::cos(th),
                                       (big + small * std::cos(ph)) * std::sin(th),
                                       small * std::sin(ph));
        }
    }

    std::vector<Face> faces;
    std::vector<std::array<double, 3>> lengths;
    faces.reserve(2 * n * n);
    lengths.reserve(2 * n * n);
    // Each corner carries its offset in grid units so lengths are exact.
    auto add = [&](std::array<std::array<int, 2>, 3> c) {
        if (flip) std::swap(c[1], c[2]);
        Face f;
        std::array<double, 3> l;
        for (int k = 0; k < 3; ++k) f[k] = id(c[k][0], c[k][1]);
        for (int k = 0; k < 3; ++k) {
            const auto& p = c[k];
            const auto& q = c[(k + 1) % 3];
            l[k] = ((q[0] - p[0]) * a + (q[1] - p[1]) * b).norm();
        }
        faces.push_back(f);
        lengths.push_back(l);
    };
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (use_anti) {
                add({{{i, j}, {i + 1, j}, {i, j + 1}}});
                add({{{i + 1, j}, {i + 1, j + 1}, {i, j + 1}}});
            } else {
                add({{{i, j}, {i + 1, j}, {i + 1, j + 1}}});
                add({{{i, j}, {i + 1, j + 1}, {i, j + 1}}});
            }
        }
    }
    return TriangleMesh(std::move(positions), std::move(faces), lengths);
}

TriangleMesh scaled_mesh(const TriangleMesh& mesh, double factor) {
    if (!(factor > 0.0) || !std::isfinite(factor)) throw ValidationError("scale factor must be positive");
    std::vector<Vec3> pos(mesh.positions().begin(), mesh.positions().end());
    for (Vec3& p : pos) p *= factor;
    std::vector<Face> faces(mesh.faces().begin(), mesh.faces().end());
    if (!mesh.is_intrinsic()) return TriangleMesh(std::move(pos), std::move(faces));
    auto lengths = mesh.all_face_lengths();
    for (auto& l : lengths)
        for (double& x : l) x *= factor;
    return TriangleMesh(std::move(pos), std::move(faces), lengths);
}

}  // namespace confspec
