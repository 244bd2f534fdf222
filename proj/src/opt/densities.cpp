#include "confspec/conformal_opt.hpp"
#include "confspec/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace confspec::opt {
namespace {

double mobius_profile(double r2, double t) {
    const double f = t * (1.0 + r2) / (1.0 + t * t * r2);
    return f * f;
}

}  // namespace

ConformalDensity mobius_sphere_density(const TriangleMesh& sphere, const Vec3& pole, double t) {
    if (!(t > 0.0)) throw ValidationError("dilation factor must be positive");
    const Vec3 n = pole.normalized();
    std::vector<double> rho(sphere.vertex_count());
    for (int v = 0; v < sphere.vertex_count(); ++v) {
        const Vec3 p = sphere.positions()[v].normalized();
        // Projection from -pole: |x|^2 = (1 - cos) / (1 + cos), cos = p . pole.
        const double c = std::clamp(p.dot(n), -1.0 + 1e-15, 1.0);
        rho[v] = mobius_profile((1.0 - c) / (1.0 + c), t);
    }
    return ConformalDensity(std::move(rho));
}

ConformalDensity stereographic_bump_density(const TriangleMesh& mesh, int center, double t) {
    if (!(t > 0.0)) throw ValidationError("dilation factor must be positive");
    const auto d = geodesic_distances(mesh, center);
    const double dmax = *std::max_element(d.begin(), d.end());
    std::vector<double> rho(mesh.vertex_count());
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        const double phi = std::min(std::numbers::pi * d[v] / dmax, std::numbers::pi - 1e-6);
        const double r = std::tan(0.5 * phi);
        rho[v] = std::max(mobius_profile(r * r, t), kDensityFloor);
    }
    return ConformalDensity(std::move(rho));
}

ConformalDensity gaussian_bump_density(const TriangleMesh& mesh, int center, double amplitude, double width) {
    if (!(amplitude > -1.0) || !(width > 0.0)) throw ValidationError("bump needs amplitude > -1 and width > 0");
    const auto d = geodesic_distances(mesh, center);
    std::vector<double> rho(mesh.vertex_count());
    for (int v = 0; v < mesh.vertex_count(); ++v)
        rho[v] = 1.0 + amplitude * std::exp(-d[v] * d[v] / (2.0 * width * width));
    return ConformalDensity(std::move(rho));
}

ConformalDensity random_density(const TriangleMesh& mesh, std::uint64_t seed, double sigma, int smoothing) {
    if (!(sigma >= 0.0) || smoothing < 0) throw ValidationError("random density needs sigma >= 0, smoothing >= 0");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<double> z(mesh.vertex_count());
    for (double& x : z) x = sigma * normal(rng);
    for (int pass = 0; pass < smoothing; ++pass) {
        std::vector<double> next(z.size());
        for (int v = 0; v < mesh.vertex_count(); ++v) {
            double s = z[v];
            for (int w : mesh.neighbors(v)) s += z[w];
            next[v] = s / static_cast<double>(mesh.neighbors(v).size() + 1);
        }
        z = std::move(next);
    }
    // Smoothing shrinks the spread; restore the requested log standard deviation.
    double mean = 0.0;
    for (double x : z) mean += x;
    mean /= static_cast<double>(z.size());
    double var = 0.0;
    for (double x : z) var += (x - mean) * (x - mean);
    const double sd = std::sqrt(var / static_cast<double>(z.size()));
    std::vector<double> rho(z.size());
    for (std::size_t i = 0; i < z.size(); ++i)
        rho[i] = std::exp(sd > 0.0 ? sigma * (z[i] - mean) / sd : 0.0);
    return ConformalDensity(std::move(rho));
}

int top_vertex(const TriangleMesh& mesh) {
    int best = 0;
    for (int v = 1; v < mesh.vertex_count(); ++v)
        if (mesh.positions()[v].z() > mesh.positions()[best].z()) best = v;
    return best;
}

}  // namespace confspec::opt
