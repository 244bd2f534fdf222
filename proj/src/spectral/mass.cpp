#include "confspec/errors.hpp"
#include "confspec/spectral.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace confspec {

ConformalDensity::ConformalDensity(std::vector<double> values) : values_(std::move(values)) {
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i]) || values_[i] < kDensityFloor)
            throw ValidationError("density at vertex " + std::to_string(i) + " is " +
                                  std::to_string(values_[i]) +
                                  "; densities must be finite and >= 1e-9");
    }
}

ConformalDensity ConformalDensity::uniform(int vertex_count, double value) {
    return ConformalDensity(std::vector<double>(static_cast<std::size_t>(vertex_count), value));
}

ConformalDensity ConformalDensity::scaled(double c) const {
    std::vector<double> v(values_);
    for (double& x : v) x *= c;
    return ConformalDensity(std::move(v));
}

MassVector assemble_mass(const TriangleMesh& mesh, const ConformalDensity& density) {
    if (density.size() != mesh.vertex_count())
        throw ValidationError("density has " + std::to_string(density.size()) +
                              " entries for a mesh with " + std::to_string(mesh.vertex_count()) +
                              " vertices");
    MassVector m;
    m.values.assign(mesh.vertex_count(), 0.0);
    kernels::hadamard(density.values(), mesh.vertex_area_shares(), m.values);
    m.total = std::accumulate(m.values.begin(), m.values.end(), 0.0);
    return m;
}

}  // namespace confspec
