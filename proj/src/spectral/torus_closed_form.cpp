#include "confspec/errors.hpp"
#include "confspec/spectral.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace confspec {

std::vector<double> flat_torus_closed_form(const Lattice& lattice, int count) {
    if (!(lattice.area() > 0.0)) throw ValidationError("lattice is degenerate");
    if (count < 0) throw ValidationError("count must be non-negative");
    const auto [f1, f2] = lattice.dual();
    Eigen::Matrix2d g;
    g.col(0) = f1;
    g.col(1) = f2;
    // |G x| >= sigma_min |x|_2 >= sigma_min |x|_inf, so every dual vector outside
    // the box |m|,|n| <= B has squared norm >= (sigma_min (B + 1))^2.
    const double sigma_min = Eigen::JacobiSVD<Eigen::Matrix2d>(g).singularValues().minCoeff();
    const double scale = 4.0 * std::numbers::pi * std::numbers::pi * lattice.area();
    const std::size_t need = static_cast<std::size_t>(count) + 1;
    for (int bound = 1;; bound *= 2) {
        std::vector<double> sq;
        sq.reserve(static_cast<std::size_t>(2 * bound + 1) * (2 * bound + 1));
        for (int m = -bound; m <= bound; ++m)
            for (int n = -bound; n <= bound; ++n) sq.push_back((m * f1 + n * f2).squaredNorm());
        std::sort(sq.begin(), sq.end());
        const double outside = std::pow(sigma_min * (bound + 1), 2);
        if (sq.size() >= need && sq[need - 1] < outside) {
            std::vector<double> out(need);
            for (std::size_t i = 0; i < need; ++i) out[i] = scale * sq[i];
            return out;
        }
    }
}

}  // namespace confspec
