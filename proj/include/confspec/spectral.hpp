#pragma once

#include "confspec/kernels.hpp"
#include "confspec/mesh.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace confspec {

inline constexpr double kCotangentClamp = 1e6;
inline constexpr double kDensityFloor = 1e-9;
inline constexpr double kClusterTol = 1e-3;
inline constexpr double kZeroModeTol = 1e-8;

/// Cotangent Laplacian: off-diagonal (i,j) = -(cot a_ij + cot b_ij)/2, diagonal
/// = negated off-diagonal row sum. Depends only on intrinsic edge lengths, so a
/// conformal change of metric (which only moves the mass) leaves it fixed.
struct StiffnessOperator {
    Eigen::SparseMatrix<double> matrix;  // symmetric, compressed, column-major
    std::vector<double> edge_weights;    // (cot a + cot b)/2 per mesh edge
    int clamped_cotangents = 0;
    std::vector<std::string> warnings;

    int size() const { return static_cast<int>(matrix.rows()); }
    /// CSR view (the CSC arrays of a symmetric matrix).
    kernels::CsrView csr() const;
};

StiffnessOperator assemble_stiffness(const TriangleMesh& mesh);

/// Positive per-vertex conformal weight; rho_i stands for f^2(x_i) in g' = f^2 g.
class ConformalDensity {
public:
    /// Throws ValidationError on non-finite values or values below kDensityFloor.
    explicit ConformalDensity(std::vector<double> values);
    static ConformalDensity uniform(int vertex_count, double value = 1.0);

    int size() const noexcept { return static_cast<int>(values_.size()); }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](int i) const { return values_[i]; }
    ConformalDensity scaled(double c) const;

private:
    std::vector<double> values_;
};

/// Lumped masses m_i = rho_i * a_i with a_i one third of the incident face area.
struct MassVector {
    std::vector<double> values;
    double total = 0.0;
};

MassVector assemble_mass(const TriangleMesh& mesh, const ConformalDensity& density);

struct SolverOptions {
    double tolerance = 1e-9;       // relative residual
    int max_iterations = 0;        // 0: 10 * K * sqrt(V)
    std::uint64_t seed = 42;
    int dense_threshold = 400;     // vertex count at or below which a dense solve is used
    double cluster_tol = kClusterTol;
    double shift = 1.0;            // in area-normalized units
    /// Optional warm start (columns are start vectors, any normalization).
    std::optional<Eigen::MatrixXd> initial_subspace;
};

/// Spectrum of the pencil (L, M).
struct SpectrumReport {
    std::vector<double> eigenvalues;            // lambda_0 <= ... <= lambda_K
    std::vector<double> normalized;             // lambda_k * total_mass
    double total_mass = 0.0;
    std::vector<std::vector<int>> clusters;     // indices grouped by relative gap < cluster_tol
    std::vector<double> residuals;              // relative, per pair
    std::optional<Eigen::MatrixXd> eigenvectors;  // columns M-orthonormal
    int iterations = 0;
    bool dense = false;
    std::vector<std::string> warnings;

    int count() const { return static_cast<int>(eigenvalues.size()); }
    /// Cluster containing index k.
    const std::vector<int>& cluster_of(int k) const;
};

/// Computes lambda_0..lambda_K (K + 1 values). 1 <= K <= V - 1.
SpectrumReport solve_spectrum(const StiffnessOperator& stiffness, const MassVector& mass, int count,
                              bool want_vectors, const SolverOptions& options = {});

/// Convenience: assemble and solve for a mesh with a density.
SpectrumReport mesh_spectrum(const TriangleMesh& mesh, const ConformalDensity& density, int count,
                             bool want_vectors = false, const SolverOptions& options = {});

std::vector<std::vector<int>> cluster_indices(std::span<const double> values, double cluster_tol);

/// d lambda_k / d rho_i = -lambda_k u_k(i)^2 a_i / (u^T M u). Every component is <= 0.
/// The report must carry eigenvectors and at least index k + 1. Throws
/// MultiplicityError if lambda_k is clustered.
std::vector<double> eigenvalue_gradient(const SpectrumReport& report, const TriangleMesh& mesh,
                                        int k, double cluster_tol = kClusterTol);

/// Solves for lambda_0..lambda_{k+1} and differentiates lambda_k.
std::vector<double> eigenvalue_gradient(const StiffnessOperator& stiffness, const MassVector& mass,
                                        const TriangleMesh& mesh, const ConformalDensity& density,
                                        int k, const SolverOptions& options = {});

/// Area-normalized flat-torus eigenvalues 4 pi^2 |gamma*|^2 |det| over the
/// dual lattice, sorted with multiplicity; count + 1 values starting at 0.
std::vector<double> flat_torus_closed_form(const Lattice& lattice, int count);

}  // namespace confspec
