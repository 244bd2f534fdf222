#include "confspec/errors.hpp"
#include "confspec/spectral.hpp"

#include <algorithm>
#include <string>

namespace confspec {

std::vector<double> eigenvalue_gradient(const SpectrumReport& report, const TriangleMesh& mesh,
                                        int k, double cluster_tol) {
    if (!report.eigenvectors)
        throw ValidationError("eigenvalue_gradient needs a report computed with eigenvectors");
    if (k < 1 || k + 1 >= report.count())
        throw ValidationError("eigenvalue_gradient: index " + std::to_string(k) +
                              " needs neighbours up to k + 1 in the report");
    const auto groups = cluster_indices(report.normalized, cluster_tol);
    for (const auto& g : groups) {
        if (g.size() > 1 && std::find(g.begin(), g.end(), k) != g.end())
            throw MultiplicityError("lambda_" + std::to_string(k) + " lies in a cluster of size " +
                                        std::to_string(g.size()) +
                                        "; use the cluster (soft-min) gradient instead",
                                    static_cast<int>(g.size()));
    }
    const int n = mesh.vertex_count();
    const auto& u = *report.eigenvectors;
    if (u.rows() != n) throw ValidationError("eigenvectors do not match the mesh");
    const auto shares = mesh.vertex_area_shares();
    // Columns are M-orthonormal, so u^T M u = 1.
    const double lambda = report.eigenvalues[k];
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = -lambda * u(i, k) * u(i, k) * shares[i];
    return g;
}

std::vector<double> eigenvalue_gradient(const StiffnessOperator& stiffness, const MassVector& mass,
                                        const TriangleMesh& mesh, const ConformalDensity& density,
                                        int k, const SolverOptions& options) {
    if (density.size() != mesh.vertex_count())
        throw ValidationError("density does not match the mesh");
    const auto report = solve_spectrum(stiffness, mass, k + 1, true, options);
    return eigenvalue_gradient(report, mesh, k, options.cluster_tol);
}

}  // namespace confspec
