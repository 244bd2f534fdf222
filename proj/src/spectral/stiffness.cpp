#include "confspec/spectral.hpp"

#include <Eigen/SparseCore>

#include <cmath>
#include <string>

namespace confspec {

kernels::CsrView StiffnessOperator::csr() const {
    kernels::CsrView v;
    v.rows = static_cast<std::size_t>(matrix.rows());
    v.offsets = matrix.outerIndexPtr();
    v.columns = matrix.innerIndexPtr();
    v.values = matrix.valuePtr();
    return v;
}

StiffnessOperator assemble_stiffness(const TriangleMesh& mesh) {
    StiffnessOperator op;
    op.edge_weights.assign(mesh.edge_count(), 0.0);
    for (int f = 0; f < mesh.face_count(); ++f) {
        const auto l = mesh.face_lengths(f);
        const double area = mesh.face_area(f);
        const auto& fe = mesh.face_edges(f);
        // Edge j = (f[j], f[j+1]) is opposite corner j+2.
        for (int j = 0; j < 3; ++j) {
            const double opp = l[j];
            const double s1 = l[(j + 1) % 3];
            const double s2 = l[(j + 2) % 3];
            double cot = (s1 * s1 + s2 * s2 - opp * opp) / (4.0 * area);
            if (std::abs(cot) > kCotangentClamp) {
                cot = std::copysign(kCotangentClamp, cot);
                ++op.clamped_cotangents;
            }
            op.edge_weights[fe[j]] += 0.5 * cot;
        }
    }
    if (op.clamped_cotangents > 0)
        op.warnings.push_back(std::to_string(op.clamped_cotangents) +
                              " cotangent(s) clamped to |cot| <= 1e6 on near-degenerate triangles");

    const int n = mesh.vertex_count();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(mesh.edge_count()) * 2 + n);
    std::vector<double> diag(n, 0.0);
    for (int e = 0; e < mesh.edge_count(); ++e) {
        const Edge& edge = mesh.edges()[e];
        const double w = op.edge_weights[e];
        trip.emplace_back(edge.v0, edge.v1, -w);
        trip.emplace_back(edge.v1, edge.v0, -w);
        diag[edge.v0] += w;
        diag[edge.v1] += w;
    }
    for (int v = 0; v < n; ++v) trip.emplace_back(v, v, diag[v]);
    op.matrix.resize(n, n);
    op.matrix.setFromTriplets(trip.begin(), trip.end());
    op.matrix.makeCompressed();
    return op;
}

}  // namespace confspec
