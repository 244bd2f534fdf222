#include "confspec/errors.hpp"
#include "confspec/spectral.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>

namespace confspec {
namespace {

// Per-pair residual ||L x - theta M x||_{M^-1} / scale, with x M-normalized.
std::vector<double> relative_residuals(const Eigen::MatrixXd& lx, const Eigen::MatrixXd& x,
                                       const Eigen::VectorXd& theta, std::span<const double> mhat,
                                       std::span<const double> inv_mhat, int nev) {
    std::vector<double> res(nev, 0.0);
    const std::size_t n = mhat.size();
    const double floor_scale = nev > 1 ? std::abs(theta(1)) : std::abs(theta(0));
    std::vector<double> r(n);
    for (int j = 0; j < nev; ++j) {
        std::copy(lx.col(j).data(), lx.col(j).data() + n, r.begin());
        kernels::sub_scaled_hadamard(theta(j), mhat, std::span<const double>(x.col(j).data(), n), r);
        const double norm = std::sqrt(kernels::weighted_dot(inv_mhat, r, r));
        const double scale = std::max({std::abs(theta(j)), floor_scale, 1e-300});
        res[j] = norm / scale;
    }
    return res;
}

// Columns of y become M-orthonormal (Cholesky QR, applied twice).
bool m_orthonormalize(Eigen::MatrixXd& y, std::span<const double> mhat) {
    const int b = static_cast<int>(y.cols());
    const std::size_t n = mhat.size();
    for (int pass = 0; pass < 2; ++pass) {
        Eigen::MatrixXd gram(b, b);
        for (int i = 0; i < b; ++i) {
            std::span<const double> yi(y.col(i).data(), n);
            for (int j = i; j < b; ++j) {
                const double g = kernels::weighted_dot(mhat, yi, std::span<const double>(y.col(j).data(), n));
                gram(i, j) = g;
                gram(j, i) = g;
            }
        }
        Eigen::LLT<Eigen::MatrixXd> llt(gram);
        if (llt.info() != Eigen::Success) return false;
        const Eigen::MatrixXd r = llt.matrixU();
        y = r.triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(y);
    }
    return true;
}

// Fallback: eigen-decomposition of the Gram matrix, dropping dependent directions
// and refilling them with fresh random vectors.
void m_orthonormalize_robust(Eigen::MatrixXd& y, std::span<const double> mhat, std::mt19937_64& rng) {
    const Eigen::Map<const Eigen::VectorXd> m(mhat.data(), static_cast<Eigen::Index>(mhat.size()));
    std::normal_distribution<double> normal;
    for (int attempt = 0; attempt < 4; ++attempt) {
        Eigen::MatrixXd gram = y.transpose() * m.asDiagonal() * y;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
        const Eigen::VectorXd w = es.eigenvalues();
        const double wmax = w.maxCoeff();
        Eigen::MatrixXd q = y * es.eigenvectors();
        for (int j = 0; j < q.cols(); ++j) {
            if (w(j) > 1e-14 * wmax) {
                q.col(j) /= std::sqrt(w(j));
            } else {
                for (Eigen::Index i = 0; i < q.rows(); ++i) q(i, j) = normal(rng);
            }
        }
        y = q;
        if (m_orthonormalize(y, mhat)) return;
    }
    throw ConvergenceError("eigensolver: could not M-orthonormalize the search subspace", {});
}

void finish_report(SpectrumReport& rep, const Eigen::VectorXd& theta, const Eigen::MatrixXd& x,
                   std::vector<double> residuals, double total, int nev, bool want_vectors,
                   double cluster_tol) {
    rep.total_mass = total;
    rep.normalized.assign(theta.data(), theta.data() + nev);
    rep.eigenvalues.resize(nev);
    for (int j = 0; j < nev; ++j) rep.eigenvalues[j] = theta(j) / total;
    rep.residuals = std::move(residuals);
    rep.clusters = cluster_indices(rep.normalized, cluster_tol);
    if (want_vectors) rep.eigenvectors = x.leftCols(nev) / std::sqrt(total);
}

SpectrumReport solve_dense(const StiffnessOperator& stiffness, std::span<const double> mhat,
                           std::span<const double> inv_mhat, double total, int nev,
                           bool want_vectors, double cluster_tol) {
    const Eigen::Index n = stiffness.size();
    Eigen::VectorXd isq(n);
    for (Eigen::Index i = 0; i < n; ++i) isq(i) = std::sqrt(inv_mhat[i]);
    Eigen::MatrixXd a = Eigen::MatrixXd(stiffness.matrix);
    a = isq.asDiagonal() * a * isq.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    if (es.info() != Eigen::Success)
        throw ConvergenceError("dense eigensolver failed", {});
    const Eigen::VectorXd theta = es.eigenvalues().head(nev);
    const Eigen::MatrixXd x = isq.asDiagonal() * es.eigenvectors().leftCols(nev);
    const Eigen::MatrixXd lx = stiffness.matrix * x;
    SpectrumReport rep;
    rep.dense = true;
    rep.iterations = 1;
    finish_report(rep, theta, x, relative_residuals(lx, x, theta, mhat, inv_mhat, nev), total, nev,
                  want_vectors, cluster_tol);
    return rep;
}

}  // namespace

const std::vector<int>& SpectrumReport::cluster_of(int k) const {
    for (const auto& c : clusters)
        if (std::find(c.begin(), c.end(), k) != c.end()) return c;
    throw ValidationError("index " + std::to_string(k) + " is not in the computed spectrum");
}

std::vector<std::vector<int>> cluster_indices(std::span<const double> values, double cluster_tol) {
    std::vector<std::vector<int>> out;
    for (int j = 0; j < static_cast<int>(values.size()); ++j) {
        if (!out.empty()) {
            const double prev = values[j - 1];
            const double scale = std::max(std::abs(values[j]), 1e-300);
            if ((values[j] - prev) / scale < cluster_tol) {
                out.back().push_back(j);
                continue;
            }
        }
        out.push_back({j});
    }
    return out;
}

SpectrumReport solve_spectrum(const StiffnessOperator& stiffness, const MassVector& mass, int count,
                              bool want_vectors, const SolverOptions& options) {
    const int n = stiffness.size();
    if (static_cast<int>(mass.values.size()) != n)
        throw ValidationError("mass vector size does not match the stiffness operator");
    if (count < 1 || count > n - 1)
        throw ValidationError("eigenvalue count " + std::to_string(count) + " outside [1, " +
                              std::to_string(n - 1) + "]");
    const int nev = count + 1;
    const double total = mass.total;
    if (!(total > 0.0)) throw ValidationError("total mass must be positive");

    // Work with masses normalized to total 1: the pencil's eigenvalues are then
    // the area-normalized values directly, and rho -> c rho leaves the solve unchanged.
    std::vector<double> mhat(n), inv_mhat(n);
    for (int i = 0; i < n; ++i) {
        if (!(mass.values[i] > 0.0))
            throw ValidationError("mass at vertex " + std::to_string(i) + " is not positive");
        mhat[i] = mass.values[i] / total;
        inv_mhat[i] = 1.0 / mhat[i];
    }

    const int block = std::min(n, std::max(2 * nev + 4, nev + 10));
    if (n <= options.dense_threshold || 2 * block >= n) {
        auto rep = solve_dense(stiffness, mhat, inv_mhat, total, nev, want_vectors, options.cluster_tol);
        rep.warnings = stiffness.warnings;
        return rep;
    }

    const int cap = options.max_iterations > 0
                        ? options.max_iterations
                        : std::max(50, static_cast<int>(10.0 * count * std::sqrt(static_cast<double>(n))));

    const Eigen::Map<const Eigen::VectorXd> mvec(mhat.data(), n);
    Eigen::SparseMatrix<double> shifted = stiffness.matrix;
    for (int i = 0; i < n; ++i) shifted.coeffRef(i, i) += options.shift * mhat[i];
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(shifted);
    if (ldlt.info() != Eigen::Success)
        throw ConvergenceError("eigensolver: factorization of L + shift*M failed", {});

    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd x(n, block);
    int filled = 0;
    if (options.initial_subspace && options.initial_subspace->rows() == n) {
        filled = static_cast<int>(std::min<Eigen::Index>(block, options.initial_subspace->cols()));
        x.leftCols(filled) = options.initial_subspace->leftCols(filled);
    }
    for (int j = filled; j < block; ++j)
        for (int i = 0; i < n; ++i) x(i, j) = normal(rng);

    const kernels::CsrView csr = stiffness.csr();
    Eigen::MatrixXd y(n, block), ly(n, block);
    Eigen::VectorXd theta;
    std::vector<double> residuals(nev, 1.0);
    std::vector<double> best = residuals;
    int it = 0;
    for (it = 1; it <= cap; ++it) {
        y = ldlt.solve(mvec.asDiagonal() * x);
        if (!m_orthonormalize(y, mhat)) m_orthonormalize_robust(y, mhat, rng);
        for (int j = 0; j < block; ++j)
            kernels::csr_matvec(csr, std::span<const double>(y.col(j).data(), n),
                                std::span<double>(ly.col(j).data(), n));
        Eigen::MatrixXd h = y.transpose() * ly;
        h = 0.5 * (h + h.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
        theta = es.eigenvalues();
        x = y * es.eigenvectors();
        const Eigen::MatrixXd lx = ly * es.eigenvectors().leftCols(nev);
        residuals = relative_residuals(lx, x, theta, mhat, inv_mhat, nev);
        if (*std::max_element(residuals.begin(), residuals.end()) <
            *std::max_element(best.begin(), best.end()))
            best = residuals;
        if (*std::max_element(residuals.begin(), residuals.end()) <= options.tolerance) break;
    }
    if (it > cap) {
        std::ostringstream msg;
        msg << "eigensolver did not converge in " << cap << " iterations; worst residual "
            << *std::max_element(best.begin(), best.end());
        throw ConvergenceError(msg.str(), best);
    }

    SpectrumReport rep;
    rep.iterations = it;
    rep.warnings = stiffness.warnings;
    finish_report(rep, theta, x, residuals, total, nev, want_vectors, options.cluster_tol);
    return rep;
}

SpectrumReport mesh_spectrum(const TriangleMesh& mesh, const ConformalDensity& density, int count,
                             bool want_vectors, const SolverOptions& options) {
    const auto stiffness = assemble_stiffness(mesh);
    const auto mass = assemble_mass(mesh, density);
    return solve_spectrum(stiffness, mass, count, want_vectors, options);
}

}  // namespace confspec
