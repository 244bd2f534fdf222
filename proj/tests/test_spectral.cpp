#include "confspec/errors.hpp"
#include "confspec/json_io.hpp"
#include "confspec/mesh.hpp"
#include "confspec/spectral.hpp"

#include "doctest.h"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace confspec;

namespace {

constexpr double kPi = std::numbers::pi;

TriangleMesh regular_tetrahedron() {
    std::istringstream in("OFF\n4 4 0\n1 1 1\n1 -1 -1\n-1 1 -1\n-1 -1 1\n"
                          "3 0 1 2\n3 0 3 1\n3 0 2 3\n3 1 3 2\n");
    return read_off(in);
}

// Independent dual-lattice enumeration: 4 pi^2 |m f1 + n f2|^2 |det|.
std::vector<double> brute_torus(const Lattice& l, int count) {
    const Eigen::Matrix2d E = (Eigen::Matrix2d() << l.e1.x(), l.e2.x(), l.e1.y(), l.e2.y()).finished();
    const Eigen::Matrix2d F = E.inverse().transpose();  // columns: dual basis
    std::vector<double> v;
    for (int m = -12; m <= 12; ++m)
        for (int n = -12; n <= 12; ++n) {
            const Eigen::Vector2d g = F * Eigen::Vector2d(m, n);
            v.push_back(4.0 * kPi * kPi * g.squaredNorm() * std::abs(E.determinant()));
        }
    std::sort(v.begin(), v.end());
    v.resize(count + 1);
    return v;
}

}  // namespace

TEST_CASE("cotangent weights of equilateral triangles") {
    const auto t = regular_tetrahedron();
    const auto L = assemble_stiffness(t);
    const double w = 1.0 / std::sqrt(3.0);  // (cot 60 + cot 60) / 2
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const double expect = i == j ? 3.0 * w : -w;
            CHECK(L.matrix.coeff(i, j) == doctest::Approx(expect).epsilon(1e-14));
        }
    CHECK(L.clamped_cotangents == 0);
}

TEST_CASE("stiffness depends only on shape, not scale") {
    const auto s = build_icosphere(2);
    const auto a = assemble_stiffness(s);
    const auto b = assemble_stiffness(scaled_mesh(s, 7.5));
    CHECK((Eigen::MatrixXd(a.matrix) - Eigen::MatrixXd(b.matrix)).cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(s.vertex_count());
    CHECK((a.matrix * ones).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("lumped mass") {
    const auto t = build_flat_torus(Lattice::square(), 8);
    const auto uniform = assemble_mass(t, ConformalDensity::uniform(t.vertex_count()));
    CHECK(uniform.total == doctest::Approx(1.0).epsilon(1e-13));
    std::mt19937_64 rng(3);
    std::vector<double> r(t.vertex_count());
    for (auto& x : r) x = std::uniform_real_distribution<double>(0.1, 3.0)(rng);
    const ConformalDensity rho(r);
    const auto m = assemble_mass(t, rho);
    const auto m2 = assemble_mass(t, rho.scaled(2.0));
    for (int i = 0; i < t.vertex_count(); ++i) CHECK(m2.values[i] == doctest::Approx(2.0 * m.values[i]));
    // Face-wise accounting: area * mean of the three corner densities.
    double face_sum = 0.0;
    for (int f = 0; f < t.face_count(); ++f) {
        const auto& tri = t.faces()[f];
        face_sum += t.face_area(f) * (r[tri[0]] + r[tri[1]] + r[tri[2]]) / 3.0;
    }
    CHECK(std::abs(face_sum - m.total) < 1e-12 * m.total);
}

TEST_CASE("invalid densities") {
    CHECK_THROWS_AS(ConformalDensity({1.0, 0.0}), ValidationError);
    CHECK_THROWS_AS(ConformalDensity({1.0, -2.0}), ValidationError);
    CHECK_THROWS_AS(ConformalDensity({1.0, std::nan("")}), ValidationError);
    const auto t = build_flat_torus(Lattice::square(), 4);
    CHECK_THROWS_AS(assemble_mass(t, ConformalDensity::uniform(3)), ValidationError);
}

TEST_CASE("tetrahedron spectrum by hand") {
    // L = w (4 I - J), M = a I with a = 2 sqrt 3: eigenvalues 0 and 4 w / a = 2/3 (x3).
    const auto t = regular_tetrahedron();
    const auto s = mesh_spectrum(t, ConformalDensity::uniform(4), 3);
    CHECK(std::abs(s.eigenvalues[0]) < 1e-12);
    for (int k = 1; k <= 3; ++k) CHECK(s.eigenvalues[k] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(s.total_mass == doctest::Approx(8.0 * std::sqrt(3.0)));
    CHECK(s.cluster_of(1).size() == 3);
}

TEST_CASE("dense and iterative solves agree") {
    const auto s = build_icosphere(3);  // 642 vertices, iterative by default
    std::mt19937_64 rng(7);
    std::vector<double> r(s.vertex_count());
    for (auto& x : r) x = std::exp(std::uniform_real_distribution<double>(-0.5, 0.5)(rng));
    const ConformalDensity rho(r);
    SolverOptions dense;
    dense.dense_threshold = 100000;
    const auto a = mesh_spectrum(s, rho, 10, true);
    const auto b = mesh_spectrum(s, rho, 10, false, dense);
    CHECK_FALSE(a.dense);
    CHECK(b.dense);
    for (int k = 1; k <= 10; ++k) CHECK(a.normalized[k] == doctest::Approx(b.normalized[k]).epsilon(1e-8));

    // Residuals and M-orthonormality of the iterative vectors.
    for (double res : a.residuals) CHECK(res <= 1e-9);
    const auto mass = assemble_mass(s, rho);
    const Eigen::Map<const Eigen::VectorXd> m(mass.values.data(), s.vertex_count());
    const Eigen::MatrixXd& U = *a.eigenvectors;
    const Eigen::MatrixXd G = U.transpose() * m.asDiagonal() * U;
    CHECK((G - Eigen::MatrixXd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff() < 1e-8);
    // Zero mode is constant.
    const Eigen::VectorXd u0 = U.col(0);
    CHECK((u0.array() - u0.mean()).abs().maxCoeff() < 1e-8 * u0.cwiseAbs().maxCoeff());
    CHECK(std::abs(a.eigenvalues[0]) < kZeroModeTol * a.eigenvalues[1]);
}

TEST_CASE("normalized eigenvalues obey the scaling law") {
    const auto t = build_flat_torus(Lattice::equilateral(), 10);
    const auto a = mesh_spectrum(t, ConformalDensity::uniform(t.vertex_count()), 6);
    const auto b = mesh_spectrum(t, ConformalDensity::uniform(t.vertex_count(), 4.0), 6);
    for (int k = 1; k <= 6; ++k) {
        CHECK(b.eigenvalues[k] == doctest::Approx(a.eigenvalues[k] / 4.0).epsilon(1e-12));
        CHECK(b.normalized[k] == doctest::Approx(a.normalized[k]).epsilon(1e-12));
    }
}

TEST_CASE("solver argument checks and iteration cap") {
    const auto s = build_icosphere(3);
    const auto rho = ConformalDensity::uniform(s.vertex_count());
    CHECK_THROWS_AS(mesh_spectrum(s, rho, 0), ValidationError);
    CHECK_THROWS_AS(mesh_spectrum(s, rho, s.vertex_count()), ValidationError);
    SolverOptions capped;
    capped.max_iterations = 1;
    capped.tolerance = 1e-14;
    try {
        (void)mesh_spectrum(s, rho, 12, false, capped);
        FAIL("expected a convergence error");
    } catch (const ConvergenceError& e) {
        CHECK_FALSE(e.residuals().empty());
    }
}

TEST_CASE("flat torus closed form against enumeration") {
    for (const auto& l : {Lattice::square(), Lattice::equilateral(), Lattice::rectangular(1.4)}) {
        const auto v = flat_torus_closed_form(l, 20);
        const auto ref = brute_torus(l, 20);
        REQUIRE(v.size() == ref.size());
        for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i] == doctest::Approx(ref[i]).epsilon(1e-12));
        CHECK(v[0] == 0.0);
    }
    const auto sq = flat_torus_closed_form(Lattice::square(), 5);
    for (int k = 1; k <= 4; ++k) CHECK(sq[k] == doctest::Approx(4 * kPi * kPi));
    CHECK(sq[5] > 4 * kPi * kPi * 1.5);
    const auto eq = flat_torus_closed_form(Lattice::equilateral(), 7);
    for (int k = 1; k <= 6; ++k) CHECK(eq[k] == doctest::Approx(8 * kPi * kPi / std::sqrt(3.0)));
    CHECK(eq[7] > eq[6] * 1.5);
}

TEST_CASE("eigenvalue gradient") {
    const auto s = build_icosphere(2);
    std::mt19937_64 rng(11);
    std::vector<double> r(s.vertex_count());
    for (auto& x : r) x = std::exp(std::uniform_real_distribution<double>(-0.6, 0.6)(rng));
    const ConformalDensity rho(r);
    const auto spec = mesh_spectrum(s, rho, 6, true);
    int k = 1;
    while (spec.cluster_of(k).size() != 1) ++k;
    const auto g = eigenvalue_gradient(spec, s, k);
    double directional = 0.0;
    for (int i = 0; i < s.vertex_count(); ++i) {
        CHECK(g[i] <= 0.0);
        directional += g[i] * r[i];
    }
    // Scaling direction: d/dt lambda_k(t rho) at t = 1 is -lambda_k.
    CHECK(directional == doctest::Approx(-spec.eigenvalues[k]).epsilon(1e-9));

    const auto stiffness = assemble_stiffness(s);
    const auto g2 = eigenvalue_gradient(stiffness, assemble_mass(s, rho), s, rho, k);
    for (int i = 0; i < s.vertex_count(); ++i) CHECK(g2[i] == doctest::Approx(g[i]).epsilon(1e-7));

    const auto round = mesh_spectrum(s, ConformalDensity::uniform(s.vertex_count()), 4, true);
    try {
        (void)eigenvalue_gradient(round, s, 1);
        FAIL("expected a multiplicity error");
    } catch (const MultiplicityError& e) {
        CHECK(e.cluster_size() == 3);
    }
}

TEST_CASE("report JSON round trip") {
    const auto t = build_flat_torus(Lattice::square(), 6);
    const auto s = mesh_spectrum(t, ConformalDensity::uniform(t.vertex_count()), 5);
    const Json j = to_json(s);
    for (const char* key : {"eigenvalues", "normalized", "total_mass", "clusters", "residuals"})
        CHECK(j.contains(key));
    const auto back = spectrum_from_json(Json::parse(j.dump()));
    CHECK(back.eigenvalues == s.eigenvalues);
    CHECK(back.clusters == s.clusters);
    CHECK(back.total_mass == s.total_mass);
}

TEST_CASE("cluster detection") {
    const std::vector<double> v = {0.0, 1.0, 1.0005, 2.0, 3.0, 3.0};
    const auto c = cluster_indices(v, 1e-3);
    REQUIRE(c.size() == 4);
    CHECK(c[1] == std::vector<int>{1, 2});
    CHECK(c[3] == std::vector<int>{4, 5});
}
