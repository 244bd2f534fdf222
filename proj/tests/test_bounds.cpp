#include "confspec/bounds.hpp"
#include "confspec/errors.hpp"

#include "doctest.h"

#include <cmath>
#include <numbers>
#include <set>

using namespace confspec;
using namespace confspec::bounds;

namespace {

constexpr double kPi = std::numbers::pi;

// Unit sphere volumes by the two-step recursion omega_n = 2 pi omega_{n-2} / (n - 1).
double omega_rec(int n) {
    if (n == 0) return 2.0;
    if (n == 1) return 2.0 * kPi;
    return 2.0 * kPi * omega_rec(n - 2) / (n - 1);
}

double fact(int n) { return n <= 1 ? 1.0 : n * fact(n - 1); }

// lambda_1 * volume^(2/n) of the standard metric.
double conformal_value(double lambda1, double volume, int n) { return lambda1 * std::pow(volume, 2.0 / n); }

}  // namespace

TEST_CASE("sphere volumes") {
    for (int n = 1; n <= 10; ++n) CHECK(omega_n(n) == doctest::Approx(omega_rec(n)).epsilon(1e-14));
    CHECK(omega_n(2) == doctest::Approx(4 * kPi));
    CHECK(omega_n(3) == doctest::Approx(2 * kPi * kPi));
    CHECK_THROWS_AS(omega_n(0), ValidationError);
}

TEST_CASE("conformal lower bounds") {
    for (int k = 0; k <= 10; ++k) CHECK(corollary1_bound(2, k) == doctest::Approx(8 * kPi * k));
    for (int n = 2; n <= 6; ++n) {
        CHECK(corollary1_bound(n, 1) == doctest::Approx(n * std::pow(omega_rec(n), 2.0 / n)));
        CHECK(corollary1_bound(n, 5) == doctest::Approx(corollary1_bound(n, 1) * std::pow(5.0, 2.0 / n)));
        // Gap constant equals the k = 1 bound raised to n/2.
        CHECK(gap_bound(n) == doctest::Approx(std::pow(corollary1_bound(n, 1), n / 2.0)));
    }
    CHECK(gap_bound(2) == doctest::Approx(8 * kPi));
    CHECK_THROWS_AS(corollary1_bound(1, 1), ValidationError);
    CHECK_THROWS_AS(corollary1_bound(2, -1), ValidationError);
    CHECK_THROWS_AS(gap_bound(1), ValidationError);
}

TEST_CASE("round sphere and genus bounds") {
    // l(l+1) with multiplicity 2l+1, times area 4 pi.
    int k = 0;
    for (int l = 0; l <= 6; ++l)
        for (int m = 0; m < 2 * l + 1; ++m, ++k)
            CHECK(sphere_normalized_eigenvalue(k) == doctest::Approx(4 * kPi * l * (l + 1)));
    CHECK(yang_yau_bound(0) == doctest::Approx(8 * kPi));
    CHECK(yang_yau_bound(1) == doctest::Approx(16 * kPi));
    CHECK(yang_yau_bound(2) == doctest::Approx(16 * kPi));
    CHECK(yang_yau_bound(3) == doctest::Approx(24 * kPi));
    CHECK_THROWS_AS(yang_yau_bound(-1), ValidationError);
    CHECK_THROWS_AS(sphere_normalized_eigenvalue(-1), ValidationError);
}

TEST_CASE("rank-one symmetric spaces from eigenvalue and volume") {
    for (int n = 2; n <= 8; ++n) {
        CHECK(symmetric_space_lambda1c(SymmetricSpace::sphere, n) ==
              doctest::Approx(conformal_value(n, omega_rec(n), n)));
        CHECK(symmetric_space_lambda1c(SymmetricSpace::real_projective, n) ==
              doctest::Approx(conformal_value(2.0 * (n + 1), omega_rec(n) / 2.0, n)));
    }
    for (int d = 1; d <= 6; ++d)  // Fubini-Study, holomorphic curvature 4
        CHECK(symmetric_space_lambda1c(SymmetricSpace::complex_projective, d) ==
              doctest::Approx(conformal_value(4.0 * (d + 1), std::pow(kPi, d) / fact(d), 2 * d)));
    for (int d = 1; d <= 4; ++d)
        CHECK(symmetric_space_lambda1c(SymmetricSpace::quaternionic_projective, d) ==
              doctest::Approx(conformal_value(8.0 * (d + 1), std::pow(kPi, 2 * d) / fact(2 * d + 1), 4 * d)));
    CHECK(symmetric_space_lambda1c(SymmetricSpace::cayley_plane, 2) ==
          doctest::Approx(conformal_value(48.0, 6.0 * std::pow(kPi, 8) / fact(11), 16)));

    CHECK(symmetric_space_lambda1c("CP^1") == doctest::Approx(8 * kPi));
    CHECK(symmetric_space_lambda1c("RP^2") == doctest::Approx(12 * kPi));
    CHECK(symmetric_space_lambda1c("S^3") == doctest::Approx(symmetric_space_lambda1c(SymmetricSpace::sphere, 3)));
    CHECK(symmetric_space_lambda1c("CaP2") == doctest::Approx(21.16).epsilon(1e-3));
    CHECK_THROWS_AS(symmetric_space_lambda1c("XP^2"), ValidationError);
    CHECK_THROWS_AS(symmetric_space_lambda1c("S^x"), ValidationError);
    CHECK_THROWS_AS(symmetric_space_lambda1c("S^1"), ValidationError);
}

TEST_CASE("factorial") {
    CHECK(factorial(0) == 1);
    CHECK(factorial(11) == 39916800ULL);
    CHECK(factorial(20) == 2432902008176640000ULL);
    CHECK_THROWS_AS(factorial(21), ValidationError);
}

TEST_CASE("linear growth trend") {
    std::vector<std::pair<int, double>> pts;
    for (int k = 1; k <= 40; ++k) pts.emplace_back(k, sphere_normalized_eigenvalue(k));
    const auto fit = korevaar_trend(pts);
    CHECK(fit.slope == doctest::Approx(1.0).epsilon(0.15));
    std::vector<std::pair<int, double>> exact = {{1, 3.0}, {2, 12.0}, {4, 48.0}};
    CHECK(korevaar_trend(exact).slope == doctest::Approx(2.0));
    CHECK(korevaar_trend(exact).residual == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_THROWS_AS(korevaar_trend({{1, 1.0}, {2, 2.0}}), ValidationError);
    CHECK_THROWS_AS(korevaar_trend({{1, 1.0}, {1, 2.0}, {1, 3.0}}), ValidationError);
    CHECK_THROWS_AS(korevaar_trend({{0, 1.0}, {1, 2.0}, {2, 3.0}}), ValidationError);
}

TEST_CASE("constants table") {
    const auto table = bound_table();
    std::set<std::string> ids;
    for (const auto& e : table) {
        CHECK(ids.insert(e.id).second);
        CHECK(std::isfinite(e.value));
        CHECK_FALSE(e.expression.empty());
        CHECK(bound_entry(e.id).value == e.value);
    }
    CHECK(bound_entry("hersch").value == doctest::Approx(8 * kPi));
    CHECK(bound_entry("nadirashvili").value == doctest::Approx(8 * kPi * kPi / std::sqrt(3.0)));
    CHECK(bound_entry("square_torus").value == doctest::Approx(4 * kPi * kPi));
    CHECK(bound_entry("sphere_lambda2c").value == doctest::Approx(16 * kPi));
    CHECK(bound_entry("corollary1/2/3").value == doctest::Approx(24 * kPi));
    CHECK_THROWS_AS(bound_entry("nonsense"), ValidationError);
    CHECK_THROWS_AS(bound_entry("corollary1/2"), ValidationError);
    CHECK_THROWS_AS(bound_entry("hersch/1"), ValidationError);
    CHECK_THROWS_AS(bound_entry("omega/two"), ValidationError);
}
