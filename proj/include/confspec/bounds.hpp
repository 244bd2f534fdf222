#pragma once

// Closed-form constants and inequality evaluators for conformal and
// topological Laplace spectra.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace confspec::bounds {

/// Volume of the unit round n-sphere: 2 pi^{(n+1)/2} / Gamma((n+1)/2).
double omega_n(int n);

/// n omega_n^{2/n} k^{2/n}; in dimension 2 this is 8 pi k.
double corollary1_bound(int n, int k);

/// n^{n/2} omega_n; the lower bound on lambda_{k+1}^{n/2} - lambda_k^{n/2}.
double gap_bound(int n);

/// Area-normalized eigenvalue of the round 2-sphere: 4 pi [sqrt k]([sqrt k] + 1).
double sphere_normalized_eigenvalue(int k);

/// 8 pi [(genus + 3) / 2].
double yang_yau_bound(int genus);

struct TrendFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  // RMS of the log-log fit
};

/// Least-squares slope of log(lambda_bar_k) against log(k). Needs >= 3 points with k >= 1.
TrendFit korevaar_trend(const std::vector<std::pair<int, double>>& values);

enum class SymmetricSpace { sphere, real_projective, complex_projective, quaternionic_projective, cayley_plane };

/// lambda_1^c for a rank-one symmetric space with its standard conformal class.
/// The parameter is the real dimension n for S^n and RP^n, the projective
/// dimension d for CP^d and HP^d, and ignored for the Cayley plane.
double symmetric_space_lambda1c(SymmetricSpace space, int parameter);

/// Parses "S^n", "RP^n", "CP^d", "HP^d", "CaP2" (e.g. "S^2", "CP^1").
double symmetric_space_lambda1c(const std::string& name);

/// n! in exact integer arithmetic; n <= 20.
std::uint64_t factorial(int n);

struct BoundEntry {
    std::string id;          // stable identifier cited by experiment reports
    std::string expression;  // exact symbolic form
    double value = 0.0;
    std::string note;
};

/// The full constants table.
std::vector<BoundEntry> bound_table();

/// Look up an entry by id; throws ValidationError if unknown.
BoundEntry bound_entry(const std::string& id);

}  // namespace confspec::bounds
