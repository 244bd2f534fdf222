#pragma once

// Maximization of the area-normalized eigenvalue lambda_bar_k over conformal
// densities on a fixed mesh.

#include "confspec/json_io.hpp"
#include "confspec/mesh.hpp"
#include "confspec/spectral.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace confspec::opt {

enum class Status { converged, iteration_cap, stalled };
std::string to_string(Status s);

/// Hardware concurrency, capped by the CONFSPEC_THREADS environment variable.
int default_thread_count();

struct OptimizerOptions {
    int max_iterations = 200;        // per restart
    double initial_step = 0.2;       // max |change of log rho| of the first trial step
    double backtracking = 0.5;       // step factor after a rejected trial
    double growth = 1.25;            // step factor after an accepted trial
    double max_step = 1.0;
    double temperature = 1e-2;       // soft-min temperature relative to lambda_bar_k at restart start
    double density_floor = kDensityFloor;
    int restarts = 4;                // uniform, stereographic bump, then random starts
    std::uint64_t seed = 42;
    int cluster_margin = 6;          // eigenvalues above k inside the soft-min window
    double min_step = 1e-10;
    int stall_limit = 50;            // consecutive rejections before giving up
    double gradient_tol = 1e-9;      // converged when the projected gradient norm falls below
    double stagnation_tol = 1e-9;    // or the smoothed objective gains less than this (relative) over 20 accepts
    int threads = 0;                 // concurrent restarts; 0 = default_thread_count()
    SolverOptions solver;

    void validate() const;
};

struct HistoryEntry {
    int restart = 0;
    int iteration = 0;
    double lambda_bar = 0.0;  // lambda_bar_k after the accepted step
    double smoothed = 0.0;    // soft-min objective after the accepted step
    double step = 0.0;
    int cluster_size = 1;
};

struct RestartSummary {
    std::string label;
    double initial_value = 0.0;
    double best_value = 0.0;
    Status status = Status::converged;
    int iterations = 0;
    double final_gradient_norm = 0.0;
};

struct OptimizationResult {
    ConformalDensity best_density;
    double best_value = 0.0;
    int k = 1;
    std::vector<HistoryEntry> history;  // accepted steps only, all restarts
    Status status = Status::converged;  // of the restart that produced the best value
    int best_restart = 0;
    std::vector<RestartSummary> restarts;
};

/// Soft-min of values[k..] over the window: -T log sum exp(-v_j / T).
double soft_min(std::span<const double> values, double temperature);

/// State of one ascent: current density, its spectrum and the soft-min data.
struct AscentState {
    int k = 1;
    double temperature = 0.0;
    std::vector<double> log_rho;
    SpectrumReport report;
    double smoothed = 0.0;
    std::vector<double> weights;    // soft-min weights of lambda_bar_k .. lambda_bar_{k+margin}
    std::vector<double> direction;  // Riesz representative of the gradient w.r.t. log rho
    std::vector<double> gradient;   // d smoothed / d log rho_i
    double gradient_norm = 0.0;     // Euclidean norm of gradient projected on the mass constraint

    double lambda_bar() const { return report.normalized[k]; }
    int cluster_size() const { return static_cast<int>(report.cluster_of(k).size()); }
};

/// Evaluates spectrum, soft-min and gradient at a density (rescaled to total mass 1).
AscentState make_state(const TriangleMesh& mesh, const StiffnessOperator& stiffness,
                       const ConformalDensity& density, int k, double temperature,
                       const OptimizerOptions& options);

struct StepOutcome {
    bool accepted = false;
    double step = 0.0;
    double predicted_change = 0.0;  // first-order prediction of the smoothed change
    double actual_change = 0.0;
};

/// Tries log rho <- log rho + step * d / max|d| followed by exact renormalization
/// to total mass 1. On acceptance (smoothed objective increased) the state is
/// replaced. A custom direction overrides the state's gradient direction.
StepOutcome ascent_step(AscentState& state, const TriangleMesh& mesh, const StiffnessOperator& stiffness,
                        double step, const OptimizerOptions& options,
                        const std::vector<double>* direction = nullptr);

/// Multi-restart maximization of lambda_bar_k. If initial_density is given it
/// replaces the default restart list (a single start).
OptimizationResult maximize_lambda_k(const TriangleMesh& mesh, int k, const OptimizerOptions& options,
                                     const std::optional<ConformalDensity>& initial_density = std::nullopt);

struct Corollary1Report {
    int k = 1;
    double best_value = 0.0;
    double bound = 0.0;      // 8 pi k
    double ratio = 0.0;      // best_value / bound
    double slack = 0.03;
    bool pass = false;       // best_value >= bound * (1 - slack)
    std::optional<double> sphere_value;
    std::optional<bool> sphere_order_pass;  // best_value >= sphere_value * (1 - slack)
};

Corollary1Report check_corollary1(const OptimizationResult& result, int k, double slack = 0.03,
                                  std::optional<double> sphere_value = std::nullopt);

Json to_json(const OptimizationResult& result, bool include_density = false);
Json to_json(const Corollary1Report& report);
/// iteration,lambda_bar,step (plus restart, smoothed, cluster_size).
void write_history_csv(const OptimizationResult& result, std::ostream& out);

// ---- starting densities ----------------------------------------------------

/// Möbius-dilation factor pulled back to a unit-sphere mesh: with x the
/// stereographic coordinate from the point opposite to pole,
/// rho = (t (1 + |x|^2) / (1 + t^2 |x|^2))^2. Uses vertex directions.
ConformalDensity mobius_sphere_density(const TriangleMesh& sphere, const Vec3& pole, double t);

/// Generic bump: the same profile driven by graph-geodesic distance from center,
/// mapped to a polar angle pi * d / max d.
ConformalDensity stereographic_bump_density(const TriangleMesh& mesh, int center, double t);

/// 1 + amplitude * exp(-d^2 / (2 width^2)) in graph-geodesic distance d.
ConformalDensity gaussian_bump_density(const TriangleMesh& mesh, int center, double amplitude, double width);

/// exp(sigma * z) with z standard normal per vertex, smoothed by neighbour
/// averaging of log rho (smoothing passes), seeded.
ConformalDensity random_density(const TriangleMesh& mesh, std::uint64_t seed, double sigma = 0.5,
                                int smoothing = 3);

/// Vertex whose position is farthest along +z (a stable pole for sphere meshes).
int top_vertex(const TriangleMesh& mesh);

}  // namespace confspec::opt
