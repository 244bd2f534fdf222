#pragma once

// End-to-end experiments that combine the mesh, spectral, optimizer,
// surgery and bounds modules and produce self-describing reports.

#include "confspec/conformal_opt.hpp"
#include "confspec/json_io.hpp"
#include "confspec/mesh.hpp"
#include "confspec/spectral.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace confspec::experiments {

inline constexpr double kClosedFormTol = 0.01;
inline constexpr double kOptimizerTol = 0.03;
inline constexpr double kSurgeryTol = 0.05;

/// Where an experiment's mesh comes from. Serializes to the report's inputs.
struct MeshSource {
    enum class Kind { icosphere, torus, file };
    Kind kind = Kind::icosphere;
    int subdivisions = 4;             // icosphere
    std::string lattice = "equilateral";  // torus: equilateral | square | rectangular
    double ratio = 1.4;               // rectangular aspect |e2|/|e1|
    int resolution = 32;              // torus grid
    std::filesystem::path path;       // file; a "<path>.json" surgery sidecar is honoured
    /// If positive, the mesh is uniformly scaled to this area.
    double area = 0.0;
    /// If positive, a handle of this radius is attached before use.
    double handle_epsilon = 0.0;
    double handle_length = 0.5;

    static MeshSource icosphere(int subdivisions);
    static MeshSource torus(const std::string& lattice, int resolution, double ratio = 1.4);
    static MeshSource file(const std::filesystem::path& path);

    Lattice torus_lattice() const;
    bool is_sphere() const { return kind == Kind::icosphere && handle_epsilon <= 0.0; }
    int genus() const;

    struct Built {
        TriangleMesh mesh;
        ConformalDensity density;
    };
    /// Builds the mesh and its base density (uniform, or the sidecar's density).
    Built build() const;

    Json to_json() const;
    static MeshSource from_json(const Json& j);
    std::string describe() const;
};

/// One numeric verdict. Every check names the target it compares against:
/// a bounds-table id, or "oracle:<name>" for a computed reference.
struct Check {
    std::string name;
    double value = 0.0;
    double target = 0.0;
    std::string target_id;
    double tolerance = 0.0;
    /// "rel" |v - t| <= tol |t|; "ge" v >= t (1 - tol); "le" v <= t;
    /// "abs" |v - t| <= tol; "true" value != 0.
    std::string comparison = "rel";
    bool pass = false;
    std::string note;

    Json to_json() const;
    static Check from_json(const Json& j);
};

Check make_check(std::string name, double value, double target, std::string target_id, double tolerance,
                 std::string comparison, std::string note = {});

struct ExperimentReport {
    std::string name;
    Json inputs;  // sufficient to re-run: rerun(inputs) recomputes values
    Json values;
    std::vector<Check> checks;
    std::vector<std::string> warnings;
    double wall_seconds = 0.0;
    std::uint64_t seed = 42;

    bool passed() const;
    Json to_json() const;
    static ExperimentReport from_json(const Json& j);
    /// One row per check: name,value,target,target_id,tolerance,comparison,pass.
    void write_csv(std::ostream& out) const;
};

// ---- experiments -----------------------------------------------------------

struct SpectrumRequest {
    MeshSource mesh;
    std::optional<std::filesystem::path> density_path;  // JSON array or whitespace list
    int count = 8;
    double tolerance = kClosedFormTol;
    /// Tolerance for sphere indices k >= 4 (second eigenspace); never below tolerance.
    double upper_tolerance = 0.015;
    SolverOptions solver;
};
ExperimentReport run_spectrum(const SpectrumRequest& request);

struct MaximizeRequest {
    MeshSource mesh;
    int k = 1;
    /// "default" (uniform, stereographic bump, random starts), "uniform",
    /// "gaussian-bump", "stereographic-bump" or "random".
    std::string start = "default";
    double tolerance = kOptimizerTol;
    /// Optional sphere value for the ordering check against the sphere.
    std::optional<double> sphere_value;
    opt::OptimizerOptions options;
};
/// If result_out is given it receives the full optimizer result (history export).
ExperimentReport run_maximize(const MaximizeRequest& request,
                              std::optional<opt::OptimizationResult>* result_out = nullptr);

struct GapRequest {
    MeshSource mesh;
    int k = 1;
    double tolerance = kSurgeryTol;
    /// On a sphere with k = 1, also consider two spheres glued at this radius
    /// as a lambda_2 candidate (0 disables).
    double glue_epsilon = 0.05;
    opt::OptimizerOptions options;
};
ExperimentReport run_gap(const GapRequest& request);

struct GlueSweepRequest {
    /// "sphere-sphere", "sphere-torus" or "collapse".
    std::string family = "sphere-sphere";
    int subdivisions = 4;
    int torus_resolution = 32;
    std::vector<double> epsilons = {0.2, 0.1, 0.05};
    /// Collapse only: neck radius (the sweep runs over the guest scale).
    double glue_epsilon = 0.1;
    int count = 6;
    double tolerance = kSurgeryTol;
    SolverOptions solver;
};
ExperimentReport run_glue_sweep(const GlueSweepRequest& request);

struct HandleRequest {
    MeshSource mesh = MeshSource::torus("equilateral", 32);
    std::vector<double> epsilons = {0.2, 0.1, 0.05, 0.02};
    double length = 0.5;
    int window = 4;  // compared indices 1..window
    double tolerance = kSurgeryTol;
    /// Attachment vertices; -1 picks vertex 0 and the vertex farthest from it.
    int vertex_a = -1;
    int vertex_b = -1;
    /// Optional path to save the surgery at the smallest radius.
    std::optional<std::filesystem::path> save_path;
    SolverOptions solver;
};
ExperimentReport run_handle(const HandleRequest& request);

ExperimentReport run_bounds(double tolerance = 1e-12);

/// Recomputes a report from its inputs block.
ExperimentReport rerun(const Json& inputs);

/// Re-runs a saved report and checks every value agrees within tolerance
/// (relative, on numeric leaves of "values"). The returned report carries a
/// failing check per disagreeing leaf plus the re-run's own checks.
ExperimentReport reproduce(const ExperimentReport& saved, double tolerance = 1e-6);

/// Maps experiment-level request fields to and from the inputs block.
Json to_json(const SpectrumRequest& r);
Json to_json(const MaximizeRequest& r);
Json to_json(const GapRequest& r);
Json to_json(const GlueSweepRequest& r);
Json to_json(const HandleRequest& r);

}  // namespace confspec::experiments
