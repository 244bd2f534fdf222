#include "confspec/experiments.hpp"

#include "confspec/bounds.hpp"
#include "confspec/constructions.hpp"
#include "confspec/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace confspec::experiments {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kFourPi = 4.0 * kPi;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double rel_error(double value, double target) {
    return std::abs(value - target) / std::abs(target);
}

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

Json solver_json(const SolverOptions& s) {
    return {{"tolerance", s.tolerance},
            {"max_iterations", s.max_iterations},
            {"seed", s.seed},
            {"dense_threshold", s.dense_threshold},
            {"cluster_tol", s.cluster_tol},
            {"shift", s.shift}};
}

SolverOptions solver_from_json(const Json& j) {
    SolverOptions s;
    if (j.is_null()) return s;
    s.tolerance = j.value("tolerance", s.tolerance);
    s.max_iterations = j.value("max_iterations", s.max_iterations);
    s.seed = j.value("seed", s.seed);
    s.dense_threshold = j.value("dense_threshold", s.dense_threshold);
    s.cluster_tol = j.value("cluster_tol", s.cluster_tol);
    s.shift = j.value("shift", s.shift);
    return s;
}

Json optimizer_json(const opt::OptimizerOptions& o) {
    return {{"max_iterations", o.max_iterations},
            {"initial_step", o.initial_step},
            {"backtracking", o.backtracking},
            {"growth", o.growth},
            {"max_step", o.max_step},
            {"temperature", o.temperature},
            {"density_floor", o.density_floor},
            {"restarts", o.restarts},
            {"seed", o.seed},
            {"cluster_margin", o.cluster_margin},
            {"min_step", o.min_step},
            {"stall_limit", o.stall_limit},
            {"gradient_tol", o.gradient_tol},
            {"stagnation_tol", o.stagnation_tol},
            {"solver", solver_json(o.solver)}};
}

opt::OptimizerOptions optimizer_from_json(const Json& j) {
    opt::OptimizerOptions o;
    if (j.is_null()) return o;
    o.max_iterations = j.value("max_iterations", o.max_iterations);
    o.initial_step = j.value("initial_step", o.initial_step);
    o.backtracking = j.value("backtracking", o.backtracking);
    o.growth = j.value("growth", o.growth);
    o.max_step = j.value("max_step", o.max_step);
    o.temperature = j.value("temperature", o.temperature);
    o.density_floor = j.value("density_floor", o.density_floor);
    o.restarts = j.value("restarts", o.restarts);
    o.seed = j.value("seed", o.seed);
    o.cluster_margin = j.value("cluster_margin", o.cluster_margin);
    o.min_step = j.value("min_step", o.min_step);
    o.stall_limit = j.value("stall_limit", o.stall_limit);
    o.gradient_tol = j.value("gradient_tol", o.gradient_tol);
    o.stagnation_tol = j.value("stagnation_tol", o.stagnation_tol);
    if (j.contains("solver")) o.solver = solver_from_json(j["solver"]);
    return o;
}

ConformalDensity read_density_file(const std::filesystem::path& path, int expected) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open density file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    std::vector<double> values;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && (text[first] == '[' || text[first] == '{')) {
        try {
            const Json j = Json::parse(text);
            values = (j.is_object() ? j.at("density") : j).get<std::vector<double>>();
        } catch (const Json::exception& e) {
            throw ValidationError("density file " + path.string() + ": " + e.what());
        }
    } else {
        std::istringstream s(text);
        double v;
        while (s >> v) values.push_back(v);
        if (!s.eof()) throw ValidationError("density file " + path.string() + " has a non-numeric entry");
    }
    if (static_cast<int>(values.size()) != expected)
        throw ValidationError("density file " + path.string() + " has " + std::to_string(values.size()) +
                              " values, mesh has " + std::to_string(expected) + " vertices");
    return ConformalDensity(std::move(values));
}

int farthest_vertex(const TriangleMesh& mesh, int from) {
    const auto d = geodesic_distances(mesh, from);
    return static_cast<int>(std::max_element(d.begin(), d.end()) - d.begin());
}

TriangleMesh scaled_to_area(const TriangleMesh& mesh, double area) {
    return scaled_mesh(mesh, std::sqrt(area / mesh.total_area()));
}

/// Raw (area-dependent) eigenvalues 0..count.
std::vector<double> raw_spectrum(const TriangleMesh& mesh, const ConformalDensity& density, int count,
                                 const SolverOptions& solver) {
    return mesh_spectrum(mesh, density, count, false, solver).eigenvalues;
}

/// Monotone decrease of a sequence of errors (ties allowed to 1e-12).
bool decreasing(const std::vector<double>& errors) {
    for (std::size_t i = 1; i < errors.size(); ++i)
        if (errors[i] > errors[i - 1] + 1e-12) return false;
    return true;
}

void validate_sweep(const std::vector<double>& eps, const std::string& what) {
    if (eps.empty()) throw ValidationError(what + " sweep is empty");
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (!(eps[i] > 0.0)) throw ValidationError(what + " values must be positive");
        if (i > 0 && !(eps[i] < eps[i - 1])) throw ValidationError(what + " values must be strictly decreasing");
    }
}

void add_sweep_checks(ExperimentReport& report, const std::string& label, const std::vector<double>& errors,
                      double tolerance, const std::string& target_id, double target) {
    const double mono = decreasing(errors) ? 1.0 : 0.0;
    report.checks.push_back(make_check(label + " error decreasing along sweep", mono, 1.0, target_id, 0.0, "true"));
    report.checks.push_back(make_check(label + " error at smallest radius", errors.back(), tolerance, target_id, 0.0,
                                       "le", "target value " + fmt(target)));
}

}  // namespace

// ---- MeshSource ------------------------------------------------------------

MeshSource MeshSource::icosphere(int subdivisions) {
    MeshSource s;
    s.kind = Kind::icosphere;
    s.subdivisions = subdivisions;
    return s;
}

MeshSource MeshSource::torus(const std::string& lattice, int resolution, double ratio) {
    MeshSource s;
    s.kind = Kind::torus;
    s.lattice = lattice;
    s.resolution = resolution;
    s.ratio = ratio;
    return s;
}

MeshSource MeshSource::file(const std::filesystem::path& path) {
    MeshSource s;
    s.kind = Kind::file;
    s.path = path;
    return s;
}

Lattice MeshSource::torus_lattice() const {
    if (lattice == "equilateral") return Lattice::equilateral();
    if (lattice == "square") return Lattice::square();
    if (lattice == "rectangular") return Lattice::rectangular(ratio);
    throw ValidationError("unknown lattice '" + lattice + "' (equilateral, square, rectangular)");
}

int MeshSource::genus() const { return build().mesh.genus(); }

MeshSource::Built MeshSource::build() const {
    std::optional<TriangleMesh> mesh;
    std::optional<ConformalDensity> density;
    switch (kind) {
        case Kind::icosphere:
            mesh.emplace(build_icosphere(subdivisions));
            break;
        case Kind::torus:
            mesh.emplace(build_flat_torus(torus_lattice(), resolution));
            break;
        case Kind::file:
            if (std::filesystem::exists(path.string() + ".json")) {
                auto s = constructions::load_surgery(path);
                mesh.emplace(std::move(s.mesh));
                density.emplace(std::move(s.density));
            } else {
                mesh.emplace(load_mesh(path));
            }
            break;
    }
    if (!density) density.emplace(ConformalDensity::uniform(mesh->vertex_count()));
    // Surgery radii are in units of a unit sphere, so a handle implies area 4 pi
    // unless an explicit area was requested.
    const double target_area = area > 0.0 ? area : (handle_epsilon > 0.0 ? kFourPi : 0.0);
    if (target_area > 0.0) mesh.emplace(scaled_to_area(*mesh, target_area));
    if (handle_epsilon > 0.0) {
        const int b = farthest_vertex(*mesh, 0);
        auto s = constructions::attach_handle(*mesh, *density, 0, b, handle_epsilon, handle_length);
        return {std::move(s.mesh), std::move(s.density)};
    }
    return {std::move(*mesh), std::move(*density)};
}

Json MeshSource::to_json() const {
    Json j;
    switch (kind) {
        case Kind::icosphere:
            j = {{"kind", "icosphere"}, {"subdivisions", subdivisions}};
            break;
        case Kind::torus:
            j = {{"kind", "torus"}, {"lattice", lattice}, {"resolution", resolution}};
            if (lattice == "rectangular") j["ratio"] = ratio;
            break;
        case Kind::file:
            j = {{"kind", "file"}, {"path", path.string()}};
            break;
    }
    if (area > 0.0) j["area"] = area;
    if (handle_epsilon > 0.0) {
        j["handle_epsilon"] = handle_epsilon;
        j["handle_length"] = handle_length;
    }
    return j;
}

MeshSource MeshSource::from_json(const Json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    MeshSource s;
    if (kind == "icosphere") {
        s = icosphere(j.value("subdivisions", 4));
    } else if (kind == "torus") {
        s = torus(j.value("lattice", std::string("equilateral")), j.value("resolution", 32), j.value("ratio", 1.4));
    } else if (kind == "file") {
        s = file(j.at("path").get<std::string>());
    } else {
        throw ValidationError("unknown mesh kind '" + kind + "'");
    }
    s.area = j.value("area", 0.0);
    s.handle_epsilon = j.value("handle_epsilon", 0.0);
    s.handle_length = j.value("handle_length", 0.5);
    return s;
}

std::string MeshSource::describe() const {
    std::string d;
    switch (kind) {
        case Kind::icosphere:
            d = "icosphere(" + std::to_string(subdivisions) + ")";
            break;
        case Kind::torus:
            d = lattice + " torus(" + std::to_string(resolution) + ")";
            break;
        case Kind::file:
            d = path.string();
            break;
    }
    if (handle_epsilon > 0.0) d += " + handle(eps " + fmt(handle_epsilon) + ", l " + fmt(handle_length) + ")";
    return d;
}

// ---- checks and reports ----------------------------------------------------

Check make_check(std::string name, double value, double target, std::string target_id, double tolerance,
                 std::string comparison, std::string note) {
    Check c{std::move(name), value, target, std::move(target_id), tolerance, std::move(comparison), false,
            std::move(note)};
    if (c.target_id.empty()) throw ValidationError("check '" + c.name + "' has no target id");
    if (!std::isfinite(value)) {
        c.pass = false;
    } else if (c.comparison == "rel") {
        c.pass = rel_error(value, target) <= tolerance;
    } else if (c.comparison == "ge") {
        c.pass = value >= target * (1.0 - tolerance);
    } else if (c.comparison == "le") {
        c.pass = value <= target;
    } else if (c.comparison == "abs") {
        c.pass = std::abs(value - target) <= tolerance;
    } else if (c.comparison == "true") {
        c.pass = value != 0.0;
    } else {
        throw ValidationError("unknown comparison '" + c.comparison + "'");
    }
    return c;
}

Json Check::to_json() const {
    Json j = {{"name", name},         {"value", value},           {"target", target}, {"target_id", target_id},
              {"tolerance", tolerance}, {"comparison", comparison}, {"pass", pass}};
    if (!note.empty()) j["note"] = note;
    return j;
}

Check Check::from_json(const Json& j) {
    Check c;
    c.name = j.at("name").get<std::string>();
    c.value = j.at("value").get<double>();
    c.target = j.at("target").get<double>();
    c.target_id = j.at("target_id").get<std::string>();
    c.tolerance = j.at("tolerance").get<double>();
    c.comparison = j.at("comparison").get<std::string>();
    c.pass = j.at("pass").get<bool>();
    c.note = j.value("note", std::string());
    return c;
}

bool ExperimentReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

Json ExperimentReport::to_json() const {
    Json checks_json = Json::array();
    for (const auto& c : checks) checks_json.push_back(c.to_json());
    return {{"experiment", name}, {"inputs", inputs},          {"values", values},
            {"checks", checks_json}, {"pass", passed()},      {"warnings", warnings},
            {"wall_seconds", wall_seconds}, {"seed", seed}};
}

ExperimentReport ExperimentReport::from_json(const Json& j) {
    ExperimentReport r;
    r.name = j.at("experiment").get<std::string>();
    r.inputs = j.at("inputs");
    r.values = j.value("values", Json::object());
    for (const auto& c : j.value("checks", Json::array())) r.checks.push_back(Check::from_json(c));
    r.warnings = j.value("warnings", std::vector<std::string>{});
    r.wall_seconds = j.value("wall_seconds", 0.0);
    r.seed = j.value("seed", std::uint64_t{42});
    return r;
}

void ExperimentReport::write_csv(std::ostream& out) const {
    out << "name,value,target,target_id,tolerance,comparison,pass\n";
    out.precision(12);
    for (const auto& c : checks) {
        std::string name = c.name;
        std::replace(name.begin(), name.end(), ',', ';');
        out << name << ',' << c.value << ',' << c.target << ',' << c.target_id << ',' << c.tolerance << ','
            << c.comparison << ',' << (c.pass ? "true" : "false") << '\n';
    }
}

// ---- request serialization -------------------------------------------------

Json to_json(const SpectrumRequest& r) {
    Json j = {{"experiment", "spectrum"},       {"mesh", r.mesh.to_json()},   {"count", r.count},
              {"tolerance", r.tolerance},       {"upper_tolerance", r.upper_tolerance},
              {"solver", solver_json(r.solver)}};
    if (r.density_path) j["density_path"] = r.density_path->string();
    return j;
}

Json to_json(const MaximizeRequest& r) {
    Json j = {{"experiment", "maximize"}, {"mesh", r.mesh.to_json()}, {"k", r.k},
              {"start", r.start},         {"tolerance", r.tolerance}, {"options", optimizer_json(r.options)}};
    if (r.sphere_value) j["sphere_value"] = *r.sphere_value;
    return j;
}

Json to_json(const GapRequest& r) {
    return {{"experiment", "gap"},          {"mesh", r.mesh.to_json()},
            {"k", r.k},                     {"tolerance", r.tolerance},
            {"glue_epsilon", r.glue_epsilon}, {"options", optimizer_json(r.options)}};
}

Json to_json(const GlueSweepRequest& r) {
    return {{"experiment", "glue"},       {"family", r.family},
            {"subdivisions", r.subdivisions}, {"torus_resolution", r.torus_resolution},
            {"epsilons", r.epsilons},     {"glue_epsilon", r.glue_epsilon},
            {"count", r.count},           {"tolerance", r.tolerance},
            {"solver", solver_json(r.solver)}};
}

Json to_json(const HandleRequest& r) {
    Json j = {{"experiment", "handle"}, {"mesh", r.mesh.to_json()},   {"epsilons", r.epsilons},
              {"length", r.length},     {"window", r.window},         {"tolerance", r.tolerance},
              {"vertex_a", r.vertex_a}, {"vertex_b", r.vertex_b},     {"solver", solver_json(r.solver)}};
    if (r.save_path) j["save_path"] = r.save_path->string();
    return j;
}

// ---- spectrum --------------------------------------------------------------

ExperimentReport run_spectrum(const SpectrumRequest& request) {
    const auto t0 = Clock::now();
    ExperimentReport report;
    report.name = "spectrum";
    report.inputs = to_json(request);
    report.seed = request.solver.seed;

    auto built = request.mesh.build();
    if (request.count < 1 || request.count > built.mesh.vertex_count() - 1)
        throw ValidationError("count must lie in [1, " + std::to_string(built.mesh.vertex_count() - 1) + "]");
    ConformalDensity density = request.density_path
                                   ? read_density_file(*request.density_path, built.mesh.vertex_count())
                                   : std::move(built.density);
    const auto spectrum = mesh_spectrum(built.mesh, density, request.count, false, request.solver);
    report.values = confspec::to_json(spectrum);
    report.values["genus"] = built.mesh.genus();
    report.values["vertices"] = built.mesh.vertex_count();
    report.values["mesh"] = request.mesh.describe();
    report.warnings = spectrum.warnings;

    const auto& lb = spectrum.normalized;
    report.checks.push_back(make_check("lambda_bar_0 is a zero mode", lb[0], 0.0, "oracle:constant-mode",
                                       kZeroModeTol * lb[1], "abs"));

    const bool uniform = !request.density_path;
    const double upper = std::max(request.upper_tolerance, request.tolerance);
    if (uniform && request.mesh.is_sphere()) {
        Json targets = Json::array();
        for (int k = 1; k <= request.count; ++k) {
            const auto entry = bounds::bound_entry("sphere/" + std::to_string(k));
            targets.push_back(entry.value);
            report.checks.push_back(make_check("lambda_bar_" + std::to_string(k), lb[k], entry.value, entry.id,
                                               k < 4 ? request.tolerance : upper, "rel"));
        }
        report.values["targets"] = targets;
    } else if (uniform && request.mesh.kind == MeshSource::Kind::torus && request.mesh.handle_epsilon <= 0.0) {
        const Lattice lattice = request.mesh.torus_lattice();
        const auto exact = flat_torus_closed_form(lattice, request.count);
        report.values["targets"] = exact;
        for (int k = 1; k <= request.count; ++k) {
            std::string id = "oracle:flat-torus-closed-form";
            double target = exact[k];
            if (std::abs(exact[k] - exact[1]) <= 1e-12 * exact[1]) {
                if (request.mesh.lattice == "equilateral") id = "nadirashvili";
                if (request.mesh.lattice == "square") id = "square_torus";
                if (id != "oracle:flat-torus-closed-form") target = bounds::bound_entry(id).value;
            }
            report.checks.push_back(
                make_check("lambda_bar_" + std::to_string(k), lb[k], target, id, request.tolerance, "rel"));
        }
        int multiplicity = 0;
        for (std::size_t i = 1; i < exact.size(); ++i)
            if (std::abs(exact[i] - exact[1]) <= 1e-12 * exact[1]) ++multiplicity;
        if (multiplicity <= request.count) {
            report.checks.push_back(make_check("lambda_bar_1 cluster size",
                                               static_cast<double>(spectrum.cluster_of(1).size()),
                                               static_cast<double>(multiplicity), "oracle:flat-torus-closed-form",
                                               0.0, "abs"));
        }
    }
    report.wall_seconds = seconds_since(t0);
    return report;
}

// ---- maximize --------------------------------------------------------------

ExperimentReport run_maximize(const MaximizeRequest& request, std::optional<opt::OptimizationResult>* result_out) {
    const auto t0 = Clock::now();
    request.options.validate();
    if (request.k < 1) throw ValidationError("k must be >= 1");
    ExperimentReport report;
    report.name = "maximize";
    report.inputs = to_json(request);
    report.seed = request.options.seed;

    auto built = request.mesh.build();
    const TriangleMesh& mesh = built.mesh;
    const int k = request.k;

    std::optional<ConformalDensity> start;
    const int pole = opt::top_vertex(mesh);
    if (request.start == "uniform") {
        start = built.density;
    } else if (request.start == "gaussian-bump") {
        start = opt::gaussian_bump_density(mesh, pole, 10.0, 0.3);
    } else if (request.start == "stereographic-bump") {
        start = opt::stereographic_bump_density(mesh, pole, 3.0);
    } else if (request.start == "random") {
        start = opt::random_density(mesh, request.options.seed);
    } else if (request.start != "default") {
        throw ValidationError("unknown start '" + request.start +
                              "' (default, uniform, gaussian-bump, stereographic-bump, random)");
    }

    const auto stiffness = assemble_stiffness(mesh);
    const auto uniform_state = opt::make_state(mesh, stiffness, built.density, k, 0.0, request.options);
    const double uniform_value = uniform_state.lambda_bar();

    const auto result = opt::maximize_lambda_k(mesh, k, request.options, start);

    report.values = opt::to_json(result, false);
    report.values["mesh"] = request.mesh.describe();
    report.values["genus"] = mesh.genus();
    report.values["uniform_value"] = uniform_value;
    report.values["uniform_gradient_norm"] = uniform_state.gradient_norm;

    const auto bound = bounds::bound_entry("corollary1/2/" + std::to_string(k));
    report.checks.push_back(
        make_check("best lambda_bar_k above 8 pi k", result.best_value, bound.value, bound.id, request.tolerance, "ge"));
    if (request.start == "default" || request.start == "uniform") {
        report.checks.push_back(make_check("best not below the uniform density", result.best_value, uniform_value,
                                           "oracle:uniform-density", 1e-9, "ge"));
    }
    if (k == 1 && request.mesh.is_sphere()) {
        const auto hersch = bounds::bound_entry("hersch");
        report.checks.push_back(
            make_check("best lambda_bar_1 near 8 pi", result.best_value, hersch.value, hersch.id, request.tolerance, "rel"));
        report.checks.push_back(make_check("uniform density is stationary", uniform_state.gradient_norm, 1e-4,
                                           "oracle:uniform-density", 0.0, "le",
                                           "Euclidean norm of the projected soft-min gradient"));
    }
    if (k == 1 && request.mesh.kind == MeshSource::Kind::torus && request.mesh.handle_epsilon <= 0.0) {
        if (request.mesh.lattice == "equilateral") {
            const auto nad = bounds::bound_entry("nadirashvili");
            report.checks.push_back(
                make_check("best lambda_bar_1 near 8 pi^2/sqrt 3", result.best_value, nad.value, nad.id,
                           request.tolerance, "rel"));
        } else if (request.mesh.lattice == "rectangular" && request.mesh.ratio != 1.0) {
            report.checks.push_back(make_check("optimized beats uniform by more than 1%", result.best_value,
                                               uniform_value * 1.01, "oracle:uniform-density", 0.0, "ge",
                                               "exploratory: elongated flat metrics are not conformal maximizers"));
        }
    }
    if (request.sphere_value) {
        report.checks.push_back(make_check("best not below the sphere value", result.best_value, *request.sphere_value,
                                           "oracle:sphere-run", request.tolerance, "ge"));
    }
    if (result_out) *result_out = result;
    report.wall_seconds = seconds_since(t0);
    return report;
}

// ---- gap -------------------------------------------------------------------

ExperimentReport run_gap(const GapRequest& request) {
    const auto t0 = Clock::now();
    request.options.validate();
    if (request.k < 1) throw ValidationError("k must be >= 1");
    ExperimentReport report;
    report.name = "gap";
    report.inputs = to_json(request);
    report.seed = request.options.seed;

    auto built = request.mesh.build();
    const int needed = request.k + 1 + request.options.cluster_margin;
    if (needed > built.mesh.vertex_count() - 1)
        throw ResourceLimitError("gap at k = " + std::to_string(request.k) + " needs " + std::to_string(needed) +
                                 " eigenvalues; the mesh supports at most " +
                                 std::to_string(built.mesh.vertex_count() - 1));

    const auto lower = opt::maximize_lambda_k(built.mesh, request.k, request.options);
    const auto upper = opt::maximize_lambda_k(built.mesh, request.k + 1, request.options);
    double upper_value = upper.best_value;
    std::string upper_source = "optimizer";

    if (request.k == 1 && request.mesh.is_sphere() && request.glue_epsilon > 0.0) {
        const auto sphere = build_icosphere(request.mesh.subdivisions);
        const int pole = opt::top_vertex(sphere);
        const auto uniform = ConformalDensity::uniform(sphere.vertex_count());
        const auto glued = constructions::glue_surfaces(
            {sphere, uniform, pole, sphere, uniform, pole, request.glue_epsilon, constructions::kDefaultRingVertices});
        const double glued_value = mesh_spectrum(glued.mesh, glued.density, 2, false, request.options.solver).normalized[2];
        report.values["glued_lambda_bar_2"] = glued_value;
        if (glued_value > upper_value) {
            upper_value = glued_value;
            upper_source = "glued spheres";
        }
        report.warnings.insert(report.warnings.end(), glued.warnings.begin(), glued.warnings.end());
    }

    const double gap = upper_value - lower.best_value;
    report.values["k"] = request.k;
    report.values["lambda_bar_k_max"] = lower.best_value;
    report.values["lambda_bar_k1_max_optimizer"] = upper.best_value;
    report.values["lambda_bar_k1_max"] = upper_value;
    report.values["lambda_bar_k1_source"] = upper_source;
    report.values["gap"] = gap;
    report.values["lower_bound_caveat"] =
        "discrete optima are lower bounds of the true suprema, so the gap estimate is not certified";

    const auto bound = bounds::bound_entry("gap/2");
    report.checks.push_back(make_check("consecutive maxima differ by at least 8 pi", gap, bound.value, bound.id,
                                       request.tolerance, "ge"));
    report.wall_seconds = seconds_since(t0);
    return report;
}

// ---- glue sweeps -----------------------------------------------------------

ExperimentReport run_glue_sweep(const GlueSweepRequest& request) {
    const auto t0 = Clock::now();
    validate_sweep(request.epsilons, request.family == "collapse" ? "collapse scale" : "glue radius");
    if (request.count < 2) throw ValidationError("count must be >= 2");
    ExperimentReport report;
    report.name = "glue";
    report.inputs = to_json(request);
    report.seed = request.solver.seed;

    const auto sphere = build_icosphere(request.subdivisions);
    const int pole = opt::top_vertex(sphere);
    const auto sphere_rho = ConformalDensity::uniform(sphere.vertex_count());
    const auto sphere_raw = raw_spectrum(sphere, sphere_rho, request.count, request.solver);
    Json rows = Json::array();

    if (request.family == "sphere-sphere" || request.family == "sphere-torus") {
        const bool torus = request.family == "sphere-torus";
        const TriangleMesh guest =
            torus ? scaled_to_area(build_flat_torus(Lattice::equilateral(), request.torus_resolution), kFourPi)
                  : sphere;
        const int guest_center = torus ? 0 : pole;
        const auto guest_rho = ConformalDensity::uniform(guest.vertex_count());
        const auto guest_raw = torus ? raw_spectrum(guest, guest_rho, request.count, request.solver) : sphere_raw;
        const auto oracle = constructions::union_spectrum_oracle(sphere_raw, guest_raw, request.count);
        report.values["union_oracle"] = oracle;

        // Indices whose limit is positive are compared relatively; limits at zero
        // are measured against the first positive limit.
        double first_positive = 0.0;
        for (double v : oracle)
            if (v > 1e-8) {
                first_positive = v;
                break;
            }

        std::vector<double> headline;
        const auto target = bounds::bound_entry("sphere_lambda2c");
        for (double eps : request.epsilons) {
            const auto glued = constructions::glue_surfaces(
                {sphere, sphere_rho, pole, guest, guest_rho, guest_center, eps, constructions::kDefaultRingVertices});
            const auto spec = mesh_spectrum(glued.mesh, glued.density, request.count, false, request.solver);
            double max_rel = 0.0, zero_err = 0.0;
            std::vector<double> errors;
            for (int i = 1; i <= request.count; ++i) {
                const double e = oracle[i] > 1e-8 ? rel_error(spec.eigenvalues[i], oracle[i])
                                                  : std::abs(spec.eigenvalues[i] - oracle[i]) / first_positive;
                errors.push_back(e);
                if (oracle[i] > 1e-8) max_rel = std::max(max_rel, e);
                else zero_err = std::max(zero_err, e);
            }
            Json row = {{"epsilon", eps},
                        {"genus", glued.genus},
                        {"eigenvalues", spec.eigenvalues},
                        {"normalized", spec.normalized},
                        {"errors", errors},
                        {"max_relative_error", max_rel},
                        {"zero_limit_error", zero_err},
                        {"area", glued.mesh.total_area()}};
            if (!torus) {
                const double err16 = rel_error(spec.normalized[2], target.value);
                row["lambda_bar_2"] = spec.normalized[2];
                row["error_vs_16pi"] = err16;
                headline.push_back(err16);
            } else {
                headline.push_back(max_rel);
            }
            for (const auto& w : glued.warnings) report.warnings.push_back("eps " + fmt(eps) + ": " + w);
            rows.push_back(row);
            report.checks.push_back(make_check("genus at eps " + fmt(eps), glued.genus, torus ? 1.0 : 0.0,
                                               "oracle:euler-characteristic", 0.0, "abs"));
        }
        if (torus) add_sweep_checks(report, "max relative spectrum", headline, request.tolerance, "oracle:union-spectrum", 0.0);
        else add_sweep_checks(report, "lambda_bar_2 vs 16 pi", headline, request.tolerance, target.id, target.value);
    } else if (request.family == "collapse") {
        const auto glued = constructions::glue_surfaces({sphere, sphere_rho, pole, sphere, sphere_rho, pole,
                                                          request.glue_epsilon, constructions::kDefaultRingVertices});
        const int window = std::min(request.count, 5);
        std::vector<double> headline;
        for (double eps : request.epsilons) {
            const auto density = constructions::collapse_component(glued, 1, eps);
            const auto spec = mesh_spectrum(glued.mesh, density, window, false, request.solver);
            std::vector<double> errors;
            double max_rel = 0.0;
            for (int i = 1; i <= window; ++i) {
                errors.push_back(rel_error(spec.eigenvalues[i], sphere_raw[i]));
                max_rel = std::max(max_rel, errors.back());
            }
            rows.push_back({{"scale", eps}, {"eigenvalues", spec.eigenvalues}, {"errors", errors},
                            {"max_relative_error", max_rel}});
            headline.push_back(max_rel);
        }
        report.values["host_eigenvalues"] = std::vector<double>(sphere_raw.begin(), sphere_raw.begin() + window + 1);
        report.warnings.insert(report.warnings.end(), glued.warnings.begin(), glued.warnings.end());
        add_sweep_checks(report, "collapsed spectrum vs host", headline, request.tolerance, "oracle:host-spectrum", 0.0);
    } else {
        throw ValidationError("unknown glue family '" + request.family + "' (sphere-sphere, sphere-torus, collapse)");
    }
    report.values["sweep"] = rows;
    report.wall_seconds = seconds_since(t0);
    return report;
}

// ---- handle ----------------------------------------------------------------

ExperimentReport run_handle(const HandleRequest& request) {
    const auto t0 = Clock::now();
    validate_sweep(request.epsilons, "handle radius");
    if (!(request.length > 0.0)) throw ValidationError("handle length must be positive");
    if (request.window < 1) throw ValidationError("window must be >= 1");
    ExperimentReport report;
    report.name = "handle";
    report.inputs = to_json(request);
    report.seed = request.solver.seed;

    MeshSource host_source = request.mesh;
    host_source.handle_epsilon = 0.0;
    if (host_source.area <= 0.0) host_source.area = kFourPi;
    const auto host = host_source.build();
    const int a = request.vertex_a >= 0 ? request.vertex_a : 0;
    const int b = request.vertex_b >= 0 ? request.vertex_b : farthest_vertex(host.mesh, a);

    const auto host_raw = raw_spectrum(host.mesh, host.density, request.window, request.solver);
    const auto segment = constructions::dirichlet_segment_spectrum(request.length, request.window);
    std::vector<double> expected(host_raw);
    expected.insert(expected.end(), segment.begin(), segment.end());
    std::sort(expected.begin(), expected.end());
    expected.resize(request.window + 1);
    report.values["host_eigenvalues"] = host_raw;
    report.values["segment_eigenvalues"] = segment;
    report.values["union_oracle"] = expected;
    report.values["host_genus"] = host.mesh.genus();
    report.values["host_area"] = host.mesh.total_area();

    Json rows = Json::array();
    std::vector<double> headline;
    for (std::size_t n = 0; n < request.epsilons.size(); ++n) {
        const double eps = request.epsilons[n];
        const auto s = constructions::attach_handle(host.mesh, host.density, a, b, eps, request.length);
        const auto spec = mesh_spectrum(s.mesh, s.density, request.window, false, request.solver);
        std::vector<double> errors;
        double max_rel = 0.0;
        for (int i = 1; i <= request.window; ++i) {
            errors.push_back(rel_error(spec.eigenvalues[i], expected[i]));
            max_rel = std::max(max_rel, errors.back());
        }
        rows.push_back({{"epsilon", eps},
                        {"genus", s.genus},
                        {"area", s.mesh.total_area()},
                        {"eigenvalues", spec.eigenvalues},
                        {"normalized", spec.normalized},
                        {"errors", errors},
                        {"max_relative_error", max_rel}});
        headline.push_back(max_rel);
        report.checks.push_back(make_check("genus at eps " + fmt(eps), s.genus, host.mesh.genus() + 1.0,
                                           "oracle:euler-characteristic", 0.0, "abs"));
        for (const auto& w : s.warnings) report.warnings.push_back("eps " + fmt(eps) + ": " + w);
        if (request.save_path && n + 1 == request.epsilons.size()) constructions::save_surgery(s, *request.save_path);
    }
    report.values["vertex_a"] = a;
    report.values["vertex_b"] = b;
    report.values["sweep"] = rows;
    add_sweep_checks(report, "low spectrum vs host and segment", headline, request.tolerance, "oracle:union-spectrum",
                     0.0);
    // Short handles push the segment modes far above the compared window.
    const double first_segment = segment.front() * host.mesh.total_area();
    report.values["segment_first_normalized"] = first_segment;
    report.values["segment_above_window_bound"] =
        first_segment > bounds::corollary1_bound(2, request.window);
    report.wall_seconds = seconds_since(t0);
    return report;
}

// ---- bounds ----------------------------------------------------------------

ExperimentReport run_bounds(double tolerance) {
    const auto t0 = Clock::now();
    ExperimentReport report;
    report.name = "bounds";
    report.inputs = {{"experiment", "bounds"}, {"tolerance", tolerance}};
    Json table = Json::array();
    for (const auto& e : bounds::bound_table()) {
        Json row = {{"id", e.id}, {"expression", e.expression}, {"value", e.value}};
        if (!e.note.empty()) row["note"] = e.note;
        table.push_back(row);
    }
    report.values["table"] = table;

    auto id_value = [](const std::string& id) { return bounds::bound_entry(id).value; };
    for (int n = 2; n <= 6; ++n) {
        const std::string sn = std::to_string(n);
        report.checks.push_back(make_check("S^" + sn + " equals the k = 1 lower bound", id_value("lambda1c/S^" + sn),
                                           id_value("corollary1/" + sn + "/1"), "corollary1/" + sn + "/1", tolerance,
                                           "rel"));
        report.checks.push_back(make_check("gap bound is the k = 1 bound to the power n/2", id_value("gap/" + sn),
                                           std::pow(id_value("corollary1/" + sn + "/1"), 0.5 * n), "gap/" + sn,
                                           tolerance, "rel"));
    }
    report.checks.push_back(make_check("omega_2", id_value("omega/2"), kFourPi, "omega/2", tolerance, "rel"));
    report.checks.push_back(make_check("CP^1 equals S^2", id_value("lambda1c/CP^1"), id_value("lambda1c/S^2"),
                                       "lambda1c/S^2", tolerance, "rel"));
    report.checks.push_back(make_check("RP^2", id_value("lambda1c/RP^2"), 12.0 * kPi, "lambda1c/RP^2", tolerance, "rel"));
    report.checks.push_back(
        make_check("sphere k = 1 is 8 pi", id_value("sphere/1"), id_value("hersch"), "hersch", tolerance, "rel"));
    report.checks.push_back(make_check("k = 2 conformal sphere value", id_value("sphere_lambda2c"),
                                       id_value("corollary1/2/2"), "sphere_lambda2c", tolerance, "rel"));
    report.checks.push_back(make_check("genus 0 upper bound equals the sphere value", id_value("yang_yau/0"),
                                       id_value("hersch"), "yang_yau/0", tolerance, "rel"));
    report.checks.push_back(make_check("genus 1 upper bound", id_value("yang_yau/1"), 16.0 * kPi, "yang_yau/1",
                                       tolerance, "rel"));
    report.wall_seconds = seconds_since(t0);
    return report;
}

// ---- re-running ------------------------------------------------------------

ExperimentReport rerun(const Json& inputs) {
    if (!inputs.is_object() || !inputs.contains("experiment") || !inputs["experiment"].is_string())
        throw ValidationError("report inputs do not name an experiment");
    const std::string name = inputs["experiment"].get<std::string>();
    if (name == "spectrum") {
        SpectrumRequest r;
        r.mesh = MeshSource::from_json(inputs.at("mesh"));
        r.count = inputs.value("count", r.count);
        r.tolerance = inputs.value("tolerance", r.tolerance);
        r.upper_tolerance = inputs.value("upper_tolerance", r.upper_tolerance);
        if (inputs.contains("density_path")) r.density_path = inputs["density_path"].get<std::string>();
        r.solver = solver_from_json(inputs.value("solver", Json()));
        return run_spectrum(r);
    }
    if (name == "maximize") {
        MaximizeRequest r;
        r.mesh = MeshSource::from_json(inputs.at("mesh"));
        r.k = inputs.value("k", r.k);
        r.start = inputs.value("start", r.start);
        r.tolerance = inputs.value("tolerance", r.tolerance);
        if (inputs.contains("sphere_value")) r.sphere_value = inputs["sphere_value"].get<double>();
        r.options = optimizer_from_json(inputs.value("options", Json()));
        return run_maximize(r);
    }
    if (name == "gap") {
        GapRequest r;
        r.mesh = MeshSource::from_json(inputs.at("mesh"));
        r.k = inputs.value("k", r.k);
        r.tolerance = inputs.value("tolerance", r.tolerance);
        r.glue_epsilon = inputs.value("glue_epsilon", r.glue_epsilon);
        r.options = optimizer_from_json(inputs.value("options", Json()));
        return run_gap(r);
    }
    if (name == "glue") {
        GlueSweepRequest r;
        r.family = inputs.value("family", r.family);
        r.subdivisions = inputs.value("subdivisions", r.subdivisions);
        r.torus_resolution = inputs.value("torus_resolution", r.torus_resolution);
        r.epsilons = inputs.value("epsilons", r.epsilons);
        r.glue_epsilon = inputs.value("glue_epsilon", r.glue_epsilon);
        r.count = inputs.value("count", r.count);
        r.tolerance = inputs.value("tolerance", r.tolerance);
        r.solver = solver_from_json(inputs.value("solver", Json()));
        return run_glue_sweep(r);
    }
    if (name == "handle") {
        HandleRequest r;
        r.mesh = MeshSource::from_json(inputs.at("mesh"));
        r.epsilons = inputs.value("epsilons", r.epsilons);
        r.length = inputs.value("length", r.length);
        r.window = inputs.value("window", r.window);
        r.tolerance = inputs.value("tolerance", r.tolerance);
        r.vertex_a = inputs.value("vertex_a", r.vertex_a);
        r.vertex_b = inputs.value("vertex_b", r.vertex_b);
        r.solver = solver_from_json(inputs.value("solver", Json()));
        return run_handle(r);
    }
    if (name == "bounds") return run_bounds(inputs.value("tolerance", 1e-12));
    if (name == "reproduce") throw ValidationError("a reproduction report cannot be re-run; re-run the original");
    throw ValidationError("unknown experiment '" + name + "'");
}

namespace {

void compare_values(const Json& a, const Json& b, const std::string& path, double tol, ExperimentReport& out,
                    int& compared) {
    if (a.is_number() && b.is_number()) {
        const double x = a.get<double>(), y = b.get<double>();
        const double scale = std::max(std::abs(x), std::abs(y));
        ++compared;
        if (std::abs(x - y) > tol * scale + 1e-9) {
            out.checks.push_back(make_check("value " + path, y, x, "oracle:saved-report", tol, "rel"));
        }
        return;
    }
    if (a.is_array() && b.is_array()) {
        if (a.size() != b.size()) {
            out.checks.push_back(make_check("length of " + path, static_cast<double>(b.size()),
                                            static_cast<double>(a.size()), "oracle:saved-report", 0.0, "abs"));
            return;
        }
        for (std::size_t i = 0; i < a.size(); ++i)
            compare_values(a[i], b[i], path + "[" + std::to_string(i) + "]", tol, out, compared);
        return;
    }
    if (a.is_object() && b.is_object()) {
        for (auto it = a.begin(); it != a.end(); ++it) {
            if (!b.contains(it.key())) {
                out.checks.push_back(make_check("missing " + path + "." + it.key(), 0.0, 1.0, "oracle:saved-report",
                                                0.0, "true"));
                continue;
            }
            compare_values(it.value(), b[it.key()], path + "." + it.key(), tol, out, compared);
        }
    }
}

}  // namespace

ExperimentReport reproduce(const ExperimentReport& saved, double tolerance) {
    const auto t0 = Clock::now();
    ExperimentReport fresh = rerun(saved.inputs);
    ExperimentReport out;
    out.name = "reproduce";
    out.inputs = {{"experiment", "reproduce"}, {"original", saved.inputs}, {"tolerance", tolerance}};
    out.seed = saved.seed;
    int compared = 0;
    compare_values(saved.values, fresh.values, "values", tolerance, out, compared);
    out.checks.push_back(make_check("numeric values compared", compared, 1.0, "oracle:saved-report", 0.0, "true"));
    for (const auto& c : fresh.checks) out.checks.push_back(c);
    out.values = {{"compared", compared}, {"original_pass", saved.passed()}, {"rerun", fresh.to_json()}};
    out.warnings = fresh.warnings;
    out.wall_seconds = seconds_since(t0);
    return out;
}

}  // namespace confspec::experiments
