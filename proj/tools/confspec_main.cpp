// confspec: command-line front end for the spectral experiments.

#include "confspec/bounds.hpp"
#include "confspec/errors.hpp"
#include "confspec/experiments.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace ex = confspec::experiments;

namespace {

struct MeshArgs {
    std::string mesh_path;
    std::optional<int> icosphere;
    std::string torus;
    int resolution = 32;
    double ratio = 1.4;
    double area = 0.0;
};

struct OutputArgs {
    std::string out;
    std::string format = "json";
};

void add_mesh_options(CLI::App* app, MeshArgs& m) {
    auto* mesh = app->add_option("--mesh", m.mesh_path, "OFF/OBJ mesh file (a <file>.json surgery sidecar is used)");
    auto* ico = app->add_option("--icosphere", m.icosphere, "icosphere subdivision level (0-8)");
    auto* torus = app->add_option("--torus", m.torus, "flat torus lattice: equilateral, square, rectangular");
    mesh->excludes(ico, torus);
    ico->excludes(torus);
    app->add_option("--resolution", m.resolution, "torus grid resolution")->capture_default_str();
    app->add_option("--ratio", m.ratio, "rectangular lattice aspect ratio")->capture_default_str();
    app->add_option("--area", m.area, "rescale the mesh to this area before use");
}

ex::MeshSource mesh_source(const MeshArgs& m, const ex::MeshSource& fallback) {
    ex::MeshSource s = fallback;
    if (!m.mesh_path.empty()) s = ex::MeshSource::file(m.mesh_path);
    else if (m.icosphere) s = ex::MeshSource::icosphere(*m.icosphere);
    else if (!m.torus.empty()) s = ex::MeshSource::torus(m.torus, m.resolution, m.ratio);
    else if (s.kind == ex::MeshSource::Kind::torus) {
        s.resolution = m.resolution;
        s.ratio = m.ratio;
    }
    if (m.area > 0.0) s.area = m.area;
    return s;
}

void add_output_options(CLI::App* app, OutputArgs& o) {
    app->add_option("--out", o.out, "output path (default stdout)");
    app->add_option("--format", o.format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
}

std::ostream& open_output(const OutputArgs& o, std::ofstream& file) {
    if (o.out.empty()) return std::cout;
    file.open(o.out);
    if (!file) throw confspec::ValidationError("cannot write " + o.out);
    return file;
}

int emit(const ex::ExperimentReport& report, const OutputArgs& o) {
    std::ofstream file;
    std::ostream& out = open_output(o, file);
    if (o.format == "csv") report.write_csv(out);
    else out << report.to_json().dump(2) << '\n';
    for (const auto& c : report.checks)
        if (!c.pass) std::cerr << "FAIL " << c.name << ": " << c.value << " vs " << c.target << " [" << c.target_id << "]\n";
    return report.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Conformal spectrum laboratory: Laplace eigenvalues on triangle meshes"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "confspec 1.0.0");

    MeshArgs mesh;
    OutputArgs output;
    int k = 1;
    std::uint64_t seed = 42;
    std::optional<double> tol;
    std::optional<int> iters;
    std::optional<int> restarts;
    std::optional<int> threads;
    std::vector<double> eps;
    double length = 0.5;

    // spectrum
    auto* spectrum = app.add_subcommand("spectrum", "eigenvalues of a mesh with a density");
    add_mesh_options(spectrum, mesh);
    add_output_options(spectrum, output);
    int count = 8;
    std::string density_path;
    spectrum->add_option("-k,--count", count, "highest eigenvalue index")->capture_default_str();
    spectrum->add_option("--density", density_path, "per-vertex density (JSON array or whitespace list)");
    spectrum->add_option("--seed", seed, "solver seed")->capture_default_str();
    spectrum->add_option("--tol", tol, "relative tolerance of closed-form checks");

    // maximize
    auto* maximize = app.add_subcommand("maximize", "maximize lambda_bar_k over conformal densities");
    add_mesh_options(maximize, mesh);
    add_output_options(maximize, output);
    std::string start = "default";
    std::optional<double> sphere_value;
    std::string history_path;
    double handle_eps = 0.0;
    maximize->add_option("-k", k, "eigenvalue index")->capture_default_str();
    maximize->add_option("--iters", iters, "iterations per restart");
    maximize->add_option("--restarts", restarts, "restart count");
    maximize->add_option("--start", start, "default, uniform, gaussian-bump, stereographic-bump, random")
        ->capture_default_str();
    maximize->add_option("--seed", seed, "seed for random starts and the solver")->capture_default_str();
    maximize->add_option("--tol", tol, "slack of the optimizer checks");
    maximize->add_option("--sphere-value", sphere_value, "sphere optimum for the ordering check");
    maximize->add_option("--history", history_path, "write the accepted-step history as CSV");
    maximize->add_option("--handle-eps", handle_eps, "attach a handle of this radius first");
    maximize->add_option("--length", length, "handle length")->capture_default_str();
    maximize->add_option("--threads", threads, "concurrent restarts");

    // gap
    auto* gap = app.add_subcommand("gap", "difference of independently maximized lambda_bar_k and lambda_bar_k+1");
    add_mesh_options(gap, mesh);
    add_output_options(gap, output);
    double gap_eps = 0.05;
    gap->add_option("-k", k, "lower index")->capture_default_str();
    gap->add_option("--iters", iters, "iterations per restart");
    gap->add_option("--restarts", restarts, "restart count");
    gap->add_option("--seed", seed, "seed")->capture_default_str();
    gap->add_option("--tol", tol, "slack of the gap check");
    gap->add_option("--eps", gap_eps, "glued-sphere neck radius for the k + 1 candidate (0 disables)")
        ->capture_default_str();
    gap->add_option("--threads", threads, "concurrent restarts");

    // glue
    auto* glue = app.add_subcommand("glue", "spectral convergence of glued surfaces");
    add_output_options(glue, output);
    std::string family = "sphere-sphere";
    int glue_subdiv = 4;
    int glue_res = 32;
    double glue_neck = 0.1;
    int glue_count = 6;
    glue->add_option("--family", family, "sphere-sphere, sphere-torus or collapse")
        ->check(CLI::IsMember({"sphere-sphere", "sphere-torus", "collapse"}))
        ->capture_default_str();
    glue->add_option("--icosphere", glue_subdiv, "icosphere subdivision level")->capture_default_str();
    glue->add_option("--resolution", glue_res, "torus resolution")->capture_default_str();
    glue->add_option("--eps", eps, "decreasing sweep (neck radius, or guest scale for collapse)")->delimiter(',');
    glue->add_option("--glue-eps", glue_neck, "neck radius for the collapse family")->capture_default_str();
    glue->add_option("-k,--count", glue_count, "highest eigenvalue index")->capture_default_str();
    glue->add_option("--seed", seed, "solver seed")->capture_default_str();
    glue->add_option("--tol", tol, "tolerance at the smallest radius");

    // handle
    auto* handle = app.add_subcommand("handle", "attach a thin handle and compare the low spectrum");
    add_mesh_options(handle, mesh);
    add_output_options(handle, output);
    int window = 4;
    std::string save_path;
    handle->add_option("--eps", eps, "decreasing sweep of handle radii")->delimiter(',');
    handle->add_option("--length", length, "handle length")->capture_default_str();
    handle->add_option("-k", window, "compare indices 1..k")->capture_default_str();
    handle->add_option("--seed", seed, "solver seed")->capture_default_str();
    handle->add_option("--tol", tol, "tolerance at the smallest radius");
    handle->add_option("--save", save_path, "save the surgery at the smallest radius (OFF + .json)");

    // bounds
    auto* bounds = app.add_subcommand("bounds", "closed-form constants and their consistency checks");
    add_output_options(bounds, output);
    std::string bound_id;
    bounds->add_option("--id", bound_id, "print one entry, e.g. corollary1/2/3 or lambda1c/CP^2");
    bounds->add_option("--tol", tol, "relative tolerance of identities");

    // report
    auto* report = app.add_subcommand("report", "re-run a saved report from its inputs and compare values");
    add_output_options(report, output);
    std::string report_path;
    report->add_option("report", report_path, "saved JSON report")->required()->check(CLI::ExistingFile);
    report->add_option("--tol", tol, "relative agreement required of every value");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*spectrum) {
            ex::SpectrumRequest r;
            r.mesh = mesh_source(mesh, ex::MeshSource::icosphere(4));
            r.count = count;
            if (!density_path.empty()) r.density_path = density_path;
            if (tol) r.tolerance = *tol;
            r.solver.seed = seed;
            return emit(ex::run_spectrum(r), output);
        }
        if (*maximize) {
            ex::MaximizeRequest r;
            r.mesh = mesh_source(mesh, ex::MeshSource::icosphere(4));
            if (handle_eps > 0.0) {
                r.mesh.handle_epsilon = handle_eps;
                r.mesh.handle_length = length;
            }
            r.k = k;
            r.start = start;
            if (tol) r.tolerance = *tol;
            r.sphere_value = sphere_value;
            r.options.seed = seed;
            r.options.solver.seed = seed;
            if (iters) r.options.max_iterations = *iters;
            if (restarts) r.options.restarts = *restarts;
            if (threads) r.options.threads = *threads;
            std::optional<confspec::opt::OptimizationResult> result;
            const auto rep = ex::run_maximize(r, &result);
            if (!history_path.empty()) {
                std::ofstream h(history_path);
                if (!h) throw confspec::ValidationError("cannot write " + history_path);
                confspec::opt::write_history_csv(*result, h);
            }
            return emit(rep, output);
        }
        if (*gap) {
            ex::GapRequest r;
            r.mesh = mesh_source(mesh, ex::MeshSource::icosphere(4));
            r.k = k;
            r.glue_epsilon = gap_eps;
            if (tol) r.tolerance = *tol;
            r.options.seed = seed;
            r.options.solver.seed = seed;
            if (iters) r.options.max_iterations = *iters;
            if (restarts) r.options.restarts = *restarts;
            if (threads) r.options.threads = *threads;
            return emit(ex::run_gap(r), output);
        }
        if (*glue) {
            ex::GlueSweepRequest r;
            r.family = family;
            r.subdivisions = glue_subdiv;
            r.torus_resolution = glue_res;
            if (!eps.empty()) r.epsilons = eps;
            else if (family == "sphere-torus") r.epsilons = {0.2, 0.1, 0.05, 0.025};
            else if (family == "collapse") r.epsilons = {1.0, 0.3, 0.1, 0.03};
            r.glue_epsilon = glue_neck;
            r.count = glue_count;
            if (tol) r.tolerance = *tol;
            r.solver.seed = seed;
            return emit(ex::run_glue_sweep(r), output);
        }
        if (*handle) {
            ex::HandleRequest r;
            r.mesh = mesh_source(mesh, ex::MeshSource::torus("equilateral", 32));
            if (!eps.empty()) r.epsilons = eps;
            r.length = length;
            r.window = window;
            if (tol) r.tolerance = *tol;
            if (!save_path.empty()) r.save_path = save_path;
            r.solver.seed = seed;
            return emit(ex::run_handle(r), output);
        }
        if (*bounds) {
            if (!bound_id.empty()) {
                const auto e = confspec::bounds::bound_entry(bound_id);
                std::ofstream file;
                std::ostream& out = open_output(output, file);
                out.precision(17);
                if (output.format == "csv") {
                    out << "id,expression,value\n" << e.id << ',' << e.expression << ',' << e.value << '\n';
                } else {
                    nlohmann::json j = {{"id", e.id}, {"expression", e.expression}, {"value", e.value}};
                    if (!e.note.empty()) j["note"] = e.note;
                    out << j.dump(2) << '\n';
                }
                return 0;
            }
            const auto rep = ex::run_bounds(tol.value_or(1e-12));
            if (output.format == "csv") {
                std::ofstream file;
                std::ostream& out = open_output(output, file);
                out.precision(17);
                out << "id,expression,value\n";
                for (const auto& row : rep.values["table"])
                    out << row["id"].get<std::string>() << ",\"" << row["expression"].get<std::string>() << "\","
                        << row["value"].get<double>() << '\n';
                return rep.passed() ? 0 : 1;
            }
            return emit(rep, output);
        }
        if (*report) {
            std::ifstream in(report_path);
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(in);
            } catch (const nlohmann::json::exception& e) {
                throw confspec::ValidationError(report_path + ": " + e.what());
            }
            const auto saved = ex::ExperimentReport::from_json(j);
            return emit(ex::reproduce(saved, tol.value_or(1e-6)), output);
        }
    } catch (const confspec::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: malformed report: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
