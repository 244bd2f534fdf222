#include "confspec/conformal_opt.hpp"
#include "confspec/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

namespace confspec::opt {
namespace {

std::vector<double> renormalized_log(std::vector<double> log_rho, std::span<const double> shares, double floor) {
    const double log_floor = std::log(floor);
    for (int pass = 0; pass < 2; ++pass) {
        double total = 0.0;
        for (std::size_t i = 0; i < log_rho.size(); ++i) total += std::exp(log_rho[i]) * shares[i];
        const double shift = std::log(total);
        for (double& x : log_rho) x = std::max(x - shift, log_floor);
    }
    return log_rho;
}

void update_softmin(AscentState& s, const TriangleMesh& mesh) {
    const int count = s.report.count();
    const std::span<const double> theta(s.report.normalized.data() + s.k, count - s.k);
    const double lo = *std::min_element(theta.begin(), theta.end());
    s.weights.assign(theta.size(), 0.0);
    double z = 0.0;
    for (std::size_t j = 0; j < theta.size(); ++j) {
        s.weights[j] = std::exp(-(theta[j] - lo) / s.temperature);
        z += s.weights[j];
    }
    for (double& w : s.weights) w /= z;
    s.smoothed = lo - s.temperature * std::log(z);

    const int n = mesh.vertex_count();
    const auto& u = *s.report.eigenvectors;
    const double root_v = std::sqrt(s.report.total_mass);
    s.direction.assign(n, 0.0);
    std::vector<double> x(n);
    for (std::size_t j = 0; j < theta.size(); ++j) {
        const int col = s.k + static_cast<int>(j);
        for (int i = 0; i < n; ++i) x[i] = u(i, col) * root_v;
        kernels::log_density_gradient(s.weights[j], theta[j], x, s.direction);
    }

    // gradient_i = mhat_i * direction_i; project out the mass-constraint normal mhat.
    const auto shares = mesh.vertex_area_shares();
    std::vector<double> mhat(n);
    for (int i = 0; i < n; ++i) mhat[i] = std::exp(s.log_rho[i]) * shares[i] / s.report.total_mass;
    s.gradient.assign(n, 0.0);
    kernels::hadamard(mhat, s.direction, s.gradient);
    const double gm = kernels::dot(s.gradient, mhat);
    const double mm = kernels::dot(mhat, mhat);
    std::vector<double> proj(s.gradient);
    kernels::axpy(-gm / mm, mhat, proj);
    s.gradient_norm = std::sqrt(kernels::dot(proj, proj));
}

AscentState evaluate(const TriangleMesh& mesh, const StiffnessOperator& stiffness, std::vector<double> log_rho,
                     int k, double temperature, const OptimizerOptions& options,
                     const std::optional<Eigen::MatrixXd>& warm) {
    AscentState s;
    s.k = k;
    s.log_rho = renormalized_log(std::move(log_rho), mesh.vertex_area_shares(), options.density_floor);
    std::vector<double> rho(s.log_rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::exp(s.log_rho[i]);
    const ConformalDensity density(std::move(rho));
    const MassVector mass = assemble_mass(mesh, density);
    SolverOptions so = options.solver;
    if (warm) so.initial_subspace = warm;
    const int count = std::min(k + options.cluster_margin, mesh.vertex_count() - 1);
    s.report = solve_spectrum(stiffness, mass, count, true, so);
    s.temperature = temperature > 0.0 ? temperature : options.temperature * s.report.normalized[k];
    update_softmin(s, mesh);
    return s;
}

ConformalDensity density_of(const AscentState& s) {
    std::vector<double> rho(s.log_rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::exp(s.log_rho[i]);
    return ConformalDensity(std::move(rho));
}

struct RestartRun {
    RestartSummary summary;
    std::vector<HistoryEntry> history;
    std::optional<ConformalDensity> best_density;
};

RestartRun run_restart(const TriangleMesh& mesh, const StiffnessOperator& stiffness, const ConformalDensity& start,
                       int k, int index, const std::string& label, const OptimizerOptions& options) {
    RestartRun run;
    run.summary.label = label;
    std::vector<double> log_rho(start.size());
    for (int i = 0; i < start.size(); ++i) log_rho[i] = std::log(start[i]);
    AscentState state = evaluate(mesh, stiffness, std::move(log_rho), k, 0.0, options, std::nullopt);
    run.summary.initial_value = state.lambda_bar();
    run.summary.best_value = state.lambda_bar();
    run.best_density = density_of(state);

    double step = options.initial_step;
    int rejects = 0;
    std::deque<double> recent;  // smoothed values of the last accepted steps
    recent.push_back(state.smoothed);
    Status status = Status::iteration_cap;
    int it = 0;
    for (it = 1; it <= options.max_iterations; ++it) {
        if (state.gradient_norm < options.gradient_tol) {
            status = Status::converged;
            break;
        }
        const StepOutcome out = ascent_step(state, mesh, stiffness, step, options);
        if (out.accepted) {
            rejects = 0;
            run.history.push_back({index, it, state.lambda_bar(), state.smoothed, step, state.cluster_size()});
            if (state.lambda_bar() > run.summary.best_value) {
                run.summary.best_value = state.lambda_bar();
                run.best_density = density_of(state);
            }
            step = std::min(step * options.growth, options.max_step);
            recent.push_back(state.smoothed);
            if (recent.size() > 21) recent.pop_front();
            if (recent.size() == 21 &&
                recent.back() - recent.front() < options.stagnation_tol * std::abs(recent.back())) {
                status = Status::converged;
                break;
            }
        } else {
            step = std::max(step * options.backtracking, options.min_step);
            if (++rejects >= options.stall_limit) {
                status = Status::stalled;
                break;
            }
        }
    }
    run.summary.status = status;
    run.summary.iterations = std::min(it, options.max_iterations);
    run.summary.final_gradient_norm = state.gradient_norm;
    return run;
}

}  // namespace

int default_thread_count() {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* cap = std::getenv("CONFSPEC_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(cap, &end, 10);
        if (end != cap && *end == '\0' && v >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(v));
    }
    return static_cast<int>(n);
}

std::string to_string(Status s) {
    switch (s) {
        case Status::converged: return "converged";
        case Status::iteration_cap: return "iteration-cap";
        case Status::stalled: return "stalled";
    }
    return "unknown";
}

void OptimizerOptions::validate() const {
    if (max_iterations < 1 || !(initial_step > 0.0) || !(backtracking > 0.0 && backtracking < 1.0) ||
        !(growth >= 1.0) || !(max_step > 0.0) || !(temperature > 0.0) || !(density_floor > 0.0) ||
        restarts < 1 || cluster_margin < 0 || !(min_step > 0.0) || stall_limit < 1 || threads < 0)
        throw ValidationError("optimizer options must be positive (restarts >= 1, backtracking in (0,1))");
}

double soft_min(std::span<const double> values, double temperature) {
    if (values.empty()) throw ValidationError("soft_min of an empty window");
    if (!(temperature > 0.0)) throw ValidationError("soft_min temperature must be positive");
    const double lo = *std::min_element(values.begin(), values.end());
    double z = 0.0;
    for (double v : values) z += std::exp(-(v - lo) / temperature);
    return lo - temperature * std::log(z);
}

AscentState make_state(const TriangleMesh& mesh, const StiffnessOperator& stiffness, const ConformalDensity& density,
                       int k, double temperature, const OptimizerOptions& options) {
    if (density.size() != mesh.vertex_count()) throw ValidationError("density does not match the mesh");
    std::vector<double> log_rho(density.size());
    for (int i = 0; i < density.size(); ++i) log_rho[i] = std::log(density[i]);
    return evaluate(mesh, stiffness, std::move(log_rho), k, temperature, options, std::nullopt);
}

StepOutcome ascent_step(AscentState& state, const TriangleMesh& mesh, const StiffnessOperator& stiffness,
                        double step, const OptimizerOptions& options, const std::vector<double>* direction) {
    const std::vector<double>& d = direction ? *direction : state.direction;
    if (static_cast<int>(d.size()) != mesh.vertex_count())
        throw ValidationError("ascent direction does not match the mesh");
    StepOutcome out;
    out.step = step;
    const double dmax = kernels::max_abs(d);
    const double scale = dmax > 0.0 ? step / dmax : 0.0;
    out.predicted_change = scale * kernels::dot(state.gradient, d);

    std::vector<double> trial(state.log_rho);
    kernels::axpy(scale, d, trial);
    AscentState next;
    try {
        next = evaluate(mesh, stiffness, std::move(trial), state.k, state.temperature, options,
                        state.report.eigenvectors);
    } catch (const ConvergenceError&) {
        return out;  // an unsolvable trial counts as a rejection
    }
    out.actual_change = next.smoothed - state.smoothed;
    if (out.actual_change > 0.0) {
        out.accepted = true;
        state = std::move(next);
    }
    return out;
}

OptimizationResult maximize_lambda_k(const TriangleMesh& mesh, int k, const OptimizerOptions& options,
                                     const std::optional<ConformalDensity>& initial_density) {
    options.validate();
    if (k < 1) throw ValidationError("target index k must be >= 1");
    if (k + options.cluster_margin > mesh.vertex_count() - 1)
        throw ValidationError("k + cluster margin = " + std::to_string(k + options.cluster_margin) +
                              " exceeds the " + std::to_string(mesh.vertex_count() - 1) +
                              " eigenvalues this mesh can provide");

    std::vector<std::pair<std::string, ConformalDensity>> starts;
    if (initial_density) {
        if (initial_density->size() != mesh.vertex_count())
            throw ValidationError("initial density does not match the mesh");
        starts.emplace_back("given", *initial_density);
    } else {
        starts.emplace_back("uniform", ConformalDensity::uniform(mesh.vertex_count()));
        if (options.restarts >= 2)
            starts.emplace_back("stereographic-bump", stereographic_bump_density(mesh, top_vertex(mesh), 3.0));
        for (int r = 2; r < options.restarts; ++r)
            starts.emplace_back("random-" + std::to_string(r - 1),
                                random_density(mesh, options.seed + static_cast<std::uint64_t>(r)));
    }

    const StiffnessOperator stiffness = assemble_stiffness(mesh);
    std::vector<std::optional<RestartRun>> runs(starts.size());
    std::vector<std::string> errors(starts.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < starts.size(); i = next++) {
            try {
                runs[i] = run_restart(mesh, stiffness, starts[i].second, k, static_cast<int>(i), starts[i].first,
                                      options);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    const int want = options.threads > 0 ? options.threads : default_thread_count();
    const std::size_t nthreads = std::min<std::size_t>(static_cast<std::size_t>(want), starts.size());
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    for (std::size_t i = 0; i < starts.size(); ++i)
        if (!runs[i]) throw ConvergenceError("restart '" + starts[i].first + "' failed: " + errors[i], {});

    int best = 0;
    for (std::size_t i = 1; i < runs.size(); ++i)
        if (runs[i]->summary.best_value > runs[best]->summary.best_value) best = static_cast<int>(i);
    OptimizationResult result{*runs[best]->best_density, runs[best]->summary.best_value, k, {},
                              runs[best]->summary.status, best, {}};
    for (auto& r : runs) {
        result.history.insert(result.history.end(), r->history.begin(), r->history.end());
        result.restarts.push_back(r->summary);
    }
    return result;
}

Corollary1Report check_corollary1(const OptimizationResult& result, int k, double slack,
                                  std::optional<double> sphere_value) {
    Corollary1Report r;
    r.k = k;
    r.best_value = result.best_value;
    r.bound = 8.0 * std::numbers::pi * k;
    r.ratio = r.best_value / r.bound;
    r.slack = slack;
    r.pass = r.best_value >= r.bound * (1.0 - slack);
    if (sphere_value) {
        r.sphere_value = sphere_value;
        r.sphere_order_pass = r.best_value >= *sphere_value * (1.0 - slack);
    }
    return r;
}

Json to_json(const OptimizationResult& result, bool include_density) {
    Json j;
    j["k"] = result.k;
    j["best_value"] = result.best_value;
    j["status"] = to_string(result.status);
    j["best_restart"] = result.best_restart;
    Json restarts = Json::array();
    for (const auto& r : result.restarts)
        restarts.push_back({{"label", r.label},
                            {"initial_value", r.initial_value},
                            {"best_value", r.best_value},
                            {"status", to_string(r.status)},
                            {"iterations", r.iterations},
                            {"final_gradient_norm", r.final_gradient_norm}});
    j["restarts"] = restarts;
    Json history = Json::array();
    for (const auto& h : result.history)
        history.push_back({{"restart", h.restart},
                           {"iteration", h.iteration},
                           {"lambda_bar", h.lambda_bar},
                           {"smoothed", h.smoothed},
                           {"step", h.step},
                           {"cluster_size", h.cluster_size}});
    j["history"] = history;
    if (include_density)
        j["best_density"] = std::vector<double>(result.best_density.values().begin(), result.best_density.values().end());
    return j;
}

Json to_json(const Corollary1Report& r) {
    Json j = {{"k", r.k}, {"best_value", r.best_value}, {"bound", r.bound},
              {"ratio", r.ratio}, {"slack", r.slack},      {"pass", r.pass}};
    if (r.sphere_value) {
        j["sphere_value"] = *r.sphere_value;
        j["sphere_order_pass"] = *r.sphere_order_pass;
    }
    return j;
}

void write_history_csv(const OptimizationResult& result, std::ostream& out) {
    out << "iteration,lambda_bar,step,restart,smoothed,cluster_size\n";
    out.precision(17);
    for (const auto& h : result.history)
        out << h.iteration << ',' << h.lambda_bar << ',' << h.step << ',' << h.restart << ',' << h.smoothed << ','
            << h.cluster_size << '\n';
}

}  // namespace confspec::opt
