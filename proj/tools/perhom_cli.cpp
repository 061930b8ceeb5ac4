// perhom: homogenized limits of periodic Levy-type processes.
//
//   perhom inspect   --model FILE            validation report (never fails the process)
//   perhom invariant --model FILE --grid N   stationary weights as CSV
//   perhom corrector --model FILE --grid N   corrector and its gradient as CSV
//   perhom sigma     --model FILE --grid N   effective law as JSON
//   perhom simulate  --model FILE --eps E    ensemble summary as JSON
//   perhom verify    --model FILE --eps A,B  full verification report; exit 1 on a failed verdict
//
// Flags override values from --config (a JSON object keyed by long flag names).

#include "perhom/builtin_models.hpp"
#include "perhom/errors.hpp"
#include "perhom/model_io.hpp"
#include "perhom/report.hpp"
#include "perhom/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace perhom;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string model;
    std::string config;
    std::string out;
    std::vector<int> grid;
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    std::string dump_matrix;
    bool ergodicity = false;
    double horizon = 0.0;
    // simulation
    std::vector<double> eps;
    double dt = 0.01;
    double T = 1.0;
    std::size_t paths = 1000;
    std::uint64_t seed = 1;
    double cutoff = 0.1;
    std::string small_jumps = "gaussian";
    std::string start = "point";
    std::vector<double> x0;
    std::vector<double> deltas{0.5};
    int mesh = 0;
    bool no_characteristics = false;
    std::string endpoints;
    // verification
    double etp2_tol = 0.05;
    double etp1_tol = 0.01;
    double alpha = 0.01;
    bool summary = false;
};

// Keys that may appear in --config; the worker count is accepted but never echoed.
template <class T>
void merge(const json& file, const CLI::App& app, const std::string& key, T& value) {
    const auto* opt = app.get_option_no_throw("--" + key);
    if (opt != nullptr && opt->count() > 0) return;
    if (!file.contains(key)) return;
    try {
        value = file.at(key).get<T>();
    } catch (const json::exception& e) {
        throw UsageError("config key '" + key + "': " + e.what());
    }
}

void merge_config(Options& o, const CLI::App& app) {
    if (o.config.empty()) return;
    std::ifstream in(o.config);
    if (!in) throw UsageError("cannot open config file '" + o.config + "'");
    json file;
    try {
        file = json::parse(in);
    } catch (const json::exception& e) {
        throw UsageError(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!file.is_object()) throw UsageError("config file must hold a JSON object");
    merge(file, app, "model", o.model);
    merge(file, app, "grid", o.grid);
    merge(file, app, "workers", o.workers);
    merge(file, app, "out", o.out);
    merge(file, app, "eps", o.eps);
    merge(file, app, "dt", o.dt);
    merge(file, app, "T", o.T);
    merge(file, app, "paths", o.paths);
    merge(file, app, "seed", o.seed);
    merge(file, app, "cutoff", o.cutoff);
    merge(file, app, "small-jumps", o.small_jumps);
    merge(file, app, "start", o.start);
    merge(file, app, "x0", o.x0);
    merge(file, app, "deltas", o.deltas);
    merge(file, app, "mesh", o.mesh);
    merge(file, app, "etp2-tol", o.etp2_tol);
    merge(file, app, "etp1-tol", o.etp1_tol);
    merge(file, app, "alpha", o.alpha);
    merge(file, app, "horizon", o.horizon);
}

json echo(const Options& o, const std::string& command) {
    json j = {{"command", command}, {"model", o.model}, {"grid", o.grid}};
    if (command == "simulate" || command == "verify") {
        j.update({{"eps", o.eps},
                  {"dt", o.dt},
                  {"T", o.T},
                  {"paths", o.paths},
                  {"seed", o.seed},
                  {"cutoff", o.cutoff},
                  {"small-jumps", o.small_jumps},
                  {"start", o.start},
                  {"x0", o.x0},
                  {"deltas", o.deltas},
                  {"mesh", o.mesh},
                  {"characteristics", !o.no_characteristics}});
    }
    if (command == "verify") j.update({{"etp2-tol", o.etp2_tol}, {"etp1-tol", o.etp1_tol}, {"alpha", o.alpha}});
    if (command == "invariant" || command == "verify") j["horizon"] = o.horizon;
    return j;
}

SimulationConfig sim_config(const Options& o) {
    SimulationConfig c;
    c.dt = o.dt;
    c.T = o.T;
    c.n_paths = o.paths;
    c.seed = o.seed;
    c.small_jump_cutoff = o.cutoff;
    if (o.small_jumps == "gaussian") {
        c.small_jumps = SmallJumpMode::Gaussian;
    } else if (o.small_jumps == "drop") {
        c.small_jumps = SmallJumpMode::Drop;
    } else {
        throw UsageError("--small-jumps must be 'gaussian' or 'drop'");
    }
    if (o.start == "point") {
        c.start = StartMode::Point;
    } else if (o.start == "uniform") {
        c.start = StartMode::Uniform;
    } else {
        throw UsageError("--start must be 'point' or 'uniform'");
    }
    c.x0 = o.x0;
    c.deltas = o.deltas;
    c.mesh_points = o.mesh;
    c.accumulate = !o.no_characteristics;
    c.workers = o.workers;
    return c;
}

// Writes `text` under the output directory when one is set, otherwise to stdout.
void emit(const Options& o, const std::string& file, const std::string& text) {
    if (o.out.empty()) {
        std::cout << text;
        return;
    }
    fs::create_directories(o.out);
    const fs::path path = fs::path(o.out) / file;
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    f << text;
}

std::string dumps(const json& j) { return j.dump(2) + "\n"; }

void maybe_dump_matrix(const Options& o, const GeneratorMatrix& g) {
    if (o.dump_matrix.empty()) return;
    const fs::path path = o.out.empty() ? fs::path(o.dump_matrix) : fs::path(o.out) / o.dump_matrix;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    write_coordinate_dump(f, g);
}

int run(const std::string& command, const Options& o) {
    if (o.model.empty()) throw UsageError("--model is required");
    const LevyTripletModel model = [&] {
        try {
            return load_model(o.model);
        } catch (const Error& e) {
            throw StageError("parse", e);
        }
    }();
    const TorusGrid grid = default_grid(model, o.grid);

    if (command == "inspect") {
        json j = {{"schema", kReportSchema},
                  {"config", echo(o, command)},
                  {"model", model_to_json(model)},
                  {"hash", [&] {
                       std::ostringstream h;
                       h << std::hex << std::setw(16) << std::setfill('0') << model_hash(model);
                       return h.str();
                   }()},
                  {"validation", to_json(validate(model, grid))}};
        emit(o, "inspect.json", dumps(j));
        return kExitOk;
    }

    if (command == "simulate") {
        if (o.eps.size() != 1) throw UsageError("simulate takes exactly one --eps value");
        const SolvedModel s = solve_model(model, grid, o.workers);
        SimulationConfig c = sim_config(o);
        c.epsilon = o.eps.front();
        const auto cost = simulation_cost(c);
        std::cerr << "simulate: " << cost.steps_per_path << " steps/path, " << cost.total_steps << " path-steps\n";
        const PathEnsemble e = [&] {
            try {
                return simulate_paths(model, s.law, c, &s.corrector, &s.grid);
            } catch (const Error& err) {
                throw StageError("simulate", err);
            }
        }();
        json j = {{"schema", kReportSchema},
                  {"config", echo(o, command)},
                  {"effective_law", to_json(s.law)},
                  {"ensemble", ensemble_summary(e)}};
        emit(o, "simulate.json", dumps(j));
        if (!o.endpoints.empty()) {
            const fs::path path = o.out.empty() ? fs::path(o.endpoints) : fs::path(o.out) / o.endpoints;
            std::ofstream f(path);
            if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
            write_endpoints_csv(f, e);
        }
        return kExitOk;
    }

    if (command == "verify") {
        VerifyConfig vc;
        vc.resolution = o.grid;
        if (!o.eps.empty()) vc.epsilons = o.eps;
        vc.sim = sim_config(o);
        vc.etp2_tol = o.etp2_tol;
        vc.etp1_tol = o.etp1_tol;
        vc.alpha = o.alpha;
        vc.ergodicity_horizon = o.horizon;
        for (double e : vc.epsilons) {
            SimulationConfig c = vc.sim;
            c.epsilon = e;
            std::cerr << "verify: eps = " << e << ", " << simulation_cost(c).total_steps << " path-steps\n";
        }
        const VerificationReport rep = full_report(model, vc);
        json j = to_json(rep);
        j["config"]["run"] = echo(o, command);
        emit(o, "report.json", dumps(j));
        if (o.summary) std::cerr << text_summary(rep);
        return rep.passed ? kExitOk : kExitFailed;
    }

    const SolvedModel s = solve_model(model, grid, o.workers);
    maybe_dump_matrix(o, s.generator);
    if (command == "invariant") {
        std::ostringstream csv;
        write_invariant_csv(csv, s.grid, s.pi);
        emit(o, "pi.csv", csv.str());
        if (o.ergodicity) {
            const auto est = estimate_ergodicity(s.generator, s.pi, o.horizon);
            json j = {{"config", echo(o, command)}, {"invariant", to_json(s.pi)}, {"ergodicity", to_json(est)}};
            if (o.out.empty()) {
                std::cerr << dumps(j);
            } else {
                emit(o, "ergodicity.json", dumps(j));
            }
        }
        return kExitOk;
    }
    if (command == "corrector") {
        std::ostringstream csv;
        write_corrector_csv(csv, s.grid, s.corrector);
        emit(o, "beta.csv", csv.str());
        return kExitOk;
    }
    // sigma
    json j = {{"schema", kReportSchema},
              {"config", echo(o, command)},
              {"invariant", to_json(s.pi)},
              {"corrector", to_json(s.corrector)},
              {"effective_law", to_json(s.law)}};
    emit(o, "sigma.json", dumps(j));
    return kExitOk;
}

void add_common(CLI::App* sub, Options& o) {
    sub->add_option("--model", o.model, "model file (JSON) or builtin:NAME");
    sub->add_option("--config", o.config, "JSON config file; command-line flags take precedence");
    sub->add_option("--grid", o.grid, "grid resolution, one value or one per axis (default 256 in 1D, 32 in 2D)")
        ->delimiter(',');
    sub->add_option("--workers", o.workers, "worker threads (default: logical cores); never affects output");
    sub->add_option("--out", o.out, "output directory (default: stdout)");
}

void add_simulation(CLI::App* sub, Options& o) {
    sub->add_option("--eps", o.eps, "scaling parameter(s) epsilon, comma separated")->delimiter(',');
    sub->add_option("--dt", o.dt, "unscaled Euler time step");
    sub->add_option("--T", o.T, "scaled horizon");
    sub->add_option("--paths", o.paths, "number of paths per epsilon");
    sub->add_option("--seed", o.seed, "master seed of the counter-based generator");
    sub->add_option("--cutoff", o.cutoff, "small-jump cutoff radius for density kernels");
    sub->add_option("--small-jumps", o.small_jumps, "sub-cutoff jumps: gaussian | drop");
    sub->add_option("--start", o.start, "initial law: point | uniform");
    sub->add_option("--x0", o.x0, "initial point (default: origin)")->delimiter(',');
    sub->add_option("--deltas", o.deltas, "thresholds for scaled-jump counts")->delimiter(',');
    sub->add_option("--mesh", o.mesh, "number of intermediate sample times");
    sub->add_flag("--no-characteristics", o.no_characteristics, "skip the second-characteristic accumulation");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"perhom: homogenized limits of periodic Levy-type processes"};
    app.set_version_flag("--version", std::string("perhom ") + PERHOM_BUILD_ID);
    app.require_subcommand(1);
    Options o;

    auto* inspect = app.add_subcommand("inspect", "validate a model and print the report");
    add_common(inspect, o);
    auto* invariant = app.add_subcommand("invariant", "stationary weights as CSV");
    add_common(invariant, o);
    invariant->add_option("--dump-matrix", o.dump_matrix, "write the generator in coordinate format");
    invariant->add_flag("--ergodicity", o.ergodicity, "also estimate the TV decay rate (JSON)");
    invariant->add_option("--horizon", o.horizon, "TV decay horizon (default from the spectral gap)");
    auto* corrector = app.add_subcommand("corrector", "corrector beta and its gradient as CSV");
    add_common(corrector, o);
    corrector->add_option("--dump-matrix", o.dump_matrix, "write the generator in coordinate format");
    auto* sigma = app.add_subcommand("sigma", "effective drift and covariance as JSON");
    add_common(sigma, o);
    sigma->add_option("--dump-matrix", o.dump_matrix, "write the generator in coordinate format");
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo ensemble summary as JSON");
    add_common(simulate, o);
    add_simulation(simulate, o);
    simulate->add_option("--endpoints", o.endpoints, "write scaled endpoints as CSV");
    auto* verify = app.add_subcommand("verify", "full verification report as JSON");
    add_common(verify, o);
    add_simulation(verify, o);
    verify->add_option("--etp2-tol", o.etp2_tol, "relative tolerance for the second-characteristic check");
    verify->add_option("--etp1-tol", o.etp1_tol, "tolerance for scaled-jump counts at the smallest epsilon");
    verify->add_option("--alpha", o.alpha, "significance level of the Gaussianity tests");
    verify->add_option("--horizon", o.horizon, "TV decay horizon for the ergodicity estimate");
    verify->add_flag("--summary", o.summary, "print a text summary to stderr");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }
    CLI::App* chosen = app.get_subcommands().front();
    try {
        merge_config(o, *chosen);
        return run(chosen->get_name(), o);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n\n" << chosen->help();
        return kExitUsage;
    } catch (const StageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code() == ErrorCode::Parse ? kExitUsage : kExitFailed;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code() == ErrorCode::Parse || e.code() == ErrorCode::InvalidArgument ? kExitUsage : kExitFailed;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailed;
    }
}
