// Command-line front end: single solves (run), replicated benchmark suites
// (bench), problem/method listings (list), and iterate-trace export (trace).
//
// Exit codes: 0 success, 1 solver failure (including non-convergence at the
// iteration cap), 2 usage errors.  Usage errors are detected before anything
// is written to the filesystem.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include <mmaccel/mmaccel.hpp>

namespace {

using namespace mmaccel;

// Errors of argument interpretation (unknown names, malformed values,
// flag/problem mismatches): reported on stderr with exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Flag containers

struct ProblemFlags {
    std::string problem;
    std::string dataset = "a";     // trunc-bb
    std::size_t dim = 0;           // quadratic / rayleigh / mvt (0 = default)
    std::string mode = "largest";  // rayleigh
    std::size_t obs = 200;         // mvt
    double nu = 1.0;               // mvt
    bool px = false;               // mvt

    // Which flags the user actually passed (for namespacing checks).
    bool has_dataset = false, has_dim = false, has_mode = false, has_obs = false,
         has_nu = false, has_px = false;
};

struct ProblemBundle {
    FixedPointProblem problem;
    Vector default_start;
    std::function<Vector(Rng64&)> start_rule;  // used by bench
};

void check_flag_scope(const ProblemFlags& f) {
    auto reject = [&](bool present, const char* flag, const char* scope) {
        if (present)
            throw UsageError(std::string(flag) + " applies only to " + scope +
                             ", not to problem '" + f.problem + "'");
    };
    if (f.problem != "trunc-bb") reject(f.has_dataset, "--dataset", "trunc-bb");
    if (f.problem != "quadratic" && f.problem != "rayleigh" && f.problem != "mvt")
        reject(f.has_dim, "--dim", "quadratic/rayleigh/mvt");
    if (f.problem != "rayleigh") reject(f.has_mode, "--mode", "rayleigh");
    if (f.problem != "mvt") {
        reject(f.has_obs, "--obs", "mvt");
        reject(f.has_nu, "--nu", "mvt");
        reject(f.has_px, "--px", "mvt");
    }
}

ProblemBundle build_problem(const ProblemFlags& f, std::uint64_t seed) {
    check_flag_scope(f);
    ProblemBundle out;
    if (f.problem == "cosine") {
        out.problem = cosine_problem();
        out.default_start = {1.0};
        out.start_rule = [](Rng64& rng) {
            return Vector{rng.uniform(0.0, 2.0 * 3.14159265358979323846)};
        };
    } else if (f.problem == "quadratic") {
        const std::size_t p = f.dim ? f.dim : 100;
        QuadraticInstance inst = quadratic_problem(p, seed);
        out.problem = inst.problem;
        out.default_start = Vector(p, 0.0);
        Vector star = inst.theta_star;
        out.start_rule = [star, p](Rng64& rng) {
            Vector x(p);
            const double sd = std::sqrt(1000.0);
            for (std::size_t i = 0; i < p; ++i) x[i] = star[i] + sd * rng.normal();
            return x;
        };
    } else if (f.problem == "trunc-bb") {
        if (f.dataset.size() != 1 || f.dataset[0] < 'a' || f.dataset[0] > 'd')
            throw UsageError("--dataset must be one of a, b, c, d");
        out.problem = trunc_bb_problem(lidwell_data(f.dataset[0]));
        out.default_start = {0.5, 1.0};
        out.start_rule = [](Rng64& rng) {
            return Vector{rng.uniform(0.05, 0.95), rng.log_uniform(0.1, 5.0)};
        };
    } else if (f.problem == "rayleigh") {
        const std::size_t p = f.dim ? f.dim : 100;
        RayleighMode mode;
        if (f.mode == "largest") mode = RayleighMode::largest;
        else if (f.mode == "smallest") mode = RayleighMode::smallest;
        else throw UsageError("--mode must be 'largest' or 'smallest'");
        out.problem = rayleigh_problem(rayleigh_instance(p, seed, mode));
        out.default_start = Vector(p, 1.0 / std::sqrt(static_cast<double>(p)));
        out.start_rule = [p](Rng64& rng) {
            Vector x(p);
            double n = 0.0;
            do {
                for (std::size_t i = 0; i < p; ++i) x[i] = rng.normal();
                n = norm2(x);
            } while (!(n > 0.0));
            for (std::size_t i = 0; i < p; ++i) x[i] /= n;
            return x;
        };
    } else if (f.problem == "mvt") {
        const std::size_t p = f.dim ? f.dim : 25;
        DenseMatrix data = mvt_generate_data(p, f.obs, f.nu, seed);
        out.problem = mvt_problem(data, f.nu, f.px);
        out.default_start = mvt_standard_start(data);
        Vector base = out.default_start;
        out.start_rule = [base, p](Rng64& rng) {
            Vector x = base;
            for (std::size_t i = 0; i < p; ++i) x[i] += 0.1 * rng.normal();
            return x;
        };
    } else {
        throw UsageError("unknown problem '" + f.problem +
                         "' (expected cosine, quadratic, trunc-bb, rayleigh, or mvt)");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Method tokens: a method name optionally suffixed with a single digit that
// selects the secant count (bqn, zal) or the steplength variant (squarem).

SolverConfig parse_method_token(const std::string& token) {
    std::string base = token;
    int digit = -1;
    if (!base.empty() && base.back() >= '1' && base.back() <= '9' && base != "broyden-classic") {
        digit = base.back() - '0';
        base.pop_back();
    }
    Method method;
    try {
        method = method_from_string(base);
    } catch (const InvalidArgument&) {
        throw UsageError("unknown method '" + token +
                         "' (see `list` for available methods)");
    }
    SolverConfig cfg = default_config(method);
    if (digit > 0) {
        switch (method) {
            case Method::bqn:
            case Method::zal: cfg.secant_count = static_cast<std::size_t>(digit); break;
            case Method::squarem:
                if (digit > 3) throw UsageError("squarem variants are 1, 2, 3");
                cfg.squarem_variant = digit;
                break;
            default:
                throw UsageError("method '" + base + "' takes no numeric suffix");
        }
    }
    return cfg;
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> parts;
    std::size_t begin = 0;
    while (begin <= s.size()) {
        std::size_t comma = s.find(',', begin);
        if (comma == std::string::npos) comma = s.size();
        parts.push_back(s.substr(begin, comma - begin));
        begin = comma + 1;
    }
    if (!parts.empty() && parts.back().empty() && s.empty()) parts.clear();
    return parts;
}

Vector parse_x0(const std::string& s) {
    Vector x;
    for (const std::string& piece : split_commas(s)) {
        if (piece.empty()) throw UsageError("--x0: empty component in '" + s + "'");
        char* end = nullptr;
        double v = std::strtod(piece.c_str(), &end);
        if (end == piece.c_str() || *end != '\0')
            throw UsageError("--x0: cannot parse component '" + piece + "'");
        x.push_back(v);
    }
    if (x.empty()) throw UsageError("--x0: no components given");
    return x;
}

std::uint64_t effective_seed(std::uint64_t flag_seed) {
    const char* env = std::getenv("MM_ACCEL_SEED");
    if (!env || *env == '\0') return flag_seed;
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0')
        throw UsageError(std::string("MM_ACCEL_SEED is set but not a number: '") + env + "'");
    return static_cast<std::uint64_t>(v);
}

// ---------------------------------------------------------------------------
// Output helpers

std::string g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string json_num(double v) { return std::isfinite(v) ? g17(v) : "null"; }

void print_report_text(const std::string& problem, const std::string& method,
                       const SolveReport& rep) {
    std::printf("problem:              %s\n", problem.c_str());
    std::printf("method:               %s\n", method.c_str());
    std::printf("converged:            %s\n", rep.converged ? "yes" : "no");
    std::printf("iterations:           %zu\n", rep.iterations);
    std::printf("f_evals:              %zu\n", rep.f_evals);
    std::printf("objective_evals:      %zu\n", rep.objective_evals);
    std::printf("fallback_count:       %zu\n", rep.fallback_count);
    std::printf("skipped_secant_pairs: %zu\n", rep.skipped_secant_pairs);
    std::printf("residual_norm:        %.10g\n", rep.residual_norm);
    if (rep.objective_value)
        std::printf("objective:            %.10f\n", *rep.objective_value);
    else
        std::printf("objective:            (problem has no objective)\n");
    std::printf("elapsed_seconds:      %.6f\n", rep.elapsed_seconds);
    if (rep.solution.size() <= 8) {
        std::printf("solution:            ");
        for (double c : rep.solution) std::printf(" %.10g", c);
        std::printf("\n");
    } else {
        std::printf("solution:             (%zu components; first 4:", rep.solution.size());
        for (std::size_t i = 0; i < 4; ++i) std::printf(" %.6g", rep.solution[i]);
        std::printf(" ...)\n");
    }
}

void print_report_json(const std::string& problem, const std::string& method,
                       const SolveReport& rep) {
    std::string out = "{\n";
    out += "  \"problem\": \"" + problem + "\",\n";
    out += "  \"method\": \"" + method + "\",\n";
    out += std::string("  \"converged\": ") + (rep.converged ? "true" : "false") + ",\n";
    out += "  \"iterations\": " + std::to_string(rep.iterations) + ",\n";
    out += "  \"f_evals\": " + std::to_string(rep.f_evals) + ",\n";
    out += "  \"objective_evals\": " + std::to_string(rep.objective_evals) + ",\n";
    out += "  \"fallback_count\": " + std::to_string(rep.fallback_count) + ",\n";
    out += "  \"skipped_secant_pairs\": " + std::to_string(rep.skipped_secant_pairs) + ",\n";
    out += "  \"residual_norm\": " + json_num(rep.residual_norm) + ",\n";
    out += "  \"objective\": " +
           (rep.objective_value ? json_num(*rep.objective_value) : std::string("null")) + ",\n";
    out += "  \"elapsed_seconds\": " + json_num(rep.elapsed_seconds) + ",\n";
    out += "  \"solution\": [";
    for (std::size_t i = 0; i < rep.solution.size(); ++i) {
        if (i) out += ", ";
        out += json_num(rep.solution[i]);
    }
    out += "]\n}\n";
    std::fputs(out.c_str(), stdout);
}

void print_bench_table(const std::vector<SummaryRecord>& records) {
    std::printf("%-16s %11s  %-21s %-21s %-14s %s\n", "method", "success",
                "iterations q1/med/q3", "f_evals q1/med/q3", "objective(med)", "residual(med)");
    for (const SummaryRecord& rec : records) {
        const MetricSummary& it = rec.metrics[0].second;
        const MetricSummary& fe = rec.metrics[1].second;
        const MetricSummary& obj = rec.metrics[2].second;
        const MetricSummary& res = rec.metrics[3].second;
        char success[32];
        std::snprintf(success, sizeof success, "%zu/%zu", rec.replications_successful,
                      rec.replications_total);
        char iter_cell[64], fe_cell[64];
        std::snprintf(iter_cell, sizeof iter_cell, "%.0f / %.0f / %.0f", it.q1, it.median, it.q3);
        std::snprintf(fe_cell, sizeof fe_cell, "%.0f / %.0f / %.0f", fe.q1, fe.median, fe.q3);
        std::printf("%-16s %11s  %-21s %-21s %-14.6g %.3g\n", rec.method.c_str(), success,
                    iter_cell, fe_cell, obj.median, res.median);
    }
}

// ---------------------------------------------------------------------------
// Subcommand execution

struct CommonSolveFlags {
    std::string x0_text;
    double tol = 1e-7;
    std::size_t max_iter = 100000;
    std::size_t memory = 5;
    bool no_safeguard = false;
    bool no_step_scaling = false;
};

SolveReport run_single(const ProblemBundle& bundle, const std::string& method_token,
                       const CommonSolveFlags& flags, bool record_trace) {
    SolverConfig cfg = parse_method_token(method_token);
    cfg.tolerance = flags.tol;
    cfg.max_iterations = flags.max_iter;
    cfg.memory = flags.memory;
    if (flags.no_safeguard) cfg.safeguard = false;
    if (flags.no_step_scaling) cfg.step_scaling = false;
    cfg.record_trace = record_trace;

    Vector x0 = flags.x0_text.empty() ? bundle.default_start : parse_x0(flags.x0_text);
    if (x0.size() != bundle.problem.dimension)
        throw UsageError("--x0 has " + std::to_string(x0.size()) + " components but problem '" +
                         bundle.problem.name + "' has dimension " +
                         std::to_string(bundle.problem.dimension));
    return solve(bundle.problem, cfg, x0);
}

int cmd_run(const ProblemFlags& pf, const std::string& method_token,
            const CommonSolveFlags& flags, std::uint64_t seed, bool as_json) {
    ProblemBundle bundle = build_problem(pf, seed);
    SolveReport rep = run_single(bundle, method_token, flags, false);
    if (as_json)
        print_report_json(bundle.problem.name, method_token, rep);
    else
        print_report_text(bundle.problem.name, method_token, rep);
    return rep.converged ? 0 : 1;
}

int cmd_trace(const ProblemFlags& pf, const std::string& method_token,
              const CommonSolveFlags& flags, std::uint64_t seed, const std::string& out_path) {
    ProblemBundle bundle = build_problem(pf, seed);
    SolveReport rep = run_single(bundle, method_token, flags, true);
    export_trace(rep, out_path);
    std::printf("wrote %zu trace rows to %s (converged: %s)\n", rep.trace.size(),
                out_path.c_str(), rep.converged ? "yes" : "no");
    return rep.converged ? 0 : 1;
}

int cmd_bench(const ProblemFlags& pf, const std::string& methods_text, std::size_t reps,
              std::uint64_t seed, double tol, std::size_t max_iter, std::size_t threads,
              const std::string& out_path) {
    std::vector<MethodSpec> methods;
    for (const std::string& token : split_commas(methods_text)) {
        if (token.empty()) throw UsageError("--methods: empty method token");
        SolverConfig cfg = parse_method_token(token);
        cfg.tolerance = tol;
        cfg.max_iterations = max_iter;
        methods.push_back({token, cfg});
    }
    if (methods.empty()) throw UsageError("--methods: no methods given");
    if (reps == 0) throw UsageError("--reps must be at least 1");

    ProblemBundle bundle = build_problem(pf, seed);
    ExperimentSpec spec;
    spec.problem = bundle.problem;
    spec.methods = std::move(methods);
    spec.replications = reps;
    spec.base_seed = seed;
    spec.start_rule = bundle.start_rule;
    spec.threads = threads;

    std::vector<SummaryRecord> records = run_experiment(spec);
    print_bench_table(records);
    if (!out_path.empty()) {
        ExportFormat format = ExportFormat::csv;
        if (out_path.size() >= 5 && out_path.substr(out_path.size() - 5) == ".json")
            format = ExportFormat::json;
        export_results(records, format, out_path);
        std::printf("wrote %s\n", out_path.c_str());
    }
    return 0;
}

int cmd_list() {
    std::printf("methods:\n");
    std::printf("  mm                plain fixed-point iteration of the problem map\n");
    std::printf("  bqn               dense multi-secant quasi-Newton (suffix digit = pair count, e.g. bqn2)\n");
    std::printf("  lbqn              limited-memory quasi-Newton (--memory pairs)\n");
    std::printf("  squarem           squared extrapolation (suffix digit = steplength variant 1-3)\n");
    std::printf("  zal               low-rank extrapolation with explicit mixing (suffix digit = pair count)\n");
    std::printf("  broyden-classic   classical rank-1 Broyden root finder (unsafeguarded by default)\n");
    std::printf("problems:\n");
    std::printf("  cosine            scalar map x + sin(x), objective cos(x)\n");
    std::printf("  quadratic         seeded convex quadratic via a scaled gradient step (--dim)\n");
    std::printf("  trunc-bb          zero-truncated beta-binomial likelihood (--dataset a|b|c|d)\n");
    std::printf("  rayleigh          generalized Rayleigh quotient ascent/descent (--dim, --mode)\n");
    std::printf("  mvt               multivariate-t location/scatter EM (--dim, --obs, --nu, --px)\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quasi-Newton acceleration toolkit for fixed-point iterations"};
    app.require_subcommand(1);

    ProblemFlags pf;
    CommonSolveFlags sf;
    std::string method_token = "mm";
    std::string methods_text = "mm";
    std::string out_path;
    std::uint64_t seed = 0;
    std::size_t reps = 100;
    std::size_t threads = 1;
    bool as_json = false;

    auto add_problem_flags = [&](CLI::App* cmd, bool require_problem) {
        auto* popt = cmd->add_option("--problem", pf.problem,
                                     "cosine | quadratic | trunc-bb | rayleigh | mvt");
        if (require_problem) popt->required();
        cmd->add_option("--dataset", pf.dataset, "trunc-bb household category (a|b|c|d)")
            ->each([&](const std::string&) { pf.has_dataset = true; });
        cmd->add_option("--dim", pf.dim, "dimension (quadratic/rayleigh/mvt)")
            ->each([&](const std::string&) { pf.has_dim = true; });
        cmd->add_option("--mode", pf.mode, "rayleigh target: largest | smallest")
            ->each([&](const std::string&) { pf.has_mode = true; });
        cmd->add_option("--obs", pf.obs, "mvt observation count")
            ->each([&](const std::string&) { pf.has_obs = true; });
        cmd->add_option("--nu", pf.nu, "mvt tail index (positive integer for data generation)")
            ->each([&](const std::string&) { pf.has_nu = true; });
        cmd->add_flag("--px", pf.px, "mvt: parameter-expanded update")
            ->each([&](const std::string&) { pf.has_px = true; });
        cmd->add_option("--seed", seed, "seed for instance/data generation and starts");
    };
    auto add_solve_flags = [&](CLI::App* cmd) {
        cmd->add_option("--method", method_token, "method token (see `list`)")->required();
        cmd->add_option("--x0", sf.x0_text, "start point, comma-separated");
        cmd->add_option("--tol", sf.tol, "residual-norm tolerance");
        cmd->add_option("--max-iter", sf.max_iter, "iteration cap");
        cmd->add_option("--memory", sf.memory, "lbqn stored-pair memory");
        cmd->add_flag("--no-safeguard", sf.no_safeguard, "disable the monotonicity safeguard");
        cmd->add_flag("--no-step-scaling", sf.no_step_scaling,
                      "disable quasi-Newton step scaling");
    };

    CLI::App* run_cmd = app.add_subcommand("run", "solve one problem with one method");
    add_problem_flags(run_cmd, true);
    add_solve_flags(run_cmd);
    run_cmd->add_flag("--json", as_json, "print the report as JSON");

    CLI::App* bench_cmd =
        app.add_subcommand("bench", "replicated multi-method benchmark with matched starts");
    add_problem_flags(bench_cmd, true);
    bench_cmd->add_option("--methods", methods_text, "comma-separated method tokens")->required();
    bench_cmd->add_option("--reps", reps, "replication count");
    bench_cmd->add_option("--tol", sf.tol, "residual-norm tolerance");
    bench_cmd->add_option("--max-iter", sf.max_iter, "iteration cap");
    bench_cmd->add_option("--threads", threads, "worker threads over replications");
    bench_cmd->add_option("--out", out_path, "summary file (.json for JSON, else CSV)");

    CLI::App* list_cmd = app.add_subcommand("list", "list available methods and problems");
    (void)list_cmd;

    CLI::App* trace_cmd = app.add_subcommand("trace", "solve and export the iterate trace");
    add_problem_flags(trace_cmd, true);
    add_solve_flags(trace_cmd);
    trace_cmd->add_option("--out", out_path, "trace CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        app.exit(e);                                     // prints the message
        return 2;
    }

    try {
        const std::uint64_t eff_seed = effective_seed(seed);
        if (app.got_subcommand("list")) return cmd_list();
        if (app.got_subcommand("run"))
            return cmd_run(pf, method_token, sf, eff_seed, as_json);
        if (app.got_subcommand("trace"))
            return cmd_trace(pf, method_token, sf, eff_seed, out_path);
        if (app.got_subcommand("bench"))
            return cmd_bench(pf, methods_text, reps, eff_seed, sf.tol, sf.max_iter, threads,
                             out_path);
        std::fprintf(stderr, "error: no subcommand given\n");
        return 2;
    } catch (const UsageError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
