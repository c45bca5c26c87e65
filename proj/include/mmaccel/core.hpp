#pragma once

// Problem and solver abstractions: the fixed-point problem contract, solver
// configuration, evaluation accounting, and convergence bookkeeping.
//
// A problem supplies an algorithm map F taking a parameter vector to the next
// one; solving means finding x with F(x) = x.  The residual G(x) = F(x) - x
// is the root target.  The map must return finite values for every valid
// input and is assumed to map the valid set into itself (the standard descent
// -step property); solvers never evaluate the map outside the valid set.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"

namespace mmaccel {

// Absolute floor shared by every scalar denominator in steplength and scaling
// formulas.  Below it the iteration takes a plain fixed-point step instead of
// erroring out mid-solve.
inline constexpr double denom_floor = 1e-30;

// Relative slack for monotonicity checks: surrogate objective evaluations
// carry floating-point noise, so "non-increasing" is enforced only up to this.
inline double monotonicity_slack(double f_value) {
    return 1e-10 * (1.0 + std::fabs(f_value));
}

struct FixedPointProblem {
    std::size_t dimension = 0;
    std::function<Vector(const Vector&)> map;        // one fixed-point update
    std::function<double(const Vector&)> objective;  // optional; value being minimized
    std::function<bool(const Vector&)> is_valid;     // optional; domain membership
    std::string name;

    bool has_objective() const { return static_cast<bool>(objective); }
    bool valid(const Vector& x) const { return !is_valid || is_valid(x); }
};

enum class Method { mm, bqn, lbqn, squarem, zal, broyden_classic };

inline const char* method_name(Method m) {
    switch (m) {
        case Method::mm: return "mm";
        case Method::bqn: return "bqn";
        case Method::lbqn: return "lbqn";
        case Method::squarem: return "squarem";
        case Method::zal: return "zal";
        case Method::broyden_classic: return "broyden-classic";
    }
    return "?";
}

inline Method method_from_string(const std::string& s) {
    if (s == "mm") return Method::mm;
    if (s == "bqn") return Method::bqn;
    if (s == "lbqn") return Method::lbqn;
    if (s == "squarem") return Method::squarem;
    if (s == "zal") return Method::zal;
    if (s == "broyden-classic") return Method::broyden_classic;
    throw InvalidArgument("unknown method '" + s + "'");
}

struct SolverConfig {
    Method method = Method::mm;
    double tolerance = 1e-7;
    std::size_t max_iterations = 100000;
    std::size_t secant_count = 1;  // q: secant pairs kept by bqn/zal
    std::size_t memory = 5;        // m: history length for lbqn (buffer holds m+1)
    int squarem_variant = 3;       // steplength formula 1, 2 or 3
    bool safeguard = true;         // monotonicity safeguard; requires an objective
    bool step_scaling = true;      // bqn/lbqn direction scaling
    bool record_trace = false;
    std::uint64_t rng_seed = 0;    // consumed by problem factories / harness, not solvers
};

// Per-method practical defaults.  Identical to SolverConfig{} except that the
// classical Broyden baseline runs unsafeguarded: it is a pure root-finding
// iteration on G with no coupling to the objective, and tying it to the
// monotonicity safeguard would turn it into a near-copy of the plain
// fixed-point iteration.
inline SolverConfig default_config(Method m) {
    SolverConfig c;
    c.method = m;
    if (m == Method::broyden_classic) c.safeguard = false;
    return c;
}

struct EvalCounter {
    std::size_t f_evals = 0;
    std::size_t objective_evals = 0;
};

struct TraceRecord {
    Vector iterate;
    double residual_norm = 0.0;
    std::optional<double> objective;
};

struct SolveReport {
    Vector solution;
    double residual_norm = std::numeric_limits<double>::infinity();
    std::optional<double> objective_value;
    std::size_t iterations = 0;       // accepted new iterates
    std::size_t f_evals = 0;          // map invocations
    std::size_t objective_evals = 0;  // objective invocations
    std::size_t fallback_count = 0;   // safeguard reversions (validity or monotonicity)
    std::size_t skipped_secant_pairs = 0;  // stored pairs unusable in a scaling apply
    bool converged = false;
    double elapsed_seconds = 0.0;  // informational only
    std::vector<TraceRecord> trace;
};

struct ResidualResult {
    Vector g;   // F(x) - x
    Vector fx;  // F(x)
};

// One counted map evaluation plus the residual at x.  The input must be a
// valid point of the right length; a non-finite map output raises
// MapEvaluationError naming the offending coordinate.
inline ResidualResult residual(const FixedPointProblem& problem, const Vector& x,
                               EvalCounter& counter) {
    if (x.size() != problem.dimension)
        throw ConfigError("residual: point has length " + std::to_string(x.size()) +
                          ", problem '" + problem.name + "' has dimension " +
                          std::to_string(problem.dimension));
    Vector fx = problem.map(x);
    ++counter.f_evals;
    if (fx.size() != problem.dimension)
        throw ConfigError("residual: map of problem '" + problem.name +
                          "' returned length " + std::to_string(fx.size()));
    for (std::size_t i = 0; i < fx.size(); ++i)
        if (!std::isfinite(fx[i])) throw MapEvaluationError(problem.name, i);
    Vector g(fx.size());
    for (std::size_t i = 0; i < fx.size(); ++i) g[i] = fx[i] - x[i];
    return {std::move(g), std::move(fx)};
}

// Inclusive test: a residual norm exactly at the tolerance counts as
// converged.
inline bool check_convergence(double residual_norm, const SolverConfig& config) {
    return residual_norm <= config.tolerance;
}

// Validates a (problem, config, start) triple before a solve.  Throws
// ConfigError on any inconsistency.
inline void validate_solve_inputs(const FixedPointProblem& problem, const SolverConfig& config,
                                  const Vector& x0) {
    if (problem.dimension == 0) throw ConfigError("problem dimension must be positive");
    if (!problem.map) throw ConfigError("problem '" + problem.name + "' has no map");
    if (x0.size() != problem.dimension)
        throw ConfigError("initial point has length " + std::to_string(x0.size()) +
                          ", problem '" + problem.name + "' has dimension " +
                          std::to_string(problem.dimension));
    for (double c : x0)
        if (!std::isfinite(c)) throw ConfigError("initial point has a non-finite coordinate");
    if (!problem.valid(x0)) throw ConfigError("initial point is outside the problem domain");
    if (!(config.tolerance > 0.0)) throw ConfigError("tolerance must be positive");
    if (config.max_iterations == 0) throw ConfigError("max_iterations must be positive");
    if (config.safeguard && !problem.has_objective())
        throw ConfigError("safeguard=true requires an objective; problem '" + problem.name +
                          "' has none");
    if (config.method == Method::bqn || config.method == Method::zal) {
        if (config.secant_count == 0) throw ConfigError("secant_count must be at least 1");
        if (config.secant_count != 1 && config.secant_count >= problem.dimension)
            throw ConfigError("secant_count " + std::to_string(config.secant_count) +
                              " must be below the problem dimension " +
                              std::to_string(problem.dimension));
    }
    if (config.method == Method::squarem && (config.squarem_variant < 1 ||
                                             config.squarem_variant > 3))
        throw ConfigError("squarem_variant must be 1, 2 or 3");
}

}  // namespace mmaccel
