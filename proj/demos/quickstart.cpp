// Quickstart: accelerate a slow fixed-point iteration.
//
// Build (from the repository root):
//   cmake -S . -B build && cmake --build build --target quickstart
//   ./build/quickstart
//
// The demo runs maximum-likelihood estimation for a zero-truncated
// beta-binomial model twice — once by plain fixed-point iteration, once with
// quasi-Newton acceleration — and then shows how to wrap a custom map.

#include <cstdio>

#include <mmaccel/mmaccel.hpp>

int main() {
    using namespace mmaccel;

    // 1. A built-in problem: household cold-incidence data, category (a).
    FixedPointProblem mle = trunc_bb_problem(lidwell_data('a'));
    Vector start = {0.5, 1.0};

    SolveReport plain = solve(mle, default_config(Method::mm), start);
    SolveReport fast = solve(mle, default_config(Method::bqn), start);

    std::printf("truncated beta-binomial MLE, dataset (a), start (0.5, 1.0)\n");
    std::printf("  %-18s %10s %12s %16s\n", "method", "map calls", "iterations",
                "neg-log-likelihood");
    std::printf("  %-18s %10zu %12zu %16.6f\n", "plain iteration", plain.f_evals,
                plain.iterations, *plain.objective_value);
    std::printf("  %-18s %10zu %12zu %16.6f\n", "quasi-Newton", fast.f_evals, fast.iterations,
                *fast.objective_value);

    // 2. A custom problem: any contraction you can write as x -> F(x).
    //    Supplying an objective activates the monotonicity safeguard.
    FixedPointProblem custom;
    custom.name = "demo-sqrt2";
    custom.dimension = 1;
    custom.map = [](const Vector& x) { return Vector{0.5 * (x[0] + 2.0 / x[0])}; };
    custom.is_valid = [](const Vector& x) { return x[0] > 0.0; };

    SolverConfig cfg = default_config(Method::zal);
    cfg.safeguard = false;  // no objective supplied
    SolveReport root = solve(custom, cfg, {1.0});
    std::printf("\ncustom map (Heron's method for sqrt 2): x* = %.12f after %zu map calls\n",
                root.solution[0], root.f_evals);
    return 0;
}
