#pragma once

// Experiment orchestration: run a set of methods from matched start points
// over many replications, summarize the per-run metrics with quartiles,
// estimate observed linear convergence rates from traces, and export results
// as CSV or JSON.
//
// Determinism: replication r draws its start from a fresh generator seeded
// with base_seed + r, so runs are reproducible and parallelize without
// sequence coupling.  Failed runs (solver errors or non-convergence at the
// iteration cap) are counted, and quantiles are computed over successful
// runs only.  Every method sees bit-identical start points; the harness
// verifies this by hashing the starts each method consumed.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "accelerators.hpp"
#include "core.hpp"
#include "errors.hpp"
#include "linalg.hpp"
#include "rng.hpp"

namespace mmaccel {

struct MethodSpec {
    std::string id;       // label used in summaries and exports
    SolverConfig config;  // tolerance and max_iterations must match across methods
};

struct ExperimentSpec {
    FixedPointProblem problem;
    std::vector<MethodSpec> methods;
    std::size_t replications = 1;
    std::uint64_t base_seed = 0;
    // Draws one start point from the replication's generator; when absent,
    // fixed_start is used for every replication.
    std::function<Vector(Rng64&)> start_rule;
    Vector fixed_start;
    std::size_t threads = 1;
};

struct MetricSummary {
    double min = std::numeric_limits<double>::quiet_NaN();
    double q1 = std::numeric_limits<double>::quiet_NaN();
    double median = std::numeric_limits<double>::quiet_NaN();
    double q3 = std::numeric_limits<double>::quiet_NaN();
    double max = std::numeric_limits<double>::quiet_NaN();
};

// Fixed metric order used everywhere: iterations, f_evals, objective,
// residual, elapsed.
inline const std::vector<std::string>& summary_metric_names() {
    static const std::vector<std::string> names = {"iterations", "f_evals", "objective",
                                                   "residual", "elapsed"};
    return names;
}

struct SummaryRecord {
    std::string method;
    std::vector<std::pair<std::string, MetricSummary>> metrics;  // canonical order
    std::size_t replications_total = 0;
    std::size_t replications_successful = 0;  // converged without error
    double success_fraction = 0.0;
    std::size_t fallback_total = 0;      // over successful runs
    std::uint64_t start_hash = 0;        // combined hash of the starts this method saw
};

// ---------------------------------------------------------------------------
// Hashing of start points (verifies matched starts across methods)

inline std::uint64_t fnv1a_hash_doubles(const Vector& v) {
    std::uint64_t h = 1469598103934665603ull;
    for (double d : v) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, &d, sizeof bits);
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xffu;
            h *= 1099511628211ull;
        }
    }
    return h;
}

namespace detail {

inline void fnv1a_mix(std::uint64_t& h, std::uint64_t value) {
    for (int i = 0; i < 8; ++i) {
        h ^= (value >> (8 * i)) & 0xffu;
        h *= 1099511628211ull;
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Experiment runner

inline std::vector<SummaryRecord> run_experiment(const ExperimentSpec& spec) {
    if (spec.replications == 0) throw ConfigError("run_experiment: replications must be >= 1");
    if (spec.methods.empty()) throw ConfigError("run_experiment: no methods given");
    for (const MethodSpec& m : spec.methods) {
        if (m.config.tolerance != spec.methods.front().config.tolerance ||
            m.config.max_iterations != spec.methods.front().config.max_iterations)
            throw ConfigError(
                "run_experiment: all methods must share the same tolerance and max_iterations");
    }

    const std::size_t n_rep = spec.replications;
    const std::size_t n_meth = spec.methods.size();

    // Matched starts: one per replication, shared by every method.
    std::vector<Vector> starts(n_rep);
    for (std::size_t r = 0; r < n_rep; ++r) {
        if (spec.start_rule) {
            Rng64 rng(spec.base_seed + r);
            starts[r] = spec.start_rule(rng);
        } else {
            if (spec.fixed_start.empty())
                throw ConfigError("run_experiment: no start rule and no fixed start");
            starts[r] = spec.fixed_start;
        }
    }

    std::vector<std::vector<std::optional<SolveReport>>> results(
        n_meth, std::vector<std::optional<SolveReport>>(n_rep));
    std::vector<std::vector<std::uint64_t>> start_hashes(n_meth,
                                                         std::vector<std::uint64_t>(n_rep, 0));

    auto run_one = [&](std::size_t m, std::size_t r) {
        const Vector& x0 = starts[r];
        start_hashes[m][r] = fnv1a_hash_doubles(x0);
        try {
            results[m][r] = solve(spec.problem, spec.methods[m].config, x0);
        } catch (const std::exception&) {
            results[m][r] = std::nullopt;  // failed-run marker
        }
    };

    if (spec.threads > 1 && n_rep > 1) {
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            for (;;) {
                const std::size_t r = next.fetch_add(1);
                if (r >= n_rep) break;
                for (std::size_t m = 0; m < n_meth; ++m) run_one(m, r);
            }
        };
        const std::size_t pool_size = std::min(spec.threads, n_rep);
        std::vector<std::thread> pool;
        pool.reserve(pool_size);
        for (std::size_t t = 0; t < pool_size; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    } else {
        for (std::size_t r = 0; r < n_rep; ++r)
            for (std::size_t m = 0; m < n_meth; ++m) run_one(m, r);
    }

    // Combined per-method start hash; all methods must agree.
    std::vector<std::uint64_t> combined(n_meth, 1469598103934665603ull);
    for (std::size_t m = 0; m < n_meth; ++m)
        for (std::size_t r = 0; r < n_rep; ++r) detail::fnv1a_mix(combined[m], start_hashes[m][r]);
    for (std::size_t m = 1; m < n_meth; ++m)
        if (combined[m] != combined[0])
            throw Error("run_experiment: start points diverged across methods");

    std::vector<SummaryRecord> records;
    records.reserve(n_meth);
    for (std::size_t m = 0; m < n_meth; ++m) {
        SummaryRecord rec;
        rec.method = spec.methods[m].id;
        rec.replications_total = n_rep;
        rec.start_hash = combined[m];

        std::vector<const SolveReport*> ok;
        for (std::size_t r = 0; r < n_rep; ++r) {
            if (results[m][r] && results[m][r]->converged) ok.push_back(&*results[m][r]);
        }
        rec.replications_successful = ok.size();
        rec.success_fraction =
            static_cast<double>(ok.size()) / static_cast<double>(n_rep);
        for (const SolveReport* rep : ok) rec.fallback_total += rep->fallback_count;

        for (const std::string& metric : summary_metric_names()) {
            MetricSummary s;  // stays NaN when no data
            std::vector<double> vals;
            vals.reserve(ok.size());
            bool usable = !ok.empty();
            for (const SolveReport* rep : ok) {
                double v = std::numeric_limits<double>::quiet_NaN();
                if (metric == "iterations") v = static_cast<double>(rep->iterations);
                else if (metric == "f_evals") v = static_cast<double>(rep->f_evals);
                else if (metric == "objective")
                    v = rep->objective_value ? *rep->objective_value
                                             : std::numeric_limits<double>::quiet_NaN();
                else if (metric == "residual") v = rep->residual_norm;
                else if (metric == "elapsed") v = rep->elapsed_seconds;
                if (std::isnan(v)) usable = false;
                vals.push_back(v);
            }
            if (usable) {
                std::vector<double> q = quantiles(vals, {0.0, 0.25, 0.5, 0.75, 1.0});
                s = MetricSummary{q[0], q[1], q[2], q[3], q[4]};
            }
            rec.metrics.emplace_back(metric, s);
        }
        records.push_back(std::move(rec));
    }

    std::sort(records.begin(), records.end(),
              [](const SummaryRecord& a, const SummaryRecord& b) { return a.method < b.method; });
    return records;
}

// ---------------------------------------------------------------------------
// Convergence-rate diagnostics

struct RateEstimate {
    double linear_rate_estimate = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> ratios;  // r_k = |G(x_{k+1})| / |G(x_k)|
};

// Consecutive residual-norm ratios from a trace, and the geometric mean of
// the last (up to) five as the observed linear rate.  Pairs whose denominator
// is zero are excluded (the iteration has already landed on the root).
inline RateEstimate estimate_rate(const std::vector<TraceRecord>& trace) {
    if (trace.size() < 4)
        throw InvalidArgument("estimate_rate: need at least 4 trace records, got " +
                              std::to_string(trace.size()));
    RateEstimate est;
    for (std::size_t k = 0; k + 1 < trace.size(); ++k) {
        const double den = trace[k].residual_norm;
        if (den > 0.0) est.ratios.push_back(trace[k + 1].residual_norm / den);
    }
    if (est.ratios.empty())
        throw InvalidArgument("estimate_rate: no usable residual ratios in trace");
    const std::size_t take = std::min<std::size_t>(5, est.ratios.size());
    double log_sum = 0.0;
    for (std::size_t k = est.ratios.size() - take; k < est.ratios.size(); ++k)
        log_sum += std::log(est.ratios[k]);
    est.linear_rate_estimate = std::exp(log_sum / static_cast<double>(take));
    return est;
}

// ---------------------------------------------------------------------------
// Export

enum class ExportFormat { csv, json };

namespace detail {

inline std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// JSON has no NaN/Inf literals; such values become null.
inline std::string json_number(double v) {
    if (!std::isfinite(v)) return "null";
    return format_g17(v);
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);  // binary: keep LF endings everywhere
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("failed while writing '" + path + "'");
}

}  // namespace detail

inline std::string render_results_csv(const std::vector<SummaryRecord>& records) {
    std::string out = "method,metric,min,q1,median,q3,max,replications\n";
    for (const SummaryRecord& rec : records) {
        for (const auto& [metric, s] : rec.metrics) {
            out += detail::csv_field(rec.method);
            out += ',';
            out += detail::csv_field(metric);
            out += ',';
            out += detail::format_g17(s.min);
            out += ',';
            out += detail::format_g17(s.q1);
            out += ',';
            out += detail::format_g17(s.median);
            out += ',';
            out += detail::format_g17(s.q3);
            out += ',';
            out += detail::format_g17(s.max);
            out += ',';
            out += std::to_string(rec.replications_successful);
            out += '\n';
        }
    }
    return out;
}

inline std::string render_results_json(const std::vector<SummaryRecord>& records) {
    std::string out = "{\n  \"records\": [";
    bool first_rec = true;
    for (const SummaryRecord& rec : records) {
        out += first_rec ? "\n" : ",\n";
        first_rec = false;
        out += "    {\n";
        out += "      \"method\": \"" + rec.method + "\",\n";
        out += "      \"replications_total\": " + std::to_string(rec.replications_total) + ",\n";
        out += "      \"replications_successful\": " +
               std::to_string(rec.replications_successful) + ",\n";
        out += "      \"success_fraction\": " + detail::json_number(rec.success_fraction) + ",\n";
        out += "      \"fallback_total\": " + std::to_string(rec.fallback_total) + ",\n";
        out += "      \"start_hash\": " + std::to_string(rec.start_hash) + ",\n";
        out += "      \"metrics\": {";
        bool first_metric = true;
        for (const auto& [metric, s] : rec.metrics) {
            out += first_metric ? "\n" : ",\n";
            first_metric = false;
            out += "        \"" + metric + "\": {\"min\": " + detail::json_number(s.min) +
                   ", \"q1\": " + detail::json_number(s.q1) +
                   ", \"median\": " + detail::json_number(s.median) +
                   ", \"q3\": " + detail::json_number(s.q3) +
                   ", \"max\": " + detail::json_number(s.max) + "}";
        }
        out += "\n      }\n    }";
    }
    out += "\n  ]\n}\n";
    return out;
}

inline void export_results(const std::vector<SummaryRecord>& records, ExportFormat format,
                           const std::string& path) {
    detail::write_text_file(path, format == ExportFormat::csv ? render_results_csv(records)
                                                              : render_results_json(records));
}

inline std::string render_trace_csv(const SolveReport& report) {
    if (report.trace.empty())
        throw InvalidArgument("export_trace: report carries no trace (record_trace was off?)");
    const std::size_t p = report.trace.front().iterate.size();
    std::string out = "iteration";
    for (std::size_t j = 1; j <= p; ++j) out += ",x_" + std::to_string(j);
    out += ",residual_norm,objective\n";
    for (std::size_t k = 0; k < report.trace.size(); ++k) {
        const TraceRecord& t = report.trace[k];
        out += std::to_string(k);
        for (std::size_t j = 0; j < p; ++j) {
            out += ',';
            out += detail::format_g17(t.iterate[j]);
        }
        out += ',';
        out += detail::format_g17(t.residual_norm);
        out += ',';
        out += t.objective ? detail::format_g17(*t.objective) : "nan";
        out += '\n';
    }
    return out;
}

inline void export_trace(const SolveReport& report, const std::string& path) {
    detail::write_text_file(path, render_trace_csv(report));
}

}  // namespace mmaccel
