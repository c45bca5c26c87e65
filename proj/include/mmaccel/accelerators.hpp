#pragma once

// Solver engines: plain fixed-point iteration (mm), dense multi-secant
// quasi-Newton acceleration (bqn), its limited-memory variant (lbqn), the
// squared-extrapolation scheme (squarem, three steplengths), the scalar/low-
// rank Anderson-style extrapolation (zal), and the classical Broyden root
// finder (broyden-classic), plus the shared monotonicity safeguard and
// steplength helpers and the solve() dispatcher.
//
// Shared loop shape (two-evaluation methods): each pass evaluates F at the
// current iterate, records the residual, and stops inclusively at the
// tolerance or at the iteration cap; otherwise it evaluates F a second time
// at F(x), forms the difference pair, proposes a candidate, and runs the
// safeguard (accept the candidate only when it is valid and does not increase
// the objective beyond a tiny slack; otherwise fall back to the
// double-update F(F(x)), which is monotone by construction).

#include <chrono>
#include <cmath>
#include <cstddef>
#include <deque>
#include <optional>
#include <utility>
#include <vector>

#include "core.hpp"
#include "errors.hpp"
#include "linalg.hpp"

namespace mmaccel {

// ---------------------------------------------------------------------------
// Difference pairs and their storage

struct SecantPair {
    Vector u;  // F(x) - x
    Vector v;  // G(F(x)) - G(x) = F(F(x)) - 2 F(x) + x
};

// Fixed-capacity FIFO of difference pairs; index 0 is the oldest entry.
class SecantPairBuffer {
  public:
    explicit SecantPairBuffer(std::size_t capacity) : capacity_(capacity) {
        if (capacity_ == 0) throw InvalidArgument("SecantPairBuffer capacity must be positive");
    }

    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return pairs_.size(); }
    bool empty() const { return pairs_.empty(); }

    const SecantPair& operator[](std::size_t i) const { return pairs_.at(i); }
    const SecantPair& newest() const {
        if (pairs_.empty()) throw InvalidArgument("SecantPairBuffer is empty");
        return pairs_.back();
    }

    void push(SecantPair pair) {
        if (pair.u.size() != pair.v.size())
            throw DimensionMismatch("SecantPair u and v must have equal length");
        if (pairs_.size() == capacity_) pairs_.pop_front();
        pairs_.push_back(std::move(pair));
    }

    void drop_oldest() {
        if (pairs_.empty()) throw InvalidArgument("SecantPairBuffer is empty");
        pairs_.pop_front();
    }

    void clear() { pairs_.clear(); }

  private:
    std::size_t capacity_;
    std::deque<SecantPair> pairs_;
};

struct DenseInverseJacobian {
    DenseMatrix h{0, 0};
};

// Bundle of the per-iteration quantities shared by the two-evaluation methods.
struct StepContext {
    Vector x;    // current iterate
    Vector fx;   // F(x)
    Vector ffx;  // F(F(x))
    Vector gx;   // F(x) - x
    SecantPair pair;
};

namespace detail {

inline bool all_finite(const Vector& x) {
    for (double c : x)
        if (!std::isfinite(c)) return false;
    return true;
}

inline Vector add_scaled(const Vector& x, double alpha, const Vector& d) {
    Vector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + alpha * d[i];
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Dense multi-secant update

// H = H_prev - (H_prev V - U) (V^T V)^{-1} V^T.  Satisfies H V = U (the
// secant system on all stored pairs) and is the least-change solution:
// rank(H - H_prev) <= 2q.  Throws SingularUpdateError when the Gram matrix
// V^T V fails the SPD factorization; the caller drops the oldest stored
// column and retries.
inline DenseInverseJacobian bqn_update_dense(const DenseInverseJacobian& h_prev,
                                             const DenseMatrix& u_cols,
                                             const DenseMatrix& v_cols) {
    const std::size_t p = h_prev.h.rows;
    if (h_prev.h.cols != p) throw DimensionMismatch("bqn_update_dense: H must be square");
    if (u_cols.rows != p || v_cols.rows != p)
        throw DimensionMismatch("bqn_update_dense: U and V must have p rows");
    if (u_cols.cols != v_cols.cols || u_cols.cols == 0)
        throw DimensionMismatch("bqn_update_dense: U and V must have the same positive column count");

    DenseMatrix vt = transpose(v_cols);
    DenseMatrix gram = matmul(vt, v_cols);  // q x q
    DenseMatrix proj(0, 0);
    try {
        SpdFactorization fact(gram);
        proj = fact.solve(vt);  // (V^T V)^{-1} V^T, q x p
    } catch (const NotPositiveDefinite&) {
        throw SingularUpdateError(
            "bqn_update_dense: Gram matrix of stored difference vectors is numerically singular");
    }

    DenseMatrix defect = matmul(h_prev.h, v_cols);  // H_prev V - U, p x q
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < u_cols.cols; ++j) defect(i, j) -= u_cols(i, j);
    DenseMatrix correction = matmul(defect, proj);  // p x p

    DenseInverseJacobian out = h_prev;
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) out.h(i, j) -= correction(i, j);
    return out;
}

// ---------------------------------------------------------------------------
// Steplength and scaling helpers

// omega = |u|^2 / |v|: the steplength used to scale quasi-Newton directions.
inline double steplength_omega(const Vector& u, const Vector& v) {
    double nv = norm2(v);
    if (nv < denom_floor) throw ZeroDenominator("steplength_omega: |v| is below the floor");
    return dot(u, u) / nv;
}

// nu = (u.v)/(v.v): scalar model of the inverse Jacobian used by lbqn.
inline double lbqn_scaling(const SecantPair& pair) {
    if (norm2(pair.v) < denom_floor)
        throw ZeroDenominator("lbqn_scaling: |v| is below the floor");
    return dot(pair.u, pair.v) / dot(pair.v, pair.v);
}

// Matrix-free product H_k g for the limited-memory recursion with base
// H = nu*I: walk the stored pairs newest to oldest, projecting out each v and
// accumulating the coefficients; stored pairs with |v| below the floor are
// skipped and counted into *skipped_pairs when provided.
inline Vector lbqn_apply(const SecantPairBuffer& buffer, double nu, const Vector& g,
                         std::size_t* skipped_pairs = nullptr) {
    Vector t = g;
    std::vector<double> coeff(buffer.size(), 0.0);
    std::vector<char> used(buffer.size(), 0);
    for (std::size_t k = buffer.size(); k-- > 0;) {
        const SecantPair& pair = buffer[k];
        if (pair.v.size() != g.size())
            throw DimensionMismatch("lbqn_apply: stored pair length differs from g");
        if (norm2(pair.v) < denom_floor) {
            if (skipped_pairs) ++*skipped_pairs;
            continue;
        }
        double c = dot(pair.v, t) / dot(pair.v, pair.v);
        for (std::size_t i = 0; i < t.size(); ++i) t[i] -= c * pair.v[i];
        coeff[k] = c;
        used[k] = 1;
    }
    Vector out(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) out[i] = nu * t[i];
    for (std::size_t k = buffer.size(); k-- > 0;) {
        if (!used[k]) continue;
        const SecantPair& pair = buffer[k];
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += coeff[k] * pair.u[i];
    }
    return out;
}

// The three extrapolation steplengths: 1 -> (u.v)/(v.v), 2 -> (u.u)/(u.v),
// 3 -> -|u|/|v|.
inline double squarem_steplength(const Vector& u, const Vector& v, int variant) {
    double uu = dot(u, u);
    double uv = dot(u, v);
    double vv = dot(v, v);
    switch (variant) {
        case 1:
            if (vv <= denom_floor) throw ZeroDenominator("squarem_steplength(1): v.v below floor");
            return uv / vv;
        case 2:
            if (std::fabs(uv) <= denom_floor)
                throw ZeroDenominator("squarem_steplength(2): |u.v| below floor");
            return uu / uv;
        case 3:
            if (vv <= denom_floor) throw ZeroDenominator("squarem_steplength(3): v.v below floor");
            return -std::sqrt(uu / vv);
    }
    throw InvalidArgument("squarem_steplength: variant must be 1, 2 or 3");
}

// ---------------------------------------------------------------------------
// Monotonicity safeguard

struct SafeguardResult {
    Vector accepted;
    bool fell_back = false;
    // Objective at the accepted point when it was evaluated during the check.
    std::optional<double> objective_at_accepted;
};

namespace detail {

// Core acceptance rule.  f_current carries the objective at the current
// iterate when monotonicity is enforced; with nullopt only validity of the
// candidate is required.  The fallback point is returned (and the event
// flagged) when the candidate is rejected.
inline SafeguardResult safeguard_choose(const FixedPointProblem& problem,
                                        const std::optional<double>& f_current,
                                        Vector candidate, Vector fallback,
                                        EvalCounter& counter) {
    if (!all_finite(candidate) || !problem.valid(candidate))
        return {std::move(fallback), true, std::nullopt};
    if (!f_current) return {std::move(candidate), false, std::nullopt};
    double f_cand = problem.objective(candidate);
    ++counter.objective_evals;
    if (f_cand <= *f_current + monotonicity_slack(*f_current))
        return {std::move(candidate), false, f_cand};
    return {std::move(fallback), true, std::nullopt};
}

}  // namespace detail

// Accept x_candidate iff it is valid and does not increase the objective
// beyond the monotonicity slack; otherwise return the fallback ffx (the
// double fixed-point update, monotone by construction) and flag the event.
// Objective evaluations are charged to the counter.
inline SafeguardResult apply_safeguard(const FixedPointProblem& problem, const Vector& x_current,
                                       const Vector& x_candidate, const Vector& ffx,
                                       EvalCounter& counter) {
    if (!problem.has_objective())
        throw ConfigError("apply_safeguard requires a problem with an objective");
    double f_cur = problem.objective(x_current);
    ++counter.objective_evals;
    return detail::safeguard_choose(problem, f_cur, x_candidate, ffx, counter);
}

// ---------------------------------------------------------------------------
// Shared solve-loop bookkeeping

namespace detail {

class SolveSession {
  public:
    SolveSession(const FixedPointProblem& problem, const SolverConfig& config, const Vector& x0)
        : problem_(problem), config_(config) {
        validate_solve_inputs(problem, config, x0);
        track_f_ = config.safeguard && problem.has_objective();
        if (track_f_) {
            f_cur_ = problem.objective(x0);
            ++counter_.objective_evals;
        }
    }

    EvalCounter& counter() { return counter_; }
    SolveReport& report() { return report_; }
    const std::optional<double>& f_cur() const { return f_cur_; }
    bool track_f() const { return track_f_; }

    // Head-of-loop bookkeeping at iterate x with residual norm rn: records
    // the trace point and reports whether the loop should stop (converged or
    // iteration cap reached).
    bool stop_here(const Vector& x, double rn) {
        if (config_.record_trace) {
            std::optional<double> obj = f_cur_;
            if (!obj && problem_.has_objective()) {
                obj = problem_.objective(x);
                ++counter_.objective_evals;
            }
            report_.trace.push_back(TraceRecord{x, rn, obj});
        }
        if (check_convergence(rn, config_)) return true;
        return report_.iterations >= config_.max_iterations;
    }

    // Commits a safeguard decision: installs the accepted point as the new
    // iterate, refreshes the cached objective, counts the iteration.
    void commit(Vector& x, SafeguardResult&& decision) {
        if (decision.fell_back) ++report_.fallback_count;
        x = std::move(decision.accepted);
        if (track_f_) {
            if (decision.objective_at_accepted) {
                f_cur_ = decision.objective_at_accepted;
            } else {
                f_cur_ = problem_.objective(x);
                ++counter_.objective_evals;
            }
        }
        ++report_.iterations;
    }

    // Commits an unconditional step (plain fixed-point iteration).
    void commit_plain(Vector& x, Vector&& next) {
        x = std::move(next);
        if (track_f_) {
            f_cur_ = problem_.objective(x);
            ++counter_.objective_evals;
        }
        ++report_.iterations;
    }

    // Overrides the cached objective with a value already computed this
    // iteration (used by squarem's stabilizing step).
    void set_f_cur(double f_value) { f_cur_ = f_value; }

    SolveReport finish(Vector x, double rn) {
        report_.solution = std::move(x);
        report_.residual_norm = rn;
        report_.converged = check_convergence(rn, config_);
        if (problem_.has_objective()) {
            if (f_cur_) {
                report_.objective_value = f_cur_;
            } else {
                report_.objective_value = problem_.objective(report_.solution);
                ++counter_.objective_evals;
            }
        }
        report_.f_evals = counter_.f_evals;
        report_.objective_evals = counter_.objective_evals;
        report_.elapsed_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
        return std::move(report_);
    }

  private:
    const FixedPointProblem& problem_;
    const SolverConfig& config_;
    SolveReport report_;
    EvalCounter counter_;
    std::optional<double> f_cur_;
    bool track_f_ = false;
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Plain fixed-point iteration

inline SolveReport mm_solve(const FixedPointProblem& problem, const SolverConfig& config,
                            const Vector& x0) {
    detail::SolveSession session(problem, config, x0);
    Vector x = x0;
    double rn = std::numeric_limits<double>::infinity();
    for (;;) {
        ResidualResult rr = residual(problem, x, session.counter());
        rn = norm2(rr.g);
        if (session.stop_here(x, rn)) break;
        session.commit_plain(x, std::move(rr.fx));
    }
    return session.finish(std::move(x), rn);
}

// ---------------------------------------------------------------------------
// Dense multi-secant quasi-Newton solver

inline SolveReport bqn_solve(const FixedPointProblem& problem, const SolverConfig& config,
                             const Vector& x0) {
    detail::SolveSession session(problem, config, x0);
    const std::size_t p = problem.dimension;
    const std::size_t q = config.secant_count;

    DenseInverseJacobian h{DenseMatrix(p, p)};
    for (std::size_t i = 0; i < p; ++i) h.h(i, i) = -1.0;  // bootstrap: -H g = g, an MM step
    SecantPairBuffer buffer(q);

    Vector x = x0;
    double rn = std::numeric_limits<double>::infinity();
    for (;;) {
        ResidualResult rr = residual(problem, x, session.counter());
        rn = norm2(rr.g);
        if (session.stop_here(x, rn)) break;

        Vector fx = std::move(rr.fx);
        Vector u = std::move(rr.g);  // F(x) - x
        ResidualResult rr2 = residual(problem, fx, session.counter());
        Vector ffx = std::move(rr2.fx);
        Vector v(p);
        for (std::size_t i = 0; i < p; ++i) v[i] = rr2.g[i] - u[i];  // F(F(x)) - 2 F(x) + x

        double vv = dot(v, v);
        bool updated = false;
        if (vv >= denom_floor) {
            buffer.push(SecantPair{u, v});
            // Update with the full stored history; on a singular Gram matrix
            // drop the oldest column and retry.  With a single stored pair a
            // singular Gram means v ~ 0, so keep the previous H.
            for (;;) {
                DenseMatrix u_cols(p, buffer.size());
                DenseMatrix v_cols(p, buffer.size());
                for (std::size_t j = 0; j < buffer.size(); ++j)
                    for (std::size_t i = 0; i < p; ++i) {
                        u_cols(i, j) = buffer[j].u[i];
                        v_cols(i, j) = buffer[j].v[i];
                    }
                try {
                    h = bqn_update_dense(h, u_cols, v_cols);
                    updated = true;
                    break;
                } catch (const SingularUpdateError&) {
                    if (buffer.size() == 1) break;
                    buffer.drop_oldest();
                }
            }
        }

        Vector candidate;
        Vector pdir = matvec(h.h, u);
        for (double& c : pdir) c = -c;  // -H G(x)
        double pn = norm2(pdir);
        if (!updated || pn < denom_floor) {
            candidate = ffx;
        } else if (config.step_scaling) {
            double omega = steplength_omega(u, v);  // |v| >= sqrt(denom_floor) here
            candidate = detail::add_scaled(x, omega / pn, pdir);
        } else {
            candidate = detail::add_scaled(x, 1.0, pdir);
        }

        session.commit(x, detail::safeguard_choose(problem, session.f_cur(), std::move(candidate),
                                                   std::move(ffx), session.counter()));
    }
    return session.finish(std::move(x), rn);
}

// ---------------------------------------------------------------------------
// Limited-memory quasi-Newton solver

inline SolveReport lbqn_solve(const FixedPointProblem& problem, const SolverConfig& config,
                              const Vector& x0) {
    detail::SolveSession session(problem, config, x0);
    const std::size_t p = problem.dimension;

    SecantPairBuffer buffer(config.memory + 1);
    double nu = -1.0;  // bootstrap: -nu g = g, an MM step

    Vector x = x0;
    double rn = std::numeric_limits<double>::infinity();
    for (;;) {
        ResidualResult rr = residual(problem, x, session.counter());
        rn = norm2(rr.g);
        if (session.stop_here(x, rn)) break;

        Vector fx = std::move(rr.fx);
        Vector u = std::move(rr.g);
        ResidualResult rr2 = residual(problem, fx, session.counter());
        Vector ffx = std::move(rr2.fx);
        Vector v(p);
        for (std::size_t i = 0; i < p; ++i) v[i] = rr2.g[i] - u[i];

        if (dot(v, v) >= denom_floor) {
            buffer.push(SecantPair{u, v});
            nu = lbqn_scaling(buffer.newest());
            if (nu == 0.0) nu = -1.0;  // orthogonal pair: fall back to the bootstrap scale
        }

        Vector candidate;
        Vector hg = lbqn_apply(buffer, nu, u, &session.report().skipped_secant_pairs);
        Vector pdir(p);
        for (std::size_t i = 0; i < p; ++i) pdir[i] = -hg[i];
        double pn = norm2(pdir);
        if (buffer.empty() || pn < denom_floor) {
            candidate = ffx;
        } else if (config.step_scaling) {
            double nv = norm2(v);
            if (nv < denom_floor) {
                candidate = ffx;
            } else {
                double omega = steplength_omega(u, v);
                candidate = detail::add_scaled(x, omega / pn, pdir);
            }
        } else {
            candidate = detail::add_scaled(x, 1.0, pdir);
        }

        session.commit(x, detail::safeguard_choose(problem, session.f_cur(), std::move(candidate),
                                                   std::move(ffx), session.counter()));
    }
    return session.finish(std::move(x), rn);
}

// ---------------------------------------------------------------------------
// Squared-extrapolation solver

inline SolveReport squarem_solve(const FixedPointProblem& problem, const SolverConfig& config,
                                 const Vector& x0) {
    detail::SolveSession session(problem, config, x0);
    const std::size_t p = problem.dimension;
    const bool use_f = session.track_f();

    double stepmax = 1.0;  // adaptive bound: |alpha| may not exceed it

    Vector x = x0;
    double rn = std::numeric_limits<double>::infinity();
    for (;;) {
        ResidualResult rr = residual(problem, x, session.counter());
        rn = norm2(rr.g);
        if (session.stop_here(x, rn)) break;

        Vector fx = std::move(rr.fx);
        Vector u = std::move(rr.g);
        ResidualResult rr2 = residual(problem, fx, session.counter());
        Vector ffx = std::move(rr2.fx);
        Vector v(p);
        for (std::size_t i = 0; i < p; ++i) v[i] = rr2.g[i] - u[i];

        // Candidate x - 2*alpha*u + alpha^2*v with alpha clipped to
        // [-stepmax, -1]; alpha = -1 reproduces ffx exactly.
        Vector candidate;
        bool hit_bound = false;
        bool have_alpha = true;
        double alpha = 0.0;
        try {
            alpha = squarem_steplength(u, v, config.squarem_variant);
        } catch (const ZeroDenominator&) {
            have_alpha = false;
        }
        if (have_alpha) {
            alpha = std::min(alpha, -1.0);
            if (alpha < -stepmax) {
                alpha = -stepmax;
                hit_bound = true;
            }
            candidate.resize(p);
            for (std::size_t i = 0; i < p; ++i)
                candidate[i] = x[i] - 2.0 * alpha * u[i] + alpha * alpha * v[i];
        } else {
            candidate = ffx;
        }

        bool cand_ok = detail::all_finite(candidate) && problem.valid(candidate);
        std::optional<double> f_cand;
        if (cand_ok && use_f) {
            f_cand = problem.objective(candidate);
            ++session.counter().objective_evals;
        }
        bool accept = cand_ok && (!use_f || *f_cand <= *session.f_cur() +
                                                 monotonicity_slack(*session.f_cur()));
        if (accept) {
            // Successful extrapolation at the bound: relax the bound.
            if (hit_bound) stepmax *= 2.0;
            SafeguardResult dec{std::move(candidate), false, f_cand};
            session.commit(x, std::move(dec));
            continue;
        }

        // Rejected extrapolation: try one stabilizing fixed-point step from
        // the candidate before falling back, then tighten the bound.
        bool took_stab = false;
        if (cand_ok) {
            ResidualResult rs = residual(problem, candidate, session.counter());
            Vector stab = std::move(rs.fx);
            if (detail::all_finite(stab) && problem.valid(stab)) {
                std::optional<double> f_stab;
                bool stab_accept = true;
                if (use_f) {
                    f_stab = problem.objective(stab);
                    ++session.counter().objective_evals;
                    stab_accept =
                        *f_stab <= *session.f_cur() + monotonicity_slack(*session.f_cur());
                }
                if (stab_accept) {
                    SafeguardResult dec{std::move(stab), false, f_stab};
                    session.commit(x, std::move(dec));
                    took_stab = true;
                }
            }
        }
        if (!took_stab) {
            SafeguardResult dec{std::move(ffx), true, std::nullopt};
            session.commit(x, std::move(dec));
        }
        stepmax = 1.0;
    }
    return session.finish(std::move(x), rn);
}

// ---------------------------------------------------------------------------
// Squared-iterate extrapolation with an explicit mixing coefficient

inline SolveReport zal_solve(const FixedPointProblem& problem, const SolverConfig& config,
                             const Vector& x0) {
    detail::SolveSession session(problem, config, x0);
    const std::size_t p = problem.dimension;
    const std::size_t q = config.secant_count;
    const bool use_f = session.track_f();

    SecantPairBuffer buffer(q);

    Vector x = x0;
    double rn = std::numeric_limits<double>::infinity();
    for (;;) {
        ResidualResult rr = residual(problem, x, session.counter());
        rn = norm2(rr.g);
        if (session.stop_here(x, rn)) break;

        Vector fx = std::move(rr.fx);
        Vector u = std::move(rr.g);
        ResidualResult rr2 = residual(problem, fx, session.counter());
        Vector ffx = std::move(rr2.fx);
        Vector v(p);
        for (std::size_t i = 0; i < p; ++i) v[i] = rr2.g[i] - u[i];

        if (q > 1 && dot(v, v) >= denom_floor) buffer.push(SecantPair{u, v});

        // Candidate.  q = 1: x_cand = (1-c) F(x) + c F(F(x)) with
        // c = -(u.u)/(u.v).  q > 1: Newton-style step on the secant model of
        // the map differential M with M U = U + V and least Frobenius norm,
        // x_cand = x + u - (U + V) z where (U^T V) z = U^T u; a singular
        // system drops the oldest stored pair and retries down to the scalar
        // form.
        Vector candidate;
        bool have_candidate = false;
        if (q > 1) {
            while (buffer.size() >= 2) {
                const std::size_t k = buffer.size();
                DenseMatrix utv(k, k);
                Vector utu(k);
                for (std::size_t a = 0; a < k; ++a) {
                    utu[a] = dot(buffer[a].u, u);
                    for (std::size_t b = 0; b < k; ++b) utv(a, b) = dot(buffer[a].u, buffer[b].v);
                }
                try {
                    Vector z = solve_general(utv, utu);
                    candidate = detail::add_scaled(x, 1.0, u);
                    for (std::size_t j = 0; j < k; ++j)
                        for (std::size_t i = 0; i < p; ++i)
                            candidate[i] -= z[j] * (buffer[j].u[i] + buffer[j].v[i]);
                    have_candidate = true;
                    break;
                } catch (const SingularMatrix&) {
                    buffer.drop_oldest();
                }
            }
        }
        if (!have_candidate) {
            double uv = dot(u, v);
            if (std::fabs(uv) <= denom_floor) {
                candidate = ffx;
            } else {
                double c = -dot(u, u) / uv;
                candidate.resize(p);
                for (std::size_t i = 0; i < p; ++i)
                    candidate[i] = (1.0 - c) * fx[i] + c * ffx[i];
            }
        }

        // Damped acceptance: halve toward ffx up to four times before the
        // full fallback; damping repairs invalid candidates as well as
        // monotonicity violations.
        bool accepted = false;
        std::optional<double> f_cand;
        for (int tries = 0; tries <= 4; ++tries) {
            bool ok = detail::all_finite(candidate) && problem.valid(candidate);
            if (ok) {
                if (!use_f) {
                    accepted = true;
                    break;
                }
                f_cand = problem.objective(candidate);
                ++session.counter().objective_evals;
                if (*f_cand <= *session.f_cur() + monotonicity_slack(*session.f_cur())) {
                    accepted = true;
                    break;
                }
            }
            if (tries == 4) break;
            for (std::size_t i = 0; i < p; ++i) candidate[i] = 0.5 * (candidate[i] + ffx[i]);
        }
        if (accepted) {
            SafeguardResult dec{std::move(candidate), false, f_cand};
            session.commit(x, std::move(dec));
        } else {
            SafeguardResult dec{std::move(ffx), true, std::nullopt};
            session.commit(x, std::move(dec));
        }
    }
    return session.finish(std::move(x), rn);
}

// ---------------------------------------------------------------------------
// Classical Broyden root finder on the residual

inline SolveReport broyden_classic_solve(const FixedPointProblem& problem,
                                         const SolverConfig& config, const Vector& x0) {
    detail::SolveSession session(problem, config, x0);
    const std::size_t p = problem.dimension;

    DenseInverseJacobian h{DenseMatrix(p, p)};
    for (std::size_t i = 0; i < p; ++i) h.h(i, i) = -1.0;  // first step is the plain MM step
    bool have_prev = false;
    Vector x_prev, g_prev;

    Vector x = x0;
    double rn = std::numeric_limits<double>::infinity();
    for (;;) {
        ResidualResult rr = residual(problem, x, session.counter());
        rn = norm2(rr.g);
        if (session.stop_here(x, rn)) break;

        if (have_prev) {
            // Rank-1 least-change update with s = x_k - x_{k-1},
            // y = G(x_k) - G(x_{k-1}): H += (s - H y) y^T / (y.y).
            Vector y(p), s(p);
            for (std::size_t i = 0; i < p; ++i) {
                s[i] = x[i] - x_prev[i];
                y[i] = rr.g[i] - g_prev[i];
            }
            double yy = dot(y, y);
            if (yy >= denom_floor) {
                Vector hy = matvec(h.h, y);
                for (std::size_t i = 0; i < p; ++i) {
                    double wi = (s[i] - hy[i]) / yy;
                    for (std::size_t j = 0; j < p; ++j) h.h(i, j) += wi * y[j];
                }
            }
        }
        x_prev = x;
        g_prev = rr.g;
        have_prev = true;

        Vector candidate = matvec(h.h, rr.g);
        for (std::size_t i = 0; i < p; ++i) candidate[i] = x[i] - candidate[i];

        // Fallback here is the single update F(x): the second update is
        // never computed by this one-evaluation method.
        session.commit(x, detail::safeguard_choose(problem, session.f_cur(), std::move(candidate),
                                                   std::move(rr.fx), session.counter()));
    }
    return session.finish(std::move(x), rn);
}

// ---------------------------------------------------------------------------
// Dispatcher

inline SolveReport solve(const FixedPointProblem& problem, const SolverConfig& config,
                         const Vector& x0) {
    switch (config.method) {
        case Method::mm: return mm_solve(problem, config, x0);
        case Method::bqn: return bqn_solve(problem, config, x0);
        case Method::lbqn: return lbqn_solve(problem, config, x0);
        case Method::squarem: return squarem_solve(problem, config, x0);
        case Method::zal: return zal_solve(problem, config, x0);
        case Method::broyden_classic: return broyden_classic_solve(problem, config, x0);
    }
    throw ConfigError("solve: unknown method");
}

}  // namespace mmaccel
