#pragma once

// The five benchmark problems as FixedPointProblem factories: a scalar
// sine-step toy, a seeded random convex quadratic driven by a gradient step,
// maximum likelihood for a zero-truncated beta-binomial model of household
// cold incidence, generalized Rayleigh-quotient optimization by normalized
// steepest ascent/descent with an exact line search, and multivariate-t
// location/scatter estimation by EM (with an optional parameter-expanded
// variant).  Each factory embeds its data and exposes the objective the map
// monotonically improves.

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"
#include "errors.hpp"
#include "linalg.hpp"
#include "rng.hpp"

namespace mmaccel {

// ---------------------------------------------------------------------------
// Scalar toy: F(x) = x + sin x, objective cos x

inline FixedPointProblem cosine_problem() {
    FixedPointProblem pr;
    pr.dimension = 1;
    pr.name = "cosine";
    pr.map = [](const Vector& x) { return Vector{x[0] + std::sin(x[0])}; };
    pr.objective = [](const Vector& x) { return std::cos(x[0]); };
    return pr;
}

// ---------------------------------------------------------------------------
// Seeded convex quadratic minimized by a gradient step with scale 1/l

struct QuadraticInstance {
    FixedPointProblem problem;
    double oracle_minimum = 0.0;  // objective at the direct-solve minimizer
    DenseMatrix a{0, 0};
    Vector b;
    double l = 0.0;  // step scale, strictly above the spectral norm of a
    Vector theta_star;
};

// f(theta) = 1/2 theta^T A theta + b^T theta with A = Q^T D Q, Q the
// orthonormalized frame of a seeded Gaussian matrix and D log-uniform in
// [0.1, 10] (condition number at most 100); b seeded standard Gaussian.
// F(theta) = theta - (1/l)(A theta + b).
inline QuadraticInstance quadratic_problem(std::size_t p, std::uint64_t seed) {
    if (p == 0) throw InvalidArgument("quadratic_problem: dimension must be positive");
    Rng64 rng(seed);

    DenseMatrix g(p, p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) g(i, j) = rng.normal();
    DenseMatrix q = orthonormal_columns(g);
    DenseMatrix d(p, p);
    for (std::size_t i = 0; i < p; ++i) d(i, i) = rng.log_uniform(0.1, 10.0);
    Vector b(p);
    for (std::size_t i = 0; i < p; ++i) b[i] = rng.normal();

    DenseMatrix a = matmul(transpose(q), matmul(d, q));
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i + 1; j < p; ++j) {
            double s = 0.5 * (a(i, j) + a(j, i));
            a(i, j) = s;
            a(j, i) = s;
        }

    QuadraticInstance inst;
    inst.a = a;
    inst.b = b;
    inst.l = spectral_norm_upper_bound(a);

    Vector neg_b(p);
    for (std::size_t i = 0; i < p; ++i) neg_b[i] = -b[i];
    inst.theta_star = solve_spd(a, neg_b);

    auto a_shared = std::make_shared<const DenseMatrix>(std::move(a));
    auto b_shared = std::make_shared<const Vector>(std::move(b));
    const double l = inst.l;

    inst.problem.dimension = p;
    inst.problem.name = "quadratic";
    inst.problem.map = [a_shared, b_shared, l, p](const Vector& th) {
        Vector grad = matvec(*a_shared, th);
        Vector out(p);
        for (std::size_t i = 0; i < p; ++i) out[i] = th[i] - (grad[i] + (*b_shared)[i]) / l;
        return out;
    };
    inst.problem.objective = [a_shared, b_shared](const Vector& th) {
        Vector at = matvec(*a_shared, th);
        return 0.5 * dot(th, at) + dot(*b_shared, th);
    };
    inst.oracle_minimum = inst.problem.objective(inst.theta_star);
    return inst;
}

// ---------------------------------------------------------------------------
// Zero-truncated beta-binomial likelihood for household cold incidence

struct BetaBinomialParams {
    double pi = 0.0;     // per-trial success probability, in (0,1)
    double alpha = 0.0;  // overdispersion, > 0

    Vector packed() const { return {pi, alpha}; }
    static BetaBinomialParams unpack(const Vector& x) {
        if (x.size() != 2)
            throw DimensionMismatch("BetaBinomialParams: expected length 2, got " +
                                    std::to_string(x.size()));
        return {x[0], x[1]};
    }
};

// Households of size 4; counts[k] holds the number of households with k+1
// cases.  Households with zero cases are unobservable (truncation).
struct ColdIncidenceData {
    char household_category = '?';
    std::array<int, 4> counts{};
    static constexpr int m = 4;

    int n() const { return counts[0] + counts[1] + counts[2] + counts[3]; }
};

inline ColdIncidenceData lidwell_data(char category) {
    switch (category) {
        case 'a': return {'a', {15, 5, 2, 2}};
        case 'b': return {'b', {12, 6, 7, 6}};
        case 'c': return {'c', {10, 9, 2, 7}};
        case 'd': return {'d', {26, 15, 3, 9}};
        default: break;
    }
    throw InvalidArgument(std::string("lidwell_data: unknown category '") + category + "'");
}

// P(X = x) = C(m,x) prod_{j<x}(pi + j a) prod_{j<m-x}(1 - pi + j a)
//            / prod_{j<m}(1 + j a).
inline double beta_binomial_pmf(int x, int m, const BetaBinomialParams& params) {
    if (m < 1) throw InvalidArgument("beta_binomial_pmf: m must be at least 1");
    if (x < 0 || x > m)
        throw InvalidArgument("beta_binomial_pmf: x = " + std::to_string(x) +
                              " outside 0.." + std::to_string(m));
    if (!(params.pi > 0.0 && params.pi < 1.0) || !(params.alpha > 0.0))
        throw InvalidArgument("beta_binomial_pmf: parameters outside (0,1) x (0,inf)");
    double binom = 1.0;
    for (int j = 1; j <= x; ++j) binom = binom * static_cast<double>(m - x + j) / j;
    double num = binom;
    for (int j = 0; j < x; ++j) num *= params.pi + j * params.alpha;
    for (int j = 0; j < m - x; ++j) num *= 1.0 - params.pi + j * params.alpha;
    double den = 1.0;
    for (int j = 0; j < m; ++j) den *= 1.0 + j * params.alpha;
    return num / den;
}

namespace detail {

// Parameter iterates may brush the boundary; evaluation clamps them just
// inside the domain so the map and objective stay finite there.
inline BetaBinomialParams clamp_bb(const Vector& th) {
    double pi = std::min(std::max(th[0], 1e-12), 1.0 - 1e-12);
    double alpha = std::max(th[1], 1e-12);
    return {pi, alpha};
}

}  // namespace detail

// Negative log-likelihood of the zero-truncated model:
// -sum_x c_x ln d(x) + n ln(1 - d(0)).
inline double trunc_bb_neg_loglik(const BetaBinomialParams& params,
                                  const ColdIncidenceData& data) {
    const int m = ColdIncidenceData::m;
    double d0 = beta_binomial_pmf(0, m, params);
    double nll = data.n() * std::log1p(-d0);
    for (int x = 1; x <= m; ++x) {
        if (data.counts[x - 1] == 0) continue;
        nll -= data.counts[x - 1] * std::log(beta_binomial_pmf(x, m, params));
    }
    return nll;
}

// Minorize-maximize update built from pseudocounts.  With w0 the odds of the
// unobservable zero class, s1_j counts households with at least j+1 cases,
// s2_j counts households with at most m-j-1 cases plus n*w0 imputed zeros,
// and r_j = n(1 + w0):
//   pi+    = A/(A+B),  A = sum_j s1_j pi/(pi + j a),
//                      B = sum_j s2_j (1-pi)/(1 - pi + j a)
//   alpha+ = C/D,      C = sum_j j a [s1_j/(pi + j a) + s2_j/(1 - pi + j a)],
//                      D = sum_j r_j j/(1 + j a).
inline FixedPointProblem trunc_bb_problem(const ColdIncidenceData& data) {
    FixedPointProblem pr;
    pr.dimension = 2;
    pr.name = "trunc-bb";
    pr.is_valid = [](const Vector& th) {
        return th.size() == 2 && std::isfinite(th[0]) && std::isfinite(th[1]) &&
               th[0] > 0.0 && th[0] < 1.0 && th[1] > 0.0;
    };
    pr.map = [data](const Vector& th) -> Vector {
        const BetaBinomialParams cur = detail::clamp_bb(th);
        const double pi = cur.pi;
        const double a = cur.alpha;
        const int m = ColdIncidenceData::m;
        const double n = data.n();
        const double d0 = beta_binomial_pmf(0, m, cur);
        const double w0 = d0 / (1.0 - d0);
        double acc_a = 0.0, acc_b = 0.0, acc_c = 0.0, acc_d = 0.0;
        for (int j = 0; j < m; ++j) {
            double s1 = 0.0, s2 = 0.0;
            for (int x = 1; x <= m; ++x) {
                if (x >= j + 1) s1 += data.counts[x - 1];
                if (x <= m - j - 1) s2 += data.counts[x - 1];
            }
            s2 += n * w0;
            const double r = n * (1.0 + w0);
            acc_a += s1 * pi / (pi + j * a);
            acc_b += s2 * (1.0 - pi) / (1.0 - pi + j * a);
            acc_c += j * a * (s1 / (pi + j * a) + s2 / (1.0 - pi + j * a));
            acc_d += r * j / (1.0 + j * a);
        }
        return {acc_a / (acc_a + acc_b), acc_c / acc_d};
    };
    pr.objective = [data](const Vector& th) {
        return trunc_bb_neg_loglik(detail::clamp_bb(th), data);
    };
    return pr;
}

// ---------------------------------------------------------------------------
// Generalized Rayleigh quotient R(x) = x^T A x / x^T B x on the unit sphere

enum class RayleighMode { largest, smallest };

struct RayleighInstance {
    DenseMatrix a{0, 0};
    DenseMatrix b{0, 0};
    RayleighMode mode = RayleighMode::largest;
};

// Seeded instance: A is a symmetrized standard Gaussian matrix; B has a
// seeded orthonormal eigenframe with eigenvalues log-uniform in [1e-3, 1],
// so the pencil is genuinely non-spherical and plain iteration is slow.
inline RayleighInstance rayleigh_instance(std::size_t p, std::uint64_t seed,
                                          RayleighMode mode) {
    if (p == 0) throw InvalidArgument("rayleigh_instance: dimension must be positive");
    Rng64 rng(seed);

    DenseMatrix m(p, p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) m(i, j) = rng.normal();
    RayleighInstance inst;
    inst.a = DenseMatrix(p, p);
    const double root_half = 1.0 / std::sqrt(2.0);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i; j < p; ++j) {
            double s = (m(i, j) + m(j, i)) * root_half;
            inst.a(i, j) = s;
            inst.a(j, i) = s;
        }

    DenseMatrix z(p, p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) z(i, j) = rng.normal();
    DenseMatrix q = orthonormal_columns(z);
    Vector d(p);
    for (std::size_t i = 0; i < p; ++i) d[i] = rng.log_uniform(1e-3, 1.0);
    inst.b = DenseMatrix(p, p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i; j < p; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < p; ++k) s += q(i, k) * d[k] * q(j, k);
            inst.b(i, j) = s;
            inst.b(j, i) = s;
        }

    inst.mode = mode;
    return inst;
}

inline double rayleigh_quotient(const RayleighInstance& inst, const Vector& x) {
    Vector ax = matvec(inst.a, x);
    Vector bx = matvec(inst.b, x);
    return dot(x, ax) / dot(x, bx);
}

// F(x) = normalize(x + t* grad R(x)) where grad R = (2/x^T B x)(A x - R B x)
// and t* is the exact extremizer of R along the gradient line: the root of
// qa t^2 + qb t + qc = 0 (coefficients below) whose quotient is better for
// the mode.  Negative discriminant or zero gradient leaves x unchanged.
// Objective: -R (mode largest) or R (mode smallest).
inline FixedPointProblem rayleigh_problem(const RayleighInstance& instance) {
    const std::size_t p = instance.a.rows;
    if (instance.a.cols != p || instance.b.rows != p || instance.b.cols != p)
        throw DimensionMismatch("rayleigh_problem: A and B must be square and conformant");
    SpdFactorization check_b(instance.b);  // rejects a non-SPD B up front
    (void)check_b;

    auto inst = std::make_shared<const RayleighInstance>(instance);
    FixedPointProblem pr;
    pr.dimension = p;
    pr.name = "rayleigh";
    pr.is_valid = [p](const Vector& x) {
        if (x.size() != p) return false;
        for (double c : x)
            if (!std::isfinite(c)) return false;
        return norm2(x) > 0.0;
    };
    pr.map = [inst, p](const Vector& x) -> Vector {
        Vector ax = matvec(inst->a, x);
        Vector bx = matvec(inst->b, x);
        const double a3 = dot(x, ax);  // x^T A x
        const double b3 = dot(x, bx);  // x^T B x
        const double r = a3 / b3;
        Vector grad(p);
        for (std::size_t i = 0; i < p; ++i) grad[i] = (2.0 / b3) * (ax[i] - r * bx[i]);
        if (dot(grad, grad) == 0.0) return x;  // exact stationary point

        Vector ag = matvec(inst->a, grad);
        Vector bg = matvec(inst->b, grad);
        const double a1 = dot(grad, ag);  // g^T A g
        const double a2 = dot(x, ag);     // x^T A g
        const double b1 = dot(grad, bg);  // g^T B g
        const double b2 = dot(x, bg);     // x^T B g

        const double qa = a1 * b2 - b1 * a2;
        const double qb = a1 * b3 - b1 * a3;
        const double qc = a2 * b3 - b2 * a3;

        // R along the line: (a3 + 2 t a2 + t^2 a1) / (b3 + 2 t b2 + t^2 b1).
        auto line_quotient = [&](double t) {
            return (a3 + t * (2.0 * a2 + t * a1)) / (b3 + t * (2.0 * b2 + t * b1));
        };
        const bool want_max = inst->mode == RayleighMode::largest;

        double t = 0.0;
        if (std::fabs(qa) < 1e-300) {
            if (std::fabs(qb) > 0.0) t = -qc / qb;
        } else {
            const double disc = qb * qb - 4.0 * qa * qc;
            if (disc >= 0.0) {
                const double sd = std::sqrt(disc);
                const double t1 = (-qb + sd) / (2.0 * qa);
                const double t2 = (-qb - sd) / (2.0 * qa);
                const double r1 = line_quotient(t1);
                const double r2 = line_quotient(t2);
                t = (want_max ? (r1 >= r2) : (r1 <= r2)) ? t1 : t2;
            }
        }

        Vector y(p);
        for (std::size_t i = 0; i < p; ++i) y[i] = x[i] + t * grad[i];
        const double ny = norm2(y);
        if (!(ny > 0.0)) return x;
        for (std::size_t i = 0; i < p; ++i) y[i] /= ny;
        return y;
    };
    pr.objective = [inst](const Vector& x) {
        const double r = rayleigh_quotient(*inst, x);
        return inst->mode == RayleighMode::largest ? -r : r;
    };
    return pr;
}

// ---------------------------------------------------------------------------
// Multivariate-t location/scatter estimation

struct MvtParams {
    Vector mu;
    DenseMatrix sigma{0, 0};
};

inline std::size_t mvt_dimension(std::size_t p) { return p + p * (p + 1) / 2; }

// Parameters travel through solvers as a flat vector: mu, then the lower
// triangle of sigma row by row.
inline Vector mvt_pack(const MvtParams& params) {
    const std::size_t p = params.mu.size();
    if (params.sigma.rows != p || params.sigma.cols != p)
        throw DimensionMismatch("mvt_pack: sigma must be p x p");
    Vector x;
    x.reserve(mvt_dimension(p));
    x.insert(x.end(), params.mu.begin(), params.mu.end());
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j <= i; ++j) x.push_back(params.sigma(i, j));
    return x;
}

inline MvtParams mvt_unpack(const Vector& x, std::size_t p) {
    if (x.size() != mvt_dimension(p))
        throw DimensionMismatch("mvt_unpack: expected length " +
                                std::to_string(mvt_dimension(p)) + ", got " +
                                std::to_string(x.size()));
    MvtParams params;
    params.mu.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(p));
    params.sigma = DenseMatrix(p, p);
    std::size_t k = p;
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            params.sigma(i, j) = x[k];
            params.sigma(j, i) = x[k];
            ++k;
        }
    return params;
}

// Draws n observations y = mu* + L z / sqrt(w), z standard normal,
// w ~ chi^2_nu / nu (nu a positive integer), Sigma* = A A^T + I with A a
// scaled Gaussian matrix.  Heavy tails for small nu exercise the downweighting
// in the estimation map.
inline DenseMatrix mvt_generate_data(std::size_t p, std::size_t n, double nu,
                                     std::uint64_t seed) {
    if (p == 0 || n <= p)
        throw InvalidArgument("mvt_generate_data: need n > p >= 1");
    double int_part = 0.0;
    if (!(nu >= 1.0) || std::modf(nu, &int_part) != 0.0)
        throw InvalidArgument("mvt_generate_data: nu must be a positive integer");
    const int nu_int = static_cast<int>(nu);

    Rng64 rng(seed);
    Vector mu_star(p);
    for (std::size_t i = 0; i < p; ++i) mu_star[i] = rng.normal();
    DenseMatrix a(p, p);
    const double scale = 1.0 / std::sqrt(static_cast<double>(p));
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) a(i, j) = rng.normal() * scale;
    DenseMatrix sigma_star(p, p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i; j < p; ++j) {
            double s = (i == j) ? 1.0 : 0.0;
            for (std::size_t k = 0; k < p; ++k) s += a(i, k) * a(j, k);
            sigma_star(i, j) = s;
            sigma_star(j, i) = s;
        }
    const SpdFactorization sigma_fact(sigma_star);
    const DenseMatrix& chol = sigma_fact.lower();

    DenseMatrix data(n, p);
    Vector z(p);
    for (std::size_t obs = 0; obs < n; ++obs) {
        for (std::size_t i = 0; i < p; ++i) z[i] = rng.normal();
        double w = 0.0;
        for (int k = 0; k < nu_int; ++k) w += rng.chi_squared_1();
        w /= nu;
        const double root_w = std::sqrt(w);
        for (std::size_t i = 0; i < p; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j <= i; ++j) s += chol(i, j) * z[j];
            data(obs, i) = mu_star[i] + s / root_w;
        }
    }
    return data;
}

// Exact negative log-likelihood, all normalizing constants included, so
// values are comparable across methods and datasets:
//   -N [lgamma((nu+p)/2) - lgamma(nu/2) - (p/2) ln(nu pi)]
//   + (N/2) ln det Sigma + ((nu+p)/2) sum_i ln(1 + d_i/nu).
inline double mvt_neg_loglik(const MvtParams& params, const DenseMatrix& data, double nu) {
    const std::size_t p = params.mu.size();
    const std::size_t n = data.rows;
    if (data.cols != p) throw DimensionMismatch("mvt_neg_loglik: data has wrong width");
    if (!(nu > 0.0)) throw InvalidArgument("mvt_neg_loglik: nu must be positive");
    SpdFactorization fact(params.sigma);
    const double pd = static_cast<double>(p);
    const double cst = std::lgamma((nu + pd) / 2.0) - std::lgamma(nu / 2.0) -
                       (pd / 2.0) * std::log(nu * std::numbers::pi);
    Vector r(p);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) r[j] = data(i, j) - params.mu[j];
        Vector half = fact.forward(r);
        acc += std::log1p(dot(half, half) / nu);
    }
    return -static_cast<double>(n) * cst + 0.5 * static_cast<double>(n) * fact.log_det() +
           0.5 * (nu + pd) * acc;
}

// EM map: weights w_i = (nu+p)/(nu+d_i) with d_i the Mahalanobis distance
// under the current parameters; mu+ is the weighted mean and
// Sigma+ = (1/D) sum_i w_i (y_i - mu+)(y_i - mu+)^T with D = N for the plain
// EM map or D = sum_i w_i for the parameter-expanded variant (px_variant),
// which collapses the expanded scale back into Sigma and converges in far
// fewer steps on heavy-tailed data.
inline FixedPointProblem mvt_problem(const DenseMatrix& data, double nu, bool px_variant) {
    const std::size_t p = data.cols;
    const std::size_t n = data.rows;
    if (p == 0 || n <= p) throw InvalidArgument("mvt_problem: need N > p >= 1");
    if (!(nu > 0.0)) throw InvalidArgument("mvt_problem: nu must be positive");

    auto rows = std::make_shared<std::vector<Vector>>();
    rows->reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vector y(p);
        for (std::size_t j = 0; j < p; ++j) y[j] = data(i, j);
        rows->push_back(std::move(y));
    }
    auto data_shared = std::make_shared<const DenseMatrix>(data);

    FixedPointProblem pr;
    pr.dimension = mvt_dimension(p);
    pr.name = px_variant ? "mvt-px" : "mvt";
    pr.is_valid = [p](const Vector& x) {
        if (x.size() != mvt_dimension(p)) return false;
        for (double c : x)
            if (!std::isfinite(c)) return false;
        MvtParams params = mvt_unpack(x, p);
        try {
            SpdFactorization fact(params.sigma);
        } catch (const NotPositiveDefinite&) {
            return false;
        }
        return true;
    };
    pr.map = [rows, nu, px_variant, p, n, name = pr.name](const Vector& x) -> Vector {
        MvtParams params = mvt_unpack(x, p);
        std::optional<SpdFactorization> fact;
        try {
            fact.emplace(params.sigma);
        } catch (const NotPositiveDefinite&) {
            throw MapEvaluationError("map evaluation for problem '" + name +
                                     "': scatter matrix is not positive definite");
        }
        const double pd = static_cast<double>(p);
        std::vector<double> w(n);
        double w_sum = 0.0;
        Vector r(p);
        for (std::size_t i = 0; i < n; ++i) {
            const Vector& y = (*rows)[i];
            for (std::size_t j = 0; j < p; ++j) r[j] = y[j] - params.mu[j];
            Vector half = fact->forward(r);
            w[i] = (nu + pd) / (nu + dot(half, half));
            w_sum += w[i];
        }
        Vector mu_plus(p, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < p; ++j) mu_plus[j] += w[i] * (*rows)[i][j];
        for (std::size_t j = 0; j < p; ++j) mu_plus[j] /= w_sum;
        DenseMatrix sigma_plus = weighted_outer_accumulate(*rows, mu_plus, w);
        const double denom = px_variant ? w_sum : static_cast<double>(n);
        for (double& e : sigma_plus.entries) e /= denom;
        return mvt_pack({std::move(mu_plus), std::move(sigma_plus)});
    };
    pr.objective = [data_shared, nu, p](const Vector& x) {
        return mvt_neg_loglik(mvt_unpack(x, p), *data_shared, nu);
    };
    return pr;
}

// Standard EM start: sample mean and (1/N) sample covariance.
inline Vector mvt_standard_start(const DenseMatrix& data) {
    const std::size_t p = data.cols;
    const std::size_t n = data.rows;
    if (p == 0 || n == 0) throw InvalidArgument("mvt_standard_start: empty data");
    std::vector<Vector> rows;
    rows.reserve(n);
    Vector mean(p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        Vector y(p);
        for (std::size_t j = 0; j < p; ++j) {
            y[j] = data(i, j);
            mean[j] += y[j];
        }
        rows.push_back(std::move(y));
    }
    for (std::size_t j = 0; j < p; ++j) mean[j] /= static_cast<double>(n);
    std::vector<double> ones(n, 1.0);
    DenseMatrix cov = weighted_outer_accumulate(rows, mean, ones);
    for (double& e : cov.entries) e /= static_cast<double>(n);
    return mvt_pack({std::move(mean), std::move(cov)});
}

}  // namespace mmaccel
