#pragma once

// Minimal dense linear algebra: exactly the kernels the solvers, problems and
// harness need.  All functions are pure; nothing here owns hidden state.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "errors.hpp"

namespace mmaccel {

using Vector = std::vector<double>;

struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> entries;  // row-major, entries.size() == rows*cols

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), entries(r * c, fill) {}

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n, n, 0.0);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    double& operator()(std::size_t i, std::size_t j) { return entries[i * cols + j]; }
    const double& operator()(std::size_t i, std::size_t j) const { return entries[i * cols + j]; }
};

inline double dot(const Vector& a, const Vector& b) {
    if (a.size() != b.size())
        throw DimensionMismatch("dot: lengths " + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()));
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vector& a) {
    double s = 0.0;
    for (double x : a) s += x * x;
    return std::sqrt(s);
}

inline Vector matvec(const DenseMatrix& m, const Vector& x) {
    if (m.cols != x.size())
        throw DimensionMismatch("matvec: matrix is " + std::to_string(m.rows) + "x" +
                                std::to_string(m.cols) + ", vector has length " +
                                std::to_string(x.size()));
    Vector y(m.rows, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        double s = 0.0;
        const double* row = m.entries.data() + i * m.cols;
        for (std::size_t j = 0; j < m.cols; ++j) s += row[j] * x[j];
        y[i] = s;
    }
    return y;
}

inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols != b.rows)
        throw DimensionMismatch("matmul: " + std::to_string(a.rows) + "x" +
                                std::to_string(a.cols) + " times " + std::to_string(b.rows) +
                                "x" + std::to_string(b.cols));
    DenseMatrix c(a.rows, b.cols, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols; ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

inline DenseMatrix transpose(const DenseMatrix& a) {
    DenseMatrix t(a.cols, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
    return t;
}

inline double frobenius_norm(const DenseMatrix& a) {
    double s = 0.0;
    for (double x : a.entries) s += x * x;
    return std::sqrt(s);
}

// Cholesky factorization S = L*L^T of a symmetric positive-definite matrix.
// Only the lower triangle of S is read.  A pivot at or below
// 1e-12 * max(diag(S)) is treated as a singularity: the failure mode is
// scale-aware so near-rank-deficient Gram matrices are rejected instead of
// factored into garbage.
class SpdFactorization {
  public:
    explicit SpdFactorization(const DenseMatrix& s) : l_(s.rows, s.cols, 0.0) {
        if (s.rows != s.cols)
            throw DimensionMismatch("SpdFactorization: matrix is " + std::to_string(s.rows) +
                                    "x" + std::to_string(s.cols));
        const std::size_t n = s.rows;
        double max_diag = 0.0;
        for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, s(i, i));
        const double pivot_floor = 1e-12 * max_diag;
        for (std::size_t j = 0; j < n; ++j) {
            double d = s(j, j);
            for (std::size_t k = 0; k < j; ++k) d -= l_(j, k) * l_(j, k);
            if (!(d > pivot_floor))
                throw NotPositiveDefinite("SpdFactorization: pivot " + std::to_string(d) +
                                          " at column " + std::to_string(j) +
                                          " is at or below the floor " +
                                          std::to_string(pivot_floor));
            const double ljj = std::sqrt(d);
            l_(j, j) = ljj;
            for (std::size_t i = j + 1; i < n; ++i) {
                double v = s(i, j);
                for (std::size_t k = 0; k < j; ++k) v -= l_(i, k) * l_(j, k);
                l_(i, j) = v / ljj;
            }
        }
    }

    const DenseMatrix& lower() const { return l_; }

    double log_det() const {  // of the factored matrix, not of L
        double s = 0.0;
        for (std::size_t i = 0; i < l_.rows; ++i) s += std::log(l_(i, i));
        return 2.0 * s;
    }

    Vector solve(const Vector& rhs) const {
        if (rhs.size() != l_.rows)
            throw DimensionMismatch("SpdFactorization::solve: rhs length " +
                                    std::to_string(rhs.size()));
        Vector y = forward(rhs);
        return backward(y);
    }

    DenseMatrix solve(const DenseMatrix& rhs) const {
        if (rhs.rows != l_.rows)
            throw DimensionMismatch("SpdFactorization::solve: rhs has " +
                                    std::to_string(rhs.rows) + " rows");
        DenseMatrix out(rhs.rows, rhs.cols);
        Vector col(rhs.rows);
        for (std::size_t j = 0; j < rhs.cols; ++j) {
            for (std::size_t i = 0; i < rhs.rows; ++i) col[i] = rhs(i, j);
            Vector x = solve(col);
            for (std::size_t i = 0; i < rhs.rows; ++i) out(i, j) = x[i];
        }
        return out;
    }

    // Solve L*y = rhs (useful on its own for Mahalanobis distances).
    Vector forward(const Vector& rhs) const {
        const std::size_t n = l_.rows;
        Vector y(n);
        for (std::size_t i = 0; i < n; ++i) {
            double v = rhs[i];
            for (std::size_t k = 0; k < i; ++k) v -= l_(i, k) * y[k];
            y[i] = v / l_(i, i);
        }
        return y;
    }

  private:
    Vector backward(const Vector& y) const {  // L^T * x = y
        const std::size_t n = l_.rows;
        Vector x(n);
        for (std::size_t ii = n; ii-- > 0;) {
            double v = y[ii];
            for (std::size_t k = ii + 1; k < n; ++k) v -= l_(k, ii) * x[k];
            x[ii] = v / l_(ii, ii);
        }
        return x;
    }

    DenseMatrix l_;
};

inline Vector solve_spd(const DenseMatrix& s, const Vector& rhs) {
    return SpdFactorization(s).solve(rhs);
}

inline DenseMatrix solve_spd(const DenseMatrix& s, const DenseMatrix& rhs) {
    return SpdFactorization(s).solve(rhs);
}

// Solve a small general square system M*x = rhs by LU with partial pivoting.
// Used for the non-symmetric cross-Gram systems of the multi-secant
// extrapolation; sizes are a handful at most.
inline Vector solve_general(DenseMatrix m, Vector rhs) {
    if (m.rows != m.cols)
        throw DimensionMismatch("solve_general: matrix is " + std::to_string(m.rows) + "x" +
                                std::to_string(m.cols));
    if (rhs.size() != m.rows)
        throw DimensionMismatch("solve_general: rhs length " + std::to_string(rhs.size()));
    const std::size_t n = m.rows;
    double max_abs = 0.0;
    for (double x : m.entries) max_abs = std::max(max_abs, std::fabs(x));
    const double pivot_floor = 1e-14 * max_abs;
    for (std::size_t j = 0; j < n; ++j) {
        std::size_t pivot = j;
        for (std::size_t i = j + 1; i < n; ++i)
            if (std::fabs(m(i, j)) > std::fabs(m(pivot, j))) pivot = i;
        if (!(std::fabs(m(pivot, j)) > pivot_floor))
            throw SingularMatrix("solve_general: pivot magnitude " +
                                 std::to_string(std::fabs(m(pivot, j))) + " at column " +
                                 std::to_string(j));
        if (pivot != j) {
            for (std::size_t k = 0; k < n; ++k) std::swap(m(j, k), m(pivot, k));
            std::swap(rhs[j], rhs[pivot]);
        }
        for (std::size_t i = j + 1; i < n; ++i) {
            const double f = m(i, j) / m(j, j);
            if (f == 0.0) continue;
            for (std::size_t k = j + 1; k < n; ++k) m(i, k) -= f * m(j, k);
            rhs[i] -= f * rhs[j];
        }
    }
    Vector x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        double v = rhs[ii];
        for (std::size_t k = ii + 1; k < n; ++k) v -= m(ii, k) * x[k];
        x[ii] = v / m(ii, ii);
    }
    return x;
}

// Upper bound on the spectral norm of a symmetric matrix via power iteration:
// at most 200 iterations, stop when the norm estimate changes by a relative
// 1e-6, inflate the converged estimate by 1.01 so the result is strictly
// above the true norm in the generic case.  If the iteration does not settle
// within the cap, fall back to the Frobenius norm, which always dominates the
// spectral norm.  The start vector is all-ones with a tiny index ramp so it
// is never exactly orthogonal to the dominant eigenvector.
inline double spectral_norm_upper_bound(const DenseMatrix& a) {
    if (a.rows != a.cols)
        throw DimensionMismatch("spectral_norm_upper_bound: matrix is " +
                                std::to_string(a.rows) + "x" + std::to_string(a.cols));
    const std::size_t p = a.rows;
    if (p == 0) return 0.0;
    Vector z(p);
    for (std::size_t i = 0; i < p; ++i) z[i] = 1.0 + 1e-8 * static_cast<double>(i);
    double zn = norm2(z);
    for (double& x : z) x /= zn;
    double mu_prev = 0.0;
    for (int it = 0; it < 200; ++it) {
        Vector w = matvec(a, z);
        const double mu = norm2(w);
        if (mu < 1e-300) return frobenius_norm(a);
        for (std::size_t i = 0; i < p; ++i) z[i] = w[i] / mu;
        if (std::fabs(mu - mu_prev) <= 1e-6 * mu) return 1.01 * mu;
        mu_prev = mu;
    }
    return frobenius_norm(a);
}

// Linear-interpolation sample quantiles of the sorted data (the convention
// mainstream statistical software uses by default): for probability p the
// value is data[(n-1)p] with fractional indices interpolated.
inline std::vector<double> quantiles(const std::vector<double>& data,
                                     const std::vector<double>& probs) {
    if (data.empty()) throw InvalidArgument("quantiles: empty data");
    std::vector<double> sorted = data;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> out;
    out.reserve(probs.size());
    const std::size_t n = sorted.size();
    for (double p : probs) {
        if (!(p >= 0.0 && p <= 1.0))
            throw InvalidArgument("quantiles: probability " + std::to_string(p) +
                                  " outside [0,1]");
        const double h = static_cast<double>(n - 1) * p;
        const std::size_t lo = static_cast<std::size_t>(h);
        const std::size_t hi = std::min(lo + 1, n - 1);
        const double frac = h - static_cast<double>(lo);
        out.push_back(sorted[lo] + frac * (sorted[hi] - sorted[lo]));
    }
    return out;
}

// sum_i w_i (y_i - mu)(y_i - mu)^T, accumulated on the upper triangle and
// mirrored so the result is symmetric to the bit.
inline DenseMatrix weighted_outer_accumulate(const std::vector<Vector>& points,
                                             const Vector& center,
                                             const std::vector<double>& weights) {
    if (points.size() != weights.size())
        throw DimensionMismatch("weighted_outer_accumulate: " + std::to_string(points.size()) +
                                " points vs " + std::to_string(weights.size()) + " weights");
    const std::size_t p = center.size();
    DenseMatrix acc(p, p, 0.0);
    Vector d(p);
    for (std::size_t k = 0; k < points.size(); ++k) {
        if (points[k].size() != p)
            throw DimensionMismatch("weighted_outer_accumulate: point " + std::to_string(k) +
                                    " has length " + std::to_string(points[k].size()));
        const double w = weights[k];
        for (std::size_t i = 0; i < p; ++i) d[i] = points[k][i] - center[i];
        for (std::size_t i = 0; i < p; ++i) {
            const double wdi = w * d[i];
            for (std::size_t j = i; j < p; ++j) acc(i, j) += wdi * d[j];
        }
    }
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i + 1; j < p; ++j) acc(j, i) = acc(i, j);
    return acc;
}

// Orthonormalize the columns of a square matrix by modified Gram-Schmidt with
// a second orthogonalization pass (columns processed left to right).  Used by
// the seeded problem generators, which need a reproducible Q factor; the
// two-pass sweep keeps the columns orthogonal to near machine precision.
inline DenseMatrix orthonormal_columns(const DenseMatrix& g) {
    if (g.rows != g.cols)
        throw DimensionMismatch("orthonormal_columns: matrix is " + std::to_string(g.rows) +
                                "x" + std::to_string(g.cols));
    const std::size_t p = g.rows;
    DenseMatrix q = g;
    Vector col(p);
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t i = 0; i < p; ++i) col[i] = q(i, j);
        const double original = norm2(col);
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t k = 0; k < j; ++k) {
                double proj = 0.0;
                for (std::size_t i = 0; i < p; ++i) proj += q(i, k) * col[i];
                for (std::size_t i = 0; i < p; ++i) col[i] -= proj * q(i, k);
            }
        }
        // A residual at rounding level relative to the incoming column means
        // the column lies in the span of its predecessors.
        const double nc = norm2(col);
        if (!(nc > 1e-10 * original))
            throw SingularMatrix("orthonormal_columns: column " + std::to_string(j) +
                                 " is linearly dependent");
        for (std::size_t i = 0; i < p; ++i) q(i, j) = col[i] / nc;
    }
    return q;
}

}  // namespace mmaccel
