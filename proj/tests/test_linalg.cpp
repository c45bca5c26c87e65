#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <mmaccel/mmaccel.hpp>

#include "oracles.hpp"

using namespace mmaccel;

namespace {

DenseMatrix random_spd(std::size_t p, Rng64& rng, double ridge) {
    DenseMatrix m(p, p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) m(i, j) = rng.normal();
    DenseMatrix s = matmul(transpose(m), m);
    for (std::size_t i = 0; i < p; ++i) s(i, i) += ridge;
    return s;
}

DenseMatrix random_symmetric(std::size_t p, Rng64& rng) {
    DenseMatrix m(p, p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i; j < p; ++j) {
            double x = rng.normal();
            m(i, j) = x;
            m(j, i) = x;
        }
    return m;
}

}  // namespace

TEST_CASE("vector and matrix basics") {
    Vector a = {1.0, 2.0, 3.0};
    Vector b = {4.0, -5.0, 6.0};
    REQUIRE(dot(a, b) == Catch::Approx(12.0));
    REQUIRE(norm2({3.0, 4.0}) == Catch::Approx(5.0));
    REQUIRE_THROWS_AS(dot(a, {1.0}), DimensionMismatch);

    DenseMatrix m(2, 3);
    m(0, 0) = 1;
    m(0, 1) = 2;
    m(0, 2) = 3;
    m(1, 0) = 4;
    m(1, 1) = 5;
    m(1, 2) = 6;
    Vector mx = matvec(m, a);
    REQUIRE(mx[0] == Catch::Approx(14.0));
    REQUIRE(mx[1] == Catch::Approx(32.0));
    REQUIRE_THROWS_AS(matvec(m, {1.0, 2.0}), DimensionMismatch);

    DenseMatrix mt = transpose(m);
    REQUIRE(mt.rows == 3);
    REQUIRE(mt.cols == 2);
    REQUIRE(mt(2, 1) == 6.0);

    DenseMatrix prod = matmul(m, mt);  // 2x2
    REQUIRE(prod(0, 0) == Catch::Approx(14.0));
    REQUIRE(prod(0, 1) == Catch::Approx(32.0));
    REQUIRE(prod(1, 1) == Catch::Approx(77.0));

    DenseMatrix eye = DenseMatrix::identity(3);
    REQUIRE(frobenius_norm(eye) == Catch::Approx(std::sqrt(3.0)));
}

TEST_CASE("spd factorization solves and reconstructs") {
    Rng64 rng(101);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t p = 1 + static_cast<std::size_t>(rng.uniform() * 40);
        DenseMatrix s = random_spd(p, rng, 0.5);
        Vector rhs(p);
        for (std::size_t i = 0; i < p; ++i) rhs[i] = rng.normal();

        Vector x = solve_spd(s, rhs);
        Vector back = matvec(s, x);
        double err = 0.0;
        for (std::size_t i = 0; i < p; ++i) err += (back[i] - rhs[i]) * (back[i] - rhs[i]);
        REQUIRE(std::sqrt(err) <= 1e-10 * (1.0 + norm2(rhs)));
    }
}

TEST_CASE("spd factorization detail: lower triangle, log det, forward") {
    DenseMatrix s(2, 2);
    s(0, 0) = 4.0;
    s(0, 1) = 2.0;
    s(1, 0) = 2.0;
    s(1, 1) = 10.0;
    SpdFactorization f(s);
    const DenseMatrix& l = f.lower();
    REQUIRE(l(0, 0) == Catch::Approx(2.0));
    REQUIRE(l(1, 0) == Catch::Approx(1.0));
    REQUIRE(l(1, 1) == Catch::Approx(3.0));
    REQUIRE(l(0, 1) == 0.0);
    REQUIRE(f.log_det() == Catch::Approx(std::log(36.0)));

    // forward solves L y = rhs
    Vector y = f.forward({2.0, 4.0});
    REQUIRE(y[0] == Catch::Approx(1.0));
    REQUIRE(y[1] == Catch::Approx(1.0));

    // Only the lower triangle is read.
    DenseMatrix garbage_upper = s;
    garbage_upper(0, 1) = 99.0;
    SpdFactorization f2(garbage_upper);
    REQUIRE(f2.lower()(1, 1) == Catch::Approx(3.0));
}

TEST_CASE("spd factorization rejects indefinite and near-singular input") {
    DenseMatrix indef(2, 2);
    indef(0, 0) = 1.0;
    indef(1, 0) = 2.0;
    indef(0, 1) = 2.0;
    indef(1, 1) = 1.0;  // eigenvalues 3, -1
    REQUIRE_THROWS_AS(SpdFactorization(indef), NotPositiveDefinite);

    // Rank-1 Gram matrix: v v^T with v = (1, 1).
    DenseMatrix rank1(2, 2, 1.0);
    REQUIRE_THROWS_AS(SpdFactorization(rank1), NotPositiveDefinite);
}

TEST_CASE("general solver handles nonsymmetric systems and flags singular ones") {
    Rng64 rng(202);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t p = 1 + static_cast<std::size_t>(rng.uniform() * 8);
        DenseMatrix m(p, p);
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = 0; j < p; ++j) m(i, j) = rng.normal();
        Vector rhs(p);
        for (std::size_t i = 0; i < p; ++i) rhs[i] = rng.normal();
        Vector x = solve_general(m, rhs);
        Vector back = matvec(m, x);
        for (std::size_t i = 0; i < p; ++i) REQUIRE(back[i] == Catch::Approx(rhs[i]).margin(1e-8));
    }

    DenseMatrix sing(2, 2);
    sing(0, 0) = 1.0;
    sing(0, 1) = 2.0;
    sing(1, 0) = 2.0;
    sing(1, 1) = 4.0;
    REQUIRE_THROWS_AS(solve_general(sing, {1.0, 1.0}), SingularMatrix);
}

TEST_CASE("spectral norm upper bound dominates the true spectral radius") {
    Rng64 rng(303);
    // Indefinite symmetric matrices can have a +/- dominant pair, where the
    // power iteration does not settle and the bound falls back to the
    // Frobenius norm; domination still must hold, and the result can never
    // exceed the Frobenius fallback.
    for (std::size_t p : {2ul, 5ul, 20ul, 60ul, 200ul}) {
        DenseMatrix s = random_symmetric(p, rng);
        double bound = spectral_norm_upper_bound(s);
        Vector ev = oracles::jacobi_eigen(s).values;
        double rho = std::max(std::fabs(ev.front()), std::fabs(ev.back()));
        REQUIRE(bound >= rho);
        REQUIRE(bound <= 1.01 * frobenius_norm(s) + 1e-12);
    }
    // With a separated positive dominant eigenvalue (the shape the seeded
    // problem generators produce) the settled bound is tight.
    for (std::size_t p : {5ul, 40ul}) {
        DenseMatrix g(p, p);
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = 0; j < p; ++j) g(i, j) = rng.normal();
        DenseMatrix q = orthonormal_columns(g);
        Vector d(p);
        for (std::size_t i = 0; i + 1 < p; ++i) d[i] = rng.log_uniform(0.1, 5.0);
        d[p - 1] = 10.0;
        DenseMatrix s(p, p);
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = 0; j < p; ++j) {
                double acc = 0.0;
                for (std::size_t k = 0; k < p; ++k) acc += q(i, k) * d[k] * q(j, k);
                s(i, j) = acc;
            }
        double bound = spectral_norm_upper_bound(s);
        Vector ev = oracles::jacobi_eigen(s).values;
        double rho = std::max(std::fabs(ev.front()), std::fabs(ev.back()));
        REQUIRE(bound >= rho);
        REQUIRE(bound <= 1.25 * rho + 1e-12);  // not wildly loose either
    }
    // SPD case with a known dominant eigenvalue.
    DenseMatrix d(3, 3);
    d(0, 0) = 1.0;
    d(1, 1) = 2.0;
    d(2, 2) = 7.0;
    double bound = spectral_norm_upper_bound(d);
    REQUIRE(bound >= 7.0);
    REQUIRE(bound == Catch::Approx(7.0 * 1.01).epsilon(1e-4));
}

TEST_CASE("quantiles follow the interpolating convention") {
    std::vector<double> q = quantiles({1.0, 2.0, 3.0, 4.0}, {0.25, 0.75});
    REQUIRE(q[0] == Catch::Approx(1.75));
    REQUIRE(q[1] == Catch::Approx(3.25));

    std::vector<double> q2 = quantiles({5.0, 1.0, 3.0}, {0.0, 0.5, 1.0});
    REQUIRE(q2[0] == 1.0);
    REQUIRE(q2[1] == 3.0);
    REQUIRE(q2[2] == 5.0);

    std::vector<double> q3 = quantiles({42.0}, {0.0, 0.31, 1.0});
    REQUIRE(q3[0] == 42.0);
    REQUIRE(q3[1] == 42.0);
    REQUIRE(q3[2] == 42.0);

    REQUIRE_THROWS_AS(quantiles({}, {0.5}), InvalidArgument);
    REQUIRE_THROWS_AS(quantiles({1.0}, {1.5}), InvalidArgument);
    REQUIRE_THROWS_AS(quantiles({1.0}, {-0.1}), InvalidArgument);
}

TEST_CASE("weighted outer accumulation is bit-symmetric and correct") {
    Rng64 rng(404);
    const std::size_t p = 7;
    std::vector<Vector> pts;
    std::vector<double> w;
    for (int k = 0; k < 25; ++k) {
        Vector v(p);
        for (std::size_t i = 0; i < p; ++i) v[i] = rng.normal();
        pts.push_back(v);
        w.push_back(rng.uniform(0.2, 2.0));
    }
    Vector center(p);
    for (std::size_t i = 0; i < p; ++i) center[i] = rng.normal();

    DenseMatrix acc = weighted_outer_accumulate(pts, center, w);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) REQUIRE(acc(i, j) == acc(j, i));  // exact

    // Against a naive reference.
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) {
            double ref = 0.0;
            for (std::size_t k = 0; k < pts.size(); ++k)
                ref += w[k] * (pts[k][i] - center[i]) * (pts[k][j] - center[j]);
            REQUIRE(acc(i, j) == Catch::Approx(ref).margin(1e-12));
        }

    REQUIRE_THROWS_AS(weighted_outer_accumulate(pts, center, {1.0}), DimensionMismatch);
    std::vector<Vector> bad = pts;
    bad[3] = Vector{1.0};
    REQUIRE_THROWS_AS(weighted_outer_accumulate(bad, center, w), DimensionMismatch);
}

TEST_CASE("orthonormal columns produce an orthogonal frame") {
    Rng64 rng(505);
    const std::size_t p = 12;
    DenseMatrix g(p, p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) g(i, j) = rng.normal();
    DenseMatrix q = orthonormal_columns(g);
    DenseMatrix qtq = matmul(transpose(q), q);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j)
            REQUIRE(qtq(i, j) == Catch::Approx(i == j ? 1.0 : 0.0).margin(1e-12));

    DenseMatrix dep(2, 2);
    dep(0, 0) = 1.0;
    dep(0, 1) = 2.0;
    dep(1, 0) = 1.0;
    dep(1, 1) = 2.0;
    REQUIRE_THROWS_AS(orthonormal_columns(dep), SingularMatrix);
}

TEST_CASE("test oracle self-check: jacobi eigensolver") {
    // Known spectrum.
    DenseMatrix d(3, 3);
    d(0, 0) = 3.0;
    d(1, 1) = -1.0;
    d(2, 2) = 5.0;
    oracles::SymmetricEigen eig = oracles::jacobi_eigen(d);
    REQUIRE(eig.values[0] == Catch::Approx(-1.0));
    REQUIRE(eig.values[1] == Catch::Approx(3.0));
    REQUIRE(eig.values[2] == Catch::Approx(5.0));

    // Random symmetric: A V = V diag(values).
    Rng64 rng(606);
    DenseMatrix s = random_symmetric(9, rng);
    eig = oracles::jacobi_eigen(s);
    for (std::size_t j = 0; j < 9; ++j) {
        Vector col(9);
        for (std::size_t i = 0; i < 9; ++i) col[i] = eig.vectors(i, j);
        Vector av = matvec(s, col);
        for (std::size_t i = 0; i < 9; ++i)
            REQUIRE(av[i] == Catch::Approx(eig.values[j] * col[i]).margin(1e-9));
    }
}

TEST_CASE("test oracle self-check: generalized eigenvalues") {
    // A = diag(1, 4), B = diag(1, 2) -> pencil eigenvalues 1 and 2.
    DenseMatrix a(2, 2), b(2, 2);
    a(0, 0) = 1.0;
    a(1, 1) = 4.0;
    b(0, 0) = 1.0;
    b(1, 1) = 2.0;
    Vector ev = oracles::generalized_eigenvalues(a, b);
    REQUIRE(ev[0] == Catch::Approx(1.0));
    REQUIRE(ev[1] == Catch::Approx(2.0));
}
