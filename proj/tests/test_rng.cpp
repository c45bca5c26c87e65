#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include <mmaccel/rng.hpp>

using namespace mmaccel;

TEST_CASE("uniform draws reproduce the underlying 64-bit generator") {
    Rng64 rng(12345);
    std::mt19937_64 reference(12345);
    for (int k = 0; k < 64; ++k) {
        double expected = static_cast<double>(reference() >> 11) * 0x1.0p-53;
        REQUIRE(rng.uniform() == expected);  // bit-exact
    }
}

TEST_CASE("same seed gives identical streams, different seeds diverge") {
    Rng64 a(9), b(9), c(10);
    bool all_equal = true;
    bool any_diff_c = false;
    for (int k = 0; k < 100; ++k) {
        double xa = a.normal();
        double xb = b.normal();
        double xc = c.normal();
        all_equal = all_equal && (xa == xb);
        any_diff_c = any_diff_c || (xa != xc);
    }
    REQUIRE(all_equal);
    REQUIRE(any_diff_c);
}

TEST_CASE("uniform(lo, hi) stays inside its interval") {
    Rng64 rng(77);
    for (int k = 0; k < 1000; ++k) {
        double x = rng.uniform(-2.0, 3.5);
        REQUIRE(x >= -2.0);
        REQUIRE(x < 3.5);
    }
}

TEST_CASE("normal draws have the right first two moments") {
    Rng64 rng(2718);
    const int n = 200000;
    double sum = 0.0, sumsq = 0.0;
    for (int k = 0; k < n; ++k) {
        double x = rng.normal();
        sum += x;
        sumsq += x * x;
    }
    double mean = sum / n;
    double var = sumsq / n - mean * mean;
    REQUIRE(std::fabs(mean) < 0.01);
    REQUIRE(std::fabs(var - 1.0) < 0.02);
}

TEST_CASE("chi-squared(1) draws are squared normals with mean one") {
    Rng64 rng(31415);
    const int n = 200000;
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
        double x = rng.chi_squared_1();
        REQUIRE(x >= 0.0);
        sum += x;
    }
    REQUIRE(std::fabs(sum / n - 1.0) < 0.02);

    // Squared-normal identity on the stream itself.
    Rng64 a(5), b(5);
    for (int k = 0; k < 20; ++k) {
        double z = a.normal();
        REQUIRE(b.chi_squared_1() == z * z);
    }
}

TEST_CASE("log uniform covers its range with log-uniform distribution") {
    Rng64 rng(424242);
    const int n = 100000;
    int low_half = 0;
    for (int k = 0; k < n; ++k) {
        double x = rng.log_uniform(0.1, 10.0);
        REQUIRE(x >= 0.1);
        REQUIRE(x <= 10.0);
        if (x < 1.0) ++low_half;  // geometric midpoint of [0.1, 10]
    }
    double frac = static_cast<double>(low_half) / n;
    REQUIRE(std::fabs(frac - 0.5) < 0.01);
}
