#pragma once

// Deterministic random numbers for seeded instances and experiment starts.
//
// The generator is pinned so results are bit-reproducible across platforms:
//   engine     std::mt19937_64 (the C++ standard fixes its entire sequence
//              for a given seed)
//   uniform    (x >> 11) * 2^-53            -- double in [0, 1)
//   normal     Box-Muller on two uniforms: with r = sqrt(-2 ln(1 - u1)) and
//              theta = 2*pi*u2, the pair is (r cos theta, r sin theta); the
//              second value is cached and returned by the next call
//   chi^2(1)   square of one normal draw
//
// std::uniform_real_distribution / std::normal_distribution are avoided on
// purpose: the standard leaves their algorithms implementation-defined, which
// would break cross-platform reproducibility.

#include <cmath>
#include <cstdint>
#include <random>

namespace mmaccel {

class Rng64 {
  public:
    explicit Rng64(std::uint64_t seed) : engine_(seed) {}

    // Uniform double in [0, 1), 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

    // exp(uniform in [ln lo, ln hi)): log-uniform over [lo, hi).
    double log_uniform(double lo, double hi) {
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }

    // Standard normal via Box-Muller; consumes two uniforms per pair.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(1.0 - u1));  // 1-u1 in (0,1], no log(0)
        const double theta = 2.0 * 3.141592653589793238462643383279502884 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    // Chi-squared with one degree of freedom.
    double chi_squared_1() {
        const double z = normal();
        return z * z;
    }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace mmaccel
