#pragma once

// Umbrella header: the whole library in one include.

#include "accelerators.hpp"  // solver engines, safeguard, solve() dispatcher
#include "core.hpp"          // problem/config/report types, residual, validation
#include "errors.hpp"        // exception taxonomy
#include "harness.hpp"       // experiments, rate estimation, CSV/JSON export
#include "linalg.hpp"        // dense vectors/matrices, SPD solves, quantiles
#include "problems.hpp"      // the five benchmark problems
#include "rng.hpp"           // reproducible random number generator
