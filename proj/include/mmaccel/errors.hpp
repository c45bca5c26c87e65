#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mmaccel {

// Base class for every error the library throws on purpose.  Callers that
// want blanket handling can catch this; everything below refines it.
struct Error : std::runtime_error {
    explicit Error(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

// Vector/matrix operands whose shapes do not line up, or empty input where a
// non-empty one is required.
struct DimensionMismatch : Error {
    explicit DimensionMismatch(const std::string& what_arg) : Error(what_arg) {}
};

// Miscellaneous precondition violations on plain arguments (bad probability,
// unknown category, trace too short, ...).
struct InvalidArgument : Error {
    explicit InvalidArgument(const std::string& what_arg) : Error(what_arg) {}
};

// A symmetric matrix handed to the SPD factorization had a pivot at or below
// the scale-aware floor, so it is not usefully positive definite.
struct NotPositiveDefinite : Error {
    explicit NotPositiveDefinite(const std::string& what_arg) : Error(what_arg) {}
};

// A general (non-symmetric) small linear solve met a numerically zero pivot.
struct SingularMatrix : Error {
    explicit SingularMatrix(const std::string& what_arg) : Error(what_arg) {}
};

// A scalar denominator fell below the absolute floor shared by all
// steplength/scaling formulas.
struct ZeroDenominator : Error {
    explicit ZeroDenominator(const std::string& what_arg) : Error(what_arg) {}
};

// A secant-system update could not be applied (e.g. the Gram matrix of the
// stored difference vectors is numerically singular).
struct SingularUpdateError : Error {
    explicit SingularUpdateError(const std::string& what_arg) : Error(what_arg) {}
};

// The problem map failed at a point it was given.  Usually a non-finite
// output coordinate (carried in `coordinate`); the single-argument form is
// for structural failures (e.g. a covariance block that is not positive
// definite), where `coordinate` is npos.
struct MapEvaluationError : Error {
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::size_t coordinate;
    MapEvaluationError(const std::string& problem_name, std::size_t coord)
        : Error("map evaluation for problem '" + problem_name +
                "' produced a non-finite value at coordinate " +
                std::to_string(coord)),
          coordinate(coord) {}
    explicit MapEvaluationError(const std::string& message)
        : Error(message), coordinate(npos) {}
};

// Solver configuration inconsistent with itself or with the problem.
struct ConfigError : Error {
    explicit ConfigError(const std::string& what_arg) : Error(what_arg) {}
};

// File I/O failure; message always carries the offending path.
struct IoError : Error {
    explicit IoError(const std::string& what_arg) : Error(what_arg) {}
};

}  // namespace mmaccel
