#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace pbg {

using cplx = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Public interfaces take ordinary frequency in GHz; physics runs in rad/ns.
inline constexpr double angular(double f_ghz) { return kTwoPi * f_ghz; }
inline constexpr double ordinary(double w) { return w / kTwoPi; }

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainError : Error { using Error::Error; };
struct PoleError : Error { using Error::Error; };
struct SingularityError : Error { using Error::Error; };
struct NoBoundStateError : Error { using Error::Error; };
struct DegenerateError : Error { using Error::Error; };
struct CalibrationError : Error { using Error::Error; };
struct TruncationError : Error { using Error::Error; };
struct ExtractionError : Error { using Error::Error; };
struct FitError : Error { using Error::Error; };
struct SolverError : Error { using Error::Error; };
struct NonUniqueSteadyState : SolverError { using SolverError::SolverError; };
struct ConfigError : Error { using Error::Error; };

}  // namespace pbg
