#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace phaselab {

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Raised when an argument lies outside the range of j (kappa >= kappa_max).
struct RangeError : std::range_error {
    RangeError(const std::string& what, double limit)
        : std::range_error(what), kappa_max(limit) {}
    double kappa_max;
};

// Numerical method failed to reach its tolerance; `estimate` is the
// best achieved error or residual.
struct NumericalError : std::runtime_error {
    NumericalError(const std::string& what,
                   double est = std::numeric_limits<double>::quiet_NaN())
        : std::runtime_error(what), estimate(est) {}
    double estimate;
};

struct ConsistencyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace phaselab
