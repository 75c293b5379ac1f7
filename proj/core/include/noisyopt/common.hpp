#pragma once

#include <Eigen/Core>
#include <charconv>
#include <stdexcept>
#include <string>

namespace noisyopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/* Base class for all library errors. */
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// consensus weight floor incompatible with the agent count
struct InfeasibleTheta : Error { using Error::Error; };
// connectivity window must be a positive integer
struct InvalidWindow : Error { using Error::Error; };
// transition product requested with end before start
struct IndexOrder : Error { using Error::Error; };
// point fell outside the admissible domain of a map or set
struct DomainViolation : Error { using Error::Error; };
// iterative inner solver exhausted its budget above tolerance
struct InnerSolverFailure : Error { using Error::Error; };
// reference optimum could not be certified across restarts
struct ReferenceSolveUnverified : Error { using Error::Error; };
// closed-form rate bound undefined at this exponent combination
struct ExcludedExponent : Error { using Error::Error; };
// rate fit impossible (nonpositive means or empty window)
struct DegenerateFit : Error { using Error::Error; };
// config fields are individually valid but mutually inconsistent
struct ConfigMismatch : Error { using Error::Error; };
// config failed schema validation
struct ConfigError : Error { using Error::Error; };

/* Shortest round-trip decimal form of a double ("0.1", not "0.1000000000000000055..."). */
inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace noisyopt
