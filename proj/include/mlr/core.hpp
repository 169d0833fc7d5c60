#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mlr {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using cplx = std::complex<double>;
using IVec = std::vector<long>;

// Precondition or shape failure (bad arguments).
struct InvalidArgument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A runtime contract could not be met (tolerance, tail bound, margin).
struct ContractViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Spatial or frequency mesh violating the Nyquist / oscillation rules.
struct GridRuleViolation : ContractViolation {
    using ContractViolation::ContractViolation;
};

// Malformed scenario configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double kPi = 3.14159265358979323846;

// <y> = (1 + |y|^2)^{1/2}
inline double japanese(double norm) { return std::sqrt(1.0 + norm * norm); }

} // namespace mlr
