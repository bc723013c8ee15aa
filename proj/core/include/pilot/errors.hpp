#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace pilot {

/// Invalid model or call parameters (bad sign, out-of-range probability, ...).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Parameters are individually valid but put the model in a degenerate case
/// that the requested routine cannot handle (h^A == l^A, gamma == 1, ...).
class DegenerateParameterError : public ParameterError {
public:
    using ParameterError::ParameterError;
};

/// A routine was called for the wrong policy regime.
class UsageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A stated modelling assumption does not hold (e.g. V^A(1) <= k).
class AssumptionViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Root bracketing or iteration failed. Carries a diagnostics string.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, std::string diagnostics)
        : std::runtime_error(what + " [" + diagnostics + "]"),
          diagnostics_(std::move(diagnostics)) {}

    const std::string& diagnostics() const noexcept { return diagnostics_; }

private:
    std::string diagnostics_;
};

/// The solver converged to a point whose certificate (residuals) is too large,
/// or an iterative oracle ran out of sweeps.
class NonConvergenceError : public SolverError {
public:
    using SolverError::SolverError;
};

}  // namespace pilot
