#pragma once

// Shared last step of the two-threshold solvers: given the root in log beta
// and the lower odds, recover c1, c2 from value matching and report the
// pasting residuals.

#include "pilot/solver_base.hpp"

namespace pilot::detail {

/// Stopping payoff at a boundary: its value f and p (1 - p) f'(p).
struct BoundaryPayoff {
    double value;
    double scaled_slope;
};

struct TwoThresholdGeometry {
    double gamma;
    double log_beta;
    double log_q_lower;
    double theta_lower;
    double theta_upper;
    double upper_gap;  // 1 - theta_upper
};

TwoThresholdGeometry geometry(double gamma, double log_beta, double q_lower);

/// Fills kind, thresholds, coefficients and residual of `sol`. Throws
/// SolverError when value matching yields a nonpositive coefficient.
void assemble(ThresholdSolution& sol, const TwoThresholdGeometry& geo, BoundaryPayoff lower,
              BoundaryPayoff upper);

/// c1 psi(p) + c2 phi(p) with zero coefficients skipped.
double continuation_value(double p, const ThresholdSolution& sol);

/// log(1 + e^x) without overflow.
double log1p_exp(double x);

}  // namespace pilot::detail
