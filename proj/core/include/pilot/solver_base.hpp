#pragma once

// Optimal expansion/exit policy of the base model. The continuation region is
// an interval; on it R* = c1 psi + c2 phi, off it R* = g.

#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pilot/model.hpp"

namespace pilot {

enum class PolicyKind { ExitOnly, ExpandOnly, TwoThreshold };

const char* to_string(PolicyKind kind);

struct ThresholdSolution {
    PolicyKind kind = PolicyKind::TwoThreshold;
    double gamma = 1.0;

    /// Continuation region is (theta_lower, theta_upper); an absent bound means
    /// the region extends to 0 or 1. ExpandOnly with theta_upper == 0 means
    /// expand immediately.
    std::optional<double> theta_lower;
    std::optional<double> theta_upper;
    /// 1 - theta_upper, kept separately because theta_upper may round to 1.
    std::optional<double> upper_gap;

    /// Coefficients of psi and phi, stored as logs (-inf when zero) so that
    /// gamma in the hundreds cannot overflow them.
    double log_c1 = -std::numeric_limits<double>::infinity();
    double log_c2 = -std::numeric_limits<double>::infinity();

    /// TwoThreshold only: beta = q_upper / q_lower in odds, and log q_lower.
    std::optional<double> beta;
    std::optional<double> log_beta;
    std::optional<double> log_q_lower;

    /// Largest scaled residual of the boundary equations.
    double residual = 0.0;
    bool multiple_roots = false;
    int iterations = 0;

    double c1() const;
    double c2() const;
    double lower() const { return theta_lower.value_or(0.0); }
    double upper() const { return theta_upper.value_or(1.0); }
    /// True when p is strictly inside the continuation region.
    bool continues(double p) const;
};

PolicyKind classify_regime(const ModelParams& params);

ThresholdSolution solve_exit_only(const ModelParams& params);
ThresholdSolution solve_expand_only(const ModelParams& params);
ThresholdSolution solve_two_threshold(const ModelParams& params);
/// Dispatches on classify_regime.
ThresholdSolution solve(const ModelParams& params);

/// R*(p): c1 psi + c2 phi inside the continuation region, g outside.
double optimal_return(double p, const ThresholdSolution& sol, const ModelParams& params);
/// V(p) = perpetuity + R*(p).
double value_function(double p, const ThresholdSolution& sol, const ModelParams& params);

/// Bundles a solution with its parameters.
class ValueFunctionView {
public:
    ValueFunctionView(ThresholdSolution sol, ModelParams params)
        : sol_(std::move(sol)), params_(std::move(params)) {}

    const ThresholdSolution& solution() const noexcept { return sol_; }
    const ModelParams& params() const noexcept { return params_; }
    double R(double p) const { return optimal_return(p, sol_, params_); }
    double V(double p) const { return value_function(p, sol_, params_); }

private:
    ThresholdSolution sol_;
    ModelParams params_;
};

/// T(p) = (2 sigma^2 / (h - l)^2) (2p - 1) ln(p / (1 - p)).
double time_potential(double p, double sigma, double drift_gap);

/// Mean exit time of P_t from (lo, hi) started at p. Returns 0 for p outside
/// the open interval (the decision is immediate).
double expected_exit_time(double p, double lo, double hi, double sigma, double drift_gap);

/// E^p[tau*]. 0 outside the continuation region; +inf inside it for the
/// single-threshold regimes, where the threshold is missed with positive
/// probability.
double expected_time(double p, const ThresholdSolution& sol, const ModelParams& params);

/// Probability that P_t started at p in [lo, hi] leaves through hi.
double upper_hit_probability(double p, double lo, double hi);
double upper_hit_probability(double p, const ThresholdSolution& sol);

struct SweepRecord {
    std::string model = "base";
    double sigma = 0.0;
    /// Empty when the row failed.
    std::optional<PolicyKind> regime;
    std::optional<double> theta_lower;
    std::optional<double> theta_upper;
    std::optional<double> e_tau;
    std::optional<double> value;
    std::optional<double> residual;
    std::string error;
};

/// Geometric or linear sigma grid with `count` points from lo to hi.
std::vector<double> sigma_grid(double lo, double hi, std::size_t count, bool logarithmic);

/// One record per sigma. Failures become error rows; the sweep continues.
std::vector<SweepRecord> sweep_sigma(const ModelParams& params, const std::vector<double>& sigmas,
                                     double p0, unsigned threads = 1);

}  // namespace pilot
