#pragma once

// Independent oracles for the analytic solvers: a Monte Carlo evaluator of
// threshold policies and a policy-iteration solver for the discretised
// variational inequality, plus the certification suite that compares them.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pilot/model.hpp"
#include "pilot/solver_base.hpp"

namespace pilot {

enum class McQuantity { Value, HittingTime, UpperHit, MeanPosterior, ValueDifference };

const char* to_string(McQuantity q);

struct McEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
    std::size_t replications = 0;
    std::uint64_t seed = 0;
    McQuantity quantity = McQuantity::Value;
};

struct McOptions {
    std::size_t reps = 100000;
    /// Time step; 0 selects 1e-3 / snr^2.
    double dt = 0.0;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    /// Hard time cap; 0 selects 1e4 / alpha.
    double time_cap = 0.0;
    /// Brownian-bridge test for crossings between grid times.
    bool bridge = true;
};

/// Stopping payoff r(p) of the total-value problem (0 on exit).
using StoppingReward = std::function<double(double)>;

/// Base-model payoff r(p) = max{expanded perpetuity - k, 0}.
StoppingReward base_stopping_reward(const ModelParams& params);

struct Interval {
    double lo;
    double hi;
};

struct PolicyStats {
    Interval policy{};
    McEstimate value;
    McEstimate hitting_time;
    McEstimate upper_hit;
    /// Paired difference value(policy 0) - value(this policy) on common paths.
    McEstimate value_gap;
    std::size_t capped_paths = 0;
};

struct McRun {
    std::vector<PolicyStats> policies;
    double dt = 0.0;
    double time_cap = 0.0;
    /// False when more than 0.1% of paths hit the time cap under some policy.
    bool valid = true;
};

/// Evaluates several threshold policies on common simulated paths. Each path
/// runs until every policy has stopped or the time cap is reached.
McRun mc_evaluate_policies(double p0, const std::vector<Interval>& policies,
                           const StoppingReward& reward, const ModelParams& params,
                           const McOptions& opt);

/// Estimate of V(p0) under the policy "stop outside (lo, hi)". Throws
/// NonConvergenceError when the run is invalidated by capped paths.
McEstimate mc_policy_value(double p0, double lo, double hi, const ModelParams& params,
                           const McOptions& opt, const StoppingReward& reward = {});

struct HittingStats {
    McEstimate time;
    McEstimate upper;
};

HittingStats mc_hitting_stats(double p0, double lo, double hi, const ModelParams& params,
                              const McOptions& opt);

struct GridSolution {
    std::vector<double> p;
    std::vector<double> value;   ///< approximates R*
    std::vector<double> reward;  ///< g on the grid
    std::vector<bool> stop;
    /// Last stopping node below and first stopping node above the
    /// continuation set that contains the largest excess value over g.
    std::optional<double> lower_boundary;
    std::optional<double> upper_boundary;
    /// Sub-cell estimates from extrapolating sqrt(f - g) to zero.
    std::optional<double> lower_refined;
    std::optional<double> upper_refined;
    int iterations = 0;
    double complementarity_residual = 0.0;
    double spacing() const { return 1.0 / static_cast<double>(p.size() - 1); }
};

/// Solves max{A f, g - f} = 0 on a uniform grid of N (odd, >= 3) nodes by
/// policy iteration, with f = max{g, 0} at p = 0 and p = 1 where the
/// diffusion degenerates.
GridSolution grid_value_iteration(const ModelParams& params,
                                  const std::function<double(double)>& reward, std::size_t n,
                                  double tol = 1e-10, int max_iterations = 200);
GridSolution grid_value_iteration(const ModelParams& params, std::size_t n, double tol = 1e-10);

struct CertificationInstance {
    std::string id;
    ModelParams params;
    double p0;
};

/// Six two-threshold instances covering both large-sigma sign cases.
std::vector<CertificationInstance> regression_suite();

struct CertificationRow {
    std::string instance;
    std::string quantity;
    double analytic = 0.0;
    double oracle = 0.0;
    double gap = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct CertificationOptions {
    McOptions mc;
    std::size_t grid_n = 4001;
    double perturbation = 0.02;
    /// Shifts the analytic thresholds inward by this much before the
    /// Monte Carlo comparisons. Negative control only.
    double inject_perturbation = 0.0;
    /// sigma values for the asymptotics rows.
    std::vector<double> asymptotic_sigmas{0.025, 0.05, 0.1, 0.2, 200.0, 400.0, 1000.0, 2000.0};
};

struct CertificationReport {
    std::vector<CertificationRow> rows;
    bool all_pass() const;
    std::size_t failures() const;
};

CertificationReport certify(const std::vector<CertificationInstance>& suite,
                            const CertificationOptions& opt);

}  // namespace pilot
