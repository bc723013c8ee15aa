#pragma once

// Model with an exit option after expansion. The expanded project is itself
// an exit-only problem with value V^A; the pre-expansion problem then pays
// V^A - k on expansion instead of the plain expanded perpetuity.

#include <cmath>
#include <limits>
#include <vector>

#include "pilot/model.hpp"
#include "pilot/solver_base.hpp"

namespace pilot {

/// How the post-expansion volatility relates to sigma. Both keep
/// (h_A - l_A) / sigma_A = (h - l) / sigma, so the learning rate is unchanged.
enum class VolatilityPolicy {
    ExpansionMultiple,  ///< n more identical plants: sigma_A = (n + 1) sigma, h_dag = n h, l_dag = n l
    DedicatedFacility,  ///< h_dag = l_dag, sigma_A = sigma
};

const char* to_string(VolatilityPolicy policy);
/// Picks the policy the parameters satisfy; throws AssumptionViolation if neither.
VolatilityPolicy infer_volatility_policy(const ModelParams& params);

struct PostExpansionValue {
    double theta_A = 0.0;  ///< abandonment threshold after expansion
    double log_C = -std::numeric_limits<double>::infinity();
    double sigma_A = 0.0;
    double gamma = 1.0;
    double h_A = 0.0;
    double l_A = 0.0;
    double alpha = 0.0;

    double C() const { return std::exp(log_C); }
    /// V^A(p): expanded perpetuity plus C phi above theta_A, 0 below.
    double operator()(double p) const;
    double derivative(double p) const;
};

PostExpansionValue post_expansion_value(const ModelParams& params, VolatilityPolicy policy);
PostExpansionValue post_expansion_value(const ModelParams& params);

/// Root of V^A(p) = k in [theta_A, 1).
double find_p_hat_ext(const PostExpansionValue& pev, double k);

struct ExtendedSolution {
    ThresholdSolution base;  ///< thresholds and coefficients of the extended problem
    PostExpansionValue post;
    double p_hat_ext = 0.0;
    /// R* falls below the stopping reward somewhere, or the stopping reward
    /// fails the variational inequality outside the interval: another
    /// continuation component may exist.
    bool disconnected_region_flag = false;
    /// Size of the C-term in the upper-boundary equation at the root.
    double c_term = 0.0;
};

/// Stopping reward net of the perpetuity: max{g2, V^A - k - perpetuity}.
double reward_g_ext(double p, const PostExpansionValue& pev, const ModelParams& params);

ExtendedSolution solve_extended(const ModelParams& params, VolatilityPolicy policy);
ExtendedSolution solve_extended(const ModelParams& params);

double optimal_return_ext(double p, const ExtendedSolution& sol, const ModelParams& params);
double value_function_ext(double p, const ExtendedSolution& sol, const ModelParams& params);
double extended_expected_time(double p, const ExtendedSolution& sol, const ModelParams& params);

/// As sweep_sigma, with model = "extended".
std::vector<SweepRecord> sweep_sigma_extended(const ModelParams& params,
                                              const std::vector<double>& sigmas, double p0,
                                              unsigned threads = 1);

}  // namespace pilot
