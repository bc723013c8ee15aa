#pragma once

// Leading-order threshold expansions for small and large sigma. They are
// formulas for checking the solvers and are never substituted for them.

#include <optional>
#include <string>
#include <vector>

#include "pilot/model.hpp"

namespace pilot {

enum class SignCase { NonNegative, Negative };

const char* to_string(SignCase c);

struct AsymptoticRegime {
    SignCase sign_case = SignCase::NonNegative;
    double g_at_p_hat = 0.0;
    /// h (l_dag - k alpha) - l (h_dag - k alpha); same sign as g(p_hat).
    double discriminant = 0.0;
    double theta_lower_inf = 0.0;
    double theta_upper_inf = 0.0;
    /// Limit of beta as sigma grows; Negative case only.
    std::optional<double> beta_C;
};

/// Large-sigma classification. An exact tie counts as NonNegative.
/// Throws UsageError outside the two-threshold regime.
AsymptoticRegime classify_asymptotic(const ModelParams& params);

struct SmallSigmaExpansion {
    double theta_lower = 0.0;
    double upper_gap = 0.0;  ///< 1 - theta_upper
    double theta_upper = 1.0;
    std::optional<double> beta;  ///< base model only
};

/// Base model, to order sigma^2.
SmallSigmaExpansion small_sigma_expansion(const ModelParams& params);
/// Model with the post-expansion exit option; needs k > 0.
SmallSigmaExpansion small_sigma_expansion_extended(const ModelParams& params);

struct LargeSigmaExpansion {
    AsymptoticRegime regime;
    double theta_lower = 0.0;
    double theta_upper = 0.0;
    /// NonNegative case: leading term of beta - 1, proportional to sigma^-2.
    std::optional<double> beta_minus_one;
};

LargeSigmaExpansion large_sigma_expansion(const ModelParams& params);

/// sigma at which gamma^2 = 2, the switch point between the two expansions.
double crossover_sigma(const ModelParams& params);

struct AsymptoticRow {
    double sigma = 0.0;
    std::optional<double> theta_lower_solver;
    double theta_lower_asymptotic = 0.0;
    std::optional<double> theta_upper_solver;
    double theta_upper_asymptotic = 0.0;
    std::string regime;  ///< small_sigma, large_sigma_negative or large_sigma_nonnegative
    std::string error;
};

/// Solver thresholds next to the expansion appropriate for each sigma.
std::vector<AsymptoticRow> asymptotic_comparison(const ModelParams& params,
                                                 const std::vector<double>& sigmas,
                                                 bool extended = false);

}  // namespace pilot
