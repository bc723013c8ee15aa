#pragma once

// Economic primitives of the pilot-project expansion/exit problem and the
// functions every solver shares: the root exponent gamma, the fundamental
// solutions psi/phi of  -alpha f + 1/2 (snr p (1-p))^2 f'' = 0, and the
// stopping rewards.
//
// Units are relative: time in years, money in arbitrary currency units.

#include <optional>

namespace pilot {

/// Raw inputs, suitable for designated initialisation.
struct ModelFields {
    double h = 0.0;      ///< pilot drift in the high state (> 0)
    double l = 0.0;      ///< pilot drift in the low state (< 0)
    double h_dag = 0.0;  ///< drift increment after expansion, high state
    double l_dag = 0.0;  ///< drift increment after expansion, low state
    double k = 0.0;      ///< expansion cost (>= 0)
    double alpha = 0.0;  ///< discount rate (> 0)
    double sigma = 0.0;  ///< volatility of cumulative profit (> 0)
    std::optional<double> n_plants;  ///< expansion multiple: h_dag = n h, l_dag = n l
};

/// Validated model parameters. Every constructor path runs the same checks,
/// so downstream code may assume a consistent parameter set.
class ModelParams {
public:
    explicit ModelParams(const ModelFields& fields);

    /// Expansion by a multiple (n more plants): h_dag = n h, l_dag = n l.
    static ModelParams expansion_multiple(double h, double l, double n, double k,
                                          double alpha, double sigma);

    double h() const noexcept { return f_.h; }
    double l() const noexcept { return f_.l; }
    double h_dag() const noexcept { return f_.h_dag; }
    double l_dag() const noexcept { return f_.l_dag; }
    double k() const noexcept { return f_.k; }
    double alpha() const noexcept { return f_.alpha; }
    double sigma() const noexcept { return f_.sigma; }
    const std::optional<double>& n_plants() const noexcept { return f_.n_plants; }

    double h_A() const noexcept { return f_.h + f_.h_dag; }
    double l_A() const noexcept { return f_.l + f_.l_dag; }
    double drift_gap() const noexcept { return f_.h - f_.l; }
    /// Signal-to-noise ratio (h - l) / sigma.
    double snr() const noexcept { return drift_gap() / f_.sigma; }
    /// k * alpha, the flow equivalent of the expansion cost.
    double k_alpha() const noexcept { return f_.k * f_.alpha; }

    const ModelFields& fields() const noexcept { return f_; }

    ModelParams with_sigma(double sigma) const;
    /// Multiply h, l, h_dag, l_dag, k (and sigma when `include_sigma`) by c > 0.
    ModelParams scaled(double c, bool include_sigma) const;

private:
    ModelFields f_;
};

struct DerivedConstants {
    double gamma;
    std::optional<double> p_hat;  ///< present iff l_A < k alpha < h_A
    double snr;
};

DerivedConstants derived_constants(const ModelParams& params);

/// gamma = sqrt(1 + 8 alpha sigma^2 / (h - l)^2). Accepts sigma = 0.
double gamma_exponent(double alpha, double sigma, double drift_gap);
double gamma_exponent(const ModelParams& params);

/// (k alpha - l_A) / (h_A - l_A); not clamped to (0, 1).
double indifference_ratio(const ModelParams& params);

// Fundamental solutions. Both are evaluated in log space so gamma in the
// hundreds neither overflows nor underflows prematurely. Endpoint limits for
// gamma > 1: psi(0) = phi(1) = 0 and psi(1) = phi(0) = +inf.
double psi(double p, double gamma);
double phi(double p, double gamma);
double psi_derivative(double p, double gamma);
double phi_derivative(double p, double gamma);

/// log psi(p) and log phi(p) from the odds q = p / (1 - p), which keeps full
/// precision for p within rounding distance of 1.
double log_psi_from_odds(double q, double gamma);
double log_phi_from_odds(double q, double gamma);

/// Value of never stopping, (1/alpha)[p h + (1-p) l].
double perpetuity(double p, const ModelParams& params);
/// Value of expanding now, ignoring the cost: (1/alpha)[p h_A + (1-p) l_A].
double expanded_perpetuity(double p, const ModelParams& params);

/// Expansion branch of g: p h_dag/alpha + (1-p) l_dag/alpha - k.
double reward_expand(double p, const ModelParams& params);
/// Exit branch of g: -(p h + (1-p) l)/alpha.
double reward_exit(double p, const ModelParams& params);
/// g(p) = max of the two branches: stopping reward net of the perpetuity.
double reward_g(double p, const ModelParams& params);
/// r(p) = max{(1/alpha)[p h_A + (1-p) l_A] - k, 0}.
double stopping_reward_r(double p, const ModelParams& params);

/// Throws ParameterError unless p is in [0, 1].
void check_probability(double p, const char* what);

}  // namespace pilot
