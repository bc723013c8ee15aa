#pragma once

// Bayesian filter for the unknown drift mu in {h, l} of X_t = mu t + sigma B_t.
// The posterior is carried as log-odds, updated with the exact Gaussian
// likelihood ratio of each increment, so it is exact for any step size.

#include <cstdint>
#include <vector>

#include "pilot/model.hpp"

namespace pilot {

double log_odds(double p);
/// Logistic map, stable for large |L|.
double from_log_odds(double log_odds);

/// Log likelihood-ratio (high vs low drift) carried by an increment dx over dt.
double log_likelihood_ratio(double dx, double dt, const ModelParams& params);

/// P_t given the prior p0 and cumulative profit x_t observed up to time t > 0.
double posterior_closed_form(double p0, double x_t, double t, const ModelParams& params);

struct PosteriorPath {
    double dt = 0.0;
    double p0 = 0.0;
    std::vector<double> times;
    std::vector<double> x;  ///< cumulative profit X_t
    std::vector<double> p;  ///< posterior P_t
    /// Hidden drift; diagnostic only, policy code never reads it.
    double mu_true = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t index = 0;
};

/// Simulates one path on [0, horizon]. mu_true is h with probability p0.
/// Deterministic in (seed, index).
PosteriorPath simulate_path(double p0, const ModelParams& params, double dt, double horizon,
                            std::uint64_t seed, std::uint64_t index = 0);

/// Observable innovation increments dB~ = (dX - E[mu | F_t] dt) / sigma of a path.
std::vector<double> innovation_increments(const PosteriorPath& path, const ModelParams& params);

/// Euler-Maruyama integration of dP = snr P (1 - P) dB~ driven by the
/// innovations of `path`, with each innovation built from the Euler state.
std::vector<double> euler_posterior(const PosteriorPath& path, const ModelParams& params);

/// Reduced volatility sigma sigma_e / sqrt(sigma^2 + sigma_e^2).
double reduced_sigma(double sigma, double sigma_e);

/// Independent external profit stream X^e_t = mu t + sigma_e B^e_t.
class ExternalStream {
public:
    explicit ExternalStream(double sigma_e);
    double sigma_e() const noexcept { return sigma_e_; }
    double sigma_r(double sigma) const { return reduced_sigma(sigma, sigma_e_); }

private:
    double sigma_e_;
};

/// Combined observable X^r_t = sigma_r^2 (X_t / sigma^2 + X^e_t / sigma_e^2).
double fused_observation(double x_t, double x_e_t, double sigma, const ExternalStream& ext);

/// Posterior from both streams, evaluated as the two-hypothesis Bayes ratio in
/// the fused observable with volatility sigma_r.
double fused_posterior(double p0, double x_t, double x_e_t, double t, const ModelParams& params,
                       const ExternalStream& ext);

struct EnsemblePoint {
    double t;
    double mean_p;
    double se_p;
};

/// Cross-sectional mean and standard error of P_t over `reps` paths.
/// `record_every` thins the output grid.
std::vector<EnsemblePoint> ensemble_statistics(double p0, const ModelParams& params, double dt,
                                               double horizon, std::size_t reps,
                                               std::uint64_t seed, unsigned threads = 0,
                                               std::size_t record_every = 1);

}  // namespace pilot
