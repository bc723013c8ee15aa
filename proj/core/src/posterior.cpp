#include "pilot/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pilot/errors.hpp"
#include "pilot/parallel.hpp"
#include "pilot/rng.hpp"

namespace pilot {

double log_odds(double p) {
    check_probability(p, "log_odds");
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    return std::log(p) - std::log1p(-p);
}

double from_log_odds(double L) {
    if (L >= 0.0) return 1.0 / (1.0 + std::exp(-L));
    const double e = std::exp(L);
    return e / (1.0 + e);
}

double log_likelihood_ratio(double dx, double dt, const ModelParams& params) {
    const double s2 = params.sigma() * params.sigma();
    return params.drift_gap() / s2 * (dx - 0.5 * (params.h() + params.l()) * dt);
}

double posterior_closed_form(double p0, double x_t, double t, const ModelParams& params) {
    if (!(t > 0.0)) throw ParameterError("posterior_closed_form: t must be > 0");
    check_probability(p0, "posterior_closed_form");
    if (p0 == 0.0 || p0 == 1.0) return p0;
    return from_log_odds(log_odds(p0) + log_likelihood_ratio(x_t, t, params));
}

PosteriorPath simulate_path(double p0, const ModelParams& params, double dt, double horizon,
                            std::uint64_t seed, std::uint64_t index) {
    check_probability(p0, "simulate_path");
    if (!(dt > 0.0) || !(horizon > 0.0))
        throw ParameterError("simulate_path: dt and horizon must be > 0");

    StreamRng rng(seed, index);
    PosteriorPath path;
    path.dt = dt;
    path.p0 = p0;
    path.seed = seed;
    path.index = index;
    path.mu_true = rng.uniform() < p0 ? params.h() : params.l();

    const auto steps = static_cast<std::size_t>(std::llround(std::ceil(horizon / dt - 1e-9)));
    path.times.resize(steps + 1);
    path.x.resize(steps + 1);
    path.p.resize(steps + 1);
    path.times[0] = 0.0;
    path.x[0] = 0.0;
    path.p[0] = p0;

    const double vol = params.sigma() * std::sqrt(dt);
    const bool degenerate = p0 == 0.0 || p0 == 1.0;
    double L = degenerate ? 0.0 : log_odds(p0);
    for (std::size_t i = 1; i <= steps; ++i) {
        const double dx = path.mu_true * dt + vol * rng.normal();
        path.times[i] = static_cast<double>(i) * dt;
        path.x[i] = path.x[i - 1] + dx;
        if (degenerate) {
            path.p[i] = p0;
        } else {
            L += log_likelihood_ratio(dx, dt, params);
            path.p[i] = from_log_odds(L);
        }
    }
    return path;
}

std::vector<double> innovation_increments(const PosteriorPath& path, const ModelParams& params) {
    std::vector<double> db(path.x.empty() ? 0 : path.x.size() - 1);
    for (std::size_t i = 0; i < db.size(); ++i) {
        const double dx = path.x[i + 1] - path.x[i];
        const double drift = path.p[i] * params.h() + (1.0 - path.p[i]) * params.l();
        db[i] = (dx - drift * path.dt) / params.sigma();
    }
    return db;
}

std::vector<double> euler_posterior(const PosteriorPath& path, const ModelParams& params) {
    std::vector<double> p(path.x.size());
    if (p.empty()) return p;
    p[0] = path.p0;
    const double snr = params.snr();
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        const double dx = path.x[i + 1] - path.x[i];
        const double drift = p[i] * params.h() + (1.0 - p[i]) * params.l();
        const double db = (dx - drift * path.dt) / params.sigma();
        p[i + 1] = std::clamp(p[i] + snr * p[i] * (1.0 - p[i]) * db, 0.0, 1.0);
    }
    return p;
}

double reduced_sigma(double sigma, double sigma_e) {
    if (!(sigma > 0.0) || !(sigma_e > 0.0))
        throw ParameterError("reduced_sigma: volatilities must be > 0");
    // hypot avoids overflow for an effectively uninformative stream
    return sigma * sigma_e / std::hypot(sigma, sigma_e);
}

ExternalStream::ExternalStream(double sigma_e) : sigma_e_(sigma_e) {
    if (!(sigma_e > 0.0) || !std::isfinite(sigma_e))
        throw ParameterError("external stream volatility must be finite and > 0");
}

double fused_observation(double x_t, double x_e_t, double sigma, const ExternalStream& ext) {
    const double sr = ext.sigma_r(sigma);
    const double w = sr / sigma;
    const double we = sr / ext.sigma_e();
    return w * w * x_t + we * we * x_e_t;
}

double fused_posterior(double p0, double x_t, double x_e_t, double t, const ModelParams& params,
                       const ExternalStream& ext) {
    if (!(t > 0.0)) throw ParameterError("fused_posterior: t must be > 0");
    check_probability(p0, "fused_posterior");
    if (p0 == 0.0 || p0 == 1.0) return p0;
    const double sr = ext.sigma_r(params.sigma());
    const double xr = fused_observation(x_t, x_e_t, params.sigma(), ext);
    const double s2 = sr * sr;
    const double h = params.h();
    const double l = params.l();
    const double a = std::log(p0) + h / s2 * xr - 0.5 * h * h / s2 * t;
    const double b = std::log1p(-p0) + l / s2 * xr - 0.5 * l * l / s2 * t;
    const double m = std::max(a, b);
    return std::exp(a - m) / (std::exp(a - m) + std::exp(b - m));
}

std::vector<EnsemblePoint> ensemble_statistics(double p0, const ModelParams& params, double dt,
                                               double horizon, std::size_t reps,
                                               std::uint64_t seed, unsigned threads,
                                               std::size_t record_every) {
    if (reps < 2) throw ParameterError("ensemble_statistics: need at least 2 replications");
    if (record_every == 0) record_every = 1;
    const auto steps = static_cast<std::size_t>(std::llround(std::ceil(horizon / dt - 1e-9)));
    const std::size_t points = steps / record_every + 1;

    std::vector<std::vector<double>> samples(reps);
    parallel_for(reps, threads, [&](std::size_t r) {
        const PosteriorPath path = simulate_path(p0, params, dt, horizon, seed, r);
        auto& s = samples[r];
        s.reserve(points);
        for (std::size_t i = 0; i <= steps; i += record_every) s.push_back(path.p[i]);
    });

    std::vector<EnsemblePoint> out(points);
    const double n = static_cast<double>(reps);
    for (std::size_t j = 0; j < points; ++j) {
        double mean = 0.0;
        for (const auto& s : samples) mean += s[j];
        mean /= n;
        double ss = 0.0;
        for (const auto& s : samples) ss += (s[j] - mean) * (s[j] - mean);
        const double sd = std::sqrt(ss / (n - 1.0));
        out[j] = {static_cast<double>(j * record_every) * dt, mean, sd / std::sqrt(n)};
    }
    return out;
}

}  // namespace pilot
