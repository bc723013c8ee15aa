#include "pilot/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pilot/errors.hpp"

namespace pilot {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw ParameterError(msg);
}

bool finite(double x) { return std::isfinite(x); }

}  // namespace

ModelParams::ModelParams(const ModelFields& fields) : f_(fields) {
    require(finite(f_.h) && finite(f_.l) && finite(f_.h_dag) && finite(f_.l_dag) &&
                finite(f_.k) && finite(f_.alpha) && finite(f_.sigma),
            "model parameters must be finite");
    require(f_.h > 0.0, "h must be > 0");
    require(f_.l < 0.0, "l must be < 0");
    require(f_.alpha > 0.0, "alpha must be > 0");
    require(f_.sigma > 0.0, "sigma must be > 0");
    require(f_.k >= 0.0, "k must be >= 0");
    require(h_A() > l_A(), "h + h_dag must exceed l + l_dag");
    if (f_.n_plants) {
        const double n = *f_.n_plants;
        require(finite(n) && n > 0.0, "n_plants must be > 0");
        const double tol = 1e-12 * (std::abs(f_.h_dag) + std::abs(f_.l_dag) + 1.0);
        if (std::abs(f_.h_dag - n * f_.h) > tol || std::abs(f_.l_dag - n * f_.l) > tol) {
            std::ostringstream os;
            os << "n_plants = " << n << " requires h_dag = n h and l_dag = n l";
            throw ParameterError(os.str());
        }
    }
}

ModelParams ModelParams::expansion_multiple(double h, double l, double n, double k,
                                            double alpha, double sigma) {
    return ModelParams(ModelFields{.h = h,
                                   .l = l,
                                   .h_dag = n * h,
                                   .l_dag = n * l,
                                   .k = k,
                                   .alpha = alpha,
                                   .sigma = sigma,
                                   .n_plants = n});
}

ModelParams ModelParams::with_sigma(double sigma) const {
    ModelFields f = f_;
    f.sigma = sigma;
    return ModelParams(f);
}

ModelParams ModelParams::scaled(double c, bool include_sigma) const {
    require(c > 0.0 && finite(c), "scale factor must be > 0");
    ModelFields f = f_;
    f.h *= c;
    f.l *= c;
    f.h_dag *= c;
    f.l_dag *= c;
    f.k *= c;
    if (include_sigma) f.sigma *= c;
    return ModelParams(f);
}

double gamma_exponent(double alpha, double sigma, double drift_gap) {
    require(alpha > 0.0 && sigma >= 0.0 && drift_gap > 0.0,
            "gamma requires alpha > 0, sigma >= 0, h > l");
    const double s = sigma / drift_gap;
    return std::sqrt(1.0 + 8.0 * alpha * s * s);
}

double gamma_exponent(const ModelParams& params) {
    return gamma_exponent(params.alpha(), params.sigma(), params.drift_gap());
}

double indifference_ratio(const ModelParams& params) {
    return (params.k_alpha() - params.l_A()) / (params.h_A() - params.l_A());
}

DerivedConstants derived_constants(const ModelParams& params) {
    DerivedConstants d{gamma_exponent(params), std::nullopt, params.snr()};
    const double r = indifference_ratio(params);
    if (r > 0.0 && r < 1.0) d.p_hat = r;
    return d;
}

void check_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) {
        std::ostringstream os;
        os << what << ": probability " << p << " outside [0, 1]";
        throw ParameterError(os.str());
    }
}

namespace {

// p^e_p (1-p)^e_q, taking limits at the endpoints.
double weighted_power(double p, double e_p, double e_q) {
    if (p == 0.0) {
        if (e_p > 0.0) return 0.0;
        if (e_p == 0.0) return 1.0;
        return std::numeric_limits<double>::infinity();
    }
    if (p == 1.0) {
        if (e_q > 0.0) return 0.0;
        if (e_q == 0.0) return 1.0;
        return std::numeric_limits<double>::infinity();
    }
    return std::exp(e_p * std::log(p) + e_q * std::log1p(-p));
}

}  // namespace

double psi(double p, double gamma) {
    check_probability(p, "psi");
    return weighted_power(p, 0.5 * (1.0 + gamma), 0.5 * (1.0 - gamma));
}

double phi(double p, double gamma) {
    check_probability(p, "phi");
    return weighted_power(p, 0.5 * (1.0 - gamma), 0.5 * (1.0 + gamma));
}

// d/dp log psi = (a - p) / (p (1 - p)) with a = (1 + gamma)/2.
double psi_derivative(double p, double gamma) {
    check_probability(p, "psi_derivative");
    if (p == 0.0 || p == 1.0) {
        if (gamma == 1.0) return 1.0;
        return p == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return psi(p, gamma) * (0.5 * (1.0 + gamma) - p) / (p * (1.0 - p));
}

double phi_derivative(double p, double gamma) {
    check_probability(p, "phi_derivative");
    if (p == 0.0 || p == 1.0) {
        if (gamma == 1.0) return -1.0;
        return p == 1.0 ? 0.0 : -std::numeric_limits<double>::infinity();
    }
    return phi(p, gamma) * (0.5 * (1.0 - gamma) - p) / (p * (1.0 - p));
}

// psi(p) = q^a / (1 + q), phi(p) = q^b / (1 + q) since a + b = 1.
double log_psi_from_odds(double q, double gamma) {
    return 0.5 * (1.0 + gamma) * std::log(q) - std::log1p(q);
}

double log_phi_from_odds(double q, double gamma) {
    return 0.5 * (1.0 - gamma) * std::log(q) - std::log1p(q);
}

double perpetuity(double p, const ModelParams& params) {
    return (p * params.h() + (1.0 - p) * params.l()) / params.alpha();
}

double expanded_perpetuity(double p, const ModelParams& params) {
    return (p * params.h_A() + (1.0 - p) * params.l_A()) / params.alpha();
}

double reward_expand(double p, const ModelParams& params) {
    return (p * params.h_dag() + (1.0 - p) * params.l_dag()) / params.alpha() - params.k();
}

double reward_exit(double p, const ModelParams& params) {
    return -perpetuity(p, params);
}

double reward_g(double p, const ModelParams& params) {
    check_probability(p, "reward_g");
    return std::max(reward_expand(p, params), reward_exit(p, params));
}

double stopping_reward_r(double p, const ModelParams& params) {
    check_probability(p, "stopping_reward_r");
    return std::max(expanded_perpetuity(p, params) - params.k(), 0.0);
}

}  // namespace pilot
