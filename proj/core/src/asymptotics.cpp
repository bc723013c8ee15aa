#include "pilot/asymptotics.hpp"

#include <cmath>

#include "pilot/errors.hpp"
#include "pilot/solver_base.hpp"
#include "pilot/solver_extended.hpp"

namespace pilot {

const char* to_string(SignCase c) {
    return c == SignCase::Negative ? "Negative" : "NonNegative";
}

namespace {

void require_two_threshold(const ModelParams& params) {
    if (classify_regime(params) != PolicyKind::TwoThreshold)
        throw UsageError("asymptotic expansions need the two-threshold regime");
    if (!(params.h_dag() > params.k_alpha()))
        throw DegenerateParameterError("asymptotic expansions need h_dag > k alpha");
}

}  // namespace

AsymptoticRegime classify_asymptotic(const ModelParams& params) {
    require_two_threshold(params);
    const double h = params.h();
    const double l = params.l();
    const double ka = params.k_alpha();
    const double p_hat = indifference_ratio(params);
    AsymptoticRegime reg;
    reg.g_at_p_hat = reward_g(p_hat, params);
    reg.discriminant = h * (params.l_dag() - ka) - l * (params.h_dag() - ka);
    if (reg.discriminant < 0.0) {
        reg.sign_case = SignCase::Negative;
        reg.theta_lower_inf = -l / (h - l);
        reg.theta_upper_inf = (ka - params.l_dag()) / (params.h_dag() - params.l_dag());
        reg.beta_C = h * (params.l_dag() - ka) / (l * (params.h_dag() - ka));
    } else {
        reg.sign_case = SignCase::NonNegative;
        reg.theta_lower_inf = p_hat;
        reg.theta_upper_inf = p_hat;
    }
    return reg;
}

SmallSigmaExpansion small_sigma_expansion(const ModelParams& params) {
    require_two_threshold(params);
    const double s2 = params.sigma() * params.sigma();
    const double a = params.alpha();
    const double d = params.drift_gap();
    const double ka = params.k_alpha();
    const double l = params.l();
    SmallSigmaExpansion out;
    out.theta_lower = 2.0 * s2 * a * (-l) / (d * d * (params.h_A() - ka));
    out.upper_gap = 2.0 * s2 * a * (params.h_dag() - ka) / ((ka - params.l_A()) * d * d);
    out.theta_upper = 1.0 - out.upper_gap;
    out.beta = (params.l_A() - ka) * (params.h_A() - ka) / (l * (params.h_dag() - ka)) *
               (d * d * d * d) / (4.0 * s2 * s2 * a * a);
    return out;
}

SmallSigmaExpansion small_sigma_expansion_extended(const ModelParams& params) {
    require_two_threshold(params);
    if (!(params.k() > 0.0))
        throw DegenerateParameterError("extended small-sigma expansion needs k > 0");
    const double s2 = params.sigma() * params.sigma();
    const double d = params.drift_gap();
    SmallSigmaExpansion out;
    out.theta_lower = 2.0 * s2 * params.alpha() * (-params.l()) / (d * d * (params.h_A() - params.k_alpha()));
    out.upper_gap = s2 * 2.0 * (params.h_dag() - params.k_alpha()) / (params.k() * d * d);
    out.theta_upper = 1.0 - out.upper_gap;
    return out;
}

LargeSigmaExpansion large_sigma_expansion(const ModelParams& params) {
    LargeSigmaExpansion out;
    out.regime = classify_asymptotic(params);
    out.theta_lower = out.regime.theta_lower_inf;
    out.theta_upper = out.regime.theta_upper_inf;
    if (out.regime.sign_case == SignCase::NonNegative) {
        const double ka = params.k_alpha();
        const double h = params.h();
        const double l = params.l();
        const double d = params.drift_gap();
        const double s2 = params.sigma() * params.sigma();
        const double den = l * (params.h_dag() - ka) - h * (params.l_dag() - ka);
        if (den != 0.0) {
            out.beta_minus_one = (params.h_A() - ka) * (params.l_A() - ka) * d * d /
                                 (den * 2.0 * params.alpha() * s2);
        }
    }
    return out;
}

double crossover_sigma(const ModelParams& params) {
    return params.drift_gap() / std::sqrt(8.0 * params.alpha());
}

std::vector<AsymptoticRow> asymptotic_comparison(const ModelParams& params,
                                                 const std::vector<double>& sigmas,
                                                 bool extended) {
    const double s_star = crossover_sigma(params);
    std::vector<AsymptoticRow> rows;
    rows.reserve(sigmas.size());
    for (double s : sigmas) {
        AsymptoticRow row;
        row.sigma = s;
        const ModelParams ps = params.with_sigma(s);
        if (s < s_star) {
            const SmallSigmaExpansion e =
                extended ? small_sigma_expansion_extended(ps) : small_sigma_expansion(ps);
            row.regime = "small_sigma";
            row.theta_lower_asymptotic = e.theta_lower;
            row.theta_upper_asymptotic = e.theta_upper;
        } else {
            const LargeSigmaExpansion e = large_sigma_expansion(ps);
            row.regime = e.regime.sign_case == SignCase::Negative ? "large_sigma_negative"
                                                                 : "large_sigma_nonnegative";
            row.theta_lower_asymptotic = e.theta_lower;
            row.theta_upper_asymptotic = e.theta_upper;
        }
        try {
            const ThresholdSolution sol = extended ? solve_extended(ps).base : solve(ps);
            row.theta_lower_solver = sol.theta_lower;
            row.theta_upper_solver = sol.theta_upper;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace pilot
