#include "pilot/solver_extended.hpp"

#include <algorithm>
#include <sstream>

#include "detail/two_threshold.hpp"
#include "pilot/errors.hpp"
#include "pilot/parallel.hpp"
#include "pilot/roots.hpp"

namespace pilot {

const char* to_string(VolatilityPolicy policy) {
    switch (policy) {
        case VolatilityPolicy::ExpansionMultiple: return "ExpansionMultiple";
        case VolatilityPolicy::DedicatedFacility: return "DedicatedFacility";
    }
    return "unknown";
}

namespace {

double rel_tol(double a, double b) { return 1e-12 * (std::abs(a) + std::abs(b) + 1.0); }

std::optional<double> multiple_of(const ModelParams& params) {
    if (params.n_plants()) return params.n_plants();
    const double n = params.h_dag() / params.h();
    if (!(n > 0.0)) return std::nullopt;
    if (std::abs(params.l_dag() - n * params.l()) > rel_tol(params.l_dag(), n * params.l()))
        return std::nullopt;
    return n;
}

bool dedicated(const ModelParams& params) {
    return std::abs(params.h_dag() - params.l_dag()) <= rel_tol(params.h_dag(), params.l_dag());
}

}  // namespace

VolatilityPolicy infer_volatility_policy(const ModelParams& params) {
    if (multiple_of(params)) return VolatilityPolicy::ExpansionMultiple;
    if (dedicated(params)) return VolatilityPolicy::DedicatedFacility;
    throw AssumptionViolation(
        "post-expansion volatility is only defined when h_dag = n h, l_dag = n l "
        "or when h_dag = l_dag");
}

double PostExpansionValue::operator()(double p) const {
    check_probability(p, "post-expansion value");
    if (p <= theta_A && theta_A > 0.0) return 0.0;
    if (h_A <= 0.0) return 0.0;
    double v = (p * h_A + (1.0 - p) * l_A) / alpha;
    if (std::isfinite(log_C)) v += C() * phi(p, gamma);
    return v;
}

double PostExpansionValue::derivative(double p) const {
    check_probability(p, "post-expansion value");
    if ((p < theta_A && theta_A > 0.0) || h_A <= 0.0) return 0.0;
    double d = (h_A - l_A) / alpha;
    if (std::isfinite(log_C)) d += C() * phi_derivative(p, gamma);
    return d;
}

PostExpansionValue post_expansion_value(const ModelParams& params, VolatilityPolicy policy) {
    PostExpansionValue pev;
    pev.h_A = params.h_A();
    pev.l_A = params.l_A();
    pev.alpha = params.alpha();
    switch (policy) {
        case VolatilityPolicy::ExpansionMultiple: {
            const auto n = multiple_of(params);
            if (!n)
                throw AssumptionViolation("ExpansionMultiple needs h_dag = n h and l_dag = n l");
            pev.sigma_A = (*n + 1.0) * params.sigma();
            break;
        }
        case VolatilityPolicy::DedicatedFacility:
            if (!dedicated(params)) throw AssumptionViolation("DedicatedFacility needs h_dag = l_dag");
            pev.sigma_A = params.sigma();
            break;
    }
    const double snr_A = (pev.h_A - pev.l_A) / pev.sigma_A;
    if (std::abs(snr_A - params.snr()) > 1e-12 * params.snr())
        throw AssumptionViolation("post-expansion signal-to-noise ratio differs from the pilot's");

    pev.gamma = gamma_exponent(pev.alpha, pev.sigma_A, pev.h_A - pev.l_A);
    if (!(pev.gamma > 1.0)) throw DegenerateParameterError("gamma == 1: V^A undefined");

    if (pev.h_A <= 0.0) {
        // Abandon at once in every state.
        pev.theta_A = 1.0;
        return pev;
    }
    if (pev.l_A >= 0.0) {
        // Never abandoned: V^A is the expanded perpetuity.
        pev.theta_A = 0.0;
        return pev;
    }
    const double g = pev.gamma;
    pev.theta_A = -(g - 1.0) * pev.l_A / ((g + 1.0) * pev.h_A - (g - 1.0) * pev.l_A);
    const double s = pev.sigma_A / (pev.h_A - pev.l_A);
    const double g2m1 = 8.0 * pev.alpha * s * s;  // gamma^2 - 1
    pev.log_C = std::log(2.0 / pev.alpha) - 0.5 * std::log(g2m1) +
                0.5 * g * std::log((g - 1.0) / (g + 1.0)) + 0.5 * (1.0 - g) * std::log(pev.h_A) +
                0.5 * (1.0 + g) * std::log(-pev.l_A);
    return pev;
}

PostExpansionValue post_expansion_value(const ModelParams& params) {
    return post_expansion_value(params, infer_volatility_policy(params));
}

double find_p_hat_ext(const PostExpansionValue& pev, double k) {
    if (!(k >= 0.0)) throw ParameterError("find_p_hat_ext: k must be >= 0");
    if (!(pev(1.0) > k)) throw AssumptionViolation("V^A(1) <= k: expansion is never worthwhile");
    double lo = pev.theta_A;
    if (pev(lo) >= k) return lo;
    double hi = 1.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (pev(mid) < k ? lo : hi) = mid;
    }
    return std::abs(pev(lo) - k) <= std::abs(pev(hi) - k) ? lo : hi;
}

double reward_g_ext(double p, const PostExpansionValue& pev, const ModelParams& params) {
    return std::max(reward_exit(p, params), pev(p) - params.k() - perpetuity(p, params));
}

namespace {

void flag_disconnected(ExtendedSolution& out, const ModelParams& params) {
    const auto& sol = out.base;
    const double lo = sol.lower();
    const double hi = sol.upper();
    const double scale = std::max({std::abs(reward_g(lo, params)), std::abs(reward_g(hi, params)), 1.0});
    const double tol = 1e-9 * scale;
    constexpr int n = 2000;
    for (int i = 0; i <= n; ++i) {
        const double p = static_cast<double>(i) / n;
        if (sol.continues(p)) {
            if (detail::continuation_value(p, sol) < reward_g_ext(p, out.post, params) - tol) {
                out.disconnected_region_flag = true;
                return;
            }
        } else if (p <= lo) {
            if (reward_exit(p, params) < -tol) {
                out.disconnected_region_flag = true;
                return;
            }
        } else if (reward_expand(p, params) < -tol) {
            out.disconnected_region_flag = true;
            return;
        }
    }
}

}  // namespace

ExtendedSolution solve_extended(const ModelParams& params, VolatilityPolicy policy) {
    ExtendedSolution out;
    out.post = post_expansion_value(params, policy);
    const PostExpansionValue& pev = out.post;
    out.p_hat_ext = find_p_hat_ext(pev, params.k());
    if (!(out.p_hat_ext > 0.0 && out.p_hat_ext < 1.0))
        throw AssumptionViolation("p_hat of the extended model is not inside (0, 1)");

    if (!std::isfinite(pev.log_C)) {
        // No abandonment after expansion: the base problem.
        out.base = solve(params);
        flag_disconnected(out, params);
        return out;
    }

    const double g = gamma_exponent(params);
    const double h = params.h();
    const double l = params.l();
    const double ka = params.k_alpha();
    const double w0 = params.l_dag() - ka;
    const double w1 = params.h_dag() - ka;
    if (!(w1 > 0.0))
        throw DegenerateParameterError("two-threshold solution needs h_dag > k alpha");
    if (!(ka > params.l_A()))
        throw DegenerateParameterError("two-threshold solution needs k alpha > l_A");
    const double r = (g - 1.0) / (g + 1.0);
    const double ap = 0.5 * (g + 1.0);
    const double am = 0.5 * (g - 1.0);
    const double log_term_coef = std::log(2.0 * params.alpha() * g / (g - 1.0)) + pev.log_C;

    auto q1 = [=](double u) {
        return r * (-l - w0 * std::exp(-ap * u)) / (h + w1 * std::exp(-am * u));
    };
    auto q2 = [=](double u) {
        const double e = std::exp(-ap * u);
        return (-l * e - w0 * std::exp(-u)) / (r * (h * e + w1));
    };
    // (2 alpha C gamma / (gamma - 1)) q^{-(gamma-1)/2} / (h + w1 beta^{(gamma+1)/2})
    auto c_term = [=](double u, double q) {
        const double log_den = ap * u + std::log(w1 + h * std::exp(-ap * u));
        return std::exp(log_term_coef - am * std::log(q) - log_den);
    };
    auto f = [&](double u) {
        const double q = q1(u);
        return q - q2(u) + c_term(u, q);
    };

    const RootResult root = find_first_root(f, 0.0);
    const double u = root.x;
    const double q_lower = q1(u);
    if (!(q_lower > 0.0)) {
        std::ostringstream os;
        os << "ln beta = " << u << ", q_lower = " << q_lower;
        throw SolverError("nonpositive lower odds at the root", os.str());
    }
    out.c_term = c_term(u, q_lower);

    ThresholdSolution& sol = out.base;
    sol.iterations = root.iterations;
    sol.multiple_roots = root.multiple_sign_changes;
    const auto geo = detail::geometry(g, u, q_lower);
    const double alpha = params.alpha();
    const double tl = geo.theta_lower;
    const double tu = geo.theta_upper;
    const double gap = geo.upper_gap;
    if (!(tu > pev.theta_A)) {
        std::ostringstream os;
        os << "theta_upper = " << tu << ", theta_A = " << pev.theta_A;
        throw SolverError("upper threshold below the post-expansion exit threshold", os.str());
    }
    const double lq_hi = geo.log_q_lower + u;
    const double c_phi = std::exp(pev.log_C + 0.5 * (1.0 - g) * lq_hi - detail::log1p_exp(lq_hi));
    const double spread = params.h_dag() - params.l_dag();
    const detail::BoundaryPayoff lower{reward_exit(tl, params), -tl * (1.0 - tl) * (h - l) / alpha};
    const detail::BoundaryPayoff upper{(w1 - gap * spread) / alpha + c_phi,
                                       tu * gap * spread / alpha + c_phi * (0.5 * (1.0 - g) - tu)};
    detail::assemble(sol, geo, lower, upper);

    if (!(tl < out.p_hat_ext && out.p_hat_ext < tu)) {
        std::ostringstream os;
        os << "theta_lower = " << tl << ", p_hat_ext = " << out.p_hat_ext << ", theta_upper = " << tu;
        throw SolverError("thresholds do not straddle p_hat", os.str());
    }
    if (!(sol.residual < 1e-10)) {
        std::ostringstream os;
        os << "residual = " << sol.residual << ", ln beta = " << u;
        throw NonConvergenceError("smooth-pasting residual above tolerance", os.str());
    }
    flag_disconnected(out, params);
    return out;
}

ExtendedSolution solve_extended(const ModelParams& params) {
    return solve_extended(params, infer_volatility_policy(params));
}

double optimal_return_ext(double p, const ExtendedSolution& sol, const ModelParams& params) {
    check_probability(p, "optimal_return_ext");
    if (sol.base.continues(p)) return detail::continuation_value(p, sol.base);
    return reward_g_ext(p, sol.post, params);
}

double value_function_ext(double p, const ExtendedSolution& sol, const ModelParams& params) {
    return perpetuity(p, params) + optimal_return_ext(p, sol, params);
}

double extended_expected_time(double p, const ExtendedSolution& sol, const ModelParams& params) {
    return expected_time(p, sol.base, params);
}

std::vector<SweepRecord> sweep_sigma_extended(const ModelParams& params,
                                              const std::vector<double>& sigmas, double p0,
                                              unsigned threads) {
    check_probability(p0, "sweep_sigma_extended");
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        if (!(sigmas[i] > 0.0) || (i > 0 && !(sigmas[i] > sigmas[i - 1])))
            throw ParameterError("sigma grid must be positive and increasing");
    }
    const VolatilityPolicy policy = infer_volatility_policy(params);
    std::vector<SweepRecord> out(sigmas.size());
    parallel_for(sigmas.size(), threads, [&](std::size_t i) {
        SweepRecord& rec = out[i];
        rec.model = "extended";
        rec.sigma = sigmas[i];
        try {
            const ModelParams ps = params.with_sigma(sigmas[i]);
            const ExtendedSolution sol = solve_extended(ps, policy);
            rec.regime = sol.base.kind;
            rec.theta_lower = sol.base.theta_lower;
            rec.theta_upper = sol.base.theta_upper;
            rec.e_tau = extended_expected_time(p0, sol, ps);
            rec.value = value_function_ext(p0, sol, ps);
            rec.residual = sol.base.residual;
        } catch (const std::exception& e) {
            rec = SweepRecord{};
            rec.model = "extended";
            rec.sigma = sigmas[i];
            rec.error = e.what();
        }
    });
    return out;
}

}  // namespace pilot
