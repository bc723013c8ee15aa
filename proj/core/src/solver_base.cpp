#include "pilot/solver_base.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "detail/two_threshold.hpp"
#include "pilot/errors.hpp"
#include "pilot/parallel.hpp"
#include "pilot/roots.hpp"

namespace pilot {

const char* to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::ExitOnly: return "ExitOnly";
        case PolicyKind::ExpandOnly: return "ExpandOnly";
        case PolicyKind::TwoThreshold: return "TwoThreshold";
    }
    return "unknown";
}

double ThresholdSolution::c1() const { return std::exp(log_c1); }
double ThresholdSolution::c2() const { return std::exp(log_c2); }

bool ThresholdSolution::continues(double p) const {
    const bool above = theta_lower ? p > *theta_lower : p >= 0.0;
    const bool below = theta_upper ? p < *theta_upper : p <= 1.0;
    return above && below;
}

PolicyKind classify_regime(const ModelParams& params) {
    if (!(params.h_A() != params.l_A()))
        throw DegenerateParameterError("h_A == l_A: indifference point undefined");
    const double r = indifference_ratio(params);
    if (r >= 1.0) return PolicyKind::ExitOnly;
    if (r <= 0.0) return PolicyKind::ExpandOnly;
    return PolicyKind::TwoThreshold;
}

namespace {

// Single linear payoff L(p) = (u0 (1-p) + u1 p) / alpha with u0 > 0 > u1:
// stop once p falls to theta, R = A phi above it.
void stop_below(ThresholdSolution& sol, double u0, double u1, double alpha) {
    const double g = sol.gamma;
    const double theta = (g - 1.0) * u0 / ((g + 1.0) * (-u1) + (g - 1.0) * u0);
    const double payoff = (u0 * (1.0 - theta) + u1 * theta) / alpha;
    sol.theta_lower = theta;
    sol.log_c2 = std::log(payoff) - std::log(phi(theta, g));
    // d/d(log-odds) of A phi is A phi (b - p); compare with p (1-p) L'.
    const double lhs = payoff * (0.5 * (1.0 - g) - theta);
    const double rhs = theta * (1.0 - theta) * (u1 - u0) / alpha;
    sol.residual = std::abs(lhs - rhs) / std::max({std::abs(payoff), 1.0});
}

// Mirror image with u0 < 0 < u1: stop once p rises to theta, R = B psi below.
void stop_above(ThresholdSolution& sol, double u0, double u1, double alpha) {
    const double g = sol.gamma;
    const double theta = (g + 1.0) * (-u0) / ((g - 1.0) * u1 + (g + 1.0) * (-u0));
    const double payoff = (u0 * (1.0 - theta) + u1 * theta) / alpha;
    sol.theta_upper = theta;
    sol.upper_gap = 1.0 - theta;
    sol.log_c1 = std::log(payoff) - std::log(psi(theta, g));
    const double lhs = payoff * (0.5 * (1.0 + g) - theta);
    const double rhs = theta * (1.0 - theta) * (u1 - u0) / alpha;
    sol.residual = std::abs(lhs - rhs) / std::max({std::abs(payoff), 1.0});
}

void require_kind(const ModelParams& params, PolicyKind kind) {
    const PolicyKind actual = classify_regime(params);
    if (actual != kind) {
        std::ostringstream os;
        os << "parameters are in the " << to_string(actual) << " regime, not " << to_string(kind);
        throw UsageError(os.str());
    }
}

}  // namespace

namespace detail {

double log1p_exp(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace detail

using detail::log1p_exp;

ThresholdSolution solve_exit_only(const ModelParams& params) {
    require_kind(params, PolicyKind::ExitOnly);
    ThresholdSolution sol;
    sol.kind = PolicyKind::ExitOnly;
    sol.gamma = gamma_exponent(params);
    stop_below(sol, -params.l(), -params.h(), params.alpha());
    return sol;
}

ThresholdSolution solve_expand_only(const ModelParams& params) {
    require_kind(params, PolicyKind::ExpandOnly);
    ThresholdSolution sol;
    sol.kind = PolicyKind::ExpandOnly;
    sol.gamma = gamma_exponent(params);
    // Here g = g1 on all of [0, 1].
    const double u0 = params.l_dag() - params.k_alpha();
    const double u1 = params.h_dag() - params.k_alpha();
    if (u0 >= 0.0 && u1 >= 0.0) {
        // Expansion pays in both states: expand at once.
        sol.theta_upper = 0.0;
        sol.upper_gap = 1.0;
        return sol;
    }
    if (u0 < 0.0 && u1 > 0.0) {
        stop_above(sol, u0, u1, params.alpha());
    } else if (u0 > 0.0 && u1 < 0.0) {
        stop_below(sol, u0, u1, params.alpha());
    } else {
        throw DegenerateParameterError("expansion never pays: g1 <= 0 on [0, 1]");
    }
    return sol;
}

ThresholdSolution solve_two_threshold(const ModelParams& params) {
    require_kind(params, PolicyKind::TwoThreshold);
    const double g = gamma_exponent(params);
    if (!(g > 1.0)) throw DegenerateParameterError("gamma == 1: no continuation region");
    const double h = params.h();
    const double l = params.l();
    const double ka = params.k_alpha();
    const double w0 = params.l_dag() - ka;
    const double w1 = params.h_dag() - ka;
    if (!(w1 > 0.0))
        throw DegenerateParameterError("two-threshold solution needs h_dag > k alpha");
    const double r = (g - 1.0) / (g + 1.0);
    const double ap = 0.5 * (g + 1.0);
    const double am = 0.5 * (g - 1.0);

    // q_lower implied by the lower-boundary pair, as a function of u = ln beta.
    auto q1 = [=](double u) {
        return r * (-l - w0 * std::exp(-ap * u)) / (h + w1 * std::exp(-am * u));
    };
    // Same quantity from the upper pair, rescaled so nothing overflows.
    auto q2 = [=](double u) {
        const double e = std::exp(-ap * u);
        return (-l * e - w0 * std::exp(-u)) / (r * (h * e + w1));
    };
    auto f = [&](double u) { return q1(u) - q2(u); };

    const RootResult root = find_first_root(f, 0.0);
    const double u = root.x;
    const double q_lower = q1(u);
    if (!(q_lower > 0.0)) {
        std::ostringstream os;
        os << "ln beta = " << u << ", q_lower = " << q_lower;
        throw SolverError("nonpositive lower odds at the root", os.str());
    }

    ThresholdSolution sol;
    sol.iterations = root.iterations;
    sol.multiple_roots = root.multiple_sign_changes;
    const auto geo = detail::geometry(g, u, q_lower);
    const double alpha = params.alpha();
    const double tl = geo.theta_lower;
    const double tu = geo.theta_upper;
    const double gap = geo.upper_gap;
    const detail::BoundaryPayoff lower{reward_exit(tl, params), -tl * (1.0 - tl) * (h - l) / alpha};
    const detail::BoundaryPayoff upper{(w1 - gap * (params.h_dag() - params.l_dag())) / alpha,
                                       tu * gap * (params.h_dag() - params.l_dag()) / alpha};
    detail::assemble(sol, geo, lower, upper);

    const double p_hat = indifference_ratio(params);
    if (!(tl < p_hat && p_hat < tu)) {
        std::ostringstream os;
        os << "theta_lower = " << tl << ", p_hat = " << p_hat << ", theta_upper = " << tu;
        throw SolverError("thresholds do not straddle p_hat", os.str());
    }
    if (!(sol.residual < 1e-10)) {
        std::ostringstream os;
        os << "residual = " << sol.residual << ", ln beta = " << u;
        throw NonConvergenceError("smooth-pasting residual above tolerance", os.str());
    }
    return sol;
}

ThresholdSolution solve(const ModelParams& params) {
    switch (classify_regime(params)) {
        case PolicyKind::ExitOnly: return solve_exit_only(params);
        case PolicyKind::ExpandOnly: return solve_expand_only(params);
        case PolicyKind::TwoThreshold: return solve_two_threshold(params);
    }
    throw UsageError("unknown regime");
}

namespace detail {

TwoThresholdGeometry geometry(double gamma, double log_beta, double q_lower) {
    TwoThresholdGeometry geo{};
    geo.gamma = gamma;
    geo.log_beta = log_beta;
    geo.log_q_lower = std::log(q_lower);
    const double log_q_upper = geo.log_q_lower + log_beta;
    geo.theta_lower = q_lower / (1.0 + q_lower);
    geo.theta_upper = 1.0 / (1.0 + std::exp(-log_q_upper));
    geo.upper_gap = 1.0 / (1.0 + std::exp(log_q_upper));
    return geo;
}

void assemble(ThresholdSolution& sol, const TwoThresholdGeometry& geo, BoundaryPayoff lower,
              BoundaryPayoff upper) {
    const double g = geo.gamma;
    const double a = 0.5 * (1.0 + g);
    const double b = 0.5 * (1.0 - g);
    const double u = geo.log_beta;
    const double lq_lo = geo.log_q_lower;
    const double lq_hi = lq_lo + u;
    const double l1p_lo = log1p_exp(lq_lo);  // log(1 + q)
    const double l1p_hi = log1p_exp(lq_hi);

    // Unknowns x1 = c1 psi(theta_upper), x2 = c2 phi(theta_lower).
    const double rho_psi = std::exp(-a * u + l1p_hi - l1p_lo);  // psi(lo) / psi(hi)
    const double rho_phi = std::exp(b * u - l1p_hi + l1p_lo);   // phi(hi) / phi(lo)
    const double det = -std::expm1(-g * u);
    const double x1 = (upper.value - rho_phi * lower.value) / det;
    const double x2 = (lower.value - rho_psi * upper.value) / det;
    if (!(x1 > 0.0 && x2 > 0.0)) {
        std::ostringstream os;
        os << "c1 psi(theta_upper) = " << x1 << ", c2 phi(theta_lower) = " << x2;
        throw SolverError("value matching gives a nonpositive coefficient", os.str());
    }

    sol.kind = PolicyKind::TwoThreshold;
    sol.gamma = g;
    sol.theta_lower = geo.theta_lower;
    sol.theta_upper = geo.theta_upper;
    sol.upper_gap = geo.upper_gap;
    sol.log_beta = u;
    sol.beta = std::exp(u);
    sol.log_q_lower = lq_lo;
    sol.log_c1 = std::log(x1) - (a * lq_hi - l1p_hi);
    sol.log_c2 = std::log(x2) - (b * lq_lo - l1p_lo);

    const double tl = geo.theta_lower;
    const double tu = geo.theta_upper;
    // Slopes in log-odds: d/dx of c psi is c psi (a - p), of c phi is c phi (b - p).
    const double a_minus_tu = 0.5 * (g - 1.0) + geo.upper_gap;
    const double res[4] = {
        x1 * rho_psi + x2 - lower.value,
        x1 + x2 * rho_phi - upper.value,
        x1 * rho_psi * (a - tl) + x2 * (b - tl) - lower.scaled_slope,
        x1 * a_minus_tu + x2 * rho_phi * (b - tu) - upper.scaled_slope,
    };
    const double scale = std::max({std::abs(lower.value), std::abs(upper.value), 1.0});
    double worst = 0.0;
    for (double v : res) worst = std::max(worst, std::abs(v) / scale);
    sol.residual = worst;
}

}  // namespace detail

namespace detail {

double continuation_value(double p, const ThresholdSolution& sol) {
    const double g = sol.gamma;
    double out = 0.0;
    if (p == 0.0 || p == 1.0) {
        if (std::isfinite(sol.log_c1)) out += sol.c1() * psi(p, g);
        if (std::isfinite(sol.log_c2)) out += sol.c2() * phi(p, g);
        return out;
    }
    const double lq = std::log(p) - std::log1p(-p);
    const double l1p = log1p_exp(lq);
    if (std::isfinite(sol.log_c1)) out += std::exp(sol.log_c1 + 0.5 * (1.0 + g) * lq - l1p);
    if (std::isfinite(sol.log_c2)) out += std::exp(sol.log_c2 + 0.5 * (1.0 - g) * lq - l1p);
    return out;
}

}  // namespace detail

double optimal_return(double p, const ThresholdSolution& sol, const ModelParams& params) {
    check_probability(p, "optimal_return");
    if (sol.continues(p)) return detail::continuation_value(p, sol);
    return reward_g(p, params);
}

double value_function(double p, const ThresholdSolution& sol, const ModelParams& params) {
    return perpetuity(p, params) + optimal_return(p, sol, params);
}

double time_potential(double p, double sigma, double drift_gap) {
    check_probability(p, "time_potential");
    const double s = sigma / drift_gap;
    if (p == 0.5) return 0.0;
    return 2.0 * s * s * (2.0 * p - 1.0) * (std::log(p) - std::log1p(-p));
}

namespace {

double exit_time_from_log_odds(double p, double lo, double hi, double lq_lo, double lq_hi,
                               double sigma, double drift_gap) {
    if (!(p > lo && p < hi)) return 0.0;
    const double s = sigma / drift_gap;
    const double c = 2.0 * s * s;
    const double lq = std::log(p) - std::log1p(-p);
    const double t_lo = c * (2.0 * lo - 1.0) * lq_lo;
    const double t_hi = c * (2.0 * hi - 1.0) * lq_hi;
    const double t_p = c * (2.0 * p - 1.0) * lq;
    const double w = (p - lo) / (hi - lo);
    return std::max(0.0, w * t_hi + (1.0 - w) * t_lo - t_p);
}

}  // namespace

double expected_exit_time(double p, double lo, double hi, double sigma, double drift_gap) {
    check_probability(p, "expected_exit_time");
    check_probability(lo, "expected_exit_time");
    check_probability(hi, "expected_exit_time");
    if (!(sigma > 0.0) || !(drift_gap > 0.0))
        throw ParameterError("expected_exit_time: sigma and h - l must be > 0");
    if (!(p > lo && p < hi)) return 0.0;
    if (lo == 0.0 || hi == 1.0) return std::numeric_limits<double>::infinity();
    return exit_time_from_log_odds(p, lo, hi, std::log(lo) - std::log1p(-lo),
                                   std::log(hi) - std::log1p(-hi), sigma, drift_gap);
}

double expected_time(double p, const ThresholdSolution& sol, const ModelParams& params) {
    check_probability(p, "expected_time");
    if (!sol.continues(p)) return 0.0;
    if (sol.kind != PolicyKind::TwoThreshold) return std::numeric_limits<double>::infinity();
    const double lq_lo = *sol.log_q_lower;
    return exit_time_from_log_odds(p, *sol.theta_lower, *sol.theta_upper, lq_lo,
                                   lq_lo + *sol.log_beta, params.sigma(), params.drift_gap());
}

double upper_hit_probability(double p, double lo, double hi) {
    if (!(hi > lo)) throw DegenerateParameterError("upper_hit_probability: empty interval");
    if (!(p >= lo && p <= hi)) throw ParameterError("upper_hit_probability: p outside [lo, hi]");
    return (p - lo) / (hi - lo);
}

double upper_hit_probability(double p, const ThresholdSolution& sol) {
    if (sol.kind != PolicyKind::TwoThreshold)
        throw UsageError("upper_hit_probability needs a two-threshold solution");
    return upper_hit_probability(p, *sol.theta_lower, *sol.theta_upper);
}

std::vector<double> sigma_grid(double lo, double hi, std::size_t count, bool logarithmic) {
    if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi))
        throw ParameterError("sigma grid needs 0 < lo <= hi");
    if (count == 0) throw ParameterError("sigma grid needs at least one point");
    if (count > 1 && !(hi > lo)) throw ParameterError("sigma grid must be increasing");
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
        out[i] = logarithmic ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t;
    }
    out.back() = hi;
    return out;
}

std::vector<SweepRecord> sweep_sigma(const ModelParams& params, const std::vector<double>& sigmas,
                                     double p0, unsigned threads) {
    check_probability(p0, "sweep_sigma");
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        if (!(sigmas[i] > 0.0) || (i > 0 && !(sigmas[i] > sigmas[i - 1])))
            throw ParameterError("sigma grid must be positive and increasing");
    }
    std::vector<SweepRecord> out(sigmas.size());
    parallel_for(sigmas.size(), threads, [&](std::size_t i) {
        SweepRecord& rec = out[i];
        rec.sigma = sigmas[i];
        try {
            const ModelParams ps = params.with_sigma(sigmas[i]);
            const ThresholdSolution sol = solve(ps);
            rec.regime = sol.kind;
            rec.theta_lower = sol.theta_lower;
            rec.theta_upper = sol.theta_upper;
            rec.e_tau = expected_time(p0, sol, ps);
            rec.value = value_function(p0, sol, ps);
            rec.residual = sol.residual;
        } catch (const std::exception& e) {
            rec = SweepRecord{};
            rec.sigma = sigmas[i];
            rec.error = e.what();
        }
    });
    return out;
}

}  // namespace pilot
