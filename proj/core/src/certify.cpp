#include <algorithm>
#include <cmath>
#include <sstream>

#include "pilot/asymptotics.hpp"
#include "pilot/csv.hpp"
#include "pilot/errors.hpp"
#include "pilot/solver_extended.hpp"
#include "pilot/validation.hpp"

namespace pilot {

std::vector<CertificationInstance> regression_suite() {
    auto make = [](double h, double l, double hd, double ld, double k, double a, double s) {
        return ModelParams(
            ModelFields{.h = h, .l = l, .h_dag = hd, .l_dag = ld, .k = k, .alpha = a, .sigma = s});
    };
    return {
        {"neg_symmetric_s1", make(1, -1, 1, -1, 1, 0.1, 1.0), 0.525},
        {"neg_symmetric_s2", make(1, -1, 1, -1, 1, 0.1, 2.0), 0.45},
        {"neg_multiple_n2", ModelParams::expansion_multiple(1, -1, 2, 1, 0.1, 1.5), 0.6},
        {"nonneg_k1", make(1, -1, 0.7, -0.25, 1, 0.05, 1.6), 0.7},
        {"nonneg_k25_s2", make(1, -1, 0.5, 0, 2.5, 0.05, 2.0), 0.6},
        {"nonneg_k25_s19", make(1, -1, 1.2, -0.5, 2.5, 0.06, 1.9), 0.6},
    };
}

bool CertificationReport::all_pass() const { return failures() == 0; }

std::size_t CertificationReport::failures() const {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [](const CertificationRow& r) { return !r.pass; }));
}

namespace {

struct RowSink {
    CertificationReport& report;
    const std::string& id;

    // Passes when |analytic - oracle| <= tolerance.
    void close(const std::string& q, double analytic, double oracle, double tol) {
        const double gap = std::abs(analytic - oracle);
        report.rows.push_back({id, q, analytic, oracle, gap, tol, gap <= tol});
    }
    void row(const std::string& q, double analytic, double oracle, double gap, double tol, bool pass) {
        report.rows.push_back({id, q, analytic, oracle, gap, tol, pass});
    }
};

double grid_value_error(const GridSolution& grid, const std::function<double(double)>& exact) {
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.p.size(); ++i)
        worst = std::max(worst, std::abs(grid.value[i] - exact(grid.p[i])));
    return worst;
}

double reward_scale(const GridSolution& grid) {
    double s = 1.0;
    for (double g : grid.reward) s = std::max(s, std::abs(g));
    return s;
}

void grid_rows(RowSink& sink, const std::string& prefix, const GridSolution& grid, double lo,
               double hi, const std::function<double(double)>& exact) {
    const double cells = 2.0 * grid.spacing();
    sink.close(prefix + "grid_theta_lower", lo, grid.lower_boundary.value_or(NAN), cells);
    sink.close(prefix + "grid_theta_upper", hi, grid.upper_boundary.value_or(NAN), cells);
    const double scale = reward_scale(grid);
    const double err = grid_value_error(grid, exact);
    sink.row(prefix + "grid_value_max_error", 0.0, err, err, 1e-4 * scale, err <= 1e-4 * scale);
}

void base_instance(CertificationReport& report, const CertificationInstance& inst,
                   const CertificationOptions& opt) {
    const ModelParams& params = inst.params;
    RowSink sink{report, inst.id};
    ThresholdSolution sol;
    try {
        sol = solve(params);
    } catch (const std::exception& e) {
        sink.row(std::string("solve: ") + e.what(), NAN, NAN, NAN, 0.0, false);
        return;
    }
    const double tl = sol.lower();
    const double tu = sol.upper();
    const double p_hat = indifference_ratio(params);
    sink.row("residual", sol.residual, 0.0, sol.residual, 1e-10, sol.residual < 1e-10);
    sink.row("c1_positive", sol.c1(), 0.0, sol.c1(), 0.0, sol.c1() > 0.0);
    sink.row("c2_positive", sol.c2(), 0.0, sol.c2(), 0.0, sol.c2() > 0.0);
    const double margin = std::min(p_hat - tl, tu - p_hat);
    sink.row("threshold_order", tl, tu, margin, 0.0, margin > 0.0);

    const GridSolution grid = grid_value_iteration(params, opt.grid_n);
    grid_rows(sink, "", grid, tl, tu, [&](double p) { return optimal_return(p, sol, params); });

    // Policy handed to the Monte Carlo checks; shifted only for the negative control.
    const double x = opt.inject_perturbation;
    const Interval policy{tl + x, tu - x};
    const double d = opt.perturbation;
    // A threshold pushed onto 0 or 1 is never reached; such paths only end at the cap.
    if (!(policy.lo - d > 0.0 && policy.hi + d < 1.0 && policy.lo < policy.hi)) {
        sink.row("mc_policy_range", policy.lo, policy.hi, NAN, d, false);
        return;
    }
    std::vector<Interval> policies{
        policy,
        {policy.lo - d, policy.hi},
        {policy.lo + d, policy.hi},
        {policy.lo, policy.hi - d},
        {policy.lo, policy.hi + d},
    };
    const McRun run = mc_evaluate_policies(inst.p0, policies, base_stopping_reward(params), params, opt.mc);
    const PolicyStats& best = run.policies[0];
    sink.row("mc_valid", 0.0, static_cast<double>(best.capped_paths),
             static_cast<double>(best.capped_paths), 1e-3 * static_cast<double>(opt.mc.reps), run.valid);
    sink.close("mc_value", value_function(inst.p0, sol, params), best.value.mean,
               3.0 * best.value.standard_error);
    sink.close("mc_upper_hit", upper_hit_probability(inst.p0, sol), best.upper_hit.mean,
               3.0 * best.upper_hit.standard_error);
    sink.close("mc_e_tau", expected_time(inst.p0, sol, params), best.hitting_time.mean,
               3.0 * best.hitting_time.standard_error);
    const char* names[] = {"", "optimality_lower_minus", "optimality_lower_plus",
                           "optimality_upper_minus", "optimality_upper_plus"};
    for (std::size_t j = 1; j < run.policies.size(); ++j) {
        const PolicyStats& ps = run.policies[j];
        const double se = ps.value_gap.standard_error;
        sink.row(names[j], best.value.mean, ps.value.mean, ps.value_gap.mean, -se,
                 ps.value_gap.mean > -se);
    }

    // Extended model, where the post-expansion volatility is defined.
    try {
        const ExtendedSolution ext = solve_extended(params);
        sink.row("ext_residual", ext.base.residual, 0.0, ext.base.residual, 1e-10,
                 ext.base.residual < 1e-10);
        const PostExpansionValue pev = ext.post;
        const GridSolution eg = grid_value_iteration(
            params, [&](double p) { return reward_g_ext(p, pev, params); }, opt.grid_n);
        grid_rows(sink, "ext_", eg, ext.base.lower(), ext.base.upper(),
                  [&](double p) { return optimal_return_ext(p, ext, params); });
        const double diff = ext.base.lower() - tl;
        sink.row("ext_theta_lower_not_above_base", ext.base.lower(), tl, diff, 0.0, diff <= 0.0);
    } catch (const AssumptionViolation&) {
        // No post-expansion volatility convention for this instance.
    }
}

void asymptotic_rows(CertificationReport& report, const CertificationInstance& inst,
                     const std::vector<double>& sigmas) {
    RowSink sink{report, inst.id};
    const double s_star = crossover_sigma(inst.params);
    for (const AsymptoticRow& row : asymptotic_comparison(inst.params, sigmas)) {
        const std::string at = "@sigma=" + format_number(row.sigma);
        if (!row.error.empty() || !row.theta_lower_solver || !row.theta_upper_solver) {
            sink.row("asymptotic" + at + ": " + row.error, NAN, NAN, NAN, 0.0, false);
            continue;
        }
        if (row.sigma < s_star) {
            // Leading order in sigma^2: compare relative to the small quantities.
            const double rl = std::abs(*row.theta_lower_solver / row.theta_lower_asymptotic - 1.0);
            const double ru = std::abs((1.0 - *row.theta_upper_solver) /
                                           (1.0 - row.theta_upper_asymptotic) -
                                       1.0);
            sink.row("asymptotic_theta_lower_rel" + at, row.theta_lower_asymptotic,
                     *row.theta_lower_solver, rl, 0.25, rl <= 0.25);
            sink.row("asymptotic_upper_gap_rel" + at, 1.0 - row.theta_upper_asymptotic,
                     1.0 - *row.theta_upper_solver, ru, 0.25, ru <= 0.25);
        } else {
            sink.close("asymptotic_theta_lower" + at, row.theta_lower_asymptotic,
                       *row.theta_lower_solver, 1e-2);
            sink.close("asymptotic_theta_upper" + at, row.theta_upper_asymptotic,
                       *row.theta_upper_solver, 1e-2);
        }
    }
}

}  // namespace

CertificationReport certify(const std::vector<CertificationInstance>& suite,
                            const CertificationOptions& opt) {
    CertificationReport report;
    for (const auto& inst : suite) base_instance(report, inst, opt);
    if (!suite.empty() && !opt.asymptotic_sigmas.empty())
        asymptotic_rows(report, suite.front(), opt.asymptotic_sigmas);
    return report;
}

}  // namespace pilot
