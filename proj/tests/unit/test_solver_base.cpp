#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "pilot/asymptotics.hpp"
#include "pilot/errors.hpp"
#include "pilot/solver_base.hpp"
#include "pilot/validation.hpp"

using namespace pilot;

namespace {

ModelParams make(double h, double l, double hd, double ld, double k, double alpha, double sigma) {
    return ModelParams(ModelFields{
        .h = h, .l = l, .h_dag = hd, .l_dag = ld, .k = k, .alpha = alpha, .sigma = sigma});
}

ModelParams symmetric(double sigma = 1.0) { return make(1, -1, 1, -1, 1, 0.1, sigma); }
ModelParams exit_only(double sigma = 1.0) { return make(1, -1, 0, 0, 20, 0.1, sigma); }
ModelParams nonnegative(double sigma = 1.0) { return make(1, -1, 0.5, 0.5, 1, 0.1, sigma); }

// Fourth-order one-sided derivative; dir = +1 looks right, -1 looks left.
double one_sided_derivative(const std::function<double(double)>& f, double x, int dir,
                            double e = 1e-4) {
    const double s = dir * e;
    return dir * (-25 * f(x) + 48 * f(x + s) - 36 * f(x + 2 * s) + 16 * f(x + 3 * s) - 3 * f(x + 4 * s)) /
           (12 * e);
}

}  // namespace

TEST(Regime, Classification) {
    EXPECT_EQ(classify_regime(exit_only()), PolicyKind::ExitOnly);
    EXPECT_EQ(classify_regime(make(1, -1, 1, 1.5, 0, 0.1, 1)), PolicyKind::ExpandOnly);
    EXPECT_EQ(classify_regime(symmetric()), PolicyKind::TwoThreshold);
    EXPECT_THROW(make(1, -1, -1, 1, 1, 0.1, 1), ParameterError);  // h_A == l_A
}

TEST(ExitOnly, ClosedFormThreshold) {
    const ThresholdSolution s = solve(exit_only());
    ASSERT_EQ(s.kind, PolicyKind::ExitOnly);
    const double g = std::sqrt(1.2);
    EXPECT_NEAR(s.theta_lower.value(), (g - 1) / (2 * g), 1e-12);
    EXPECT_NEAR(s.theta_lower.value(), 0.0435645354, 1e-10);
    EXPECT_FALSE(s.theta_upper.has_value());

    const ModelParams a = make(2, -0.5, 0, 0, 30, 0.1, 1.3);
    const ThresholdSolution sa = solve(a);
    const double ga = gamma_exponent(a);
    EXPECT_NEAR(sa.theta_lower.value(), 0.5 * (ga - 1) / ((ga + 1) * 2 + 0.5 * (ga - 1)), 1e-12);
}

TEST(ExitOnly, SmallSigmaLimit) {
    EXPECT_LT(solve(exit_only(1e-3)).lower(), 1e-6);
    EXPECT_THROW(solve_two_threshold(exit_only()), UsageError);
}

TEST(ExitOnly, SmoothPasting) {
    const ModelParams m = exit_only();
    const ThresholdSolution s = solve(m);
    const double t = s.lower();
    const auto R = [&](double p) { return optimal_return(p, s, m); };
    const double slope = -(m.h() - m.l()) / m.alpha();
    EXPECT_NEAR(s.c2() * phi_derivative(t, s.gamma), slope, 1e-8 * std::abs(slope));
    EXPECT_NEAR(one_sided_derivative(R, t, +1), slope, 1e-6 * std::abs(slope));
    EXPECT_NEAR(R(t), reward_g(t, m), 1e-12);
    EXPECT_GT(s.c2(), 0.0);
    EXPECT_EQ(s.c1(), 0.0);
}

TEST(ExpandOnly, ImmediateExpansionAgreesWithGrid) {
    const ModelParams m = make(1, -0.5, 2, 1, 1, 0.1, 1);
    const ThresholdSolution s = solve(m);
    ASSERT_EQ(s.kind, PolicyKind::ExpandOnly);
    EXPECT_EQ(s.upper(), 0.0);
    EXPECT_FALSE(s.continues(0.5));
    const GridSolution grid = grid_value_iteration(m, 2001);
    for (std::size_t i = 0; i < grid.p.size(); ++i) EXPECT_TRUE(grid.stop[i]) << grid.p[i];
}

TEST(ExpandOnly, LowerThresholdAgreesWithGrid) {
    // Expansion pays in the low state only, so the firm expands when p is low.
    const ModelParams m = make(1, -1, 0.02, 1.5, 0.5, 0.1, 1);
    const ThresholdSolution s = solve(m);
    ASSERT_EQ(s.kind, PolicyKind::ExpandOnly);
    ASSERT_TRUE(s.theta_lower.has_value());
    EXPECT_EQ(s.c1(), 0.0);
    EXPECT_GT(s.c2(), 0.0);
    const GridSolution grid = grid_value_iteration(m, 4001);
    ASSERT_TRUE(grid.lower_boundary.has_value());
    EXPECT_NEAR(*grid.lower_boundary, s.lower(), 2 * grid.spacing());
    EXPECT_FALSE(grid.upper_boundary.has_value());
}

TEST(TwoThreshold, SymmetricInstance) {
    const ModelParams m = symmetric();
    const ThresholdSolution s = solve(m);
    ASSERT_EQ(s.kind, PolicyKind::TwoThreshold);
    EXPECT_LT(s.residual, 1e-10);
    EXPECT_GT(s.c1(), 0.0);
    EXPECT_GT(s.c2(), 0.0);
    EXPECT_LT(s.lower(), 0.525);
    EXPECT_GT(s.upper(), 0.525);
    EXPECT_GT(s.beta.value(), 1.0);
    EXPECT_NEAR(s.upper_gap.value(), 1.0 - s.upper(), 1e-15);
    EXPECT_FALSE(s.multiple_roots);

    const GridSolution grid = grid_value_iteration(m, 4001);
    EXPECT_NEAR(grid.lower_boundary.value(), s.lower(), 2 * grid.spacing());
    EXPECT_NEAR(grid.upper_boundary.value(), s.upper(), 2 * grid.spacing());
}

TEST(TwoThreshold, BoundaryConditionsAndSmoothPasting) {
    for (const ModelParams& m : {symmetric(), symmetric(3.0), nonnegative(),
                                 make(2, -0.5, 1, -0.5, 2, 0.05, 1.5)}) {
        const ThresholdSolution s = solve(m);
        const auto R = [&](double p) { return optimal_return(p, s, m); };
        for (double t : {s.lower(), s.upper()}) {
            EXPECT_NEAR(R(t), reward_g(t, m), 1e-12 * std::max(1.0, std::abs(reward_g(t, m))));
            const double left = one_sided_derivative(R, t, -1);
            const double right = one_sided_derivative(R, t, +1);
            EXPECT_NEAR(left, right, 1e-6 * std::max(1.0, std::abs(left))) << t;
        }
    }
}

TEST(TwoThreshold, ReturnExceedsRewardAndIsConvex) {
    const ModelParams m = symmetric();
    const ThresholdSolution s = solve(m);
    const double h = 1e-3;
    for (int i = 1; i < 1000; ++i) {
        const double p = i * h;
        const double r = optimal_return(p, s, m);
        if (s.continues(p)) EXPECT_GT(r, reward_g(p, m)) << p;
        EXPECT_GE(optimal_return(p + h, s, m) - 2 * r + optimal_return(p - h, s, m), -1e-9) << p;
    }
}

TEST(TwoThreshold, GeneratorVanishesInsideAndRewardIsNonNegativeOutside) {
    const ModelParams m = symmetric();
    const ThresholdSolution s = solve(m);
    const double e = 1e-4;
    for (double p = s.lower() + 0.05; p < s.upper() - 0.05; p += 0.01) {
        const double f = optimal_return(p, s, m);
        const double d2 = (optimal_return(p + e, s, m) - 2 * f + optimal_return(p - e, s, m)) / (e * e);
        const double q = p * (1 - p);
        const double gen = -m.alpha() * f + 0.5 * m.snr() * m.snr() * q * q * d2;
        EXPECT_LT(std::abs(gen), 1e-6 * m.alpha() * std::abs(f)) << p;
    }
    for (int i = 0; i <= 1000; ++i) {
        const double p = i / 1000.0;
        if (!s.continues(p)) EXPECT_GE(reward_g(p, m), 0.0) << p;
    }
}

TEST(TwoThreshold, SmallSigmaLowerThreshold) {
    const ModelParams m = symmetric(0.05);
    const double s2 = 0.05 * 0.05;
    const double lead = 2 * s2 * m.alpha() * (-m.l()) / (4.0 * (m.h_A() - m.k_alpha()));
    EXPECT_NEAR(solve(m).lower() / lead, 1.0, 0.25);
}

TEST(TwoThreshold, SolvesAcrossWideSigmaRange) {
    for (const ModelParams& base : {symmetric(), nonnegative()}) {
        for (double s = 0.01; s < 3000; s *= 2) {
            const ThresholdSolution sol = solve(base.with_sigma(s));
            EXPECT_LT(sol.residual, 1e-10) << s;
            EXPECT_LT(sol.lower(), indifference_ratio(base)) << s;
            EXPECT_GT(sol.upper(), indifference_ratio(base)) << s;
        }
    }
}

TEST(TwoThreshold, RequiresPositiveExpansionIncrementNetOfCost) {
    EXPECT_THROW(solve(make(1, -1, 0.1, -0.5, 2, 0.1, 1)), DegenerateParameterError);
}

TEST(ExpectedTime, HandValueAndConventions) {
    EXPECT_NEAR(expected_exit_time(0.5, 0.25, 0.75, 1.0, 2.0), 0.25 * std::log(3.0), 1e-13);
    EXPECT_EQ(expected_exit_time(0.25, 0.25, 0.75, 1.0, 2.0), 0.0);
    EXPECT_EQ(expected_exit_time(0.75, 0.25, 0.75, 1.0, 2.0), 0.0);
    EXPECT_EQ(expected_exit_time(0.9, 0.25, 0.75, 1.0, 2.0), 0.0);
    EXPECT_NEAR(time_potential(0.75, 1.0, 2.0), 0.25 * std::log(3.0), 1e-15);

    const ModelParams m = symmetric();
    const ThresholdSolution s = solve(m);
    EXPECT_EQ(expected_time(s.lower(), s, m), 0.0);
    EXPECT_EQ(expected_time(s.upper(), s, m), 0.0);
    EXPECT_EQ(expected_time(0.99, s, m), 0.0);
    EXPECT_GT(expected_time(0.5, s, m), 0.0);

    const ModelParams x = exit_only();
    EXPECT_TRUE(std::isinf(expected_time(0.5, solve(x), x)));
}

TEST(UpperHit, Conventions) {
    const ModelParams m = symmetric();
    const ThresholdSolution s = solve(m);
    EXPECT_EQ(upper_hit_probability(s.upper(), s), 1.0);
    EXPECT_EQ(upper_hit_probability(s.lower(), s), 0.0);
    EXPECT_NEAR(upper_hit_probability(0.5, 0.25, 0.75), 0.5, 1e-15);
    EXPECT_THROW(upper_hit_probability(0.5, 0.5, 0.5), DegenerateParameterError);
    EXPECT_THROW(upper_hit_probability(0.9, 0.25, 0.75), ParameterError);
    EXPECT_THROW(upper_hit_probability(0.5, solve(exit_only())), UsageError);
}

TEST(ScaleInvariance, ThresholdsAndTimesUnchangedValuesScale) {
    const ModelParams m = make(1, -1, 2, 0.5, 1, 0.1, 1.7);
    const ModelParams s = m.scaled(2.5, true);
    const ThresholdSolution a = solve(m);
    const ThresholdSolution b = solve(s);
    EXPECT_NEAR(a.lower(), b.lower(), 1e-12);
    EXPECT_NEAR(a.upper(), b.upper(), 1e-12);
    for (double p : {0.2, 0.3, 0.4}) {
        EXPECT_NEAR(value_function(p, b, s), 2.5 * value_function(p, a, m), 1e-10);
        EXPECT_NEAR(expected_time(p, b, s), expected_time(p, a, m), 1e-12);
    }
}

TEST(ValueFunctionView, AddsPerpetuity) {
    const ModelParams m = symmetric();
    const ValueFunctionView v(solve(m), m);
    for (double p : {0.01, 0.3, 0.7, 0.99}) {
        EXPECT_NEAR(v.V(p), perpetuity(p, m) + v.R(p), 1e-12);
        if (!v.solution().continues(p)) EXPECT_NEAR(v.V(p), stopping_reward_r(p, m), 1e-12);
    }
}

TEST(Sweep, ComparativeStatics) {
    for (const ModelParams& m : {symmetric(), nonnegative()}) {
        const double p0 = indifference_ratio(m);
        const auto rows = sweep_sigma(m, sigma_grid(0.05, 500, 60, true), p0, 2);
        for (std::size_t i = 1; i < rows.size(); ++i) {
            ASSERT_TRUE(rows[i].error.empty()) << rows[i].error;
            EXPECT_LE(*rows[i].theta_upper, *rows[i - 1].theta_upper + 1e-9);
            EXPECT_GE(*rows[i].theta_lower, *rows[i - 1].theta_lower - 1e-9);
            EXPECT_LE(*rows[i].value, *rows[i - 1].value + 1e-9);
        }
    }
}

TEST(Sweep, ExpectedTimeUnimodalWhenRewardAtIndifferenceIsNonNegative) {
    const ModelParams m = nonnegative();
    ASSERT_EQ(classify_asymptotic(m).sign_case, SignCase::NonNegative);
    const auto rows = sweep_sigma(m, sigma_grid(0.05, 50, 60, true), indifference_ratio(m));
    std::vector<double> e;
    for (const auto& r : rows) e.push_back(*r.e_tau);
    const auto peak = std::max_element(e.begin(), e.end()) - e.begin();
    ASSERT_GT(peak, 0);
    ASSERT_LT(peak, static_cast<long>(e.size()) - 1);
    for (long i = 1; i <= peak; ++i) EXPECT_GT(e[i], e[i - 1]);
    for (std::size_t i = peak + 1; i < e.size(); ++i) EXPECT_LT(e[i], e[i - 1]);
    EXPECT_LT(e.back(), 0.05 * e[peak]);
}

TEST(Sweep, ExpectedTimeKeepsRisingWhenRewardAtIndifferenceIsNegative) {
    const ModelParams m = symmetric();
    ASSERT_EQ(classify_asymptotic(m).sign_case, SignCase::Negative);
    const auto rows = sweep_sigma(m, sigma_grid(0.05, 500, 60, true), indifference_ratio(m));
    for (std::size_t i = rows.size() - 10; i < rows.size(); ++i) {
        EXPECT_GT(*rows[i].e_tau, *rows[i - 1].e_tau);
    }
}

TEST(Sweep, FailuresBecomeErrorRows) {
    // With k alpha above h_dag the two-threshold branch is unavailable, but the
    // regime is still two-threshold at these parameters.
    const ModelParams m = make(1, -1, 0.1, -0.5, 2, 0.1, 1);
    const auto rows = sweep_sigma(m, {0.5, 1.0}, 0.5);
    ASSERT_EQ(rows.size(), 2u);
    for (const auto& r : rows) {
        EXPECT_FALSE(r.error.empty());
        EXPECT_FALSE(r.theta_lower.has_value());
    }
}

TEST(SigmaGrid, Shapes) {
    const auto g = sigma_grid(0.1, 10, 3, true);
    EXPECT_NEAR(g[1], 1.0, 1e-15);
    const auto l = sigma_grid(1, 3, 3, false);
    EXPECT_EQ(l[1], 2.0);
    EXPECT_THROW(sigma_grid(0, 1, 3, true), ParameterError);
    EXPECT_THROW(sigma_grid(2, 1, 3, true), ParameterError);
}
