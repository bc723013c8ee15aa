#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "pilot/errors.hpp"
#include "pilot/solver_base.hpp"
#include "pilot/solver_extended.hpp"
#include "pilot/validation.hpp"

using namespace pilot;

namespace {

ModelParams make(double h, double l, double hd, double ld, double k, double alpha, double sigma) {
    return ModelParams(ModelFields{
        .h = h, .l = l, .h_dag = hd, .l_dag = ld, .k = k, .alpha = alpha, .sigma = sigma});
}

// One more identical plant: sigma_A = 2 sigma.
ModelParams one_more_plant(double k, double sigma) {
    return ModelParams::expansion_multiple(1, -1, 1, k, 0.1, sigma);
}

// Dedicated facility with state-independent increment: sigma_A = sigma.
ModelParams facility(double sigma) { return make(1, -1, 0.5, 0.5, 1, 0.3, sigma); }

std::vector<ModelParams> instances() {
    return {one_more_plant(1, 1),
            one_more_plant(5, 1),
            one_more_plant(5, 0.3),
            ModelParams::expansion_multiple(1, -1, 2, 1, 0.1, 1.5),
            ModelParams::expansion_multiple(2, -0.5, 1, 3, 0.05, 2),
            facility(1),
            facility(0.2)};
}

// Fourth-order one-sided derivative with a step well inside (0, 1).
double one_sided_derivative(const std::function<double(double)>& f, double x, int dir) {
    const double e = 1e-3 * std::min(x, 1.0 - x);
    const double s = dir * e;
    return dir * (-25 * f(x) + 48 * f(x + s) - 36 * f(x + 2 * s) + 16 * f(x + 3 * s) - 3 * f(x + 4 * s)) /
           (12 * e);
}

}  // namespace

TEST(VolatilityPolicy, Inference) {
    EXPECT_EQ(infer_volatility_policy(one_more_plant(1, 1)), VolatilityPolicy::ExpansionMultiple);
    EXPECT_EQ(infer_volatility_policy(facility(1)), VolatilityPolicy::DedicatedFacility);
    EXPECT_THROW(infer_volatility_policy(make(1, -1, 2, -0.5, 1, 0.1, 1)), AssumptionViolation);
    EXPECT_THROW(post_expansion_value(facility(1), VolatilityPolicy::ExpansionMultiple),
                 AssumptionViolation);
}

TEST(PostExpansion, ThresholdMatchesBaseExitThreshold) {
    const PostExpansionValue pev = post_expansion_value(one_more_plant(1, 1));
    EXPECT_DOUBLE_EQ(pev.sigma_A, 2.0);
    const double g = std::sqrt(1.2);
    EXPECT_NEAR(pev.theta_A, (g - 1) / (2 * g), 1e-12);
}

TEST(PostExpansion, ThresholdScaleFree) {
    const PostExpansionValue a = post_expansion_value(facility(1));
    const PostExpansionValue b = post_expansion_value(facility(1).scaled(3.0, true));
    EXPECT_NEAR(a.theta_A, b.theta_A, 1e-14);
    EXPECT_NEAR(b(0.6), 3.0 * a(0.6), 1e-10);
}

TEST(PostExpansion, SmoothPastingAtThreshold) {
    for (const ModelParams& m : instances()) {
        const PostExpansionValue pev = post_expansion_value(m);
        EXPECT_NEAR(pev(pev.theta_A), 0.0, 1e-8);
        EXPECT_NEAR(pev.derivative(pev.theta_A), 0.0, 1e-8);
        const auto v = [&](double p) { return pev(p); };
        EXPECT_NEAR(one_sided_derivative(v, pev.theta_A, +1), 0.0, 1e-6);
        EXPECT_EQ(pev(pev.theta_A * 0.5), 0.0);
    }
}

TEST(PostExpansion, EqualsExitOnlyValueAtPostExpansionParameters) {
    for (const ModelParams& m : instances()) {
        const PostExpansionValue pev = post_expansion_value(m);
        // Exit-only problem for the expanded project; expansion made unattractive.
        const ModelParams post = make(pev.h_A, pev.l_A, 0, 0, 10 * pev.h_A / pev.alpha, pev.alpha,
                                      pev.sigma_A);
        const ThresholdSolution s = solve(post);
        ASSERT_EQ(s.kind, PolicyKind::ExitOnly);
        EXPECT_NEAR(s.lower(), pev.theta_A, 1e-12);
        for (int i = 1; i < 100; ++i) {
            const double p = i / 100.0;
            EXPECT_NEAR(pev(p), value_function(p, s, post), 1e-10 * std::max(1.0, std::abs(pev(p))))
                << p;
        }
    }
}

TEST(PHatExt, DefiningPropertyAndLimits) {
    const PostExpansionValue pev = post_expansion_value(one_more_plant(5, 1));
    EXPECT_NEAR(find_p_hat_ext(pev, 0.0), pev.theta_A, 1e-12);
    const double p = find_p_hat_ext(pev, 5.0);
    EXPECT_NEAR(pev(p) - 5.0, 0.0, 1e-12);
    EXPECT_THROW(find_p_hat_ext(pev, 1e6), AssumptionViolation);
}

TEST(PHatExt, BelowBaseIndifferencePoint) {
    for (const ModelParams& m : instances()) {
        const ExtendedSolution ext = solve_extended(m);
        EXPECT_LT(ext.p_hat_ext, indifference_ratio(m));
    }
}

TEST(Extended, OrderingAndResiduals) {
    for (const ModelParams& m : instances()) {
        const ExtendedSolution ext = solve_extended(m);
        EXPECT_LT(ext.base.residual, 1e-10);
        EXPECT_GT(ext.base.c1(), 0.0);
        EXPECT_GT(ext.base.c2(), 0.0);
        EXPECT_LT(ext.base.lower(), ext.p_hat_ext);
        EXPECT_GT(ext.base.upper(), ext.p_hat_ext);
        EXPECT_GE(ext.base.upper(), ext.post.theta_A);
        EXPECT_FALSE(ext.disconnected_region_flag);
    }
}

TEST(Extended, LowerThresholdWeaklyBelowBase) {
    for (const ModelParams& m : instances()) {
        EXPECT_LE(solve_extended(m).base.lower(), solve(m).lower());
    }
    for (double s = 0.05; s < 200; s *= 2) {
        const ModelParams m = one_more_plant(1, s);
        EXPECT_LE(solve_extended(m).base.lower(), solve(m).lower()) << s;
    }
}

TEST(Extended, BoundaryConditions) {
    for (const ModelParams& m : instances()) {
        const ExtendedSolution ext = solve_extended(m);
        const auto R = [&](double p) { return optimal_return_ext(p, ext, m); };
        for (double t : {ext.base.lower(), ext.base.upper()}) {
            const double g = reward_g_ext(t, ext.post, m);
            EXPECT_NEAR(R(t), g, 1e-10 * std::max(1.0, std::abs(g)));
            const double left = one_sided_derivative(R, t, -1);
            const double right = one_sided_derivative(R, t, +1);
            EXPECT_NEAR(left, right, 1e-6 * std::max(1.0, std::abs(left))) << t;
        }
        for (int i = 1; i < 200; ++i) {
            const double p = i / 200.0;
            EXPECT_GE(R(p), reward_g_ext(p, ext.post, m) - 1e-10) << p;
        }
    }
}

TEST(Extended, AgreesWithGridOracle) {
    const ModelParams m = one_more_plant(5, 1);
    const ExtendedSolution ext = solve_extended(m);
    const GridSolution grid = grid_value_iteration(
        m, [&](double p) { return reward_g_ext(p, ext.post, m); }, 4001);
    EXPECT_NEAR(grid.lower_boundary.value(), ext.base.lower(), 2 * grid.spacing());
    EXPECT_NEAR(grid.upper_boundary.value(), ext.base.upper(), 2 * grid.spacing());
}

TEST(Extended, SmallSigmaUpperGapRatio) {
    const ModelParams m = one_more_plant(5, 0.05);
    const double base_gap = 1.0 - solve(m).upper();
    const double ext_gap = 1.0 - solve_extended(m).base.upper();
    // The option widens the gap: ext / base = (k - l_A / alpha) / k.
    const double expected = (m.k() - m.l_A() / m.alpha()) / m.k();
    EXPECT_NEAR(ext_gap / base_gap / expected, 1.0, 0.2);
}

TEST(Extended, SmallSigmaEarlierExpansionAndShorterDecision) {
    for (const ModelParams& m : {one_more_plant(5, 0.1), facility(0.1)}) {
        const ThresholdSolution base = solve(m);
        const ExtendedSolution ext = solve_extended(m);
        EXPECT_LT(ext.base.upper(), base.upper());
        for (double p = ext.base.lower() + 0.01; p < ext.base.upper(); p += 0.02) {
            EXPECT_LE(extended_expected_time(p, ext, m), expected_time(p, base, m) + 1e-12) << p;
        }
    }
}

TEST(Extended, LargeSigmaMatchesBase) {
    for (const ModelParams& m : {one_more_plant(5, 100), facility(100)}) {
        const ThresholdSolution base = solve(m);
        const ExtendedSolution ext = solve_extended(m);
        EXPECT_LT(std::abs(ext.base.lower() - base.lower()), 1e-6);
        EXPECT_LT(std::abs(ext.base.upper() - base.upper()), 1e-6);
        EXPECT_LT(ext.c_term, 1e-12);
    }
}

TEST(Extended, CTermDecaysWithSigma) {
    double prev = INFINITY;
    for (double s : {5.0, 10.0, 20.0, 50.0}) {
        const double c = solve_extended(one_more_plant(5, s)).c_term;
        EXPECT_LT(c, prev) << s;
        prev = c;
    }
}

TEST(Extended, ExpectedTimeVanishesOutside) {
    const ModelParams m = one_more_plant(1, 1);
    const ExtendedSolution ext = solve_extended(m);
    EXPECT_EQ(extended_expected_time(ext.base.lower(), ext, m), 0.0);
    EXPECT_EQ(extended_expected_time(ext.base.upper(), ext, m), 0.0);
    EXPECT_GT(extended_expected_time(0.5, ext, m), 0.0);
}

TEST(Extended, ValueAddsPerpetuity) {
    const ModelParams m = facility(1);
    const ExtendedSolution ext = solve_extended(m);
    for (double p : {0.05, 0.5, 0.95}) {
        EXPECT_NEAR(value_function_ext(p, ext, m), perpetuity(p, m) + optimal_return_ext(p, ext, m),
                    1e-12);
    }
}

TEST(Extended, RejectsNonPositiveNetIncrement) {
    EXPECT_THROW(solve_extended(make(1, -1, 0.2, 0.2, 3, 0.1, 1)), ParameterError);
}

TEST(Extended, SweepRecordsAreLabelled) {
    const auto rows = sweep_sigma_extended(one_more_plant(1, 1), {0.5, 1.0, 2.0}, 0.5);
    ASSERT_EQ(rows.size(), 3u);
    for (const auto& r : rows) {
        EXPECT_EQ(r.model, "extended");
        EXPECT_TRUE(r.error.empty()) << r.error;
    }
}
