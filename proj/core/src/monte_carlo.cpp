#include <algorithm>
#include <cmath>
#include <limits>

#include "pilot/errors.hpp"
#include "pilot/parallel.hpp"
#include "pilot/posterior.hpp"
#include "pilot/rng.hpp"
#include "pilot/validation.hpp"

namespace pilot {

const char* to_string(McQuantity q) {
    switch (q) {
        case McQuantity::Value: return "value";
        case McQuantity::HittingTime: return "hitting_time";
        case McQuantity::UpperHit: return "upper_hit_prob";
        case McQuantity::MeanPosterior: return "mean_posterior";
        case McQuantity::ValueDifference: return "value_difference";
    }
    return "unknown";
}

StoppingReward base_stopping_reward(const ModelParams& params) {
    return [params](double p) { return stopping_reward_r(p, params); };
}

namespace {

// Separate stream for bridge uniforms so that the normals stay aligned
// across policies and runs.
constexpr std::uint64_t kBridgeStream = 0x6a09e667f3bcc909ULL;

struct Outcome {
    double value;
    double tau;
    bool upper;
    bool capped;
};

double logit(double p) {
    if (p <= 0.0) return -std::numeric_limits<double>::infinity();
    if (p >= 1.0) return std::numeric_limits<double>::infinity();
    return std::log(p) - std::log1p(-p);
}

McEstimate summarize(const std::vector<double>& x, std::uint64_t seed, McQuantity q) {
    McEstimate e;
    e.replications = x.size();
    e.seed = seed;
    e.quantity = q;
    if (x.empty()) return e;
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    e.mean = mean;
    if (x.size() > 1) {
        const double n = static_cast<double>(x.size());
        e.standard_error = std::sqrt(ss / (n - 1.0) / n);
    }
    return e;
}

}  // namespace

McRun mc_evaluate_policies(double p0, const std::vector<Interval>& policies,
                           const StoppingReward& reward, const ModelParams& params,
                           const McOptions& opt) {
    check_probability(p0, "mc_evaluate_policies");
    if (policies.empty()) throw ParameterError("mc_evaluate_policies: no policies");
    if (opt.reps < 2) throw ParameterError("mc_evaluate_policies: need at least 2 replications");
    for (const auto& iv : policies) {
        check_probability(iv.lo, "policy threshold");
        check_probability(iv.hi, "policy threshold");
        if (iv.lo > iv.hi) throw ParameterError("policy thresholds out of order");
    }

    const double snr = params.snr();
    const double dt = opt.dt > 0.0 ? opt.dt : 1e-3 / (snr * snr);
    const double cap = opt.time_cap > 0.0 ? opt.time_cap : 1e4 / params.alpha();
    const double alpha = params.alpha();
    const double drift = 0.5 * snr * snr * dt;
    const double vol = snr * std::sqrt(dt);
    const double two_over_var = 2.0 / (vol * vol);
    const auto max_steps = static_cast<std::uint64_t>(std::ceil(cap / dt));

    const std::size_t m = policies.size();
    std::vector<double> a(m), b(m), r_lo(m), r_hi(m);
    for (std::size_t j = 0; j < m; ++j) {
        a[j] = logit(policies[j].lo);
        b[j] = logit(policies[j].hi);
        r_lo[j] = reward(policies[j].lo);
        r_hi[j] = reward(policies[j].hi);
    }
    const double r_p0 = reward(p0);
    const double L0 = logit(p0);

    std::vector<Outcome> out(opt.reps * m);
    parallel_for(opt.reps, opt.threads, [&](std::size_t rep) {
        StreamRng rng(opt.seed, rep);
        StreamRng bridge_rng(opt.seed ^ kBridgeStream, rep);
        const bool high = rng.uniform() < p0;
        const double mu = high ? params.h() : params.l();
        const double step_drift = high ? drift : -drift;
        Outcome* res = &out[rep * m];

        std::size_t active = 0;
        std::vector<bool> done(m, false);
        for (std::size_t j = 0; j < m; ++j) {
            if (p0 > policies[j].lo && p0 < policies[j].hi) {
                ++active;
            } else {
                done[j] = true;
                res[j] = {r_p0, 0.0, p0 >= policies[j].hi && policies[j].hi > policies[j].lo, false};
            }
        }
        auto stop = [&](std::size_t j, double tau, bool upper) {
            const double disc = std::exp(-alpha * tau);
            res[j] = {mu * (-std::expm1(-alpha * tau)) / alpha + disc * (upper ? r_hi[j] : r_lo[j]),
                      tau, upper, false};
            done[j] = true;
            --active;
        };

        double L = L0;
        double t = 0.0;
        for (std::uint64_t k = 0; active > 0 && k < max_steps; ++k) {
            const double Ln = L + step_drift + vol * rng.normal();
            double u = -1.0;  // drawn lazily, shared by all policies this step
            for (std::size_t j = 0; j < m; ++j) {
                if (done[j]) continue;
                if (Ln >= b[j]) {
                    stop(j, t + dt * (b[j] - L) / (Ln - L), true);
                } else if (Ln <= a[j]) {
                    stop(j, t + dt * (L - a[j]) / (L - Ln), false);
                } else if (opt.bridge) {
                    const double eu = two_over_var * (b[j] - L) * (b[j] - Ln);
                    const double el = two_over_var * (L - a[j]) * (Ln - a[j]);
                    if (eu < 40.0 || el < 40.0) {
                        if (u < 0.0) u = bridge_rng.uniform();
                        const double pu = std::exp(-eu);
                        const double pl = std::exp(-el);
                        if (u < pu) {
                            stop(j, t + 0.5 * dt, true);
                        } else if (u < pu + pl) {
                            stop(j, t + 0.5 * dt, false);
                        }
                    }
                }
            }
            L = Ln;
            t = static_cast<double>(k + 1) * dt;
        }
        if (active > 0) {
            const double p_cap = from_log_odds(L);
            for (std::size_t j = 0; j < m; ++j) {
                if (done[j]) continue;
                const double disc = std::exp(-alpha * t);
                res[j] = {mu * (-std::expm1(-alpha * t)) / alpha + disc * reward(p_cap), t, false, true};
            }
        }
    });

    McRun run;
    run.dt = dt;
    run.time_cap = cap;
    run.policies.resize(m);
    std::vector<double> v(opt.reps), tau(opt.reps), up(opt.reps), gap(opt.reps);
    for (std::size_t j = 0; j < m; ++j) {
        std::size_t capped = 0;
        for (std::size_t i = 0; i < opt.reps; ++i) {
            const Outcome& o = out[i * m + j];
            v[i] = o.value;
            tau[i] = o.tau;
            up[i] = o.upper ? 1.0 : 0.0;
            gap[i] = out[i * m].value - o.value;
            capped += o.capped ? 1 : 0;
        }
        PolicyStats& ps = run.policies[j];
        ps.policy = policies[j];
        ps.value = summarize(v, opt.seed, McQuantity::Value);
        ps.hitting_time = summarize(tau, opt.seed, McQuantity::HittingTime);
        ps.upper_hit = summarize(up, opt.seed, McQuantity::UpperHit);
        ps.value_gap = summarize(gap, opt.seed, McQuantity::ValueDifference);
        ps.capped_paths = capped;
        if (static_cast<double>(capped) > 1e-3 * static_cast<double>(opt.reps)) run.valid = false;
    }
    return run;
}

namespace {

void require_valid(const McRun& run) {
    if (!run.valid) {
        throw NonConvergenceError("more than 0.1% of Monte Carlo paths reached the time cap",
                                  "capped paths = " + std::to_string(run.policies[0].capped_paths));
    }
}

}  // namespace

McEstimate mc_policy_value(double p0, double lo, double hi, const ModelParams& params,
                           const McOptions& opt, const StoppingReward& reward) {
    const StoppingReward r = reward ? reward : base_stopping_reward(params);
    const McRun run = mc_evaluate_policies(p0, {{lo, hi}}, r, params, opt);
    require_valid(run);
    return run.policies[0].value;
}

HittingStats mc_hitting_stats(double p0, double lo, double hi, const ModelParams& params,
                              const McOptions& opt) {
    const McRun run = mc_evaluate_policies(p0, {{lo, hi}}, base_stopping_reward(params), params, opt);
    require_valid(run);
    return {run.policies[0].hitting_time, run.policies[0].upper_hit};
}

}  // namespace pilot
