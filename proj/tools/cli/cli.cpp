#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "pilot/asymptotics.hpp"
#include "pilot/csv.hpp"
#include "pilot/errors.hpp"
#include "pilot/parallel.hpp"
#include "pilot/posterior.hpp"
#include "pilot/solver_extended.hpp"
#include "pilot/validation.hpp"
#include "pilot/version.hpp"

namespace pilot::cli {

namespace {

namespace fs = std::filesystem;

struct Context {
    RunConfig cfg;
    unsigned threads = 0;
    double inject_perturbation = 0.0;
    std::ostream& out;
};

std::string fmt(double x) { return format_number(x); }
std::string fmt(std::optional<double> x) { return format_number(x); }

std::ofstream open_output(const RunConfig& cfg, const std::string& name) {
    const fs::path dir(cfg.output);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + cfg.output + "': " + ec.message());
    const fs::path file = dir / name;
    std::ofstream f(file, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + file.string() + "'");
    return f;
}

// Header block: tool, version, command, every parameter, seed, and the
// effective config from which the file can be regenerated.
void write_header(CsvWriter& w, const std::string& command, const RunConfig& cfg) {
    w.meta("tool", "pilot");
    w.meta("version", kVersion);
    w.meta("command", command);
    w.meta("model", cfg.model);
    if (cfg.params) {
        const ModelFields& f = *cfg.params;
        w.meta("h", fmt(f.h));
        w.meta("l", fmt(f.l));
        w.meta("h_dag", fmt(f.h_dag));
        w.meta("l_dag", fmt(f.l_dag));
        w.meta("k", fmt(f.k));
        w.meta("alpha", fmt(f.alpha));
        w.meta("sigma", fmt(f.sigma));
        if (f.n_plants) w.meta("n_plants", fmt(*f.n_plants));
    }
    if (cfg.p0) w.meta("p0", fmt(*cfg.p0));
    w.meta("seed", std::to_string(cfg.mc.seed));
    w.meta("config", to_json(cfg).dump());
}

double default_p0(const RunConfig& cfg, const ModelParams& params) {
    if (cfg.p0) return *cfg.p0;
    return derived_constants(params).p_hat.value_or(0.5);
}

double upper_hit_or_edge(double p, const ThresholdSolution& sol) {
    if (sol.continues(p)) {
        if (sol.kind == PolicyKind::TwoThreshold) return upper_hit_probability(p, sol);
        return std::numeric_limits<double>::quiet_NaN();
    }
    return p >= sol.upper() ? 1.0 : 0.0;
}

// ---- solve ----------------------------------------------------------------

int cmd_solve(Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const ModelParams params = cfg.model_params();
    const double p0 = default_p0(cfg, params);
    const ThresholdSolution sol = solve(params);
    const DerivedConstants dc = derived_constants(params);

    std::ofstream file = open_output(cfg, "solve.csv");
    CsvWriter w(file);
    write_header(w, "solve", cfg);
    w.header({"model", "regime", "theta_lower", "theta_upper", "c1", "c2", "residual", "p0", "value",
              "e_tau", "upper_hit", "p_hat", "theta_A", "C", "volatility_policy"});
    w.row({"base", to_string(sol.kind), fmt(sol.theta_lower), fmt(sol.theta_upper), fmt(sol.c1()),
           fmt(sol.c2()), fmt(sol.residual), fmt(p0), fmt(value_function(p0, sol, params)),
           fmt(expected_time(p0, sol, params)), fmt(upper_hit_or_edge(p0, sol)), fmt(dc.p_hat), "", "",
           ""});

    auto& out = ctx.out;
    out << std::setprecision(10);
    out << "regime       " << to_string(sol.kind) << "\n";
    out << "gamma        " << sol.gamma << "\n";
    out << "theta_lower  " << fmt(sol.theta_lower) << "\n";
    out << "theta_upper  " << fmt(sol.theta_upper) << "\n";
    out << "c1, c2       " << sol.c1() << ", " << sol.c2() << "\n";
    out << "residual     " << sol.residual << "\n";
    out << "V(p0)        " << value_function(p0, sol, params) << "  (p0 = " << p0 << ")\n";
    out << "E[tau]       " << expected_time(p0, sol, params) << "\n";
    out << "P(upper)     " << upper_hit_or_edge(p0, sol) << "\n";

    if (cfg.extended()) {
        const ExtendedSolution ext = solve_extended(params);
        const ThresholdSolution& es = ext.base;
        w.row({"extended", to_string(es.kind), fmt(es.theta_lower), fmt(es.theta_upper), fmt(es.c1()),
               fmt(es.c2()), fmt(es.residual), fmt(p0), fmt(value_function_ext(p0, ext, params)),
               fmt(extended_expected_time(p0, ext, params)), fmt(upper_hit_or_edge(p0, es)),
               fmt(ext.p_hat_ext), fmt(ext.post.theta_A), fmt(ext.post.C()),
               to_string(infer_volatility_policy(params))});
        out << "extended model\n";
        out << "  theta_lower  " << fmt(es.theta_lower) << "\n";
        out << "  theta_upper  " << fmt(es.theta_upper) << "\n";
        out << "  theta_A, C   " << ext.post.theta_A << ", " << ext.post.C() << "\n";
        out << "  residual     " << es.residual << "\n";
        out << "  V(p0)        " << value_function_ext(p0, ext, params) << "\n";
        out << "  E[tau]       " << extended_expected_time(p0, ext, params) << "\n";
        if (ext.disconnected_region_flag) out << "  warning: continuation region may be disconnected\n";
    }
    out << "wrote " << (fs::path(cfg.output) / "solve.csv").string() << "\n";
    return kOk;
}

// ---- sweep ----------------------------------------------------------------

int cmd_sweep(Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    if (!cfg.sweep) throw ConfigError("sweep needs a 'sweep' section");
    const ModelParams params = cfg.model_params();
    const double p0 = default_p0(cfg, params);
    const std::vector<double> sigmas =
        sigma_grid(cfg.sweep->min, cfg.sweep->max, cfg.sweep->count, cfg.sweep->log);

    std::vector<SweepRecord> records = sweep_sigma(params, sigmas, p0, ctx.threads);
    if (cfg.extended()) {
        const auto ext = sweep_sigma_extended(params, sigmas, p0, ctx.threads);
        records.insert(records.end(), ext.begin(), ext.end());
    }

    std::ofstream file = open_output(cfg, "sweep.csv");
    CsvWriter w(file);
    write_header(w, "sweep", cfg);
    w.meta("p0_used", fmt(p0));
    w.header({"model", "sigma", "regime", "theta_lower", "theta_upper", "e_tau", "value", "residual",
              "error"});
    std::size_t failed = 0;
    for (const SweepRecord& r : records) {
        if (!r.error.empty()) ++failed;
        w.row({r.model, fmt(r.sigma), r.regime ? to_string(*r.regime) : "", fmt(r.theta_lower),
               fmt(r.theta_upper), fmt(r.e_tau), fmt(r.value), fmt(r.residual), r.error});
    }
    ctx.out << "sweep: " << records.size() << " rows, " << failed << " failed\n";
    ctx.out << "wrote " << (fs::path(cfg.output) / "sweep.csv").string() << "\n";
    if (static_cast<double>(failed) > 0.05 * static_cast<double>(records.size())) {
        ctx.out << "more than 5% of rows failed\n";
        return kSolverFailure;
    }
    return kOk;
}

// ---- simulate -------------------------------------------------------------

int cmd_simulate(Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const ModelParams params = cfg.model_params();
    const double p0 = default_p0(cfg, params);
    const McConfig& mc = cfg.mc;
    const double dt = mc.dt > 0.0 ? mc.dt : 1e-3 / (params.snr() * params.snr());

    {
        std::ofstream file = open_output(cfg, "simulate_paths.csv");
        CsvWriter w(file);
        write_header(w, "simulate", cfg);
        w.meta("dt", fmt(dt));
        w.header({"path", "t", "x", "p", "mu_true"});
        for (std::size_t i = 0; i < mc.paths; ++i) {
            const PosteriorPath path = simulate_path(p0, params, dt, mc.horizon, mc.seed, i);
            for (std::size_t s = 0; s < path.times.size(); ++s) {
                if (s % mc.record_every != 0 && s + 1 != path.times.size()) continue;
                w.row({format_integer(static_cast<std::int64_t>(i)), fmt(path.times[s]), fmt(path.x[s]),
                       fmt(path.p[s]), fmt(path.mu_true)});
            }
        }
    }

    const auto ensemble =
        ensemble_statistics(p0, params, dt, mc.horizon, mc.reps, mc.seed, ctx.threads, mc.record_every);
    double worst_z = 0.0;
    {
        std::ofstream file = open_output(cfg, "simulate_ensemble.csv");
        CsvWriter w(file);
        write_header(w, "simulate", cfg);
        w.meta("dt", fmt(dt));
        w.header({"t", "mean_p", "se_p", "z"});
        for (const EnsemblePoint& e : ensemble) {
            const double z = e.se_p > 0.0 ? (e.mean_p - p0) / e.se_p : 0.0;
            worst_z = std::max(worst_z, std::abs(z));
            w.row({fmt(e.t), fmt(e.mean_p), fmt(e.se_p), fmt(z)});
        }
    }
    ctx.out << "ensemble: " << ensemble.size() << " points, max |mean P_t - p0| / se = " << worst_z
            << "\n";

    const ThresholdSolution sol = solve(params);
    if (sol.kind == PolicyKind::TwoThreshold && sol.continues(p0)) {
        McOptions opt;
        opt.reps = mc.reps;
        opt.dt = mc.dt;
        opt.seed = mc.seed;
        opt.threads = ctx.threads;
        const double lo = sol.lower();
        const double hi = sol.upper();
        const McRun run =
            mc_evaluate_policies(p0, {{lo, hi}}, base_stopping_reward(params), params, opt);
        if (!run.valid) {
            throw NonConvergenceError("more than 0.1% of Monte Carlo paths reached the time cap",
                                      "capped = " + std::to_string(run.policies[0].capped_paths));
        }
        const PolicyStats& ps = run.policies[0];
        std::ofstream file = open_output(cfg, "simulate_hitting.csv");
        CsvWriter w(file);
        write_header(w, "simulate", cfg);
        w.meta("theta_lower", fmt(lo));
        w.meta("theta_upper", fmt(hi));
        w.header({"quantity", "analytic", "mc_mean", "mc_se", "gap", "tolerance", "pass"});
        auto row = [&](const char* q, double analytic, const McEstimate& e) {
            const double gap = std::abs(analytic - e.mean);
            const double tol = 3.0 * e.standard_error;
            w.row({q, fmt(analytic), fmt(e.mean), fmt(e.standard_error), fmt(gap), fmt(tol),
                   gap <= tol ? "true" : "false"});
            ctx.out << std::left << std::setw(10) << q << " analytic " << analytic << "  mc " << e.mean
                    << " +- " << e.standard_error << (gap <= tol ? "" : "  (outside 3 SE)") << "\n";
        };
        row("upper_hit", upper_hit_probability(p0, sol), ps.upper_hit);
        row("e_tau", expected_time(p0, sol, params), ps.hitting_time);
        row("value", value_function(p0, sol, params), ps.value);
    }
    ctx.out << "wrote simulate_*.csv to " << cfg.output << "\n";
    return kOk;
}

// ---- certify --------------------------------------------------------------

int cmd_certify(Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    std::vector<CertificationInstance> suite = regression_suite();
    if (cfg.params) {
        const ModelParams params = cfg.model_params();
        if (classify_regime(params) == PolicyKind::TwoThreshold) {
            suite.push_back({"config", params, default_p0(cfg, params)});
        } else {
            ctx.out << "config instance is not two-threshold; certifying the regression suite only\n";
        }
    }
    CertificationOptions opt;
    opt.mc.reps = cfg.certify.reps;
    opt.mc.dt = cfg.mc.dt;
    opt.mc.seed = cfg.mc.seed;
    opt.mc.threads = ctx.threads;
    opt.grid_n = cfg.certify.grid_n;
    opt.perturbation = cfg.certify.perturbation;
    opt.inject_perturbation = ctx.inject_perturbation;
    opt.asymptotic_sigmas = cfg.asymptotic_sigmas;
    const CertificationReport report = certify(suite, opt);

    std::ofstream file = open_output(cfg, "certify.csv");
    CsvWriter w(file);
    write_header(w, "certify", cfg);
    if (ctx.inject_perturbation != 0.0) w.meta("inject_perturbation", fmt(ctx.inject_perturbation));
    w.header({"instance", "quantity", "analytic", "oracle", "gap", "tolerance", "pass"});
    std::map<std::string, std::pair<std::size_t, std::size_t>> tally;
    std::vector<std::string> order;
    for (const CertificationRow& r : report.rows) {
        w.row({r.instance, r.quantity, fmt(r.analytic), fmt(r.oracle), fmt(r.gap), fmt(r.tolerance),
               r.pass ? "true" : "false"});
        if (!tally.count(r.instance)) order.push_back(r.instance);
        auto& [passed, total] = tally[r.instance];
        ++total;
        if (r.pass) ++passed;
    }
    auto& out = ctx.out;
    for (const std::string& id : order) {
        const auto [passed, total] = tally[id];
        out << std::left << std::setw(20) << id << passed << "/" << total << " checks passed\n";
    }
    for (const CertificationRow& r : report.rows) {
        if (r.pass) continue;
        out << "FAIL " << r.instance << " " << r.quantity << ": analytic " << fmt(r.analytic)
            << ", oracle " << fmt(r.oracle) << ", gap " << fmt(r.gap) << ", tolerance "
            << fmt(r.tolerance) << "\n";
    }
    out << "certification: " << report.rows.size() - report.failures() << "/" << report.rows.size()
        << " rows passed\n";
    out << "wrote " << (fs::path(cfg.output) / "certify.csv").string() << "\n";
    return report.all_pass() ? kOk : kCertificationFailure;
}

// ---- asymptotics ----------------------------------------------------------

int cmd_asymptotics(Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const ModelParams params = cfg.model_params();
    const auto rows = asymptotic_comparison(params, cfg.asymptotic_sigmas, cfg.extended());

    std::ofstream file = open_output(cfg, "asymptotics.csv");
    CsvWriter w(file);
    write_header(w, "asymptotics", cfg);
    w.header({"sigma", "regime", "theta_lower_solver", "theta_lower_asymptotic", "theta_upper_solver",
              "theta_upper_asymptotic", "error"});
    std::size_t failed = 0;
    ctx.out << std::setprecision(8);
    for (const AsymptoticRow& r : rows) {
        if (!r.error.empty()) ++failed;
        w.row({fmt(r.sigma), r.regime, fmt(r.theta_lower_solver), fmt(r.theta_lower_asymptotic),
               fmt(r.theta_upper_solver), fmt(r.theta_upper_asymptotic), r.error});
        ctx.out << "sigma " << std::setw(10) << r.sigma << "  " << std::setw(24) << r.regime
                << " lower " << fmt(r.theta_lower_solver) << " vs " << r.theta_lower_asymptotic
                << "   upper " << fmt(r.theta_upper_solver) << " vs " << r.theta_upper_asymptotic
                << (r.error.empty() ? "" : "  error: " + r.error) << "\n";
    }
    ctx.out << "wrote " << (fs::path(cfg.output) / "asymptotics.csv").string() << "\n";
    if (static_cast<double>(failed) > 0.05 * static_cast<double>(rows.size())) return kSolverFailure;
    return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Threshold solver for the Bayesian expansion/exit problem", "pilot"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    double inject = 0.0;
    app.add_option("--config", config_path, "JSON config file, or a CSV written by this tool");
    auto* out_opt = app.add_option("--out", out_dir, "Output directory (default: config 'output' or .)");
    auto* seed_opt = app.add_option("--seed", seed, "Monte Carlo seed (overrides mc.seed)");
    app.add_option("--threads", threads, "Worker threads, 0 = all cores")->capture_default_str();

    std::map<std::string, std::function<int(Context&)>> commands{
        {"solve", cmd_solve},     {"sweep", cmd_sweep},           {"simulate", cmd_simulate},
        {"certify", cmd_certify}, {"asymptotics", cmd_asymptotics},
    };
    app.add_subcommand("solve", "Solve for the optimal thresholds at the configured parameters");
    app.add_subcommand("sweep", "Thresholds, E[tau] and V(p0) over a sigma grid");
    app.add_subcommand("simulate", "Posterior sample paths, ensemble mean and hitting statistics");
    auto* certify_cmd =
        app.add_subcommand("certify", "Analytic solutions against Monte Carlo, grid and asymptotics");
    certify_cmd->add_option("--inject-perturbation", inject)->group("");
    app.add_subcommand("asymptotics", "Solver thresholds next to the small/large-sigma expansions");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kOk : kConfigError;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (out_opt->count() > 0) cfg.output = out_dir;
        if (seed_opt->count() > 0) cfg.mc.seed = seed;
        Context ctx{std::move(cfg), threads, inject, out};
        return commands.at(name)(ctx);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const ParameterError& e) {
        err << "parameter error: " << e.what() << "\n";
        return kConfigError;
    } catch (const AssumptionViolation& e) {
        err << "assumption violated: " << e.what() << "\n";
        return kConfigError;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kConfigError;
    } catch (const SolverError& e) {
        err << "solver failure: " << e.what() << "\n";
        return kSolverFailure;
    } catch (const std::exception& e) {
        err << "solver failure: " << e.what() << "\n";
        return kSolverFailure;
    }
}

}  // namespace pilot::cli
