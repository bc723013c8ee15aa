#include <algorithm>
#include <cmath>
#include <sstream>

#include "pilot/errors.hpp"
#include "pilot/validation.hpp"

namespace pilot {

namespace {

// Thomas algorithm for sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i].
void solve_tridiagonal(const std::vector<double>& sub, std::vector<double> diag,
                       const std::vector<double>& sup, std::vector<double> rhs,
                       std::vector<double>& x) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    x[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = (rhs[i] - sup[i] * x[i + 1]) / diag[i];
}

// Zero of sqrt(f - g), extrapolated linearly from the two continuation nodes
// next to the stopping node `edge`; `dir` points into the continuation set.
std::optional<double> refine(const GridSolution& s, std::size_t edge, int dir) {
    const auto i1 = static_cast<std::size_t>(static_cast<long>(edge) + dir);
    const auto i2 = static_cast<std::size_t>(static_cast<long>(edge) + 2 * dir);
    if (i2 >= s.p.size() || s.stop[i1] || s.stop[i2]) return std::nullopt;
    const double d1 = std::sqrt(std::max(s.value[i1] - s.reward[i1], 0.0));
    const double d2 = std::sqrt(std::max(s.value[i2] - s.reward[i2], 0.0));
    if (!(d2 > d1)) return std::nullopt;
    return s.p[i1] - d1 * (s.p[i2] - s.p[i1]) / (d2 - d1);
}

// Policy iteration on one grid, starting from the stop set `stop`.
GridSolution policy_iteration(const ModelParams& params,
                              const std::function<double(double)>& reward, std::size_t n,
                              std::vector<bool> stop, double tol, int max_iterations) {
    GridSolution s;
    s.p.resize(n);
    s.reward.resize(n);
    s.value.assign(n, 0.0);
    s.stop = std::move(stop);
    const double dp = 1.0 / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        s.p[i] = i == n - 1 ? 1.0 : static_cast<double>(i) * dp;
        s.reward[i] = reward(s.p[i]);
    }

    const double alpha = params.alpha();
    const double half_snr2 = 0.5 * params.snr() * params.snr();
    std::vector<double> c(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double q = s.p[i] * (1.0 - s.p[i]);
        c[i] = half_snr2 * q * q / (dp * dp);
    }
    auto generator = [&](std::size_t i, const std::vector<double>& f) {
        return c[i] * (f[i + 1] - 2.0 * f[i] + f[i - 1]) - alpha * f[i];
    };

    std::vector<double> sub(n), diag(n), sup(n), rhs(n);
    const double end0 = std::max(s.reward[0], 0.0);
    const double end1 = std::max(s.reward[n - 1], 0.0);
    double scale = 1.0;
    for (double g : s.reward) scale = std::max(scale, std::abs(g));
    const double eps = tol * scale;

    bool changed = true;
    int it = 0;
    while (changed) {
        if (it >= max_iterations) {
            std::ostringstream os;
            os << "iterations = " << it << ", N = " << n;
            throw NonConvergenceError("policy iteration did not converge", os.str());
        }
        ++it;
        for (std::size_t i = 0; i < n; ++i) {
            const bool fixed = i == 0 || i == n - 1 || s.stop[i];
            sub[i] = fixed ? 0.0 : c[i];
            sup[i] = fixed ? 0.0 : c[i];
            diag[i] = fixed ? 1.0 : -alpha - 2.0 * c[i];
            rhs[i] = i == 0 ? end0 : i == n - 1 ? end1 : s.stop[i] ? s.reward[i] : 0.0;
        }
        solve_tridiagonal(sub, diag, sup, rhs, s.value);

        changed = false;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            bool stop_here = s.stop[i];
            if (s.stop[i] && generator(i, s.value) > eps) stop_here = false;
            if (!s.stop[i] && s.reward[i] - s.value[i] > eps) stop_here = true;
            if (stop_here != s.stop[i]) {
                s.stop[i] = stop_here;
                changed = true;
            }
        }
    }
    s.iterations = it;
    s.stop[0] = s.value[0] <= s.reward[0];
    s.stop[n - 1] = s.value[n - 1] <= s.reward[n - 1];

    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        // The generator is measured against the size of its own terms.
        const double r = std::max(generator(i, s.value) / ((alpha + 4.0 * c[i]) * scale),
                                  (s.reward[i] - s.value[i]) / scale);
        worst = std::max(worst, std::abs(r));
    }
    s.complementarity_residual = worst;
    return s;
}

}  // namespace

GridSolution grid_value_iteration(const ModelParams& params,
                                  const std::function<double(double)>& reward, std::size_t n,
                                  double tol, int max_iterations) {
    if (n < 3 || n % 2 == 0) throw ParameterError("grid size must be odd and >= 3");
    // Coarse-to-fine: a cold start moves the free boundary about one node per
    // sweep, so each level starts from the stop set of the level below.
    std::vector<std::size_t> levels{n};
    while (levels.back() > 257 && (levels.back() - 1) % 2 == 0)
        levels.push_back((levels.back() - 1) / 2 + 1);
    std::vector<bool> stop(levels.back(), false);
    GridSolution s;
    for (std::size_t k = levels.size(); k-- > 0;) {
        const std::size_t m = levels[k];
        if (stop.size() != m) {
            std::vector<bool> fine(m, false);
            for (std::size_t i = 0; i < m; ++i) {
                fine[i] = i % 2 == 0 ? stop[i / 2] : stop[i / 2] && stop[i / 2 + 1];
            }
            stop = std::move(fine);
        }
        s = policy_iteration(params, reward, m, stop, tol, max_iterations);
        stop = s.stop;
    }

    // Boundaries of the continuation component with the largest excess f - g.
    std::size_t peak = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!s.stop[i] && s.value[i] - s.reward[i] > best) {
            best = s.value[i] - s.reward[i];
            peak = i;
        }
    }
    if (best >= 0.0) {
        std::size_t lo = peak;
        while (lo > 0 && !s.stop[lo - 1]) --lo;
        std::size_t hi = peak;
        while (hi + 1 < n && !s.stop[hi + 1]) ++hi;
        if (lo > 0) {
            s.lower_boundary = s.p[lo - 1];
            s.lower_refined = refine(s, lo - 1, +1);
        }
        if (hi + 1 < n) {
            s.upper_boundary = s.p[hi + 1];
            s.upper_refined = refine(s, hi + 1, -1);
        }
    }
    return s;
}

GridSolution grid_value_iteration(const ModelParams& params, std::size_t n, double tol) {
    return grid_value_iteration(
        params, [&params](double p) { return reward_g(p, params); }, n, tol);
}

}  // namespace pilot
