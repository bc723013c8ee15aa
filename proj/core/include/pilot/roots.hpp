#pragma once

// Bracketing root finder: expand, bisect, polish with safeguarded Newton.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>

#include "pilot/errors.hpp"

namespace pilot {

struct RootResult {
    double x = 0.0;
    double fx = 0.0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    int iterations = 0;
    /// More than one sign change was seen while scanning the bracket; x is
    /// the smallest root found.
    bool multiple_sign_changes = false;
};

struct RootOptions {
    double initial_step = 1.0;
    double cap = 700.0;  ///< largest admissible x
    double rel_tol = 1e-13;
    int newton_steps = 3;
    std::size_t scan_points = 64;
};

/// Smallest root of f on (lo, cap] given f(lo) < 0 and f positive somewhere
/// further right. The bracket is grown by doubling its width.
template <class F>
RootResult find_first_root(F&& f, double lo, const RootOptions& opt = {}) {
    const double f_lo0 = f(lo);
    if (!(f_lo0 < 0.0)) {
        std::ostringstream os;
        os << "F(" << lo << ") = " << f_lo0;
        throw SolverError("root not bracketed: F is not negative at the lower end", os.str());
    }
    double width = opt.initial_step;
    double hi = lo + width;
    double f_hi = f(hi);
    while (!(f_hi > 0.0)) {
        if (std::isnan(f_hi) || hi >= opt.cap) {
            std::ostringstream diag;
            diag << "F(" << lo << ") = " << f_lo0 << ", F(" << hi << ") = " << f_hi;
            throw SolverError("root not bracketed before the search cap", diag.str());
        }
        width *= 2.0;
        hi = std::min(lo + width, opt.cap);
        f_hi = f(hi);
    }

    RootResult res;
    double a = lo;
    double b = hi;
    // Scan for several sign changes; keep the first.
    if (opt.scan_points > 1) {
        int changes = 0;
        double prev_x = lo;
        double prev_f = f_lo0;
        bool first_found = false;
        for (std::size_t i = 1; i <= opt.scan_points; ++i) {
            const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(opt.scan_points);
            const double fx = i == opt.scan_points ? f_hi : f(x);
            if ((prev_f < 0.0) != (fx < 0.0)) {
                ++changes;
                if (!first_found) {
                    a = prev_x;
                    b = x;
                    first_found = true;
                }
            }
            prev_x = x;
            prev_f = fx;
        }
        res.multiple_sign_changes = changes > 1;
    }

    double fa = f(a);
    double fb = f(b);
    res.bracket_lo = a;
    res.bracket_hi = b;
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (a + b);
        if (b - a <= opt.rel_tol * std::abs(mid) || mid == a || mid == b) break;
        const double fm = f(mid);
        ++res.iterations;
        if (fm == 0.0) {
            a = b = mid;
            fa = fb = 0.0;
            break;
        }
        if (fm < 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
            fb = fm;
        }
    }
    double x = std::abs(fa) <= std::abs(fb) ? a : b;
    double fx = x == a ? fa : fb;

    for (int it = 0; it < opt.newton_steps && fx != 0.0; ++it) {
        const double step = 1e-7 * std::max(std::abs(x), 1e-12);
        const double d = (f(x + step) - f(x - step)) / (2.0 * step);
        if (!(std::isfinite(d)) || d == 0.0) break;
        const double xn = x - fx / d;
        if (!(xn >= a && xn <= b)) break;
        const double fn = f(xn);
        if (!(std::abs(fn) < std::abs(fx))) break;
        x = xn;
        fx = fn;
        ++res.iterations;
    }
    res.x = x;
    res.fx = fx;
    return res;
}

}  // namespace pilot
