#pragma once

// Independent numerical oracles used only by tests.

#include <cmath>
#include <functional>

namespace recursum::testing {

namespace detail {

inline double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                           double fb, double whole, double tol, int depth) {
    const double m = (a + b) / 2, lm = (a + m) / 2, rm = (m + b) / 2;
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6 * (fa + 4 * flm + fm);
    const double right = (b - m) / 6 * (fm + 4 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15 * tol) return left + right + delta / 15;
    return simpson_step(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson with tolerance relative to the magnitude of the integral.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double rel_tol) {
    const double fa = f(a), fb = f(b), fm = f((a + b) / 2);
    const double whole = (b - a) / 6 * (fa + 4 * fm + fb);
    // rough magnitude from a coarse pass, then refine against it
    const double rough = detail::simpson_step(f, a, b, fa, fm, fb, whole, 1e-6 * std::abs(whole) + 1e-300, 30);
    return detail::simpson_step(f, a, b, fa, fm, fb, whole, rel_tol * std::abs(rough), 50);
}

/// F_m(T) as the integral over [0, 1] of t^{2m} exp(-T t^2).
inline double boys_quadrature(int m, double T) {
    return adaptive_simpson([&](double t) { return std::pow(t, 2 * m) * std::exp(-T * t * t); }, 0.0, 1.0, 1e-12);
}

}  // namespace recursum::testing
