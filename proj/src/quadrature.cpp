#include "recursum/quadrature.hpp"

#include "recursum/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <numbers>
#include <string>

namespace recursum::quad {

namespace {

constexpr int kSeriesTerms = 200;

double boys_series_top(int m, double T) {
    // e^{-T} sum_k (2T)^k / ((2m+1)(2m+3)...(2m+2k+1)); all terms positive
    double term = 1.0 / (2 * m + 1);
    double sum = term;
    const int cap = std::max(kSeriesTerms, static_cast<int>(4.0 * T) + 50);
    for (int k = 0; k < cap; ++k) {
        term *= 2.0 * T / (2 * m + 2 * k + 3);
        sum += term;
        if (term < 1e-16 * sum) break;
    }
    return std::exp(-T) * sum;
}

double boys_asymptotic(int m, double T) {
    // (2m-1)!! / 2^{m+1} * sqrt(pi / T^{2m+1})
    double v = std::sqrt(std::numbers::pi / T) / 2.0;
    for (int k = 1; k <= m; ++k) v *= (2 * k - 1) / (2.0 * T);
    return v;
}

// Relative size of the term the asymptotic form drops, about e^{-T}/(2T).
bool asymptotic_is_accurate(int m, double T) {
    return std::exp(-T) / (2.0 * T) <= 1e-14 * boys_asymptotic(m, T);
}

}  // namespace

std::vector<double> boys_eval(int m_max, double T, BoysRegime regime) {
    if (!(T >= 0.0)) fail(ErrorCode::DomainError, "Boys argument T must be non-negative");
    if (m_max < 0 || m_max > 64) fail(ErrorCode::DomainError, "Boys order must lie in [0, 64]");
    std::vector<double> F(static_cast<std::size_t>(m_max) + 1);
    bool asym = regime == BoysRegime::Asymptotic;
    if (regime == BoysRegime::Auto) asym = T >= kBoysSeam && asymptotic_is_accurate(m_max, T);
    if (asym && T == 0.0) fail(ErrorCode::DomainError, "asymptotic Boys form needs T > 0");
    F.back() = asym ? boys_asymptotic(m_max, T) : boys_series_top(m_max, T);
    const double e = std::exp(-T);
    for (int m = m_max - 1; m >= 0; --m) {
        F[static_cast<std::size_t>(m)] = (2.0 * T * F[static_cast<std::size_t>(m) + 1] + e) / (2 * m + 1);
    }
    return F;
}

double clenshaw_sum(const std::vector<double>& c, double x) {
    if (c.empty()) return 0.0;
    double b1 = 0.0, b2 = 0.0;  // b_{k+1}, b_{k+2}
    for (std::size_t k = c.size() - 1; k >= 1; --k) {
        const double b = 2.0 * x * b1 - b2 + c[k];
        b2 = b1;
        b1 = b;
    }
    return c[0] / 2.0 + x * b1 - b2;
}

int miller_start_order(int n_max, double x) {
    return n_max + std::max(15, static_cast<int>(std::ceil(x)));
}

std::vector<double> miller_bessel_i(int n_max, double x) {
    if (!(x > 0.0)) fail(ErrorCode::DomainError, "Miller's algorithm needs x > 0");
    if (n_max < 0 || n_max > 40) fail(ErrorCode::DomainError, "Miller order must lie in [0, 40]");
    const int top = miller_start_order(n_max, x);
    std::vector<double> f(static_cast<std::size_t>(n_max) + 1, 0.0);
    double hi = 0.0, cur = 1.0;  // f_{k+1}, f_k
    for (int k = top; k >= 1; --k) {
        // i_{k-1} = i_{k+1} + (2k+1)/x i_k
        const double lo = hi + (2 * k + 1) / x * cur;
        hi = cur;
        cur = lo;
        if (k - 1 <= n_max) f[static_cast<std::size_t>(k) - 1] = cur;
        if (k <= n_max) f[static_cast<std::size_t>(k)] = hi;
        if (std::abs(cur) > 1e250) {
            hi *= 1e-250;
            cur *= 1e-250;
            for (double& v : f) v *= 1e-250;
        }
    }
    const double i0 = x < 1e-8 ? 1.0 : std::sinh(x) / x;
    const double scale = i0 / f[0];
    for (double& v : f) v *= scale;
    return f;
}

std::vector<double> upward_bessel_i(int n_max, double x) {
    if (!(x > 0.0)) fail(ErrorCode::DomainError, "upward Bessel recurrence needs x > 0");
    std::vector<double> f(static_cast<std::size_t>(std::max(n_max, 1)) + 1);
    f[0] = std::sinh(x) / x;
    f[1] = std::cosh(x) / x - std::sinh(x) / (x * x);
    for (int n = 2; n <= n_max; ++n) {
        const auto k = static_cast<std::size_t>(n);
        f[k] = f[k - 2] - (2 * n - 1) / x * f[k - 1];
    }
    f.resize(static_cast<std::size_t>(n_max) + 1);
    return f;
}

RysCoeffs rys_coeffs(const std::vector<double>& F) {
    if (F.size() < 3) fail(ErrorCode::DimensionMismatch, "rys_coeffs needs at least three F values");
    RysCoeffs r;
    for (std::size_t k = 0; k + 2 < F.size(); ++k) {
        if (F[k] == 0.0) fail(ErrorCode::DivisionByZero, "F[" + std::to_string(k) + "] is zero");
        r.alpha.push_back(F[k + 1] / F[k]);
        r.beta.push_back((F[k] * F[k + 2] - F[k + 1] * F[k + 1]) / (F[k] * F[k]));
    }
    return r;
}

TridiagSym jacobi_matrix(const CoeffFn& A, const CoeffFn& B, const CoeffFn& C, int size) {
    if (size < 1) fail(ErrorCode::DimensionMismatch, "Jacobi matrix size must be positive");
    TridiagSym m;
    std::vector<double> a(static_cast<std::size_t>(size) + 2);
    for (int n = 1; n <= size + 1; ++n) {
        a[static_cast<std::size_t>(n)] = A(n);
        if (a[static_cast<std::size_t>(n)] == 0.0) fail(ErrorCode::DivisionByZero, "A(" + std::to_string(n) + ") is zero");
    }
    for (int n = 1; n <= size; ++n) m.diag.push_back(-B(n) / a[static_cast<std::size_t>(n)]);
    for (int n = 1; n < size; ++n) {
        const double q = C(n + 1) / (a[static_cast<std::size_t>(n)] * a[static_cast<std::size_t>(n) + 1]);
        if (q < 0.0) {
            fail(ErrorCode::NegativeUnderRoot,
                 "C(" + std::to_string(n + 1) + ") / (A(n) A(n+1)) is negative; coefficients are not orthogonal");
        }
        m.offdiag.push_back(std::sqrt(q));
    }
    return m;
}

Eigen tridiag_eigen(const TridiagSym& m) {
    const std::size_t n = m.size();
    if (n == 0) fail(ErrorCode::DimensionMismatch, "empty tridiagonal matrix");
    if (m.offdiag.size() + 1 != n) fail(ErrorCode::DimensionMismatch, "off-diagonal length must be size - 1");
    std::vector<double> d = m.diag;
    std::vector<double> e(n, 0.0);
    std::copy(m.offdiag.begin(), m.offdiag.end(), e.begin());
    std::vector<double> z(n, 0.0);  // first row of the accumulated rotations
    z[0] = 1.0;
    int iterations = 0;
    const int cap = 30 * static_cast<int>(n);

    for (std::size_t l = 0; l < n; ++l) {
        while (true) {
            std::size_t mm = l;
            for (; mm + 1 < n; ++mm) {
                const double dd = std::abs(d[mm]) + std::abs(d[mm + 1]);
                if (std::abs(e[mm]) <= std::numeric_limits<double>::epsilon() * dd) break;
            }
            if (mm == l) break;
            if (++iterations > cap) fail(ErrorCode::NoConvergence, "QL iteration did not converge");
            double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            double r = std::hypot(g, 1.0);
            g = d[mm] - d[l] + e[l] / (g + std::copysign(r, g));
            double s = 1.0, c = 1.0, p = 0.0;
            bool deflated = false;
            for (std::size_t i = mm; i-- > l;) {
                double f = s * e[i];
                const double b = c * e[i];
                r = std::hypot(f, g);
                e[i + 1] = r;
                if (r == 0.0) {
                    d[i + 1] -= p;
                    e[mm] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            if (deflated) continue;
            d[l] -= p;
            e[l] = g;
            e[mm] = 0.0;
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
    Eigen out;
    for (std::size_t k : order) {
        out.values.push_back(d[k]);
        out.first_components.push_back(z[k]);
    }
    return out;
}

QuadRule golub_welsch(const TridiagSym& m, double mu0) {
    if (!(mu0 > 0.0)) fail(ErrorCode::DomainError, "mu0 must be positive");
    const Eigen eig = tridiag_eigen(m);
    QuadRule q;
    q.mu0 = mu0;
    q.nodes = eig.values;
    for (double v : eig.first_components) q.weights.push_back(mu0 * v * v);
    return q;
}

QuadRule gauss_legendre(int n) {
    const TridiagSym m = jacobi_matrix([](int k) { return (2.0 * k - 1.0) / k; }, [](int) { return 0.0; },
                                       [](int k) { return (k - 1.0) / k; }, n);
    return golub_welsch(m, 2.0);
}

std::string to_csv(const QuadRule& rule) {
    std::string out;
    char buf[64];
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", rule.nodes[k], rule.weights[k]);
        out += buf;
    }
    return out;
}

}  // namespace recursum::quad
