#include "doctest.h"

#include "oracles.hpp"

#include "recursum/error.hpp"
#include "recursum/interp.hpp"
#include "recursum/library.hpp"
#include "recursum/quadrature.hpp"

#include <cmath>
#include <random>

using namespace recursum;
using namespace recursum::quad;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("boys_eval examples") {
    CHECK(boys_eval(0, 0.0) == std::vector<double>{1.0});
    CHECK(boys_eval(0, 1.0)[0] == doctest::Approx(0.7468241328).epsilon(1e-10));
    const auto f = boys_eval(2, 0.0);
    CHECK(f[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(f[2] == doctest::Approx(1.0 / 5.0).epsilon(1e-15));
    CHECK_THROWS_AS(boys_eval(2, -1.0), Error);
}

TEST_CASE("boys_eval vs quadrature") {
    for (double T : {0.1, 1.0, 5.0, 20.0, 40.0}) {
        const auto f = boys_eval(8, T);
        for (int m = 0; m <= 8; ++m) {
            INFO("m=" << m << " T=" << T);
            CHECK(rel(f[static_cast<std::size_t>(m)], testing::boys_quadrature(m, T)) <= 1e-9);
            CHECK(f[static_cast<std::size_t>(m)] > 0.0);
        }
    }
    // high orders stay finite and positive in both regimes
    for (double T : {0.0, 0.5, 29.0, 31.0, 60.0, 200.0}) {
        const auto f = boys_eval(64, T);
        for (double v : f) CHECK((std::isfinite(v) && v > 0.0));
        CHECK(rel(f[64], library::boys_series(64, T)) <= 1e-12);
    }
}

TEST_CASE("boys seam") {
    for (int m = 0; m <= 8; ++m) {
        const double s = boys_eval(m, kBoysSeam, BoysRegime::Series)[static_cast<std::size_t>(m)];
        const double a = boys_eval(m, kBoysSeam, BoysRegime::Asymptotic)[static_cast<std::size_t>(m)];
        CHECK(std::abs(s - a) <= 1e-9);
        // dF_m/dT = -F_{m+1}; what remains across the seam is the jump
        const double lo = boys_eval(m, 29.999)[static_cast<std::size_t>(m)];
        const double hi = boys_eval(m, 30.001)[static_cast<std::size_t>(m)];
        const double slope = boys_eval(m + 1, 30.0)[static_cast<std::size_t>(m) + 1];
        CHECK(std::abs(hi - lo + 0.002 * slope) <= 1e-9);
    }
}

TEST_CASE("clenshaw_sum") {
    CHECK(clenshaw_sum({2.0}, 0.3) == 1.0);
    CHECK(clenshaw_sum({0.0, 1.0}, 0.7) == doctest::Approx(0.7));
    CHECK(clenshaw_sum({0.0, 0.0, 1.0}, 0.5) == doctest::Approx(-0.5));

    const RecurrenceSpec& cheb = library::builtin("chebyshev_T").spec;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> len(1, 16);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> c(static_cast<std::size_t>(len(rng)));
        for (double& v : c) v = u(rng);
        const double x = u(rng);
        EvalEnv env;
        env.scalars["x"] = x;
        Evaluator ev(cheb, env);
        double direct = c[0] / 2;
        for (std::size_t k = 1; k < c.size(); ++k) direct += c[k] * ev.eval({static_cast<std::int64_t>(k)});
        CHECK(std::abs(clenshaw_sum(c, x) - direct) <= 1e-12);
    }
}

TEST_CASE("clenshaw_sum agrees with the clenshaw spec") {
    const library::BuiltinEntry& e = library::builtin("clenshaw");
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        const EvalEnv env = e.sample_env(rng);
        Evaluator ev(e.spec, env);
        const double x = env.scalars.at("x");
        const double via_spec = env.sequences.at("c")[0] / 2 + x * ev.eval({1}) - ev.eval({2});
        CHECK(clenshaw_sum(env.sequences.at("c"), x) == doctest::Approx(via_spec).epsilon(1e-13));
    }
}

TEST_CASE("Miller backward recurrence") {
    const auto one = miller_bessel_i(0, 1.0);
    CHECK(one.size() == 1);
    CHECK(one[0] == doctest::Approx(1.1752012).epsilon(1e-7));
    CHECK(rel(miller_bessel_i(2, 1.0)[2], library::bessel_i_series(2, 1.0)) <= 1e-10);
    for (double x : {0.5, 1.0, 2.5, 5.0, 7.5, 10.0}) {
        const auto f = miller_bessel_i(20, x);
        for (int n = 0; n <= 20; ++n) {
            INFO("n=" << n << " x=" << x);
            CHECK(rel(f[static_cast<std::size_t>(n)], library::bessel_i_series(n, x)) <= 1e-10);
        }
    }
    const auto up = upward_bessel_i(12, 0.5);
    const auto mil = miller_bessel_i(12, 0.5);
    const double ref = library::bessel_i_series(12, 0.5);
    CHECK(rel(up[12], ref) > 1e-3);
    CHECK(rel(mil[12], ref) <= 1e-10);
    CHECK(miller_start_order(5, 30.2) == 36);
    CHECK_THROWS_AS(miller_bessel_i(3, 0.0), Error);
}

TEST_CASE("rys_coeffs") {
    std::vector<double> F0;
    for (int m = 0; m < 6; ++m) F0.push_back(1.0 / (2 * m + 1));
    const RysCoeffs r = rys_coeffs(F0);
    CHECK(r.alpha.size() == 4);
    CHECK(r.alpha[0] == doctest::Approx(1.0 / 3.0));
    CHECK(r.beta[0] == doctest::Approx(4.0 / 45.0));
    const RysCoeffs ones = rys_coeffs(std::vector<double>(5, 1.0));
    for (double a : ones.alpha) CHECK(a == 1.0);
    for (double b : ones.beta) CHECK(b == 0.0);
    for (double T : {0.1, 1.0, 5.0}) {
        for (double b : rys_coeffs(boys_eval(10, T)).beta) CHECK(b > 0.0);
    }
    CHECK_THROWS_AS(rys_coeffs({0.0, 1.0, 2.0}), Error);

    // alpha matches the rys_alpha spec
    EvalEnv env;
    env.sequences["F"] = boys_eval(10, 1.0);
    const RysCoeffs rb = rys_coeffs(env.sequences["F"]);
    for (std::int64_t k = 0; k < 9; ++k) {
        CHECK(eval(library::builtin("rys_alpha").spec, {k}, env) == rb.alpha[static_cast<std::size_t>(k)]);
    }
}

TEST_CASE("jacobi_matrix") {
    const TridiagSym leg = jacobi_matrix([](int n) { return (2.0 * n - 1) / n; }, [](int) { return 0.0; },
                                         [](int n) { return (n - 1.0) / n; }, 2);
    CHECK(leg.diag == std::vector<double>{0.0, 0.0});
    REQUIRE(leg.offdiag.size() == 1);
    CHECK(leg.offdiag[0] == doctest::Approx(1.0 / std::sqrt(3.0)));
    const TridiagSym ch = jacobi_matrix([](int n) { return n == 1 ? 1.0 : 2.0; }, [](int) { return 0.0; },
                                        [](int) { return 1.0; }, 2);
    CHECK(ch.offdiag[0] == doctest::Approx(1.0 / std::sqrt(2.0)));
    try {
        jacobi_matrix([](int) { return 1.0; }, [](int) { return 0.0; }, [](int) { return -1.0; }, 3);
        FAIL("expected NegativeUnderRoot");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NegativeUnderRoot);
    }
    CHECK_THROWS_AS(jacobi_matrix([](int) { return 0.0; }, [](int) { return 0.0; }, [](int) { return 1.0; }, 2),
                    Error);
}

TEST_CASE("tridiag_eigen") {
    const Eigen one = tridiag_eigen({{3.5}, {}});
    CHECK(one.values == std::vector<double>{3.5});
    CHECK(std::abs(one.first_components[0]) == 1.0);

    const Eigen two = tridiag_eigen({{0.0, 0.0}, {0.8}});
    CHECK(two.values[0] == doctest::Approx(-0.8));
    CHECK(two.values[1] == doctest::Approx(0.8));
    for (double v : two.first_components) CHECK(v * v == doctest::Approx(0.5));

    const Eigen three = tridiag_eigen(jacobi_matrix([](int n) { return (2.0 * n - 1) / n; }, [](int) { return 0.0; },
                                                    [](int n) { return (n - 1.0) / n; }, 3));
    CHECK(three.values[0] == doctest::Approx(-0.7745966692).epsilon(1e-10));
    CHECK(std::abs(three.values[1]) <= 1e-14);
    CHECK(three.values[2] == doctest::Approx(0.7745966692).epsilon(1e-10));
}

TEST_CASE("tridiag_eigen residuals by inverse iteration") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (std::size_t n = 1; n <= 8; ++n) {
        TridiagSym m;
        for (std::size_t k = 0; k < n; ++k) m.diag.push_back(u(rng));
        for (std::size_t k = 0; k + 1 < n; ++k) m.offdiag.push_back(std::abs(u(rng)) + 0.05);
        double norm = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            double row = std::abs(m.diag[k]);
            if (k > 0) row += m.offdiag[k - 1];
            if (k + 1 < n) row += m.offdiag[k];
            norm = std::max(norm, row);
        }
        const Eigen eig = tridiag_eigen(m);
        for (std::size_t j = 1; j < n; ++j) CHECK(eig.values[j - 1] < eig.values[j]);
        double sq = 0.0;
        for (double v : eig.first_components) sq += v * v;
        CHECK(sq == doctest::Approx(1.0).epsilon(1e-12));
        for (std::size_t j = 0; j < n; ++j) {
            // eigenvector from the three-term recurrence of (M - lambda) v = 0, v_0 = 1
            const double lam = eig.values[j];
            std::vector<double> v(n);
            v[0] = 1.0;
            if (n > 1) v[1] = (lam - m.diag[0]) / m.offdiag[0];
            for (std::size_t k = 2; k < n; ++k) {
                v[k] = ((lam - m.diag[k - 1]) * v[k - 1] - m.offdiag[k - 2] * v[k - 2]) / m.offdiag[k - 1];
            }
            // refine with two steps of inverse iteration (Thomas algorithm)
            for (int step = 0; step < 2; ++step) {
                const double shift = lam + 1e-10 * std::max(1.0, norm);
                std::vector<double> a(n), b(n), c(n), r = v;
                for (std::size_t k = 0; k < n; ++k) {
                    b[k] = m.diag[k] - shift;
                    if (k > 0) a[k] = m.offdiag[k - 1];
                    if (k + 1 < n) c[k] = m.offdiag[k];
                }
                for (std::size_t k = 1; k < n; ++k) {
                    const double w = a[k] / b[k - 1];
                    b[k] -= w * c[k - 1];
                    r[k] -= w * r[k - 1];
                }
                v[n - 1] = r[n - 1] / b[n - 1];
                for (std::size_t k = n - 1; k-- > 0;) v[k] = (r[k] - c[k] * v[k + 1]) / b[k];
                double len = 0.0;
                for (double x : v) len += x * x;
                for (double& x : v) x /= std::sqrt(len);
            }
            double res = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                double mv = m.diag[k] * v[k];
                if (k > 0) mv += m.offdiag[k - 1] * v[k - 1];
                if (k + 1 < n) mv += m.offdiag[k] * v[k + 1];
                res += (mv - lam * v[k]) * (mv - lam * v[k]);
            }
            CHECK(std::sqrt(res) <= 1e-12 * norm);
            CHECK(std::abs(v[0]) == doctest::Approx(std::abs(eig.first_components[j])).epsilon(1e-8));
        }
    }
}

TEST_CASE("golub_welsch") {
    const QuadRule one = gauss_legendre(1);
    CHECK(std::abs(one.nodes[0]) <= 1e-15);
    CHECK(one.weights[0] == doctest::Approx(2.0));
    const QuadRule two = gauss_legendre(2);
    CHECK(std::abs(two.nodes[0] + 1.0 / std::sqrt(3.0)) <= 1e-10);
    CHECK(std::abs(two.nodes[1] - 1.0 / std::sqrt(3.0)) <= 1e-10);
    CHECK(std::abs(two.weights[0] - 1.0) <= 1e-10);
    const QuadRule three = gauss_legendre(3);
    CHECK(std::abs(three.weights[0] - 5.0 / 9) <= 1e-10);
    CHECK(std::abs(three.weights[1] - 8.0 / 9) <= 1e-10);
    CHECK(std::abs(three.weights[2] - 5.0 / 9) <= 1e-10);
    for (int n = 1; n <= 6; ++n) {
        const QuadRule q = gauss_legendre(n);
        double wsum = 0.0;
        for (double w : q.weights) {
            CHECK(w > 0.0);
            wsum += w;
        }
        CHECK(std::abs(wsum - q.mu0) <= 1e-10);
        for (int k = 0; k <= 2 * n - 1; ++k) {
            double s = 0.0;
            for (std::size_t i = 0; i < q.nodes.size(); ++i) s += q.weights[i] * std::pow(q.nodes[i], k);
            const double exact = k % 2 == 1 ? 0.0 : 2.0 / (k + 1);
            CHECK(std::abs(s - exact) <= 1e-10);
        }
    }
    for (int n = 1; n <= 5; ++n) {
        const QuadRule a = gauss_legendre(n), b = gauss_legendre(n + 1);
        for (std::size_t i = 0; i < a.nodes.size(); ++i) {
            CHECK(b.nodes[i] < a.nodes[i]);
            CHECK(a.nodes[i] < b.nodes[i + 1]);
        }
    }
    CHECK_THROWS_AS(golub_welsch({{0.0}, {}}, 0.0), Error);
}
