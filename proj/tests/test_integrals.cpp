#include "recursum/error.hpp"
#include "recursum/integrals.hpp"
#include "recursum/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace recursum;
using namespace recursum::integrals;

namespace {

SymMatrix identity(std::size_t n) {
    SymMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

// Closed-form (ss|ss) for unit-normalization primitives.
double ssss(const Shell& a, const Shell& b, const Shell& c, const Shell& d) {
    const auto P = gaussian_product(a.center, a.exponent, b.center, b.exponent);
    const auto Q = gaussian_product(c.center, c.exponent, d.center, d.exponent);
    double r2 = 0.0;
    for (int k = 0; k < 3; ++k) r2 += (P.P[k] - Q.P[k]) * (P.P[k] - Q.P[k]);
    const double alpha = P.p * Q.p / (P.p + Q.p);
    const double pref = 2.0 * std::pow(std::numbers::pi, 2.5) / (P.p * Q.p * std::sqrt(P.p + Q.p));
    return pref * P.Kab * Q.Kab * quad::boys_eval(0, alpha * r2)[0];
}

}  // namespace

TEST_CASE("gaussian_product examples") {
    const auto g = gaussian_product({0, 0, 0}, 1.0, {0, 0, 3}, 2.0);
    CHECK(g.p == 3.0);
    CHECK(g.P[2] == doctest::Approx(2.0));
    CHECK(g.Kab == doctest::Approx(std::exp(-6.0)));
    const auto same = gaussian_product({1, 2, 3}, 0.7, {1, 2, 3}, 1.3);
    CHECK(same.Kab == 1.0);
    CHECK(same.P[1] == doctest::Approx(2.0));
    const auto mid = gaussian_product({0, 0, 0}, 1.5, {2, 4, 6}, 1.5);
    CHECK(mid.P[0] == doctest::Approx(1.0));
    CHECK(mid.P[2] == doctest::Approx(3.0));
}

TEST_CASE("single s shell: J11 = K11 = pi^2.5 / 4") {
    ToySystem sys{{Shell{{0, 0, 0}, 0, 1.0}}};
    const SymMatrix D = identity(1);
    const double expect = std::pow(std::numbers::pi, 2.5) / 4.0;
    const SymMatrix J = build_J(sys, D);
    const SymMatrix K = build_K(sys, D);
    CHECK(J(0, 0) == doctest::Approx(expect).epsilon(1e-13));
    CHECK(K(0, 0) == doctest::Approx(J(0, 0)).epsilon(1e-14));
    const auto [nj, nk] = naive_JK(sys, D);
    CHECK(nj(0, 0) == doctest::Approx(expect).epsilon(1e-13));
    CHECK(nk(0, 0) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("s-only ERIs match the closed form") {
    ToySystem sys{{Shell{{0, 0, 0}, 0, 0.8}, Shell{{0.3, -0.5, 1.1}, 0, 1.4}, Shell{{1.5, 0.2, 0.0}, 0, 0.5}}};
    for (std::size_t a = 0; a < 3; ++a) {
        for (std::size_t b = 0; b < 3; ++b) {
            for (std::size_t c = 0; c < 3; ++c) {
                for (std::size_t d = 0; d < 3; ++d) {
                    const double ref = ssss(sys.shells[a], sys.shells[b], sys.shells[c], sys.shells[d]);
                    CHECK(naive_eri(sys, a, b, c, d) == doctest::Approx(ref).epsilon(1e-13));
                }
            }
        }
    }
}

TEST_CASE("p-function ERIs match derivatives of the s closed form") {
    // x_A e^{-a r_A^2} = (1/2a) d/dA_x e^{-a r_A^2}
    const Shell s1{{0.1, -0.2, 0.3}, 0, 0.9};
    const Shell s2{{0.8, 0.4, -0.6}, 0, 1.3};
    const Shell s3{{-0.5, 0.9, 0.2}, 0, 0.6};
    const double h = 1e-4;
    for (int pos = 0; pos < 4; ++pos) {
        for (int d = 0; d < 3; ++d) {
            std::array<Shell, 4> q{s1, s2, s3, s1};
            Shell p = q[static_cast<std::size_t>(pos)];
            p.l = 1;
            ToySystem sys;
            std::size_t fn[4];
            std::size_t next = 0;
            for (int k = 0; k < 4; ++k) {
                sys.shells.push_back(k == pos ? p : q[static_cast<std::size_t>(k)]);
                fn[k] = k == pos ? next + static_cast<std::size_t>(d) : next;
                next += k == pos ? 3 : 1;
            }
            auto shifted = [&](double delta) {
                std::array<Shell, 4> w = q;
                w[static_cast<std::size_t>(pos)].center[static_cast<std::size_t>(d)] += delta;
                return ssss(w[0], w[1], w[2], w[3]);
            };
            const double deriv = (shifted(h) - shifted(-h)) / (2.0 * h);
            const double ref = deriv / (2.0 * q[static_cast<std::size_t>(pos)].exponent);
            CAPTURE(pos);
            CAPTURE(d);
            CHECK(naive_eri(sys, fn[0], fn[1], fn[2], fn[3]) == doctest::Approx(ref).epsilon(1e-6).scale(1e-8));
        }
    }
}

TEST_CASE("ERI 8-fold symmetry on a 2-shell system") {
    ToySystem sys{{Shell{{0, 0, 0}, 1, 0.9}, Shell{{0.4, 0.7, -0.3}, 1, 1.6}}};
    const std::size_t n = sys.n_basis();
    double worst = 0.0;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            for (std::size_t c = 0; c < n; ++c)
                for (std::size_t d = 0; d < n; ++d) {
                    const double v = naive_eri(sys, a, b, c, d);
                    worst = std::max({worst, std::abs(v - naive_eri(sys, b, a, c, d)),
                                      std::abs(v - naive_eri(sys, a, b, d, c)), std::abs(v - naive_eri(sys, c, d, a, b))});
                }
    CHECK(worst <= 1e-12);
}

TEST_CASE("phased J/K equal the naive oracle on random systems") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        CAPTURE(seed);
        const ToySystem sys = random_system(seed, 1 + seed % 4);
        const SymMatrix D = random_density(seed + 100, sys.n_basis());
        const SymMatrix J = build_J(sys, D);
        const SymMatrix K = build_K(sys, D);
        const auto [nj, nk] = naive_JK(sys, D);
        CHECK(rel_frobenius(J, nj) <= 1e-10);
        CHECK(rel_frobenius(K, nk) <= 1e-10);
        CHECK(J.max_asymmetry() <= 1e-12);
        CHECK(K.max_asymmetry() <= 1e-12);
    }
}

TEST_CASE("runtime R kernels give the same J/K") {
    const ToySystem sys = random_system(3, 4);
    const SymMatrix D = random_density(9, sys.n_basis());
    BuildOptions rt;
    rt.r_source = RSource::Runtime;
    CHECK(rel_frobenius(build_J(sys, D, rt), build_J(sys, D)) <= 1e-13);
    CHECK(rel_frobenius(build_K(sys, D, rt), build_K(sys, D)) <= 1e-13);
}

TEST_CASE("dropping the phase factor breaks equivalence") {
    ToySystem sys = random_system(5, 3);
    sys.shells[0].l = 1;
    const SymMatrix D = random_density(6, sys.n_basis());
    BuildOptions mut;
    mut.flip_phase = true;
    const auto [nj, nk] = naive_JK(sys, D);
    CHECK(rel_frobenius(build_J(sys, D, mut), nj) > 1e-6);
    CHECK(rel_frobenius(build_K(sys, D, mut), nk) > 1e-6);
}

TEST_CASE("linearity and zero density") {
    const ToySystem sys = random_system(8, 3);
    const std::size_t n = sys.n_basis();
    const SymMatrix zero(n);
    CHECK(build_J(sys, zero).frobenius() == 0.0);
    CHECK(build_K(sys, zero).frobenius() == 0.0);
    const auto [zj, zk] = naive_JK(sys, zero);
    CHECK(zj.frobenius() == 0.0);
    CHECK(zk.frobenius() == 0.0);

    const SymMatrix D = random_density(2, n);
    SymMatrix D2 = D;
    for (double& v : D2.a) v *= 2.0;
    const SymMatrix J = build_J(sys, D), J2 = build_J(sys, D2);
    SymMatrix twice = J;
    for (double& v : twice.a) v *= 2.0;
    CHECK(rel_frobenius(J2, twice) <= 1e-14);
}

TEST_CASE("two identical s shells with identity density") {
    ToySystem sys{{Shell{{0, 0, 0}, 0, 1.2}, Shell{{0, 0, 0}, 0, 1.2}}};
    const SymMatrix D = identity(2);
    const SymMatrix J = build_J(sys, D);
    const auto [nj, nk] = naive_JK(sys, D);
    CHECK(rel_frobenius(J, nj) <= 1e-10);
    CHECK(rel_frobenius(build_K(sys, D), nk) <= 1e-10);
    CHECK(J.max_asymmetry() <= 1e-12);
}

TEST_CASE("errors") {
    ToySystem sys{{Shell{{0, 0, 0}, 0, 1.0}}};
    CHECK_THROWS_AS(build_J(sys, SymMatrix(2)), Error);
    try {
        naive_JK(sys, SymMatrix(3));
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DimensionMismatch);
    }
    sys.shells[0].l = 2;
    CHECK_THROWS_AS(build_K(sys, SymMatrix(1)), Error);
    CHECK_THROWS_AS(random_system(1, 5), Error);
}

TEST_CASE("shell file parsing") {
    const ToySystem sys = parse_shells("# geometry\n0 0 0 0 1.0\n\n1.5 0 0 1 0.8  # p shell\n");
    REQUIRE(sys.shells.size() == 2);
    CHECK(sys.shells[1].l == 1);
    CHECK(sys.shells[1].center[0] == 1.5);
    CHECK(sys.n_basis() == 4);
    CHECK_THROWS_AS(parse_shells("0 0 0 1\n"), ParseError);
    CHECK_THROWS_AS(parse_shells("a b c\n"), ParseError);
    CHECK_THROWS_AS(parse_shells("0 0 0 0 1 9\n"), ParseError);
    CHECK_THROWS_AS(parse_shells("0 0 0 2 1\n"), Error);
}
