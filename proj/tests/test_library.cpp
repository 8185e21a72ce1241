#include "doctest.h"

#include "recursum/codegen/ir.hpp"
#include "recursum/error.hpp"
#include "recursum/interp.hpp"
#include "recursum/library.hpp"
#include "recursum/parse.hpp"
#include "recursum/validate.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace recursum;
using namespace recursum::library;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

EvalEnv with_x(double x) {
    EvalEnv env;
    env.scalars["x"] = x;
    return env;
}

}  // namespace

TEST_CASE("builtin list") {
    const auto names = list_builtins();
    CHECK(names.size() == 15);
    CHECK(names.front() == "hermite_e");
    for (const std::string& n : names) {
        const BuiltinEntry& e = builtin(n);
        CHECK(e.name == n);
        CHECK(validate_spec(e.spec).empty());
        for (const IndexPoint& p : codegen::enumerate_instances(e.spec, e.default_bounds)) {
            CHECK(e.kernel_bounds.contains(p));
        }
    }
    CHECK_THROWS_AS(builtin("gegenbauer"), Error);
    try {
        oracle_value("coulomb_R", {0, 0, 0, 0}, {});
        FAIL("expected NoOracle");
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::NoOracle);
    }
}

TEST_CASE("spec files match the builtins") {
    for (const std::string& n : list_builtins()) {
        const std::string text = read_file(std::string(RECURSUM_SOURCE_DIR) + "/specs/" + n + ".spec");
        CHECK(text == builtin(n).source);
        CHECK(load_spec_file(text) == builtin(n).spec);
    }
}

TEST_CASE("builtin shapes") {
    const RecurrenceSpec& cheb = builtin("chebyshev_T").spec;
    CHECK(render_sum(cheb.rules[0].body.branches[0], cheb) ==
          render_sum(parse_expression("2*x * E[n-1] - E[n-2]", cheb), cheb));
    const RecurrenceSpec& boys = builtin("boys").spec;
    CHECK(boys.bases[0].value.kind == CoeffExpr::Kind::Mul);
    CHECK(boys.rules[0].body.branches[0] == parse_expression("((2*m - 1) * E[m-1] - exp_T) * inv_2T", boys));
    const RecurrenceSpec& lag = builtin("laguerre_L").spec;
    CHECK(lag.rules[0].body.branches[0] ==
          parse_expression("((2*n + alpha - 1 - x) * E[n-1] - (n + alpha - 1) * E[n-2]) / n", lag));
    CHECK(builtin("clenshaw").spec.direction == Direction::Downward);
}

TEST_CASE("oracle examples") {
    CHECK(oracle_value("chebyshev_T", {3}, with_x(0.5)) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(oracle_value("legendre_P", {2}, with_x(0.5)) == doctest::Approx(-0.125).epsilon(1e-14));
    CHECK(oracle_value("hermite_H", {3}, with_x(1.0)) == doctest::Approx(-4.0).epsilon(1e-14));
    EvalEnv boys;
    boys.scalars = {{"T", 0.0}};
    CHECK(oracle_value("boys", {1}, boys) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    EvalEnv k;
    k.scalars = {{"inv_x", 1.0}};
    const double k2 = oracle_value("bessel_k", {2}, k);
    CHECK(k2 == doctest::Approx(std::numbers::pi / 2 * std::exp(-1.0) * 7.0).epsilon(1e-14));
    CHECK(std::abs(k2 - 4.04505) < 1e-5);
    CHECK(binomial(5, 2) == 10.0);
    CHECK(fibonacci(10) == 55.0);
    CHECK(hermite_e_expansion(1, 1, 0, 0.25, 0.3, -0.2) == doctest::Approx(0.19).epsilon(1e-15));
    CHECK(hermite_e_expansion(1, 1, 2, 0.25, 0.3, -0.2) == doctest::Approx(0.0625).epsilon(1e-15));
    CHECK(laguerre_l(1, 0.5, 2.0) == doctest::Approx(-0.5));
    CHECK(chebyshev_u(2, 0.5) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("interpreter agrees with the oracles") {
    Rng rng(2024);
    for (const std::string& n : list_builtins()) {
        const BuiltinEntry& e = builtin(n);
        if (!e.has_oracle()) continue;
        const auto points = codegen::enumerate_instances(e.spec, e.oracle_bounds);
        std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
        double worst = 0.0;
        for (int s = 0; s < 200; ++s) {
            const IndexPoint& p = points[pick(rng)];
            const EvalEnv env = e.oracle_env(rng);
            const double ref = e.oracle(p, env);
            const double got = eval(e.spec, p, env);
            worst = std::max(worst, std::abs(got - ref) / std::max(1.0, std::abs(ref)));
        }
        INFO(n << " worst " << worst);
        CHECK(worst <= 1e-10);
    }
}

TEST_CASE("Boys monotonicity") {
    for (double T : {0.1, 1.0, 5.0, 20.0}) {
        for (int m = 0; m < 8; ++m) CHECK(boys_series(m + 1, T) < boys_series(m, T));
    }
    for (int m = 0; m <= 8; ++m) {
        CHECK(boys_series(m, 1.0) < boys_series(m, 0.1));
        CHECK(boys_series(m, 5.0) < boys_series(m, 1.0));
        CHECK(boys_series(m, 20.0) < boys_series(m, 5.0));
    }
}

TEST_CASE("scaled Bessel consistency") {
    Rng rng(9);
    const BuiltinEntry& bi = builtin("bessel_i");
    const BuiltinEntry& bb = builtin("bessel_b_scaled");
    const BuiltinEntry& bk = builtin("bessel_k");
    const BuiltinEntry& ba = builtin("bessel_a_scaled");
    for (int s = 0; s < 50; ++s) {
        const double x = std::uniform_real_distribution<double>(0.5, 10.0)(rng);
        auto env_for = [&](const std::string& prefix, double v0, double v1) {
            EvalEnv env;
            env.scalars = {{"inv_x", 1.0 / x}, {prefix + "0", v0}, {prefix + "1", v1}};
            return env;
        };
        const double i0 = std::sinh(x) / x, i1 = std::cosh(x) / x - std::sinh(x) / (x * x);
        const double k0 = std::numbers::pi / 2 * std::exp(-x) / x, k1 = k0 * (1 + 1 / x);
        Evaluator ei(bi.spec, env_for("i", i0, i1));
        Evaluator eb(bb.spec, env_for("b", std::exp(-x) * i0, std::exp(-x) * i1));
        Evaluator ek(bk.spec, env_for("k", k0, k1));
        Evaluator ea(ba.spec, env_for("a", std::exp(x) * k0, std::exp(x) * k1));
        for (std::int64_t n = 0; n <= 6; ++n) {
            const double b = eb.eval({n}), i = ei.eval({n});
            CHECK(std::abs(b - std::exp(-x) * i) <= 1e-10 * std::max(1.0, std::abs(b)));
            const double a = ea.eval({n}), k = ek.eval({n});
            CHECK(std::abs(a - std::exp(x) * k) <= 1e-10 * std::max(1.0, std::abs(a)));
        }
    }
}

TEST_CASE("Pascal identity") {
    const RecurrenceSpec& spec = builtin("binomial").spec;
    Evaluator ev(spec, {});
    CHECK(ev.eval({5, 2}) == 10.0);
    for (std::int64_t n = 1; n <= 12; ++n) {
        CHECK(ev.eval({n, 0}) == 1.0);
        CHECK(ev.eval({n, n}) == 1.0);
        for (std::int64_t k = 1; k < n; ++k) CHECK(ev.eval({n, k}) == ev.eval({n - 1, k - 1}) + ev.eval({n - 1, k}));
    }
}

TEST_CASE("coulomb_R origin") {
    const RecurrenceSpec& spec = builtin("coulomb_R").spec;
    EvalEnv env;
    env.scalars = {{"X", 0.3}, {"Y", -0.1}, {"Z", 0.7}};
    env.sequences["Fm"] = {0.9, -0.5, 0.4, -0.3, 0.2, -0.1, 0.05, -0.02, 0.01};
    CHECK(eval(spec, {0, 0, 0, 0}, env) == 0.9);
    CHECK(eval(spec, {0, 0, 0, 3}, env) == -0.3);
    CHECK(eval(spec, {1, 0, 0, 0}, env) == doctest::Approx(0.3 * -0.5));
    CHECK(eval(spec, {2, 0, 0, 0}, env) == doctest::Approx(-0.5 + 0.3 * 0.3 * 0.4));
}

TEST_CASE("clenshaw source") {
    const RecurrenceSpec spec = load_spec_file(clenshaw_source(3));
    EvalEnv env = with_x(0.4);
    env.sequences["c"] = {0.5, 0.25, -1.0, 2.0};
    const double b1 = eval(spec, {1}, env), b2 = eval(spec, {2}, env);
    double direct = 0.5 / 2;
    for (int k = 1; k <= 3; ++k) direct += env.sequences["c"][static_cast<std::size_t>(k)] * chebyshev_t(k, 0.4);
    CHECK(0.5 / 2 + 0.4 * b1 - b2 == doctest::Approx(direct).epsilon(1e-14));
}
