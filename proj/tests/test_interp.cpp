#include "doctest.h"

#include "recursum/error.hpp"
#include "recursum/interp.hpp"
#include "recursum/parse.hpp"

#include <cmath>
#include <random>

using namespace recursum;

namespace {

const char* kHermite = R"(recurrence HermiteCoeffX
namespace mcmd
indices i j t
scalars inv_2p PA_x PB_x
validity i >= 0 && j >= 0 && t >= 0 && i + j >= t
base i=0 j=0 t=0 : 1.0
rule "inc_i" when i > 0 : inv_2p * E[i-1,j,t-1] + PA_x * E[i-1,j,t] + (t+1) * E[i-1,j,t+1]
rule "inc_j" when j > 0 : inv_2p * E[i,j-1,t-1] + PB_x * E[i,j-1,t] + (t+1) * E[i,j-1,t+1]
layered axis t descend i j
)";

EvalEnv hermite_env(double inv_2p, double pa, double pb) {
    EvalEnv env;
    env.scalars = {{"inv_2p", inv_2p}, {"PA_x", pa}, {"PB_x", pb}};
    return env;
}

}  // namespace

TEST_CASE("select_rule") {
    const RecurrenceSpec spec = load_spec_file(kHermite);
    Evaluator ev(spec, hermite_env(0.25, 0.3, -0.2));
    CHECK(ev.select({0, 0, 0}).kind == Selection::Kind::Base);
    CHECK(ev.select({1, 0, -1}).kind == Selection::Kind::OutOfDomain);
    const Selection s = ev.select({2, 1, 0});
    REQUIRE(s.kind == Selection::Kind::Matched);
    CHECK(s.rule->name == "inc_i");
}

TEST_CASE("Hermite values") {
    const RecurrenceSpec spec = load_spec_file(kHermite);
    const EvalEnv env = hermite_env(0.25, 0.3, -0.2);
    CHECK(eval(spec, {0, 0, 0}, env) == 1.0);
    CHECK(eval(spec, {0, 0, 1}, env) == 0.0);
    CHECK(eval(spec, {1, 1, 0}, env) == doctest::Approx(0.19).epsilon(1e-15));
    CHECK(eval(spec, {1, 1, 1}, env) == doctest::Approx(0.025).epsilon(1e-15));
    CHECK(eval(spec, {1, 1, 2}, env) == doctest::Approx(0.0625).epsilon(1e-15));

    const auto l10 = eval_layer(spec, {1, 0}, env);
    REQUIRE(l10.size() == 2);
    CHECK(l10[0] == doctest::Approx(0.3));
    CHECK(l10[1] == doctest::Approx(0.25));
    CHECK(eval_layer(spec, {0, 0}, env) == std::vector<double>{1.0});
    const auto l11 = eval_layer(spec, {1, 1}, env);
    REQUIRE(l11.size() == 3);
    CHECK(l11[2] == doctest::Approx(0.0625));
}

TEST_CASE("Hermite properties") {
    const RecurrenceSpec spec = load_spec_file(kHermite);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double a = u(rng), b = u(rng), p = std::abs(u(rng)) + 0.1;
        Evaluator fwd(spec, hermite_env(p, a, b));
        Evaluator swp(spec, hermite_env(p, b, a));
        Evaluator plain(spec, hermite_env(p, a, b), false);
        for (int i = 0; i <= 6; ++i) {
            for (int j = 0; i + j <= 6; ++j) {
                const auto layer = fwd.eval_layer({i, j});
                for (int t = 0; t <= i + j; ++t) {
                    const double v = fwd.eval({i, j, t});
                    CHECK(layer[static_cast<std::size_t>(t)] == v);
                    CHECK(v == doctest::Approx(swp.eval({j, i, t})).epsilon(1e-12));
                    if (i + j <= 4) CHECK(plain.eval({i, j, t}) == v);
                }
            }
        }
    }
}

TEST_CASE("branch averaging agrees with both paths") {
    std::string text = kHermite;
    text += "average \"both\" when i > 0 && j > 0 : inv_2p * E[i-1,j,t-1] + PA_x * E[i-1,j,t] + (t+1) * E[i-1,j,t+1]"
            " | inv_2p * E[i,j-1,t-1] + PB_x * E[i,j-1,t] + (t+1) * E[i,j-1,t+1]\n";
    text.replace(text.find("layered"), std::string("layered axis t descend i j\n").size(), "");
    const RecurrenceSpec spec = load_spec_file(text);
    Evaluator ev(spec, hermite_env(0.3, 0.7, -1.1));
    const RecurrenceSpec plain_spec = load_spec_file(kHermite);
    Evaluator plain(plain_spec, hermite_env(0.3, 0.7, -1.1));
    for (int i = 1; i <= 4; ++i) {
        for (int j = 1; j <= 4; ++j) {
            for (int t = 0; t <= i + j; ++t) {
                const auto br = ev.branch_values({i, j, t});
                REQUIRE(br.size() == 2);
                CHECK(std::abs(br[0] - br[1]) <= 1e-12 * std::max(1.0, std::abs(br[0])));
                CHECK(ev.eval({i, j, t}) == doctest::Approx(plain.eval({i, j, t})).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("one-index recurrences") {
    const RecurrenceSpec fib = load_spec_file(
        "recurrence Fibonacci\nindices n\nvalidity n >= 0\nbase n=0 : 0.0\nbase n=1 : 1.0\n"
        "rule \"step\" when n > 1 : E[n-1] + E[n-2]\n");
    CHECK(eval(fib, {10}, {}) == 55.0);
    CHECK(eval(fib, {-3}, {}) == 0.0);

    const RecurrenceSpec lag = load_spec_file(
        "recurrence LaguerreL\nindices n\nscalars x alpha\nvalidity n >= 0\nbase n=0 : 1.0\nbase n=1 : 1 + alpha - x\n"
        "rule \"up\" when n > 1 : ((2*n + alpha - 1 - x) * E[n-1] - (n + alpha - 1) * E[n-2]) / n\n");
    EvalEnv env;
    env.scalars = {{"x", 1.0}, {"alpha", 0.0}};
    CHECK(eval(lag, {2}, env) == doctest::Approx(-0.5).epsilon(1e-15));

    const RecurrenceSpec leg = load_spec_file(
        "recurrence LegendreP\nindices n\nscalars x\nvalidity n >= 0\nbase n=0 : 1.0\nbase n=1 : x\n"
        "rule \"up\" when n > 1 : (2*n-1) * x * E[n-1] + (-(n-1)) * E[n-2] scale 1/n\n");
    EvalEnv xe;
    xe.scalars = {{"x", 0.5}};
    CHECK(eval(leg, {2}, xe) == doctest::Approx(-0.125).epsilon(1e-15));
}

TEST_CASE("evaluation errors") {
    const RecurrenceSpec gap = load_spec_file(
        "recurrence Gap\nindices n\nvalidity n >= 0\nbase n=0 : 1.0\nrule \"r\" when n > 5 : E[n-1]\n");
    CHECK_THROWS_AS(eval(gap, {3}, {}), Error);
    try {
        eval(gap, {7}, {});
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoApplicableRule);
    }

    const RecurrenceSpec cyc = parse_spec_file(
        "recurrence Cyc\nindices n\nvalidity n >= 0\nbase n=0 : 1.0\nrule \"r\" when n > 0 : E[n+1]\n");
    try {
        eval(cyc, {1}, {});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::CycleDetected);
    }
    const RecurrenceSpec loop = parse_spec_file(
        "recurrence Loop\nindices n\nvalidity n >= 0 && n <= 2\nbase n=0 : 1.0\n"
        "rule \"up\" when n == 1 : E[n+1]\nrule \"down\" when n == 2 : E[n-1]\n");
    try {
        eval(loop, {1}, {});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::CycleDetected);
    }

    const RecurrenceSpec seq = load_spec_file(
        "recurrence Seq\nindices k\nsequences F\nvalidity k >= 0\nrule \"r\" when k >= 0 : F[k+1] / F[k]\n");
    EvalEnv env;
    env.sequences["F"] = {1.0, 0.5, 0.25};
    CHECK(eval(seq, {1}, env) == 0.5);
    try {
        eval(seq, {2}, env);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SequenceOutOfRange);
    }
    env.sequences["F"] = {0.0, 1.0};
    try {
        eval(seq, {0}, env);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DivisionByZero);
    }
    try {
        eval(seq, {0}, EvalEnv{});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingBinding);
    }
}
