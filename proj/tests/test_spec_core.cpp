#include "doctest.h"

#include "recursum/error.hpp"
#include "recursum/parse.hpp"
#include "recursum/validate.hpp"

#include <algorithm>

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

const char* kChebyshev = R"(recurrence ChebyshevT
namespace orthopoly
indices n
scalars x
validity n >= 0
base n=0 : 1.0
base n=1 : x
rule "upward" when n > 1 : 2*x * E[n-1] - E[n-2]
)";

RecurrenceSpec one_index() {
    RecurrenceSpec s;
    s.name = "T";
    s.indices = {"n"};
    s.scalars = {"x"};
    s.sequences = {"c"};
    return s;
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("parse_expression splits terms and folds subtraction") {
    const RecurrenceSpec ctx = one_index();
    const Sum s = parse_expression("2*x * E[n-1] - E[n-2]", ctx);
    REQUIRE(s.terms.size() == 2);
    CHECK(s.terms[0].call->shifts == std::vector<int>{-1});
    CHECK(s.terms[1].call->shifts == std::vector<int>{-2});
    CHECK(s.terms[1].coefficient.is_literal(-1.0));
    const CoeffExpr& c0 = s.terms[0].coefficient;
    REQUIRE(c0.kind == CoeffExpr::Kind::Mul);
    CHECK(c0.args[0].is_literal(2.0));
    CHECK(c0.args[1].kind == CoeffExpr::Kind::Scalar);

    const Sum bare = parse_expression("E[n-2]", ctx);
    REQUIRE(bare.terms.size() == 1);
    CHECK(bare.terms[0].coefficient.is_literal(1.0));
}

TEST_CASE("coefficient classification on the Hermite rule") {
    const RecurrenceSpec spec = parse_spec_file(kHermite);
    const Sum s = parse_expression("inv_2p * E[i-1,j,t-1] + PA_x * E[i-1,j,t] + (t+1) * E[i-1,j,t+1]", spec);
    REQUIRE(s.terms.size() == 3);
    CHECK(s.terms[0].coefficient.kind == CoeffExpr::Kind::Scalar);
    CHECK(s.terms[0].coefficient.name == "inv_2p");
    CHECK(s.terms[1].coefficient.name == "PA_x");
    CHECK(s.terms[2].coefficient.kind == CoeffExpr::Kind::Index);
    CHECK(render_int(s.terms[2].coefficient.index) == "t + 1");
    CHECK(s.terms[0].call->shifts == std::vector<int>{-1, 0, -1});
    CHECK(s.terms[2].call->shifts == std::vector<int>{-1, 0, 1});
}

TEST_CASE("expression errors") {
    const RecurrenceSpec ctx = one_index();
    CHECK(code_of([&] { parse_expression("y * E[n-1]", ctx); }) == ErrorCode::UndeclaredSymbol);
    CHECK(code_of([&] { parse_expression("E[n*2]", ctx); }) == ErrorCode::MalformedShift);
    CHECK(code_of([&] { parse_expression("E[n-x]", ctx); }) == ErrorCode::MalformedShift);
    CHECK(code_of([&] { parse_expression("E[n, n]", ctx); }) == ErrorCode::MalformedShift);
    CHECK(code_of([&] { parse_expression("(x * E[n-1]", ctx); }) == ErrorCode::SyntaxError);
    CHECK(code_of([&] { parse_expression("x + ", ctx); }) == ErrorCode::SyntaxError);
    CHECK(code_of([&] { parse_expression("E[n-1] * E[n-2]", ctx); }) == ErrorCode::SyntaxError);
    CHECK(code_of([&] { parse_expression("sqrt(x) * E[n-1]", ctx); }) == ErrorCode::SyntaxError);
    CHECK(code_of([&] { parse_expression("x / E[n-1]", ctx); }) == ErrorCode::SyntaxError);
}

TEST_CASE("products and quotients distribute over call-bearing groups") {
    const RecurrenceSpec ctx = one_index();
    const Sum s = parse_expression("((2*n + 1 - x) * E[n-1] - (n - 1) * E[n-2]) / n", ctx);
    REQUIRE(s.terms.size() == 2);
    CHECK(s.terms[0].coefficient.kind == CoeffExpr::Kind::Div);
    CHECK(s.terms[1].coefficient.kind == CoeffExpr::Kind::Div);
    CHECK(s.terms[1].coefficient.args[0].kind == CoeffExpr::Kind::Mul);

    const Sum additive = parse_expression("2*x*E[n+1] - E[n+2] + c[n]", ctx);
    REQUIRE(additive.terms.size() == 3);
    CHECK_FALSE(additive.terms[2].call.has_value());
    CHECK(additive.terms[2].coefficient.kind == CoeffExpr::Kind::Seq);
}

TEST_CASE("linearity: A + B concatenates term lists") {
    const RecurrenceSpec ctx = one_index();
    const Sum a = parse_expression("2*x * E[n-1]", ctx);
    const Sum b = parse_expression("(n - 1) * E[n-2]", ctx);
    const Sum ab = parse_expression("2*x * E[n-1] + (n - 1) * E[n-2]", ctx);
    std::vector<Term> joined = a.terms;
    joined.insert(joined.end(), b.terms.begin(), b.terms.end());
    CHECK(ab.terms == joined);
}

TEST_CASE("parse_constraints") {
    const RecurrenceSpec spec = parse_spec_file(kHermite);
    CHECK(parse_constraints("i >= 0 and j >= 0 and i+j >= t", spec).size() == 3);
    const auto cs = parse_constraints("i > 0 && j == 0", spec);
    REQUIRE(cs.size() == 2);
    CHECK(cs[0].op == CompareOp::Gt);
    CHECK(cs[1].op == CompareOp::Eq);
    CHECK(parse_constraints("i >= 0; j >= 0", spec).size() == 2);
    CHECK(code_of([&] { parse_constraints("q > 0", spec); }) == ErrorCode::UndeclaredSymbol);
    CHECK(code_of([&] { parse_constraints("i > ", spec); }) == ErrorCode::SyntaxError);
    CHECK(code_of([&] { parse_constraints("i + 1", spec); }) == ErrorCode::SyntaxError);
}

TEST_CASE("constraint evaluation is total on [-10,10]^3") {
    const RecurrenceSpec spec = parse_spec_file(kHermite);
    std::size_t valid = 0;
    for (int i = -10; i <= 10; ++i)
        for (int j = -10; j <= 10; ++j)
            for (int t = -10; t <= 10; ++t) valid += in_domain(spec, {i, j, t}) ? 1 : 0;
    // sum over i,j in [0,10] of min(i+j,10)+1
    std::size_t expect = 0;
    for (int i = 0; i <= 10; ++i)
        for (int j = 0; j <= 10; ++j) expect += static_cast<std::size_t>(std::min(i + j, 10) + 1);
    CHECK(valid == expect);
}

TEST_CASE("load_spec_file on the Hermite example") {
    const RecurrenceSpec spec = load_spec_file(kHermite);
    CHECK(spec.name == "HermiteCoeffX");
    CHECK(spec.ns == "mcmd");
    CHECK(spec.indices.size() == 3);
    CHECK(spec.scalars.size() == 3);
    CHECK(spec.validity.size() == 4);
    CHECK(spec.bases.size() == 1);
    REQUIRE(spec.rules.size() == 2);
    CHECK(spec.rules[0].name == "inc_i");
    CHECK(spec.rules[1].name == "inc_j");
    REQUIRE(spec.layered.has_value());
    CHECK(spec.layered->output_axis == "t");
    CHECK(validate_spec(spec).empty());
}

TEST_CASE("spec-file errors carry line numbers") {
    try {
        parse_spec_file("recurrence A\nindices n\nvalidity n >= 0\nbase n=0 : 1.0\nrule \"r\" when n > 0 : q * E[n-1]\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 5);
    }
    CHECK(code_of([] { parse_spec_file("indices n\n"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { parse_spec_file("recurrence A\nrecurrence B\nindices n\n"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { parse_spec_file("recurrence A\nindices i j\nbase i=0 : 1.0\n"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { parse_spec_file("recurrence A\nindices n\nfrobnicate\n"); }) == ErrorCode::ParseError);
}

TEST_CASE("validation diagnostics") {
    CHECK(code_of([] {
              load_spec_file("recurrence A\nindices n\nvalidity n >= 0\nbase n=0 : 1.0\nbase n=0 : 2.0\n");
          }) == ErrorCode::ValidationError);

    RecurrenceSpec outside = parse_spec_file("recurrence A\nindices n\nvalidity n >= 0\nbase n=-1 : 1.0\n");
    auto d = validate_spec(outside);
    REQUIRE(d.size() == 1);
    CHECK(d[0].code == "base outside domain");

    RecurrenceSpec fib = parse_spec_file(
        "recurrence Fibonacci\nindices n t\nvalidity n >= 0 && t == 0\nbase n=0 t=0 : 0.0\nbase n=1 t=0 : 1.0\n"
        "rule \"f\" when n > 1 : E[n-1,t] + E[n-2,t]\nlayered axis t descend n\n");
    d = validate_spec(fib);
    REQUIRE_FALSE(d.empty());
    CHECK(d[0].code == "not layer-descent");

    RecurrenceSpec unsat = parse_spec_file("recurrence A\nindices n\nbase n=0 : 1.0\nrule \"r\" when n > 20 : E[n-1]\n");
    CHECK(validate_spec(unsat).at(0).code == "unsatisfiable guards");

    RecurrenceSpec dir = parse_spec_file(
        "recurrence A\nindices n\nvalidity n >= 0\nbase n=0 : 1.0\nrule \"r\" when n > 0 : E[n-1]\ndirection downward\n");
    CHECK(validate_spec(dir).at(0).code == "direction-inconsistent");

    RecurrenceSpec reserved = parse_spec_file("recurrence A\nindices n\nscalars pi\nbase n=0 : 1.0\n");
    CHECK(validate_spec(reserved).at(0).code == "reserved-name");
}

TEST_CASE("order_rules") {
    RecurrenceSpec spec = parse_spec_file(
        "recurrence A\nindices i j\nvalidity i >= 0 && j >= 0\nbase i=0 j=0 : 1.0\n"
        "rule \"both\" when i > 0 && j > 0 : E[i-1,j]\n"
        "rule \"edge\" when i == 0 && j > 0 : E[i,j-1]\n"
        "rule \"long\" when i > 0 && j >= 0 && i < 100 : E[i-1,j]\n"
        "rule \"tie\" when j > 0 && i > 0 : E[i,j-1]\n");
    const auto ordered = order_rules(spec);
    std::vector<std::string> names;
    for (const Rule& r : ordered) names.push_back(r.name);
    CHECK(names == std::vector<std::string>{"edge", "long", "both", "tie"});
    CHECK(order_rules(RecurrenceSpec{spec.name, spec.ns, spec.indices, {}, {}, {}, {}, ordered, {}, {}}).size() == 4);
    RecurrenceSpec again = spec;
    again.rules = ordered;
    CHECK(order_rules(again) == ordered);
}

TEST_CASE("rendering round-trips") {
    const RecurrenceSpec cheb = load_spec_file(kChebyshev);
    CHECK(load_spec_file(render_spec(cheb)) == cheb);
    const RecurrenceSpec herm = load_spec_file(kHermite);
    CHECK(load_spec_file(render_spec(herm)) == herm);

    const char* tricky = R"(recurrence Tricky
indices n
scalars x alpha
sequences c
validity n >= 0 && 2 * (n - 1) <= 40 - n
base n=0 : erf(sqrt(x)) * sqrt(pi / (4*x))
base n=1 : -2.5e-3
rule "r" when n > 1 : ((2*n + alpha - 1 - x) * E[n-1] - (n + alpha - 1) * E[n-2]) / n + -(n-1) * c[n-1] scale 1/n
average "a" when n == 1 && n > -3 : E[n-1] | -x * E[n-1] - 3
direction upward
)";
    const RecurrenceSpec t = parse_spec_file(tricky);
    const RecurrenceSpec back = parse_spec_file(render_spec(t));
    CHECK(back == t);
    CHECK(render_spec(back) == render_spec(t));
}

TEST_CASE("format_real keeps a decimal marker") {
    CHECK(format_real(2.0) == "2.0");
    CHECK(format_real(-1.0) == "-1.0");
    CHECK(format_real(0.1) == "0.1");
    CHECK(format_real(1e300) == "1e+300");
}
