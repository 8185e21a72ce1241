#include "doctest.h"

#include "recursum/codegen/ir.hpp"
#include "recursum/codegen/render.hpp"
#include "recursum/error.hpp"
#include "recursum/interp.hpp"
#include "recursum/parse.hpp"

#include <cmath>
#include <random>

using namespace recursum;
using namespace recursum::codegen;

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

const char* kFib = R"(recurrence Fibonacci
indices n
validity n >= 0
base n=0 : 0.0
base n=1 : 1.0
rule "step" when n >= 2 : E[n-1] + E[n-2]
)";

const char* kSeqSpec = R"(recurrence Weighted
indices n
sequences w
validity n >= 0
base n=0 : w[0]
rule "step" when n >= 1 : w[n] * E[n-1] + 0.5
)";

Bounds hermite_bounds(std::int64_t n) {
    const RecurrenceSpec spec = load_spec_file(kHermite);
    return Bounds::box(spec, n);
}

const Function& fn_at(const KernelIR& ir, const IndexPoint& p) {
    const int k = ir.find(p);
    REQUIRE(k >= 0);
    return ir.functions[static_cast<std::size_t>(k)];
}

BoundEnv hermite_bound_env(const RecurrenceSpec& spec, double p, double a, double b) {
    EvalEnv env;
    env.scalars = {{"inv_2p", p}, {"PA_x", a}, {"PB_x", b}};
    return BoundEnv::bind(spec, env);
}

}  // namespace

TEST_CASE("enumerate_instances") {
    const RecurrenceSpec h = load_spec_file(kHermite);
    CHECK(enumerate_instances(h, Bounds::box(h, 1)).size() == 7);
    CHECK(enumerate_instances(h, Bounds::box(h, 0)) == std::vector<IndexPoint>{{0, 0, 0}});
    const RecurrenceSpec f = load_spec_file(kFib);
    CHECK(enumerate_instances(f, Bounds::box(f, 3)) == std::vector<IndexPoint>{{0}, {1}, {2}, {3}});
}

TEST_CASE("unrolled folding") {
    const RecurrenceSpec h = load_spec_file(kHermite);
    const KernelIR ir = lower_unrolled(h, hermite_bounds(2));
    const Function& f = fn_at(ir, {1, 0, 0});
    const auto& body = std::get<StraightBody>(f.body);
    REQUIRE(body.stmts.size() == 1);
    CHECK(body.stmts[0].kind == Stmt::Kind::Return);
    CHECK(body.stmts[0].args[0] == Operand::param(1));
    const SourceArtifact art = render(ir, profile("cpp20"));
    const std::string& text = art.files.at("hermite_coeff_x_unrolled.hpp");
    CHECK(text.find("return PA_x;") != std::string::npos);
    CHECK(check_ir(ir).empty());

    const OpCount base = count_ops(ir, ir.find({0, 0, 0}));
    CHECK(base.arithmetic() == 0);

    for (const Function& g : ir.functions) {
        for (const Stmt& s : std::get<StraightBody>(g.body).stmts) {
            CHECK(s.kind != Stmt::Kind::CallLayer);
            for (const Operand& a : s.args) CHECK_FALSE((s.op == Op::Mul && a.is_const(0.0)));
        }
    }
}

TEST_CASE("Fibonacci unrolled") {
    const RecurrenceSpec f = load_spec_file(kFib);
    const KernelIR ir = lower_unrolled(f, Bounds::box(f, 10));
    const OpCount ops = count_ops(ir, ir.find({5}));
    CHECK(ops.adds == 4);
    CHECK(ops.muls == 0);
    CHECK(run_scalar(ir, ir.find({10}), BoundEnv{}) == 55.0);
}

TEST_CASE("Chebyshev base renders a constant") {
    const RecurrenceSpec c = load_spec_file(R"(recurrence ChebyshevT
indices n
scalars x
validity n >= 0
base n=0 : 1.0
base n=1 : x
rule "up" when n >= 2 : 2.0 * x * E[n-1] - E[n-2]
)");
    const SourceArtifact art = emit_unrolled(c, Bounds::box(c, 3), profile("cpp20"));
    const std::string& text = art.files.at("chebyshev_t_unrolled.hpp");
    CHECK(text.find("inline double chebyshev_t_0(double /*x*/) {\n    return 1.0;\n}") != std::string::npos);
}

TEST_CASE("layered Hermite") {
    const RecurrenceSpec h = load_spec_file(kHermite);
    const KernelIR ir = lower_layered(h, hermite_bounds(3));
    CHECK(check_ir(ir).empty());
    const Function& l00 = fn_at(ir, {0, 0});
    CHECK(l00.output_length == 1);
    const Function& l10 = fn_at(ir, {1, 0});
    CHECK(l10.output_length == 2);
    CHECK(l10.inline_hint);
    // Layer (1,0) only holds parameters of layer (0,0), (2,0) only
    // parameters of (1,0); neither needs its predecessor at run time.
    CHECK(std::get<StraightBody>(l10.body).regions.empty());
    CHECK(l10.calls.empty());
    CHECK(fn_at(ir, {2, 0}).calls.empty());

    const Function& l30 = fn_at(ir, {3, 0});
    CHECK(l30.output_length == 4);
    const auto& body = std::get<StraightBody>(l30.body);
    REQUIRE(body.regions.size() == 1);
    CHECK(body.regions[0].length == 3);
    CHECK(body.stmts.front().kind == Stmt::Kind::CallLayer);
    CHECK(l30.calls.size() == 1);

    const BoundEnv env = hermite_bound_env(h, 0.25, 0.3, -0.2);
    double out[2] = {};
    run_layer(ir, ir.find({1, 0}), env, out);
    CHECK(out[0] == doctest::Approx(0.3));
    CHECK(out[1] == doctest::Approx(0.25));

    const std::string text = render(ir, profile("cpp20")).files.at("hermite_coeff_x_layered.hpp");
    CHECK(text.find("RECURSUM_FORCEINLINE void hermite_coeff_x_layer_0_0(double* out, double /*inv_2p*/, "
                    "double /*PA_x*/, double /*PB_x*/) {\n    out[0] = 1.0;\n}") != std::string::npos);
    CHECK(text.find("hermite_coeff_x_layer_2_0(rv_prev0, inv_2p, PA_x, PB_x);") != std::string::npos);
    CHECK(text.find("out[0] = rv_") != std::string::npos);
    CHECK(text.find("double rv_prev0[3];") != std::string::npos);
    for (const Function& f : ir.functions) {
        CHECK(f.inline_hint);
        CHECK(f.output == OutputKind::Region);
    }
}

TEST_CASE("layered vs unrolled op ratio") {
    const RecurrenceSpec h = load_spec_file(kHermite);
    Bounds b = hermite_bounds(4);
    const KernelIR un = lower_unrolled(h, b);
    const KernelIR la = lower_layered(h, b);
    for (const IndexPoint ij : {IndexPoint{2, 2}, IndexPoint{3, 3}}) {
        OpCount tu;
        for (std::int64_t t = 0; t <= ij[0] + ij[1]; ++t) tu += count_ops(un, un.find({ij[0], ij[1], t}));
        const OpCount tl = count_ops(la, la.find(ij));
        CHECK(tl.arithmetic() > 0);
        CHECK(static_cast<double>(tu.arithmetic()) / static_cast<double>(tl.arithmetic()) >= 2.0);
    }
}

TEST_CASE("IR executors match the interpreter") {
    const RecurrenceSpec h = load_spec_file(kHermite);
    const Bounds b = hermite_bounds(4);
    const KernelIR un = lower_unrolled(h, b);
    const KernelIR la = lower_layered(h, b);
    const KernelIR rt = lower_runtime(h);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        EvalEnv env;
        env.scalars = {{"inv_2p", u(rng)}, {"PA_x", u(rng)}, {"PB_x", u(rng)}};
        const BoundEnv be = BoundEnv::bind(h, env);
        Evaluator ev(h, env);
        for (std::int64_t i = 0; i <= 4; ++i) {
            for (std::int64_t j = 0; i + j <= 4; ++j) {
                std::vector<double> layer(static_cast<std::size_t>(i + j + 1));
                run_layer(la, la.find({i, j}), be, layer.data());
                for (std::int64_t t = 0; t <= i + j; ++t) {
                    const double ref = ev.eval({i, j, t});
                    const double tol = 1e-12 * std::max(1.0, std::abs(ref));
                    CHECK(std::abs(run_scalar(un, un.find({i, j, t}), be) - ref) <= tol);
                    CHECK(std::abs(layer[static_cast<std::size_t>(t)] - ref) <= tol);
                    const RuntimeResult r = run_runtime(rt, {i, j, t}, {4, 4, 8}, be);
                    CHECK(r.status == RuntimeStatus::Ok);
                    CHECK(std::abs(r.value - ref) <= tol);
                }
            }
        }
    }
}

TEST_CASE("runtime status codes") {
    const RecurrenceSpec f = load_spec_file(kFib);
    const KernelIR rt = lower_runtime(f);
    const RuntimeResult ok = run_runtime(rt, {10}, {10}, BoundEnv{});
    CHECK(ok.status == RuntimeStatus::Ok);
    CHECK(ok.value == 55.0);
    CHECK(run_runtime(rt, {11}, {10}, BoundEnv{}).status == RuntimeStatus::TableBoundExceeded);

    const RecurrenceSpec s = load_spec_file(kSeqSpec);
    EvalEnv env;
    env.sequences = {{"w", {1.0, 2.0, 3.0}}};
    const BoundEnv be = BoundEnv::bind(s, env);
    const KernelIR srt = lower_runtime(s);
    const RuntimeResult r2 = run_runtime(srt, {2}, {2}, be);
    CHECK(r2.status == RuntimeStatus::Ok);
    CHECK(r2.value == doctest::Approx(eval(s, {2}, env)));
    CHECK(run_runtime(srt, {3}, {3}, be).status == RuntimeStatus::SequenceOutOfRange);

    const RecurrenceSpec gap = load_spec_file(R"(recurrence Gap
indices n
validity n >= 0
base n=0 : 1.0
rule "odd" when n >= 1 && n <= 2 : E[n-1]
)");
    CHECK(run_runtime(lower_runtime(gap), {3}, {3}, BoundEnv{}).status == RuntimeStatus::NoRule);
}

TEST_CASE("sequence lengths and loads") {
    const RecurrenceSpec s = load_spec_file(kSeqSpec);
    const KernelIR ir = lower_unrolled(s, Bounds::box(s, 4));
    CHECK(fn_at(ir, {4}).min_seq_len == std::vector<std::int64_t>{5});
    CHECK(fn_at(ir, {0}).min_seq_len == std::vector<std::int64_t>{1});
    const SourceArtifact art = render(ir, profile("cpp20"));
    CHECK(art.manifest["functions"][4]["min_seq_lengths"]["w"] == 5);
}

TEST_CASE("render determinism and manifest") {
    const RecurrenceSpec h = load_spec_file(kHermite);
    const KernelIR ir = lower_unrolled(h, hermite_bounds(2));
    const SourceArtifact a = render(ir, profile("cpp20"));
    const SourceArtifact b = render(lower_unrolled(h, hermite_bounds(2)), profile("cpp20"));
    CHECK(a.files == b.files);
    CHECK(a.manifest.dump() == b.manifest.dump());
    CHECK(a.files.count("hermite_coeff_x_unrolled_abi.cpp") == 1);
    std::set<std::string> names;
    std::set<std::vector<std::int64_t>> tuples;
    for (const auto& f : a.manifest["functions"]) {
        names.insert(f["name"].get<std::string>());
        tuples.insert(f["tuple"].get<std::vector<std::int64_t>>());
    }
    CHECK(names.size() == ir.functions.size());
    CHECK(tuples.size() == ir.functions.size());
    CHECK(a.manifest["bounds"]["upper"]["t"] == 2);

    const SourceArtifact c = render(ir, profile("c99"));
    CHECK(c.files.size() == 1);
    const std::string& text = c.files.at("hermite_coeff_x_unrolled.h");
    CHECK(text.find("static inline double mcmd_hermite_coeff_x_1_0_0(") != std::string::npos);
    CHECK(text.find("std::") == std::string::npos);
}

TEST_CASE("profile errors") {
    CHECK_THROWS_AS(profile("fortran"), Error);
    const RecurrenceSpec bad = load_spec_file(R"(recurrence Bad
indices n
scalars out
validity n >= 0
base n=0 : out
)");
    try {
        render(lower_unrolled(bad, Bounds::box(bad, 0)), profile("cpp20"));
        FAIL("expected UnsupportedConstruct");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnsupportedConstruct);
    }
}

TEST_CASE("double_literal") {
    CHECK(double_literal(1.0) == "1.0");
    CHECK(double_literal(0.5) == "0.5");
    CHECK(double_literal(-2.0) == "(-2.0)");
    CHECK(double_literal(1e-300) == "1e-300");
    CHECK(double_literal(3.0e20) == "3e+20");
    CHECK(std::stod(double_literal(0.1)) == 0.1);
}
