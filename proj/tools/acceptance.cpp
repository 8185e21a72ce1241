// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails.

#include "recursum/bench.hpp"
#include "recursum/check.hpp"
#include "recursum/codegen/render.hpp"
#include "recursum/error.hpp"
#include "recursum/integrals.hpp"
#include "recursum/library.hpp"
#include "recursum/parse.hpp"
#include "recursum/quadrature.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

using namespace recursum;
using codegen::Backend;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double interp(const std::string& name, const IndexPoint& p, const EvalEnv& env) {
    return eval(library::builtin(name).spec, p, env);
}

EvalEnv scalars(std::initializer_list<std::pair<const std::string, double>> s) {
    EvalEnv env;
    env.scalars = s;
    return env;
}

// 1. Every backend of every builtin against the interpreter.
Outcome backend_equivalence() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    std::int64_t points = 0;
    check::Options opts;
    opts.samples = 100;
    opts.seed = 2024;
    opts.oracle_samples = 0;
    for (const std::string& name : library::list_builtins()) {
        const check::Report rep = check::validate(check::builtin_target(library::builtin(name)), opts);
        for (const auto& b : rep.backends) {
            o.require(b.error.empty() && b.source == "compiled", name + " " + b.backend + ": " + b.error);
            o.require(b.samples == 100, name + " " + b.backend + ": incomplete samples");
            o.require(b.max_rel_err <= check::kBackendTol, name + " " + b.backend + " err " + sci(b.max_rel_err));
            worst = std::max(worst, b.max_rel_err);
            points += b.points;
        }
    }
    const double secs = seconds_since(t0);
    o.require(secs <= 120.0, "took " + std::to_string(secs) + " s");
    o.detail = (o.pass ? "" : o.detail + "; ") + "15 builtins, " + std::to_string(points) + " comparisons, max rel err " +
               sci(worst) + ", " + std::to_string(secs).substr(0, 5) + " s";
    return o;
}

// 2. Orthogonal polynomial interpreters against closed forms.
Outcome closed_forms() {
    Outcome o;
    o.require(interp("chebyshev_T", {3}, scalars({{"x", 0.5}})) == -1.0, "T3(0.5)");
    o.require(std::abs(interp("legendre_P", {2}, scalars({{"x", 0.5}})) + 0.125) <= 1e-15, "P2(0.5)");
    o.require(interp("hermite_H", {3}, scalars({{"x", 1.0}})) == -4.0, "H3(1)");
    o.require(std::abs(interp("laguerre_L", {2}, scalars({{"x", 1.0}, {"alpha", 0.0}})) + 0.5) <= 1e-15, "L2(1)");
    double worst = 0.0;
    for (const char* name : {"chebyshev_T", "legendre_P", "hermite_H", "laguerre_L"}) {
        const auto& e = library::builtin(name);
        const auto pts = codegen::enumerate_instances(e.spec, e.oracle_bounds);
        library::Rng rng(11);
        std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
        for (int k = 0; k < 200; ++k) {
            const EvalEnv env = e.oracle_env(rng);
            const IndexPoint& p = pts[pick(rng)];
            const double err = check::rel_err(eval(e.spec, p, env), e.oracle(p, env));
            worst = std::max(worst, err);
            o.require(err <= check::kOracleTol, std::string(name) + " err " + sci(err));
        }
    }
    o.detail = (o.pass ? "" : o.detail + "; ") + "4 x 200 points, max rel err " + sci(worst);
    return o;
}

// 3. Boys evaluator against quadrature, and the regime seam.
Outcome boys() {
    Outcome o;
    double worst = 0.0;
    for (double T : {0.1, 1.0, 5.0, 20.0, 40.0}) {
        const std::vector<double> F = quad::boys_eval(8, T);
        for (int m = 0; m <= 8; ++m) {
            const double ref = testing::boys_quadrature(m, T);
            const double err = std::abs(F[static_cast<std::size_t>(m)] - ref) / std::abs(ref);
            worst = std::max(worst, err);
            o.require(err <= 1e-9, "F" + std::to_string(m) + "(" + std::to_string(T) + ") err " + sci(err));
        }
    }
    double seam = 0.0;
    for (int m = 0; m <= 8; ++m) {
        const auto mi = static_cast<std::size_t>(m);
        const double s = quad::boys_eval(m, quad::kBoysSeam, quad::BoysRegime::Series)[mi];
        const double a = quad::boys_eval(m, quad::kBoysSeam, quad::BoysRegime::Asymptotic)[mi];
        const double lo = quad::boys_eval(m, 29.999)[mi];
        const double hi = quad::boys_eval(m, 30.001)[mi];
        const double slope = quad::boys_eval(m + 1, 30.0)[mi + 1];
        seam = std::max({seam, std::abs(s - a), std::abs(hi - lo + 0.002 * slope)});
    }
    o.require(seam <= 1e-9, "seam jump " + sci(seam));
    o.detail = (o.pass ? "" : o.detail + "; ") + "max rel err vs Simpson " + sci(worst) +
               ", seam jump (regimes at T=30, slope-corrected 29.999/30.001) " + sci(seam);
    return o;
}

// 4. Golub-Welsch rules.
Outcome golub_welsch() {
    Outcome o;
    const double tol = 1e-10;
    const quad::QuadRule r2 = quad::gauss_legendre(2);
    o.require(std::abs(r2.nodes[0] + 1.0 / std::sqrt(3.0)) <= tol && std::abs(r2.nodes[1] - 1.0 / std::sqrt(3.0)) <= tol,
              "2-point nodes");
    o.require(std::abs(r2.weights[0] - 1.0) <= tol && std::abs(r2.weights[1] - 1.0) <= tol, "2-point weights");
    const quad::QuadRule r3 = quad::gauss_legendre(3);
    const double x3 = std::sqrt(0.6);
    o.require(std::abs(r3.nodes[0] + x3) <= tol && std::abs(r3.nodes[1]) <= tol && std::abs(r3.nodes[2] - x3) <= tol,
              "3-point nodes");
    o.require(std::abs(r3.weights[0] - 5.0 / 9.0) <= tol && std::abs(r3.weights[1] - 8.0 / 9.0) <= tol &&
                  std::abs(r3.weights[2] - 5.0 / 9.0) <= tol,
              "3-point weights");
    double worst = 0.0;
    for (int n = 1; n <= 6; ++n) {
        const quad::QuadRule r = quad::gauss_legendre(n);
        for (int k = 0; k <= 2 * n - 1; ++k) {
            double q = 0.0;
            for (std::size_t i = 0; i < r.nodes.size(); ++i) q += r.weights[i] * std::pow(r.nodes[i], k);
            const double exact = k % 2 ? 0.0 : 2.0 / (k + 1);
            worst = std::max(worst, std::abs(q - exact));
            o.require(std::abs(q - exact) <= tol, "n=" + std::to_string(n) + " x^" + std::to_string(k));
        }
    }
    o.detail = (o.pass ? "" : o.detail + "; ") + "2/3-point rules exact, monomial error max " + sci(worst);
    return o;
}

// 5. Miller's algorithm, upward instability, k_n closed form, scaled forms.
Outcome bessel() {
    Outcome o;
    double miller = 0.0;
    for (int ix = 0; ix <= 95; ++ix) {
        const double x = 0.5 + 0.1 * ix;
        const std::vector<double> m = quad::miller_bessel_i(20, x);
        for (int n = 0; n <= 20; ++n) {
            const double ref = library::bessel_i_series(n, x);
            miller = std::max(miller, std::abs(m[static_cast<std::size_t>(n)] - ref) / std::abs(ref));
        }
    }
    o.require(miller <= 1e-10, "Miller err " + sci(miller));

    const double up = quad::upward_bessel_i(12, 0.5)[12];
    const double ref12 = library::bessel_i_series(12, 0.5);
    const double up_err = std::abs(up - ref12) / std::abs(ref12);
    o.require(up_err > 1e-3, "upward recurrence did not diverge (" + sci(up_err) + ")");

    // k_n from k_0 = (pi/2) e^{-x}/x and k_1 = k_0 (1 + 1/x) by the k recurrence.
    auto k_env = [](double x) {
        const double k0 = std::numbers::pi / 2.0 * std::exp(-x) / x;
        return scalars({{"inv_x", 1.0 / x}, {"k0", k0}, {"k1", k0 * (1.0 + 1.0 / x)}});
    };
    const double k2 = interp("bessel_k", {2}, k_env(1.0));
    const double k2_closed = std::numbers::pi / 2.0 * std::exp(-1.0) * 7.0;
    o.require(std::abs(k2 - k2_closed) <= 1e-10, "k2(1) = " + std::to_string(k2));
    o.require(std::abs(k2 - 4.04505) <= 5e-6, "k2(1) not ~4.04505");

    double scaled = 0.0;
    for (int ix = 0; ix <= 19; ++ix) {
        const double x = 0.5 + 0.5 * ix;
        const double a0 = std::numbers::pi / (2.0 * x);
        const EvalEnv a_env = scalars({{"inv_x", 1.0 / x}, {"a0", a0}, {"a1", a0 * (1.0 + 1.0 / x)}});
        const EvalEnv ke = k_env(x);
        for (int n = 0; n <= 20; ++n) {
            const double a = interp("bessel_a_scaled", {n}, a_env);
            const double k = interp("bessel_k", {n}, ke);
            scaled = std::max(scaled, std::abs(a - std::exp(x) * k) / std::max(1.0, std::abs(a)));
        }
    }
    // b_n runs the same unstable upward recurrence as i_n; compared where that
    // recurrence is accurate, against e^{-x} times Miller's i_n.
    for (double x : {4.0, 6.0, 8.0, 10.0}) {
        const double s = -std::expm1(-2.0 * x) / 2.0;
        const double c = (1.0 + std::exp(-2.0 * x)) / 2.0;
        const EvalEnv b_env = scalars({{"inv_x", 1.0 / x}, {"b0", s / x}, {"b1", c / x - s / (x * x)}});
        const std::vector<double> i = quad::miller_bessel_i(4, x);
        for (int n = 0; n <= 4; ++n) {
            const double b = interp("bessel_b_scaled", {n}, b_env);
            const double want = std::exp(-x) * i[static_cast<std::size_t>(n)];
            scaled = std::max(scaled, std::abs(b - want) / std::max(1.0, std::abs(want)));
        }
    }
    o.require(scaled <= 1e-10, "scaled identity err " + sci(scaled));
    o.detail = (o.pass ? "" : o.detail + "; ") + "Miller err " + sci(miller) + ", upward err at n=12 x=0.5 " +
               sci(up_err) + ", k2(1) = " + std::to_string(k2) + ", scaled identities " + sci(scaled);
    return o;
}

// 6. Layered structure, op ratio and the shell-class bench.
Outcome layered(nlohmann::json& bench_report) {
    Outcome o;
    const auto& e = library::builtin("hermite_e");
    const codegen::KernelIR un = codegen::lower_unrolled(e.spec, e.kernel_bounds);
    const codegen::KernelIR la = codegen::lower_layered(e.spec, e.kernel_bounds);
    std::string ratios;
    for (const IndexPoint& ij : {IndexPoint{2, 2}, IndexPoint{3, 3}}) {
        codegen::OpCount tu;
        for (std::int64_t t = 0; t <= ij[0] + ij[1]; ++t) tu += codegen::count_ops(un, un.find({ij[0], ij[1], t}));
        const codegen::OpCount tl = codegen::count_ops(la, la.find(ij));
        const double ratio = static_cast<double>(tu.arithmetic()) / static_cast<double>(tl.arithmetic());
        o.require(ratio >= 2.0, "ratio at (" + std::to_string(ij[0]) + "," + std::to_string(ij[1]) + ") " + std::to_string(ratio));
        ratios += (ratios.empty() ? "" : ", ") + std::to_string(tu.arithmetic()) + "/" + std::to_string(tl.arithmetic());
    }

    std::size_t returns = 0, hinted = 0;
    for (const auto& f : la.functions) {
        hinted += f.inline_hint ? 1 : 0;
        o.require(f.output == codegen::OutputKind::Region, f.name + " returns a value");
        for (const auto& st : std::get<codegen::StraightBody>(f.body).stmts) returns += st.kind == codegen::Stmt::Kind::Return;
    }
    o.require(returns == 0, std::to_string(returns) + " aggregate returns in layered IR");
    o.require(hinted == la.functions.size(), "inline hints " + std::to_string(hinted) + "/" + std::to_string(la.functions.size()));
    const std::string ltext = codegen::render(la, codegen::profile("cpp20"), "hermite_e").files.at("hermite_e_layered.hpp");
    o.require(ltext.find("std::array") == std::string::npos && ltext.find("std::vector") == std::string::npos,
              "layered source uses aggregates");

    std::size_t branches = 0;
    for (const auto& f : un.functions) {
        if (!std::holds_alternative<codegen::StraightBody>(f.body)) ++branches;
    }
    const std::string utext = codegen::render(un, codegen::profile("cpp20"), "hermite_e").files.at("hermite_e_unrolled.hpp");
    for (const char* kw : {"if (", "if(", "for (", "while", " ? ", "switch", "goto"}) {
        std::size_t pos = 0;
        while ((pos = utext.find(kw, pos)) != std::string::npos) {
            ++branches;
            ++pos;
        }
    }
    o.require(branches == 0, std::to_string(branches) + " branches in unrolled code");

    const auto t0 = std::chrono::steady_clock::now();
    bench::BenchOptions bo;
    bo.reps = 5;
    bench::pin_to_one_cpu();
    const auto recs = bench::run_bench(e, bo);
    const double secs = seconds_since(t0);
    std::size_t cells = 0;
    for (const auto& r : recs) cells += r.rows.size();
    o.require(recs.size() == 3 && cells == 24, "bench produced " + std::to_string(cells) + " rows");
    o.require(secs < 60.0, "bench took " + std::to_string(secs) + " s");
    bench_report = bench::to_json(recs, bench::host_description());
    o.detail = (o.pass ? "" : o.detail + "; ") + "unrolled/layered ops " + ratios + ", " +
               std::to_string(la.functions.size()) + " layer functions all hinted, 0 returns, 0 branches, bench 8x3 in " +
               std::to_string(secs).substr(0, 5) + " s";
    return o;
}

// 7. Phased J/K against the naive oracle, symmetry, phase mutation.
Outcome jk() {
    Outcome o;
    double worst = 0.0, asym = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const integrals::ToySystem sys = integrals::random_system(seed * 7919, 1 + (seed - 1) % 4);
        const integrals::SymMatrix D = integrals::random_density(seed, sys.n_basis());
        const integrals::SymMatrix J = integrals::build_J(sys, D);
        const integrals::SymMatrix K = integrals::build_K(sys, D);
        const auto [nj, nk] = integrals::naive_JK(sys, D);
        worst = std::max({worst, integrals::rel_frobenius(J, nj), integrals::rel_frobenius(K, nk)});
        asym = std::max({asym, J.max_asymmetry(), K.max_asymmetry()});
    }
    o.require(worst <= 1e-10, "J/K deviation " + sci(worst));
    o.require(asym <= 1e-12, "asymmetry " + sci(asym));

    integrals::ToySystem sys = integrals::random_system(99, 3);
    sys.shells[0].l = 1;
    const integrals::SymMatrix D = integrals::random_density(5, sys.n_basis());
    integrals::BuildOptions mut;
    mut.flip_phase = true;
    const auto [nj, nk] = integrals::naive_JK(sys, D);
    const double mj = integrals::rel_frobenius(integrals::build_J(sys, D, mut), nj);
    o.require(mj > 1e-10, "phase mutation not detected in J (" + sci(mj) + ")");
    o.detail = (o.pass ? "" : o.detail + "; ") + "10 systems, max rel Frobenius " + sci(worst) + ", asymmetry " +
               sci(asym) + ", mutated J deviates by " + sci(mj);
    return o;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// 8. Spec round-trips, deterministic generation, report schemas.
Outcome round_trips(const nlohmann::json& bench_report) {
    Outcome o;
    std::size_t files = 0;
    for (const std::string& name : library::list_builtins()) {
        const auto& e = library::builtin(name);
        o.require(load_spec_file(render_spec(e.spec)) == e.spec, name + " render/parse");
        std::vector<codegen::KernelIR> irs;
        irs.push_back(codegen::lower_unrolled(e.spec, e.kernel_bounds));
        if (e.spec.layered) irs.push_back(codegen::lower_layered(e.spec, e.kernel_bounds));
        irs.push_back(codegen::lower_runtime(e.spec));
        for (const auto& ir : irs) {
            const auto a = codegen::render(ir, codegen::profile("cpp20"), name);
            const auto b = codegen::render(ir, codegen::profile("cpp20"), name);
            o.require(a.files == b.files && a.manifest == b.manifest, name + " render not deterministic");
            // The build generated the same artifacts in a separate process.
            for (const auto& [file, text] : a.files) {
                o.require(slurp(fs::path(RECURSUM_KERNEL_DIR) / file) == text, file + " differs from the build's copy");
                ++files;
            }
        }
    }
    check::Options vo;
    vo.samples = 5;
    const auto vj = nlohmann::json::parse(check::to_json(check::validate(check::builtin_target(library::builtin("boys")), vo)).dump());
    const std::string vs = check::check_validate_schema(vj);
    o.require(vs.empty(), "validate schema: " + vs);
    const std::string bs = check::check_bench_schema(nlohmann::json::parse(bench_report.dump()));
    o.require(bs.empty(), "bench schema: " + bs);
    o.detail = (o.pass ? "" : o.detail + "; ") + "15 specs round-trip, " + std::to_string(files) +
               " generated files byte-identical across runs, validate and bench reports match their schemas";
    return o;
}

}  // namespace

int main() {
    nlohmann::json bench_report = nlohmann::json::array();
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"backend equivalence", backend_equivalence},
        {"closed-form suites", closed_forms},
        {"Boys accuracy and seam", boys},
        {"Golub-Welsch", golub_welsch},
        {"Bessel stability", bessel},
        {"layer reuse", [&] { return layered(bench_report); }},
        {"J/K equivalence", jk},
        {"round-trips", [&] { return round_trips(bench_report); }},
    };
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const Error& e) {
            o.pass = false;
            o.detail = "ERR:" + std::string(error_code_name(e.code())) + " " + e.what();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        failed += o.pass ? 0 : 1;
        std::printf("criterion %zu %s: %s (%s)\n", k + 1, o.pass ? "PASS" : "FAIL", criteria[k].first, o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
