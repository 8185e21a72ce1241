#include "recursum/library.hpp"

#include "recursum/error.hpp"
#include "recursum/parse.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace recursum::library {

namespace {

constexpr const char* kHermiteE = R"spec(# Hermite expansion coefficients E^{ij}_t of a Gaussian product, one Cartesian axis.
recurrence HermiteCoeffX
namespace mcmd
indices i j t
scalars inv_2p PA_x PB_x
validity i >= 0 && j >= 0 && t >= 0 && i + j >= t
base i=0 j=0 t=0 : 1.0
rule "inc_i" when i > 0 : inv_2p * E[i-1,j,t-1] + PA_x * E[i-1,j,t] + (t+1) * E[i-1,j,t+1]
rule "inc_j" when j > 0 : inv_2p * E[i,j-1,t-1] + PB_x * E[i,j-1,t] + (t+1) * E[i,j-1,t+1]
layered axis t descend i j
)spec";

constexpr const char* kCoulombR = R"spec(# Hermite Coulomb integrals R^{(m)}_{tuv}. Fm[m] carries (-2 alpha)^m F_m(T).
recurrence CoulombR
namespace mcmd
indices t u v m
scalars X Y Z
sequences Fm
validity t >= 0 && u >= 0 && v >= 0 && m >= 0
rule "origin" when t == 0 && u == 0 && v == 0 : Fm[m]
rule "dec_t" when t > 0 : (t-1) * E[t-2,u,v,m+1] + X * E[t-1,u,v,m+1]
rule "dec_u" when u > 0 : (u-1) * E[t,u-2,v,m+1] + Y * E[t,u-1,v,m+1]
rule "dec_v" when v > 0 : (v-1) * E[t,u,v-2,m+1] + Z * E[t,u,v-1,m+1]
)spec";

constexpr const char* kBoys = R"spec(# Boys function F_m(T) from the analytic F_0. exp_T = exp(-T), inv_2T = 1/(2T).
recurrence BoysFunction
namespace rys
indices m
scalars T exp_T inv_2T
validity m >= 0
base m=0 : erf(sqrt(T)) * sqrt(pi / (4*T))
rule "step" when m > 0 : ((2*m - 1) * E[m-1] - exp_T) * inv_2T
direction upward
)spec";

constexpr const char* kBesselI = R"spec(# Modified spherical Bessel i_n(x). Upward and unstable; i0, i1 supplied by the caller.
recurrence ModSphBesselI
namespace bessel_sto
indices n
scalars inv_x i0 i1
validity n >= 0
base n=0 : i0
base n=1 : i1
rule "upward" when n > 1 : E[n-2] - (2*n-1) * inv_x * E[n-1]
direction upward
)spec";

constexpr const char* kBesselK = R"spec(# Modified spherical Bessel k_n(x), upward.
recurrence ModSphBesselK
namespace bessel_sto
indices n
scalars inv_x k0 k1
validity n >= 0
base n=0 : k0
base n=1 : k1
rule "upward" when n > 1 : E[n-2] + (2*n-1) * inv_x * E[n-1]
direction upward
)spec";

constexpr const char* kBesselAScaled = R"spec(# a_n(x) = exp(x) k_n(x).
recurrence ScaledBesselA
namespace bessel_sto
indices n
scalars inv_x a0 a1
validity n >= 0
base n=0 : a0
base n=1 : a1
rule "upward" when n > 1 : E[n-2] + (2*n-1) * inv_x * E[n-1]
direction upward
)spec";

constexpr const char* kBesselBScaled = R"spec(# b_n(x) = exp(-x) i_n(x).
recurrence ScaledBesselB
namespace bessel_sto
indices n
scalars inv_x b0 b1
validity n >= 0
base n=0 : b0
base n=1 : b1
rule "upward" when n > 1 : E[n-2] - (2*n-1) * inv_x * E[n-1]
direction upward
)spec";

constexpr const char* kLegendreP = R"spec(recurrence LegendreP
namespace orthopoly
indices n
scalars x
validity n >= 0
base n=0 : 1.0
base n=1 : x
rule "bonnet" when n > 1 : (2*n-1) * x * E[n-1] - (n-1) * E[n-2] scale 1/n
)spec";

constexpr const char* kChebyshevT = R"spec(recurrence ChebyshevT
namespace orthopoly
indices n
scalars x
validity n >= 0
base n=0 : 1.0
base n=1 : x
rule "three_term" when n > 1 : 2*x * E[n-1] - E[n-2]
)spec";

constexpr const char* kHermiteH = R"spec(# Physicists' Hermite polynomials.
recurrence HermiteH
namespace orthopoly
indices n
scalars x
validity n >= 0
base n=0 : 1.0
base n=1 : 2.0 * x
rule "three_term" when n > 1 : 2*x * E[n-1] - 2*(n-1) * E[n-2]
)spec";

constexpr const char* kLaguerreL = R"spec(# Generalized Laguerre polynomials; callers keep alpha > -1.
recurrence LaguerreL
namespace orthopoly
indices n
scalars x alpha
validity n >= 0
base n=0 : 1.0
base n=1 : 1 + alpha - x
rule "three_term" when n > 1 : ((2*n + alpha - 1 - x) * E[n-1] - (n + alpha - 1) * E[n-2]) / n
)spec";

constexpr const char* kRysAlpha = R"spec(# Ratios of consecutive entries of a supplied sequence F.
recurrence RysAlpha
namespace rys
indices k
sequences F
validity k >= 0
rule "ratio" when k >= 0 : F[k+1] / F[k]
)spec";

constexpr const char* kBinomial = R"spec(recurrence Binomial
namespace combinatorics
indices n k
validity n >= 0 && k >= 0 && k <= n
base n=0 k=0 : 1.0
rule "pascal" when n > 0 : E[n-1,k-1] + E[n-1,k]
)spec";

constexpr const char* kFibonacci = R"spec(recurrence Fibonacci
namespace combinatorics
indices n
validity n >= 0
base n=0 : 0.0
base n=1 : 1.0
rule "step" when n > 1 : E[n-1] + E[n-2]
)spec";

using codegen::Bounds;
using codegen::Cap;
using LD = long double;

constexpr int kClenshawN = 20;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

// [-2, 2] with |v| >= 1e-3 so the value is safe as a divisor.
double generic(Rng& rng) {
    while (true) {
        const double v = uniform(rng, -2.0, 2.0);
        if (std::abs(v) >= 1e-3) return v;
    }
}

std::vector<double> generic_seq(Rng& rng, std::size_t n, double lo, double hi) {
    std::vector<double> s(n);
    for (double& v : s) v = uniform(rng, lo, hi);
    return s;
}

Bounds single(std::int64_t n) { return Bounds{{n}, {}}; }

double scalar(const EvalEnv& env, const std::string& name) {
    auto it = env.scalars.find(name);
    if (it == env.scalars.end()) fail(ErrorCode::MissingBinding, "oracle needs scalar '" + name + "'");
    return it->second;
}

const std::vector<double>& sequence(const EvalEnv& env, const std::string& name) {
    auto it = env.sequences.find(name);
    if (it == env.sequences.end()) fail(ErrorCode::MissingBinding, "oracle needs sequence '" + name + "'");
    return it->second;
}

int as_int(std::int64_t v) { return static_cast<int>(v); }

LD binom_ld(int n, int k) {
    if (k < 0 || k > n) return 0.0L;
    k = std::min(k, n - k);
    LD r = 1.0L;
    for (int j = 1; j <= k; ++j) r = r * static_cast<LD>(n - k + j) / static_cast<LD>(j);
    return r;
}

LD factorial_ld(int n) {
    LD r = 1.0L;
    for (int j = 2; j <= n; ++j) r *= static_cast<LD>(j);
    return r;
}

EvalEnv x_env(double x) {
    EvalEnv env;
    env.scalars["x"] = x;
    return env;
}

EvalEnv bessel_env(const std::string& prefix, double x, double v0, double v1) {
    EvalEnv env;
    env.scalars["inv_x"] = 1.0 / x;
    env.scalars[prefix + "0"] = v0;
    env.scalars[prefix + "1"] = v1;
    return env;
}

double x_of(const EvalEnv& env) { return 1.0 / scalar(env, "inv_x"); }

EvalEnv boys_env(double T) {
    EvalEnv env;
    env.scalars["T"] = T;
    env.scalars["exp_T"] = std::exp(-T);
    env.scalars["inv_2T"] = 1.0 / (2.0 * T);
    return env;
}

EvalEnv bessel_i_env(double x) {
    return bessel_env("i", x, std::sinh(x) / x, std::cosh(x) / x - std::sinh(x) / (x * x));
}

EvalEnv bessel_k_env(double x) {
    const double k0 = std::numbers::pi / 2.0 * std::exp(-x) / x;
    return bessel_env("k", x, k0, k0 * (1.0 + 1.0 / x));
}

EvalEnv bessel_a_env(double x) {
    const double a0 = std::numbers::pi / (2.0 * x);
    return bessel_env("a", x, a0, a0 * (1.0 + 1.0 / x));
}

EvalEnv bessel_b_env(double x) {
    // exp(-x) sinh(x) = (1 - exp(-2x)) / 2, likewise for cosh
    const double s = -std::expm1(-2.0 * x) / 2.0;
    const double c = (1.0 + std::exp(-2.0 * x)) / 2.0;
    return bessel_env("b", x, s / x, c / x - s / (x * x));
}

BuiltinEntry make(std::string name, std::string source) {
    BuiltinEntry e;
    e.name = std::move(name);
    e.source = std::move(source);
    e.spec = load_spec_file(e.source);
    return e;
}

std::vector<BuiltinEntry> build() {
    std::vector<BuiltinEntry> all;

    {
        BuiltinEntry e = make("hermite_e", kHermiteE);
        e.default_bounds = Bounds{{6, 6, 6}, {Cap{{0, 1}, 6}}};
        e.kernel_bounds = Bounds{{6, 6, 8}, {Cap{{0, 1}, 8}}};
        e.runtime_table = {6, 6, 8};
        e.notes = "Gaussian-product Hermite expansion coefficients; layered over (i, j) with output axis t.";
        e.sample_env = [](Rng& rng) {
            EvalEnv env;
            env.scalars = {{"inv_2p", generic(rng)}, {"PA_x", generic(rng)}, {"PB_x", generic(rng)}};
            return env;
        };
        e.oracle = [](const IndexPoint& p, const EvalEnv& env) {
            return hermite_e_expansion(as_int(p[0]), as_int(p[1]), as_int(p[2]), scalar(env, "inv_2p"),
                                       scalar(env, "PA_x"), scalar(env, "PB_x"));
        };
        e.oracle_bounds = e.default_bounds;
        e.oracle_env = e.sample_env;
        all.push_back(std::move(e));
    }
    {
        BuiltinEntry e = make("coulomb_R", kCoulombR);
        e.default_bounds = Bounds{{4, 4, 4, 4}, {Cap{{0, 1, 2}, 4}}};
        e.kernel_bounds = e.default_bounds;
        e.runtime_table = {4, 4, 4, 8};
        e.notes = "Hermite Coulomb integrals; Fm must hold (-2 alpha)^m F_m(T) for m up to m + t + u + v.";
        e.sample_env = [](Rng& rng) {
            EvalEnv env;
            env.scalars = {{"X", generic(rng)}, {"Y", generic(rng)}, {"Z", generic(rng)}};
            env.sequences["Fm"] = generic_seq(rng, 9, -2.0, 2.0);
            return env;
        };
        all.push_back(std::move(e));
    }
    {
        BuiltinEntry e = make("boys", kBoys);
        e.default_bounds = single(20);
        e.kernel_bounds = e.default_bounds;
        e.runtime_table = {20};
        e.notes = "Upward from the closed-form F_0; accurate only while T is large relative to m. "
                  "The stable evaluator is boys_eval.";
        e.sample_env = [](Rng& rng) { return boys_env(uniform(rng, 0.1, 40.0)); };
        e.oracle = [](const IndexPoint& p, const EvalEnv& env) { return boys_series(as_int(p[0]), scalar(env, "T")); };
        e.oracle_bounds = single(20);
        e.oracle_env = [](Rng& rng) { return boys_env(uniform(rng, 25.0, 40.0)); };
        all.push_back(std::move(e));
    }
    {
        BuiltinEntry e = make("bessel_i", kBesselI);
        e.default_bounds = single(20);
        e.kernel_bounds = e.default_bounds;
        e.runtime_table = {20};
        e.notes = "Upward recurrence, unstable once n exceeds x; miller_bessel_i is the stable route.";
        e.sample_env = [](Rng& rng) { return bessel_i_env(uniform(rng, 0.5, 10.0)); };
        e.oracle = [](const IndexPoint& p, const EvalEnv& env) { return bessel_i_series(as_int(p[0]), x_of(env)); };
        e.oracle_bounds = single(4);
        e.oracle_env = [](Rng& rng) { return bessel_i_env(uniform(rng, 4.0, 10.0)); };
        all.push_back(std::move(e));
    }
    {
        BuiltinEntry e = make("bessel_k", kBesselK);
        e.default_bounds = single(20);
        e.kernel_bounds = e.default_bounds;
        e.runtime_table = {20};
        e.notes = "Upward recurrence, stable.";
        e.sample_env = [](Rng& rng) { return bessel_k_env(uniform(rng, 0.5, 10.0)); };
        e.oracle = [](const IndexPoint& p, const EvalEnv& env) {
            const double x = x_of(env);
            return std::exp(-x) * bessel_a_sum(as_int(p[0]), x);
        };
        e.oracle_bounds = single(20);
        e.oracle_env = e.sample_env;
        all.push_back(std::move(e));
    }
    {
        BuiltinEntry e = make("bessel_a_scaled", kBesselAScaled);
        e.default_bounds = single(20);
        e.kernel_bounds = e.default_bounds;
        e.runtime_table = {20};
        e.notes = "Scaled k_n; a polynomial in 1/x.";
        e.sample_env = [](Rng& rng) { return bessel_a_env(uniform(rng, 0.5, 10.0)); };
        e.oracle = [](const IndexPoint& p, const EvalEnv& env) { return bessel_a_sum(as_int(p[0]), x_of(env)); };
        e.oracle_bounds = single(20);
        e.oracle_env = e.sample_env;
        all.push_back(std::move(e));
    }
    {
        BuiltinEntry e = make("bessel_b_scaled", kBesselBScaled);
        e.default_bounds = single(20);
        e.kernel_bounds = e.default_bounds;
        e.runtime_table = {20};
        e.notes = "Scaled i_n; same instability as bessel_i.";
        e.sample_env = [](Rng& rng) { return bessel_b_env(uniform(rng, 0.5, 10.0)); };
        e.oracle = [](const IndexPoint& p, const EvalEnv& env) {
            const double x = x_of(env);
            return std::exp(-x) * bessel_i_series(as_int(p[0]), x);
        };
        e.oracle_bounds = single(4);
        e.oracle_env = [](Rng& rng) { return bessel_b_env(uniform(rng, 4.0, 10.0)); };
        all.push_back(std::move(e));
    }
    {
        BuiltinEntry e = make("legendre_P", kLegendreP);
        e.default_bounds = single(20);
        e.kernel_bounds = e.default_bounds;
        e.runtime_table = {20};
        e.notes = "Bonnet recurrence with a 1/n scale.";
        e.sample_env = [](Rng& rng) { return x_env(uniform(rng, -1.0, 1.0)); };
        e.oracle = [](const IndexPoint& p, const EvalEnv& env) { return legendre_p(as_int(p[0]), scalar(env, "x")); };
        e.oracle_bounds = single(20);
        e.oracle_env = e.sample_env;
        all.push_back(std::move(e));
    }
    {
        BuiltinEntry e = make("chebyshev_T", kChebyshevT);
        e.default_bounds = single(20);
        e.kernel_bounds = e.default_bounds;
        e.runtime_table = {20};
        e.notes = "Chebyshev polynomials of the first kind.";
        e.sample_env = [](Rng& rng) { return x_env(uniform(rng, -1.0, 1.0)); };
        e.oracle = [](const IndexPoint& p, const EvalEnv& env) { return chebyshev_t(as_int(p[0]), scalar(env, "x")); };
        e.oracle_bounds = single(20);
        e.oracle_env = e.sample_env;
        all.push_back(std::move(e));
    }
    {
        BuiltinEntry e = make("hermite_H", kHermiteH);
        e.default_bounds = single(20);
        e.kernel_bounds = e.default_bounds;
        e.runtime_table = {20};
        e.notes = "Physicists' Hermite polynomials.";
        e.sample_env = [](Rng& rng) { return x_env(generic(rng)); };
        e.oracle = [](const IndexPoint& p, const EvalEnv& env) { return hermite_h(as_int(p[0]), scalar(env, "x")); };
        e.oracle_bounds = single(20);
        e.oracle_env = e.sample_env;
        all.push_back(std::move(e));
    }
    {
        BuiltinEntry e = make("laguerre_L", kLaguerreL);
        e.default_bounds = single(20);
        e.kernel_bounds = e.default_bounds;
        e.runtime_table = {20};
        e.notes = "Generalized Laguerre polynomials; alpha > -1 is the caller's responsibility.";
        e.sample_env = [](Rng& rng) {
            EvalEnv env = x_env(generic(rng));
            env.scalars["alpha"] = generic(rng);
            return env;
        };
        e.oracle = [](const IndexPoint& p, const EvalEnv& env) {
            return laguerre_l(as_int(p[0]), scalar(env, "alpha"), scalar(env, "x"));
        };
        e.oracle_bounds = single(20);
        e.oracle_env = [](Rng& rng) {
            EvalEnv env = x_env(uniform(rng, 0.0, 4.0));
            env.scalars["alpha"] = uniform(rng, -0.9, 3.0);
            return env;
        };
        all.push_back(std::move(e));
    }
    {
        BuiltinEntry e = make("clenshaw", clenshaw_source(kClenshawN));
        e.default_bounds = single(kClenshawN + 2);
        e.kernel_bounds = e.default_bounds;
        e.runtime_table = {kClenshawN + 2};
        e.notes = "Backward Clenshaw sweep over c[0..20]; the sum is c[0]/2 + x b_1 - b_2.";
        e.sample_env = [](Rng& rng) {
            EvalEnv env = x_env(uniform(rng, -1.0, 1.0));
            env.sequences["c"] = generic_seq(rng, kClenshawN + 1, -1.0, 1.0);
            return env;
        };
        e.oracle = [](const IndexPoint& p, const EvalEnv& env) {
            const auto& c = sequence(env, "c");
            const double x = scalar(env, "x");
            LD s = 0.0L;
            for (int j = as_int(p[0]); j <= kClenshawN; ++j) {
                s += static_cast<LD>(c.at(static_cast<std::size_t>(j))) * chebyshev_u(j - as_int(p[0]), x);
            }
            return static_cast<double>(s);
        };
        e.oracle_bounds = e.default_bounds;
        e.oracle_env = e.sample_env;
        all.push_back(std::move(e));
    }
    {
        BuiltinEntry e = make("rys_alpha", kRysAlpha);
        e.default_bounds = single(20);
        e.kernel_bounds = e.default_bounds;
        e.runtime_table = {20};
        e.notes = "Ratios F[k+1]/F[k]; F is typically a run of Boys values.";
        e.sample_env = [](Rng& rng) {
            EvalEnv env;
            env.sequences["F"] = generic_seq(rng, 22, 0.1, 2.0);
            return env;
        };
        e.oracle = [](const IndexPoint& p, const EvalEnv& env) {
            const auto& f = sequence(env, "F");
            const auto k = static_cast<std::size_t>(p[0]);
            return f.at(k + 1) / f.at(k);
        };
        e.oracle_bounds = e.default_bounds;
        e.oracle_env = e.sample_env;
        all.push_back(std::move(e));
    }
    {
        BuiltinEntry e = make("binomial", kBinomial);
        e.default_bounds = Bounds{{20, 20}, {}};
        e.kernel_bounds = e.default_bounds;
        e.runtime_table = {20, 20};
        e.notes = "Pascal's rule.";
        e.sample_env = [](Rng&) { return EvalEnv{}; };
        e.oracle = [](const IndexPoint& p, const EvalEnv&) { return binomial(as_int(p[0]), as_int(p[1])); };
        e.oracle_bounds = e.default_bounds;
        e.oracle_env = e.sample_env;
        all.push_back(std::move(e));
    }
    {
        BuiltinEntry e = make("fibonacci", kFibonacci);
        e.default_bounds = single(20);
        e.kernel_bounds = e.default_bounds;
        e.runtime_table = {20};
        e.notes = "F_0 = 0, F_1 = 1.";
        e.sample_env = [](Rng&) { return EvalEnv{}; };
        e.oracle = [](const IndexPoint& p, const EvalEnv&) { return fibonacci(as_int(p[0])); };
        e.oracle_bounds = e.default_bounds;
        e.oracle_env = e.sample_env;
        all.push_back(std::move(e));
    }
    return all;
}

const std::vector<BuiltinEntry>& entries() {
    static const std::vector<BuiltinEntry> all = build();
    return all;
}

}  // namespace

std::string clenshaw_source(int n) {
    if (n < 0) fail(ErrorCode::DomainError, "Clenshaw degree must be non-negative");
    const std::string a = std::to_string(n + 1), b = std::to_string(n + 2);
    return "# Clenshaw backward sweep b_k = 2x b_{k+1} - b_{k+2} + c_k over c[0.." + std::to_string(n) + "].\n"
           "recurrence Clenshaw\n"
           "namespace chebyshev\n"
           "indices k\n"
           "scalars x\n"
           "sequences c\n"
           "validity k >= 1 && k <= " + b + "\n"
           "base k=" + a + " : 0.0\n"
           "base k=" + b + " : 0.0\n"
           "rule \"backward\" when k <= " + std::to_string(n) + " : 2*x * E[k+1] - E[k+2] + c[k]\n"
           "direction downward\n";
}

std::vector<std::string> list_builtins() {
    return {"hermite_e",  "coulomb_R",   "boys",       "bessel_i",  "bessel_k",
            "bessel_a_scaled", "bessel_b_scaled", "legendre_P", "chebyshev_T", "hermite_H",
            "laguerre_L", "clenshaw",    "rys_alpha",  "binomial",  "fibonacci"};
}

const BuiltinEntry& builtin(std::string_view name) {
    for (const BuiltinEntry& e : entries()) {
        if (e.name == name) return e;
    }
    fail(ErrorCode::UnknownBuiltin, "no builtin named '" + std::string(name) + "'");
}

double oracle_value(std::string_view name, const IndexPoint& point, const EvalEnv& env) {
    const BuiltinEntry& e = builtin(name);
    if (!e.has_oracle()) fail(ErrorCode::NoOracle, e.name + " has no independent oracle");
    if (!in_domain(e.spec, point)) return 0.0;
    return e.oracle(point, env);
}

double chebyshev_t(int n, double x) {
    if (std::abs(x) <= 1.0) return std::cos(n * std::acos(x));
    const double v = std::cosh(n * std::acosh(std::abs(x)));
    return (x < 0 && n % 2 == 1) ? -v : v;
}

double legendre_p(int n, double x) {
    LD s = 0.0L;
    for (int k = 0; 2 * k <= n; ++k) {
        const LD term = binom_ld(n, k) * binom_ld(2 * n - 2 * k, n) * std::pow(static_cast<LD>(x), n - 2 * k);
        s += (k % 2 == 0) ? term : -term;
    }
    return static_cast<double>(std::ldexp(s, -n));
}

double hermite_h(int n, double x) {
    LD s = 0.0L;
    for (int m = 0; 2 * m <= n; ++m) {
        const LD term = std::pow(2.0L * x, n - 2 * m) / (factorial_ld(m) * factorial_ld(n - 2 * m));
        s += (m % 2 == 0) ? term : -term;
    }
    return static_cast<double>(factorial_ld(n) * s);
}

double laguerre_l(int n, double alpha, double x) {
    LD s = 0.0L;
    for (int i = 0; i <= n; ++i) {
        LD c = 1.0L;  // generalized binomial (n + alpha choose n - i)
        for (int j = 1; j <= n - i; ++j) c = c * (static_cast<LD>(alpha) + i + j) / j;
        const LD term = c * std::pow(static_cast<LD>(x), i) / factorial_ld(i);
        s += (i % 2 == 0) ? term : -term;
    }
    return static_cast<double>(s);
}

double chebyshev_u(int n, double x) {
    if (n < 0) return 0.0;
    LD s = 0.0L;
    for (int m = 0; 2 * m <= n; ++m) {
        const LD term = binom_ld(n - m, m) * std::pow(2.0L * x, n - 2 * m);
        s += (m % 2 == 0) ? term : -term;
    }
    return static_cast<double>(s);
}

double binomial(int n, int k) { return static_cast<double>(binom_ld(n, k)); }

double fibonacci(int n) {
    double a = 0.0, b = 1.0;
    for (int k = 0; k < n; ++k) {
        const double c = a + b;
        a = b;
        b = c;
    }
    return a;
}

double bessel_i_series(int n, double x) {
    if (x == 0.0) return n == 0 ? 1.0 : 0.0;
    LD lead = 1.0L;
    for (int k = 1; k <= n; ++k) lead = lead * x / (2 * k + 1);
    const LD y = static_cast<LD>(x) * x / 2.0L;
    LD term = 1.0L, sum = 1.0L;
    for (int k = 1; k < 1000; ++k) {
        term = term * y / (static_cast<LD>(k) * (2 * n + 2 * k + 1));
        sum += term;
        if (term < sum * 1e-21L) break;
    }
    return static_cast<double>(lead * sum);
}

double bessel_a_sum(int n, double x) {
    LD term = 1.0L, sum = 1.0L;
    for (int k = 0; k < n; ++k) {
        term = term * static_cast<LD>(n + k + 1) * static_cast<LD>(n - k) / (static_cast<LD>(k + 1) * 2.0L * x);
        sum += term;
    }
    return static_cast<double>(std::numbers::pi_v<LD> / (2.0L * x) * sum);
}

double boys_series(int m, double T) {
    if (T < 0) fail(ErrorCode::DomainError, "Boys argument must be non-negative");
    LD term = 1.0L / (2 * m + 1), sum = term;
    for (int k = 0; k < 5000; ++k) {
        term = term * 2.0L * T / (2 * m + 2 * k + 3);
        sum += term;
        if (term < sum * 1e-21L && k > T) break;
    }
    return static_cast<double>(std::exp(-static_cast<LD>(T)) * sum);
}

double hermite_e_expansion(int i, int j, int t, double inv_2p, double pa, double pb) {
    // (x_P)^K = sum_t M^K_t Lambda_t with M^K_{K-2s} = K! / (s! (K-2s)!) a^{K-s} / 2^s
    auto m = [&](int K) -> LD {
        if (t < 0 || t > K || (K - t) % 2 != 0) return 0.0L;
        const int s = (K - t) / 2;
        return factorial_ld(K) / (factorial_ld(s) * factorial_ld(t)) * std::pow(static_cast<LD>(inv_2p), K - s) /
               std::pow(2.0L, s);
    };
    LD sum = 0.0L;
    for (int k = 0; k <= i; ++k) {
        for (int l = 0; l <= j; ++l) {
            sum += binom_ld(i, k) * binom_ld(j, l) * std::pow(static_cast<LD>(pa), i - k) *
                   std::pow(static_cast<LD>(pb), j - l) * m(k + l);
        }
    }
    return static_cast<double>(sum);
}

EnvSampler generic_sampler(const RecurrenceSpec& spec, std::size_t seq_len) {
    return [scalars = spec.scalars, seqs = spec.sequences, seq_len](Rng& rng) {
        EvalEnv env;
        for (const auto& s : scalars) env.scalars[s] = generic(rng);
        for (const auto& s : seqs) env.sequences[s] = generic_seq(rng, seq_len, -2.0, 2.0);
        return env;
    };
}

}  // namespace recursum::library
