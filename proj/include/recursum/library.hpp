#pragma once

// Built-in recurrence specs with independent oracles and input samplers.

#include "recursum/codegen/ir.hpp"
#include "recursum/interp.hpp"
#include "recursum/spec.hpp"

#include <functional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace recursum::library {

using Rng = std::mt19937_64;
using Oracle = std::function<double(const IndexPoint&, const EvalEnv&)>;
using EnvSampler = std::function<EvalEnv(Rng&)>;

struct BuiltinEntry {
    std::string name;
    std::string source;  // spec-file text
    RecurrenceSpec spec;
    codegen::Bounds default_bounds;
    codegen::Bounds kernel_bounds;  // compiled in-repo; covers default_bounds
    std::vector<std::int64_t> runtime_table;  // table bound handed to runtime kernels
    std::string notes;
    EnvSampler sample_env;  // inputs for backend equivalence

    Oracle oracle;  // empty when there is none
    codegen::Bounds oracle_bounds;
    EnvSampler oracle_env;

    bool has_oracle() const { return static_cast<bool>(oracle); }
};

std::vector<std::string> list_builtins();
/// Throws UnknownBuiltin.
const BuiltinEntry& builtin(std::string_view name);
/// Throws UnknownBuiltin or NoOracle.
double oracle_value(std::string_view name, const IndexPoint& point, const EvalEnv& env);

/// Inputs for a spec with no library entry: every scalar drawn from [-2, 2]
/// away from zero, every sequence `seq_len` values from [-2, 2].
EnvSampler generic_sampler(const RecurrenceSpec& spec, std::size_t seq_len);

/// Clenshaw spec summing c[0..n]: bases at k = n+1 and n+2.
std::string clenshaw_source(int n);

// Independent reference formulas, shared with tests and the quadrature module.
double chebyshev_t(int n, double x);
double legendre_p(int n, double x);
double hermite_h(int n, double x);
double laguerre_l(int n, double alpha, double x);
double chebyshev_u(int n, double x);
double binomial(int n, int k);
double fibonacci(int n);
/// Ascending series for i_n(x).
double bessel_i_series(int n, double x);
/// Finite sum for a_n(x) = e^x k_n(x).
double bessel_a_sum(int n, double x);
/// F_m(T) = e^{-T} sum_k (2T)^k / ((2m+1)(2m+3)...(2m+2k+1)).
double boys_series(int m, double T);
/// E^{ij}_t via monomial expansion of (x-A)^i (x-B)^j in Hermite functions.
double hermite_e_expansion(int i, int j, int t, double inv_2p, double pa, double pb);

}  // namespace recursum::library
