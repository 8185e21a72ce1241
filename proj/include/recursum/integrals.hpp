#pragma once

// Toy J/K builds from generated Hermite E and Coulomb R kernels, with a naive
// four-index oracle. Primitives are single uncontracted s or p Gaussians,
// normalization 1, no screening.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace recursum::integrals {

using Vec3 = std::array<double, 3>;

struct Shell {
    Vec3 center{};
    int l = 0;  // 0 or 1
    double exponent = 1.0;
};

constexpr std::size_t kMaxShells = 4;

struct ToySystem {
    std::vector<Shell> shells;

    /// Throws DomainError on l > 1, a non-positive exponent or too many shells.
    void check() const;
    std::size_t n_basis() const;
};

struct SymMatrix {
    std::size_t n = 0;
    std::vector<double> a;  // row-major n x n

    SymMatrix() = default;
    explicit SymMatrix(std::size_t size) : n(size), a(size * size, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }

    double max_asymmetry() const;
    double frobenius() const;
};

/// ||a - b||_F / max(1e-300, ||b||_F). Throws DimensionMismatch.
double rel_frobenius(const SymMatrix& a, const SymMatrix& b);

struct GaussianProduct {
    Vec3 P{};
    double p = 0.0;
    double Kab = 0.0;
};

GaussianProduct gaussian_product(const Vec3& A, double a, const Vec3& B, double b);

enum class RSource { Unrolled, Runtime };

struct BuildOptions {
    RSource r_source = RSource::Unrolled;
    bool flip_phase = false;  // mutation: drop the (-1)^{|u|} factor
};

/// Algorithm with three phases: Hermite density, Hermite potential, contraction.
SymMatrix build_J(const ToySystem& sys, const SymMatrix& D, const BuildOptions& opts = {});
/// Exchange over bra pairs (A,C) and ket pairs (B,D), E and R hoisted per quartet.
SymMatrix build_K(const ToySystem& sys, const SymMatrix& D, const BuildOptions& opts = {});

/// Explicit ERIs (mn|ls) from series Hermite coefficients and a directly
/// recursed R, then J_mn = sum D_ls (mn|ls) and K_mn = sum D_ls (ml|ns).
std::pair<SymMatrix, SymMatrix> naive_JK(const ToySystem& sys, const SymMatrix& D);

/// One ERI by the naive path; basis functions numbered as in the J/K builds.
double naive_eri(const ToySystem& sys, std::size_t m, std::size_t n, std::size_t l, std::size_t s);

/// Random geometry in a 3-bohr box, exponents in [0.3, 2], l in {0, 1}.
ToySystem random_system(std::uint64_t seed, std::size_t n_shells);
/// Random symmetric density with entries in [-1, 1].
SymMatrix random_density(std::uint64_t seed, std::size_t n);

/// One shell per non-empty line: `x y z l exponent`; `#` starts a comment.
/// Throws ParseError.
ToySystem parse_shells(std::string_view text);

}  // namespace recursum::integrals
