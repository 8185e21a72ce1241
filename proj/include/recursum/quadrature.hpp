#pragma once

// Numerical pipelines around the recurrence library: Boys evaluation,
// Clenshaw summation, Miller's algorithm, Rys coefficients, Golub-Welsch.

#include <functional>
#include <string>
#include <vector>

namespace recursum::quad {

struct TridiagSym {
    std::vector<double> diag;     // a_1 .. a_n
    std::vector<double> offdiag;  // b_1 .. b_{n-1}

    std::size_t size() const { return diag.size(); }
};

struct QuadRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    double mu0 = 0.0;
};

struct Eigen {
    std::vector<double> values;            // ascending
    std::vector<double> first_components;  // of the unit eigenvectors
};

/// Series below this T, asymptotic form at or above it.
constexpr double kBoysSeam = 30.0;

enum class BoysRegime { Auto, Series, Asymptotic };

/// F_0(T) .. F_{m_max}(T). The top order comes from the series or the
/// asymptotic form, the rest from downward recurrence.
std::vector<double> boys_eval(int m_max, double T, BoysRegime regime = BoysRegime::Auto);

/// c[0]/2 + sum_{k>=1} c[k] T_k(x) by Clenshaw's backward sweep.
double clenshaw_sum(const std::vector<double>& c, double x);

/// i_0(x) .. i_{n_max}(x) by backward recurrence normalized to sinh(x)/x.
std::vector<double> miller_bessel_i(int n_max, double x);
/// Seed order used by miller_bessel_i.
int miller_start_order(int n_max, double x);

/// i_0 .. i_{n_max} by the (unstable) upward recurrence from exact i_0, i_1.
std::vector<double> upward_bessel_i(int n_max, double x);

struct RysCoeffs {
    std::vector<double> alpha;
    std::vector<double> beta;
};

/// alpha[k] = F[k+1]/F[k], beta[k] = (F[k] F[k+2] - F[k+1]^2) / F[k]^2.
RysCoeffs rys_coeffs(const std::vector<double>& F);

using CoeffFn = std::function<double(int)>;

/// Jacobi matrix of P_n = (A_n x + B_n) P_{n-1} - C_n P_{n-2}, n = 1..size.
TridiagSym jacobi_matrix(const CoeffFn& A, const CoeffFn& B, const CoeffFn& C, int size);

/// Implicit-shift QL keeping only the first row of the eigenvector matrix.
Eigen tridiag_eigen(const TridiagSym& m);

QuadRule golub_welsch(const TridiagSym& m, double mu0);

/// n-point Gauss-Legendre rule through golub_welsch.
QuadRule gauss_legendre(int n);

/// `node,weight` per line, 17 significant digits.
std::string to_csv(const QuadRule& rule);

}  // namespace recursum::quad
