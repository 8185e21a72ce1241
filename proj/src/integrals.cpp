#include "recursum/integrals.hpp"

#include "recursum/error.hpp"
#include "recursum/kernel_abi.hpp"
#include "recursum/library.hpp"
#include "recursum/quadrature.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

namespace recursum::integrals {

namespace kernels = recursum::kernels;

void ToySystem::check() const {
    if (shells.size() > kMaxShells) {
        fail(ErrorCode::DomainError, std::to_string(shells.size()) + " shells, at most " + std::to_string(kMaxShells));
    }
    for (const Shell& s : shells) {
        if (s.l < 0 || s.l > 1) fail(ErrorCode::DomainError, "shell l = " + std::to_string(s.l) + ", only s and p");
        if (!(s.exponent > 0.0)) fail(ErrorCode::DomainError, "shell exponent must be positive");
    }
}

std::size_t ToySystem::n_basis() const {
    std::size_t n = 0;
    for (const Shell& s : shells) n += s.l == 0 ? 1 : 3;
    return n;
}

double SymMatrix::max_asymmetry() const {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) m = std::max(m, std::abs((*this)(i, j) - (*this)(j, i)));
    }
    return m;
}

double SymMatrix::frobenius() const {
    double s = 0.0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
}

double rel_frobenius(const SymMatrix& x, const SymMatrix& y) {
    if (x.n != y.n) fail(ErrorCode::DimensionMismatch, "matrix sizes differ");
    double s = 0.0;
    for (std::size_t k = 0; k < x.a.size(); ++k) s += (x.a[k] - y.a[k]) * (x.a[k] - y.a[k]);
    return std::sqrt(s) / std::max(1e-300, y.frobenius());
}

GaussianProduct gaussian_product(const Vec3& A, double a, const Vec3& B, double b) {
    GaussianProduct g;
    g.p = a + b;
    double r2 = 0.0;
    for (int d = 0; d < 3; ++d) {
        g.P[d] = (a * A[d] + b * B[d]) / g.p;
        r2 += (A[d] - B[d]) * (A[d] - B[d]);
    }
    g.Kab = std::exp(-(a * b / g.p) * r2);
    return g;
}

namespace {

using Cart = std::array<int, 3>;

struct BasisFn {
    std::size_t shell;
    Cart l;
};

std::vector<BasisFn> basis(const ToySystem& sys) {
    std::vector<BasisFn> out;
    for (std::size_t s = 0; s < sys.shells.size(); ++s) {
        if (sys.shells[s].l == 0) {
            out.push_back({s, {0, 0, 0}});
        } else {
            for (int d = 0; d < 3; ++d) {
                Cart c{0, 0, 0};
                c[static_cast<std::size_t>(d)] = 1;
                out.push_back({s, c});
            }
        }
    }
    return out;
}

void check_density(const ToySystem& sys, const SymMatrix& D) {
    sys.check();
    if (D.n != sys.n_basis() || D.a.size() != D.n * D.n) {
        fail(ErrorCode::DimensionMismatch, "density is " + std::to_string(D.n) + "x" + std::to_string(D.n) +
                                               ", basis has " + std::to_string(sys.n_basis()) + " functions");
    }
}

double prefactor(double p, double q) { return 2.0 * std::pow(std::numbers::pi, 2.5) / (p * q * std::sqrt(p + q)); }

// Hermite indices per axis never exceed 2 for s/p pairs, 4 for quartets.
constexpr int kHermiteSide = 3;
constexpr int kRSide = 5;

int hidx(const Cart& t) { return (t[0] * kHermiteSide + t[1]) * kHermiteSide + t[2]; }

struct HTerm {
    Cart t;
    double c;
};

// ---------------------------------------------------------------------------
// Kernel-backed E and R.

class Kernels {
public:
    explicit Kernels(RSource r) : r_source_(r) {
        const kernels::KernelSet* e = kernels::find_kernel_set("hermite_e", "layered");
        if (!e) fail(ErrorCode::UnsupportedConstruct, "no compiled hermite_e layered kernels");
        for (int k = 0; k < e->n_layers; ++k) {
            layers_[{e->layers[k].layer[0], e->layers[k].layer[1]}] = &e->layers[k];
        }
        r_ = kernels::find_kernel_set("coulomb_R", r == RSource::Unrolled ? "unrolled" : "runtime");
        if (!r_) fail(ErrorCode::UnsupportedConstruct, "no compiled coulomb_R kernels");
        for (int k = 0; k < r_->n_unrolled; ++k) {
            const int* t = r_->unrolled[k].tuple;
            if (t[3] == 0) r_fns_[{t[0], t[1], t[2]}] = r_->unrolled[k].fn;
        }
    }

    // E^{ij}_t for t = 0..i+j along one axis.
    std::vector<double> e_layer(int i, int j, double inv_2p, double pa, double pb) const {
        auto it = layers_.find({i, j});
        if (it == layers_.end()) fail(ErrorCode::BoundsTooLarge, "no Hermite layer compiled");
        const double s[] = {inv_2p, pa, pb};
        kernels::KernelArgs args;
        args.scalars = s;
        std::vector<double> out(static_cast<std::size_t>(it->second->length));
        it->second->fn(args, out.data());
        return out;
    }

    // R^{(0)}_{tuv} for t+u+v <= L, indexed (t*kRSide+u)*kRSide+v.
    std::vector<double> r_table(int L, double alpha, const Vec3& PQ) const {
        const double T = alpha * (PQ[0] * PQ[0] + PQ[1] * PQ[1] + PQ[2] * PQ[2]);
        const std::vector<double> F = quad::boys_eval(8, T);
        std::vector<double> fm(9);
        double f = 1.0;
        for (int m = 0; m < 9; ++m) {
            fm[static_cast<std::size_t>(m)] = f * F[static_cast<std::size_t>(m)];
            f *= -2.0 * alpha;
        }
        const double* seqs[] = {fm.data()};
        const int lens[] = {9};
        kernels::KernelArgs args;
        args.scalars = PQ.data();
        args.seqs = seqs;
        args.seq_lens = lens;
        std::vector<double> out(kRSide * kRSide * kRSide, 0.0);
        const int bound[] = {4, 4, 4, 8};
        for (int t = 0; t <= L; ++t) {
            for (int u = 0; t + u <= L; ++u) {
                for (int v = 0; t + u + v <= L; ++v) {
                    double value = 0.0;
                    if (r_source_ == RSource::Unrolled) {
                        auto it = r_fns_.find({t, u, v});
                        if (it == r_fns_.end()) fail(ErrorCode::BoundsTooLarge, "no compiled R kernel");
                        value = it->second(args);
                    } else {
                        const int idx[] = {t, u, v, 0};
                        const int status = r_->runtime(args, idx, bound, &value);
                        if (status != 0) fail(ErrorCode::TableBoundExceeded, "R runtime kernel failed");
                    }
                    out[static_cast<std::size_t>((t * kRSide + u) * kRSide + v)] = value;
                }
            }
        }
        return out;
    }

private:
    RSource r_source_;
    std::map<std::pair<int, int>, const kernels::LayerEntry*> layers_;
    const kernels::KernelSet* r_ = nullptr;
    std::map<std::array<int, 3>, kernels::UnrolledFn> r_fns_;
};

double r_at(const std::vector<double>& R, const Cart& t) {
    return R[static_cast<std::size_t>((t[0] * kRSide + t[1]) * kRSide + t[2])];
}

// Hermite expansion of one product of basis functions on a shell pair.
struct PairData {
    GaussianProduct g;
    int L = 0;  // la + lb
    std::map<std::pair<std::size_t, std::size_t>, std::vector<HTerm>> terms;  // (mu, nu) -> E_t
};

PairData pair_data(const ToySystem& sys, const std::vector<BasisFn>& fns, std::size_t sa, std::size_t sb,
                   const Kernels& k) {
    const Shell& A = sys.shells[sa];
    const Shell& B = sys.shells[sb];
    PairData pd;
    pd.g = gaussian_product(A.center, A.exponent, B.center, B.exponent);
    pd.L = A.l + B.l;
    const double inv_2p = 0.5 / pd.g.p;
    for (std::size_t m = 0; m < fns.size(); ++m) {
        if (fns[m].shell != sa) continue;
        for (std::size_t n = 0; n < fns.size(); ++n) {
            if (fns[n].shell != sb) continue;
            std::array<std::vector<double>, 3> e;
            for (std::size_t d = 0; d < 3; ++d) {
                e[d] = k.e_layer(fns[m].l[d], fns[n].l[d], inv_2p, pd.g.P[d] - A.center[d], pd.g.P[d] - B.center[d]);
            }
            std::vector<HTerm> ts;
            for (std::size_t x = 0; x < e[0].size(); ++x) {
                for (std::size_t y = 0; y < e[1].size(); ++y) {
                    for (std::size_t z = 0; z < e[2].size(); ++z) {
                        ts.push_back({{static_cast<int>(x), static_cast<int>(y), static_cast<int>(z)},
                                      pd.g.Kab * e[0][x] * e[1][y] * e[2][z]});
                    }
                }
            }
            pd.terms[{m, n}] = std::move(ts);
        }
    }
    return pd;
}

Cart add(const Cart& a, const Cart& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }

double phase(const Cart& u, bool flip) {
    if (flip) return 1.0;
    return (u[0] + u[1] + u[2]) % 2 == 0 ? 1.0 : -1.0;
}

Vec3 diff(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

}  // namespace

SymMatrix build_J(const ToySystem& sys, const SymMatrix& D, const BuildOptions& opts) {
    check_density(sys, D);
    const Kernels k(opts.r_source);
    const std::vector<BasisFn> fns = basis(sys);
    const std::size_t ns = sys.shells.size();

    std::vector<PairData> pairs;
    for (std::size_t a = 0; a < ns; ++a) {
        for (std::size_t b = 0; b < ns; ++b) pairs.push_back(pair_data(sys, fns, a, b, k));
    }

    // Phase 1: Hermite density D_u(Q) per shell pair.
    std::vector<std::vector<double>> dens(pairs.size(), std::vector<double>(kHermiteSide * kHermiteSide * kHermiteSide, 0.0));
    for (std::size_t q = 0; q < pairs.size(); ++q) {
        for (const auto& [ls, terms] : pairs[q].terms) {
            const double d = D(ls.first, ls.second);
            for (const HTerm& h : terms) dens[q][static_cast<std::size_t>(hidx(h.t))] += d * h.c * phase(h.t, opts.flip_phase);
        }
    }

    SymMatrix J(D.n);
    for (const PairData& P : pairs) {
        // Phase 2: Hermite potential V_t(P).
        std::vector<double> V(kHermiteSide * kHermiteSide * kHermiteSide, 0.0);
        for (std::size_t q = 0; q < pairs.size(); ++q) {
            const PairData& Q = pairs[q];
            const double alpha = P.g.p * Q.g.p / (P.g.p + Q.g.p);
            const std::vector<double> R = k.r_table(P.L + Q.L, alpha, diff(P.g.P, Q.g.P));
            const double pref = prefactor(P.g.p, Q.g.p);
            for (int tx = 0; tx <= P.L; ++tx) {
                for (int ty = 0; tx + ty <= P.L; ++ty) {
                    for (int tz = 0; tx + ty + tz <= P.L; ++tz) {
                        const Cart t{tx, ty, tz};
                        double acc = 0.0;
                        for (int ux = 0; ux <= Q.L; ++ux) {
                            for (int uy = 0; ux + uy <= Q.L; ++uy) {
                                for (int uz = 0; ux + uy + uz <= Q.L; ++uz) {
                                    const Cart u{ux, uy, uz};
                                    acc += dens[q][static_cast<std::size_t>(hidx(u))] * r_at(R, add(t, u));
                                }
                            }
                        }
                        V[static_cast<std::size_t>(hidx(t))] += pref * acc;
                    }
                }
            }
        }
        // Phase 3: contract to J.
        for (const auto& [mn, terms] : P.terms) {
            double acc = 0.0;
            for (const HTerm& h : terms) acc += h.c * V[static_cast<std::size_t>(hidx(h.t))];
            J(mn.first, mn.second) += acc;
        }
    }
    return J;
}

SymMatrix build_K(const ToySystem& sys, const SymMatrix& D, const BuildOptions& opts) {
    check_density(sys, D);
    const Kernels k(opts.r_source);
    const std::vector<BasisFn> fns = basis(sys);
    const std::size_t ns = sys.shells.size();

    std::map<std::pair<std::size_t, std::size_t>, PairData> pairs;
    for (std::size_t a = 0; a < ns; ++a) {
        for (std::size_t b = 0; b < ns; ++b) pairs.emplace(std::make_pair(a, b), pair_data(sys, fns, a, b, k));
    }

    SymMatrix K(D.n);
    for (std::size_t a = 0; a < ns; ++a) {
        for (std::size_t c = 0; c < ns; ++c) {
            const PairData& bra = pairs.at({a, c});
            for (std::size_t b = 0; b < ns; ++b) {
                for (std::size_t d = 0; d < ns; ++d) {
                    const PairData& ket = pairs.at({b, d});
                    const double alpha = bra.g.p * ket.g.p / (bra.g.p + ket.g.p);
                    const std::vector<double> R = k.r_table(bra.L + ket.L, alpha, diff(bra.g.P, ket.g.P));
                    const double pref = prefactor(bra.g.p, ket.g.p);
                    for (const auto& [ml, et] : bra.terms) {
                        for (const auto& [nsg, eu] : ket.terms) {
                            double acc = 0.0;
                            for (const HTerm& t : et) {
                                for (const HTerm& u : eu) acc += t.c * u.c * phase(u.t, opts.flip_phase) * r_at(R, add(t.t, u.t));
                            }
                            K(ml.first, nsg.first) += D(ml.second, nsg.second) * pref * acc;
                        }
                    }
                }
            }
        }
    }
    return K;
}

// ---------------------------------------------------------------------------
// Naive oracle: series E, directly recursed R.

namespace {

double r_direct(int t, int u, int v, int n, const Vec3& PQ, const std::vector<double>& fm) {
    if (t < 0 || u < 0 || v < 0) return 0.0;
    if (t == 0 && u == 0 && v == 0) return fm[static_cast<std::size_t>(n)];
    if (t > 0) return (t - 1) * r_direct(t - 2, u, v, n + 1, PQ, fm) + PQ[0] * r_direct(t - 1, u, v, n + 1, PQ, fm);
    if (u > 0) return (u - 1) * r_direct(t, u - 2, v, n + 1, PQ, fm) + PQ[1] * r_direct(t, u - 1, v, n + 1, PQ, fm);
    return (v - 1) * r_direct(t, u, v - 2, n + 1, PQ, fm) + PQ[2] * r_direct(t, u, v - 1, n + 1, PQ, fm);
}

std::vector<HTerm> naive_terms(const Shell& A, const Cart& la, const Shell& B, const Cart& lb, GaussianProduct& g) {
    g = gaussian_product(A.center, A.exponent, B.center, B.exponent);
    const double inv_2p = 0.5 / g.p;
    std::vector<HTerm> out;
    for (int x = 0; x <= la[0] + lb[0]; ++x) {
        for (int y = 0; y <= la[1] + lb[1]; ++y) {
            for (int z = 0; z <= la[2] + lb[2]; ++z) {
                double c = g.Kab;
                const int t[] = {x, y, z};
                for (std::size_t d = 0; d < 3; ++d) {
                    c *= library::hermite_e_expansion(la[d], lb[d], t[d], inv_2p, g.P[d] - A.center[d], g.P[d] - B.center[d]);
                }
                out.push_back({{x, y, z}, c});
            }
        }
    }
    return out;
}

}  // namespace

double naive_eri(const ToySystem& sys, std::size_t m, std::size_t n, std::size_t l, std::size_t s) {
    sys.check();
    const std::vector<BasisFn> fns = basis(sys);
    if (std::max({m, n, l, s}) >= fns.size()) fail(ErrorCode::DimensionMismatch, "basis index out of range");
    GaussianProduct gp, gq;
    const auto et = naive_terms(sys.shells[fns[m].shell], fns[m].l, sys.shells[fns[n].shell], fns[n].l, gp);
    const auto eu = naive_terms(sys.shells[fns[l].shell], fns[l].l, sys.shells[fns[s].shell], fns[s].l, gq);
    const double alpha = gp.p * gq.p / (gp.p + gq.p);
    const Vec3 PQ = diff(gp.P, gq.P);
    const double T = alpha * (PQ[0] * PQ[0] + PQ[1] * PQ[1] + PQ[2] * PQ[2]);
    const std::vector<double> F = quad::boys_eval(8, T);
    std::vector<double> fm(9);
    for (std::size_t k = 0; k < 9; ++k) fm[k] = std::pow(-2.0 * alpha, static_cast<double>(k)) * F[k];
    double acc = 0.0;
    for (const HTerm& t : et) {
        for (const HTerm& u : eu) {
            const Cart tu = add(t.t, u.t);
            acc += t.c * u.c * phase(u.t, false) * r_direct(tu[0], tu[1], tu[2], 0, PQ, fm);
        }
    }
    return prefactor(gp.p, gq.p) * acc;
}

std::pair<SymMatrix, SymMatrix> naive_JK(const ToySystem& sys, const SymMatrix& D) {
    check_density(sys, D);
    const std::size_t n = D.n;
    std::vector<double> eri(n * n * n * n);
    auto at = [n](std::size_t a, std::size_t b, std::size_t c, std::size_t d) { return ((a * n + b) * n + c) * n + d; };
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            for (std::size_t c = 0; c < n; ++c) {
                for (std::size_t d = 0; d < n; ++d) eri[at(a, b, c, d)] = naive_eri(sys, a, b, c, d);
            }
        }
    }
    SymMatrix J(n), K(n);
    for (std::size_t m = 0; m < n; ++m) {
        for (std::size_t v = 0; v < n; ++v) {
            for (std::size_t l = 0; l < n; ++l) {
                for (std::size_t s = 0; s < n; ++s) {
                    J(m, v) += D(l, s) * eri[at(m, v, l, s)];
                    K(m, v) += D(l, s) * eri[at(m, l, v, s)];
                }
            }
        }
    }
    return {J, K};
}

ToySystem random_system(std::uint64_t seed, std::size_t n_shells) {
    if (n_shells > kMaxShells) fail(ErrorCode::DomainError, "too many shells");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> pos(0.0, 3.0), ex(0.3, 2.0);
    std::uniform_int_distribution<int> l(0, 1);
    ToySystem sys;
    for (std::size_t k = 0; k < n_shells; ++k) {
        Shell s;
        for (double& c : s.center) c = pos(rng);
        s.l = l(rng);
        s.exponent = ex(rng);
        sys.shells.push_back(s);
    }
    return sys;
}

SymMatrix random_density(std::uint64_t seed, std::size_t n) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> v(-1.0, 1.0);
    SymMatrix D(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) D(i, j) = D(j, i) = v(rng);
    }
    return D;
}

ToySystem parse_shells(std::string_view text) {
    ToySystem sys;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        std::istringstream ls(line);
        Shell s;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (!(ls >> s.center[0])) throw ParseError(lineno, "expected `x y z l exponent`");
        if (!(ls >> s.center[1] >> s.center[2] >> s.l >> s.exponent)) {
            throw ParseError(lineno, "expected `x y z l exponent`");
        }
        std::string extra;
        if (ls >> extra) throw ParseError(lineno, "trailing text '" + extra + "'");
        sys.shells.push_back(s);
    }
    sys.check();
    return sys;
}

}  // namespace recursum::integrals
