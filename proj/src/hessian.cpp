#include "hessian.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "splitmix.hpp"

namespace hg::hess {

using tensor::SymMat;
using tensor::Tensor3;
using tensor::Tensor4;

namespace {

double norm1(double resid, double scale) { return resid / std::max(1.0, scale); }

}  // namespace

tensor::Tensor3 levi_civita_pre(const SymMat& g_inv, const Tensor3& dg) {
    const int n = g_inv.dim();
    Tensor3 gamma(n);
    for (int k = 0; k < n; ++k)
        for (int u = 0; u < n; ++u)
            for (int v = 0; v < n; ++v) {
                double acc = 0.0;
                for (int p = 0; p < n; ++p)
                    acc += g_inv(k, p) * (dg(u, p, v) + dg(v, p, u) - dg(p, u, v));
                gamma.at(k, u, v) = 0.5 * acc;
            }
    return gamma;
}

tensor::Tensor3 levi_civita(const SymMat& g, const Tensor3& dg) {
    return levi_civita_pre(tensor::invert(g), dg);
}

tensor::Tensor4 christoffel_derivative(const SymMat& g_inv, const Tensor3& dg,
                                       const Tensor4& ddg) {
    const int n = g_inv.dim();
    // d_c g^{kp} = -g^{kq} (d_c g_{qr}) g^{rp}
    Tensor3 dginv(n);
    for (int c = 0; c < n; ++c)
        for (int k = 0; k < n; ++k)
            for (int p = 0; p < n; ++p) {
                double acc = 0.0;
                for (int q = 0; q < n; ++q)
                    for (int r = 0; r < n; ++r) acc += g_inv(k, q) * dg(c, q, r) * g_inv(r, p);
                dginv.at(c, k, p) = -acc;
            }
    Tensor4 out(n);
    for (int c = 0; c < n; ++c)
        for (int k = 0; k < n; ++k)
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    double acc = 0.0;
                    for (int p = 0; p < n; ++p) {
                        acc += dginv(c, k, p) * (dg(a, p, b) + dg(b, p, a) - dg(p, a, b));
                        acc += g_inv(k, p) *
                               (ddg(c, a, p, b) + ddg(c, b, p, a) - ddg(c, p, a, b));
                    }
                    out.at(c, k, a, b) = 0.5 * acc;
                }
    return out;
}

tensor::Tensor4 hessian_curvature(const SymMat& g_inv, const Tensor3& c, const Tensor4& dc) {
    const int n = g_inv.dim();
    // raised(p, a, b) = g^{pq} c_{qab}
    Tensor3 raised(n);
    for (int p = 0; p < n; ++p)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                double acc = 0.0;
                for (int q = 0; q < n; ++q) acc += g_inv(p, q) * c(q, a, b);
                raised.at(p, a, b) = acc;
            }
    Tensor4 q(n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int s = 0; s < n; ++s)
                for (int t = 0; t < n; ++t) {
                    double acc = 0.0;
                    for (int p = 0; p < n; ++p) acc += c(a, b, p) * raised(p, s, t);
                    q.at(a, b, s, t) = 0.5 * dc(a, b, s, t) - 0.5 * acc;
                }
    return q;
}

QcucAudit qcuc_audit(const Tensor4& dc, const Tensor3& gamma, const SymMat& g,
                     const Tensor4& q_ref, double tol) {
    const int n = g.dim();
    QcucAudit out;
    out.printed = Tensor4(n);
    out.half_corrected = Tensor4(n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int s = 0; s < n; ++s)
                for (int t = 0; t < n; ++t) {
                    // gamma(nabla_{Y_b} Y_a, nabla_{Y_s} Y_t)
                    double cross = 0.0;
                    for (int k = 0; k < n; ++k)
                        for (int l = 0; l < n; ++l)
                            cross += g(k, l) * gamma(k, b, a) * gamma(l, s, t);
                    const double dterm = dc(b, a, s, t);  // Y_b differentiates C(Y_a, Y_s, Y_t)
                    out.printed.at(a, b, s, t) = dterm - 2.0 * cross;
                    out.half_corrected.at(a, b, s, t) = 0.5 * dterm - 2.0 * cross;
                }
    const double scale = std::max(1.0, q_ref.max_abs());
    double rp = 0.0, rh = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int s = 0; s < n; ++s)
                for (int t = 0; t < n; ++t) {
                    rp = std::max(rp, std::abs(out.printed(a, b, s, t) - q_ref(a, b, s, t)));
                    rh = std::max(rh,
                                  std::abs(out.half_corrected(a, b, s, t) - q_ref(a, b, s, t)));
                }
    out.printed_residual = rp / scale;
    out.half_residual = rh / scale;
    const bool pm = out.printed_residual <= tol;
    const bool hm = out.half_residual <= tol;
    out.match = pm && hm ? QcucAudit::Match::both
                : hm     ? QcucAudit::Match::half_corrected
                : pm     ? QcucAudit::Match::printed
                         : QcucAudit::Match::none;
    return out;
}

tensor::Tensor4 mixed_derivative(const Tensor3& gamma, const Tensor4& dgamma, const SymMat& g) {
    const int n = g.dim();
    Tensor4 out(n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int s = 0; s < n; ++s)
                for (int t = 0; t < n; ++t) {
                    double acc = 0.0;
                    for (int k = 0; k < n; ++k) {
                        double op = dgamma(b, k, s, t);
                        for (int p = 0; p < n; ++p)
                            op -= gamma(k, p, t) * gamma(p, b, s) +
                                  gamma(k, s, p) * gamma(p, b, t);
                        acc += g(a, k) * op;
                    }
                    out.at(a, b, s, t) = acc;
                }
    return out;
}

tensor::Tensor4 riemann(const Tensor3& gamma, const Tensor4& dgamma, const SymMat& g) {
    const int n = g.dim();
    Tensor4 out(n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    double acc = 0.0;
                    for (int k = 0; k < n; ++k) {
                        double op = dgamma(c, k, d, b) - dgamma(d, k, c, b);
                        for (int p = 0; p < n; ++p)
                            op += gamma(k, c, p) * gamma(p, d, b) -
                                  gamma(k, d, p) * gamma(p, c, b);
                        acc += g(a, k) * op;
                    }
                    out.at(a, b, c, d) = acc;
                }
    return out;
}

tensor::Tensor4 pair_tensor(const SymMat& g) {
    const int n = g.dim();
    Tensor4 out(n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d)
                    out.at(a, b, c, d) = g(a, c) * g(b, d) + g(a, d) * g(b, c);
    out.mark_hessian_symmetric();
    return out;
}

HessPackage build_package(const jet::DerivStack& stack) {
    const int n = stack.dim;
    HessPackage p;
    p.dim = n;
    p.point = stack.point;
    p.g = SymMat(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) p.g.set(i, j, stack.g2(i, j));
    p.g_inv = tensor::invert(p.g);
    p.c = Tensor3(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) p.c.at(i, j, k) = stack.g3(i, j, k);
    p.dc = Tensor4(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) p.dc.at(i, j, k, l) = stack.g4(i, j, k, l);
    p.gamma = levi_civita_pre(p.g_inv, p.c);
    p.dgamma = christoffel_derivative(p.g_inv, p.c, p.dc);
    p.q = hessian_curvature(p.g_inv, p.c, p.dc);
    p.qmix = mixed_derivative(p.gamma, p.dgamma, p.g);
    p.r = riemann(p.gamma, p.dgamma, p.g);
    p.gp = pair_tensor(p.g);
    return p;
}

double conical_curvature(const HessPackage& pkg, const tensor::SymMat& nu) {
    const tensor::SymMat tau = tensor::sharp(nu, pkg.g_inv);
    const tensor::SymPairForm qf = tensor::quad_form(pkg.q.symmetrized_checked(1e-10));
    const tensor::SymPairForm gf = tensor::quad_form(pkg.gp);
    const double den = gf(tau);
    const auto coords = gf.coordinates(tau);
    double cnorm = 0.0;
    for (double x : coords) cnorm += x * x;
    const double floor = 1e-12 * std::max(gf.max_abs() * cnorm, 1e-300);
    if (std::abs(den) <= floor)
        throw DomainError("null cone: conical curvature undefined", "conical_curvature");
    return qf(tau) / den;
}

CurvatureAudit constant_curvature_audit(std::span<const HessPackage> pkgs, std::uint64_t seed) {
    CurvatureAudit out;
    if (pkgs.empty()) return out;
    out.pointwise_proportional = true;
    for (const auto& p : pkgs) {
        const int n = p.dim;
        double num = 0.0, den = 0.0;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c)
                    for (int d = 0; d < n; ++d) {
                        num += p.q(a, b, c, d) * p.gp(a, b, c, d);
                        den += p.gp(a, b, c, d) * p.gp(a, b, c, d);
                    }
        const double f = num / den;
        double resid = 0.0;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c)
                    for (int d = 0; d < n; ++d)
                        resid = std::max(resid,
                                         std::abs(p.q(a, b, c, d) - f * p.gp(a, b, c, d)));
        out.f.push_back(f);
        const double qmax = p.q.max_abs();
        if (!(resid <= 1e-8 * qmax)) out.pointwise_proportional = false;
        out.max_proportional_residual =
            std::max(out.max_proportional_residual, norm1(resid, qmax));
    }
    double fmin = out.f[0], fmax = out.f[0], fsum = 0.0;
    for (double f : out.f) {
        fmin = std::min(fmin, f);
        fmax = std::max(fmax, f);
        fsum += f;
    }
    const double fmean = fsum / static_cast<double>(out.f.size());
    out.max_f_spread = fmax - fmin;
    out.constant = out.max_f_spread <= 1e-6 * (1.0 + std::abs(fmean));

    const int m = pkgs[0].dim;
    if (out.pointwise_proportional && m >= 2) {
        out.sectional_checked = true;
        SplitMix64 rng(seed ^ 0x5ec7100aull);
        for (std::size_t pi = 0; pi < pkgs.size(); ++pi) {
            const auto& p = pkgs[pi];
            const double f = out.f[pi];
            for (int plane = 0; plane < 10; ++plane) {
                std::vector<double> X(static_cast<std::size_t>(m)), Y(static_cast<std::size_t>(m));
                double den = 0.0;
                double gscale = std::max(p.g.max_abs(), 1e-300);
                do {
                    for (auto& x : X) x = rng.uniform(-1.0, 1.0);
                    for (auto& y : Y) y = rng.uniform(-1.0, 1.0);
                    double gxx = 0.0, gyy = 0.0, gxy = 0.0;
                    for (int i = 0; i < m; ++i)
                        for (int j = 0; j < m; ++j) {
                            gxx += p.g(i, j) * X[static_cast<std::size_t>(i)] *
                                   X[static_cast<std::size_t>(j)];
                            gyy += p.g(i, j) * Y[static_cast<std::size_t>(i)] *
                                   Y[static_cast<std::size_t>(j)];
                            gxy += p.g(i, j) * X[static_cast<std::size_t>(i)] *
                                   Y[static_cast<std::size_t>(j)];
                        }
                    den = gxx * gyy - gxy * gxy;
                } while (std::abs(den) < 1e-3 * gscale * gscale);
                double num = 0.0;
                for (int a = 0; a < m; ++a)
                    for (int b = 0; b < m; ++b)
                        for (int c = 0; c < m; ++c)
                            for (int d = 0; d < m; ++d)
                                num += p.r(a, b, c, d) * X[static_cast<std::size_t>(a)] *
                                       Y[static_cast<std::size_t>(b)] *
                                       X[static_cast<std::size_t>(c)] *
                                       Y[static_cast<std::size_t>(d)];
                const double K = num / den;
                out.sectional_max_diff = std::max(out.sectional_max_diff, std::abs(K + 0.5 * f));
            }
        }
    }
    return out;
}

namespace {

using Perm = std::array<int, 4>;

double permutation_residual(const Tensor4& r, const Tensor4& t, const Perm& s, double factor) {
    const int n = r.dim();
    double resid = 0.0;
    int z[4];
    for (z[0] = 0; z[0] < n; ++z[0])
        for (z[1] = 0; z[1] < n; ++z[1])
            for (z[2] = 0; z[2] < n; ++z[2])
                for (z[3] = 0; z[3] < n; ++z[3]) {
                    const int zs[4] = {z[0], z[1], z[3], z[2]};  // plane slots swapped
                    const double lhs = r(z[0], z[1], z[2], z[3]);
                    const double rhs =
                        factor * (t(z[s[0]], z[s[1]], z[s[2]], z[s[3]]) -
                                  t(zs[s[0]], zs[s[1]], zs[s[2]], zs[s[3]]));
                    resid = std::max(resid, std::abs(lhs - rhs));
                }
    return resid;
}

Perm parse_perm(const char* digits) {
    Perm p{};
    for (int i = 0; i < 4; ++i) p[static_cast<std::size_t>(i)] = digits[i] - '1';
    return p;
}

}  // namespace

std::vector<std::string> audit_permutations(const Tensor4& r, const Tensor4& t, double factor,
                                            double tol) {
    std::vector<std::string> passing;
    Perm p = {0, 1, 2, 3};
    const double scale = std::max(1.0, t.max_abs());
    do {
        const double resid = permutation_residual(r, t, p, factor);
        if (resid <= tol * scale) {
            std::string s;
            for (int i : p) s += static_cast<char>('1' + i);
            passing.push_back(s);
        }
    } while (std::next_permutation(p.begin(), p.end()));
    return passing;
}

IdentityResiduals identity_suite(const HessPackage& pkg) {
    const int n = pkg.dim;
    IdentityResiduals out;
    out.q_max = pkg.q.max_abs();
    out.qmix_max = pkg.qmix.max_abs();
    out.r_max = pkg.r.max_abs();
    out.c_max = pkg.c.max_abs();

    const Perm canon = parse_perm(kCanonicalPermutation);
    out.relrq = norm1(permutation_residual(pkg.r, pkg.q, canon, 0.5), out.q_max);
    out.rsiqgotic = norm1(permutation_residual(pkg.r, pkg.qmix, canon, 1.0),
                          std::max(out.q_max, out.qmix_max));

    // q - qmix vs the two Christoffel product terms, both sides independent
    double rexpr = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int s = 0; s < n; ++s)
                for (int t = 0; t < n; ++t) {
                    double prod = 0.0;
                    for (int k = 0; k < n; ++k)
                        for (int l = 0; l < n; ++l)
                            prod += pkg.g(k, l) * (pkg.gamma(k, b, s) * pkg.gamma(l, a, t) +
                                                   pkg.gamma(k, b, t) * pkg.gamma(l, a, s));
                    rexpr = std::max(rexpr, std::abs(pkg.q(a, b, s, t) - pkg.qmix(a, b, s, t) -
                                                     prod));
                }
    out.exprqgotic = norm1(rexpr, out.q_max);

    double rphic = 0.0, rtors = 0.0;
    for (int w = 0; w < n; ++w)
        for (int u = 0; u < n; ++u)
            for (int v = 0; v < n; ++v) {
                double low = 0.0;
                for (int k = 0; k < n; ++k) low += pkg.g(w, k) * pkg.gamma(k, u, v);
                rphic = std::max(rphic, std::abs(low - 0.5 * pkg.c(w, u, v)));
                rtors = std::max(rtors, std::abs(pkg.gamma(w, u, v) - pkg.gamma(w, v, u)));
            }
    out.phic = norm1(rphic, out.c_max);
    out.torsion = rtors;

    out.sym_q = pkg.q.pair_symmetry_residual();
    out.sym_qmix = pkg.qmix.pair_symmetry_residual();

    double ranti = 0.0, rpair = 0.0, rbia = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    ranti = std::max(ranti, std::abs(pkg.r(a, b, c, d) + pkg.r(a, b, d, c)));
                    rpair = std::max(rpair, std::abs(pkg.r(a, b, c, d) - pkg.r(c, d, a, b)));
                    rbia = std::max(rbia, std::abs(pkg.r(a, b, c, d) + pkg.r(a, c, d, b) +
                                                   pkg.r(a, d, b, c)));
                }
    // R can vanish identically while its building blocks do not (rank-one
    // Cartan tensors), so normalize against the curvature scale of the chart
    // rather than R's own residue.
    const double rscale = std::max(1.0, std::max(out.q_max, out.r_max));
    out.r_antisym = ranti / rscale;
    out.r_pair = rpair / rscale;
    out.r_bianchi = rbia / rscale;
    return out;
}

}  // namespace hg::hess
