#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jet.hpp"
#include "tensor.hpp"

namespace hg::hess {

// Everything the chart geometry derives from one potential at one point, in
// the coordinate (parallel) frame of the affine chart.
//
// Index conventions (argument order of the covariant tensors):
//   gamma(k,u,v)    Christoffel symbols of g
//   dgamma(c,k,a,b) partial derivative of gamma(k,a,b) along c
//   q[a][b][c][d]   Hessian curvature, q = g_{ak} dgamma(b,k,c,d)
//   qmix            mixed covariant derivative, same lowering as q
//   r[a][b][c][d]   Riemann tensor, r = g(Y_a, R(Y_c, Y_d) Y_b)
//   gp              metric pair tensor g_ac g_bd + g_ad g_bc
struct HessPackage {
    int dim = 0;
    std::vector<double> point;
    tensor::SymMat g, g_inv;
    tensor::Tensor3 c;    // third partials of the potential
    tensor::Tensor4 dc;   // fourth partials
    tensor::Tensor3 gamma;
    tensor::Tensor4 dgamma;
    tensor::Tensor4 q, qmix, r, gp;
};

HessPackage build_package(const jet::DerivStack& stack);

// Levi-Civita coefficients from a metric and its first derivatives,
// dg(k, i, j) = d_k g_ij.
tensor::Tensor3 levi_civita(const tensor::SymMat& g, const tensor::Tensor3& dg);
tensor::Tensor3 levi_civita_pre(const tensor::SymMat& g_inv, const tensor::Tensor3& dg);

// d_c Gamma^k_{ab} from metric derivatives to second order,
// ddg(c, a, i, j) = d_c d_a g_ij.
tensor::Tensor4 christoffel_derivative(const tensor::SymMat& g_inv, const tensor::Tensor3& dg,
                                       const tensor::Tensor4& ddg);

// Definitional Hessian curvature in closed form:
// q[a][b][c][d] = 1/2 dc(a,b,c,d) - 1/2 c(a,b,p) g^{pq} c(q,c,d),
// which is exactly g_{ak} d_b Gamma^k_{cd} with Gamma = 1/2 g^-1 c.
tensor::Tensor4 hessian_curvature(const tensor::SymMat& g_inv, const tensor::Tensor3& c,
                                  const tensor::Tensor4& dc);

// The two printed variants of the curvature-from-Cartan formula, evaluated
// against a reference tensor.
struct QcucAudit {
    tensor::Tensor4 printed;         // dC - 2 gamma(nabla, nabla) terms
    tensor::Tensor4 half_corrected;  // 1/2 dC - 2 gamma(nabla, nabla) terms
    double printed_residual = 0.0;   // max-abs vs reference / max(1, |ref|)
    double half_residual = 0.0;
    enum class Match { printed, half_corrected, both, none } match = Match::none;
};
QcucAudit qcuc_audit(const tensor::Tensor4& dc, const tensor::Tensor3& gamma,
                     const tensor::SymMat& g, const tensor::Tensor4& q_ref, double tol);

// Mixed covariant derivative, lowered:
// qmix[a][b][c][d] = g_{ak} (dgamma(b,k,c,d) - G^k_{pd} G^p_{bc} - G^k_{cp} G^p_{bd}).
tensor::Tensor4 mixed_derivative(const tensor::Tensor3& gamma, const tensor::Tensor4& dgamma,
                                 const tensor::SymMat& g);

// Lowered Riemann tensor of the connection given by gamma.
tensor::Tensor4 riemann(const tensor::Tensor3& gamma, const tensor::Tensor4& dgamma,
                        const tensor::SymMat& g);

// g_ac g_bd + g_ad g_bc; carries the same pair symmetries as q.
tensor::Tensor4 pair_tensor(const tensor::SymMat& g);

// Conical curvature of the cone nu: ratio of the two quadratic forms
// evaluated on the raised cone. Throws DomainError on a null cone.
double conical_curvature(const HessPackage& pkg, const tensor::SymMat& nu);

struct CurvatureAudit {
    bool pointwise_proportional = false;
    bool constant = false;
    std::vector<double> f;               // per-point least-squares factor
    double max_proportional_residual = 0.0;  // max |q - f gp| / max(1, |q|)
    double max_f_spread = 0.0;
    bool sectional_checked = false;
    double sectional_max_diff = 0.0;     // max |K(plane) + f/2|
};
CurvatureAudit constant_curvature_audit(std::span<const HessPackage> pkgs, std::uint64_t seed);

struct IdentityResiduals {
    // identity residuals, normalized by max(1, tensor scale)
    double relrq = 0.0;
    double rsiqgotic = 0.0;
    double exprqgotic = 0.0;
    double phic = 0.0;      // lowered Gamma vs half the Cartan tensor
    double torsion = 0.0;   // Gamma antisymmetric part (absolute)
    // symmetry residuals, relative to each tensor's own scale
    double sym_q = 0.0;
    double sym_qmix = 0.0;
    double r_antisym = 0.0;
    double r_pair = 0.0;
    double r_bianchi = 0.0;
    // tensor scales
    double q_max = 0.0, qmix_max = 0.0, r_max = 0.0, c_max = 0.0;
};
IdentityResiduals identity_suite(const HessPackage& pkg);

// Slot-permutation audit: which assignments sigma of the curvature arguments
// into the four slots of t satisfy
//   r[z] = factor * (t[sigma(z)] - t[sigma(z with last two swapped)])
// entrywise. Returns the passing permutations as digit strings ("1342" means
// t's slots receive arguments 1,3,4,2).
std::vector<std::string> audit_permutations(const tensor::Tensor4& r, const tensor::Tensor4& t,
                                            double factor, double tol);

// Canonical slot assignment used by the identity suite and the leaf check.
inline constexpr const char* kCanonicalPermutation = "1342";

}  // namespace hg::hess
