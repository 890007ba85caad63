#pragma once

#include <span>
#include <vector>

#include "errors.hpp"

namespace hg::tensor {

// Symmetric m x m matrix; writes go through set() which mirrors both slots so
// the storage stays symmetric to the bit.
class SymMat {
  public:
    SymMat() = default;
    explicit SymMat(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, 0.0) {}
    static SymMat identity(int n) {
        SymMat m(n);
        for (int i = 0; i < n; ++i) m.set(i, i, 1.0);
        return m;
    }

    int dim() const { return n_; }
    double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i * n_ + j)]; }
    void set(int i, int j, double v) {
        a_[static_cast<std::size_t>(i * n_ + j)] = v;
        a_[static_cast<std::size_t>(j * n_ + i)] = v;
    }
    double max_abs() const;

  private:
    int n_ = 0;
    std::vector<double> a_;
};

// Dense rank-3 array; symmetry (if any) comes from how it is filled.
class Tensor3 {
  public:
    Tensor3() = default;
    explicit Tensor3(int n) : n_(n), a_(static_cast<std::size_t>(n) * n * n, 0.0) {}
    int dim() const { return n_; }
    double operator()(int i, int j, int k) const {
        return a_[static_cast<std::size_t>((i * n_ + j) * n_ + k)];
    }
    double& at(int i, int j, int k) { return a_[static_cast<std::size_t>((i * n_ + j) * n_ + k)]; }
    double max_abs() const;

  private:
    int n_ = 0;
    std::vector<double> a_;
};

// Dense rank-4 array with the argument-order convention
// T[a][b][c][d] := T(Y_a, Y_b, Y_c, Y_d). The hessian-symmetric flag marks
// tensors verified to be symmetric within each index pair and under the pair
// swap, the precondition for the quadratic-form view.
class Tensor4 {
  public:
    Tensor4() = default;
    explicit Tensor4(int n) : n_(n), a_(static_cast<std::size_t>(n) * n * n * n, 0.0) {}
    int dim() const { return n_; }
    double operator()(int a, int b, int c, int d) const {
        return a_[static_cast<std::size_t>(((a * n_ + b) * n_ + c) * n_ + d)];
    }
    double& at(int a, int b, int c, int d) {
        return a_[static_cast<std::size_t>(((a * n_ + b) * n_ + c) * n_ + d)];
    }
    double max_abs() const;
    bool hessian_symmetric() const { return hessian_symmetric_; }
    void mark_hessian_symmetric() { hessian_symmetric_ = true; }

    // Max relative deviation from the pair symmetries (0 when the tensor is 0).
    double pair_symmetry_residual() const;
    // Canonically symmetrized copy with the flag set; throws if the input
    // violates the symmetries beyond rel_tol.
    Tensor4 symmetrized_checked(double rel_tol) const;

  private:
    int n_ = 0;
    std::vector<double> a_;
    bool hessian_symmetric_ = false;
};

// Quadratic form on symmetric 2-tensors in the fixed basis
// {e_u (.) e_v : u <= v}, ordered lexicographically, where
// e_u (.) e_v = e_u x e_v + e_v x e_u for u < v and e_u x e_u on the diagonal.
class SymPairForm {
  public:
    SymPairForm() = default;
    explicit SymPairForm(int m)
        : m_(m), dim_(m * (m + 1) / 2), a_(static_cast<std::size_t>(dim_) * dim_, 0.0) {}
    int base_dim() const { return m_; }
    int dim() const { return dim_; }
    int index(int u, int v) const;  // u <= v
    double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i * dim_ + j)]; }
    double& at(int i, int j) { return a_[static_cast<std::size_t>(i * dim_ + j)]; }
    double max_abs() const;

    // Coordinates of a symmetric 2-tensor in the (.)-basis.
    std::vector<double> coordinates(const SymMat& tau) const;
    // Form value B(tau, tau).
    double operator()(const SymMat& tau) const;

  private:
    int m_ = 0, dim_ = 0;
    std::vector<double> a_;
};

// Inverse of a (possibly indefinite) symmetric matrix; throws
// SingularMetricError when |det| <= 1e-12 * max|entry|^m.
SymMat invert(const SymMat& g);
double determinant(const SymMat& g);

// Index raising: (#nu)^{uv} = g^{ua} g^{vb} nu_{ab}.
SymMat sharp(const SymMat& nu, const SymMat& g_inv);

// The bilinear form B(tau, sigma) = T_{uvst} tau^{uv} sigma^{st} restricted to
// the (.)-basis. Requires the hessian-symmetric flag.
SymPairForm quad_form(const Tensor4& T);

struct GenEigResult {
    std::vector<double> eigenvalues;     // ascending
    std::vector<SymMat> eigenvectors;    // Gf-orthonormal, as symmetric 2-tensors
};

// Generalized symmetric-definite eigenproblem Qf v = lambda Gf v via Cholesky
// reduction and cyclic Jacobi. Deterministic: ascending eigenvalues, each
// eigenvector sign-fixed (first nonzero component positive), ties ordered by
// lexicographically larger coordinate vector first.
GenEigResult gen_eig(const SymPairForm& Qf, const SymPairForm& Gf);

}  // namespace hg::tensor
