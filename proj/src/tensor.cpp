#include "tensor.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace hg::tensor {

namespace {

double span_max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

double SymMat::max_abs() const { return span_max_abs(a_); }
double Tensor3::max_abs() const { return span_max_abs(a_); }
double Tensor4::max_abs() const { return span_max_abs(a_); }
double SymPairForm::max_abs() const { return span_max_abs(a_); }

double Tensor4::pair_symmetry_residual() const {
    const double scale = max_abs();
    if (scale == 0.0) return 0.0;
    double r = 0.0;
    for (int a = 0; a < n_; ++a)
        for (int b = 0; b < n_; ++b)
            for (int c = 0; c < n_; ++c)
                for (int d = 0; d < n_; ++d) {
                    const double v = (*this)(a, b, c, d);
                    r = std::max(r, std::abs(v - (*this)(b, a, c, d)));
                    r = std::max(r, std::abs(v - (*this)(a, b, d, c)));
                    r = std::max(r, std::abs(v - (*this)(c, d, a, b)));
                }
    return r / scale;
}

Tensor4 Tensor4::symmetrized_checked(double rel_tol) const {
    if (pair_symmetry_residual() > rel_tol)
        throw ValidationError("tensor does not satisfy the pair symmetries");
    Tensor4 out(n_);
    for (int a = 0; a < n_; ++a)
        for (int b = 0; b < n_; ++b)
            for (int c = 0; c < n_; ++c)
                for (int d = 0; d < n_; ++d) {
                    // canonical representative: sorted pairs, pairs ordered
                    int p1 = std::min(a, b), p2 = std::max(a, b);
                    int q1 = std::min(c, d), q2 = std::max(c, d);
                    if (std::pair(q1, q2) < std::pair(p1, p2)) {
                        std::swap(p1, q1);
                        std::swap(p2, q2);
                    }
                    out.at(a, b, c, d) = (*this)(p1, p2, q1, q2);
                }
    out.hessian_symmetric_ = true;
    return out;
}

int SymPairForm::index(int u, int v) const {
    // lexicographic over pairs (u, v) with u <= v
    return u * m_ - u * (u - 1) / 2 + (v - u);
}

std::vector<double> SymPairForm::coordinates(const SymMat& tau) const {
    std::vector<double> c(static_cast<std::size_t>(dim_), 0.0);
    for (int u = 0; u < m_; ++u)
        for (int v = u; v < m_; ++v) c[static_cast<std::size_t>(index(u, v))] = tau(u, v);
    return c;
}

double SymPairForm::operator()(const SymMat& tau) const {
    const auto c = coordinates(tau);
    double acc = 0.0;
    for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j)
            acc += c[static_cast<std::size_t>(i)] * (*this)(i, j) * c[static_cast<std::size_t>(j)];
    return acc;
}

double determinant(const SymMat& g) {
    const int n = g.dim();
    std::vector<double> a(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a[static_cast<std::size_t>(i * n + j)] = g(i, j);
    double det = 1.0;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[static_cast<std::size_t>(r * n + col)]) >
                std::abs(a[static_cast<std::size_t>(piv * n + col)]))
                piv = r;
        if (a[static_cast<std::size_t>(piv * n + col)] == 0.0) return 0.0;
        if (piv != col) {
            for (int j = 0; j < n; ++j)
                std::swap(a[static_cast<std::size_t>(col * n + j)],
                          a[static_cast<std::size_t>(piv * n + j)]);
            det = -det;
        }
        const double p = a[static_cast<std::size_t>(col * n + col)];
        det *= p;
        for (int r = col + 1; r < n; ++r) {
            const double f = a[static_cast<std::size_t>(r * n + col)] / p;
            for (int j = col; j < n; ++j)
                a[static_cast<std::size_t>(r * n + j)] -= f * a[static_cast<std::size_t>(col * n + j)];
        }
    }
    return det;
}

SymMat invert(const SymMat& g) {
    const int n = g.dim();
    const double scale = std::max(g.max_abs(), 1e-300);
    const double det = determinant(g);
    double thresh = 1e-12;
    for (int i = 0; i < n; ++i) thresh *= scale;
    if (std::abs(det) <= thresh)
        throw SingularMetricError(det, "singular metric: |det| = " + std::to_string(std::abs(det)));

    // Gauss-Jordan with partial pivoting on [A | I]
    std::vector<double> a(static_cast<std::size_t>(n) * 2 * n, 0.0);
    const int w = 2 * n;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) a[static_cast<std::size_t>(i * w + j)] = g(i, j);
        a[static_cast<std::size_t>(i * w + n + i)] = 1.0;
    }
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[static_cast<std::size_t>(r * w + col)]) >
                std::abs(a[static_cast<std::size_t>(piv * w + col)]))
                piv = r;
        if (piv != col)
            for (int j = 0; j < w; ++j)
                std::swap(a[static_cast<std::size_t>(col * w + j)],
                          a[static_cast<std::size_t>(piv * w + j)]);
        const double p = a[static_cast<std::size_t>(col * w + col)];
        if (p == 0.0) throw SingularMetricError(det, "singular metric: zero pivot");
        for (int j = 0; j < w; ++j) a[static_cast<std::size_t>(col * w + j)] /= p;
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[static_cast<std::size_t>(r * w + col)];
            if (f == 0.0) continue;
            for (int j = 0; j < w; ++j)
                a[static_cast<std::size_t>(r * w + j)] -= f * a[static_cast<std::size_t>(col * w + j)];
        }
    }
    SymMat inv(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            inv.set(i, j, 0.5 * (a[static_cast<std::size_t>(i * w + n + j)] +
                                 a[static_cast<std::size_t>(j * w + n + i)]));
    return inv;
}

SymMat sharp(const SymMat& nu, const SymMat& g_inv) {
    const int n = nu.dim();
    if (g_inv.dim() != n) throw ValidationError("sharp: dimension mismatch");
    SymMat out(n);
    for (int u = 0; u < n; ++u)
        for (int v = u; v < n; ++v) {
            double acc = 0.0;
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) acc += g_inv(u, a) * g_inv(v, b) * nu(a, b);
            out.set(u, v, acc);
        }
    return out;
}

SymPairForm quad_form(const Tensor4& T) {
    if (!T.hessian_symmetric())
        throw ValidationError("quad_form requires a tensor flagged hessian-symmetric");
    const int m = T.dim();
    SymPairForm B(m);
    struct Pair {
        int a, b;
    };
    auto expand = [](int u, int v) {
        std::vector<Pair> out;
        out.push_back({u, v});
        if (u != v) out.push_back({v, u});
        return out;
    };
    for (int u = 0; u < m; ++u)
        for (int v = u; v < m; ++v) {
            const auto left = expand(u, v);
            for (int s = 0; s < m; ++s)
                for (int t = s; t < m; ++t) {
                    const auto right = expand(s, t);
                    double acc = 0.0;
                    for (const auto& l : left)
                        for (const auto& r : right) acc += T(l.a, l.b, r.a, r.b);
                    B.at(B.index(u, v), B.index(s, t)) = acc;
                }
        }
    return B;
}

namespace {

// Lower Cholesky factor; throws when the matrix is not positive definite.
std::vector<double> cholesky(const SymPairForm& A) {
    const int n = A.dim();
    double max_diag = 0.0;
    for (int i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(A(i, i)));
    const double tol = 1e-13 * std::max(1.0, max_diag);
    std::vector<double> L(static_cast<std::size_t>(n) * n, 0.0);
    for (int j = 0; j < n; ++j) {
        double d = A(j, j);
        for (int k = 0; k < j; ++k) d -= L[static_cast<std::size_t>(j * n + k)] *
                                         L[static_cast<std::size_t>(j * n + k)];
        if (d <= tol)
            throw NotPositiveDefiniteError("form is not positive definite");
        const double ljj = std::sqrt(d);
        L[static_cast<std::size_t>(j * n + j)] = ljj;
        for (int i = j + 1; i < n; ++i) {
            double s = A(i, j);
            for (int k = 0; k < j; ++k)
                s -= L[static_cast<std::size_t>(i * n + k)] * L[static_cast<std::size_t>(j * n + k)];
            L[static_cast<std::size_t>(i * n + j)] = s / ljj;
        }
    }
    return L;
}

// Cyclic Jacobi for a dense symmetric matrix. V accumulates eigenvectors as
// columns. Deterministic sweep order.
void jacobi_sym(std::vector<double>& a, int n, std::vector<double>& V) {
    V.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) V[static_cast<std::size_t>(i * n + i)] = 1.0;
    auto at = [&](std::vector<double>& m, int i, int j) -> double& {
        return m[static_cast<std::size_t>(i * n + j)];
    };
    double frob = 0.0;
    for (double x : a) frob += x * x;
    frob = std::sqrt(frob);
    const double stop = 1e-15 * std::max(frob, 1e-300);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += at(a, p, q) * at(a, p, q);
        if (std::sqrt(2.0 * off) <= stop) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = at(a, p, q);
                if (apq == 0.0) continue;
                const double tau = (at(a, q, q) - at(a, p, p)) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = at(a, k, p), akq = at(a, k, q);
                    at(a, k, p) = c * akp - s * akq;
                    at(a, k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = at(a, p, k), aqk = at(a, q, k);
                    at(a, p, k) = c * apk - s * aqk;
                    at(a, q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = at(V, k, p), vkq = at(V, k, q);
                    at(V, k, p) = c * vkp - s * vkq;
                    at(V, k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
}

}  // namespace

GenEigResult gen_eig(const SymPairForm& Qf, const SymPairForm& Gf) {
    if (Qf.dim() != Gf.dim()) throw ValidationError("gen_eig: dimension mismatch");
    const int n = Qf.dim();
    const int m = Qf.base_dim();
    const auto L = cholesky(Gf);
    auto Lat = [&](int i, int j) { return L[static_cast<std::size_t>(i * n + j)]; };

    // A = L^-1 Q L^-T
    std::vector<double> Y(static_cast<std::size_t>(n) * n, 0.0);  // L Y = Q
    for (int col = 0; col < n; ++col)
        for (int i = 0; i < n; ++i) {
            double s = Qf(i, col);
            for (int k = 0; k < i; ++k) s -= Lat(i, k) * Y[static_cast<std::size_t>(k * n + col)];
            Y[static_cast<std::size_t>(i * n + col)] = s / Lat(i, i);
        }
    std::vector<double> A(static_cast<std::size_t>(n) * n, 0.0);  // A L^T = Y  (rows)
    for (int row = 0; row < n; ++row)
        for (int j = 0; j < n; ++j) {
            double s = Y[static_cast<std::size_t>(row * n + j)];
            for (int k = 0; k < j; ++k) s -= A[static_cast<std::size_t>(row * n + k)] * Lat(j, k);
            A[static_cast<std::size_t>(row * n + j)] = s / Lat(j, j);
        }

    std::vector<double> V;
    jacobi_sym(A, n, V);

    // v = L^-T w (back substitution per column)
    std::vector<double> W(static_cast<std::size_t>(n) * n, 0.0);
    for (int col = 0; col < n; ++col)
        for (int i = n - 1; i >= 0; --i) {
            double s = V[static_cast<std::size_t>(i * n + col)];
            for (int k = i + 1; k < n; ++k) s -= Lat(k, i) * W[static_cast<std::size_t>(k * n + col)];
            W[static_cast<std::size_t>(i * n + col)] = s / Lat(i, i);
        }

    struct EigPair {
        double lambda;
        std::vector<double> v;
    };
    std::vector<EigPair> pairs;
    pairs.reserve(static_cast<std::size_t>(n));
    for (int col = 0; col < n; ++col) {
        EigPair p;
        p.lambda = A[static_cast<std::size_t>(col * n + col)];
        p.v.resize(static_cast<std::size_t>(n));
        double vmax = 0.0;
        for (int i = 0; i < n; ++i) {
            p.v[static_cast<std::size_t>(i)] = W[static_cast<std::size_t>(i * n + col)];
            vmax = std::max(vmax, std::abs(p.v[static_cast<std::size_t>(i)]));
        }
        for (int i = 0; i < n; ++i) {
            const double c = p.v[static_cast<std::size_t>(i)];
            if (std::abs(c) > 1e-12 * std::max(vmax, 1e-300)) {
                if (c < 0.0)
                    for (auto& x : p.v) x = -x;
                break;
            }
        }
        pairs.push_back(std::move(p));
    }
    std::stable_sort(pairs.begin(), pairs.end(), [](const EigPair& a, const EigPair& b) {
        if (a.lambda != b.lambda) return a.lambda < b.lambda;
        return a.v > b.v;  // ties: lexicographically larger vector first
    });

    GenEigResult out;
    out.eigenvalues.reserve(static_cast<std::size_t>(n));
    out.eigenvectors.reserve(static_cast<std::size_t>(n));
    SymPairForm basis(m);
    for (const auto& p : pairs) {
        out.eigenvalues.push_back(p.lambda);
        SymMat tau(m);
        for (int u = 0; u < m; ++u)
            for (int v = u; v < m; ++v)
                tau.set(u, v, p.v[static_cast<std::size_t>(basis.index(u, v))]);
        out.eigenvectors.push_back(std::move(tau));
    }
    return out;
}

}  // namespace hg::tensor
