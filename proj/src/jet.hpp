#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "expr.hpp"

namespace hg::jet {

inline constexpr int kMaxOrder = 4;
inline constexpr int kMaxVars = 12;

// Shared per-dimension tables for truncated multivariate Taylor arithmetic:
// the monomial basis of total degree <= 4 in graded order, the index lookup,
// per-monomial factorials and the truncated multiplication table.
class JetSpace {
  public:
    static const JetSpace& of(int nvars);

    int nvars() const { return nvars_; }
    int size() const { return static_cast<int>(expo_.size()); }
    int degree(int idx) const { return degree_[idx]; }
    double factorial(int idx) const { return factorial_[idx]; }
    const std::array<std::uint8_t, kMaxVars>& exponents(int idx) const { return expo_[idx]; }

    // Index of the monomial with the given exponents; -1 above degree 4.
    int index_of(std::span<const std::uint8_t> e) const;

    struct ProdEntry {
        std::uint32_t a, b, c;  // monomial a times monomial b lands on c
    };
    const std::vector<ProdEntry>& products() const { return prod_; }

  private:
    JetSpace() = default;
    static std::unique_ptr<JetSpace> build(int nvars);

    int nvars_ = 0;
    std::vector<std::array<std::uint8_t, kMaxVars>> expo_;
    std::vector<int> degree_;
    std::vector<double> factorial_;
    std::vector<ProdEntry> prod_;
    std::unordered_map<std::uint64_t, int> lookup_;
};

// Truncated degree-4 Taylor expansion around a point. Arithmetic is exact for
// the truncated class: the degree-k coefficient of a product depends only on
// coefficients of degree <= k of the factors. The value slot (constant
// coefficient) threads through every operation with exactly the same double
// operations as a plain evaluation would perform.
class Jet {
  public:
    Jet() = default;

    static Jet constant(const JetSpace& sp, double v) {
        Jet j(sp);
        j.c_[0] = v;
        return j;
    }
    static Jet variable(const JetSpace& sp, int var, double v) {
        Jet j(sp);
        j.c_[0] = v;
        j.c_[static_cast<std::size_t>(1 + var)] = 1.0;  // degree-1 monomials follow the constant
        return j;
    }

    double value() const { return c_[0]; }
    std::span<const double> coeffs() const { return c_; }
    const JetSpace& space() const { return *sp_; }

    friend Jet operator-(const Jet& x);
    friend Jet operator+(const Jet& a, const Jet& b);
    friend Jet operator-(const Jet& a, const Jet& b);
    friend Jet operator*(const Jet& a, const Jet& b);
    friend Jet operator/(const Jet& a, const Jet& b);
    friend Jet log(const Jet& x);
    friend Jet exp(const Jet& x);
    friend Jet sqrt(const Jet& x);
    friend Jet sin(const Jet& x);
    friend Jet cos(const Jet& x);
    friend Jet tanh(const Jet& x);

  private:
    explicit Jet(const JetSpace& sp) : sp_(&sp), c_(static_cast<std::size_t>(sp.size()), 0.0) {}
    friend Jet compose(const Jet& u, const std::array<double, 5>& d);

    const JetSpace* sp_ = nullptr;
    std::vector<double> c_;
};

inline double value_of(const Jet& j) { return j.value(); }

// All symmetric partial-derivative tensors of a scalar field at a point,
// orders 0..4, stored dense with every index permutation filled.
struct DerivStack {
    int dim = 0;
    std::vector<double> point;
    double d0 = 0.0;
    std::vector<double> d1, d2, d3, d4;

    double g1(int i) const { return d1[static_cast<std::size_t>(i)]; }
    double g2(int i, int j) const { return d2[static_cast<std::size_t>(i * dim + j)]; }
    double g3(int i, int j, int k) const {
        return d3[static_cast<std::size_t>((i * dim + j) * dim + k)];
    }
    double g4(int i, int j, int k, int l) const {
        return d4[static_cast<std::size_t>(((i * dim + j) * dim + k) * dim + l)];
    }
};

using Binding = std::pair<std::string, double>;

// Exact derivatives of `f` with respect to `active_vars` at `point`; any other
// variable of the field must appear in `fixed` (held constant).
DerivStack deriv_stack(const expr::ScalarField& f, std::span<const std::string> active_vars,
                       std::span<const double> point, std::span<const Binding> fixed = {});

// Central-difference estimate of the mixed partial named by `orders` (one
// entry per active variable, total <= 4), built by composing per-variable
// order-2 stencils. Oracle only; never used in the main pipeline.
double fd_probe(const expr::ScalarField& f, std::span<const std::string> active_vars,
                std::span<const double> point, std::span<const int> orders, double step,
                std::span<const Binding> fixed = {});

// Default oracle step for a derivative order, scaled by the coordinates the
// stencil actually moves.
double fd_default_step(int order, std::span<const double> diff_coords);

}  // namespace hg::jet
