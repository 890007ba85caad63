#pragma once

#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace hg {
inline double value_of(double v) { return v; }
}

namespace hg::expr {

// Expression grammar (versioned public contract, appears in scenario files):
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := unary ('^' factor)?
//   unary  := '-' unary | atom
//   atom   := number | ident | func '(' expr ')' | '(' expr ')'
//   func   in {log, exp, sqrt, sin, cos, tanh}
//   ident  matches [A-Za-z][A-Za-z0-9_]*, the constant `pi` is predefined
//   number is a decimal literal with an optional exponent
//
// '^' is right-associative. A '^' whose exponent folds to an integer is
// evaluated by repeated multiplication; otherwise a^b = exp(b*log(a)) with
// domain a > 0. There is no implicit multiplication.

enum class Func { log, exp, sqrt, sin, cos, tanh };

enum class NodeKind { number, var, neg, add, sub, mul, div, pow, pow_int, call };

struct Node {
    NodeKind kind = NodeKind::number;
    double number = 0.0;
    int slot = -1;        // var: index into the field's variable list
    std::string name;     // variable / function / constant name, for printing
    Func fn = Func::log;
    long ipow = 0;        // pow_int exponent (original exponent tree kept in rhs)
    std::unique_ptr<Node> lhs, rhs;
    std::size_t offset = 0;
};

std::string pretty(const Node& n);

namespace detail {

template <class T>
T pow_int_eval(const T& base, long k, const T& one) {
    if (k == 0) return one;
    long n = k < 0 ? -k : k;
    T acc = base;
    for (long i = 1; i < n; ++i) acc = acc * base;
    if (k < 0) return one / acc;
    return acc;
}

template <class T, class Lift>
T eval_node(const Node& n, std::span<const T> vals, Lift&& lift) {
    using std::cos;
    using std::exp;
    using std::log;
    using std::sin;
    using std::sqrt;
    using std::tanh;
    switch (n.kind) {
        case NodeKind::number:
            return lift(n.number);
        case NodeKind::var:
            return vals[static_cast<std::size_t>(n.slot)];
        case NodeKind::neg:
            return -eval_node(*n.lhs, vals, lift);
        case NodeKind::add:
            return eval_node(*n.lhs, vals, lift) + eval_node(*n.rhs, vals, lift);
        case NodeKind::sub:
            return eval_node(*n.lhs, vals, lift) - eval_node(*n.rhs, vals, lift);
        case NodeKind::mul:
            return eval_node(*n.lhs, vals, lift) * eval_node(*n.rhs, vals, lift);
        case NodeKind::div: {
            T a = eval_node(*n.lhs, vals, lift);
            T b = eval_node(*n.rhs, vals, lift);
            if (value_of(b) == 0.0)
                throw DomainError("division by zero in '" + pretty(n) + "'", pretty(n));
            return a / b;
        }
        case NodeKind::pow_int: {
            T b = eval_node(*n.lhs, vals, lift);
            if (n.ipow < 0 && value_of(b) == 0.0)
                throw DomainError("zero base with negative exponent in '" + pretty(n) + "'",
                                  pretty(n));
            return pow_int_eval(b, n.ipow, lift(1.0));
        }
        case NodeKind::pow: {
            T b = eval_node(*n.lhs, vals, lift);
            if (!(value_of(b) > 0.0))
                throw DomainError("power with non-positive base in '" + pretty(n) + "'",
                                  pretty(n));
            T e = eval_node(*n.rhs, vals, lift);
            return exp(e * log(b));
        }
        case NodeKind::call: {
            T a = eval_node(*n.lhs, vals, lift);
            switch (n.fn) {
                case Func::log:
                    if (!(value_of(a) > 0.0))
                        throw DomainError("log of non-positive argument in '" + pretty(n) + "'",
                                          pretty(n));
                    return log(a);
                case Func::exp:
                    return exp(a);
                case Func::sqrt:
                    if (value_of(a) < 0.0)
                        throw DomainError("sqrt of negative argument in '" + pretty(n) + "'",
                                          pretty(n));
                    return sqrt(a);
                case Func::sin:
                    return sin(a);
                case Func::cos:
                    return cos(a);
                case Func::tanh:
                    return tanh(a);
            }
            break;
        }
    }
    throw Error(Status::internal, "unreachable expression node");
}

}  // namespace detail

// A parsed, immutable scalar field over a fixed ordered variable list.
// Evaluation is generic over the scalar arithmetic (doubles or jets) and is
// deterministic; sharing one field across threads is safe.
class ScalarField {
  public:
    static ScalarField parse(std::string_view text, std::span<const std::string> expected_vars);

    const std::vector<std::string>& vars() const { return vars_; }
    const std::vector<bool>& used() const { return used_; }
    const Node& root() const { return *root_; }
    const std::string& text() const { return text_; }

    std::string pretty() const { return expr::pretty(*root_); }

    template <class T, class Lift>
    T eval(std::span<const T> vals, Lift&& lift) const {
        return detail::eval_node(*root_, vals, lift);
    }

    double eval_plain(std::span<const double> vals) const {
        return detail::eval_node<double>(*root_, vals, [](double v) { return v; });
    }

  private:
    std::shared_ptr<const Node> root_;
    std::vector<std::string> vars_;
    std::vector<bool> used_;
    std::string text_;
};

double evaluate_named(const ScalarField& f,
                      std::span<const std::pair<std::string, double>> bindings);

}  // namespace hg::expr
