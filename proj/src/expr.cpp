#include "expr.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <optional>

namespace hg::expr {

namespace {

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

enum class Tok { number, ident, plus, minus, star, slash, caret, lparen, rparen, end };

struct Token {
    Tok kind = Tok::end;
    std::size_t offset = 0;
    double value = 0.0;
    std::string text;
};

struct Lexer {
    std::string_view s;
    std::size_t pos = 0;

    Token next() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos >= s.size()) return {Tok::end, pos, 0.0, ""};
        const std::size_t start = pos;
        const char c = s[pos];
        switch (c) {
            case '+': ++pos; return {Tok::plus, start, 0.0, "+"};
            case '-': ++pos; return {Tok::minus, start, 0.0, "-"};
            case '*': ++pos; return {Tok::star, start, 0.0, "*"};
            case '/': ++pos; return {Tok::slash, start, 0.0, "/"};
            case '^': ++pos; return {Tok::caret, start, 0.0, "^"};
            case '(': ++pos; return {Tok::lparen, start, 0.0, "("};
            case ')': ++pos; return {Tok::rparen, start, 0.0, ")"};
            default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return lex_number(start);
        if (std::isalpha(static_cast<unsigned char>(c))) {
            while (pos < s.size() &&
                   (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
                ++pos;
            return {Tok::ident, start, 0.0, std::string(s.substr(start, pos - start))};
        }
        throw ParseError(start, "syntax error at offset " + std::to_string(start) +
                                    ": unexpected character '" + std::string(1, c) + "'");
    }

  private:
    Token lex_number(std::size_t start) {
        bool any_digit = false;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
            ++pos;
            any_digit = true;
        }
        if (pos < s.size() && s[pos] == '.') {
            ++pos;
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
                ++pos;
                any_digit = true;
            }
        }
        if (!any_digit)
            throw ParseError(start, "syntax error at offset " + std::to_string(start) +
                                        ": malformed number");
        if (pos < s.size() && (s[pos] == 'e' || s[pos] == 'E')) {
            std::size_t p = pos + 1;
            if (p < s.size() && (s[p] == '+' || s[p] == '-')) ++p;
            if (p < s.size() && std::isdigit(static_cast<unsigned char>(s[p]))) {
                pos = p;
                while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
            }
        }
        const std::string text(s.substr(start, pos - start));
        return {Tok::number, start, std::strtod(text.c_str(), nullptr), text};
    }
};

std::optional<Func> func_by_name(std::string_view name) {
    if (name == "log") return Func::log;
    if (name == "exp") return Func::exp;
    if (name == "sqrt") return Func::sqrt;
    if (name == "sin") return Func::sin;
    if (name == "cos") return Func::cos;
    if (name == "tanh") return Func::tanh;
    return std::nullopt;
}

bool tree_is_constant(const Node& n) {
    if (n.kind == NodeKind::var) return false;
    if (n.lhs && !tree_is_constant(*n.lhs)) return false;
    if (n.rhs && !tree_is_constant(*n.rhs)) return false;
    return true;
}

std::optional<double> fold_constant(const Node& n) {
    if (!tree_is_constant(n)) return std::nullopt;
    try {
        return detail::eval_node<double>(n, {}, [](double v) { return v; });
    } catch (const Error&) {
        return std::nullopt;
    }
}

class Parser {
  public:
    Parser(std::string_view text, std::span<const std::string> vars)
        : lex_{text, 0}, vars_(vars), used_(vars.size(), false) {
        advance();
    }

    std::unique_ptr<Node> parse_all() {
        auto e = expr();
        if (cur_.kind != Tok::end)
            throw ParseError(cur_.offset, "syntax error at offset " + std::to_string(cur_.offset) +
                                              ": unexpected trailing input");
        return e;
    }

    std::vector<bool> take_used() { return std::move(used_); }

  private:
    Lexer lex_;
    Token cur_;
    std::span<const std::string> vars_;
    std::vector<bool> used_;

    void advance() { cur_ = lex_.next(); }

    std::unique_ptr<Node> make(NodeKind k, std::size_t off) {
        auto n = std::make_unique<Node>();
        n->kind = k;
        n->offset = off;
        return n;
    }

    std::unique_ptr<Node> expr() {
        auto lhs = term();
        while (cur_.kind == Tok::plus || cur_.kind == Tok::minus) {
            const bool add = cur_.kind == Tok::plus;
            const std::size_t off = cur_.offset;
            advance();
            auto n = make(add ? NodeKind::add : NodeKind::sub, off);
            n->lhs = std::move(lhs);
            n->rhs = term();
            lhs = std::move(n);
        }
        return lhs;
    }

    std::unique_ptr<Node> term() {
        auto lhs = factor();
        while (cur_.kind == Tok::star || cur_.kind == Tok::slash) {
            const bool mul = cur_.kind == Tok::star;
            const std::size_t off = cur_.offset;
            advance();
            auto n = make(mul ? NodeKind::mul : NodeKind::div, off);
            n->lhs = std::move(lhs);
            n->rhs = factor();
            lhs = std::move(n);
        }
        return lhs;
    }

    std::unique_ptr<Node> factor() {
        auto base = unary();
        if (cur_.kind != Tok::caret) return base;
        const std::size_t off = cur_.offset;
        advance();
        auto n = make(NodeKind::pow, off);
        n->lhs = std::move(base);
        n->rhs = factor();  // right-associative
        if (auto k = fold_constant(*n->rhs)) {
            if (*k == std::floor(*k) && std::abs(*k) <= 1024.0) {
                n->kind = NodeKind::pow_int;
                n->ipow = static_cast<long>(*k);
            }
        }
        return n;
    }

    std::unique_ptr<Node> unary() {
        if (cur_.kind == Tok::minus) {
            const std::size_t off = cur_.offset;
            advance();
            auto n = make(NodeKind::neg, off);
            n->lhs = unary();
            return n;
        }
        return atom();
    }

    std::unique_ptr<Node> atom() {
        const Token t = cur_;
        switch (t.kind) {
            case Tok::number: {
                advance();
                auto n = make(NodeKind::number, t.offset);
                n->number = t.value;
                return n;
            }
            case Tok::lparen: {
                advance();
                auto e = expr();
                if (cur_.kind != Tok::rparen)
                    throw ParseError(cur_.offset, "syntax error at offset " +
                                                      std::to_string(cur_.offset) +
                                                      ": expected ')'");
                advance();
                return e;
            }
            case Tok::ident: {
                advance();
                if (cur_.kind == Tok::lparen) {
                    auto fn = func_by_name(t.text);
                    if (!fn)
                        throw ParseError(t.offset, "unknown function '" + t.text + "' at offset " +
                                                       std::to_string(t.offset));
                    advance();
                    auto n = make(NodeKind::call, t.offset);
                    n->fn = *fn;
                    n->name = t.text;
                    n->lhs = expr();
                    if (cur_.kind != Tok::rparen)
                        throw ParseError(cur_.offset, "syntax error at offset " +
                                                          std::to_string(cur_.offset) +
                                                          ": expected ')'");
                    advance();
                    return n;
                }
                for (std::size_t i = 0; i < vars_.size(); ++i) {
                    if (vars_[i] == t.text) {
                        used_[i] = true;
                        auto n = make(NodeKind::var, t.offset);
                        n->slot = static_cast<int>(i);
                        n->name = t.text;
                        return n;
                    }
                }
                if (t.text == "pi") {
                    auto n = make(NodeKind::number, t.offset);
                    n->number = M_PI;
                    n->name = "pi";
                    return n;
                }
                throw ParseError(t.offset, "unknown variable '" + t.text + "' at offset " +
                                               std::to_string(t.offset));
            }
            default:
                throw ParseError(t.offset, "syntax error at offset " + std::to_string(t.offset) +
                                               ": expected a number, name, or '('");
        }
    }
};

}  // namespace

std::string pretty(const Node& n) {
    switch (n.kind) {
        case NodeKind::number:
            return n.name.empty() ? format_number(n.number) : n.name;
        case NodeKind::var:
            return n.name;
        case NodeKind::neg:
            return "(-" + pretty(*n.lhs) + ")";
        case NodeKind::add:
            return "(" + pretty(*n.lhs) + " + " + pretty(*n.rhs) + ")";
        case NodeKind::sub:
            return "(" + pretty(*n.lhs) + " - " + pretty(*n.rhs) + ")";
        case NodeKind::mul:
            return "(" + pretty(*n.lhs) + " * " + pretty(*n.rhs) + ")";
        case NodeKind::div:
            return "(" + pretty(*n.lhs) + " / " + pretty(*n.rhs) + ")";
        case NodeKind::pow:
        case NodeKind::pow_int:
            return "(" + pretty(*n.lhs) + " ^ " + pretty(*n.rhs) + ")";
        case NodeKind::call:
            return n.name + "(" + pretty(*n.lhs) + ")";
    }
    return "?";
}

ScalarField ScalarField::parse(std::string_view text,
                               std::span<const std::string> expected_vars) {
    if (text.empty()) throw ParseError(0, "empty expression");
    Parser p(text, expected_vars);
    ScalarField f;
    f.root_ = std::shared_ptr<const Node>(p.parse_all().release());
    f.used_ = p.take_used();
    f.vars_.assign(expected_vars.begin(), expected_vars.end());
    f.text_.assign(text);
    return f;
}

double evaluate_named(const ScalarField& f,
                      std::span<const std::pair<std::string, double>> bindings) {
    const auto& vars = f.vars();
    std::vector<double> vals(vars.size(), 0.0);
    std::vector<bool> bound(vars.size(), false);
    for (const auto& [name, value] : bindings) {
        bool known = false;
        for (std::size_t i = 0; i < vars.size(); ++i) {
            if (vars[i] == name) {
                if (bound[i]) throw ValidationError("duplicate binding for '" + name + "'");
                bound[i] = true;
                vals[i] = value;
                known = true;
                break;
            }
        }
        if (!known) throw ValidationError("binding for unknown variable '" + name + "'");
    }
    for (std::size_t i = 0; i < vars.size(); ++i)
        if (f.used()[i] && !bound[i]) throw ValidationError("unbound variable '" + vars[i] + "'");
    return f.eval_plain(vals);
}

}  // namespace hg::expr
