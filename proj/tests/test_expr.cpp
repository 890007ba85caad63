#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "expr.hpp"
#include "jet.hpp"
#include "splitmix.hpp"

using hg::expr::ScalarField;

namespace {

std::vector<std::string> vars(std::initializer_list<const char*> names) {
    std::vector<std::string> v;
    for (const char* n : names) v.emplace_back(n);
    return v;
}

double eval1(const ScalarField& f, double y) {
    const std::vector<double> v = {y};
    return f.eval_plain(v);
}

}  // namespace

TEST_CASE("parse accepts the quadratic example and tracks variables") {
    const auto vs = vars({"y1", "y2"});
    const auto f = ScalarField::parse("y1^2/2 + y2^2/2", vs);
    CHECK(f.used()[0]);
    CHECK(f.used()[1]);
    const std::vector<double> at{3.0, 4.0};
    CHECK(f.eval_plain(at) == doctest::Approx(12.5));
}

TEST_CASE("parse builds unary minus over log") {
    const auto f = ScalarField::parse("-log(y1)", vars({"y1"}));
    CHECK(f.root().kind == hg::expr::NodeKind::neg);
    CHECK(f.root().lhs->kind == hg::expr::NodeKind::call);
    CHECK(eval1(f, 1.0) == 0.0);
}

TEST_CASE("syntax error reports the offset of the missing token") {
    try {
        (void)ScalarField::parse("y1 +", vars({"y1"}));
        FAIL("expected a parse error");
    } catch (const hg::ParseError& e) {
        CHECK(e.offset == 4);
        CHECK(std::string(e.what()).find("offset 4") != std::string::npos);
    }
}

TEST_CASE("unknown names are rejected at parse time") {
    CHECK_THROWS_AS((void)ScalarField::parse("z1 + 1", vars({"y1"})), hg::ParseError);
    CHECK_THROWS_AS((void)ScalarField::parse("foo(y1)", vars({"y1"})), hg::ParseError);
    CHECK_THROWS_AS((void)ScalarField::parse("", vars({"y1"})), hg::ParseError);
    CHECK_THROWS_AS((void)ScalarField::parse("y1 ) ", vars({"y1"})), hg::ParseError);
}

TEST_CASE("evaluate matches the worked examples") {
    CHECK(eval1(ScalarField::parse("y1^2/2", vars({"y1"})), 2.0) == 2.0);
    CHECK(eval1(ScalarField::parse("-log(y1)", vars({"y1"})), 1.0) == 0.0);
    CHECK_THROWS_AS((void)eval1(ScalarField::parse("-log(y1)", vars({"y1"})), -1.0),
                    hg::DomainError);
}

TEST_CASE("domain errors name the offending subexpression") {
    const auto f = ScalarField::parse("1 + log(y1)", vars({"y1"}));
    try {
        (void)eval1(f, 0.0);
        FAIL("expected a domain error");
    } catch (const hg::DomainError& e) {
        CHECK(e.subexpr == "log(y1)");
    }
    CHECK_THROWS_AS((void)eval1(ScalarField::parse("1/y1", vars({"y1"})), 0.0), hg::DomainError);
    CHECK_THROWS_AS((void)eval1(ScalarField::parse("sqrt(y1)", vars({"y1"})), -1.0),
                    hg::DomainError);
    CHECK_THROWS_AS((void)eval1(ScalarField::parse("(-2)^(0.5)", vars({"y1"})), 1.0),
                    hg::DomainError);
}

TEST_CASE("power operator: right associativity and grammar precedence") {
    CHECK(eval1(ScalarField::parse("2^3^2", vars({"y1"})), 0.0) == 512.0);
    // factor := unary ('^' factor)?  => the unary minus binds to the base
    CHECK(eval1(ScalarField::parse("-y1^2", vars({"y1"})), 3.0) == 9.0);
    CHECK(eval1(ScalarField::parse("y1^-2", vars({"y1"})), 2.0) == 0.25);
    // non-integer exponents fall back to exp(b*log(a))
    const double v = eval1(ScalarField::parse("y1^0.5", vars({"y1"})), 9.0);
    CHECK(v == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("pi is predefined") {
    CHECK(eval1(ScalarField::parse("cos(pi)", vars({"y1"})), 0.0) == doctest::Approx(-1.0));
}

TEST_CASE("evaluate_named rejects unbound and duplicate bindings") {
    const auto f = ScalarField::parse("y1 + y2", vars({"y1", "y2"}));
    std::vector<std::pair<std::string, double>> b = {{"y1", 1.0}};
    CHECK_THROWS_AS((void)hg::expr::evaluate_named(f, b), hg::ValidationError);
    b = {{"y1", 1.0}, {"y1", 2.0}};
    CHECK_THROWS_AS((void)hg::expr::evaluate_named(f, b), hg::ValidationError);
    b = {{"y1", 1.0}, {"y2", 2.0}};
    CHECK(hg::expr::evaluate_named(f, b) == 3.0);
}

TEST_CASE("pretty-print then re-parse evaluates identically on 100 random bindings") {
    const auto vs = vars({"y1", "y2"});
    const std::vector<std::string> corpus = {
        "y1^2/2 + y2^2/2 + 0.25*y1*y2",
        "-log(y1) - log(y2)",
        "log(exp(y1) + exp(y2)) + y1^2/2 + y2^2/2",
        "sin(y1)*cos(y2) + tanh(y1*y2)",
        "sqrt(y1^2 + y2^2 + 1)",
        "y1^3 - 2*y2 + y1/(y2 + 4)",
        "exp(-y1^2) + 1e-3*y2",
        "(y1 + y2)^4 / 24",
        "2^y1 + y2^0.25",
        "-(-y1) + (-(y2))",
    };
    hg::SplitMix64 rng(0xabcdef12u);
    for (const auto& text : corpus) {
        const auto f = ScalarField::parse(text, vs);
        const auto g = ScalarField::parse(f.pretty(), vs);
        for (int i = 0; i < 100; ++i) {
            const std::vector<double> at = {rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0)};
            CHECK(f.eval_plain(at) == g.eval_plain(at));
        }
    }
}

TEST_CASE("jet evaluation truncated to order zero equals plain evaluation exactly") {
    const auto vs = vars({"y1", "y2"});
    const std::vector<std::string> corpus = {
        "y1^2/2 + y2^2/2 + 0.25*y1*y2",
        "-log(y1) - log(y2)",
        "log(exp(y1) + exp(y2)) + y1^2/2",
        "sin(y1)*cos(y2) + tanh(y1*y2)",
        "sqrt(y1^2 + y2^2 + 1)",
        "y1/(y2 + 4) + y1^-3",
        "2^y1 + y1^0.25",
    };
    const auto& sp = hg::jet::JetSpace::of(2);
    hg::SplitMix64 rng(0x5151u);
    for (const auto& text : corpus) {
        const auto f = ScalarField::parse(text, vs);
        for (int i = 0; i < 50; ++i) {
            const std::vector<double> at = {rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0)};
            const std::vector<hg::jet::Jet> jat = {hg::jet::Jet::constant(sp, at[0]),
                                                   hg::jet::Jet::constant(sp, at[1])};
            const auto jv =
                f.eval<hg::jet::Jet>(jat, [&](double v) { return hg::jet::Jet::constant(sp, v); });
            CHECK(jv.value() == f.eval_plain(at));
        }
    }
}
