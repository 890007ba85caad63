#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hessian.hpp"
#include "splitmix.hpp"

using hg::expr::ScalarField;
using hg::hess::build_package;
using hg::hess::HessPackage;
using hg::jet::deriv_stack;
using hg::tensor::SymMat;
using hg::tensor::Tensor3;
using hg::tensor::Tensor4;

namespace {

std::vector<std::string> yvars(int m) {
    std::vector<std::string> v;
    for (int i = 1; i <= m; ++i) v.push_back("y" + std::to_string(i));
    return v;
}

HessPackage package_of(const std::string& potential, const std::vector<double>& at) {
    const auto vs = yvars(static_cast<int>(at.size()));
    const auto f = ScalarField::parse(potential, vs);
    return build_package(deriv_stack(f, vs, at));
}

double max4(const Tensor4& t) { return t.max_abs(); }

}  // namespace

TEST_CASE("quadratic potential: constant metric, everything else vanishes") {
    const auto p = package_of("y1^2/2 + y2^2/2 + 0.25*y1*y2", {0.7, -1.3});
    CHECK(p.g(0, 0) == 1.0);
    CHECK(p.g(0, 1) == 0.25);
    CHECK(p.c.max_abs() == 0.0);
    CHECK(p.gamma.max_abs() == 0.0);
    CHECK(max4(p.q) == 0.0);
    CHECK(max4(p.r) == 0.0);
}

TEST_CASE("-log(y1) at 2: frozen chart data") {
    const auto p = package_of("-log(y1)", {2.0});
    CHECK(p.g(0, 0) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(p.g_inv(0, 0) == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(p.c(0, 0, 0) == doctest::Approx(-0.25).epsilon(1e-14));
    CHECK(p.gamma(0, 0, 0) == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(p.q(0, 0, 0, 0) == doctest::Approx(0.0625).epsilon(1e-13));
    CHECK(p.qmix(0, 0, 0, 0) == doctest::Approx(-0.0625).epsilon(1e-13));
    CHECK(max4(p.r) == 0.0);  // one-dimensional chart
}

TEST_CASE("exp potential at 0 is Hessian-flat with Gamma = 1/2") {
    const auto p = package_of("exp(y1)", {0.0});
    CHECK(p.g(0, 0) == 1.0);
    CHECK(p.gamma(0, 0, 0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(std::abs(p.q(0, 0, 0, 0)) <= 1e-15);
}

TEST_CASE("Q against the finite-difference derivative of Gamma") {
    // dGamma/dy at y = 2 for -log: Gamma(y) = -1/y, so dGamma = 1/y^2 = 0.25
    const auto vs = yvars(1);
    const auto f = ScalarField::parse("-log(y1)", vs);
    const double h = 1e-5;
    auto gamma_at = [&](double y) {
        const std::vector<double> at = {y};
        return build_package(deriv_stack(f, vs, at)).gamma(0, 0, 0);
    };
    const double dgamma_fd = (gamma_at(2.0 + h) - gamma_at(2.0 - h)) / (2.0 * h);
    const auto p = package_of("-log(y1)", {2.0});
    CHECK(p.dgamma(0, 0, 0, 0) == doctest::Approx(dgamma_fd).epsilon(1e-8));
    CHECK(p.q(0, 0, 0, 0) == doctest::Approx(p.g(0, 0) * dgamma_fd).epsilon(1e-8));
}

TEST_CASE("levi_civita: constant metric, scalar closed form, Hessian shortcut") {
    Tensor3 dg0(2);
    CHECK(hg::hess::levi_civita(SymMat::identity(2), dg0).max_abs() == 0.0);

    // g = 1/y^2 in one variable: Gamma = -1/y
    SymMat g(1);
    g.set(0, 0, 0.25);
    Tensor3 dg(1);
    dg.at(0, 0, 0) = -0.25;  // d(1/y^2) at y=2
    CHECK(hg::hess::levi_civita(g, dg)(0, 0, 0) == doctest::Approx(-0.5).epsilon(1e-14));

    // with a totally symmetric dg the generic assembly is 1/2 g^-1 dg exactly
    const auto p = package_of("y1^2/2 + y2^2/2 + 0.1*y1*y2^2", {0.3, -0.2});
    for (int k = 0; k < 2; ++k)
        for (int u = 0; u < 2; ++u)
            for (int v = 0; v < 2; ++v) {
                double direct = 0.0;
                for (int s = 0; s < 2; ++s) direct += 0.5 * p.g_inv(k, s) * p.c(s, u, v);
                CHECK(p.gamma(k, u, v) == doctest::Approx(direct).epsilon(1e-13));
            }
}

TEST_CASE("product of flat one-dimensional factors: explicit Q entries, zero R") {
    const auto p = package_of("-log(y1) - log(y2)", {1.0, 1.0});
    CHECK(p.q(0, 0, 0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.q(1, 1, 1, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(p.q(0, 0, 1, 1)) <= 1e-14);
    CHECK(std::abs(p.q(0, 1, 0, 1)) <= 1e-14);
    CHECK(max4(p.r) <= 1e-13);
}

TEST_CASE("mixed derivative differs from Q by the Christoffel product terms") {
    hg::SplitMix64 rng(0xfeedu);
    for (int trial = 0; trial < 6; ++trial) {
        const std::vector<double> at = {rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4)};
        const auto p = package_of("y1^2/2 + y2^2/2 + 0.1*y1*y2^2 + 0.05*y1^4", at);
        const double scale = std::max(1.0, max4(p.q));
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                for (int s = 0; s < 2; ++s)
                    for (int t = 0; t < 2; ++t) {
                        double prod = 0.0;
                        for (int k = 0; k < 2; ++k)
                            for (int l = 0; l < 2; ++l)
                                prod += p.g(k, l) *
                                        (p.gamma(k, b, s) * p.gamma(l, a, t) +
                                         p.gamma(k, b, t) * p.gamma(l, a, s));
                        CHECK(std::abs(p.q(a, b, s, t) - p.qmix(a, b, s, t) - prod) <=
                              1e-10 * scale);
                    }
    }
}

TEST_CASE("curvature-from-Cartan audit: the half-corrected variant is the definitional one") {
    // quadratic: both variants vanish and both match
    {
        const auto p = package_of("y1^2/2 + y2^2/2", {0.4, 0.6});
        const auto audit = hg::hess::qcuc_audit(p.dc, p.gamma, p.g, p.q, 1e-9);
        CHECK(audit.match == hg::hess::QcucAudit::Match::both);
    }
    // -log at 2: printed gives 0.25, half-corrected the definitional 0.0625
    {
        const auto p = package_of("-log(y1)", {2.0});
        const auto audit = hg::hess::qcuc_audit(p.dc, p.gamma, p.g, p.q, 1e-9);
        CHECK(audit.printed(0, 0, 0, 0) == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(audit.half_corrected(0, 0, 0, 0) == doctest::Approx(0.0625).epsilon(1e-12));
        CHECK(audit.match == hg::hess::QcucAudit::Match::half_corrected);
    }
    // exp at 0: printed 0.5, half-corrected 0
    {
        const auto p = package_of("exp(y1)", {0.0});
        const auto audit = hg::hess::qcuc_audit(p.dc, p.gamma, p.g, p.q, 1e-9);
        CHECK(audit.printed(0, 0, 0, 0) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(std::abs(audit.half_corrected(0, 0, 0, 0)) <= 1e-12);
        CHECK(audit.match == hg::hess::QcucAudit::Match::half_corrected);
    }
}

TEST_CASE("riemann cross-checked against a finite-difference Christoffel assembly") {
    const auto vs = yvars(2);
    const auto f = ScalarField::parse("y1^2/2 + y2^2/2 + 0.1*y1*y2^2", vs);
    const std::vector<double> at = {0.3, -0.2};
    const auto p = build_package(deriv_stack(f, vs, at));
    const double h = 1e-5;
    auto gamma_at = [&](std::vector<double> y) {
        return build_package(deriv_stack(f, vs, y)).gamma;
    };
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c)
                for (int d = 0; d < 2; ++d) {
                    double op = 0.0;
                    for (int k = 0; k < 2; ++k) {
                        std::vector<double> cp = at, cm = at, dp = at, dm = at;
                        cp[static_cast<std::size_t>(c)] += h;
                        cm[static_cast<std::size_t>(c)] -= h;
                        dp[static_cast<std::size_t>(d)] += h;
                        dm[static_cast<std::size_t>(d)] -= h;
                        const double dc_fd =
                            (gamma_at(cp)(k, d, b) - gamma_at(cm)(k, d, b)) / (2.0 * h);
                        const double dd_fd =
                            (gamma_at(dp)(k, c, b) - gamma_at(dm)(k, c, b)) / (2.0 * h);
                        double quad = 0.0;
                        for (int q = 0; q < 2; ++q)
                            quad += p.gamma(k, c, q) * p.gamma(q, d, b) -
                                    p.gamma(k, d, q) * p.gamma(q, c, b);
                        op += p.g(a, k) * (dc_fd - dd_fd + quad);
                    }
                    CHECK(std::abs(p.r(a, b, c, d) - op) <= 1e-7);
                }
}

TEST_CASE("pair tensor G: identity metric entries and scalar closed form") {
    const auto p2 = package_of("y1^2/2 + y2^2/2", {0.0, 0.0});
    CHECK(p2.gp(0, 1, 0, 1) == 1.0);
    CHECK(p2.gp(0, 0, 1, 1) == 0.0);
    CHECK(p2.gp(0, 0, 0, 0) == 2.0);
    CHECK(p2.gp.hessian_symmetric());
    CHECK(p2.gp.pair_symmetry_residual() == 0.0);

    const auto p1 = package_of("-log(y1)", {2.0});
    CHECK(p1.gp(0, 0, 0, 0) == doctest::Approx(0.125).epsilon(1e-14));
}

TEST_CASE("conical curvature: flat, the -log constant 0.5, exact scale invariance") {
    {
        const auto p = package_of("y1^2/2 + y2^2/2", {0.2, 0.1});
        SymMat nu(2);
        nu.set(0, 0, 1.0);
        nu.set(0, 1, -0.3);
        nu.set(1, 1, 0.5);
        CHECK(std::abs(hg::hess::conical_curvature(p, nu)) <= 1e-14);
    }
    for (double y : {0.5, 1.0, 2.0, 5.0}) {
        const auto p = package_of("-log(y1)", {y});
        SymMat nu(1);
        nu.set(0, 0, p.g(0, 0) * p.g(0, 0));  // lowered e (.) e
        CHECK(hg::hess::conical_curvature(p, nu) == doctest::Approx(0.5).epsilon(1e-12));
        // scaling by a power of two cancels exactly
        SymMat nu2(1);
        nu2.set(0, 0, 0.5 * nu(0, 0));
        CHECK(hg::hess::conical_curvature(p, nu2) == hg::hess::conical_curvature(p, nu));
    }
    {
        const auto p = package_of("-log(y1)", {2.0});
        SymMat zero(1);
        CHECK_THROWS_AS((void)hg::hess::conical_curvature(p, zero), hg::DomainError);
    }
}

TEST_CASE("constant-curvature audit across charts") {
    const auto vs3 = yvars(3);
    const auto f3 = ScalarField::parse("y1^2/2 + y2^2/2 + y3^2/2 + 0.2*y1*y3", vs3);
    std::vector<HessPackage> quad;
    hg::SplitMix64 rng(0x88u);
    for (int i = 0; i < 5; ++i) {
        std::vector<double> at = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                                  rng.uniform(-1.0, 1.0)};
        quad.push_back(build_package(deriv_stack(f3, vs3, at)));
    }
    auto audit = hg::hess::constant_curvature_audit(quad, 7);
    CHECK(audit.pointwise_proportional);
    CHECK(audit.constant);
    for (double f : audit.f) CHECK(std::abs(f) <= 1e-12);
    CHECK(audit.sectional_checked);
    CHECK(audit.sectional_max_diff <= 1e-10);

    const auto vs1 = yvars(1);
    const auto f1 = ScalarField::parse("-log(y1)", vs1);
    std::vector<HessPackage> neglog;
    for (double y : {0.5, 1.0, 2.0, 5.0}) {
        const std::vector<double> pt = {y};
        neglog.push_back(build_package(deriv_stack(f1, vs1, pt)));
    }
    audit = hg::hess::constant_curvature_audit(neglog, 7);
    CHECK(audit.pointwise_proportional);
    CHECK(audit.constant);
    for (double f : audit.f) CHECK(f == doctest::Approx(0.5).epsilon(1e-12));

    const auto vs2 = yvars(2);
    const auto f2 = ScalarField::parse("-log(y1) - log(y2)", vs2);
    std::vector<HessPackage> prod;
    const std::vector<double> pa = {1.0, 1.0}, pb = {2.0, 0.7};
    prod.push_back(build_package(deriv_stack(f2, vs2, pa)));
    prod.push_back(build_package(deriv_stack(f2, vs2, pb)));
    audit = hg::hess::constant_curvature_audit(prod, 7);
    CHECK_FALSE(audit.pointwise_proportional);
}

TEST_CASE("identity suite: flat chart gives zero residuals everywhere") {
    const auto p = package_of("y1^2/2 + y2^2/2 + 0.25*y1*y2", {1.0, -1.0});
    const auto ids = hg::hess::identity_suite(p);
    CHECK(ids.relrq == 0.0);
    CHECK(ids.rsiqgotic == 0.0);
    CHECK(ids.exprqgotic == 0.0);
    CHECK(ids.phic <= 1e-15);
    CHECK(ids.torsion == 0.0);
}

TEST_CASE("identity suite on the coupled cubic at the worked point") {
    const auto p = package_of("y1^2/2 + y2^2/2 + 0.1*y1*y2^2", {0.3, -0.2});
    const auto ids = hg::hess::identity_suite(p);
    CHECK(ids.relrq <= 1e-9);
    CHECK(ids.rsiqgotic <= 1e-9);
    CHECK(ids.exprqgotic <= 1e-10);
    CHECK(ids.phic <= 1e-12);
    CHECK(ids.torsion == 0.0);
    CHECK(ids.sym_q <= 1e-10);
    CHECK(ids.sym_qmix <= 1e-10);
    CHECK(ids.r_antisym <= 1e-10);
    CHECK(ids.r_pair <= 1e-10);
    CHECK(ids.r_bianchi <= 1e-10);
}

TEST_CASE("identity suite holds for an indefinite potential") {
    const auto p = package_of("y1^2/2 - y2^2/2 + 0.1*y1*y2^2", {0.2, 0.3});
    const auto ids = hg::hess::identity_suite(p);
    CHECK(ids.relrq <= 1e-9);
    CHECK(ids.rsiqgotic <= 1e-9);
    CHECK(ids.exprqgotic <= 1e-10);
    CHECK(ids.sym_q <= 1e-10);
}

TEST_CASE("permutation audit finds the canonical slot assignment on a curved chart") {
    const auto p = package_of("-log(y1) - log(y2) + 0.1*y1*y2^2", {1.1, 0.9});
    const auto perms = hg::hess::audit_permutations(p.r, p.q, 0.5, 1e-9);
    CHECK(std::find(perms.begin(), perms.end(), std::string("1342")) != perms.end());
    CHECK(perms.size() < 24);  // curvature is nonzero, so the audit discriminates
    const auto permsm = hg::hess::audit_permutations(p.r, p.qmix, 1.0, 1e-9);
    CHECK(std::find(permsm.begin(), permsm.end(), std::string("1342")) != permsm.end());
}

TEST_CASE("Riemann curvature ignores the fourth derivative of the potential") {
    // adding a quartic whose second and third derivatives vanish at the point
    // changes dc but neither g, c, nor r
    const std::vector<double> at = {0.7, -0.4};
    const auto p1 = package_of("-log(y1 + 2) - log(y2 + 2) + 0.1*y1*y2^2", at);
    const auto p2 = package_of(
        "-log(y1 + 2) - log(y2 + 2) + 0.1*y1*y2^2 + 0.3*(y1 - 0.7)^4 + 0.2*(y2 + 0.4)^4", at);
    CHECK(std::abs(p1.dc(0, 0, 0, 0) - p2.dc(0, 0, 0, 0)) > 1e-3);  // dc really changed
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            CHECK(p1.g(a, b) == doctest::Approx(p2.g(a, b)).epsilon(1e-12));
            for (int c = 0; c < 2; ++c)
                for (int d = 0; d < 2; ++d)
                    CHECK(std::abs(p1.r(a, b, c, d) - p2.r(a, b, c, d)) <=
                          1e-10 * (1.0 + std::abs(p1.r(a, b, c, d))));
        }
}

TEST_CASE("symmetry invariants hold over random samples of every corpus potential") {
    struct Entry {
        const char* text;
        int m;
        double lo, hi;
    };
    const Entry corpus[] = {
        {"y1^2/2 + y2^2/2 + 0.25*y1*y2", 2, -2.0, 2.0},
        {"-log(y1) - log(y2)", 2, 0.5, 4.0},
        {"log(exp(y1) + exp(y2)) + y1^2/2 + y2^2/2", 2, -1.5, 1.5},
        {"y1^2/2 + y2^2/2 + 0.1*y1*y2^2", 2, -0.5, 0.5},
        {"exp(y1)", 1, -1.0, 1.0},
        {"-log(y1)", 1, 0.5, 5.0},
    };
    for (const auto& e : corpus) {
        const auto vs = yvars(e.m);
        const auto f = ScalarField::parse(e.text, vs);
        hg::SplitMix64 rng(0xbeefu);
        for (int i = 0; i < 20; ++i) {
            std::vector<double> at(static_cast<std::size_t>(e.m));
            for (auto& c : at) c = rng.uniform(e.lo, e.hi);
            const auto p = build_package(deriv_stack(f, vs, at));
            const auto ids = hg::hess::identity_suite(p);
            CHECK(ids.sym_q <= 1e-10);
            CHECK(ids.sym_qmix <= 1e-10);
            CHECK(ids.r_antisym <= 1e-10);
            CHECK(ids.r_pair <= 1e-10);
            CHECK(ids.relrq <= 1e-9);
            CHECK(ids.rsiqgotic <= 1e-9);
            CHECK(ids.exprqgotic <= 1e-10);
        }
    }
}

TEST_CASE("eigen pipeline: the -log chart has the single principal curvature 0.5") {
    for (double y : {0.5, 1.0, 2.0, 5.0}) {
        const auto p = package_of("-log(y1)", {y});
        const auto qf = hg::tensor::quad_form(p.q.symmetrized_checked(1e-10));
        const auto gf = hg::tensor::quad_form(p.gp);
        const auto eig = hg::tensor::gen_eig(qf, gf);
        REQUIRE(eig.eigenvalues.size() == 1);
        CHECK(eig.eigenvalues[0] == doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("singular Hessian raises a singular-metric error") {
    // potential linear in y2: the Hessian has a zero row
    CHECK_THROWS_AS((void)package_of("y1^2/2 + y2", {1.0, 1.0}), hg::SingularMetricError);
}
