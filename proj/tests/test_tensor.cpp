#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "splitmix.hpp"
#include "tensor.hpp"

using hg::tensor::gen_eig;
using hg::tensor::invert;
using hg::tensor::quad_form;
using hg::tensor::sharp;
using hg::tensor::SymMat;
using hg::tensor::SymPairForm;
using hg::tensor::Tensor4;

namespace {

SymMat random_spd(int n, hg::SplitMix64& rng) {
    // diagonally dominant symmetric matrix, comfortably well-conditioned
    SymMat m(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) m.set(i, j, rng.uniform(-1.0, 1.0));
    for (int i = 0; i < n; ++i) m.set(i, i, m(i, i) + n + 1.0);
    return m;
}

}  // namespace

TEST_CASE("invert: identity, scalar closed form, singular detection") {
    CHECK(invert(SymMat::identity(3))(0, 0) == doctest::Approx(1.0));
    SymMat g(1);
    g.set(0, 0, 0.25);
    CHECK(invert(g)(0, 0) == doctest::Approx(4.0).epsilon(1e-14));
    SymMat s(2);
    s.set(0, 0, 1.0);
    s.set(0, 1, 1.0);
    s.set(1, 1, 1.0);
    CHECK_THROWS_AS((void)invert(s), hg::SingularMetricError);
}

TEST_CASE("invert handles indefinite matrices") {
    SymMat g(2);
    g.set(0, 0, 1.0);
    g.set(1, 1, -1.0);
    const SymMat gi = invert(g);
    CHECK(gi(0, 0) == doctest::Approx(1.0));
    CHECK(gi(1, 1) == doctest::Approx(-1.0));
}

TEST_CASE("invert of invert is the identity map on random symmetric matrices") {
    hg::SplitMix64 rng(0x7777u);
    for (int n = 1; n <= 6; ++n) {
        for (int trial = 0; trial < 5; ++trial) {
            const SymMat a = random_spd(n, rng);
            const SymMat b = invert(invert(a));
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    CHECK(std::abs(b(i, j) - a(i, j)) <= 1e-9 * (1.0 + std::abs(a(i, j))));
        }
    }
}

TEST_CASE("sharp raises both indices") {
    CHECK(sharp(SymMat::identity(2), SymMat::identity(2))(0, 1) == 0.0);
    SymMat nu(1), gi(1);
    nu.set(0, 0, 0.25);
    gi.set(0, 0, 4.0);
    CHECK(sharp(nu, gi)(0, 0) == doctest::Approx(4.0));
    SymMat nu2(2), g2(2);
    nu2.set(0, 0, 1.0);
    g2.set(0, 0, 1.0);
    g2.set(1, 1, 4.0);
    const SymMat up = sharp(nu2, invert(g2));
    CHECK(up(0, 0) == doctest::Approx(1.0));
    CHECK(up(0, 1) == 0.0);
    CHECK(up(1, 1) == 0.0);
}

TEST_CASE("quad_form: zero, single entry, metric pair tensor") {
    Tensor4 zero(2);
    zero.mark_hessian_symmetric();
    CHECK(quad_form(zero).max_abs() == 0.0);

    Tensor4 t1(1);
    t1.at(0, 0, 0, 0) = 3.5;
    t1.mark_hessian_symmetric();
    const SymPairForm f1 = quad_form(t1);
    CHECK(f1.dim() == 1);
    CHECK(f1(0, 0) == 3.5);

    // G of the identity metric in dimension two
    Tensor4 G(2);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c)
                for (int d = 0; d < 2; ++d)
                    G.at(a, b, c, d) = (a == c && b == d ? 1.0 : 0.0) +
                                       (a == d && b == c ? 1.0 : 0.0);
    G.mark_hessian_symmetric();
    const SymPairForm gf = quad_form(G);
    const int I = gf.index(0, 1);
    CHECK(gf(I, I) == 4.0);  // 4 * G(e1, e2, e1, e2)

    Tensor4 unflagged(2);
    CHECK_THROWS_AS((void)quad_form(unflagged), hg::ValidationError);
}

TEST_CASE("quad_form on decomposable cones matches the direct contraction") {
    hg::SplitMix64 rng(0x1234u);
    const int m = 3;
    Tensor4 t(m);
    // random tensor with the full pair-symmetry group baked in
    for (int a = 0; a < m; ++a)
        for (int b = a; b < m; ++b)
            for (int c = 0; c < m; ++c)
                for (int d = c; d < m; ++d) {
                    const double v = rng.uniform(-1.0, 1.0);
                    for (const auto& e : {std::array<int, 4>{a, b, c, d},
                                          std::array<int, 4>{b, a, c, d},
                                          std::array<int, 4>{a, b, d, c},
                                          std::array<int, 4>{b, a, d, c},
                                          std::array<int, 4>{c, d, a, b},
                                          std::array<int, 4>{d, c, a, b},
                                          std::array<int, 4>{c, d, b, a},
                                          std::array<int, 4>{d, c, b, a}})
                        t.at(e[0], e[1], e[2], e[3]) = v;
                }
    const Tensor4 sym = t.symmetrized_checked(1e-15);
    const SymPairForm B = quad_form(sym);
    for (int u = 0; u < m; ++u)
        for (int v = 0; v < m; ++v) {
            SymMat tau(m);
            if (u == v) {
                tau.set(u, u, 1.0);
                CHECK(B(tau) == doctest::Approx(sym(u, u, u, u)));
            } else {
                tau.set(u, v, 1.0);  // e_u (.) e_v has both off-diagonal slots set
                CHECK(B(tau) == doctest::Approx(4.0 * sym(u, v, u, v)));
            }
        }
}

TEST_CASE("pair symmetry flagging validates the three symmetries") {
    Tensor4 bad(2);
    bad.at(0, 1, 0, 0) = 1.0;  // not symmetric in the first pair
    CHECK_THROWS_AS((void)bad.symmetrized_checked(1e-12), hg::ValidationError);
}

TEST_CASE("gen_eig: zero form and proportional forms") {
    hg::SplitMix64 rng(0x4242u);
    const int m = 2;
    const int M = m * (m + 1) / 2;
    // Gf = L L^T from a random SPD matrix
    const SymMat spd = random_spd(M, rng);
    SymPairForm Gf(m), Qf(m);
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j) Gf.at(i, j) = spd(i, j);

    auto res = gen_eig(Qf, Gf);
    for (double l : res.eigenvalues) CHECK(std::abs(l) <= 1e-12);

    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j) Qf.at(i, j) = -2.5 * Gf(i, j);
    res = gen_eig(Qf, Gf);
    for (double l : res.eigenvalues) CHECK(l == doctest::Approx(-2.5).epsilon(1e-12));
}

TEST_CASE("gen_eig pairs satisfy the defining equation and are Gf-orthonormal") {
    hg::SplitMix64 rng(0x31415u);
    for (int m = 1; m <= 4; ++m) {
        const int M = m * (m + 1) / 2;
        const SymMat spd = random_spd(M, rng);
        SymPairForm Gf(m), Qf(m);
        for (int i = 0; i < M; ++i)
            for (int j = 0; j < M; ++j) {
                Gf.at(i, j) = spd(i, j);
                Qf.at(i, j) = 0.0;
            }
        for (int i = 0; i < M; ++i)
            for (int j = i; j < M; ++j) {
                const double v = rng.uniform(-2.0, 2.0);
                Qf.at(i, j) = v;
                Qf.at(j, i) = v;
            }
        const auto res = gen_eig(Qf, Gf);
        REQUIRE(static_cast<int>(res.eigenvalues.size()) == M);
        const double qs = std::max(1.0, Qf.max_abs());
        for (int e = 0; e < M; ++e) {
            const auto c = Qf.coordinates(res.eigenvectors[static_cast<std::size_t>(e)]);
            for (int i = 0; i < M; ++i) {
                double qv = 0.0, gv = 0.0;
                for (int j = 0; j < M; ++j) {
                    qv += Qf(i, j) * c[static_cast<std::size_t>(j)];
                    gv += Gf(i, j) * c[static_cast<std::size_t>(j)];
                }
                CHECK(std::abs(qv - res.eigenvalues[static_cast<std::size_t>(e)] * gv) <=
                      1e-9 * qs);
            }
            for (int e2 = 0; e2 < M; ++e2) {
                const auto c2 = Qf.coordinates(res.eigenvectors[static_cast<std::size_t>(e2)]);
                double dot = 0.0;
                for (int i = 0; i < M; ++i)
                    for (int j = 0; j < M; ++j)
                        dot += c[static_cast<std::size_t>(i)] * Gf(i, j) *
                               c2[static_cast<std::size_t>(j)];
                CHECK(std::abs(dot - (e == e2 ? 1.0 : 0.0)) <= 1e-9);
            }
        }
        for (int e = 1; e < M; ++e)
            CHECK(res.eigenvalues[static_cast<std::size_t>(e - 1)] <=
                  res.eigenvalues[static_cast<std::size_t>(e)]);
    }
}

TEST_CASE("gen_eig rejects an indefinite right-hand form") {
    SymPairForm Qf(1), Gf(1);
    Qf.at(0, 0) = 1.0;
    Gf.at(0, 0) = -1.0;
    CHECK_THROWS_AS((void)gen_eig(Qf, Gf), hg::NotPositiveDefiniteError);
}

TEST_CASE("gen_eig is deterministic across calls") {
    hg::SplitMix64 rng(0x99u);
    const int m = 3;
    const int M = m * (m + 1) / 2;
    const SymMat spd = random_spd(M, rng);
    SymPairForm Gf(m), Qf(m);
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j) Gf.at(i, j) = spd(i, j);
    for (int i = 0; i < M; ++i)
        for (int j = i; j < M; ++j) {
            const double v = rng.uniform(-1.0, 1.0);
            Qf.at(i, j) = v;
            Qf.at(j, i) = v;
        }
    const auto a = gen_eig(Qf, Gf);
    const auto b = gen_eig(Qf, Gf);
    for (int i = 0; i < M; ++i) {
        CHECK(a.eigenvalues[static_cast<std::size_t>(i)] ==
              b.eigenvalues[static_cast<std::size_t>(i)]);
        for (int u = 0; u < m; ++u)
            for (int v = 0; v < m; ++v)
                CHECK(a.eigenvectors[static_cast<std::size_t>(i)](u, v) ==
                      b.eigenvectors[static_cast<std::size_t>(i)](u, v));
    }
}
