#include "lagrange.hpp"

#include <algorithm>
#include <cmath>

namespace hg::lag {

using jet::Binding;
using jet::DerivStack;
using tensor::SymMat;
using tensor::Tensor3;
using tensor::Tensor4;

std::vector<std::string> coord_names(const std::string& prefix, int m) {
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(m));
    for (int i = 1; i <= m; ++i) names.push_back(prefix + std::to_string(i));
    return names;
}

namespace {

std::vector<std::string> tangent_vars(int m) {
    auto v = coord_names("x", m);
    auto y = coord_names("y", m);
    v.insert(v.end(), y.begin(), y.end());
    return v;
}

std::vector<Binding> bind(const std::vector<std::string>& names, std::span<const double> vals) {
    std::vector<Binding> out;
    out.reserve(names.size());
    for (std::size_t i = 0; i < names.size(); ++i) out.emplace_back(names[i], vals[i]);
    return out;
}

}  // namespace

LagrangianChart LagrangianChart::make(std::string_view text, int m) {
    LagrangianChart ch;
    ch.dim = m;
    ch.xvars = coord_names("x", m);
    ch.yvars = coord_names("y", m);
    ch.L = expr::ScalarField::parse(text, tangent_vars(m));
    return ch;
}

DirectMetricChart DirectMetricChart::make(std::span<const std::string> components, int m) {
    if (static_cast<int>(components.size()) != m * m)
        throw ValidationError("direct metric needs m*m component expressions");
    DirectMetricChart ch;
    ch.dim = m;
    ch.xvars = coord_names("x", m);
    ch.yvars = coord_names("y", m);
    const auto vars = tangent_vars(m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            const auto& sij = components[static_cast<std::size_t>(i * m + j)];
            const auto& sji = components[static_cast<std::size_t>(j * m + i)];
            if (sij != sji)
                throw ValidationError("direct metric components must be symmetric: entry (" +
                                      std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                      ") differs from its transpose");
            ch.comps.push_back(expr::ScalarField::parse(sij, vars));
        }
    return ch;
}

jet::DerivStack fiber_stack(const LagrangianChart& chart, std::span<const double> x,
                            std::span<const double> y) {
    const auto fixed = bind(chart.xvars, x);
    return jet::deriv_stack(chart.L, chart.yvars, y, fixed);
}

hess::HessPackage fiber_package(const LagrangianChart& chart, std::span<const double> x,
                                std::span<const double> y) {
    return hess::build_package(fiber_stack(chart, x, y));
}

LagrangeTest locally_lagrange_test(const DirectMetricChart& chart,
                                   std::span<const std::vector<double>> samples) {
    const int m = chart.dim;
    LagrangeTest out;
    double scale = 1.0;
    for (const auto& pt : samples) {
        if (static_cast<int>(pt.size()) != 2 * m)
            throw ValidationError("sample point must have 2m coordinates");
        const std::span<const double> x{pt.data(), static_cast<std::size_t>(m)};
        const std::span<const double> y{pt.data() + m, static_cast<std::size_t>(m)};
        const auto fixed = bind(chart.xvars, x);

        SymMat g(m);
        Tensor3 dg(m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                const auto& f = chart.comps[static_cast<std::size_t>(i * m + j)];
                const DerivStack st = jet::deriv_stack(f, chart.yvars, y, fixed);
                g.set(i, j, st.d0);
                for (int k = 0; k < m; ++k) dg.at(k, i, j) = st.g1(k);
            }
        try {
            (void)tensor::invert(g);
        } catch (const SingularMetricError& e) {
            std::string pt_str = "(";
            for (std::size_t i = 0; i < pt.size(); ++i)
                pt_str += (i ? ", " : "") + std::to_string(pt[i]);
            pt_str += ")";
            throw SingularMetricError(e.det, std::string(e.what()) + " at sample " + pt_str);
        }
        scale = std::max(scale, dg.max_abs());
        for (int k = 0; k < m; ++k)
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    out.max_defect = std::max(out.max_defect,
                                              std::abs(dg(k, i, j) - dg(i, k, j)));
    }
    out.is_lagrange_like = out.max_defect <= 1e-9 * scale;
    return out;
}

std::vector<double> spray_coefficients(const LagrangianChart& chart, std::span<const double> x,
                                       std::span<const double> y) {
    const int m = chart.dim;
    std::vector<double> pt(x.begin(), x.end());
    pt.insert(pt.end(), y.begin(), y.end());
    const auto vars = tangent_vars(m);
    const DerivStack st = jet::deriv_stack(chart.L, vars, pt);
    auto X = [&](int a) { return a; };
    auto Y = [&](int i) { return m + i; };

    SymMat g(m);
    for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) g.set(i, j, st.g2(Y(i), Y(j)));
    const SymMat gi = tensor::invert(g);

    std::vector<double> A(static_cast<std::size_t>(m), 0.0);
    for (int l = 0; l < m; ++l) {
        double acc = -st.g1(X(l));
        for (int k = 0; k < m; ++k) acc += y[static_cast<std::size_t>(k)] * st.g2(Y(l), X(k));
        A[static_cast<std::size_t>(l)] = acc;
    }
    std::vector<double> G(static_cast<std::size_t>(m), 0.0);
    for (int j = 0; j < m; ++j) {
        double acc = 0.0;
        for (int l = 0; l < m; ++l) acc += gi(j, l) * A[static_cast<std::size_t>(l)];
        G[static_cast<std::size_t>(j)] = 0.5 * acc;
    }
    return G;
}

std::vector<double> cartan_nonlinear_connection(const LagrangianChart& chart,
                                                std::span<const double> x,
                                                std::span<const double> y) {
    const int m = chart.dim;
    std::vector<double> pt(x.begin(), x.end());
    pt.insert(pt.end(), y.begin(), y.end());
    const auto vars = tangent_vars(m);
    const DerivStack st = jet::deriv_stack(chart.L, vars, pt);
    auto X = [&](int a) { return a; };
    auto Y = [&](int i) { return m + i; };

    SymMat g(m);
    for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) g.set(i, j, st.g2(Y(i), Y(j)));
    const SymMat gi = tensor::invert(g);

    std::vector<double> A(static_cast<std::size_t>(m), 0.0);
    for (int l = 0; l < m; ++l) {
        double acc = -st.g1(X(l));
        for (int k = 0; k < m; ++k) acc += y[static_cast<std::size_t>(k)] * st.g2(Y(l), X(k));
        A[static_cast<std::size_t>(l)] = acc;
    }
    // dA[l][i] = d A_l / dy^i
    std::vector<double> dA(static_cast<std::size_t>(m) * m, 0.0);
    for (int l = 0; l < m; ++l)
        for (int i = 0; i < m; ++i) {
            double acc = st.g2(Y(l), X(i)) - st.g2(X(l), Y(i));
            for (int k = 0; k < m; ++k)
                acc += y[static_cast<std::size_t>(k)] * st.g3(Y(i), Y(l), X(k));
            dA[static_cast<std::size_t>(l * m + i)] = acc;
        }
    // d g^{jl} / dy^i = - g^{ja} (d3 L)_{i a b} g^{bl}  (fiber indices)
    std::vector<double> t(static_cast<std::size_t>(m) * m, 0.0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            double acc = 0.0;
            for (int l = 0; l < m; ++l) {
                double dgi = 0.0;
                for (int a = 0; a < m; ++a)
                    for (int b = 0; b < m; ++b)
                        dgi -= gi(j, a) * st.g3(Y(i), Y(a), Y(b)) * gi(b, l);
                acc += dgi * A[static_cast<std::size_t>(l)] +
                       gi(j, l) * dA[static_cast<std::size_t>(l * m + i)];
            }
            // t_i^j = dG^j/dy^i
            t[static_cast<std::size_t>(i * m + j)] = 0.5 * acc;
        }
    return t;
}

AdaptedFrame adapted_coframe(std::span<const double> t, int m) {
    AdaptedFrame out;
    out.dim = m;
    const int w = 2 * m;
    out.horizontal.assign(static_cast<std::size_t>(m) * w, 0.0);
    out.coframe.assign(static_cast<std::size_t>(m) * w, 0.0);
    for (int i = 0; i < m; ++i) {
        out.horizontal[static_cast<std::size_t>(i * w + i)] = 1.0;  // d/dx^i part
        out.coframe[static_cast<std::size_t>(i * w + m + i)] = 1.0;  // dy^i part
        for (int j = 0; j < m; ++j) {
            out.horizontal[static_cast<std::size_t>(i * w + m + j)] =
                -t[static_cast<std::size_t>(i * m + j)];
            out.coframe[static_cast<std::size_t>(i * w + j)] =
                t[static_cast<std::size_t>(j * m + i)];
        }
    }
    // <theta^a, X_b> must vanish and <theta^a, d/dy^j> must be delta
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            double pair = 0.0;
            for (int k = 0; k < w; ++k)
                pair += out.coframe[static_cast<std::size_t>(a * w + k)] *
                        out.horizontal[static_cast<std::size_t>(b * w + k)];
            out.max_pairing_defect = std::max(out.max_pairing_defect, std::abs(pair));
            double dy = out.coframe[static_cast<std::size_t>(a * w + m + b)] -
                        (a == b ? 1.0 : 0.0);
            out.max_pairing_defect = std::max(out.max_pairing_defect, std::abs(dy));
        }
    return out;
}

double kahler_closedness(const LagrangianChart& chart, std::span<const double> x,
                         std::span<const double> y) {
    const jet::DerivStack st = fiber_stack(chart, x, y);
    const int m = chart.dim;
    // coefficients of the leafwise differential of g_ij dy^i ^ deta^j
    double defect = 0.0;
    for (int k = 0; k < m; ++k)
        for (int i = k + 1; i < m; ++i)
            for (int j = 0; j < m; ++j)
                defect = std::max(defect, std::abs(st.g3(k, i, j) - st.g3(i, k, j)));
    return defect;
}

double kahler_closedness(const DirectMetricChart& chart, std::span<const double> x,
                         std::span<const double> y) {
    const int m = chart.dim;
    const auto fixed = bind(chart.xvars, x);
    Tensor3 dg(m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            const auto& f = chart.comps[static_cast<std::size_t>(i * m + j)];
            const DerivStack st = jet::deriv_stack(f, chart.yvars, y, fixed);
            for (int k = 0; k < m; ++k) dg.at(k, i, j) = st.g1(k);
        }
    double defect = 0.0;
    for (int k = 0; k < m; ++k)
        for (int i = k + 1; i < m; ++i)
            for (int j = 0; j < m; ++j)
                defect = std::max(defect, std::abs(dg(k, i, j) - dg(i, k, j)));
    return defect;
}

tensor::Tensor4 leaf_metric_curvature(const LagrangianChart& chart, std::span<const double> x,
                                      std::span<const double> y) {
    const jet::DerivStack st = fiber_stack(chart, x, y);
    const int m = chart.dim;
    const int n = 2 * m;

    // doubled leaf metric h = g (+) g over (y, eta); g is eta-independent
    SymMat h(n);
    Tensor3 dh(n);
    Tensor4 ddh(n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            h.set(i, j, st.g2(i, j));
            h.set(m + i, m + j, st.g2(i, j));
            for (int k = 0; k < m; ++k) {
                dh.at(k, i, j) = st.g3(k, i, j);
                dh.at(k, m + i, m + j) = st.g3(k, i, j);
                for (int l = 0; l < m; ++l) {
                    ddh.at(k, l, i, j) = st.g4(k, l, i, j);
                    ddh.at(k, l, m + i, m + j) = st.g4(k, l, i, j);
                }
            }
        }
    const SymMat h_inv = tensor::invert(h);
    const Tensor3 gamma = hess::levi_civita_pre(h_inv, dh);
    const Tensor4 dgamma = hess::christoffel_derivative(h_inv, dh, ddh);
    return hess::riemann(gamma, dgamma, h);
}

tensor::Tensor4 leaf_kahler_curvature(const LagrangianChart& chart, std::span<const double> x,
                                      std::span<const double> y) {
    const Tensor4 full = leaf_metric_curvature(chart, x, y);
    const int m = chart.dim;
    Tensor4 out(m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (int c = 0; c < m; ++c)
                for (int d = 0; d < m; ++d) out.at(a, b, c, d) = full(a, b, c, d);
    return out;
}

HalfQResult verify_half_Q(const LagrangianChart& chart, std::span<const double> x,
                          std::span<const double> y) {
    const int m = chart.dim;
    const hess::HessPackage pkg = fiber_package(chart, x, y);
    const Tensor4 full = leaf_metric_curvature(chart, x, y);

    HalfQResult out;
    out.q_max = pkg.q.max_abs();
    double resid = 0.0, leaf_max = 0.0, jres = 0.0, full_max = full.max_abs();
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (int c = 0; c < m; ++c)
                for (int d = 0; d < m; ++d) {
                    const double leaf = full(a, b, c, d);
                    leaf_max = std::max(leaf_max, std::abs(leaf));
                    // canonical slot assignment "1342", antisymmetrized in the
                    // plane slots, with the half factor
                    const double rhs = 0.5 * (pkg.q(a, c, d, b) - pkg.q(a, d, c, b));
                    resid = std::max(resid, std::abs(leaf - rhs));
                    jres = std::max(jres,
                                    std::abs(full(m + a, m + b, c, d) - full(a, b, c, d)));
                }
    out.raw_residual = resid;
    out.residual = resid / std::max(1.0, out.q_max);
    out.leaf_r_max = leaf_max;
    out.j_symmetry_residual = jres / std::max(1.0, full_max);
    return out;
}

tensor::Tensor4 hashiguchi_vertical(const tensor::Tensor4& q_fiber) {
    const int m = q_fiber.dim();
    Tensor4 out(m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (int c = 0; c < m; ++c)
                for (int d = 0; d < m; ++d)
                    out.at(a, b, c, d) = 0.5 * (q_fiber(a, c, d, b) - q_fiber(a, d, c, b));
    return out;
}

double euler_homogeneity(const LagrangianChart& chart, std::span<const double> x,
                         std::span<const double> y) {
    const jet::DerivStack st = fiber_stack(chart, x, y);
    double acc = -2.0 * st.d0;
    for (int i = 0; i < chart.dim; ++i) acc += y[static_cast<std::size_t>(i)] * st.g1(i);
    return std::abs(acc);
}

LagPackage lag_package(const LagrangianChart& chart, std::span<const double> x,
                       std::span<const double> y) {
    LagPackage p;
    p.x.assign(x.begin(), x.end());
    p.y.assign(y.begin(), y.end());
    p.fiber = fiber_package(chart, x, y);
    p.t = cartan_nonlinear_connection(chart, x, y);
    p.kahler_defect = kahler_closedness(chart, x, y);
    p.cartan_defect = p.kahler_defect;  // same antisymmetry, measured on the fiber stack
    p.leaf_r = leaf_kahler_curvature(chart, x, y);
    p.euler_defect = euler_homogeneity(chart, x, y);
    return p;
}

}  // namespace hg::lag
