#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hessian.hpp"

namespace hg::lag {

// A Lagrangian L(x1..xm, y1..ym); x enters the fiber geometry purely as a
// parameter.
struct LagrangianChart {
    expr::ScalarField L;
    int dim = 0;
    std::vector<std::string> xvars, yvars;

    static LagrangianChart make(std::string_view text, int m);
};

// Direct metric data: m*m component fields g_ij(x, y) with g_ij = g_ji
// (entries are required to be textually symmetric).
struct DirectMetricChart {
    int dim = 0;
    std::vector<expr::ScalarField> comps;  // row-major m*m
    std::vector<std::string> xvars, yvars;

    static DirectMetricChart make(std::span<const std::string> components, int m);
};

std::vector<std::string> coord_names(const std::string& prefix, int m);

// Fiber Hessian package of L(x, .) at y.
hess::HessPackage fiber_package(const LagrangianChart& chart, std::span<const double> x,
                                std::span<const double> y);

jet::DerivStack fiber_stack(const LagrangianChart& chart, std::span<const double> x,
                            std::span<const double> y);

struct LagrangeTest {
    bool is_lagrange_like = false;
    double max_defect = 0.0;
};
// Total-symmetry test of dg/dy over the given sample points; errors with the
// point on a singular sample.
LagrangeTest locally_lagrange_test(const DirectMetricChart& chart,
                                   std::span<const std::vector<double>> samples);

// Cartan nonlinear connection from the geodesic spray of L:
//   G^j = 1/2 g^{jl} (y^k d2L/dy^l dx^k - dL/dx^l),   t_i^j = dG^j/dy^i,
// with g the fiber Hessian of L. Returned row-major with t[i][j] = t_i^j.
std::vector<double> cartan_nonlinear_connection(const LagrangianChart& chart,
                                                std::span<const double> x,
                                                std::span<const double> y);

// Spray coefficients G^j themselves (exposed for the finite-difference oracle).
std::vector<double> spray_coefficients(const LagrangianChart& chart, std::span<const double> x,
                                       std::span<const double> y);

struct AdaptedFrame {
    int dim = 0;
    // rows are frame/coframe elements over the 2m coordinates (x-block then y-block)
    std::vector<double> horizontal;  // X_i = d/dx^i - t_i^j d/dy^j
    std::vector<double> coframe;     // theta^i = dy^i + t^i_j dx^j
    double max_pairing_defect = 0.0;
};
AdaptedFrame adapted_coframe(std::span<const double> t, int m);

// Closedness defect of the leafwise form g_ij dy^i ^ deta^j: the largest
// antisymmetric part of dg_ij/dy^k over k. Zero iff the Cartan tensor is
// symmetric.
double kahler_closedness(const LagrangianChart& chart, std::span<const double> x,
                         std::span<const double> y);
double kahler_closedness(const DirectMetricChart& chart, std::span<const double> x,
                         std::span<const double> y);

// Levi-Civita curvature of the doubled leaf metric h = g (+) g on (y, eta) at
// eta = 0, full 2m-dimensional lowered tensor.
tensor::Tensor4 leaf_metric_curvature(const LagrangianChart& chart, std::span<const double> x,
                                      std::span<const double> y);

// Restriction of the leaf curvature to the first-block arguments d/dy.
tensor::Tensor4 leaf_kahler_curvature(const LagrangianChart& chart, std::span<const double> x,
                                      std::span<const double> y);

struct HalfQResult {
    double residual = 0.0;  // normalized by max(1, |Q|)
    double raw_residual = 0.0;
    double q_max = 0.0;
    double leaf_r_max = 0.0;
    double j_symmetry_residual = 0.0;  // R(J.,J.,.,.) vs R(.,.,.,.), normalized
};
// Leaf curvature against half the antisymmetrized fiber Hessian curvature
// under the canonical slot assignment.
HalfQResult verify_half_Q(const LagrangianChart& chart, std::span<const double> x,
                          std::span<const double> y);

// Hashiguchi vertical curvature from the fiber Hessian curvature.
tensor::Tensor4 hashiguchi_vertical(const tensor::Tensor4& q_fiber);

// |y^i dL/dy^i - 2L| at (x, y).
double euler_homogeneity(const LagrangianChart& chart, std::span<const double> x,
                         std::span<const double> y);

struct LagPackage {
    std::vector<double> x, y;
    hess::HessPackage fiber;
    std::vector<double> t;  // nonlinear connection coefficients, row-major
    double cartan_defect = 0.0;
    double kahler_defect = 0.0;
    tensor::Tensor4 leaf_r;  // restricted to vertical first-block arguments
    double euler_defect = 0.0;
};
LagPackage lag_package(const LagrangianChart& chart, std::span<const double> x,
                       std::span<const double> y);

}  // namespace hg::lag
