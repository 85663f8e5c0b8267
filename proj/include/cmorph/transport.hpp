#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "cmorph/cortex_geometry.hpp"
#include "cmorph/lifting.hpp"

namespace cmorph {

// Dense row-major cost matrix.
struct CostMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
};

// C_ij = d_c(p_i, q_j)^2. Geometry failures are rethrown with the offending indices.
CostMatrix build_cost_matrix(const WeightedCloud& src, const WeightedCloud& dst,
                             const MetricParams& m);

struct TransportPlan {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> matrix;
    double epsilon = 0.0;
    int iterations_run = 0;
    // max(||P 1 - a||_1, ||P^T 1 - b||_1) of the returned matrix.
    double marginal_residual = 0.0;

    double operator()(std::size_t i, std::size_t j) const { return matrix[i * cols + j]; }
    std::vector<double> row_sums() const;
    std::vector<double> col_sums() const;
    double cost(const CostMatrix& C) const;
};

struct SinkhornOptions {
    double epsilon = 0.05;
    int n_iter = 2000;
    double tol = 1e-7;
    int check_every = 10;
};

// Entropic OT minimizing <P,C> - eps*H(P) by stabilized log-domain Sinkhorn:
// potentials f, g are absorbed whenever the scaling vectors leave a safe
// range. Stops after n_iter iterations or once the marginal residual drops
// below tol.
TransportPlan sinkhorn(std::span<const double> a, std::span<const double> b, const CostMatrix& C,
                       const SinkhornOptions& opts);
TransportPlan sinkhorn(std::span<const double> a, std::span<const double> b, const CostMatrix& C,
                       double epsilon, int n_iter, double tol);

inline constexpr double kPlanWeightFloor = 1e-12;

// Displacement interpolation: every plan entry above the floor moves along
// the d_c geodesic between its endpoints; weights renormalized to unit mass.
WeightedCloud interpolate_plan(const TransportPlan& plan, const WeightedCloud& src,
                               const WeightedCloud& dst, double t, const MetricParams& m);

}  // namespace cmorph
