#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "cmorph/error.hpp"
#include "cmorph/transport.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cmorph;

namespace {

std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.1, 1.1);
    std::vector<double> w(n);
    for (double& x : w) x = u(rng);
    const double s = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& x : w) x /= s;
    return w;
}

CostMatrix random_cost(std::mt19937_64& rng, std::size_t m, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    CostMatrix C{m, n, std::vector<double>(m * n)};
    for (double& x : C.data) x = u(rng);
    return C;
}

WeightedCloud random_cloud(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    WeightedCloud c;
    for (std::size_t i = 0; i < n; ++i) c.points.push_back({8 * u(rng), 8 * u(rng), 3 * u(rng), 1 + 2 * u(rng)});
    c.weights = random_simplex(rng, n);
    c.mass_scale = 1.0;
    return c;
}

SinkhornOptions tight(double eps) {
    SinkhornOptions o;
    o.epsilon = eps;
    o.n_iter = 50000;
    o.tol = 1e-10;
    return o;
}

}  // namespace

TEST_CASE("cost matrix") {
    std::mt19937_64 rng(1);
    const MetricParams m;
    const WeightedCloud a = random_cloud(rng, 6), b = random_cloud(rng, 4);
    const CostMatrix self = build_cost_matrix(a, a, m);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(self(i, i) == 0.0);
    const CostMatrix ab = build_cost_matrix(a, b, m), ba = build_cost_matrix(b, a, m);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) CHECK(std::abs(ab(i, j) - ba(j, i)) < 1e-9);

    // Pure scale pair at distance 2.
    WeightedCloud p, q;
    p.points = {{1, 1, 0.5, 1.0}};
    q.points = {{1, 1, 0.5, std::exp(2.0 / m.h2)}};
    p.weights = q.weights = {1.0};
    const CostMatrix one = build_cost_matrix(p, q, m);
    REQUIRE(one.data.size() == 1);
    CHECK(one(0, 0) == doctest::Approx(4.0).epsilon(1e-12));

    CHECK_THROWS_AS(build_cost_matrix(WeightedCloud{}, q, m), EmptyMeasureError);
    p.points[0].sigma = -1.0;
    CHECK_THROWS_AS(build_cost_matrix(p, q, m), GeometryError);
}

TEST_CASE("identity coupling is found for separated costs") {
    const std::vector<double> a{0.2, 0.5, 0.3};
    CostMatrix C{3, 3, {0, 9, 9, 9, 0, 9, 9, 9, 0}};
    const TransportPlan P = sinkhorn(a, a, C, tight(0.05));
    CHECK(P.cost(C) <= 1e-6);
    for (std::size_t i = 0; i < 3; ++i) CHECK(P(i, i) == doctest::Approx(a[i]).epsilon(1e-9));
}

TEST_CASE("2x2 plan matches brute-force minimization of the entropic objective") {
    const double eps = 0.1;
    const std::vector<double> a{0.5, 0.5};
    CostMatrix C{2, 2, {0, 1, 1, 0}};
    auto objective = [&](double p) {
        const double q = 0.5 - p;
        return 2 * q + eps * 2 * (p * std::log(p) + q * std::log(q));
    };
    double lo = 1e-15, hi = 0.5 - 1e-15;
    const double g = (std::sqrt(5.0) - 1) / 2;
    for (int it = 0; it < 200; ++it) {
        const double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
        (objective(x1) < objective(x2) ? hi : lo) = (objective(x1) < objective(x2) ? x2 : x1);
    }
    const double off = 0.5 - 0.5 * (lo + hi);
    const TransportPlan P = sinkhorn(a, a, C, tight(eps));
    CHECK(P(0, 1) == doctest::Approx(P(1, 0)).epsilon(1e-12));
    CHECK(P(0, 0) == doctest::Approx(P(1, 1)).epsilon(1e-12));
    CHECK(std::abs(P(0, 1) - off) < 1e-8);
    CHECK(std::abs(off - 0.5 / (1 + std::exp(1 / eps))) < 1e-8);
}

TEST_CASE("entropic cost decreases toward the LP optimum") {
    std::mt19937_64 rng(4);
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t m = 2 + rep % 3, n = 2 + (rep / 3) % 3;
        const auto a = random_simplex(rng, m), b = random_simplex(rng, n);
        const CostMatrix C = random_cost(rng, m, n);
        const double lp = oracle::exact_transport_cost(a, b, C.data);
        double prev = std::numeric_limits<double>::infinity();
        for (double eps : {0.5, 0.1, 0.02}) {
            const double cost = sinkhorn(a, b, C, tight(eps)).cost(C);
            CHECK(cost <= prev + 1e-9);
            CHECK(cost >= lp - 1e-9);
            prev = cost;
        }
        CHECK(prev - lp <= 0.02 * std::log(double(m * n)) + 1e-9);
    }
}

TEST_CASE("LP oracle on a hand-solved instance") {
    // Greedy north-west corner is optimal here: cost 0.3*1 + 0.2*2 + 0.5*1.
    const std::vector<double> a{0.5, 0.5}, b{0.3, 0.7};
    const std::vector<double> C{1, 2, 5, 1};
    CHECK(oracle::exact_transport_cost(a, b, C) == doctest::Approx(1.2));
}

TEST_CASE("random 50x50 instances converge") {
    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 5; ++rep) {
        const auto a = random_simplex(rng, 50), b = random_simplex(rng, 50);
        const CostMatrix C = random_cost(rng, 50, 50);
        SinkhornOptions o;
        o.epsilon = 0.05;
        o.n_iter = 20000;
        o.tol = 1e-8;
        const TransportPlan P = sinkhorn(a, b, C, o);
        CHECK(P.marginal_residual <= 1e-6);
        for (double x : P.matrix) REQUIRE(x >= 0.0);
    }
}

TEST_CASE("permutation equivariance") {
    std::mt19937_64 rng(12);
    const auto a = random_simplex(rng, 5), b = random_simplex(rng, 4);
    const CostMatrix C = random_cost(rng, 5, 4);
    const std::vector<std::size_t> pr{3, 0, 4, 1, 2}, pc{2, 3, 1, 0};
    std::vector<double> a2(5), b2(4);
    CostMatrix C2{5, 4, std::vector<double>(20)};
    for (std::size_t i = 0; i < 5; ++i) a2[i] = a[pr[i]];
    for (std::size_t j = 0; j < 4; ++j) b2[j] = b[pc[j]];
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 4; ++j) C2(i, j) = C(pr[i], pc[j]);
    const TransportPlan P = sinkhorn(a, b, C, tight(0.05)), P2 = sinkhorn(a2, b2, C2, tight(0.05));
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs(P2(i, j) - P(pr[i], pc[j])) < 1e-9);
}

TEST_CASE("sinkhorn input errors") {
    const std::vector<double> a{0.5, 0.5};
    const CostMatrix C{2, 2, {0, 1, 1, 0}};
    CHECK_THROWS_AS(sinkhorn(a, a, C, 0.0, 10, 1e-9), DomainError);
    CHECK_THROWS_AS(sinkhorn(std::vector<double>{1.0}, a, C, 0.1, 10, 1e-9), ShapeError);
    CHECK_THROWS_AS(sinkhorn(std::vector<double>{1.0, 0.0}, a, C, 0.1, 10, 1e-9), DomainError);
    const CostMatrix bad{2, 2, {0, NAN, 1, 0}};
    CHECK_THROWS_AS(sinkhorn(a, a, bad, 0.1, 10, 1e-9), DomainError);
    // Huge costs at tiny epsilon still run in the log domain.
    const CostMatrix huge{2, 2, {0, 1e4, 1e4, 0}};
    const TransportPlan P = sinkhorn(a, a, huge, 1e-3, 100, 1e-12);
    CHECK(P.marginal_residual < 1e-12);
}

TEST_CASE("displacement interpolation") {
    std::mt19937_64 rng(2);
    const MetricParams m;
    const WeightedCloud src = random_cloud(rng, 7), dst = random_cloud(rng, 5);
    const CostMatrix C = build_cost_matrix(src, dst, m);
    const TransportPlan P = sinkhorn(src.weights, dst.weights, C, tight(0.5));
    const auto rows = P.row_sums(), cols = P.col_sums();

    auto gathered = [](const WeightedCloud& c, const WeightedCloud& ref) {
        std::vector<double> w(ref.size(), 0.0);
        for (std::size_t k = 0; k < c.size(); ++k) {
            std::size_t best = 0;
            double bd = 1e300;
            for (std::size_t i = 0; i < ref.size(); ++i) {
                const CortexPoint& p = c.points[k];
                const CortexPoint& q = ref.points[i];
                const double d = std::abs(p.x - q.x) + std::abs(p.y - q.y) +
                                 oracle::orientation_gap(p.theta, q.theta) + std::abs(p.sigma - q.sigma);
                if (d < bd) bd = d, best = i;
            }
            REQUIRE(bd < 1e-9);
            w[best] += c.weights[k];
        }
        return w;
    };
    const auto w0 = gathered(interpolate_plan(P, src, dst, 0.0, m), src);
    const auto w1 = gathered(interpolate_plan(P, src, dst, 1.0, m), dst);
    for (std::size_t i = 0; i < w0.size(); ++i) CHECK(w0[i] == doctest::Approx(rows[i]).epsilon(1e-12));
    for (std::size_t j = 0; j < w1.size(); ++j) CHECK(w1[j] == doctest::Approx(cols[j]).epsilon(1e-12));
    for (double t : {0.1, 0.5, 0.9})
        CHECK(std::abs(interpolate_plan(P, src, dst, t, m).total_weight() - 1.0) < 1e-9);

    TransportPlan id;
    id.rows = id.cols = src.size();
    id.matrix.assign(src.size() * src.size(), 0.0);
    for (std::size_t i = 0; i < src.size(); ++i) id.matrix[i * src.size() + i] = src.weights[i];
    for (double t : {0.0, 0.3, 1.0}) {
        const WeightedCloud c = interpolate_plan(id, src, src, t, m);
        REQUIRE(c.size() == src.size());
        for (std::size_t i = 0; i < c.size(); ++i) {
            CHECK(std::abs(c.points[i].x - src.points[i].x) < 1e-12);
            CHECK(std::abs(c.points[i].y - src.points[i].y) < 1e-12);
            CHECK(oracle::orientation_gap(c.points[i].theta, src.points[i].theta) < 1e-12);
            CHECK(c.weights[i] == doctest::Approx(src.weights[i]).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(interpolate_plan(P, src, dst, 1.5, m), DomainError);
    CHECK_THROWS_AS(interpolate_plan(P, dst, src, 0.5, m), ShapeError);
}
