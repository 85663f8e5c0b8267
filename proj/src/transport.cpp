#include "cmorph/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cmorph/error.hpp"

namespace cmorph {

CostMatrix build_cost_matrix(const WeightedCloud& src, const WeightedCloud& dst,
                             const MetricParams& m) {
    if (src.empty() || dst.empty())
        throw EmptyMeasureError("transport", "build_cost_matrix", "empty support");
    CostMatrix C;
    C.rows = src.size();
    C.cols = dst.size();
    C.data.resize(C.rows * C.cols);
    for (std::size_t i = 0; i < C.rows; ++i) {
        for (std::size_t j = 0; j < C.cols; ++j) {
            try {
                C(i, j) = dc_distance_squared(src.points[i], dst.points[j], m);
            } catch (const GeometryError& e) {
                throw GeometryError("transport", "build_cost_matrix",
                                    "pair (" + std::to_string(i) + ", " + std::to_string(j) +
                                        "): " + e.what());
            }
        }
    }
    return C;
}

std::vector<double> TransportPlan::row_sums() const {
    std::vector<double> r(rows, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < cols; ++j) s += matrix[i * cols + j];
        r[i] = s;
    }
    return r;
}

std::vector<double> TransportPlan::col_sums() const {
    std::vector<double> c(cols, 0.0);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) c[j] += matrix[i * cols + j];
    return c;
}

double TransportPlan::cost(const CostMatrix& C) const {
    double s = 0.0;
    for (std::size_t k = 0; k < matrix.size(); ++k) s += matrix[k] * C.data[k];
    return s;
}

namespace {

// Scalings outside [1/kAbsorb, kAbsorb] are folded into the potentials.
constexpr double kAbsorb = 1e30;

class StabilizedSinkhorn {
public:
    StabilizedSinkhorn(std::span<const double> a, std::span<const double> b, const CostMatrix& C,
                       double eps)
        : a_(a), b_(b), C_(C), eps_(eps), n_(C.rows), m_(C.cols), f_(n_, 0.0), g_(m_, 0.0),
          u_(n_, 1.0), v_(m_, 1.0), K_(n_ * m_), Kv_(n_), Ktu_(m_) {
        log_a_.resize(n_);
        log_b_.resize(m_);
        for (std::size_t i = 0; i < n_; ++i) log_a_[i] = std::log(a_[i]);
        for (std::size_t j = 0; j < m_; ++j) log_b_[j] = std::log(b_[j]);
        log_domain_step();
    }

    // One scaling iteration; columns are exactly matched afterwards.
    void iterate() {
        multiply_K(v_, Kv_);
        for (std::size_t i = 0; i < n_; ++i) u_[i] = a_[i] / Kv_[i];
        multiply_Kt(u_, Ktu_);
        for (std::size_t j = 0; j < m_; ++j) v_[j] = b_[j] / Ktu_[j];
        if (!scalings_safe()) log_domain_step();
    }

    // max(||P 1 - a||_1, ||P^T 1 - b||_1) of the current plan.
    double residual() {
        multiply_K(v_, Kv_);
        multiply_Kt(u_, Ktu_);
        double er = 0.0, ec = 0.0;
        for (std::size_t i = 0; i < n_; ++i) er += std::abs(u_[i] * Kv_[i] - a_[i]);
        for (std::size_t j = 0; j < m_; ++j) ec += std::abs(v_[j] * Ktu_[j] - b_[j]);
        return std::max(er, ec);
    }

    std::vector<double> plan() const {
        std::vector<double> P(n_ * m_);
        for (std::size_t i = 0; i < n_; ++i) {
            const double* k = &K_[i * m_];
            double* p = &P[i * m_];
            for (std::size_t j = 0; j < m_; ++j) p[j] = u_[i] * k[j] * v_[j];
        }
        return P;
    }

private:
    bool scalings_safe() const {
        for (double x : u_)
            if (!(x < kAbsorb && x > 1.0 / kAbsorb)) return false;
        for (double x : v_)
            if (!(x < kAbsorb && x > 1.0 / kAbsorb)) return false;
        return true;
    }

    // Absorbs the scalings, then performs one exact log-sum-exp update of g
    // and f and rebuilds the stabilized kernel.
    void log_domain_step() {
        for (std::size_t i = 0; i < n_; ++i)
            if (std::isfinite(u_[i]) && u_[i] > 0.0) f_[i] += eps_ * std::log(u_[i]);
        for (std::size_t j = 0; j < m_; ++j)
            if (std::isfinite(v_[j]) && v_[j] > 0.0) g_[j] += eps_ * std::log(v_[j]);

        std::vector<double> col_max(m_, -std::numeric_limits<double>::infinity());
        std::vector<double> col_acc(m_, 0.0);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < m_; ++j)
                col_max[j] = std::max(col_max[j], (f_[i] - C_(i, j)) / eps_);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < m_; ++j)
                col_acc[j] += std::exp((f_[i] - C_(i, j)) / eps_ - col_max[j]);
        for (std::size_t j = 0; j < m_; ++j)
            g_[j] = eps_ * (log_b_[j] - col_max[j] - std::log(col_acc[j]));

        for (std::size_t i = 0; i < n_; ++i) {
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < m_; ++j) mx = std::max(mx, (g_[j] - C_(i, j)) / eps_);
            double acc = 0.0;
            for (std::size_t j = 0; j < m_; ++j) acc += std::exp((g_[j] - C_(i, j)) / eps_ - mx);
            f_[i] = eps_ * (log_a_[i] - mx - std::log(acc));
        }

        for (std::size_t i = 0; i < n_; ++i)
            if (!std::isfinite(f_[i])) fail();
        for (std::size_t j = 0; j < m_; ++j)
            if (!std::isfinite(g_[j])) fail();

        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < m_; ++j)
                K_[i * m_ + j] = std::exp((f_[i] + g_[j] - C_(i, j)) / eps_);
        std::fill(u_.begin(), u_.end(), 1.0);
        std::fill(v_.begin(), v_.end(), 1.0);
    }

    [[noreturn]] void fail() const {
        throw NumericalError("transport", "sinkhorn",
                             "non-finite dual potentials; epsilon " + std::to_string(eps_) +
                                 " is too small for the cost range, use a larger epsilon");
    }

    void multiply_K(const std::vector<double>& x, std::vector<double>& out) const {
        for (std::size_t i = 0; i < n_; ++i) {
            const double* k = &K_[i * m_];
            double s = 0.0;
            for (std::size_t j = 0; j < m_; ++j) s += k[j] * x[j];
            out[i] = s;
        }
    }

    void multiply_Kt(const std::vector<double>& x, std::vector<double>& out) const {
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            const double* k = &K_[i * m_];
            const double xi = x[i];
            double* o = out.data();
            for (std::size_t j = 0; j < m_; ++j) o[j] += k[j] * xi;
        }
    }

    std::span<const double> a_, b_;
    const CostMatrix& C_;
    double eps_;
    std::size_t n_, m_;
    std::vector<double> log_a_, log_b_;
    std::vector<double> f_, g_, u_, v_;
    std::vector<double> K_, Kv_, Ktu_;
};

double marginal_residual(const TransportPlan& plan, std::span<const double> a,
                         std::span<const double> b) {
    const auto r = plan.row_sums();
    const auto c = plan.col_sums();
    double er = 0.0, ec = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) er += std::abs(r[i] - a[i]);
    for (std::size_t j = 0; j < c.size(); ++j) ec += std::abs(c[j] - b[j]);
    return std::max(er, ec);
}

}  // namespace

TransportPlan sinkhorn(std::span<const double> a, std::span<const double> b, const CostMatrix& C,
                       const SinkhornOptions& opts) {
    if (a.size() != C.rows || b.size() != C.cols || a.empty() || b.empty())
        throw ShapeError("transport", "sinkhorn", "marginals do not match the cost matrix");
    if (!(opts.epsilon > 0.0)) throw DomainError("transport", "sinkhorn", "epsilon must be positive");
    for (double x : a)
        if (!(x > 0.0)) throw DomainError("transport", "sinkhorn", "source weights must be positive");
    for (double x : b)
        if (!(x > 0.0)) throw DomainError("transport", "sinkhorn", "target weights must be positive");
    for (double c : C.data)
        if (!std::isfinite(c)) throw DomainError("transport", "sinkhorn", "non-finite cost entry");

    StabilizedSinkhorn solver(a, b, C, opts.epsilon);
    const int check = std::max(1, opts.check_every);
    int it = 0;
    while (it < opts.n_iter) {
        solver.iterate();
        ++it;
        if (it % check == 0 && solver.residual() < opts.tol) break;
    }

    TransportPlan plan;
    plan.rows = C.rows;
    plan.cols = C.cols;
    plan.matrix = solver.plan();
    plan.epsilon = opts.epsilon;
    plan.iterations_run = it;
    for (double x : plan.matrix)
        if (!std::isfinite(x))
            throw NumericalError("transport", "sinkhorn",
                                 "non-finite plan entries; increase epsilon");
    plan.marginal_residual = marginal_residual(plan, a, b);
    return plan;
}

TransportPlan sinkhorn(std::span<const double> a, std::span<const double> b, const CostMatrix& C,
                       double epsilon, int n_iter, double tol) {
    SinkhornOptions opts;
    opts.epsilon = epsilon;
    opts.n_iter = n_iter;
    opts.tol = tol;
    return sinkhorn(a, b, C, opts);
}

WeightedCloud interpolate_plan(const TransportPlan& plan, const WeightedCloud& src,
                               const WeightedCloud& dst, double t, const MetricParams& m) {
    if (!(t >= 0.0 && t <= 1.0))
        throw DomainError("transport", "interpolate_plan", "t must lie in [0,1]");
    if (plan.rows != src.size() || plan.cols != dst.size())
        throw ShapeError("transport", "interpolate_plan", "plan does not match the clouds");
    WeightedCloud out;
    double total = 0.0;
    for (std::size_t i = 0; i < plan.rows; ++i) {
        for (std::size_t j = 0; j < plan.cols; ++j) {
            const double w = plan(i, j);
            if (!(w > kPlanWeightFloor)) continue;
            out.points.push_back(geodesic_point(src.points[i], dst.points[j], t, m));
            out.weights.push_back(w);
            total += w;
        }
    }
    if (out.empty())
        throw EmptyMeasureError("transport", "interpolate_plan", "plan has no entry above the floor");
    for (double& w : out.weights) w /= total;
    out.mass_scale = (1.0 - t) * src.mass_scale + t * dst.mass_scale;
    return out;
}

}  // namespace cmorph
