#include "cmorph/cortex_geometry.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "cmorph/error.hpp"

namespace cmorph {

namespace {

constexpr double kPi = std::numbers::pi;

using cplx = std::complex<double>;

// (e^{w t} - 1) / w by its Taylor series; only called with |w t| tiny.
cplx expm1_ratio_series(cplx w, double t) {
    const cplx wt = w * t;
    return t * (1.0 + wt / 2.0 + wt * wt / 6.0 + wt * wt * wt / 24.0);
}

std::string describe(const CortexPoint& p) {
    std::ostringstream os;
    os.precision(17);
    os << "(" << p.x << ", " << p.y << ", " << p.theta << ", " << p.sigma << ")";
    return os.str();
}

}  // namespace

void MetricParams::validate() const {
    if (!(h1 > 0.0) || !(h2 > 0.0) || !std::isfinite(h1) || !std::isfinite(h2))
        throw ConfigError("cortex_geometry", "MetricParams", "h1 and h2 must be positive");
}

double wrap_orientation(double theta) {
    double w = theta - kPi * std::floor(theta / kPi);
    if (w >= kPi || w < 0.0) w = 0.0;
    return w;
}

CortexPoint canonical(const CortexPoint& p) {
    return {p.x, p.y, wrap_orientation(p.theta), p.sigma};
}

double angular_delta(double theta0, double theta1) {
    double d = std::fmod(theta1 - theta0, kPi);
    if (d > kPi / 2) d -= kPi;
    if (d <= -kPi / 2) d += kPi;
    return d;
}

FlowBranch flow_branch(double c2, double c4_tilde) {
    if (c4_tilde * c4_tilde + c2 * c2 <= geometry_tolerances::kSmallRate)
        return FlowBranch::PureTranslation;
    if (std::abs(c2) <= geometry_tolerances::kSmallRotation) return FlowBranch::SmallRotation;
    return FlowBranch::General;
}

FlowMatrix flow_matrix_general(double theta_start, double sigma0, double c2, double c4_tilde,
                               double h1, double t) {
    const double th_t = theta_start + c2 * t;
    const double sig_t = sigma0 * std::exp(c4_tilde * t);
    const double c0 = std::cos(theta_start), s0 = std::sin(theta_start);
    const double ct = std::cos(th_t), st = std::sin(th_t);
    const double den = h1 * (c4_tilde * c4_tilde + c2 * c2);

    FlowMatrix s;
    s.s11 = (st - s0) / c2;
    s.s21 = (-ct + c0) / c2;
    s.s12 = ((c2 * sig_t * ct - c4_tilde * sig_t * st) - (c2 * sigma0 * c0 - c4_tilde * sigma0 * s0)) / den;
    s.s22 = ((c4_tilde * sig_t * ct + c2 * sig_t * st) - (c4_tilde * sigma0 * c0 + c2 * sigma0 * s0)) / den;
    return s;
}

FlowMatrix flow_matrix_series(double theta_start, double sigma0, double c2, double c4_tilde,
                              double h1, double t) {
    const cplx frame = std::polar(1.0, theta_start);
    const cplx col1 = frame * expm1_ratio_series(cplx(0.0, c2), t);
    const cplx col2 = cplx(0.0, sigma0 / h1) * frame * expm1_ratio_series(cplx(c4_tilde, c2), t);
    return {col1.real(), col2.real(), col1.imag(), col2.imag()};
}

FlowMatrix flow_matrix(double theta_start, double sigma0, double c2, double c4_tilde, double h1,
                       double t) {
    switch (flow_branch(c2, c4_tilde)) {
        case FlowBranch::PureTranslation:
            return flow_matrix_series(theta_start, sigma0, c2, c4_tilde, h1, t);
        case FlowBranch::SmallRotation: {
            // Rotation column from the series, scale column from the brackets.
            const FlowMatrix series = flow_matrix_series(theta_start, sigma0, c2, c4_tilde, h1, t);
            const FlowMatrix general = flow_matrix_general(theta_start, sigma0, c2, c4_tilde, h1, t);
            return {series.s11, general.s12, series.s21, general.s22};
        }
        case FlowBranch::General:
            break;
    }
    return flow_matrix_general(theta_start, sigma0, c2, c4_tilde, h1, t);
}

FlowCoefficients solve_flow(const CortexPoint& p0_in, const CortexPoint& p1_in,
                            const MetricParams& m) {
    const CortexPoint p0 = canonical(p0_in);
    const CortexPoint p1 = canonical(p1_in);
    if (!(p0.sigma > 0.0) || !(p1.sigma > 0.0))
        throw GeometryError("cortex_geometry", "solve_flow",
                            "nonpositive scale in pair " + describe(p0) + " -> " + describe(p1));

    FlowCoefficients c;
    c.c2 = angular_delta(p0.theta, p1.theta);
    // Lift theta0 so that the swept interval has its midpoint in [0, pi); the
    // reversed pair then sweeps the identical interval backwards.
    c.theta_start = wrap_orientation(p0.theta + 0.5 * c.c2) - 0.5 * c.c2;
    const double c4_tilde = std::log(p1.sigma / p0.sigma);
    c.c4 = m.h2 * c4_tilde;

    const FlowMatrix s = flow_matrix(c.theta_start, p0.sigma, c.c2, c4_tilde, m.h1, 1.0);
    const double det = s.s11 * s.s22 - s.s12 * s.s21;
    const double scale = std::abs(s.s11 * s.s22) + std::abs(s.s12 * s.s21);
    if (!std::isfinite(det) || std::abs(det) <= 1e-13 * scale || scale == 0.0)
        throw GeometryError("cortex_geometry", "solve_flow",
                            "singular flow matrix for pair " + describe(p0) + " -> " + describe(p1));

    const double dx = p1.x - p0.x;
    const double dy = p1.y - p0.y;
    c.c1 = (s.s22 * dx - s.s12 * dy) / det;
    c.c3 = (-s.s21 * dx + s.s11 * dy) / det;
    return c;
}

CortexPoint flow_point(const CortexPoint& p0_in, const FlowCoefficients& coeffs, double t,
                       const MetricParams& m) {
    const CortexPoint p0 = canonical(p0_in);
    const double c4_tilde = coeffs.c4 / m.h2;
    const FlowMatrix s = flow_matrix(coeffs.theta_start, p0.sigma, coeffs.c2, c4_tilde, m.h1, t);
    CortexPoint out;
    out.x = p0.x + s.s11 * coeffs.c1 + s.s12 * coeffs.c3;
    out.y = p0.y + s.s21 * coeffs.c1 + s.s22 * coeffs.c3;
    out.theta = wrap_orientation(coeffs.theta_start + coeffs.c2 * t);
    out.sigma = p0.sigma * std::exp(c4_tilde * t);
    return out;
}

double dc_distance_squared(const CortexPoint& p0, const CortexPoint& p1, const MetricParams& m) {
    return solve_flow(p0, p1, m).squared_norm();
}

double dc_distance(const CortexPoint& p0, const CortexPoint& p1, const MetricParams& m) {
    return std::sqrt(dc_distance_squared(p0, p1, m));
}

CortexPoint geodesic_point(const CortexPoint& p0, const CortexPoint& p1, double t,
                           const MetricParams& m) {
    if (!(t >= 0.0 && t <= 1.0))
        throw DomainError("cortex_geometry", "geodesic_point", "t must lie in [0,1]");
    return flow_point(p0, solve_flow(p0, p1, m), t, m);
}

}  // namespace cmorph
