#pragma once

namespace cmorph {

// A point (x, y, theta, sigma) of the cortical domain [0,D]^2 x S^1 x [smin,smax].
// The geometry routines treat theta as an orientation (period pi) and
// canonicalize it to [0, pi); the continuous filter family reads it raw.
struct CortexPoint {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;
    double sigma = 1.0;

    bool operator==(const CortexPoint&) const = default;
};

struct MetricParams {
    double h1 = 0.7;
    double h2 = 5.0;

    void validate() const;
    bool operator==(const MetricParams&) const = default;
};

// Coefficients of the constant-coefficient field c1*Y1 + c2*Y2 + c3*Y3 + c4*Y4
// whose time-one flow joins two points. theta_start is the lift of the
// starting orientation actually used by the flow: it differs from the
// canonical theta0 by a multiple of pi and is chosen so that the swept angle
// interval is the same for both directions of travel.
struct FlowCoefficients {
    double c1 = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;
    double c4 = 0.0;
    double theta_start = 0.0;

    double squared_norm() const { return c1 * c1 + c2 * c2 + c3 * c3 + c4 * c4; }
};

// Spatial flow matrix S_t mapping (c1, c3) to the displacement (x_t - x0, y_t - y0).
struct FlowMatrix {
    double s11 = 0.0, s12 = 0.0, s21 = 0.0, s22 = 0.0;
};

namespace geometry_tolerances {
// Below these, the closed-form brackets are replaced by their series limits.
inline constexpr double kSmallRotation = 1e-6;
inline constexpr double kSmallRate = 1e-12;  // bound on c4t^2 + c2^2
}  // namespace geometry_tolerances

double wrap_orientation(double theta);
CortexPoint canonical(const CortexPoint& p);

// Signed delta in (-pi/2, pi/2] with theta1 == theta0 + delta (mod pi).
double angular_delta(double theta0, double theta1);

// Which branch flow_matrix takes for the given rates; exposed for tests.
enum class FlowBranch { General, SmallRotation, PureTranslation };
FlowBranch flow_branch(double c2, double c4_tilde);

FlowMatrix flow_matrix(double theta_start, double sigma0, double c2, double c4_tilde,
                       double h1, double t);
// Same matrix from the closed-form brackets or the series, forced; for the
// limit-consistency checks only.
FlowMatrix flow_matrix_general(double theta_start, double sigma0, double c2, double c4_tilde,
                               double h1, double t);
FlowMatrix flow_matrix_series(double theta_start, double sigma0, double c2, double c4_tilde,
                              double h1, double t);

FlowCoefficients solve_flow(const CortexPoint& p0, const CortexPoint& p1, const MetricParams& m);

// Point at time t on the flow of `coeffs` started at (p0.x, p0.y, coeffs.theta_start, p0.sigma).
// theta is returned canonical; x, y are not clamped.
CortexPoint flow_point(const CortexPoint& p0, const FlowCoefficients& coeffs, double t,
                       const MetricParams& m);

double dc_distance(const CortexPoint& p0, const CortexPoint& p1, const MetricParams& m);
double dc_distance_squared(const CortexPoint& p0, const CortexPoint& p1, const MetricParams& m);

CortexPoint geodesic_point(const CortexPoint& p0, const CortexPoint& p1, double t,
                           const MetricParams& m);

}  // namespace cmorph
