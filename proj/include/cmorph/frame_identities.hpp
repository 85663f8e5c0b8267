#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "cmorph/cortex_geometry.hpp"

namespace cmorph {

// Fourier transform of psi0(u, v) = exp(-u^2 - v^2) sin(2v) with the
// exp(-2 pi i x.xi) convention:
//   (pi / 2i) exp(-pi^2 xi1^2) (exp(-(pi xi2 - 1)^2) - exp(-(pi xi2 + 1)^2)).
std::complex<double> psi0_hat(double xi1, double xi2);

// Independent oracle: tensor trapezoid sum of psi0(x) exp(-2 pi i x.xi) over
// [-half_width, half_width]^2 with `nodes` points per axis.
std::complex<double> psi0_hat_quadrature(double xi1, double xi2, double half_width = 8.0,
                                         int nodes = 401);

struct CPsiQuadrature {
    double radius = 3.0;     // |xi| cut-off; the integrand is ~exp(-2 (pi r - 1)^2) beyond
    int radial_nodes = 200;  // composite Simpson in r (rounded up to even)
    int angular_nodes = 128; // trapezoid in phi
    double tolerance = 1e-3; // max relative change under one refinement
};

// C_psi = integral of |psi0_hat|^2 / |xi|^2 over the plane, in polar
// coordinates where the integrand |psi0_hat|^2 / r stays bounded at 0.
// Refines once and throws AccuracyError when the two values disagree.
double compute_C_psi(const CPsiQuadrature& q = {});

struct MonteCarloEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

// Importance-sampled estimate of C_psi: an equal mixture of two Gaussians
// centred on the lobes of |psi0_hat| at (0, +-1/pi).
MonteCarloEstimate monte_carlo_C_psi(std::uint64_t samples, std::uint64_t seed);

// Truncation box for the zero-mass integral over k = (x, y, theta, sigma).
struct ZeroMassBox {
    double sigma_lo = 0.05;
    double sigma_hi = 20.0;
    double half_width = 20.0;  // (x, y) in [-R, R]^2
    int sigma_nodes = 48;
    int theta_nodes = 32;      // even, so theta and theta + pi are both nodes
    int spatial_nodes = 24;    // Gauss-Legendre per axis
};

// Quadrature of psi^k(xt, yt) dx dy dtheta dsigma over the box.
double verify_zero_mass(const ZeroMassBox& box, double xt = 0.0, double yt = 0.0);

// Trapezoid sum over alpha in [0, 2pi) of s exp(-s^2) sin(-2 s sin alpha).
double angular_inner_integral(double s, int nodes = 256);

// <f, psi^k> for the Gaussian bump f(z) = exp(-|z - centre|^2 / (2 width^2)).
double gaussian_coefficient(const CortexPoint& k, double centre_x, double centre_y, double width);

// <f, g> for two such bumps.
double gaussian_inner_product(double fx, double fy, double fs, double gx, double gy, double gs);

struct ReconstructionBox {
    double sigma_lo = 0.25;
    double sigma_hi = 4.0;
    double half_width = 3.0;  // centres in [-B, B]^2
};

struct ReconstructionSetup {
    double bump_width = 1.0;
    double eval_half_width = 3.0;
    int eval_nodes = 13;          // per axis
    int sigma_nodes_per_octave = 4;
    int theta_nodes = 16;
    int spatial_nodes = 16;
};

// Relative L2 error, on the evaluation grid, of
//   C_psi^-1 * integral over the box of <f, psi^k> psi^k dk / sigma^2
// against the Gaussian bump f itself.
double truncated_reconstruction_error(const ReconstructionBox& box, double c_psi,
                                      const ReconstructionSetup& setup = {});

struct PlancherelSetup {
    double sigma_lo = 1e-3;
    double sigma_hi = 1e3;
    int sigma_nodes_per_octave = 4;
    int theta_nodes = 16;
    int spatial_nodes = 24;
};

// Quadrature of integral <f, psi^k><psi^k, g> dk / sigma^2 for two Gaussian
// bumps; equals C_psi <f, g> in the limit.
double plancherel_lhs(double fx, double fy, double fs, double gx, double gy, double gs,
                      const PlancherelSetup& setup = {});

struct AlphaCheck {
    int samples = 0;
    double max_relative_error = 0.0;
};

// Compares alpha_field against central differences of
// continuous_gabor(., anisotropy) at `samples` random points kept away from
// the carrier zero set. A correct model has anisotropy 1.
AlphaCheck check_alpha_field(int samples, std::uint64_t seed, double anisotropy = 1.0);

// Gauss-Legendre nodes and weights on [a, b].
void gauss_legendre(int n, double a, double b, std::vector<double>& nodes,
                    std::vector<double>& weights);

}  // namespace cmorph
