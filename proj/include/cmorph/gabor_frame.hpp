#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "cmorph/cortex_geometry.hpp"
#include "cmorph/image.hpp"

namespace cmorph {

// Parameters of the discrete even/odd Gabor wavelet pyramid.
struct GaborParams {
    double gamma = 2.0;   // anisotropy of the mother envelope
    double omega = 0.5;   // carrier frequency, cycles per unit
    double a0 = 2.0;      // scale base
    double b0 = 1.0;      // translation step
    int d = 8;            // orientation count, theta_l = l*pi/d for l = 1..d
    double sigma_min = 1.1244;
    double sigma_max = 1.1244 * 6.0;  // sigma_min * log2(D) for D = 64
    int D = 64;           // image side in pixels
    double r_cut = 4.0;   // truncation radius in mother-filter units

    // Defaults with D set and sigma_max = sigma_min * log2(D).
    static GaborParams for_image_side(int D);

    void validate() const;
    // Pixel radius outside which a level-m filter is treated as zero.
    double support_radius(double scale) const;

    bool operator==(const GaborParams&) const = default;
};

double mother_even(double xt, double yt, const GaborParams& p);
double mother_odd(double xt, double yt, const GaborParams& p);

// Continuous filter psi^k(xt, yt) = sigma^{-3/2} psi0(sigma^{-1} R_{-theta}(xt - x, yt - y))
// with psi0 = exp(-u^2 - anisotropy*v^2) sin(2v). The family is 2pi-periodic
// in theta, so k.theta is used as given. anisotropy = 1 is the isotropic mother.
double continuous_gabor(const CortexPoint& k, double xt, double yt, double anisotropy = 1.0);

// Logarithmic gradient of the continuous family in the flat (x, y, theta, sigma)
// chart: grad_k psi^k(xt, yt) = psi^k(xt, yt) * alpha. Closed form for the
// isotropic mother.
struct AlphaField {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;
    double sigma = 0.0;
};

inline constexpr double kAlphaSingularTolerance = 1e-9;

AlphaField alpha_field(const CortexPoint& k, double xt, double yt,
                       double singular_tolerance = kAlphaSingularTolerance);

struct PyramidLevel {
    int m = 0;
    double scale = 1.0;    // a0^m, the filter dilation
    double stride = 1.0;   // b0 * a0^m
    int count = 0;         // spatial nodes per axis
    double sigma = 1.0;    // embedded scale coordinate sigma_min * a0^m
    std::size_t offset = 0;
};

struct GridNode {
    int level = 0;  // index into PyramidGrid::levels(), equals m
    int n = 0;
    int k = 0;
    int l = 1;      // orientation index 1..d
};

// Index set {(m, n, k, l)} of the pyramid, flattened level by level in
// (l, k, n) row-major order.
class PyramidGrid {
public:
    PyramidGrid() = default;
    PyramidGrid(std::vector<PyramidLevel> levels, int d, int D, double sigma_min, double sigma_max);

    std::size_t size() const { return size_; }
    int orientations() const { return d_; }
    int image_side() const { return D_; }
    double sigma_min() const { return sigma_min_; }
    double sigma_max() const { return sigma_max_; }
    const std::vector<PyramidLevel>& levels() const { return levels_; }

    // theta_l = l * pi / d, in (0, pi].
    double orientation_angle(int l) const;

    std::size_t index_of(int level, int n, int k, int l) const;
    GridNode node(std::size_t index) const;
    // Embedding into the cortical domain with theta canonicalized to [0, pi).
    CortexPoint point(std::size_t index) const;

private:
    std::vector<PyramidLevel> levels_;
    int d_ = 0;
    int D_ = 0;
    double sigma_min_ = 0.0;
    double sigma_max_ = 0.0;
    std::size_t size_ = 0;
};

PyramidGrid build_pyramid_grid(const GaborParams& p);

// Level-m discrete filter value at pixel coordinates (xt, yt).
double pyramid_even(const PyramidGrid& grid, const GaborParams& p, const GridNode& node, double xt,
                    double yt);
double pyramid_odd(const PyramidGrid& grid, const GaborParams& p, const GridNode& node, double xt,
                   double yt);

// Signed coefficients <I, psi_e>, <I, psi_o> on the pyramid grid.
struct SignedLift {
    std::vector<double> even;
    std::vector<double> odd;

    bool operator==(const SignedLift&) const = default;
};

// Pixel-sum inner products with filters cut at support_radius(a0^m). Pixels
// outside the image are read by mirror reflection, so a constant image has
// a constant extension.
SignedLift analyze(const Image& img, const PyramidGrid& grid, const GaborParams& p);

// C * (sum even * psi_e + sum odd * psi_o) sampled on the D x D pixel grid.
Image synthesize(const SignedLift& lift, const PyramidGrid& grid, const GaborParams& p, double C);

// Least-squares scalar C minimizing sum ||I - C * reconstruct(I)||^2, where
// reconstruct is the unit-constant analysis/synthesis round trip.
double calibrate_frame_constant(std::span<const Image> images,
                                const std::function<Image(const Image&)>& reconstruct);
double calibrate_frame_constant(const PyramidGrid& grid, const GaborParams& p,
                                std::span<const Image> images);

}  // namespace cmorph
