#include "cmorph/frame_identities.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "cmorph/error.hpp"
#include "cmorph/gabor_frame.hpp"

namespace cmorph {

namespace {

constexpr double kPi = std::numbers::pi;

double psi0(double u, double v) { return std::exp(-u * u - v * v) * std::sin(2.0 * v); }

double psi0_hat_abs2(double xi1, double xi2) {
    const double h = 0.5 * kPi * std::exp(-kPi * kPi * xi1 * xi1) *
                     (std::exp(-(kPi * xi2 - 1.0) * (kPi * xi2 - 1.0)) -
                      std::exp(-(kPi * xi2 + 1.0) * (kPi * xi2 + 1.0)));
    return h * h;
}

double c_psi_polar(double radius, int nr, int nphi) {
    if (nr % 2) ++nr;
    const double hr = radius / nr;
    const double hphi = 2.0 * kPi / nphi;
    double total = 0.0;
    for (int i = 1; i <= nr; ++i) {  // r = 0 contributes 0
        const double r = i * hr;
        const double w = (i == nr) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        double ring = 0.0;
        for (int j = 0; j < nphi; ++j) {
            const double phi = j * hphi;
            ring += psi0_hat_abs2(r * std::cos(phi), r * std::sin(phi));
        }
        total += w * ring / r;
    }
    return total * hr / 3.0 * hphi;
}

// Nodes of Gauss-Legendre in log(sigma) over [lo, hi]; weights include the
// Jacobian d sigma = sigma d log sigma.
void log_sigma_rule(double lo, double hi, int per_octave, std::vector<double>& s,
                    std::vector<double>& w) {
    const int n = std::max(2, static_cast<int>(std::ceil(std::log2(hi / lo) * per_octave)));
    gauss_legendre(n, std::log(lo), std::log(hi), s, w);
    for (std::size_t i = 0; i < s.size(); ++i) {
        s[i] = std::exp(s[i]);
        w[i] *= s[i];
    }
}

}  // namespace

void gauss_legendre(int n, double a, double b, std::vector<double>& nodes,
                    std::vector<double>& weights) {
    if (n < 1) throw DomainError("gabor_frame", "gauss_legendre", "need at least one node");
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        if (n == 1) {
            nodes[0] = mid;
            weights[0] = 2.0 * half;
            return;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = mid - half * x;
        nodes[n - 1 - i] = mid + half * x;
        weights[i] = weights[n - 1 - i] = half * w;
    }
}

std::complex<double> psi0_hat(double xi1, double xi2) {
    const double g = std::exp(-kPi * kPi * xi1 * xi1) *
                     (std::exp(-(kPi * xi2 - 1.0) * (kPi * xi2 - 1.0)) -
                      std::exp(-(kPi * xi2 + 1.0) * (kPi * xi2 + 1.0)));
    // pi / (2i) = -i pi / 2
    return {0.0, -0.5 * kPi * g};
}

std::complex<double> psi0_hat_quadrature(double xi1, double xi2, double half_width, int nodes) {
    const double h = 2.0 * half_width / (nodes - 1);
    std::complex<double> acc = 0.0;
    for (int i = 0; i < nodes; ++i) {
        const double x = -half_width + i * h;
        const double wx = (i == 0 || i == nodes - 1) ? 0.5 : 1.0;
        std::complex<double> row = 0.0;
        for (int j = 0; j < nodes; ++j) {
            const double y = -half_width + j * h;
            const double wy = (j == 0 || j == nodes - 1) ? 0.5 : 1.0;
            const double phase = -2.0 * kPi * (x * xi1 + y * xi2);
            row += wy * psi0(x, y) * std::complex<double>(std::cos(phase), std::sin(phase));
        }
        acc += wx * row;
    }
    return acc * h * h;
}

double compute_C_psi(const CPsiQuadrature& q) {
    if (!(q.radius > 0.0) || q.radial_nodes < 2 || q.angular_nodes < 4)
        throw DomainError("gabor_frame", "compute_C_psi", "invalid quadrature specification");
    const double coarse = c_psi_polar(q.radius, q.radial_nodes, q.angular_nodes);
    const double fine = c_psi_polar(q.radius, 2 * q.radial_nodes, 2 * q.angular_nodes);
    const double change = std::abs(fine - coarse) / std::abs(fine);
    if (!(change < q.tolerance))
        throw AccuracyError("gabor_frame", "compute_C_psi",
                            "quadrature not converged: relative change " + std::to_string(change) +
                                " under refinement");
    return fine;
}

MonteCarloEstimate monte_carlo_C_psi(std::uint64_t samples, std::uint64_t seed) {
    if (samples < 2) throw DomainError("gabor_frame", "monte_carlo_C_psi", "need at least 2 samples");
    constexpr double mu = 1.0 / kPi;
    constexpr double s = 0.25;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, s);
    std::bernoulli_distribution lobe(0.5);
    const double norm = 1.0 / (2.0 * kPi * s * s);
    double mean = 0.0, m2 = 0.0;
    for (std::uint64_t i = 0; i < samples; ++i) {
        const double x = normal(rng);
        const double y = normal(rng) + (lobe(rng) ? mu : -mu);
        const double gp = std::exp(-(x * x + (y - mu) * (y - mu)) / (2 * s * s));
        const double gm = std::exp(-(x * x + (y + mu) * (y + mu)) / (2 * s * s));
        const double q = 0.5 * norm * (gp + gm);
        const double r2 = x * x + y * y;
        const double f = r2 > 0.0 ? psi0_hat_abs2(x, y) / r2 : 0.0;
        const double val = f / q;
        const double delta = val - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (val - mean);
    }
    MonteCarloEstimate est;
    est.value = mean;
    est.std_error = std::sqrt(m2 / static_cast<double>(samples - 1) / static_cast<double>(samples));
    return est;
}

double verify_zero_mass(const ZeroMassBox& box, double xt, double yt) {
    if (!(box.sigma_lo > 0.0 && box.sigma_hi > box.sigma_lo && box.half_width > 0.0) ||
        box.theta_nodes < 2 || box.theta_nodes % 2 || box.sigma_nodes < 1 || box.spatial_nodes < 1)
        throw DomainError("gabor_frame", "verify_zero_mass", "invalid truncation box");
    std::vector<double> ls, lw;
    gauss_legendre(box.sigma_nodes, std::log(box.sigma_lo), std::log(box.sigma_hi), ls, lw);
    std::vector<double> gx, gwx, gy, gwy;
    const double R = box.half_width;
    double total = 0.0;
    for (std::size_t a = 0; a < ls.size(); ++a) {
        const double sigma = std::exp(ls[a]);
        // psi^k(xt, yt) is negligible once the centre is 6 sigma away.
        const double reach = 6.0 * sigma;
        const double x0 = std::max(-R, xt - reach), x1 = std::min(R, xt + reach);
        const double y0 = std::max(-R, yt - reach), y1 = std::min(R, yt + reach);
        if (!(x1 > x0 && y1 > y0)) continue;
        gauss_legendre(box.spatial_nodes, x0, x1, gx, gwx);
        gauss_legendre(box.spatial_nodes, y0, y1, gy, gwy);
        double level = 0.0;
        for (int t = 0; t < box.theta_nodes; ++t) {
            const double theta = 2.0 * kPi * t / box.theta_nodes;
            double plane = 0.0;
            for (std::size_t i = 0; i < gx.size(); ++i)
                for (std::size_t j = 0; j < gy.size(); ++j)
                    plane += gwx[i] * gwy[j] *
                             continuous_gabor({gx[i], gy[j], theta, sigma}, xt, yt);
            level += plane;
        }
        total += lw[a] * sigma * level * (2.0 * kPi / box.theta_nodes);
    }
    return total;
}

double angular_inner_integral(double s, int nodes) {
    double acc = 0.0;
    for (int i = 0; i < nodes; ++i) {
        const double alpha = 2.0 * kPi * i / nodes;
        acc += s * std::exp(-s * s) * std::sin(-2.0 * s * std::sin(alpha));
    }
    return acc * 2.0 * kPi / nodes;
}

double gaussian_coefficient(const CortexPoint& k, double centre_x, double centre_y, double width) {
    const double a = 1.0 / (2.0 * width * width);
    const double b = 1.0 / (k.sigma * k.sigma);
    const double kappa = 2.0 / k.sigma;
    const double cx = k.x - centre_x, cy = k.y - centre_y;
    const double nx = -std::sin(k.theta), ny = std::cos(k.theta);
    const double ab = a + b;
    const double phase = kappa * (nx * (-a * cx / ab) + ny * (-a * cy / ab));
    return std::pow(k.sigma, -1.5) * (kPi / ab) * std::exp(-a * b * (cx * cx + cy * cy) / ab) *
           std::exp(-kappa * kappa / (4.0 * ab)) * std::sin(phase);
}

double gaussian_inner_product(double fx, double fy, double fs, double gx, double gy, double gs) {
    const double a = 1.0 / (2.0 * fs * fs), b = 1.0 / (2.0 * gs * gs);
    const double dx = fx - gx, dy = fy - gy;
    return kPi / (a + b) * std::exp(-a * b * (dx * dx + dy * dy) / (a + b));
}

double truncated_reconstruction_error(const ReconstructionBox& box, double c_psi,
                                      const ReconstructionSetup& setup) {
    if (!(box.sigma_lo > 0.0 && box.sigma_hi > box.sigma_lo && box.half_width > 0.0 && c_psi > 0.0))
        throw DomainError("gabor_frame", "truncated_reconstruction_error", "invalid box");
    std::vector<double> sig, sw;
    log_sigma_rule(box.sigma_lo, box.sigma_hi, setup.sigma_nodes_per_octave, sig, sw);
    const double B = box.half_width;
    const double s = setup.bump_width;
    const int ne = setup.eval_nodes;
    const double he = 2.0 * setup.eval_half_width / (ne - 1);
    std::vector<double> gx, gwx, gy, gwy;
    double err2 = 0.0, ref2 = 0.0;
    for (int ie = 0; ie < ne; ++ie) {
        for (int je = 0; je < ne; ++je) {
            const double xt = -setup.eval_half_width + ie * he;
            const double yt = -setup.eval_half_width + je * he;
            double rec = 0.0;
            for (std::size_t a = 0; a < sig.size(); ++a) {
                const double sigma = sig[a];
                const double reach = 5.0 * sigma;
                const double x0 = std::max(-B, xt - reach), x1 = std::min(B, xt + reach);
                const double y0 = std::max(-B, yt - reach), y1 = std::min(B, yt + reach);
                if (!(x1 > x0 && y1 > y0)) continue;
                gauss_legendre(setup.spatial_nodes, x0, x1, gx, gwx);
                gauss_legendre(setup.spatial_nodes, y0, y1, gy, gwy);
                double level = 0.0;
                for (int t = 0; t < setup.theta_nodes; ++t) {
                    const double theta = 2.0 * kPi * t / setup.theta_nodes;
                    for (std::size_t i = 0; i < gx.size(); ++i) {
                        for (std::size_t j = 0; j < gy.size(); ++j) {
                            const CortexPoint k{gx[i], gy[j], theta, sigma};
                            level += gwx[i] * gwy[j] * gaussian_coefficient(k, 0.0, 0.0, s) *
                                     continuous_gabor(k, xt, yt);
                        }
                    }
                }
                rec += sw[a] / (sigma * sigma) * level * (2.0 * kPi / setup.theta_nodes);
            }
            rec /= c_psi;
            const double f = std::exp(-(xt * xt + yt * yt) / (2.0 * s * s));
            err2 += (rec - f) * (rec - f);
            ref2 += f * f;
        }
    }
    return std::sqrt(err2 / ref2);
}

double plancherel_lhs(double fx, double fy, double fs, double gx_, double gy_, double gs,
                      const PlancherelSetup& setup) {
    std::vector<double> sig, sw;
    log_sigma_rule(setup.sigma_lo, setup.sigma_hi, setup.sigma_nodes_per_octave, sig, sw);
    const double mx = 0.5 * (fx + gx_), my = 0.5 * (fy + gy_);
    const double sep = 0.5 * std::hypot(fx - gx_, fy - gy_);
    const double smax = std::max(fs, gs);
    std::vector<double> px, pwx, py, pwy;
    double total = 0.0;
    for (std::size_t a = 0; a < sig.size(); ++a) {
        const double sigma = sig[a];
        const double reach = sep + 6.0 * std::sqrt(smax * smax + 0.5 * sigma * sigma);
        gauss_legendre(setup.spatial_nodes, mx - reach, mx + reach, px, pwx);
        gauss_legendre(setup.spatial_nodes, my - reach, my + reach, py, pwy);
        double level = 0.0;
        for (int t = 0; t < setup.theta_nodes; ++t) {
            const double theta = 2.0 * kPi * t / setup.theta_nodes;
            for (std::size_t i = 0; i < px.size(); ++i) {
                for (std::size_t j = 0; j < py.size(); ++j) {
                    const CortexPoint k{px[i], py[j], theta, sigma};
                    level += pwx[i] * pwy[j] * gaussian_coefficient(k, fx, fy, fs) *
                             gaussian_coefficient(k, gx_, gy_, gs);
                }
            }
        }
        total += sw[a] / (sigma * sigma) * level * (2.0 * kPi / setup.theta_nodes);
    }
    return total;
}

AlphaCheck check_alpha_field(int samples, std::uint64_t seed, double anisotropy) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
    AlphaCheck out;
    while (out.samples < samples) {
        const CortexPoint k{uniform(-2, 2), uniform(-2, 2), uniform(0, 2 * kPi), uniform(0.5, 2.0)};
        const double xt = k.x + k.sigma * uniform(-1.5, 1.5);
        const double yt = k.y + k.sigma * uniform(-1.5, 1.5);
        const double v = (-std::sin(k.theta) * (xt - k.x) + std::cos(k.theta) * (yt - k.y)) / k.sigma;
        // Keep clear of the zero sets of sin(2v) and cos(2v).
        if (std::abs(std::sin(2 * v)) < 0.2 || std::abs(std::cos(2 * v)) < 0.05) continue;
        const AlphaField alpha = alpha_field(k, xt, yt);
        const double psi = continuous_gabor(k, xt, yt, anisotropy);
        auto fd = [&](int coord) {
            const double h = 1e-5 * (coord == 2 ? 1.0 : k.sigma);
            CortexPoint lo = k, hi = k;
            double* plo[] = {&lo.x, &lo.y, &lo.theta, &lo.sigma};
            double* phi[] = {&hi.x, &hi.y, &hi.theta, &hi.sigma};
            *plo[coord] -= h;
            *phi[coord] += h;
            return (continuous_gabor(hi, xt, yt, anisotropy) - continuous_gabor(lo, xt, yt, anisotropy)) /
                   (2.0 * h) / psi;
        };
        const double a[4] = {alpha.x, alpha.y, alpha.theta, alpha.sigma};
        double diff = 0.0, scale = 0.0;
        for (int c = 0; c < 4; ++c) {
            diff = std::max(diff, std::abs(fd(c) - a[c]));
            scale = std::max(scale, std::abs(a[c]));
        }
        out.max_relative_error = std::max(out.max_relative_error, diff / scale);
        ++out.samples;
    }
    return out;
}

}  // namespace cmorph
