#include "cmorph/gabor_frame.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "cmorph/error.hpp"

namespace cmorph {

namespace {

constexpr double kPi = std::numbers::pi;

int mirror_index(int i, int n) {
    const int period = 2 * n;
    int j = i % period;
    if (j < 0) j += period;
    return j < n ? j : period - 1 - j;
}

struct LevelFrame {
    double scale;
    double inv_scale;
    double cx;
    double cy;
    double cos_t;
    double sin_t;
};

LevelFrame level_frame(const PyramidGrid& grid, const GridNode& node) {
    const PyramidLevel& lv = grid.levels()[node.level];
    const double theta = grid.orientation_angle(node.l);
    return {lv.scale, 1.0 / lv.scale, node.n * lv.stride, node.k * lv.stride, std::cos(theta),
            std::sin(theta)};
}

// Rotated mother coordinates for pixel (xt, yt): R_{-theta}(xt/s - n b0, yt/s - k b0).
inline void mother_coords(const LevelFrame& f, double xt, double yt, double& u, double& v) {
    const double dx = (xt - f.cx) * f.inv_scale;
    const double dy = (yt - f.cy) * f.inv_scale;
    u = f.cos_t * dx + f.sin_t * dy;
    v = -f.sin_t * dx + f.cos_t * dy;
}

}  // namespace

GaborParams GaborParams::for_image_side(int D) {
    GaborParams p;
    p.D = D;
    p.sigma_max = p.sigma_min * std::log2(static_cast<double>(D));
    return p;
}

void GaborParams::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError("gabor_frame", "GaborParams", msg); };
    if (!(gamma > 0.0)) fail("gamma must be positive");
    if (!(omega > 0.0)) fail("omega must be positive");
    if (!(a0 > 1.0)) fail("a0 must exceed 1");
    if (!(b0 > 0.0)) fail("b0 must be positive");
    if (d < 1) fail("d must be at least 1");
    if (!(sigma_min > 0.0)) fail("sigma_min must be positive");
    if (!(sigma_min < sigma_max)) fail("sigma_min must be below sigma_max");
    if (D < 1) fail("D must be a positive integer");
    if (!(r_cut > 0.0)) fail("r_cut must be positive");
}

double GaborParams::support_radius(double scale) const {
    // exp(-u^2 - gamma v^2) drops below exp(-r_cut^2) outside this radius.
    return r_cut * scale / std::min(1.0, std::sqrt(gamma));
}

double mother_even(double xt, double yt, const GaborParams& p) {
    return std::exp(-xt * xt - p.gamma * yt * yt) * std::cos(2.0 * kPi * p.omega * yt);
}

double mother_odd(double xt, double yt, const GaborParams& p) {
    return std::exp(-xt * xt - p.gamma * yt * yt) * std::sin(2.0 * kPi * p.omega * yt);
}

double continuous_gabor(const CortexPoint& k, double xt, double yt, double anisotropy) {
    if (!(k.sigma > 0.0))
        throw DomainError("gabor_frame", "continuous_gabor", "sigma must be positive");
    const double c = std::cos(k.theta), s = std::sin(k.theta);
    const double dx = xt - k.x, dy = yt - k.y;
    const double u = (c * dx + s * dy) / k.sigma;
    const double v = (-s * dx + c * dy) / k.sigma;
    return std::pow(k.sigma, -1.5) * std::exp(-u * u - anisotropy * v * v) * std::sin(2.0 * v);
}

AlphaField alpha_field(const CortexPoint& k, double xt, double yt, double singular_tolerance) {
    if (!(k.sigma > 0.0)) throw DomainError("gabor_frame", "alpha_field", "sigma must be positive");
    const double c = std::cos(k.theta), s = std::sin(k.theta);
    const double dx = xt - k.x, dy = yt - k.y;
    const double sig = k.sigma;
    const double v = (-s * dx + c * dy) / sig;
    const double tan2v = std::tan(2.0 * v);
    if (!(std::abs(tan2v) >= singular_tolerance))
        throw SingularityError("gabor_frame", "alpha_field",
                               "tan(2 y_k) vanishes; sample away from the carrier zero set");
    const double cot = 1.0 / tan2v;
    AlphaField a;
    a.x = 2.0 * (dx / (sig * sig) + s * cot / sig);
    a.y = 2.0 * (dy / (sig * sig) - c * cot / sig);
    a.theta = -2.0 * cot / sig * (c * dx + s * dy);
    a.sigma = 2.0 * ((dx * dx + dy * dy) / (sig * sig * sig) + (s * dx - c * dy) * cot / (sig * sig) -
                     0.75 / sig);
    return a;
}

PyramidGrid::PyramidGrid(std::vector<PyramidLevel> levels, int d, int D, double sigma_min,
                         double sigma_max)
    : levels_(std::move(levels)), d_(d), D_(D), sigma_min_(sigma_min), sigma_max_(sigma_max) {
    std::size_t offset = 0;
    for (auto& lv : levels_) {
        lv.offset = offset;
        offset += static_cast<std::size_t>(d_) * lv.count * lv.count;
    }
    size_ = offset;
}

double PyramidGrid::orientation_angle(int l) const { return l * kPi / d_; }

std::size_t PyramidGrid::index_of(int level, int n, int k, int l) const {
    const PyramidLevel& lv = levels_[level];
    const std::size_t c = lv.count;
    return lv.offset + (static_cast<std::size_t>(l - 1) * c + k) * c + n;
}

GridNode PyramidGrid::node(std::size_t index) const {
    int level = static_cast<int>(levels_.size()) - 1;
    while (level > 0 && index < levels_[level].offset) --level;
    const PyramidLevel& lv = levels_[level];
    std::size_t r = index - lv.offset;
    const std::size_t c = lv.count;
    GridNode g;
    g.level = level;
    g.n = static_cast<int>(r % c);
    r /= c;
    g.k = static_cast<int>(r % c);
    g.l = static_cast<int>(r / c) + 1;
    return g;
}

CortexPoint PyramidGrid::point(std::size_t index) const {
    const GridNode g = node(index);
    const PyramidLevel& lv = levels_[g.level];
    return {g.n * lv.stride, g.k * lv.stride, wrap_orientation(orientation_angle(g.l)), lv.sigma};
}

PyramidGrid build_pyramid_grid(const GaborParams& p) {
    if (!(p.sigma_min <= p.sigma_max))
        throw ConfigError("gabor_frame", "build_pyramid_grid", "empty scale range: sigma_max < sigma_min");
    p.validate();
    const int levels = static_cast<int>(std::floor(std::log(p.sigma_max / p.sigma_min) / std::log(p.a0) + 1e-12)) + 1;
    std::vector<PyramidLevel> lv;
    for (int m = 0; m < levels; ++m) {
        PyramidLevel l;
        l.m = m;
        l.scale = std::pow(p.a0, m);
        l.stride = p.b0 * l.scale;
        l.count = static_cast<int>(std::floor(p.D / l.stride + 1e-12)) + 1;
        l.sigma = std::min(p.sigma_min * l.scale, p.sigma_max);
        lv.push_back(l);
    }
    return PyramidGrid(std::move(lv), p.d, p.D, p.sigma_min, p.sigma_max);
}

double pyramid_even(const PyramidGrid& grid, const GaborParams& p, const GridNode& node, double xt,
                    double yt) {
    const LevelFrame f = level_frame(grid, node);
    double u, v;
    mother_coords(f, xt, yt, u, v);
    return f.inv_scale * mother_even(u, v, p);
}

double pyramid_odd(const PyramidGrid& grid, const GaborParams& p, const GridNode& node, double xt,
                   double yt) {
    const LevelFrame f = level_frame(grid, node);
    double u, v;
    mother_coords(f, xt, yt, u, v);
    return f.inv_scale * mother_odd(u, v, p);
}

namespace {

// Visits every pixel within the support of a node's filter, handing the
// visitor the pixel coordinates and both filter values.
template <class Visitor>
void for_each_tap(const PyramidGrid& grid, const GaborParams& p, const GridNode& node,
                  Visitor&& visit) {
    const LevelFrame f = level_frame(grid, node);
    const double radius = p.support_radius(f.scale);
    const double r2 = radius * radius;
    const double carrier = 2.0 * kPi * p.omega;
    const int x_lo = static_cast<int>(std::ceil(f.cx - radius));
    const int x_hi = static_cast<int>(std::floor(f.cx + radius));
    const int y_lo = static_cast<int>(std::ceil(f.cy - radius));
    const int y_hi = static_cast<int>(std::floor(f.cy + radius));
    for (int yy = y_lo; yy <= y_hi; ++yy) {
        const double ddy = yy - f.cy;
        for (int xx = x_lo; xx <= x_hi; ++xx) {
            const double ddx = xx - f.cx;
            if (ddx * ddx + ddy * ddy > r2) continue;
            double u, v;
            mother_coords(f, xx, yy, u, v);
            const double env = f.inv_scale * std::exp(-u * u - p.gamma * v * v);
            const double phase = carrier * v;
            visit(xx, yy, env * std::cos(phase), env * std::sin(phase));
        }
    }
}

}  // namespace

SignedLift analyze(const Image& img, const PyramidGrid& grid, const GaborParams& p) {
    if (img.width != grid.image_side() || img.height != grid.image_side())
        throw ShapeError("gabor_frame", "analyze",
                         "image is " + std::to_string(img.width) + "x" + std::to_string(img.height) +
                             ", pyramid expects " + std::to_string(grid.image_side()) + "x" +
                             std::to_string(grid.image_side()));
    const int W = img.width, H = img.height;
    SignedLift lift;
    lift.even.assign(grid.size(), 0.0);
    lift.odd.assign(grid.size(), 0.0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double se = 0.0, so = 0.0;
        for_each_tap(grid, p, grid.node(i), [&](int xx, int yy, double we, double wo) {
            const double val = img.at(mirror_index(xx, W), mirror_index(yy, H));
            se += val * we;
            so += val * wo;
        });
        lift.even[i] = se;
        lift.odd[i] = so;
    }
    return lift;
}

Image synthesize(const SignedLift& lift, const PyramidGrid& grid, const GaborParams& p, double C) {
    const int D = grid.image_side();
    Image out(D, D, 0.0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double ce = lift.even[i], co = lift.odd[i];
        if (ce == 0.0 && co == 0.0) continue;
        for_each_tap(grid, p, grid.node(i), [&](int xx, int yy, double we, double wo) {
            if (xx < 0 || yy < 0 || xx >= D || yy >= D) return;
            out.at(xx, yy) += ce * we + co * wo;
        });
    }
    for (double& v : out.values) v *= C;
    return out;
}

double calibrate_frame_constant(std::span<const Image> images,
                                const std::function<Image(const Image&)>& reconstruct) {
    double num = 0.0, den = 0.0;
    for (const Image& img : images) {
        const Image r = reconstruct(img);
        for (std::size_t i = 0; i < img.size(); ++i) {
            num += img.values[i] * r.values[i];
            den += r.values[i] * r.values[i];
        }
    }
    if (!(den > 0.0))
        throw CalibrationError("gabor_frame", "calibrate_frame_constant",
                               "calibration set has no nonzero image");
    return num / den;
}

double calibrate_frame_constant(const PyramidGrid& grid, const GaborParams& p,
                                std::span<const Image> images) {
    return calibrate_frame_constant(images, [&](const Image& img) {
        return synthesize(analyze(img, grid, p), grid, p, 1.0);
    });
}

}  // namespace cmorph
