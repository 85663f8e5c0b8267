#pragma once

#include <string>
#include <vector>

#include "cmorph/cortex_geometry.hpp"
#include "cmorph/gabor_frame.hpp"
#include "cmorph/image.hpp"
#include "cmorph/lifting.hpp"

namespace cmorph {

struct MorphConfig {
    GaborParams gabor = GaborParams::for_image_side(64);
    MetricParams metric;
    double epsilon = 0.05;
    int n_iter = 2000;
    double tol = 1e-7;
    double tau = 1e-4;
    std::vector<double> times{0.0, 0.25, 0.5, 0.75, 1.0};
    double sigmoid_k = 30.0;
    double sigmoid_z0 = 0.7;
    SplatMode splat_mode = SplatMode::Multilinear;
    double baseline_epsilon = 0.01;
    int baseline_n_iter = 1000;
    // Binarization level used by the shape metrics in reports.
    double metric_threshold = 0.5;

    void validate() const;
    bool operator==(const MorphConfig&) const = default;
};

struct Frame {
    double t = 0.0;
    Image raw;
    Image sharpened;
};

// How one channel/sign part was carried from t = 0 to t = 1.
enum class PathKind {
    Transport,    // entropic OT plus displacement interpolation
    Constant,     // identical endpoint measures, no transport needed
    LinearBlend,  // an endpoint part is empty; coefficients blended linearly
};

std::string to_string(PathKind kind);

struct ChannelDiagnostics {
    std::string name;
    PathKind path = PathKind::Transport;
    double mass0 = 0.0;
    double mass1 = 0.0;
    std::size_t support0 = 0;  // after truncation
    std::size_t support1 = 0;
    int iterations = 0;
    double marginal_residual = 0.0;
    double transport_cost = 0.0;
    // Per requested time: m_t and the total weight of the interpolated cloud
    // (1 for transported interior times, NaN where no cloud was formed).
    std::vector<double> mass_at;
    std::vector<double> cloud_weight_at;
};

struct FrameSequence {
    std::vector<Frame> frames;
    std::vector<ChannelDiagnostics> channels;
    double frame_constant = 0.0;
};

// Pixelwise 1 / (1 + exp(-k (z - z0))).
Image sigmoid_threshold(const Image& img, double k, double z0);

// Cortical morph: lift both images, transport the four normalized parts
// (even+, even-, odd+, odd-) along d_c Wasserstein geodesics, deposit back on
// the pyramid, blend masses linearly, and synthesize. Frames at t = 0 and 1
// are the reconstructions of the inputs themselves.
FrameSequence morph(const Image& I0, const Image& I1, const MorphConfig& cfg);

// Planar entropic OT between the images as pixel densities under the squared
// Euclidean cost (pixel units), straight-line displacement interpolation,
// bilinear deposit, linear mass blend.
FrameSequence planar_baseline(const Image& I0, const Image& I1, const MorphConfig& cfg);

struct ShapeMetrics {
    double iou = 0.0;
    std::size_t area_frame = 0;
    std::size_t area_reference = 0;
    int components_frame = 0;
    int components_reference = 0;
    bool empty_foreground = false;
};

// Binarizes both images at `threshold` (pixel >= threshold is foreground).
ShapeMetrics shape_metrics(const Image& frame, const Image& reference, double threshold);

// 4-connected foreground components of img >= threshold.
int count_components(const Image& img, double threshold);

// Worker threads for independent channel pipelines: CMORPH_THREADS if set,
// else the hardware concurrency.
int configured_threads();

}  // namespace cmorph
