#pragma once

#include <cstddef>
#include <vector>

namespace cmorph {

// Row-major grayscale raster. Pixel (col, row) sits at plane coordinates
// (x, y) = (col, row). Inputs live in [0,1]; reconstructions may overshoot.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    Image() = default;
    Image(int w, int h, double fill = 0.0)
        : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

    double& at(int col, int row) { return values[static_cast<std::size_t>(row) * width + col]; }
    double at(int col, int row) const { return values[static_cast<std::size_t>(row) * width + col]; }

    std::size_t size() const { return values.size(); }
    bool empty() const { return values.empty(); }

    bool operator==(const Image&) const = default;
};

double l2_norm(const Image& img);
double l2_distance(const Image& a, const Image& b);
// ||a - b|| / ||b||; returns the absolute distance when b is zero.
double relative_l2_error(const Image& a, const Image& b);
double total_mass(const Image& img);
Image clamp01(const Image& img);

}  // namespace cmorph
