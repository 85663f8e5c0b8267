#include "cmorph/image.hpp"

#include <algorithm>
#include <cmath>

namespace cmorph {

double l2_norm(const Image& img) {
    double s = 0.0;
    for (double v : img.values) s += v * v;
    return std::sqrt(s);
}

double l2_distance(const Image& a, const Image& b) {
    double s = 0.0;
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a.values[i] - b.values[i];
        s += d * d;
    }
    return std::sqrt(s);
}

double relative_l2_error(const Image& a, const Image& b) {
    const double nb = l2_norm(b);
    const double d = l2_distance(a, b);
    return nb > 0.0 ? d / nb : d;
}

double total_mass(const Image& img) {
    double s = 0.0;
    for (double v : img.values) s += v;
    return s;
}

Image clamp01(const Image& img) {
    Image out = img;
    for (double& v : out.values) v = std::clamp(v, 0.0, 1.0);
    return out;
}

}  // namespace cmorph
