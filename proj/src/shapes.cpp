#include "cmorph/shapes.hpp"

#include <cmath>
#include <string>

#include "cmorph/error.hpp"

namespace cmorph {

namespace {

struct Box {
    double c0, c1, r0, r1;  // in units of D/32, half-open
};

bool inside(const Box& b, int c, int r, double s) {
    return c >= b.c0 * s && c < b.c1 * s && r >= b.r0 * s && r < b.r1 * s;
}

}  // namespace

Image letter_image(char letter, int D) {
    if (D <= 0) throw DomainError("shapes", "letter_image", "image side must be positive");
    std::vector<Box> boxes;
    switch (letter) {
        case 'T':
            boxes = {{6, 26, 6, 10}, {14, 18, 10, 26}};
            break;
        case 'E':
            boxes = {{8, 12, 6, 26}, {8, 24, 6, 10}, {8, 21, 14, 18}, {8, 24, 22, 26}};
            break;
        default:
            throw DomainError("shapes", "letter_image",
                              std::string("no glyph for '") + letter + "'");
    }
    const double s = D / 32.0;
    Image img(D, D);
    for (int r = 0; r < D; ++r)
        for (int c = 0; c < D; ++c)
            for (const Box& b : boxes)
                if (inside(b, c, r, s)) img.at(c, r) = 1.0;
    return img;
}

Image rotate_nearest(const Image& img, double angle) {
    Image out(img.width, img.height);
    const double cx = (img.width - 1) / 2.0;
    const double cy = (img.height - 1) / 2.0;
    const double c = std::cos(angle), s = std::sin(angle);
    for (int r = 0; r < img.height; ++r) {
        for (int col = 0; col < img.width; ++col) {
            // Inverse map: source = R(-angle) (target - centre) + centre.
            const double dx = col - cx, dy = r - cy;
            const long sc = std::lround(c * dx + s * dy + cx);
            const long sr = std::lround(-s * dx + c * dy + cy);
            if (sc >= 0 && sc < img.width && sr >= 0 && sr < img.height)
                out.at(col, r) = img.at(static_cast<int>(sc), static_cast<int>(sr));
        }
    }
    return out;
}

Image translate(const Image& img, int dx, int dy) {
    Image out(img.width, img.height);
    for (int r = 0; r < img.height; ++r) {
        for (int c = 0; c < img.width; ++c) {
            const int sc = c - dx, sr = r - dy;
            if (sc >= 0 && sc < img.width && sr >= 0 && sr < img.height) out.at(c, r) = img.at(sc, sr);
        }
    }
    return out;
}

}  // namespace cmorph
