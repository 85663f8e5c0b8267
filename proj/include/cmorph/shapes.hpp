#pragma once

#include "cmorph/image.hpp"

namespace cmorph {

// Block letters 'T' and 'E' drawn on a D x D canvas (strokes D/8 wide).
Image letter_image(char letter, int D);

// Rotation by `angle` (radians, counterclockwise in (x, y)) about the image
// centre, nearest-neighbour resampled; pixels mapped from outside are 0.
Image rotate_nearest(const Image& img, double angle);

// Integer shift; pixels shifted in from outside are 0.
Image translate(const Image& img, int dx, int dy);

}  // namespace cmorph
