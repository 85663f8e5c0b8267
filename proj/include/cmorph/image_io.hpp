#pragma once

#include <string>

#include "cmorph/image.hpp"

namespace cmorph {

// 8-bit grayscale PGM (P5 or P2) or grayscale PNG, chosen by content.
// Values are divided by the file's maximum value (255 for PNG). With
// expected_side > 0, anything but an expected_side square raises ConfigError.
Image load_image(const std::string& path, int expected_side = 0);

// Parses PGM bytes; failures report the byte offset where parsing stopped.
Image decode_pgm(const std::string& bytes);

// Binary P5 with maxval 255; values are clamped to [0,1] and rounded.
std::string encode_pgm(const Image& img);
void save_pgm(const Image& img, const std::string& path);

}  // namespace cmorph
