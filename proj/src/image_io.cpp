#include "cmorph/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "cmorph/error.hpp"

namespace cmorph {

namespace {

[[noreturn]] void bad_pgm(std::size_t offset, const std::string& what) {
    throw IoError("cli_io", "load_image", "PGM byte offset " + std::to_string(offset) + ": " + what);
}

class PgmReader {
public:
    explicit PgmReader(const std::string& b) : b_(b) {}

    void skip_space() {
        while (pos_ < b_.size()) {
            if (b_[pos_] == '#') {
                while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(b_[pos_]))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    long number(const char* what) {
        skip_space();
        const std::size_t start = pos_;
        long v = 0;
        while (pos_ < b_.size() && std::isdigit(static_cast<unsigned char>(b_[pos_]))) {
            v = v * 10 + (b_[pos_] - '0');
            if (v > 1L << 30) bad_pgm(start, std::string(what) + " is too large");
            ++pos_;
        }
        if (pos_ == start) bad_pgm(start, std::string("expected ") + what);
        return v;
    }

    std::size_t pos_ = 0;
    const std::string& b_;
};

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cli_io", "load_image", "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

Image decode_png(const std::string& bytes) {
    png_image png;
    std::memset(&png, 0, sizeof png);
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size()))
        throw IoError("cli_io", "load_image", std::string("PNG: ") + png.message);
    if (png.format & PNG_FORMAT_FLAG_COLOR) {
        png_image_free(&png);
        throw IoError("cli_io", "load_image", "PNG is not grayscale");
    }
    png.format = PNG_FORMAT_GRAY;
    std::vector<png_byte> buf(PNG_IMAGE_SIZE(png));
    if (!png_image_finish_read(&png, nullptr, buf.data(), 0, nullptr))
        throw IoError("cli_io", "load_image", std::string("PNG: ") + png.message);
    Image img(static_cast<int>(png.width), static_cast<int>(png.height));
    for (std::size_t i = 0; i < img.size(); ++i) img.values[i] = buf[i] / 255.0;
    return img;
}

}  // namespace

Image decode_pgm(const std::string& bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '2'))
        bad_pgm(0, "missing P5/P2 magic");
    const bool binary = bytes[1] == '5';
    PgmReader r(bytes);
    r.pos_ = 2;
    const long w = r.number("width");
    const long h = r.number("height");
    const std::size_t maxval_at = r.pos_;
    const long maxval = r.number("maxval");
    if (w <= 0 || h <= 0) bad_pgm(maxval_at, "image dimensions must be positive");
    if (maxval < 1 || maxval > 255) bad_pgm(maxval_at, "only 8-bit PGM (maxval 1..255) is supported");
    Image img(static_cast<int>(w), static_cast<int>(h));
    if (binary) {
        if (r.pos_ >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[r.pos_])))
            bad_pgm(r.pos_, "expected whitespace before raster");
        const std::size_t start = r.pos_ + 1;
        if (bytes.size() < start + img.size())
            bad_pgm(bytes.size(), "raster truncated: expected " + std::to_string(img.size()) +
                                      " bytes after offset " + std::to_string(start));
        for (std::size_t i = 0; i < img.size(); ++i) {
            const auto v = static_cast<unsigned char>(bytes[start + i]);
            if (v > maxval) bad_pgm(start + i, "sample exceeds maxval");
            img.values[i] = static_cast<double>(v) / maxval;
        }
    } else {
        for (std::size_t i = 0; i < img.size(); ++i) {
            const std::size_t at = r.pos_;
            const long v = r.number("sample");
            if (v > maxval) bad_pgm(at, "sample exceeds maxval");
            img.values[i] = static_cast<double>(v) / maxval;
        }
    }
    return img;
}

Image load_image(const std::string& path, int expected_side) {
    const std::string bytes = read_file(path);
    static const unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    Image img;
    try {
        if (bytes.size() >= 8 && std::memcmp(bytes.data(), png_sig, 8) == 0)
            img = decode_png(bytes);
        else
            img = decode_pgm(bytes);
    } catch (const IoError& e) {
        throw IoError("cli_io", "load_image", path + ": " + e.what());
    }
    if (expected_side > 0 && (img.width != expected_side || img.height != expected_side))
        throw ConfigError("cli_io", "load_image",
                          path + ": image is " + std::to_string(img.width) + "x" +
                              std::to_string(img.height) + " but D = " + std::to_string(expected_side));
    return img;
}

std::string encode_pgm(const Image& img) {
    std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    out.reserve(out.size() + img.size());
    for (double v : img.values) {
        const double c = std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0;
        out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(c * 255.0))));
    }
    return out;
}

void save_pgm(const Image& img, const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cli_io", "save_pgm", "cannot write '" + path + "'");
    const std::string bytes = encode_pgm(img);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("cli_io", "save_pgm", "write failed for '" + path + "'");
}

}  // namespace cmorph
