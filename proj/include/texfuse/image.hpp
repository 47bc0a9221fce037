#ifndef TEXFUSE_IMAGE_HPP
#define TEXFUSE_IMAGE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "texfuse/error.hpp"

namespace texfuse {

// Single-channel raster, row-major, intensities kept as reals in [0, 255].
// Quantization to 8 bit happens only when encoding.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    GrayImage() = default;
    GrayImage(int w, int h, double fill = 0.0) : width(w), height(h) {
        if (w < 1 || h < 1) throw Error(Errc::invalid_argument, "image dimensions must be >= 1");
        data.assign(static_cast<std::size_t>(w) * h, fill);
    }

    double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }

    std::size_t pixel_count() const { return data.size(); }

    bool same_size(const GrayImage& o) const { return width == o.width && height == o.height; }
};

// Mean absolute pixel difference scaled to [0, 1]. 0 = identical.
inline double frame_similarity(const GrayImage& a, const GrayImage& b) {
    if (!a.same_size(b))
        throw Error(Errc::dimension_mismatch, "frame_similarity requires equal dimensions");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) sum += std::fabs(a.data[i] - b.data[i]);
    return sum / static_cast<double>(a.data.size()) / 255.0;
}

// Bilinear resize with half-pixel center alignment. Resizing to the same
// dimensions reproduces the input bit for bit, and constant images stay
// constant (the lerp form adds an exact zero increment).
inline GrayImage resize(const GrayImage& img, int target_w, int target_h) {
    if (target_w < 1 || target_h < 1)
        throw Error(Errc::invalid_argument, "resize target must be >= 1 per axis");
    GrayImage out(target_w, target_h);
    const double sx = static_cast<double>(img.width) / target_w;
    const double sy = static_cast<double>(img.height) / target_h;
    for (int y = 0; y < target_h; ++y) {
        double src_y = (y + 0.5) * sy - 0.5;
        src_y = std::clamp(src_y, 0.0, static_cast<double>(img.height - 1));
        const int y0 = static_cast<int>(src_y);
        const int y1 = std::min(y0 + 1, img.height - 1);
        const double fy = src_y - y0;
        for (int x = 0; x < target_w; ++x) {
            double src_x = (x + 0.5) * sx - 0.5;
            src_x = std::clamp(src_x, 0.0, static_cast<double>(img.width - 1));
            const int x0 = static_cast<int>(src_x);
            const int x1 = std::min(x0 + 1, img.width - 1);
            const double fx = src_x - x0;
            const double top = img.at(x0, y0) + fx * (img.at(x1, y0) - img.at(x0, y0));
            const double bot = img.at(x0, y1) + fx * (img.at(x1, y1) - img.at(x0, y1));
            out.at(x, y) = top + fy * (bot - top);
        }
    }
    return out;
}

// v -> 255 * ln(1+v) / ln(256). Strictly monotone, fixes 0 and 255.
inline GrayImage log_transform(const GrayImage& img) {
    GrayImage out = img;
    const double denom = std::log(256.0);
    for (double& v : out.data) v = 255.0 * std::log1p(v) / denom;
    return out;
}

inline GrayImage scale_shift(const GrayImage& img, double scale, double shift) {
    GrayImage out = img;
    for (double& v : out.data) v = v * scale + shift;
    return out;
}

// ---- PGM codec (P2 ascii / P5 raw) --------------------------------------

namespace detail {

inline void pgm_skip_ws(const std::vector<std::uint8_t>& b, std::size_t& i) {
    while (i < b.size()) {
        const char c = static_cast<char>(b[i]);
        if (c == '#') {
            while (i < b.size() && b[i] != '\n') ++i;
        } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            ++i;
        } else {
            break;
        }
    }
}

inline long pgm_read_int(const std::vector<std::uint8_t>& b, std::size_t& i) {
    pgm_skip_ws(b, i);
    if (i >= b.size() || b[i] < '0' || b[i] > '9')
        throw Error(Errc::malformed_file, "pgm: expected an integer token");
    long v = 0;
    while (i < b.size() && b[i] >= '0' && b[i] <= '9') {
        v = v * 10 + (b[i] - '0');
        if (v > 1'000'000'000) throw Error(Errc::malformed_file, "pgm: integer out of range");
        ++i;
    }
    return v;
}

} // namespace detail

inline GrayImage decode_pgm(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5'))
        throw Error(Errc::malformed_file, "pgm: missing P2/P5 magic");
    const bool raw = bytes[1] == '5';
    std::size_t i = 2;
    const long w = detail::pgm_read_int(bytes, i);
    const long h = detail::pgm_read_int(bytes, i);
    const long maxval = detail::pgm_read_int(bytes, i);
    if (w < 1 || h < 1 || maxval < 1 || maxval > 65535)
        throw Error(Errc::malformed_file, "pgm: bad dimensions or maxval");
    GrayImage img(static_cast<int>(w), static_cast<int>(h));
    const double scale = 255.0 / static_cast<double>(maxval);
    const std::size_t n = img.pixel_count();
    if (raw) {
        if (i >= bytes.size()) throw Error(Errc::malformed_file, "pgm: truncated before raster");
        ++i; // single whitespace byte after maxval
        const int bpp = maxval > 255 ? 2 : 1;
        if (bytes.size() - i < n * bpp) throw Error(Errc::malformed_file, "pgm: truncated raster");
        for (std::size_t p = 0; p < n; ++p) {
            long v;
            if (bpp == 1) {
                v = bytes[i + p];
            } else {
                v = (static_cast<long>(bytes[i + 2 * p]) << 8) | bytes[i + 2 * p + 1];
            }
            if (v > maxval) throw Error(Errc::malformed_file, "pgm: sample exceeds maxval");
            img.data[p] = maxval == 255 ? static_cast<double>(v) : v * scale;
        }
    } else {
        for (std::size_t p = 0; p < n; ++p) {
            const long v = detail::pgm_read_int(bytes, i);
            if (v > maxval) throw Error(Errc::malformed_file, "pgm: sample exceeds maxval");
            img.data[p] = maxval == 255 ? static_cast<double>(v) : v * scale;
        }
    }
    return img;
}

// P5, maxval 255. Values are rounded to nearest and clamped to [0, 255].
inline std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
    std::string header = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(out.size() + img.pixel_count());
    for (double v : img.data) {
        const double q = std::clamp(std::round(v), 0.0, 255.0);
        out.push_back(static_cast<std::uint8_t>(q));
    }
    return out;
}

} // namespace texfuse

#endif
