#ifndef TEXFUSE_HOG_HPP
#define TEXFUSE_HOG_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "texfuse/error.hpp"
#include "texfuse/image.hpp"

namespace texfuse {

struct HogParams {
    int cell_size = 8;      // pixels per cell side
    int block_size = 2;     // cells per block side
    int bin_count = 9;      // orientation bins
    int block_stride = 1;   // cells between block origins (1 = 50% overlap at size 2)
    double epsilon = 1e-7;
    bool signed_gradients = false; // false: fold into [0,180); true: full [0,360)
    bool use_sobel = false;        // default is plain central differences

    void validate() const {
        if (cell_size < 2) throw Error(Errc::invalid_argument, "hog: cell_size must be >= 2");
        if (block_size < 1) throw Error(Errc::invalid_argument, "hog: block_size must be >= 1");
        if (bin_count < 2) throw Error(Errc::invalid_argument, "hog: bin_count must be >= 2");
        if (block_stride < 1 || block_stride > block_size)
            throw Error(Errc::invalid_argument, "hog: stride must be in [1, block_size]");
        if (epsilon <= 0.0) throw Error(Errc::invalid_argument, "hog: epsilon must be positive");
    }

    double orientation_span() const { return signed_gradients ? 360.0 : 180.0; }
};

struct GradientField {
    int width = 0;
    int height = 0;
    std::vector<double> gx, gy, magnitude, orientation; // orientation in degrees

    std::size_t idx(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
};

// Central differences in the interior, one-sided at the borders. Magnitude is
// the Euclidean norm; orientation comes from atan2 and is folded into
// [0, span) degrees, with 0 substituted where the magnitude vanishes.
inline GradientField compute_gradients(const GrayImage& img, const HogParams& params = {}) {
    params.validate();
    if (img.width < 3 || img.height < 3)
        throw Error(Errc::image_too_small, "hog: gradients need at least 3x3 pixels");
    GradientField f;
    f.width = img.width;
    f.height = img.height;
    const std::size_t n = img.pixel_count();
    f.gx.assign(n, 0.0);
    f.gy.assign(n, 0.0);
    f.magnitude.assign(n, 0.0);
    f.orientation.assign(n, 0.0);

    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double gx, gy;
            if (params.use_sobel) {
                auto v = [&](int sx, int sy) {
                    sx = std::clamp(sx, 0, img.width - 1);
                    sy = std::clamp(sy, 0, img.height - 1);
                    return img.at(sx, sy);
                };
                gx = (v(x + 1, y - 1) + 2.0 * v(x + 1, y) + v(x + 1, y + 1)) -
                     (v(x - 1, y - 1) + 2.0 * v(x - 1, y) + v(x - 1, y + 1));
                gy = (v(x - 1, y + 1) + 2.0 * v(x, y + 1) + v(x + 1, y + 1)) -
                     (v(x - 1, y - 1) + 2.0 * v(x, y - 1) + v(x + 1, y - 1));
            } else {
                const int xl = std::max(x - 1, 0), xr = std::min(x + 1, img.width - 1);
                const int yu = std::max(y - 1, 0), yd = std::min(y + 1, img.height - 1);
                gx = img.at(xr, y) - img.at(xl, y);
                gy = img.at(x, yd) - img.at(x, yu);
            }
            const std::size_t i = f.idx(x, y);
            f.gx[i] = gx;
            f.gy[i] = gy;
            const double mag = std::sqrt(gx * gx + gy * gy);
            f.magnitude[i] = mag;
            if (mag == 0.0) {
                f.orientation[i] = 0.0;
            } else {
                double deg = std::atan2(gy, gx) * 180.0 / std::numbers::pi;
                const double span = params.orientation_span();
                deg = std::fmod(deg, span);
                if (deg < 0.0) deg += span;
                if (deg >= span) deg = 0.0; // fmod edge after the add
                f.orientation[i] = deg;
            }
        }
    }
    return f;
}

struct CellGrid {
    int cells_x = 0;
    int cells_y = 0;
    int bin_count = 0;
    std::vector<double> bins; // cell-major (row-major over cells), bin-minor

    double at(int cx, int cy, int k) const {
        return bins[(static_cast<std::size_t>(cy) * cells_x + cx) * bin_count + k];
    }
};

// Full cells tile from the top-left corner; pixels past the last full cell
// per axis contribute nothing. Each pixel's magnitude splits linearly between
// the two bin centers bracketing its orientation; centers sit at
// (k + 0.5) * span / bin_count, and the cycle wraps.
inline CellGrid cell_histograms(const GradientField& field, const HogParams& params = {}) {
    params.validate();
    CellGrid grid;
    grid.cells_x = field.width / params.cell_size;
    grid.cells_y = field.height / params.cell_size;
    grid.bin_count = params.bin_count;
    if (grid.cells_x < 1 || grid.cells_y < 1)
        throw Error(Errc::image_too_small, "hog: image spans no full cell");
    grid.bins.assign(static_cast<std::size_t>(grid.cells_x) * grid.cells_y * params.bin_count, 0.0);

    const double bin_width = params.orientation_span() / params.bin_count;
    const int n = params.bin_count;
    for (int cy = 0; cy < grid.cells_y; ++cy) {
        for (int cx = 0; cx < grid.cells_x; ++cx) {
            double* cell = grid.bins.data() + (static_cast<std::size_t>(cy) * grid.cells_x + cx) * n;
            for (int py = 0; py < params.cell_size; ++py) {
                const int y = cy * params.cell_size + py;
                for (int px = 0; px < params.cell_size; ++px) {
                    const int x = cx * params.cell_size + px;
                    const std::size_t i = field.idx(x, y);
                    const double mag = field.magnitude[i];
                    if (mag == 0.0) continue;
                    const double t = field.orientation[i] / bin_width - 0.5;
                    int k0 = static_cast<int>(std::floor(t));
                    const double frac = t - k0;
                    k0 = ((k0 % n) + n) % n;
                    const int k1 = (k0 + 1) % n;
                    cell[k0] += (1.0 - frac) * mag;
                    cell[k1] += frac * mag;
                }
            }
        }
    }
    return grid;
}

struct HogDescriptor {
    int blocks_x = 0;
    int blocks_y = 0;
    int block_dims = 0; // block_size^2 * bin_count
    std::vector<double> vector;
};

// Blocks of block_size x block_size cells slide by block_stride; each block's
// concatenated cell histograms are normalized v / sqrt(|v|^2 + eps) and the
// normalized blocks are concatenated row-major.
inline HogDescriptor hog_descriptor(const GrayImage& img, const HogParams& params = {}) {
    params.validate();
    const GradientField field = compute_gradients(img, params);
    const CellGrid grid = cell_histograms(field, params);
    if (grid.cells_x < params.block_size || grid.cells_y < params.block_size)
        throw Error(Errc::image_too_small, "hog: image spans no full block");

    HogDescriptor d;
    d.blocks_x = (grid.cells_x - params.block_size) / params.block_stride + 1;
    d.blocks_y = (grid.cells_y - params.block_size) / params.block_stride + 1;
    d.block_dims = params.block_size * params.block_size * params.bin_count;
    d.vector.reserve(static_cast<std::size_t>(d.blocks_x) * d.blocks_y * d.block_dims);

    std::vector<double> block(static_cast<std::size_t>(d.block_dims));
    for (int by = 0; by < d.blocks_y; ++by) {
        for (int bx = 0; bx < d.blocks_x; ++bx) {
            std::size_t w = 0;
            for (int cy = 0; cy < params.block_size; ++cy)
                for (int cx = 0; cx < params.block_size; ++cx)
                    for (int k = 0; k < params.bin_count; ++k)
                        block[w++] = grid.at(bx * params.block_stride + cx,
                                             by * params.block_stride + cy, k);
            double norm_sq = 0.0;
            for (double v : block) norm_sq += v * v;
            const double denom = std::sqrt(norm_sq + params.epsilon);
            for (double v : block) d.vector.push_back(v / denom);
        }
    }
    return d;
}

inline std::vector<double> hog_vector(const GrayImage& img, const HogParams& params = {}) {
    return hog_descriptor(img, params).vector;
}

} // namespace texfuse

#endif
