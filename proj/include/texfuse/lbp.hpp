#ifndef TEXFUSE_LBP_HPP
#define TEXFUSE_LBP_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "texfuse/error.hpp"
#include "texfuse/image.hpp"

namespace texfuse {

struct LbpParams {
    int P = 12;          // circular neighbors
    double R = 2.0;      // sampling radius, real-valued
    bool uniform = true; // uniform-pattern binning vs full 2^P histogram
    int bands = 2;       // B x B spatial grid
    double epsilon = 1e-7;

    void validate() const {
        if (P < 4) throw Error(Errc::invalid_argument, "lbp: P must be >= 4");
        if (R <= 0.0) throw Error(Errc::invalid_argument, "lbp: R must be positive");
        if (bands < 1) throw Error(Errc::invalid_argument, "lbp: bands must be >= 1");
        if (epsilon <= 0.0) throw Error(Errc::invalid_argument, "lbp: epsilon must be positive");
        if (!uniform && P > 16)
            throw Error(Errc::invalid_argument, "lbp: full histogram mode limited to P <= 16");
        if (P > 30) throw Error(Errc::invalid_argument, "lbp: P must be <= 30");
    }

    int margin() const { return static_cast<int>(std::ceil(R)); }
    int bin_count() const { return uniform ? P * (P - 1) + 3 : (1 << P); }
};

// Two widely used sampling geometries, named by their parameters. p12r2 is
// the default; p24r3 trades locality for angular resolution.
inline LbpParams lbp_preset(const std::string& name) {
    LbpParams p;
    if (name == "p12r2") {
        p.P = 12;
        p.R = 2.0;
    } else if (name == "p24r3") {
        p.P = 24;
        p.R = 3.0;
    } else {
        throw Error(Errc::invalid_argument, "lbp: unknown preset '" + name + "'");
    }
    return p;
}

namespace detail {

// Bilinear sample with clamped corner indices, in lerp form. The lerp form
// (v0 + f*(v1-v0)) returns the stored value exactly when all corners agree,
// which keeps the >= tie rule honest on constant regions; a weighted-sum
// formulation can drift by an ulp and flip tie bits.
inline double bilinear_at(const GrayImage& img, double sx, double sy) {
    sx = std::clamp(sx, 0.0, static_cast<double>(img.width - 1));
    sy = std::clamp(sy, 0.0, static_cast<double>(img.height - 1));
    const int x0 = static_cast<int>(sx);
    const int y0 = static_cast<int>(sy);
    const int x1 = std::min(x0 + 1, img.width - 1);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double fx = sx - x0;
    const double fy = sy - y0;
    const double top = img.at(x0, y0) + fx * (img.at(x1, y0) - img.at(x0, y0));
    const double bot = img.at(x0, y1) + fx * (img.at(x1, y1) - img.at(x0, y1));
    return top + fy * (bot - top);
}

} // namespace detail

// Circular comparison code at one pixel. Neighbor p sits at angle 2*pi*p/P
// from east, with the y component pointing down the image; ties (neighbor ==
// center) set the bit.
inline std::uint32_t lbp_code(const GrayImage& img, int x, int y, const LbpParams& params) {
    const int m = params.margin();
    if (x < m || y < m || x > img.width - 1 - m || y > img.height - 1 - m)
        throw Error(Errc::out_of_bounds, "lbp: pixel too close to the border");
    const double center = img.at(x, y);
    std::uint32_t code = 0;
    for (int p = 0; p < params.P; ++p) {
        const double ang = 2.0 * std::numbers::pi * p / params.P;
        const double sx = x + params.R * std::cos(ang);
        const double sy = y + params.R * std::sin(ang);
        if (detail::bilinear_at(img, sx, sy) >= center) code |= (1u << p);
    }
    return code;
}

struct LbpCodeMap {
    int width = 0;
    int height = 0;
    int valid_margin = 0;
    std::vector<std::uint32_t> codes; // row-major; only interior entries meaningful

    std::uint32_t at(int x, int y) const { return codes[static_cast<std::size_t>(y) * width + x]; }
};

inline LbpCodeMap lbp_code_map(const GrayImage& img, const LbpParams& params) {
    params.validate();
    const int m = params.margin();
    if (img.width <= 2 * m || img.height <= 2 * m)
        throw Error(Errc::image_too_small, "lbp: no interior pixels at this radius");
    LbpCodeMap map;
    map.width = img.width;
    map.height = img.height;
    map.valid_margin = m;
    map.codes.assign(img.pixel_count(), 0);
    for (int y = m; y <= img.height - 1 - m; ++y)
        for (int x = m; x <= img.width - 1 - m; ++x)
            map.codes[static_cast<std::size_t>(y) * img.width + x] = lbp_code(img, x, y, params);
    return map;
}

// Canonical uniform-pattern bin. Codes with at most two circular transitions
// get dedicated bins laid out as (ones-count, run-start); everything else
// lands in one catch-all at the end.
//   bin 0                : code 0
//   1 + (k-1)*P + start  : run of k ones (1 <= k <= P-1) starting at bit `start`
//   P*(P-1) + 1          : all ones
//   P*(P-1) + 2          : catch-all
inline int uniform_bin(std::uint32_t code, int P) {
    const std::uint32_t mask = (P == 32) ? ~0u : ((1u << P) - 1u);
    code &= mask;
    int transitions = 0;
    for (int p = 0; p < P; ++p) {
        const int a = (code >> p) & 1u;
        const int b = (code >> ((p + 1) % P)) & 1u;
        transitions += a != b;
    }
    if (transitions == 0) return code == 0 ? 0 : P * (P - 1) + 1;
    if (transitions != 2) return P * (P - 1) + 2;
    int ones = 0;
    for (int p = 0; p < P; ++p) ones += (code >> p) & 1u;
    int start = 0;
    for (int p = 0; p < P; ++p) {
        const int cur = (code >> p) & 1u;
        const int prev = (code >> ((p + P - 1) % P)) & 1u;
        if (cur == 1 && prev == 0) {
            start = p;
            break;
        }
    }
    return 1 + (ones - 1) * P + start;
}

struct LbpHistogram {
    int bin_count = 0;
    int bands = 0;                 // B (grid is B x B)
    std::vector<double> values;    // band-major (row-major over the grid), bin-minor

    std::size_t size() const { return values.size(); }
};

// Per-band histograms over interior codes, each normalized by its own pixel
// count plus epsilon, concatenated row-major across the B x B grid. Band
// edges split the full image extent evenly; the last band per axis absorbs
// the remainder.
inline LbpHistogram lbp_histogram(const GrayImage& img, const LbpParams& params) {
    params.validate();
    const LbpCodeMap map = lbp_code_map(img, params);
    const int B = params.bands;
    if (img.width < B || img.height < B)
        throw Error(Errc::image_too_small, "lbp: more bands than pixels per axis");
    const int band_w = img.width / B;
    const int band_h = img.height / B;
    const int nbins = params.bin_count();
    const int m = map.valid_margin;

    std::vector<std::vector<double>> hist(static_cast<std::size_t>(B) * B,
                                          std::vector<double>(nbins, 0.0));
    std::vector<long> counts(static_cast<std::size_t>(B) * B, 0);
    for (int y = m; y <= img.height - 1 - m; ++y) {
        const int by = std::min(B - 1, y / band_h);
        for (int x = m; x <= img.width - 1 - m; ++x) {
            const int bx = std::min(B - 1, x / band_w);
            const std::uint32_t code = map.at(x, y);
            const int bin = params.uniform ? uniform_bin(code, params.P) : static_cast<int>(code);
            hist[static_cast<std::size_t>(by) * B + bx][bin] += 1.0;
            ++counts[static_cast<std::size_t>(by) * B + bx];
        }
    }

    LbpHistogram out;
    out.bin_count = nbins;
    out.bands = B;
    out.values.reserve(static_cast<std::size_t>(B) * B * nbins);
    for (int b = 0; b < B * B; ++b) {
        if (counts[b] == 0)
            throw Error(Errc::image_too_small, "lbp: a band has no interior pixels");
        const double denom = static_cast<double>(counts[b]) + params.epsilon;
        for (int k = 0; k < nbins; ++k) out.values.push_back(hist[b][k] / denom);
    }
    return out;
}

inline std::vector<double> lbp_vector(const GrayImage& img, const LbpParams& params) {
    return lbp_histogram(img, params).values;
}

} // namespace texfuse

#endif
