#ifndef TEXFUSE_KAZE_HPP
#define TEXFUSE_KAZE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "texfuse/error.hpp"
#include "texfuse/image.hpp"

namespace texfuse {

struct KazeParams {
    int octaves = 2;
    int sublevels = 4;
    double contrast_k = 0.0;         // <= 0: derive from the 70th gradient percentile
    // Hessian responses of [0,1]-normalized images span roughly [1e-5, 1]
    // once the base smoothing has attenuated fine texture; the floor only
    // needs to sit above numerical dust on near-constant inputs.
    double detector_threshold = 1e-5;
    int per_kp_dims = 64;            // fixed by the descriptor layout
    int m = 256;                     // total vector length; multiple of per_kp_dims
    double base_smoothing = 1.6;     // sigma_0

    void validate() const {
        if (octaves < 1) throw Error(Errc::invalid_argument, "kaze: octaves must be >= 1");
        if (sublevels < 2) throw Error(Errc::invalid_argument, "kaze: sublevels must be >= 2");
        if (per_kp_dims != 64)
            throw Error(Errc::invalid_argument, "kaze: descriptor length is fixed at 64");
        if (m < per_kp_dims || m % per_kp_dims != 0)
            throw Error(Errc::invalid_argument, "kaze: m must be a positive multiple of 64");
        if (detector_threshold <= 0.0)
            throw Error(Errc::invalid_argument, "kaze: detector threshold must be positive");
        if (base_smoothing <= 0.0)
            throw Error(Errc::invalid_argument, "kaze: base smoothing must be positive");
    }
};

struct KazeKeypoint {
    double x = 0.0;
    double y = 0.0;
    double sigma = 0.0;      // detection scale after refinement
    double response = 0.0;   // Hessian-determinant score
    double orientation = 0.0; // radians, filled by the descriptor stage
    int level = 0;           // scale-space level index (implementation detail)
};

struct ScaleLevel {
    GrayImage lt;        // evolved image
    GrayImage lsmooth;   // lt blurred with sigma=1, feeds all derivatives
    GrayImage lx, ly;    // first derivatives at the level's aperture (gain dstep)
    GrayImage ldet;      // Hessian determinant at the level's aperture
    double sigma = 0.0;
    double time = 0.0;   // evolution time sigma^2/2
    int dstep = 1;       // derivative stencil dilation, max(1, round(sigma))
    int octave = 0;
    int sublevel = 0;
};

struct ScaleSpace {
    std::vector<ScaleLevel> levels;
    double base_mean = 0.0; // mean of the diffusion input, for conservation checks
    double contrast_k = 0.0;
};

struct KazeDescriptor {
    std::array<double, 64> values{};
    double orientation = 0.0;
    bool degenerate = false; // all-zero responses; values are zeros
};

struct KazeVector {
    std::vector<double> vector;
    int kp_used = 0;
};

namespace detail {

// Half-sample symmetric index fold: ...2,1,0 | 0,1,2... Repeated folding
// handles kernels wider than the image. With a symmetric kernel this border
// rule makes the blur operator doubly stochastic, so the image sum is
// conserved to rounding error.
inline int reflect_index(int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -1 - i;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

inline GrayImage gaussian_blur(const GrayImage& img, double sigma) {
    if (sigma <= 0.0) return img;
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> w(static_cast<std::size_t>(radius) + 1);
    double sum = 0.0;
    for (int i = 0; i <= radius; ++i) {
        w[i] = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
        sum += i == 0 ? w[i] : 2.0 * w[i];
    }
    for (double& v : w) v /= sum;

    GrayImage tmp(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double acc = w[0] * img.at(x, y);
            for (int i = 1; i <= radius; ++i)
                acc += w[i] * (img.at(reflect_index(x - i, img.width), y) +
                               img.at(reflect_index(x + i, img.width), y));
            tmp.at(x, y) = acc;
        }
    }
    GrayImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double acc = w[0] * tmp.at(x, y);
            for (int i = 1; i <= radius; ++i)
                acc += w[i] * (tmp.at(x, reflect_index(y - i, img.height)) +
                               tmp.at(x, reflect_index(y + i, img.height)));
            out.at(x, y) = acc;
        }
    }
    return out;
}

// Scharr derivative with reflected borders. `step` dilates the stencil: the
// taps sit at +-step, so the gain on a linear ramp is step per application.
// Levels measure their derivatives at step ~ sigma, which is what makes the
// detector response peak at the structure's own scale even where the
// conductivity has kept the image nearly unchanged.
inline GrayImage scharr(const GrayImage& img, bool x_axis, int step = 1) {
    GrayImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        const int ym = reflect_index(y - step, img.height);
        const int yp = reflect_index(y + step, img.height);
        for (int x = 0; x < img.width; ++x) {
            const int xm = reflect_index(x - step, img.width);
            const int xp = reflect_index(x + step, img.width);
            double v;
            if (x_axis) {
                v = 3.0 * (img.at(xp, ym) - img.at(xm, ym)) +
                    10.0 * (img.at(xp, y) - img.at(xm, y)) +
                    3.0 * (img.at(xp, yp) - img.at(xm, yp));
            } else {
                v = 3.0 * (img.at(xm, yp) - img.at(xm, ym)) +
                    10.0 * (img.at(x, yp) - img.at(x, ym)) +
                    3.0 * (img.at(xp, yp) - img.at(xp, ym));
            }
            out.at(x, y) = v / 32.0;
        }
    }
    return out;
}

// Contrast factor: exact 70th percentile of the nonzero gradient magnitudes
// of the sigma=1 smoothed image, interior pixels only.
inline double contrast_percentile(const GrayImage& img) {
    const GrayImage sm = gaussian_blur(img, 1.0);
    const GrayImage gx = scharr(sm, true);
    const GrayImage gy = scharr(sm, false);
    std::vector<double> mags;
    mags.reserve(img.pixel_count());
    for (int y = 1; y < img.height - 1; ++y) {
        for (int x = 1; x < img.width - 1; ++x) {
            const double m = std::sqrt(gx.at(x, y) * gx.at(x, y) + gy.at(x, y) * gy.at(x, y));
            if (m > 0.0) mags.push_back(m);
        }
    }
    if (mags.empty()) return 0.03;
    const std::size_t idx =
        static_cast<std::size_t>(std::ceil(0.70 * static_cast<double>(mags.size()))) - 1;
    std::nth_element(mags.begin(), mags.begin() + idx, mags.end());
    return mags[idx] > 0.0 ? mags[idx] : 0.03;
}

// Solve (I - 2*tau*A) u = v along one line, where A is the 1-D diffusion
// operator with flux coefficients q_i = (g_i + g_{i+1})/2 and no-flux ends.
// Thomas algorithm; the system is strictly diagonally dominant.
inline void aos_line(const double* v, const double* g, int n, std::ptrdiff_t stride, double tau,
                     double* u, std::vector<double>& cp, std::vector<double>& vp) {
    cp.resize(n);
    vp.resize(n);
    auto q = [&](int i) { return 0.5 * (g[i * stride] + g[(i + 1) * stride]); };
    double diag = 1.0 + (n > 1 ? 2.0 * tau * q(0) : 0.0);
    cp[0] = n > 1 ? (-2.0 * tau * q(0)) / diag : 0.0;
    vp[0] = v[0] / diag;
    for (int i = 1; i < n; ++i) {
        const double ql = q(i - 1);
        const double qr = i < n - 1 ? q(i) : 0.0;
        const double e_prev = -2.0 * tau * ql;
        diag = 1.0 + 2.0 * tau * (ql + qr) - e_prev * cp[i - 1];
        cp[i] = i < n - 1 ? (-2.0 * tau * qr) / diag : 0.0;
        vp[i] = (v[i * stride] - e_prev * vp[i - 1]) / diag;
    }
    u[(n - 1) * stride] = vp[n - 1];
    for (int i = n - 2; i >= 0; --i) u[i * stride] = vp[i] - cp[i] * u[(i + 1) * stride];
}

// One semi-implicit additive-operator-splitting step: average of the row and
// column solves. Unconditionally stable, so a whole inter-level time jump is
// taken in a single step.
inline GrayImage aos_step(const GrayImage& prev, const GrayImage& cond, double tau) {
    const int w = prev.width, h = prev.height;
    GrayImage ux(w, h), uy(w, h);
    std::vector<double> cp, vp;
    for (int y = 0; y < h; ++y) {
        const std::size_t off = static_cast<std::size_t>(y) * w;
        aos_line(prev.data.data() + off, cond.data.data() + off, w, 1, tau,
                 ux.data.data() + off, cp, vp);
    }
    for (int x = 0; x < w; ++x) {
        aos_line(prev.data.data() + x, cond.data.data() + x, h, w, tau,
                 uy.data.data() + x, cp, vp);
    }
    GrayImage out(w, h);
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = 0.5 * (ux.data[i] + uy.data[i]);
    return out;
}

// Derivatives live at the level's own aperture: each Scharr application uses
// taps at +-dstep, contributing a gain of dstep per derivative order. The
// determinant therefore carries the sigma^4 scale normalization implicitly,
// and it decays again once the aperture outgrows the structure.
inline void fill_level_derivatives(ScaleLevel& lev) {
    lev.lsmooth = gaussian_blur(lev.lt, 1.0);
    lev.dstep = std::max(1, static_cast<int>(std::lround(lev.sigma)));
    const GrayImage rx = scharr(lev.lsmooth, true, lev.dstep);
    const GrayImage ry = scharr(lev.lsmooth, false, lev.dstep);
    const GrayImage rxx = scharr(rx, true, lev.dstep);
    const GrayImage ryy = scharr(ry, false, lev.dstep);
    const GrayImage rxy = scharr(rx, false, lev.dstep);
    lev.lx = rx;
    lev.ly = ry;
    lev.ldet = GrayImage(lev.lt.width, lev.lt.height);
    for (std::size_t i = 0; i < lev.ldet.data.size(); ++i)
        lev.ldet.data[i] = rxx.data[i] * ryy.data[i] - rxy.data[i] * rxy.data[i];
}

// Map intensities to (v - min)/255. Subtracting the minimum first makes a
// constant gray shift of an integer image a bit-exact no-op for the whole
// pipeline; the fixed 255 divisor keeps contrast information (and the
// detector threshold calibration) intact.
inline GrayImage normalize_input(const GrayImage& img) {
    GrayImage out = img;
    const double mn = *std::min_element(out.data.begin(), out.data.end());
    for (double& v : out.data) v = (v - mn) / 255.0;
    return out;
}

inline double unnormalized_gaussian(double x, double y, double sigma) {
    return std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
}

inline double bilinear_raster(const GrayImage& img, double sx, double sy) {
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

// Nonlinear (Perona-Malik g2) diffusion scale space. Levels run sigma =
// sigma0 * 2^(o + s/sublevels); each level is reached from the previous by a
// single AOS step over the time gap, with conductivity evaluated on the
// previous level. Inputs smaller than 16px per side get a single-level space,
// which downstream stages treat as "no keypoints".
inline ScaleSpace build_scale_space(const GrayImage& img, const KazeParams& params = {}) {
    params.validate();
    const GrayImage norm = detail::normalize_input(img);

    ScaleSpace space;
    ScaleLevel base;
    base.lt = detail::gaussian_blur(norm, params.base_smoothing);
    base.sigma = params.base_smoothing;
    base.time = 0.5 * base.sigma * base.sigma;
    base.octave = 0;
    base.sublevel = 0;
    detail::fill_level_derivatives(base);
    space.base_mean = 0.0;
    for (double v : base.lt.data) space.base_mean += v;
    space.base_mean /= static_cast<double>(base.lt.data.size());
    space.levels.push_back(std::move(base));

    if (std::min(img.width, img.height) < 16) {
        space.contrast_k = 0.03;
        return space;
    }

    space.contrast_k =
        params.contrast_k > 0.0 ? params.contrast_k : detail::contrast_percentile(norm);
    const double k2 = space.contrast_k * space.contrast_k;

    for (int o = 0; o < params.octaves; ++o) {
        for (int s = 0; s < params.sublevels; ++s) {
            if (o == 0 && s == 0) continue;
            const ScaleLevel& prev = space.levels.back();
            ScaleLevel lev;
            lev.octave = o;
            lev.sublevel = s;
            lev.sigma = params.base_smoothing *
                        std::pow(2.0, o + static_cast<double>(s) / params.sublevels);
            lev.time = 0.5 * lev.sigma * lev.sigma;

            // Conductivity g2 = 1 / (1 + |grad|^2 / k^2) from the previous
            // level's smoothed gradients. The cached lx/ly carry the
            // aperture gain; rescale back to raw units so the ratio against
            // k is meaningful.
            GrayImage cond(prev.lt.width, prev.lt.height);
            const double inv_s = 1.0 / prev.dstep;
            for (std::size_t i = 0; i < cond.data.size(); ++i) {
                const double gx = prev.lx.data[i] * inv_s;
                const double gy = prev.ly.data[i] * inv_s;
                cond.data[i] = 1.0 / (1.0 + (gx * gx + gy * gy) / k2);
            }
            lev.lt = detail::aos_step(prev.lt, cond, lev.time - prev.time);
            detail::fill_level_derivatives(lev);
            space.levels.push_back(std::move(lev));
        }
    }
    return space;
}

// Largest relative deviation of any level mean from the diffusion input mean.
inline double mean_conservation_error(const ScaleSpace& space) {
    if (space.base_mean == 0.0) {
        double worst = 0.0;
        for (const auto& lev : space.levels)
            for (double v : lev.lt.data) worst = std::max(worst, std::fabs(v));
        return worst; // all-black input: report absolute drift instead
    }
    double worst = 0.0;
    for (const auto& lev : space.levels) {
        double mean = 0.0;
        for (double v : lev.lt.data) mean += v;
        mean /= static_cast<double>(lev.lt.data.size());
        worst = std::max(worst, std::fabs(mean - space.base_mean) / std::fabs(space.base_mean));
    }
    return worst;
}

namespace detail {

struct Candidate {
    int x, y, level;
    double response;
};

// 3x3 symmetric solve by Cramer's rule; false when near-singular.
inline bool solve3(const std::array<double, 9>& a, const std::array<double, 3>& b,
                   std::array<double, 3>& out) {
    const double det = a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) +
                       a[2] * (a[3] * a[7] - a[4] * a[6]);
    if (std::fabs(det) < 1e-30) return false;
    const double inv = 1.0 / det;
    out[0] = inv * (b[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (b[1] * a[8] - a[5] * b[2]) +
                    a[2] * (b[1] * a[7] - a[4] * b[2]));
    out[1] = inv * (a[0] * (b[1] * a[8] - a[5] * b[2]) - b[0] * (a[3] * a[8] - a[5] * a[6]) +
                    a[2] * (a[3] * b[2] - b[1] * a[6]));
    out[2] = inv * (a[0] * (a[4] * b[2] - b[1] * a[7]) - a[1] * (a[3] * b[2] - b[1] * a[6]) +
                    b[0] * (a[3] * a[7] - a[4] * a[6]));
    return true;
}

} // namespace detail

// Strict 3x3x3 maxima of the Hessian determinant above the threshold, with
// cross-level duplicate suppression and quadratic sub-pixel/sub-scale
// refinement. Candidates whose refined offset exceeds one step are dropped.
// Output sorted by (response desc, y asc, x asc).
inline std::vector<KazeKeypoint> detect_keypoints(const ScaleSpace& space,
                                                  const KazeParams& params = {}) {
    params.validate();
    std::vector<KazeKeypoint> out;
    const int L = static_cast<int>(space.levels.size());
    if (L < 3) return out;

    std::vector<detail::Candidate> cands;
    for (int li = 1; li + 1 < L; ++li) {
        const GrayImage& cur = space.levels[li].ldet;
        const GrayImage& lo = space.levels[li - 1].ldet;
        const GrayImage& hi = space.levels[li + 1].ldet;
        for (int y = 1; y < cur.height - 1; ++y) {
            for (int x = 1; x < cur.width - 1; ++x) {
                const double v = cur.at(x, y);
                if (v <= params.detector_threshold) continue;
                bool is_max = true;
                for (int dy = -1; dy <= 1 && is_max; ++dy)
                    for (int dx = -1; dx <= 1 && is_max; ++dx) {
                        if (dx == 0 && dy == 0) {
                            if (lo.at(x, y) >= v || hi.at(x, y) >= v) is_max = false;
                        } else {
                            if (cur.at(x + dx, y + dy) >= v || lo.at(x + dx, y + dy) >= v ||
                                hi.at(x + dx, y + dy) >= v)
                                is_max = false;
                        }
                    }
                if (is_max) cands.push_back({x, y, li, v});
            }
        }
    }

    // The same structure often peaks on adjacent levels; keep the stronger of
    // any pair closer than the level's (rounded) scale.
    std::vector<detail::Candidate> uniq;
    for (const auto& c : cands) {
        const double r = std::max(1.0, std::round(space.levels[c.level].sigma));
        bool drop = false;
        for (auto& u : uniq) {
            if (std::abs(u.level - c.level) > 1) continue;
            const double dx = u.x - c.x, dy = u.y - c.y;
            if (dx * dx + dy * dy < r * r) {
                if (c.response > u.response) u = c; // replace weaker twin
                drop = true;
                break;
            }
        }
        if (!drop) uniq.push_back(c);
    }

    for (const auto& c : uniq) {
        const GrayImage& cur = space.levels[c.level].ldet;
        const GrayImage& lo = space.levels[c.level - 1].ldet;
        const GrayImage& hi = space.levels[c.level + 1].ldet;
        const int x = c.x, y = c.y;
        const double dx = 0.5 * (cur.at(x + 1, y) - cur.at(x - 1, y));
        const double dy = 0.5 * (cur.at(x, y + 1) - cur.at(x, y - 1));
        const double ds = 0.5 * (hi.at(x, y) - lo.at(x, y));
        const double dxx = cur.at(x + 1, y) + cur.at(x - 1, y) - 2.0 * cur.at(x, y);
        const double dyy = cur.at(x, y + 1) + cur.at(x, y - 1) - 2.0 * cur.at(x, y);
        const double dss = hi.at(x, y) + lo.at(x, y) - 2.0 * cur.at(x, y);
        const double dxy = 0.25 * (cur.at(x + 1, y + 1) + cur.at(x - 1, y - 1) -
                                   cur.at(x + 1, y - 1) - cur.at(x - 1, y + 1));
        const double dxs = 0.25 * (hi.at(x + 1, y) + lo.at(x - 1, y) -
                                   hi.at(x - 1, y) - lo.at(x + 1, y));
        const double dys = 0.25 * (hi.at(x, y + 1) + lo.at(x, y - 1) -
                                   hi.at(x, y - 1) - lo.at(x, y + 1));
        std::array<double, 3> delta{};
        if (!detail::solve3({dxx, dxy, dxs, dxy, dyy, dys, dxs, dys, dss}, {-dx, -dy, -ds}, delta))
            continue;
        if (std::fabs(delta[0]) > 1.0 || std::fabs(delta[1]) > 1.0 || std::fabs(delta[2]) > 1.0)
            continue;
        KazeKeypoint kp;
        kp.x = x + delta[0];
        kp.y = y + delta[1];
        kp.level = c.level;
        kp.response = c.response;
        const ScaleLevel& lev = space.levels[c.level];
        kp.sigma = params.base_smoothing *
                   std::pow(2.0, lev.octave + (lev.sublevel + delta[2]) / params.sublevels);
        out.push_back(kp);
    }

    std::sort(out.begin(), out.end(), [](const KazeKeypoint& a, const KazeKeypoint& b) {
        if (a.response != b.response) return a.response > b.response;
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    });
    return out;
}

// Dominant orientation: a pi/3 window slides in 0.15 rad steps over the
// Gaussian-weighted first-order responses sampled on a disc of radius 6
// scale steps; the window with the longest summed vector wins.
inline double keypoint_orientation(const ScaleSpace& space, const KazeKeypoint& kp) {
    const ScaleLevel& lev = space.levels[kp.level];
    const int s = std::max(1, static_cast<int>(std::lround(kp.sigma)));
    std::vector<double> rx, ry, ang;
    rx.reserve(109);
    ry.reserve(109);
    ang.reserve(109);
    for (int i = -6; i <= 6; ++i) {
        for (int j = -6; j <= 6; ++j) {
            if (i * i + j * j >= 36) continue;
            const long ix = std::lround(kp.x + i * s);
            const long iy = std::lround(kp.y + j * s);
            double vx = 0.0, vy = 0.0;
            if (ix >= 0 && ix < lev.lt.width && iy >= 0 && iy < lev.lt.height) {
                const double g = detail::unnormalized_gaussian(iy - kp.y, ix - kp.x, 2.5 * s);
                vx = g * lev.lx.at(static_cast<int>(ix), static_cast<int>(iy));
                vy = g * lev.ly.at(static_cast<int>(ix), static_cast<int>(iy));
            }
            rx.push_back(vx);
            ry.push_back(vy);
            double a = std::atan2(vy, vx);
            if (a < 0.0) a += 2.0 * std::numbers::pi;
            ang.push_back(a);
        }
    }
    const double two_pi = 2.0 * std::numbers::pi;
    double best = 0.0, best_angle = 0.0;
    for (double a1 = 0.0; a1 < two_pi; a1 += 0.15) {
        const double a2 = (a1 + std::numbers::pi / 3.0 > two_pi)
                              ? a1 - 5.0 * std::numbers::pi / 3.0
                              : a1 + std::numbers::pi / 3.0;
        double sx = 0.0, sy = 0.0;
        for (std::size_t k = 0; k < ang.size(); ++k) {
            const double a = ang[k];
            const bool in_window = (a1 < a2) ? (a1 < a && a < a2)
                                             : ((a > 0.0 && a < a2) || (a > a1 && a < two_pi));
            if (in_window) {
                sx += rx[k];
                sy += ry[k];
            }
        }
        if (sx * sx + sy * sy > best) {
            best = sx * sx + sy * sy;
            best_angle = std::atan2(sy, sx);
            if (best_angle < 0.0) best_angle += two_pi;
        }
    }
    return best_angle;
}

// M-SURF 64: 4x4 overlapping subregions (origins -12,-7,-2,3 in scale steps,
// 9x9 samples each) over a window rotated to the dominant orientation. Each
// subregion contributes (sum dx, sum dy, sum |dx|, sum |dy|) of the rotated
// first-order responses, weighted by two Gaussians; the whole vector is
// L2-normalized. All-zero responses yield a flagged zero vector.
inline KazeDescriptor describe_keypoint(const ScaleSpace& space, const KazeKeypoint& kp) {
    KazeDescriptor d;
    d.orientation = keypoint_orientation(space, kp);
    const ScaleLevel& lev = space.levels[kp.level];
    const int scale = std::max(1, static_cast<int>(std::lround(kp.sigma)));
    const double co = std::cos(d.orientation);
    const double si = std::sin(d.orientation);

    int dcount = 0;
    double len = 0.0;
    for (int u = 0; u < 4; ++u) {
        const int i = -12 + 5 * u;
        const double cx = 0.5 + u;
        for (int v = 0; v < 4; ++v) {
            const int j = -12 + 5 * v;
            const double cy = 0.5 + v;

            // Subregion weighting center; +5 reproduces the original
            // SURF-family sampling pattern.
            const double ky = i + 5.0, kx = j + 5.0;
            const double xs = kp.x + (-kx * scale * si + ky * scale * co);
            const double ys = kp.y + (kx * scale * co + ky * scale * si);

            double dx = 0.0, dy = 0.0, mdx = 0.0, mdy = 0.0;
            for (int k = i; k < i + 9; ++k) {
                for (int l = j; l < j + 9; ++l) {
                    const double sample_y = kp.y + (l * scale * co + k * scale * si);
                    const double sample_x = kp.x + (-l * scale * si + k * scale * co);
                    const double g1 =
                        detail::unnormalized_gaussian(xs - sample_x, ys - sample_y, 2.5 * scale);
                    const double rx = detail::bilinear_raster(lev.lx, sample_x, sample_y);
                    const double ry = detail::bilinear_raster(lev.ly, sample_x, sample_y);
                    const double rry = g1 * (rx * co + ry * si);
                    const double rrx = g1 * (-rx * si + ry * co);
                    dx += rrx;
                    dy += rry;
                    mdx += std::fabs(rrx);
                    mdy += std::fabs(rry);
                }
            }
            const double g2 = detail::unnormalized_gaussian(cx - 2.0, cy - 2.0, 1.5);
            d.values[dcount++] = dx * g2;
            d.values[dcount++] = dy * g2;
            d.values[dcount++] = mdx * g2;
            d.values[dcount++] = mdy * g2;
            len += (dx * dx + dy * dy + mdx * mdx + mdy * mdy) * g2 * g2;
        }
    }
    if (len <= 0.0) {
        d.degenerate = true;
        d.values.fill(0.0);
        return d;
    }
    const double inv = 1.0 / std::sqrt(len);
    for (double& x : d.values) x *= inv;
    return d;
}

// Detect, describe the strongest floor(m/64) keypoints in response order,
// concatenate, and zero-pad to exactly m entries.
inline KazeVector kaze_vector(const GrayImage& img, const KazeParams& params = {}) {
    params.validate();
    const ScaleSpace space = build_scale_space(img, params);
    const std::vector<KazeKeypoint> kps = detect_keypoints(space, params);
    KazeVector out;
    out.vector.assign(static_cast<std::size_t>(params.m), 0.0);
    const int slots = params.m / params.per_kp_dims;
    const int n = std::min<int>(slots, static_cast<int>(kps.size()));
    for (int i = 0; i < n; ++i) {
        const KazeDescriptor d = describe_keypoint(space, kps[i]);
        for (int k = 0; k < 64; ++k) out.vector[static_cast<std::size_t>(i) * 64 + k] = d.values[k];
    }
    out.kp_used = n;
    return out;
}

} // namespace texfuse

#endif
