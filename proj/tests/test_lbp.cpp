// Circular binary codes, uniform-pattern binning, banded histograms.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <set>
#include <vector>

#include "texfuse/image.hpp"
#include "texfuse/lbp.hpp"
#include "texfuse/rng.hpp"

using namespace texfuse;

namespace oracle {

// Naive reference, written straight from the definition: threshold P
// neighbors sampled on a circle of radius R against the center, neighbor p at
// angle 2*pi*p/P (y down), standard four-corner weighted bilinear sampling.
double sample(const GrayImage& img, double sx, double sy) {
    const int x0 = static_cast<int>(std::floor(sx));
    const int y0 = static_cast<int>(std::floor(sy));
    const double fx = sx - x0;
    const double fy = sy - y0;
    auto v = [&](int x, int y) {
        x = std::clamp(x, 0, img.width - 1);
        y = std::clamp(y, 0, img.height - 1);
        return img.at(x, y);
    };
    return (1.0 - fx) * (1.0 - fy) * v(x0, y0) + fx * (1.0 - fy) * v(x0 + 1, y0) +
           (1.0 - fx) * fy * v(x0, y0 + 1) + fx * fy * v(x0 + 1, y0 + 1);
}

std::uint32_t code(const GrayImage& img, int x, int y, int P, double R) {
    const double c = img.at(x, y);
    std::uint32_t out = 0;
    for (int p = 0; p < P; ++p) {
        const double ang = 2.0 * std::numbers::pi * p / P;
        if (sample(img, x + R * std::cos(ang), y + R * std::sin(ang)) >= c)
            out |= (1u << p);
    }
    return out;
}

// Circular 0<->1 transition count via a rotate-and-xor, independent of the
// production bin layout.
int transitions(std::uint32_t code, int P) {
    const std::uint32_t mask = (1u << P) - 1u;
    code &= mask;
    const std::uint32_t rot = ((code << 1) | (code >> (P - 1))) & mask;
    std::uint32_t diff = code ^ rot;
    int n = 0;
    while (diff) {
        n += diff & 1u;
        diff >>= 1;
    }
    return n;
}

} // namespace oracle

namespace {

GrayImage continuous_noise(std::uint64_t seed, int w, int h) {
    Rng rng(seed);
    GrayImage img(w, h);
    for (double& v : img.data) v = rng.uniform(0.0, 255.0);
    return img;
}

} // namespace

TEST_CASE("codes match the naive definition on random images") {
    struct Geometry {
        int P;
        double R;
    };
    for (const Geometry g : {Geometry{8, 1.0}, Geometry{12, 2.0}}) {
        LbpParams params;
        params.P = g.P;
        params.R = g.R;
        const int m = params.margin();
        for (std::uint64_t seed = 0; seed < 40; ++seed) {
            const GrayImage img = continuous_noise(1000 + seed, 16, 16);
            const LbpCodeMap map = lbp_code_map(img, params);
            for (int y = m; y <= img.height - 1 - m; ++y)
                for (int x = m; x <= img.width - 1 - m; ++x) {
                    CAPTURE(g.P, g.R, seed, x, y);
                    REQUIRE(map.at(x, y) == oracle::code(img, x, y, g.P, g.R));
                }
        }
    }
}

TEST_CASE("hand-worked 3x3 neighborhood") {
    // Center 5; axis neighbors E=6, S=8, W=4, N=2; corners far below center.
    // With P=4, R=1 the bits are (E,S,W,N) -> 1,1,0,0 = 3.
    GrayImage img(3, 3, 0.0);
    img.at(1, 1) = 5.0;
    img.at(2, 1) = 6.0;
    img.at(1, 2) = 8.0;
    img.at(0, 1) = 4.0;
    img.at(1, 0) = 2.0;
    LbpParams p;
    p.P = 4;
    p.R = 1.0;
    CHECK(lbp_code(img, 1, 1, p) == 3u);
}

TEST_CASE("ties set the bit, so constant images give all-ones codes") {
    const GrayImage img(12, 12, 77.0);
    LbpParams p;
    p.P = 8;
    p.R = 1.0;
    const LbpCodeMap map = lbp_code_map(img, p);
    for (int y = 1; y <= 10; ++y)
        for (int x = 1; x <= 10; ++x) REQUIRE(map.at(x, y) == 255u);
}

TEST_CASE("codes are invariant under a constant gray shift") {
    LbpParams p; // defaults: P=12, R=2
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const GrayImage img = continuous_noise(2000 + seed, 16, 16);
        const GrayImage shifted = scale_shift(img, 1.0, 40.0);
        const LbpCodeMap a = lbp_code_map(img, p);
        const LbpCodeMap b = lbp_code_map(shifted, p);
        REQUIRE(a.codes == b.codes);
    }
}

TEST_CASE("uniform binning is exhaustive, injective, and bounded for P=8") {
    const int P = 8;
    const int catch_all = P * (P - 1) + 2;
    std::set<int> uniform_bins;
    for (std::uint32_t code = 0; code < 256; ++code) {
        const int bin = uniform_bin(code, P);
        REQUIRE(bin >= 0);
        REQUIRE(bin <= catch_all);
        const int t = oracle::transitions(code, P);
        if (t == 0 && code == 0) {
            CHECK(bin == 0);
        } else if (t == 0) {
            CHECK(bin == P * (P - 1) + 1); // all ones
        } else if (t == 2) {
            CHECK(bin >= 1);
            CHECK(bin <= P * (P - 1));
            CHECK(uniform_bins.insert(bin).second); // no two codes share a bin
        } else {
            CHECK(bin == catch_all);
        }
    }
    CHECK(uniform_bins.size() == static_cast<std::size_t>(P * (P - 1)));
}

TEST_CASE("histogram layout: bands x bins, sums just under one, nothing negative") {
    LbpParams p; // P=12, R=2, bands=2, uniform
    const GrayImage img = continuous_noise(42, 28, 28);
    const LbpHistogram h = lbp_histogram(img, p);
    const int nbins = p.bin_count();
    CHECK(nbins == 12 * 11 + 3);
    REQUIRE(h.size() == static_cast<std::size_t>(4 * nbins));
    CHECK(h.bands == 2);
    for (int band = 0; band < 4; ++band) {
        double sum = 0.0;
        for (int k = 0; k < nbins; ++k) {
            const double v = h.values[static_cast<std::size_t>(band) * nbins + k];
            REQUIRE(v >= 0.0);
            sum += v;
        }
        CHECK(sum <= 1.0);
        CHECK(sum >= 1.0 - 1e-4);
    }
    CHECK(lbp_vector(img, p) == h.values);
}

TEST_CASE("full-histogram mode uses 2^P bins") {
    LbpParams p;
    p.P = 8;
    p.R = 1.0;
    p.uniform = false;
    p.bands = 1;
    const GrayImage img = continuous_noise(43, 20, 20);
    const auto v = lbp_vector(img, p);
    REQUIRE(v.size() == 256u);
    double sum = 0.0;
    for (double x : v) sum += x;
    CHECK(sum >= 1.0 - 1e-4);
    CHECK(sum <= 1.0);
}

TEST_CASE("parameter validation") {
    auto expect_invalid = [](LbpParams p) {
        CHECK_THROWS_MATCHES(p.validate(), Error, Catch::Matchers::Predicate<Error>([](const Error& e) {
                                 return e.code() == Errc::invalid_argument;
                             }));
    };
    LbpParams p;
    p.P = 3;
    expect_invalid(p);
    p = LbpParams{};
    p.R = 0.0;
    expect_invalid(p);
    p = LbpParams{};
    p.bands = 0;
    expect_invalid(p);
    p = LbpParams{};
    p.epsilon = 0.0;
    expect_invalid(p);
    p = LbpParams{};
    p.uniform = false;
    p.P = 17; // full-mode table would explode
    expect_invalid(p);
    p = LbpParams{};
    p.P = 31;
    expect_invalid(p);
}

TEST_CASE("geometry errors carry the right codes") {
    LbpParams p; // margin 2
    const GrayImage tiny(4, 4, 0.0);
    try {
        lbp_code_map(tiny, p);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::image_too_small);
    }

    const GrayImage img = continuous_noise(7, 16, 16);
    CHECK_THROWS_AS(lbp_code(img, 0, 5, p), Error); // border pixel

    // 5x5 band grid on a small image: the outer band columns fall entirely
    // inside the excluded margin.
    LbpParams banded;
    banded.P = 8;
    banded.R = 2.0;
    banded.bands = 5;
    const GrayImage small = continuous_noise(8, 11, 11);
    try {
        lbp_histogram(small, banded);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::image_too_small);
    }
}

TEST_CASE("named presets fix the sampling geometry") {
    const LbpParams fine = lbp_preset("p12r2");
    CHECK(fine.P == 12);
    CHECK(fine.R == 2.0);
    const LbpParams coarse = lbp_preset("p24r3");
    CHECK(coarse.P == 24);
    CHECK(coarse.R == 3.0);
    CHECK_THROWS_AS(lbp_preset("bogus"), Error);
}
