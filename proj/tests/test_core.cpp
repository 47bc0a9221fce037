// Infrastructure: text container format, RNG, parallel loop, raster type,
// codecs, keyframe selection.

#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <sstream>

#include <png.h>

#include "texfuse/image.hpp"
#include "texfuse/image_io.hpp"
#include "texfuse/keyframe.hpp"
#include "texfuse/parallel.hpp"
#include "texfuse/rng.hpp"
#include "texfuse/textio.hpp"

#include "support/synthetic.hpp"

using namespace texfuse;

// ---------------------------------------------------------------- textio --

TEST_CASE("doubles round-trip through text bit for bit") {
    const double cases[] = {0.0,
                            -0.0,
                            0.1,
                            1.0 / 3.0,
                            -12345.678901234567,
                            1e-300,
                            1e300,
                            5e-324,
                            std::numeric_limits<double>::max(),
                            std::numeric_limits<double>::min(),
                            3.141592653589793};
    for (double v : cases) {
        const double back = textio::parse_double(textio::fmt_double(v));
        CAPTURE(v);
        CHECK(std::memcmp(&back, &v, sizeof v) == 0);
    }
}

TEST_CASE("hex64 round-trips") {
    for (std::uint64_t v : {0ull, 1ull, 0xdeadbeefull, ~0ull, 0x0123456789abcdefull}) {
        CHECK(textio::parse_hex64(textio::fmt_hex64(v)) == v);
        CHECK(textio::fmt_hex64(v).size() == 16);
    }
}

TEST_CASE("numeric parsers reject garbage") {
    CHECK_THROWS_MATCHES(textio::parse_double("pear"), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return e.code() == Errc::malformed_file;
                         }));
    CHECK_THROWS_AS(textio::parse_int("x12"), Error);
    CHECK_THROWS_AS(textio::parse_hex64("zz"), Error);
    CHECK(textio::parse_int("-7") == -7);
}

TEST_CASE("container header round-trips and validates") {
    std::ostringstream os;
    textio::write_magic(os, "features", 1);
    textio::write_field(os, "scheme", "hog+kaze");
    textio::write_field(os, "rows", "42");
    os << "\npayload line\n";

    std::istringstream is(os.str());
    const textio::Header h = textio::read_header(is, "features", 1);
    CHECK(h.kind == "features");
    CHECK(h.version == 1);
    CHECK(h.require("scheme") == "hog+kaze");
    CHECK(h.require("rows") == "42");
    CHECK(h.find("absent") == nullptr);
    CHECK_THROWS_AS(h.require("absent"), Error);

    std::string payload;
    std::getline(is, payload);
    CHECK(payload == "payload line");
}

TEST_CASE("header version and kind mismatches are distinct errors") {
    {
        std::istringstream is("texfuse-features v2\n\n");
        try {
            textio::read_header(is, "features", 1);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::version_mismatch);
        }
    }
    {
        std::istringstream is("texfuse-model v1\n\n");
        try {
            textio::read_header(is, "features", 1);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::malformed_file);
        }
    }
    {
        std::istringstream is("not a container\n");
        CHECK_THROWS_AS(textio::read_header(is, "features", 1), Error);
    }
    {
        std::istringstream is("");
        CHECK_THROWS_AS(textio::read_header(is, "features", 1), Error);
    }
}

TEST_CASE("split honors the field cap so trailing fields may hold the separator") {
    const auto basic = textio::split("a,b,c", ',');
    REQUIRE(basic.size() == 3);
    CHECK(basic[1] == "b");

    const auto capped = textio::split("1,2.5,path,with,commas.png", ',', 3);
    REQUIRE(capped.size() == 3);
    CHECK(capped[0] == "1");
    CHECK(capped[1] == "2.5");
    CHECK(capped[2] == "path,with,commas.png");

    const auto empties = textio::split(",x,", ',');
    REQUIRE(empties.size() == 3);
    CHECK(empties[0].empty());
    CHECK(empties[2].empty());
}

// ------------------------------------------------------------------- rng --

TEST_CASE("rng is deterministic per seed and stream") {
    Rng a(7), b(7), c(8);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    bool any_diff = false;
    Rng a2(7);
    for (int i = 0; i < 100; ++i) any_diff |= a2.next_u64() != c.next_u64();
    CHECK(any_diff);

    Rng s0 = Rng::stream(7, 0), s1 = Rng::stream(7, 1), s0b = Rng::stream(7, 0);
    CHECK(s0.next_u64() == s0b.next_u64());
    CHECK(s0.next_u64() != s1.next_u64());
}

TEST_CASE("uniform stays in range") {
    Rng r(123);
    for (int i = 0; i < 10000; ++i) {
        const double v = r.uniform();
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
    }
    for (int i = 0; i < 1000; ++i) {
        const double v = r.uniform(-3.0, 5.0);
        CHECK(v >= -3.0);
        CHECK(v < 5.0);
    }
}

TEST_CASE("uniform_index covers [0, n)") {
    Rng r(9);
    std::vector<int> seen(5, 0);
    for (int i = 0; i < 2000; ++i) {
        const std::size_t v = r.uniform_index(5);
        REQUIRE(v < 5);
        ++seen[v];
    }
    for (int count : seen) CHECK(count > 300); // ~400 expected per cell
    CHECK(r.uniform_index(1) == 0);
    CHECK(r.uniform_index(0) == 0);
}

TEST_CASE("shuffle permutes and sample_indices draws distinct values") {
    Rng r(11);
    std::vector<int> v(100);
    std::iota(v.begin(), v.end(), 0);
    auto shuffled = v;
    r.shuffle(shuffled);
    CHECK(shuffled != v); // astronomically unlikely to be identity
    std::sort(shuffled.begin(), shuffled.end());
    CHECK(shuffled == v);

    auto idx = r.sample_indices(10, 50);
    REQUIRE(idx.size() == 10);
    std::sort(idx.begin(), idx.end());
    CHECK(std::adjacent_find(idx.begin(), idx.end()) == idx.end());
    CHECK(idx.back() < 50);
    CHECK(r.sample_indices(99, 7).size() == 7);
}

TEST_CASE("normal draws have the right first two moments") {
    Rng r(5);
    const int n = 20000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = r.normal();
        sum += v;
        sq += v * v;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(std::fabs(mean) < 0.05);
    CHECK(std::fabs(var - 1.0) < 0.1);
}

// -------------------------------------------------------------- parallel --

TEST_CASE("parallel_for touches every index exactly once") {
    std::vector<std::atomic<int>> hits(997);
    parallel_for(hits.size(), 8, [&](std::size_t i) { hits[i].fetch_add(1); });
    for (const auto& h : hits) CHECK(h.load() == 1);
}

TEST_CASE("parallel_for results are thread-count independent") {
    auto run = [](unsigned threads) {
        std::vector<double> out(500);
        parallel_for(out.size(), threads, [&](std::size_t i) {
            out[i] = std::sin(static_cast<double>(i)) * 3.0;
        });
        return out;
    };
    CHECK(run(1) == run(8));
}

TEST_CASE("parallel_for propagates the worker exception") {
    CHECK_THROWS_AS(parallel_for(100, 4,
                                 [](std::size_t i) {
                                     if (i == 57) throw Error(Errc::io_failure, "boom");
                                 }),
                    Error);
}

TEST_CASE("thread resolution maps non-positive requests to hardware threads") {
    CHECK(resolve_threads(3) == 3u);
    CHECK(resolve_threads(1) == 1u);
    CHECK(resolve_threads(0) == default_threads());
    CHECK(resolve_threads(-4) == default_threads());
    CHECK(default_threads() >= 1u);
}

// ----------------------------------------------------------------- image --

TEST_CASE("image construction rejects empty extents") {
    CHECK_THROWS_AS(GrayImage(0, 4), Error);
    CHECK_THROWS_AS(GrayImage(4, -1), Error);
    const GrayImage ok(3, 2, 7.0);
    CHECK(ok.pixel_count() == 6);
    CHECK(ok.at(2, 1) == 7.0);
}

TEST_CASE("frame difference score is a scaled mean absolute difference") {
    const GrayImage a(4, 4, 0.0);
    const GrayImage b(4, 4, 51.0);
    CHECK(frame_similarity(a, a) == 0.0);
    CHECK(frame_similarity(a, b) == Catch::Approx(0.2).margin(1e-15));
    const GrayImage c(3, 4, 0.0);
    CHECK_THROWS_AS(frame_similarity(a, c), Error);
}

TEST_CASE("resize is exact on identity and constant inputs") {
    const GrayImage img = synth::noise_texture(3, 17, 13);
    const GrayImage same = resize(img, 17, 13);
    CHECK(same.data == img.data);

    const GrayImage flat(32, 32, 99.25);
    const GrayImage small = resize(flat, 7, 5);
    for (double v : small.data) CHECK(v == 99.25);

    CHECK_THROWS_AS(resize(img, 0, 5), Error);
}

TEST_CASE("2x downscale averages aligned quads") {
    GrayImage img(4, 4);
    for (int i = 0; i < 16; ++i) img.data[static_cast<std::size_t>(i)] = i;
    const GrayImage half = resize(img, 2, 2);
    CHECK(half.at(0, 0) == Catch::Approx((0 + 1 + 4 + 5) / 4.0).margin(1e-12));
    CHECK(half.at(1, 1) == Catch::Approx((10 + 11 + 14 + 15) / 4.0).margin(1e-12));
}

TEST_CASE("log rescale fixes endpoints and maps 15 to exactly half scale") {
    GrayImage img(3, 1);
    img.at(0, 0) = 0.0;
    img.at(1, 0) = 15.0;
    img.at(2, 0) = 255.0;
    const GrayImage out = log_transform(img);
    CHECK(out.at(0, 0) == 0.0);
    CHECK(out.at(1, 0) == 127.5);
    CHECK(out.at(2, 0) == Catch::Approx(255.0).margin(1e-9));
    // strictly monotone
    CHECK(out.at(0, 0) < out.at(1, 0));
    CHECK(out.at(1, 0) < out.at(2, 0));
}

// ---------------------------------------------------------------- codecs --

TEST_CASE("pgm raw round-trip is exact for integer-valued images") {
    const GrayImage img = synth::noise_texture(21, 9, 6);
    const GrayImage back = decode_pgm(encode_pgm(img));
    REQUIRE(back.same_size(img));
    CHECK(back.data == img.data);
}

TEST_CASE("pgm ascii parsing handles comments and rescales maxval") {
    const std::string text = "P2\n# comment line\n2 2\n100\n0 50\n100 25\n";
    const GrayImage img = decode_pgm(std::vector<std::uint8_t>(text.begin(), text.end()));
    REQUIRE(img.width == 2);
    REQUIRE(img.height == 2);
    CHECK(img.at(0, 0) == 0.0);
    CHECK(img.at(1, 0) == Catch::Approx(127.5).margin(1e-12));
    CHECK(img.at(0, 1) == Catch::Approx(255.0).margin(1e-12));
    CHECK(img.at(1, 1) == Catch::Approx(63.75).margin(1e-12));
}

TEST_CASE("16-bit pgm samples are big-endian and rescaled") {
    std::string head = "P5\n2 1\n65535\n";
    std::vector<std::uint8_t> bytes(head.begin(), head.end());
    bytes.insert(bytes.end(), {0xff, 0xff, 0x00, 0x01});
    const GrayImage img = decode_pgm(bytes);
    CHECK(img.at(0, 0) == Catch::Approx(255.0).margin(1e-12));
    CHECK(img.at(1, 0) == Catch::Approx(255.0 / 65535.0).margin(1e-12));
}

TEST_CASE("pgm decoder rejects malformed input") {
    auto bytes = [](const std::string& s) { return std::vector<std::uint8_t>(s.begin(), s.end()); };
    CHECK_THROWS_AS(decode_pgm(bytes("P6\n1 1\n255\nx")), Error);
    CHECK_THROWS_AS(decode_pgm(bytes("P5\n2 2\n255\nab")), Error); // truncated raster
    CHECK_THROWS_AS(decode_pgm(bytes("P2\n1 1\n255\n300\n")), Error); // sample > maxval
    CHECK_THROWS_AS(decode_pgm(bytes("P2\n0 1\n255\n")), Error);
    CHECK_THROWS_AS(decode_pgm(bytes("P2\n1 1\n70000\n1\n")), Error);
}

namespace {

// Encode through libpng's simplified API so the decoder under test faces
// bytes produced by an independent writer.
std::vector<std::uint8_t> png_encode(const GrayImage& img, bool rgb) {
    png_image pi{};
    pi.version = PNG_IMAGE_VERSION;
    pi.width = static_cast<png_uint_32>(img.width);
    pi.height = static_cast<png_uint_32>(img.height);
    pi.format = rgb ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;

    std::vector<std::uint8_t> pixels;
    for (double v : img.data) {
        const auto b = static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
        if (rgb) {
            pixels.push_back(b);
            pixels.push_back(b);
            pixels.push_back(b);
        } else {
            pixels.push_back(b);
        }
    }
    png_alloc_size_t size = 0;
    REQUIRE(png_image_write_to_memory(&pi, nullptr, &size, 0, pixels.data(), 0, nullptr) != 0);
    std::vector<std::uint8_t> out(size);
    REQUIRE(png_image_write_to_memory(&pi, out.data(), &size, 0, pixels.data(), 0, nullptr) != 0);
    out.resize(size);
    return out;
}

} // namespace

TEST_CASE("png gray decode returns stored bytes") {
    const GrayImage img = synth::noise_texture(77, 12, 8);
    const auto bytes = png_encode(img, false);
    CHECK(sniff_format(bytes) == ImageFormat::png);
    const GrayImage back = decode_png(bytes);
    REQUIRE(back.same_size(img));
    CHECK(back.data == img.data);
}

TEST_CASE("png rgb decode collapses via BT.601 luma") {
    png_image pi{};
    pi.version = PNG_IMAGE_VERSION;
    pi.width = 1;
    pi.height = 1;
    pi.format = PNG_FORMAT_RGB;
    const std::uint8_t red[3] = {255, 0, 0};
    png_alloc_size_t size = 0;
    REQUIRE(png_image_write_to_memory(&pi, nullptr, &size, 0, red, 0, nullptr) != 0);
    std::vector<std::uint8_t> bytes(size);
    REQUIRE(png_image_write_to_memory(&pi, bytes.data(), &size, 0, red, 0, nullptr) != 0);
    bytes.resize(size);

    const GrayImage img = decode_png(bytes);
    CHECK(img.at(0, 0) == Catch::Approx(0.299 * 255.0).margin(1e-9));
}

TEST_CASE("png decoder rejects corrupt streams") {
    CHECK_THROWS_AS(decode_png({0x89, 'P', 'N', 'G'}), Error);
    auto good = png_encode(synth::noise_texture(5, 6, 6), false);
    good.resize(good.size() / 2); // truncate inside IDAT
    CHECK_THROWS_AS(decode_png(good), Error);
}

TEST_CASE("format sniffing keys off magic bytes, and file I/O round-trips") {
    synth::TempDir tmp("texfuse-core");
    const GrayImage img = synth::noise_texture(4, 10, 10);
    save_pgm(tmp.path / "weird_name.dat", img);
    const GrayImage back = load_image(tmp.path / "weird_name.dat");
    CHECK(back.data == img.data);

    CHECK_THROWS_AS(sniff_format({'h', 'i'}), Error);
    CHECK_THROWS_AS(load_image(tmp.path / "missing.pgm"), Error);
}

// -------------------------------------------------------------- keyframe --

TEST_CASE("uniform timestamps spread frames at the given rate") {
    const auto ts = uniform_timestamps(4, 25.0);
    REQUIRE(ts.size() == 4);
    CHECK(ts[0] == 0.0);
    CHECK(ts[3] == Catch::Approx(0.12).margin(1e-12));
    CHECK_THROWS_AS(uniform_timestamps(4, 0.0), Error);
}

TEST_CASE("interval sampling takes the first usable frame then spaced successors") {
    // 60 frames at 30 fps, default policy: usable range [10, 49], 0.5 s apart.
    const auto ts = uniform_timestamps(60, 30.0);
    const auto idx = sample_frame_indices(ts, KeyframePolicy{});
    CHECK(idx == std::vector<int>{10, 25, 40});
}

TEST_CASE("clips shorter than the margins yield nothing") {
    const auto ts = uniform_timestamps(15, 30.0);
    CHECK(sample_frame_indices(ts, KeyframePolicy{}).empty());

    KeyframePolicy no_skip;
    no_skip.skip_enabled = false;
    CHECK(sample_frame_indices(ts, no_skip).size() >= 1);
}

TEST_CASE("dedup drops near-identical frames but keeps the first") {
    const auto ts = uniform_timestamps(60, 30.0);
    int loads = 0;
    const auto result = select_keyframes(ts, KeyframePolicy{}, [&](int) {
        ++loads;
        return GrayImage(8, 8, 100.0); // every frame identical
    });
    CHECK(loads == 3); // only sampled frames are decoded
    REQUIRE(result.keyframes.size() == 1);
    CHECK(result.kept_indices == std::vector<int>{10});
    REQUIRE(result.log.size() == 3);
    CHECK(result.log[0].kept);
    CHECK_FALSE(result.log[0].has_similarity);
    CHECK_FALSE(result.log[1].kept);
    CHECK(result.log[1].has_similarity);
    CHECK(result.log[1].similarity == 0.0);
}

TEST_CASE("dedup keeps frames that differ beyond the threshold") {
    const auto ts = uniform_timestamps(60, 30.0);
    const auto result = select_keyframes(ts, KeyframePolicy{}, [&](int idx) {
        return GrayImage(8, 8, static_cast<double>(idx) * 4.0); // strongly drifting
    });
    CHECK(result.keyframes.size() == 3);
    for (const auto& d : result.log) CHECK(d.kept);
}

TEST_CASE("a stricter dedup threshold keeps no more frames of a drifting clip") {
    // Steady brightness drift: the difference to the last kept frame grows
    // monotonically with the gap, so the greedy chain shrinks as the
    // threshold rises.
    const auto ts = uniform_timestamps(120, 30.0);
    const auto load = [](int i) { return GrayImage(16, 16, std::min(255.0, i * 2.5)); };
    std::size_t prev_kept = std::numeric_limits<std::size_t>::max();
    for (double tau : {0.01, 0.05, 0.2, 0.9}) {
        KeyframePolicy policy;
        policy.dedup_threshold = tau;
        const auto res = select_keyframes(ts, policy, load);
        CHECK(res.keyframes.size() >= 1);
        CHECK(res.keyframes.size() <= prev_kept);
        prev_kept = res.keyframes.size();
    }
}

TEST_CASE("keyframe policy validation") {
    KeyframePolicy p;
    p.interval = 0.0;
    CHECK_THROWS_AS(p.validate(), Error);
    p = KeyframePolicy{};
    p.dedup_threshold = 1.5;
    CHECK_THROWS_AS(p.validate(), Error);
    p = KeyframePolicy{};
    p.skip_head = -1;
    CHECK_THROWS_AS(p.validate(), Error);
}
