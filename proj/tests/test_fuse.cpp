// Feature fusion, fingerprints, corpus preparation, feature-file round trips.

#include <catch2/catch_amalgamated.hpp>

#include <cfloat>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "texfuse/fuse.hpp"
#include "texfuse/rng.hpp"

#include "support/synthetic.hpp"

using namespace texfuse;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), {});
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << text;
    REQUIRE(out.good());
}

bool has_code(const Error& e, Errc c) { return e.code() == c; }

} // namespace

TEST_CASE("fnv1a64 matches the published test vectors") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("scheme names round-trip and reject unknowns") {
    for (Scheme s : {Scheme::lbp, Scheme::hog, Scheme::kaze, Scheme::lbp_kaze, Scheme::hog_kaze})
        CHECK(scheme_from_name(scheme_name(s)) == s);
    CHECK(scheme_name(Scheme::lbp_kaze) == "lbp+kaze");
    CHECK(scheme_name(Scheme::hog_kaze) == "hog+kaze");
    CHECK_THROWS_MATCHES(scheme_from_name("hogkaze"), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return has_code(e, Errc::invalid_argument); }));
}

TEST_CASE("fingerprints track only the parameters a scheme uses") {
    FuseParams base;
    const auto fp = [&](Scheme s, const FuseParams& p) { return param_fingerprint(s, p); };

    FuseParams hog_tweak = base;
    hog_tweak.hog.cell_size = 14;
    CHECK(fp(Scheme::lbp, hog_tweak) == fp(Scheme::lbp, base));     // irrelevant knob
    CHECK(fp(Scheme::hog, hog_tweak) != fp(Scheme::hog, base));     // relevant knob
    CHECK(fp(Scheme::hog_kaze, hog_tweak) != fp(Scheme::hog_kaze, base));

    FuseParams lbp_tweak = base;
    lbp_tweak.lbp.bands = 3;
    CHECK(fp(Scheme::hog_kaze, lbp_tweak) == fp(Scheme::hog_kaze, base));
    CHECK(fp(Scheme::lbp, lbp_tweak) != fp(Scheme::lbp, base));

    FuseParams kaze_tweak = base;
    kaze_tweak.kaze.m = 512;
    CHECK(fp(Scheme::hog, kaze_tweak) == fp(Scheme::hog, base));
    for (Scheme s : {Scheme::kaze, Scheme::lbp_kaze, Scheme::hog_kaze})
        CHECK(fp(s, kaze_tweak) != fp(s, base));

    FuseParams fullres = base;
    fullres.kaze_full_resolution = true;
    CHECK(fp(Scheme::hog, fullres) == fp(Scheme::hog, base));
    CHECK(fp(Scheme::kaze, fullres) != fp(Scheme::kaze, base));

    FuseParams resize_tweak = base;
    resize_tweak.resize_to = 32;
    for (Scheme s : {Scheme::lbp, Scheme::hog, Scheme::kaze})
        CHECK(fp(s, resize_tweak) != fp(s, base));

    // canonical text is stable across calls
    CHECK(canonical_config(Scheme::hog_kaze, base) == canonical_config(Scheme::hog_kaze, base));
}

TEST_CASE("combine concatenates and both halves are recoverable") {
    Rng rng(77);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t la = rng.uniform_index(40);
        const std::size_t lb = rng.uniform_index(40);
        FeatureVector a, b;
        for (std::size_t i = 0; i < la; ++i) a.values.push_back(rng.uniform(-5.0, 5.0));
        for (std::size_t i = 0; i < lb; ++i) b.values.push_back(rng.uniform(-5.0, 5.0));
        const FusedVector f = combine(a, b);
        REQUIRE(f.values.size() == la + lb);
        REQUIRE(f.left_len == la);
        REQUIRE(f.right_len == lb);
        const std::vector<double> left(f.values.begin(), f.values.begin() + static_cast<std::ptrdiff_t>(f.left_len));
        const std::vector<double> right(f.values.begin() + static_cast<std::ptrdiff_t>(f.left_len), f.values.end());
        REQUIRE(left == a.values);
        REQUIRE(right == b.values);
    }
}

TEST_CASE("per-scheme feature widths and fused layout") {
    const GrayImage img = synth::noise_texture(21, 32, 32);
    FuseParams p;
    const auto lbp_v = extract_features(img, Scheme::lbp, p);
    const auto hog_v = extract_features(img, Scheme::hog, p);
    const auto kaze_v = extract_features(img, Scheme::kaze, p);
    CHECK(lbp_v.size() == 540u);
    CHECK(hog_v.size() == 144u);
    CHECK(kaze_v.size() == 256u);

    const auto lk = extract_features(img, Scheme::lbp_kaze, p);
    REQUIRE(lk.size() == 796u);
    CHECK(std::vector<double>(lk.begin(), lk.begin() + 540) == lbp_v);
    CHECK(std::vector<double>(lk.begin() + 540, lk.end()) == kaze_v);

    const auto hk = extract_features(img, Scheme::hog_kaze, p);
    REQUIRE(hk.size() == 400u);
    CHECK(std::vector<double>(hk.begin(), hk.begin() + 144) == hog_v);
    CHECK(std::vector<double>(hk.begin() + 144, hk.end()) == kaze_v);
}

TEST_CASE("full-resolution keypoint detection changes only the kaze half") {
    // two strong blobs so keypoints exist at either working resolution
    GrayImage img(64, 64, 20.0);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) {
            const double d1 = (x - 20.0) * (x - 20.0) + (y - 20.0) * (y - 20.0);
            const double d2 = (x - 44.0) * (x - 44.0) + (y - 40.0) * (y - 40.0);
            img.at(x, y) += 230.0 * std::exp(-d1 / 50.0) + 180.0 * std::exp(-d2 / 20.0);
        }
    FuseParams p;
    FuseParams pf = p;
    pf.kaze_full_resolution = true;
    const auto a = extract_features(img, Scheme::hog_kaze, p);
    const auto b = extract_features(img, Scheme::hog_kaze, pf);
    REQUIRE(a.size() == 400u);
    REQUIRE(b.size() == 400u);
    CHECK(std::vector<double>(a.begin(), a.begin() + 144) ==
          std::vector<double>(b.begin(), b.begin() + 144));
    CHECK(std::vector<double>(a.begin() + 144, a.end()) !=
          std::vector<double>(b.begin() + 144, b.end()));
}

TEST_CASE("extraction validates its parameters") {
    const GrayImage img = synth::noise_texture(2, 32, 32);
    FuseParams p;
    p.resize_to = 0;
    CHECK_THROWS_MATCHES(extract_features(img, Scheme::hog, p), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return has_code(e, Errc::invalid_argument); }));
    p = FuseParams{};
    p.lbp.P = 3;
    CHECK_THROWS_MATCHES(extract_features(img, Scheme::lbp, p), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return has_code(e, Errc::invalid_argument); }));
}

TEST_CASE("dataset rows are guarded") {
    Dataset ds;
    ds.append_row({1.0, 2.0}, 0, "a");
    CHECK(ds.cols == 2u);
    CHECK_THROWS_MATCHES(ds.append_row({1.0, 2.0, 3.0}, 0, "b"), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return has_code(e, Errc::schema_mismatch); }));
    CHECK_THROWS_MATCHES(ds.append_row({1.0, 2.0}, 2, "c"), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return has_code(e, Errc::invalid_argument); }));
    CHECK(ds.rows() == 1u);
}

TEST_CASE("feature files round-trip bit-exactly") {
    synth::TempDir tmp("fuse-io");
    Dataset ds;
    ds.scheme = Scheme::hog_kaze;
    ds.fingerprint = 0xdeadbeefcafef00dull;
    ds.append_row({0.1, -0.0, 5e-324}, 0, "real/with,commas,inside.png");
    ds.append_row({DBL_MAX, 1.0 / 3.0, -2.5e-15}, 1, "fake/b.pgm");
    ds.append_row({0.0, 1.0, 2.0}, 1, "fake/c.png");

    const fs::path file = tmp.path / "features.txt";
    export_features(ds, file);

    const std::string text = slurp(file);
    CHECK(text.rfind("texfuse-features v1\n", 0) == 0);
    CHECK(text.find("scheme: hog+kaze") != std::string::npos);
    CHECK(text.find("fingerprint: deadbeefcafef00d") != std::string::npos);
    CHECK(text.find("rows: 3") != std::string::npos);
    CHECK(text.find("cols: 3") != std::string::npos);

    const Dataset back = import_features(file);
    CHECK(back == ds);
    REQUIRE(back.X.size() == ds.X.size());
    // vector equality treats -0.0 == 0.0; the bytes must match too
    CHECK(std::memcmp(back.X.data(), ds.X.data(), ds.X.size() * sizeof(double)) == 0);
    CHECK(back.sources[0] == "real/with,commas,inside.png");

    // exporting the re-import reproduces the identical file
    const fs::path file2 = tmp.path / "features2.txt";
    export_features(back, file2);
    CHECK(slurp(file2) == text);
}

TEST_CASE("feature-file version and shape problems are reported") {
    synth::TempDir tmp("fuse-roundtrip");
    Dataset ds;
    ds.scheme = Scheme::lbp;
    ds.fingerprint = 7;
    ds.append_row({1.0, 2.0}, 0, "x.png");
    ds.append_row({3.0, 4.0}, 1, "y.png");
    const fs::path file = tmp.path / "features.txt";
    export_features(ds, file);
    const std::string good = slurp(file);

    SECTION("newer version becomes a schema mismatch") {
        std::string bad = good;
        bad.replace(bad.find("v1"), 2, "v2");
        spit(file, bad);
        CHECK_THROWS_MATCHES(import_features(file), Error,
                             Catch::Matchers::Predicate<Error>([](const Error& e) {
                                 return has_code(e, Errc::schema_mismatch);
                             }));
    }
    SECTION("wrong magic is malformed") {
        std::string bad = good;
        bad.replace(bad.find("features"), 8, "featherz");
        spit(file, bad);
        CHECK_THROWS_AS(import_features(file), Error);
    }
    SECTION("short data row is malformed") {
        std::string bad = good;
        const auto pos = bad.rfind(",y.png");
        bad = bad.substr(0, bad.rfind(',', pos - 1)) + ",y.png\n";
        spit(file, bad);
        CHECK_THROWS_MATCHES(import_features(file), Error,
                             Catch::Matchers::Predicate<Error>([](const Error& e) {
                                 return has_code(e, Errc::malformed_file);
                             }));
    }
    SECTION("row count disagreement is malformed") {
        std::string bad = good;
        bad.replace(bad.find("rows: 2"), 7, "rows: 3");
        spit(file, bad);
        CHECK_THROWS_MATCHES(import_features(file), Error,
                             Catch::Matchers::Predicate<Error>([](const Error& e) {
                                 return has_code(e, Errc::malformed_file);
                             }));
    }
    SECTION("unparseable value is malformed") {
        std::string bad = good;
        bad.replace(bad.find("3,"), 2, "Q,");
        spit(file, bad);
        CHECK_THROWS_MATCHES(import_features(file), Error,
                             Catch::Matchers::Predicate<Error>([](const Error& e) {
                                 return has_code(e, Errc::malformed_file);
                             }));
    }
    SECTION("missing file is an io failure") {
        CHECK_THROWS_MATCHES(import_features(tmp.path / "nope.txt"), Error,
                             Catch::Matchers::Predicate<Error>([](const Error& e) {
                                 return has_code(e, Errc::io_failure);
                             }));
    }
}

TEST_CASE("appending datasets enforces matching schema") {
    Dataset a, b;
    a.scheme = b.scheme = Scheme::hog;
    a.fingerprint = b.fingerprint = 99;
    a.append_row({1.0, 2.0}, 0, "a");
    b.append_row({3.0, 4.0}, 1, "b");
    append_dataset(a, b);
    REQUIRE(a.rows() == 2u);
    CHECK(a.y == std::vector<int>{0, 1});
    CHECK(a.sources == std::vector<std::string>{"a", "b"});

    Dataset c = b;
    c.fingerprint = 100;
    CHECK_THROWS_MATCHES(append_dataset(a, c), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return has_code(e, Errc::schema_mismatch); }));
    Dataset d;
    d.scheme = Scheme::hog;
    d.fingerprint = 99;
    d.append_row({1.0, 2.0, 3.0}, 0, "d");
    CHECK_THROWS_MATCHES(append_dataset(a, d), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return has_code(e, Errc::schema_mismatch); }));
}

TEST_CASE("corpus preparation orders rows and reports skips") {
    synth::TempDir tmp("fuse-corpus");
    const fs::path root = tmp.path / "corpus";
    synth::write_corpus(root, 4, 5);
    spit(root / "fake" / "zz_junk.png", "this is not an image");
    spit(root / "fake" / "notes.txt", "ignored: wrong extension");

    FuseParams p;
    PrepareSummary summary;
    const Dataset ds = prepare_dataset(root, Scheme::hog_kaze, p, 1, &summary);
    REQUIRE(ds.rows() == 8u);
    CHECK(ds.cols == 400u);
    CHECK(summary.real_ok == 4u);
    CHECK(summary.fake_ok == 4u);
    REQUIRE(summary.skipped.size() == 1u);
    CHECK(summary.skipped[0].first.find("zz_junk.png") != std::string::npos);

    CHECK(ds.y == std::vector<int>{0, 0, 0, 0, 1, 1, 1, 1});
    CHECK(ds.fingerprint == param_fingerprint(Scheme::hog_kaze, p));
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(ds.sources[i].find("real_") != std::string::npos);
        CHECK(ds.sources[i + 4].find("fake_") != std::string::npos);
        if (i > 0) {
            CHECK(ds.sources[i - 1] < ds.sources[i]);         // lexicographic within class
            CHECK(ds.sources[i + 3] < ds.sources[i + 4]);
        }
    }

    SECTION("worker count does not change the result") {
        const Dataset ds8 = prepare_dataset(root, Scheme::hog_kaze, p, 8);
        CHECK(ds8 == ds);
    }
    SECTION("a class with no usable images is an error") {
        fs::remove_all(root / "fake");
        try {
            prepare_dataset(root, Scheme::hog_kaze, p, 1);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::empty_class);
            CHECK(std::string(e.what()).find("fake") != std::string::npos);
        }
    }
}
