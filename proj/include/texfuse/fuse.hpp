#ifndef TEXFUSE_FUSE_HPP
#define TEXFUSE_FUSE_HPP

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "texfuse/error.hpp"
#include "texfuse/hog.hpp"
#include "texfuse/image.hpp"
#include "texfuse/image_io.hpp"
#include "texfuse/kaze.hpp"
#include "texfuse/lbp.hpp"
#include "texfuse/parallel.hpp"
#include "texfuse/textio.hpp"

namespace texfuse {

enum class Scheme { lbp, hog, kaze, lbp_kaze, hog_kaze };

inline std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::lbp: return "lbp";
        case Scheme::hog: return "hog";
        case Scheme::kaze: return "kaze";
        case Scheme::lbp_kaze: return "lbp+kaze";
        case Scheme::hog_kaze: return "hog+kaze";
    }
    throw Error(Errc::invalid_argument, "unknown scheme");
}

inline Scheme scheme_from_name(const std::string& name) {
    if (name == "lbp") return Scheme::lbp;
    if (name == "hog") return Scheme::hog;
    if (name == "kaze") return Scheme::kaze;
    if (name == "lbp+kaze") return Scheme::lbp_kaze;
    if (name == "hog+kaze") return Scheme::hog_kaze;
    throw Error(Errc::invalid_argument, "unknown scheme '" + name + "'");
}

inline bool scheme_uses_lbp(Scheme s) { return s == Scheme::lbp || s == Scheme::lbp_kaze; }
inline bool scheme_uses_hog(Scheme s) { return s == Scheme::hog || s == Scheme::hog_kaze; }
inline bool scheme_uses_kaze(Scheme s) {
    return s == Scheme::kaze || s == Scheme::lbp_kaze || s == Scheme::hog_kaze;
}

// Everything that shapes a feature row. The same struct feeds extraction,
// fingerprinting, and the effective-config dump, so they cannot drift apart.
struct FuseParams {
    LbpParams lbp;
    HogParams hog;
    KazeParams kaze;
    int resize_to = 28;
    bool log_transform = true;      // apply the logarithmic intensity rescale
    bool kaze_full_resolution = false; // detect on the pre-resize image instead

    void validate() const {
        if (resize_to < 1) throw Error(Errc::invalid_argument, "fuse: resize target must be >= 1");
        lbp.validate();
        hog.validate();
        kaze.validate();
    }
};

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// Canonical textual form of the parameters that influence a scheme's output.
// Parameters of extractors the scheme never runs are omitted, so e.g. HOG
// settings cannot invalidate an LBP-only feature file.
inline std::string canonical_config(Scheme scheme, const FuseParams& p) {
    std::ostringstream os;
    os << "scheme=" << scheme_name(scheme) << ";resize=" << p.resize_to
       << ";log=" << (p.log_transform ? 1 : 0);
    if (scheme_uses_lbp(scheme)) {
        os << ";lbp.P=" << p.lbp.P << ";lbp.R=" << textio::fmt_double(p.lbp.R)
           << ";lbp.uniform=" << (p.lbp.uniform ? 1 : 0) << ";lbp.bands=" << p.lbp.bands
           << ";lbp.eps=" << textio::fmt_double(p.lbp.epsilon);
    }
    if (scheme_uses_hog(scheme)) {
        os << ";hog.cell=" << p.hog.cell_size << ";hog.block=" << p.hog.block_size
           << ";hog.bins=" << p.hog.bin_count << ";hog.stride=" << p.hog.block_stride
           << ";hog.eps=" << textio::fmt_double(p.hog.epsilon)
           << ";hog.signed=" << (p.hog.signed_gradients ? 1 : 0)
           << ";hog.sobel=" << (p.hog.use_sobel ? 1 : 0);
    }
    if (scheme_uses_kaze(scheme)) {
        os << ";kaze.octaves=" << p.kaze.octaves << ";kaze.sublevels=" << p.kaze.sublevels
           << ";kaze.k=" << textio::fmt_double(p.kaze.contrast_k)
           << ";kaze.thresh=" << textio::fmt_double(p.kaze.detector_threshold)
           << ";kaze.m=" << p.kaze.m
           << ";kaze.sigma0=" << textio::fmt_double(p.kaze.base_smoothing)
           << ";kaze.fullres=" << (p.kaze_full_resolution ? 1 : 0);
    }
    return os.str();
}

inline std::uint64_t param_fingerprint(Scheme scheme, const FuseParams& p) {
    return fnv1a64(canonical_config(scheme, p));
}

struct FeatureVector {
    std::vector<double> values;
    Scheme scheme = Scheme::lbp;
    std::uint64_t fingerprint = 0;
};

struct FusedVector {
    std::vector<double> values;
    std::size_t left_len = 0;
    std::size_t right_len = 0;
};

// Plain concatenation, first argument first. No rescaling or reweighting:
// the component vectors are used exactly as extracted.
inline FusedVector combine(const FeatureVector& a, const FeatureVector& b) {
    FusedVector f;
    f.left_len = a.values.size();
    f.right_len = b.values.size();
    f.values.reserve(f.left_len + f.right_len);
    f.values.insert(f.values.end(), a.values.begin(), a.values.end());
    f.values.insert(f.values.end(), b.values.begin(), b.values.end());
    return f;
}

// One image -> one feature row: resize, optional log rescale, per-scheme
// extraction, concatenation for the fused schemes.
inline std::vector<double> extract_features(const GrayImage& img, Scheme scheme,
                                            const FuseParams& p) {
    p.validate();
    GrayImage base = resize(img, p.resize_to, p.resize_to);
    if (p.log_transform) base = texfuse::log_transform(base);

    std::vector<double> lbp_v, hog_v, kaze_v;
    if (scheme_uses_lbp(scheme)) lbp_v = lbp_vector(base, p.lbp);
    if (scheme_uses_hog(scheme)) hog_v = hog_vector(base, p.hog);
    if (scheme_uses_kaze(scheme)) {
        if (p.kaze_full_resolution) {
            GrayImage full = p.log_transform ? texfuse::log_transform(img) : img;
            kaze_v = kaze_vector(full, p.kaze).vector;
        } else {
            kaze_v = kaze_vector(base, p.kaze).vector;
        }
    }

    switch (scheme) {
        case Scheme::lbp: return lbp_v;
        case Scheme::hog: return hog_v;
        case Scheme::kaze: return kaze_v;
        case Scheme::lbp_kaze: {
            FeatureVector a{std::move(lbp_v), scheme, 0}, b{std::move(kaze_v), scheme, 0};
            return combine(a, b).values;
        }
        case Scheme::hog_kaze: {
            FeatureVector a{std::move(hog_v), scheme, 0}, b{std::move(kaze_v), scheme, 0};
            return combine(a, b).values;
        }
    }
    throw Error(Errc::invalid_argument, "unknown scheme");
}

// Labeled feature matrix. Labels: 0 = real, 1 = fake, everywhere.
struct Dataset {
    std::size_t cols = 0;
    std::vector<double> X; // row-major, rows() x cols
    std::vector<int> y;
    std::vector<std::string> sources;
    Scheme scheme = Scheme::lbp;
    std::uint64_t fingerprint = 0;

    std::size_t rows() const { return y.size(); }
    const double* row(std::size_t i) const { return X.data() + i * cols; }

    void append_row(const std::vector<double>& values, int label, std::string source) {
        if (cols == 0) cols = values.size();
        if (values.size() != cols)
            throw Error(Errc::schema_mismatch, "dataset: row length disagrees with matrix width");
        if (label != 0 && label != 1)
            throw Error(Errc::invalid_argument, "dataset: label must be 0 or 1");
        X.insert(X.end(), values.begin(), values.end());
        y.push_back(label);
        sources.push_back(std::move(source));
    }

    bool operator==(const Dataset& o) const {
        return cols == o.cols && X == o.X && y == o.y && sources == o.sources &&
               scheme == o.scheme && fingerprint == o.fingerprint;
    }
};

struct PrepareSummary {
    std::size_t real_ok = 0;
    std::size_t fake_ok = 0;
    std::vector<std::pair<std::string, std::string>> skipped; // path, reason
};

namespace detail {

inline std::vector<std::filesystem::path> list_class_images(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw Error(Errc::empty_class, "missing class directory: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (ext == ".png" || ext == ".pgm") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

} // namespace detail

// Corpus layout: <root>/real/*.{png,pgm} and <root>/fake/*.{png,pgm}.
// Rows appear in lexicographic path order, the whole real block first. Files
// that fail to decode are skipped and reported in the summary; a class with
// zero usable images is an error.
inline Dataset prepare_dataset(const std::filesystem::path& corpus_root, Scheme scheme,
                               const FuseParams& params, int threads = 0,
                               PrepareSummary* summary = nullptr) {
    params.validate();
    struct Item {
        std::filesystem::path path;
        int label;
        std::vector<double> values;
        std::string failure; // empty = ok
    };
    std::vector<Item> items;
    for (int label : {0, 1}) {
        const auto dir = corpus_root / (label == 0 ? "real" : "fake");
        for (auto& p : detail::list_class_images(dir)) items.push_back({p, label, {}, {}});
    }

    parallel_for(items.size(), resolve_threads(threads), [&](std::size_t i) {
        try {
            const GrayImage img = load_image(items[i].path);
            items[i].values = extract_features(img, scheme, params);
        } catch (const std::exception& e) {
            items[i].failure = e.what();
        }
    });

    Dataset ds;
    ds.scheme = scheme;
    ds.fingerprint = param_fingerprint(scheme, params);
    std::size_t ok[2] = {0, 0};
    for (auto& it : items) {
        if (!it.failure.empty()) {
            if (summary) summary->skipped.emplace_back(it.path.string(), it.failure);
            continue;
        }
        ds.append_row(it.values, it.label, it.path.string());
        ++ok[it.label];
    }
    if (summary) {
        summary->real_ok = ok[0];
        summary->fake_ok = ok[1];
    }
    if (ok[0] == 0) throw Error(Errc::empty_class, "no decodable images under 'real/'");
    if (ok[1] == 0) throw Error(Errc::empty_class, "no decodable images under 'fake/'");
    return ds;
}

// ---- feature file: versioned CSV with a self-describing header -----------
//
//   texfuse-features v1
//   scheme: hog+kaze
//   fingerprint: 0123456789abcdef
//   rows: 42
//   cols: 400
//   <blank>
//   label,v0,...,v{cols-1},source
//
// Values print as %.17g so the round-trip is bit-exact. The source path is
// the final field and may itself contain commas.

inline void export_features(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io_failure, "cannot open " + path.string() + " for writing");
    textio::write_magic(out, "features", 1);
    textio::write_field(out, "scheme", scheme_name(ds.scheme));
    textio::write_field(out, "fingerprint", textio::fmt_hex64(ds.fingerprint));
    textio::write_field(out, "rows", std::to_string(ds.rows()));
    textio::write_field(out, "cols", std::to_string(ds.cols));
    out << "\n";
    for (std::size_t r = 0; r < ds.rows(); ++r) {
        out << ds.y[r];
        const double* row = ds.row(r);
        for (std::size_t c = 0; c < ds.cols; ++c) out << ',' << textio::fmt_double(row[c]);
        out << ',' << ds.sources[r] << "\n";
    }
    if (!out) throw Error(Errc::io_failure, "write failed on " + path.string());
}

inline Dataset import_features(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io_failure, "cannot open " + path.string());
    textio::Header hdr;
    try {
        hdr = textio::read_header(in, "features", 1);
    } catch (const Error& e) {
        if (e.code() == Errc::version_mismatch)
            throw Error(Errc::schema_mismatch, std::string(e.what()) + " (feature file)");
        throw;
    }
    Dataset ds;
    ds.scheme = scheme_from_name(hdr.require("scheme"));
    ds.fingerprint = textio::parse_hex64(hdr.require("fingerprint"));
    const long rows = textio::parse_int(hdr.require("rows"));
    const long cols = textio::parse_int(hdr.require("cols"));
    if (rows < 0 || cols <= 0) throw Error(Errc::malformed_file, "features: bad rows/cols");
    ds.cols = static_cast<std::size_t>(cols);
    ds.X.reserve(static_cast<std::size_t>(rows) * ds.cols);

    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = textio::split(line, ',', static_cast<std::size_t>(cols) + 2);
        if (fields.size() != static_cast<std::size_t>(cols) + 2)
            throw Error(Errc::malformed_file, "features: wrong field count in a data row");
        const long label = textio::parse_int(std::string(fields[0]));
        std::vector<double> vals(static_cast<std::size_t>(cols));
        for (long c = 0; c < cols; ++c)
            vals[static_cast<std::size_t>(c)] = textio::parse_double(std::string(fields[c + 1]));
        ds.append_row(vals, static_cast<int>(label), std::string(fields.back()));
    }
    if (ds.rows() != static_cast<std::size_t>(rows))
        throw Error(Errc::malformed_file, "features: row count disagrees with header");
    return ds;
}

// Guarded append for accumulating feature files produced in stages.
inline void append_dataset(Dataset& into, const Dataset& from) {
    if (into.fingerprint != from.fingerprint || into.scheme != from.scheme)
        throw Error(Errc::schema_mismatch, "feature sets come from different configurations");
    if (into.cols != from.cols)
        throw Error(Errc::schema_mismatch, "feature sets have different widths");
    into.X.insert(into.X.end(), from.X.begin(), from.X.end());
    into.y.insert(into.y.end(), from.y.begin(), from.y.end());
    into.sources.insert(into.sources.end(), from.sources.begin(), from.sources.end());
}

} // namespace texfuse

#endif
