#ifndef TEXFUSE_MODEL_HPP
#define TEXFUSE_MODEL_HPP

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "texfuse/boosting.hpp"
#include "texfuse/error.hpp"
#include "texfuse/forest.hpp"
#include "texfuse/fuse.hpp"
#include "texfuse/svm.hpp"
#include "texfuse/textio.hpp"

namespace texfuse {

enum class ModelKind { random_forest, extra_trees, gradient_boosting, svc };

inline const char* model_kind_name(ModelKind k) {
    switch (k) {
    case ModelKind::random_forest: return "random-forest";
    case ModelKind::extra_trees: return "extra-trees";
    case ModelKind::gradient_boosting: return "gradient-boosting";
    case ModelKind::svc: return "svc";
    }
    return "?";
}

inline ModelKind model_kind_from_name(std::string_view s) {
    if (s == "random-forest" || s == "rf") return ModelKind::random_forest;
    if (s == "extra-trees" || s == "et") return ModelKind::extra_trees;
    if (s == "gradient-boosting" || s == "gb") return ModelKind::gradient_boosting;
    if (s == "svc" || s == "svm") return ModelKind::svc;
    throw Error(Errc::invalid_argument, "unknown classifier '" + std::string(s) + "'");
}

// Trained classifier plus the provenance needed to refuse mismatched inputs:
// the feature scheme, vector width, and the config fingerprint of the feature
// files it was trained from.
struct TrainedModel {
    ModelKind kind = ModelKind::random_forest;
    Scheme scheme = Scheme::lbp;
    std::size_t dims = 0;
    std::uint64_t fingerprint = 0;
    std::uint64_t seed = 0;

    ForestModel forest; // random_forest / extra_trees
    BoostModel boost;   // gradient_boosting
    SvcModel svc;       // svc

    int predict(const double* x) const {
        switch (kind) {
        case ModelKind::random_forest:
        case ModelKind::extra_trees: return forest.predict(x);
        case ModelKind::gradient_boosting: return boost.predict(x);
        case ModelKind::svc: return svc.predict(x);
        }
        return 0;
    }

    std::vector<int> predict_dataset(const Dataset& ds) const {
        if (ds.cols != dims)
            throw Error(Errc::dimension_mismatch,
                        "model expects " + std::to_string(dims) + "-dim vectors, dataset has " +
                            std::to_string(ds.cols));
        if (ds.fingerprint != fingerprint)
            throw Error(Errc::fingerprint_mismatch,
                        "feature config fingerprint " + textio::fmt_hex64(ds.fingerprint) +
                            " does not match the model's " + textio::fmt_hex64(fingerprint));
        std::vector<int> out(ds.rows());
        for (std::size_t i = 0; i < ds.rows(); ++i) out[i] = predict(ds.row(i));
        return out;
    }
};

// Model file layout (text, one container per file):
//
//   texfuse-model v1
//   kind: random-forest
//   scheme: lbp
//   dims: 147
//   fingerprint: <16 hex digits>
//   seed: 42
//   ... kind-specific fields ...
//   <blank line>
//   <payload>
//
// Tree payloads list each tree as a "tree <node-count>" line followed by one
// node per line: "<feature> <threshold> <left> <right> <label-or-value>".
// Leaves use feature -1. The SVC payload carries the bias, the optional
// z-score transform, and one "sv <coef> <values...>" line per support vector.

namespace detail {

inline void write_tree(std::ostream& out, const Tree& t, bool regression) {
    out << "tree " << t.nodes.size() << "\n";
    for (const TreeNode& nd : t.nodes) {
        out << nd.feature << ' ' << textio::fmt_double(nd.threshold) << ' ' << nd.left << ' '
            << nd.right << ' ';
        if (regression)
            out << textio::fmt_double(nd.value);
        else
            out << nd.label;
        out << "\n";
    }
}

inline Tree read_tree(std::istream& in, bool regression, std::size_t dims) {
    std::string line;
    if (!std::getline(in, line)) throw Error(Errc::corrupt_model, "missing tree record");
    const auto head = textio::split(line, ' ');
    if (head.size() != 2 || head[0] != "tree")
        throw Error(Errc::corrupt_model, "expected 'tree <count>', got '" + line + "'");
    const long long count = textio::parse_int(head[1]);
    if (count <= 0) throw Error(Errc::corrupt_model, "tree with no nodes");
    Tree t;
    t.nodes.resize(static_cast<std::size_t>(count));
    for (long long i = 0; i < count; ++i) {
        if (!std::getline(in, line)) throw Error(Errc::corrupt_model, "truncated tree payload");
        const auto f = textio::split(line, ' ');
        if (f.size() != 5) throw Error(Errc::corrupt_model, "bad node line: '" + line + "'");
        TreeNode& nd = t.nodes[static_cast<std::size_t>(i)];
        nd.feature = static_cast<int>(textio::parse_int(f[0]));
        nd.threshold = textio::parse_double(f[1]);
        nd.left = static_cast<int>(textio::parse_int(f[2]));
        nd.right = static_cast<int>(textio::parse_int(f[3]));
        if (regression)
            nd.value = textio::parse_double(f[4]);
        else
            nd.label = static_cast<int>(textio::parse_int(f[4]));
        if (nd.feature >= 0) {
            const bool kids_ok = nd.left > i && nd.left < count && nd.right > i && nd.right < count;
            if (!kids_ok || nd.feature >= static_cast<int>(dims))
                throw Error(Errc::corrupt_model, "node " + std::to_string(i) +
                                                     " references out-of-range child or feature");
        } else if (!regression && nd.label != 0 && nd.label != 1) {
            throw Error(Errc::corrupt_model, "leaf with label " + std::to_string(nd.label));
        }
    }
    return t;
}

} // namespace detail

inline void save_model(const TrainedModel& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(Errc::io_failure, "cannot write " + path);
    textio::write_magic(out, "model", 1);
    textio::write_field(out, "kind", model_kind_name(m.kind));
    textio::write_field(out, "scheme", scheme_name(m.scheme));
    textio::write_field(out, "dims", std::to_string(m.dims));
    textio::write_field(out, "fingerprint", textio::fmt_hex64(m.fingerprint));
    textio::write_field(out, "seed", std::to_string(m.seed));
    switch (m.kind) {
    case ModelKind::random_forest:
    case ModelKind::extra_trees:
        textio::write_field(out, "trees", std::to_string(m.forest.trees.size()));
        textio::write_field(out, "max-depth", std::to_string(m.forest.config.max_depth));
        textio::write_field(out, "feature-subset", std::to_string(m.forest.config.feature_subset));
        break;
    case ModelKind::gradient_boosting:
        textio::write_field(out, "rounds", std::to_string(m.boost.trees.size()));
        textio::write_field(out, "learning-rate", textio::fmt_double(m.boost.config.learning_rate));
        textio::write_field(out, "max-depth", std::to_string(m.boost.config.max_depth));
        textio::write_field(out, "f0", textio::fmt_double(m.boost.f0));
        break;
    case ModelKind::svc:
        textio::write_field(out, "kernel", m.svc.config.kernel == SvmKernel::rbf ? "rbf" : "linear");
        textio::write_field(out, "c", textio::fmt_double(m.svc.config.C));
        textio::write_field(out, "gamma", textio::fmt_double(m.svc.gamma));
        textio::write_field(out, "tol", textio::fmt_double(m.svc.config.tol));
        textio::write_field(out, "standardize", m.svc.scale_mean.empty() ? "0" : "1");
        textio::write_field(out, "converged", m.svc.converged ? "1" : "0");
        textio::write_field(out, "pair-updates", std::to_string(m.svc.pair_updates));
        textio::write_field(out, "svs", std::to_string(m.svc.sv_count()));
        break;
    }
    out << "\n";
    switch (m.kind) {
    case ModelKind::random_forest:
    case ModelKind::extra_trees:
        for (const Tree& t : m.forest.trees) detail::write_tree(out, t, false);
        break;
    case ModelKind::gradient_boosting:
        for (const Tree& t : m.boost.trees) detail::write_tree(out, t, true);
        break;
    case ModelKind::svc: {
        out << "b " << textio::fmt_double(m.svc.b) << "\n";
        if (!m.svc.scale_mean.empty()) {
            out << "scale-mean";
            for (double v : m.svc.scale_mean) out << ' ' << textio::fmt_double(v);
            out << "\nscale-inv";
            for (double v : m.svc.scale_inv) out << ' ' << textio::fmt_double(v);
            out << "\n";
        }
        for (std::size_t s = 0; s < m.svc.sv_count(); ++s) {
            out << "sv " << textio::fmt_double(m.svc.coef[s]);
            const double* v = m.svc.sv.data() + s * m.svc.cols;
            for (std::size_t f = 0; f < m.svc.cols; ++f) out << ' ' << textio::fmt_double(v[f]);
            out << "\n";
        }
        break;
    }
    }
    if (!out) throw Error(Errc::io_failure, "failed writing " + path);
}

inline TrainedModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io_failure, "cannot open " + path);
    textio::Header h;
    try {
        h = textio::read_header(in, "model", 1);
    } catch (const Error& e) {
        if (e.code() == Errc::version_mismatch) throw;
        throw Error(Errc::corrupt_model, std::string(e.what()) + " (" + path + ")");
    }

    TrainedModel m;
    try {
        m.kind = model_kind_from_name(h.require("kind"));
        m.scheme = scheme_from_name(h.require("scheme"));
        m.dims = static_cast<std::size_t>(textio::parse_int(h.require("dims")));
        m.fingerprint = textio::parse_hex64(h.require("fingerprint"));
        m.seed = static_cast<std::uint64_t>(textio::parse_int(h.require("seed")));
        if (m.dims == 0) throw Error(Errc::corrupt_model, "dims must be positive");

        std::string line;
        switch (m.kind) {
        case ModelKind::random_forest:
        case ModelKind::extra_trees: {
            const long long n = textio::parse_int(h.require("trees"));
            if (n <= 0) throw Error(Errc::corrupt_model, "tree count must be positive");
            m.forest.config.n_trees = static_cast<int>(n);
            m.forest.config.max_depth = static_cast<int>(textio::parse_int(h.require("max-depth")));
            m.forest.config.feature_subset =
                static_cast<int>(textio::parse_int(h.require("feature-subset")));
            m.forest.config.extra_trees = m.kind == ModelKind::extra_trees;
            for (long long i = 0; i < n; ++i)
                m.forest.trees.push_back(detail::read_tree(in, false, m.dims));
            break;
        }
        case ModelKind::gradient_boosting: {
            const long long n = textio::parse_int(h.require("rounds"));
            if (n < 0) throw Error(Errc::corrupt_model, "negative round count");
            m.boost.config.rounds = static_cast<int>(n);
            m.boost.config.learning_rate = textio::parse_double(h.require("learning-rate"));
            m.boost.config.max_depth = static_cast<int>(textio::parse_int(h.require("max-depth")));
            m.boost.f0 = textio::parse_double(h.require("f0"));
            for (long long i = 0; i < n; ++i)
                m.boost.trees.push_back(detail::read_tree(in, true, m.dims));
            break;
        }
        case ModelKind::svc: {
            const std::string& kern = h.require("kernel");
            if (kern == "rbf")
                m.svc.config.kernel = SvmKernel::rbf;
            else if (kern == "linear")
                m.svc.config.kernel = SvmKernel::linear;
            else
                throw Error(Errc::corrupt_model, "unknown kernel '" + kern + "'");
            m.svc.config.C = textio::parse_double(h.require("c"));
            m.svc.gamma = textio::parse_double(h.require("gamma"));
            m.svc.config.gamma = m.svc.gamma;
            m.svc.config.tol = textio::parse_double(h.require("tol"));
            const bool scaled = textio::parse_int(h.require("standardize")) != 0;
            m.svc.config.standardize = scaled;
            m.svc.converged = textio::parse_int(h.require("converged")) != 0;
            m.svc.pair_updates = textio::parse_int(h.require("pair-updates"));
            const long long svs = textio::parse_int(h.require("svs"));
            if (svs < 0) throw Error(Errc::corrupt_model, "negative sv count");
            m.svc.cols = m.dims;

            if (!std::getline(in, line)) throw Error(Errc::corrupt_model, "missing bias line");
            auto bf = textio::split(line, ' ');
            if (bf.size() != 2 || bf[0] != "b")
                throw Error(Errc::corrupt_model, "expected 'b <value>', got '" + line + "'");
            m.svc.b = textio::parse_double(bf[1]);

            if (scaled) {
                for (int which = 0; which < 2; ++which) {
                    if (!std::getline(in, line))
                        throw Error(Errc::corrupt_model, "missing scale line");
                    auto f = textio::split(line, ' ');
                    const char* tag = which == 0 ? "scale-mean" : "scale-inv";
                    if (f.size() != m.dims + 1 || f[0] != tag)
                        throw Error(Errc::corrupt_model, std::string("bad ") + tag + " line");
                    auto& dst = which == 0 ? m.svc.scale_mean : m.svc.scale_inv;
                    for (std::size_t j = 1; j < f.size(); ++j)
                        dst.push_back(textio::parse_double(f[j]));
                }
            }
            for (long long s = 0; s < svs; ++s) {
                if (!std::getline(in, line))
                    throw Error(Errc::corrupt_model, "truncated support vectors");
                auto f = textio::split(line, ' ');
                if (f.size() != m.dims + 2 || f[0] != "sv")
                    throw Error(Errc::corrupt_model, "bad sv line");
                m.svc.coef.push_back(textio::parse_double(f[1]));
                for (std::size_t j = 2; j < f.size(); ++j)
                    m.svc.sv.push_back(textio::parse_double(f[j]));
            }
            break;
        }
        }
    } catch (const Error& e) {
        if (e.code() == Errc::corrupt_model) throw;
        throw Error(Errc::corrupt_model, std::string(e.what()) + " (" + path + ")");
    }
    return m;
}

} // namespace texfuse

#endif
