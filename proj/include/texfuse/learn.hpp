#ifndef TEXFUSE_LEARN_HPP
#define TEXFUSE_LEARN_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "texfuse/error.hpp"
#include "texfuse/fuse.hpp"
#include "texfuse/model.hpp"
#include "texfuse/rng.hpp"

namespace texfuse {

inline constexpr std::uint64_t kDefaultSeed = 42;

struct SplitSpec {
    double train_fraction = 0.8;
    bool stratified = true;
    std::uint64_t seed = kDefaultSeed;
};

namespace detail {

inline Dataset dataset_subset(const Dataset& ds, const std::vector<std::size_t>& rows) {
    Dataset out;
    out.cols = ds.cols;
    out.scheme = ds.scheme;
    out.fingerprint = ds.fingerprint;
    out.X.reserve(rows.size() * ds.cols);
    out.y.reserve(rows.size());
    out.sources.reserve(rows.size());
    for (std::size_t r : rows) {
        const double* p = ds.row(r);
        out.X.insert(out.X.end(), p, p + ds.cols);
        out.y.push_back(ds.y[r]);
        out.sources.push_back(ds.sources[r]);
    }
    return out;
}

inline std::size_t train_count(double fraction, std::size_t n) {
    const auto want = static_cast<long long>(std::llround(fraction * static_cast<double>(n)));
    const long long hi = static_cast<long long>(n) - 1;
    return static_cast<std::size_t>(std::clamp<long long>(want, 1, hi));
}

} // namespace detail

// Seeded train/test split. Stratified mode shuffles each class with its own
// stream keyed by (seed, class label) and keeps at least one sample of every
// class on each side; row order within each side follows the input dataset.
inline std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, const SplitSpec& spec) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
        throw Error(Errc::invalid_argument, "train fraction must lie in (0, 1)");
    std::vector<std::size_t> train_rows, test_rows;
    if (spec.stratified) {
        for (int cls = 0; cls < 2; ++cls) {
            std::vector<std::size_t> idx;
            for (std::size_t i = 0; i < ds.rows(); ++i)
                if (ds.y[i] == cls) idx.push_back(i);
            if (idx.size() < 2)
                throw Error(Errc::class_too_small,
                            "class " + std::to_string(cls) + " has " +
                                std::to_string(idx.size()) + " sample(s); need at least 2");
            Rng rng = Rng::stream(spec.seed, static_cast<std::uint64_t>(cls));
            rng.shuffle(idx);
            const std::size_t k = detail::train_count(spec.train_fraction, idx.size());
            train_rows.insert(train_rows.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
            test_rows.insert(test_rows.end(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end());
        }
    } else {
        if (ds.rows() < 2) throw Error(Errc::degenerate_data, "need at least 2 rows to split");
        std::vector<std::size_t> idx(ds.rows());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        Rng rng = Rng::stream(spec.seed, 0);
        rng.shuffle(idx);
        const std::size_t k = detail::train_count(spec.train_fraction, idx.size());
        train_rows.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
        test_rows.assign(idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end());
    }
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(test_rows.begin(), test_rows.end());
    return {detail::dataset_subset(ds, train_rows), detail::dataset_subset(ds, test_rows)};
}

struct TrainOptions {
    ModelKind kind = ModelKind::random_forest;
    ForestConfig forest;
    BoostConfig boost;
    SvcConfig svc;
    std::uint64_t seed = kDefaultSeed;
    int threads = 0;
};

inline TrainedModel train_model(const Dataset& ds, const TrainOptions& opt) {
    if (ds.rows() == 0 || ds.cols == 0)
        throw Error(Errc::degenerate_data, "cannot train on an empty dataset");
    TrainedModel m;
    m.kind = opt.kind;
    m.scheme = ds.scheme;
    m.dims = ds.cols;
    m.fingerprint = ds.fingerprint;
    m.seed = opt.seed;
    switch (opt.kind) {
    case ModelKind::random_forest:
    case ModelKind::extra_trees: {
        ForestConfig cfg = opt.forest;
        cfg.extra_trees = opt.kind == ModelKind::extra_trees;
        m.forest = train_forest(ds.X.data(), ds.rows(), ds.cols, ds.y, cfg, opt.seed, opt.threads);
        break;
    }
    case ModelKind::gradient_boosting:
        m.boost = train_boosting(ds.X.data(), ds.rows(), ds.cols, ds.y, opt.boost).model;
        break;
    case ModelKind::svc:
        m.svc = train_svc(ds.X.data(), ds.rows(), ds.cols, ds.y, opt.svc);
        break;
    }
    return m;
}

// Confusion counts and derived metrics with the fake class (label 1) as
// positive. Zero-denominator metrics report 0 and drop their defined flag
// rather than dividing by zero.
struct EvalReport {
    std::size_t n = 0;
    long tp = 0, tn = 0, fp = 0, fn = 0;
    double accuracy = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0;
    bool precision_defined = true, recall_defined = true, f1_defined = true;
};

inline EvalReport evaluate_predictions(const std::vector<int>& pred, const std::vector<int>& y) {
    if (pred.size() != y.size())
        throw Error(Errc::dimension_mismatch, "prediction/label length mismatch");
    if (pred.empty()) throw Error(Errc::degenerate_data, "nothing to evaluate");
    EvalReport r;
    r.n = pred.size();
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (y[i] == 1)
            (pred[i] == 1 ? r.tp : r.fn)++;
        else
            (pred[i] == 1 ? r.fp : r.tn)++;
    }
    r.accuracy = static_cast<double>(r.tp + r.tn) / static_cast<double>(r.n);
    if (r.tp + r.fp > 0)
        r.precision = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp);
    else
        r.precision_defined = false;
    if (r.tp + r.fn > 0)
        r.recall = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn);
    else
        r.recall_defined = false;
    if (r.precision_defined && r.recall_defined && r.precision + r.recall > 0.0)
        r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
    else
        r.f1_defined = false;
    return r;
}

inline EvalReport evaluate(const TrainedModel& model, const Dataset& test) {
    return evaluate_predictions(model.predict_dataset(test), test.y);
}

} // namespace texfuse

#endif
