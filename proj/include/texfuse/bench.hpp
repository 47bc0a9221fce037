#ifndef TEXFUSE_BENCH_HPP
#define TEXFUSE_BENCH_HPP

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "texfuse/error.hpp"
#include "texfuse/fuse.hpp"
#include "texfuse/learn.hpp"
#include "texfuse/textio.hpp"

namespace texfuse {

enum class Phase { feature_extraction, training, inference };

inline const char* phase_name(Phase p) {
    switch (p) {
    case Phase::feature_extraction: return "feature-extraction";
    case Phase::training: return "training";
    case Phase::inference: return "inference";
    }
    return "?";
}

struct TimingSample {
    Phase phase = Phase::feature_extraction;
    double t_start = 0.0; // seconds on the monotonic clock
    double t_end = 0.0;
    double duration = 0.0;
    std::size_t n_instances = 1;
};

// Timing summary for one phase. The derived fields are defined as
//   avg          = left-to-right sum of durations / runs
//   per_instance = avg / N
//   total        = per_instance * N
// so the per-instance identity holds bit-for-bit, and a checker recomputing
// the same expressions over `samples` reproduces every field exactly.
struct PhaseTiming {
    Phase phase = Phase::feature_extraction;
    std::size_t runs = 0;
    std::size_t n_instances = 1;
    std::vector<TimingSample> samples;
    double avg = 0.0;
    double per_instance = 0.0;
    double total = 0.0;
    double min = 0.0;
    double median = 0.0;
    double max = 0.0;
};

namespace detail {

inline double monotonic_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

inline void finalize_phase(PhaseTiming& pt) {
    double sum = 0.0;
    for (const TimingSample& s : pt.samples) sum += s.duration;
    pt.runs = pt.samples.size();
    pt.avg = sum / static_cast<double>(pt.runs);
    pt.per_instance = pt.avg / static_cast<double>(pt.n_instances);
    pt.total = pt.per_instance * static_cast<double>(pt.n_instances);
    std::vector<double> d;
    d.reserve(pt.samples.size());
    for (const TimingSample& s : pt.samples) d.push_back(s.duration);
    std::sort(d.begin(), d.end());
    pt.min = d.front();
    pt.max = d.back();
    const std::size_t mid = d.size() / 2;
    pt.median = d.size() % 2 == 1 ? d[mid] : 0.5 * (d[mid - 1] + d[mid]);
}

} // namespace detail

// Runs one untimed warm-up, then n_runs timed executions on the monotonic
// clock. Workload failures surface with the phase attached.
inline PhaseTiming measure(Phase phase, const std::function<void()>& workload, int n_runs,
                           std::size_t n_instances) {
    if (n_runs < 1) throw Error(Errc::invalid_argument, "n_runs must be >= 1");
    if (n_instances < 1) throw Error(Errc::invalid_argument, "n_instances must be >= 1");
    PhaseTiming pt;
    pt.phase = phase;
    pt.n_instances = n_instances;
    const auto run = [&](bool timed) {
        try {
            if (!timed) {
                workload();
                return;
            }
            TimingSample s;
            s.phase = phase;
            s.n_instances = n_instances;
            s.t_start = detail::monotonic_seconds();
            workload();
            s.t_end = detail::monotonic_seconds();
            s.duration = s.t_end - s.t_start;
            pt.samples.push_back(s);
        } catch (const Error& e) {
            throw Error(Errc::workload_failure,
                        std::string(phase_name(phase)) + " workload failed: " + e.what());
        } catch (const std::exception& e) {
            throw Error(Errc::workload_failure,
                        std::string(phase_name(phase)) + " workload failed: " + e.what());
        }
    };
    run(false);
    for (int i = 0; i < n_runs; ++i) run(true);
    detail::finalize_phase(pt);
    return pt;
}

struct BenchConfig {
    Scheme scheme = Scheme::hog_kaze;
    ModelKind classifier = ModelKind::svc;
    int n_runs = 3;
    FuseParams features;
    SplitSpec split;
    TrainOptions train;
};

struct BenchReport {
    BenchConfig config;
    std::uint64_t fingerprint = 0;
    PhaseTiming feature, training, inference;
    EvalReport eval;
    std::size_t corpus_images = 0;
    std::string environment; // hardware/thread descriptor; CPU-only build
};

namespace detail {

inline std::string environment_string(int threads) {
    std::ostringstream os;
    os << "cpu-only;"
#if defined(__linux__)
       << " os=linux;"
#elif defined(__APPLE__)
       << " os=darwin;"
#else
       << " os=other;"
#endif
#if defined(__x86_64__) || defined(_M_X64)
       << " arch=x86_64;"
#elif defined(__aarch64__)
       << " arch=aarch64;"
#else
       << " arch=other;"
#endif
        ;
    os << " hw-threads=" << std::thread::hardware_concurrency() << "; worker-threads="
       << (threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency()));
    return os.str();
}

} // namespace detail

// End-to-end timed run: extraction, training, and inference each repeated
// n_runs times (plus one warm-up) from fresh inputs, so repetition can never
// leak state between runs. Accuracy is recomputed per inference run and must
// not move.
inline BenchReport bench_pipeline(const std::string& corpus_root, const BenchConfig& cfg) {
    BenchReport rep;
    rep.config = cfg;
    rep.fingerprint = param_fingerprint(cfg.scheme, cfg.features);
    rep.environment = detail::environment_string(cfg.train.threads);

    // The instance count N feeds the per-instance fields, so extraction runs
    // once untimed up front; measure() then adds its own warm-up.
    Dataset ds = prepare_dataset(corpus_root, cfg.scheme, cfg.features, cfg.train.threads);
    rep.corpus_images = ds.rows();
    rep.feature = measure(Phase::feature_extraction, [&] {
        ds = prepare_dataset(corpus_root, cfg.scheme, cfg.features, cfg.train.threads);
    }, cfg.n_runs, rep.corpus_images);

    auto [train_ds, test_ds] = train_test_split(ds, cfg.split);

    TrainOptions topt = cfg.train;
    topt.kind = cfg.classifier;
    TrainedModel model;
    rep.training = measure(Phase::training, [&] { model = train_model(train_ds, topt); },
                           cfg.n_runs, train_ds.rows());

    std::vector<int> pred;
    bool have_eval = false;
    rep.inference = measure(Phase::inference, [&] {
        pred = model.predict_dataset(test_ds);
        const EvalReport er = evaluate_predictions(pred, test_ds.y);
        if (!have_eval) {
            rep.eval = er;
            have_eval = true;
        } else if (er.accuracy != rep.eval.accuracy || er.tp != rep.eval.tp ||
                   er.tn != rep.eval.tn) {
            throw Error(Errc::workload_failure, "inference accuracy drifted between runs");
        }
    }, cfg.n_runs, test_ds.rows());
    return rep;
}

namespace detail {

inline void write_phase(std::ostream& out, const PhaseTiming& pt) {
    out << "phase " << phase_name(pt.phase) << " runs " << pt.runs << " instances "
        << pt.n_instances << "\n";
    for (const TimingSample& s : pt.samples)
        out << "sample " << textio::fmt_double(s.t_start) << ' ' << textio::fmt_double(s.t_end)
            << ' ' << textio::fmt_double(s.duration) << "\n";
    out << "computed avg " << textio::fmt_double(pt.avg) << " per-instance "
        << textio::fmt_double(pt.per_instance) << " total " << textio::fmt_double(pt.total)
        << " min " << textio::fmt_double(pt.min) << " median " << textio::fmt_double(pt.median)
        << " max " << textio::fmt_double(pt.max) << "\n";
}

} // namespace detail

inline void write_bench_report(const BenchReport& rep, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(Errc::io_failure, "cannot write " + path);
    textio::write_magic(out, "report", 1);
    textio::write_field(out, "scheme", scheme_name(rep.config.scheme));
    textio::write_field(out, "classifier", model_kind_name(rep.config.classifier));
    textio::write_field(out, "fingerprint", textio::fmt_hex64(rep.fingerprint));
    textio::write_field(out, "seed", std::to_string(rep.config.train.seed));
    textio::write_field(out, "runs", std::to_string(rep.config.n_runs));
    textio::write_field(out, "corpus-images", std::to_string(rep.corpus_images));
    textio::write_field(out, "environment", rep.environment);
    textio::write_field(out, "warmup", "1 untimed run per phase, excluded from statistics");
    textio::write_field(out, "accuracy", textio::fmt_double(rep.eval.accuracy));
    textio::write_field(out, "precision",
                        rep.eval.precision_defined ? textio::fmt_double(rep.eval.precision)
                                                   : std::string("undefined"));
    textio::write_field(out, "recall", rep.eval.recall_defined
                                           ? textio::fmt_double(rep.eval.recall)
                                           : std::string("undefined"));
    textio::write_field(out, "f1", rep.eval.f1_defined ? textio::fmt_double(rep.eval.f1)
                                                       : std::string("undefined"));
    out << "\n";
    detail::write_phase(out, rep.feature);
    detail::write_phase(out, rep.training);
    detail::write_phase(out, rep.inference);
    if (!out) throw Error(Errc::io_failure, "failed writing " + path);
}

// Text table with one row per phase, matching the usual
// extraction/training/inference presentation of CPU timing comparisons.
inline std::string render_table(const BenchReport& rep) {
    std::ostringstream os;
    char line[160];
    os << "scheme " << scheme_name(rep.config.scheme) << ", classifier "
       << model_kind_name(rep.config.classifier) << ", " << rep.environment << "\n";
    std::snprintf(line, sizeof(line), "%-20s %12s %18s %12s %27s\n", "phase", "avg (s)",
                  "per-instance (s)", "total (s)", "min / median / max (s)");
    os << line;
    const auto row = [&](const PhaseTiming& pt) {
        std::snprintf(line, sizeof(line), "%-20s %12.6f %18.6f %12.6f %9.6f / %9.6f / %9.6f\n",
                      phase_name(pt.phase), pt.avg, pt.per_instance, pt.total, pt.min, pt.median,
                      pt.max);
        os << line;
    };
    row(rep.feature);
    row(rep.training);
    row(rep.inference);
    std::snprintf(line, sizeof(line), "accuracy %.4f over %zu test instances\n",
                  rep.eval.accuracy, rep.inference.n_instances);
    os << line;
    return os.str();
}

} // namespace texfuse

#endif
