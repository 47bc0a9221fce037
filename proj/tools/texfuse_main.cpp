// texfuse: batch pipeline for real/fake image classification from classical
// texture features (LBP / HOG / KAZE fused at the feature level).
//
// Subcommands: keyframes, features, train, eval, bench, pipeline.
// Exit codes: 0 success, 2 usage error, 3 data error, 4 internal error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "texfuse/bench.hpp"
#include "texfuse/error.hpp"
#include "texfuse/fuse.hpp"
#include "texfuse/image_io.hpp"
#include "texfuse/keyframe.hpp"
#include "texfuse/learn.hpp"
#include "texfuse/model.hpp"
#include "texfuse/textio.hpp"

namespace fs = std::filesystem;
using namespace texfuse;

namespace {

int exit_code_for(Errc c) {
    return c == Errc::invalid_argument ? 2 : 3;
}

const char* remediation_hint(Errc c) {
    switch (c) {
    case Errc::fingerprint_mismatch:
        return "hint: the features were extracted with different parameters than the model "
               "was trained on; re-extract with matching flags or retrain the model";
    case Errc::version_mismatch:
        return "hint: the file was written by a different format version; regenerate it "
               "with this build";
    default: return nullptr;
    }
}

// ---- shared flag blocks ---------------------------------------------------

struct FeatureFlags {
    std::string scheme = "hog+kaze";
    std::string lbp_preset = "p12r2";
    int lbp_points = 12;
    double lbp_radius = 2.0;
    int lbp_bands = 2;
    bool lbp_full_histogram = false;
    FuseParams params;

    CLI::Option* points_opt = nullptr;
    CLI::Option* radius_opt = nullptr;

    Scheme resolved_scheme() const { return scheme_from_name(scheme); }

    FuseParams resolve() const {
        FuseParams p = params;
        p.lbp = texfuse::lbp_preset(lbp_preset);
        if (points_opt && points_opt->count() > 0) p.lbp.P = lbp_points;
        if (radius_opt && radius_opt->count() > 0) p.lbp.R = lbp_radius;
        p.lbp.bands = lbp_bands;
        p.lbp.uniform = !lbp_full_histogram;
        p.validate();
        return p;
    }
};

void add_feature_flags(CLI::App* cmd, FeatureFlags& ff) {
    cmd->add_option("--scheme", ff.scheme, "Feature scheme")
        ->check(CLI::IsMember({"lbp", "hog", "kaze", "lbp+kaze", "hog+kaze"}))
        ->capture_default_str();
    cmd->add_option("--resize", ff.params.resize_to, "Square side images are resized to")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_flag("!--no-log-transform", ff.params.log_transform,
                  "Skip the logarithmic intensity transform");
    cmd->add_flag("--kaze-full-resolution", ff.params.kaze_full_resolution,
                  "Run KAZE on the pre-resize image instead of the resized one");

    cmd->add_option("--lbp-preset", ff.lbp_preset, "LBP parameter preset")
        ->check(CLI::IsMember({"p12r2", "p24r3"}))
        ->capture_default_str();
    ff.points_opt = cmd->add_option("--lbp-points", ff.lbp_points,
                                    "Circular neighbors P (overrides preset)");
    ff.radius_opt =
        cmd->add_option("--lbp-radius", ff.lbp_radius, "Sampling radius R (overrides preset)");
    cmd->add_option("--lbp-bands", ff.lbp_bands, "Horizontal bands per LBP histogram")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_flag("--lbp-full-histogram", ff.lbp_full_histogram,
                  "Use all 2^P bins instead of uniform-pattern bins");

    cmd->add_option("--hog-cell", ff.params.hog.cell_size, "HOG cell size in pixels")
        ->capture_default_str();
    cmd->add_option("--hog-block", ff.params.hog.block_size, "HOG block size in cells")
        ->capture_default_str();
    cmd->add_option("--hog-stride", ff.params.hog.block_stride, "HOG block stride in cells")
        ->capture_default_str();
    cmd->add_option("--hog-bins", ff.params.hog.bin_count, "HOG orientation bins")
        ->capture_default_str();
    cmd->add_flag("--hog-signed", ff.params.hog.signed_gradients,
                  "Bin orientations over 0..360 instead of 0..180");
    cmd->add_flag("--hog-sobel", ff.params.hog.use_sobel,
                  "Sobel gradient filter instead of central differences");

    cmd->add_option("--kaze-octaves", ff.params.kaze.octaves, "KAZE octaves")
        ->capture_default_str();
    cmd->add_option("--kaze-sublevels", ff.params.kaze.sublevels, "KAZE sublevels per octave")
        ->capture_default_str();
    cmd->add_option("--kaze-threshold", ff.params.kaze.detector_threshold,
                    "KAZE detector response threshold")
        ->capture_default_str();
    cmd->add_option("--kaze-contrast", ff.params.kaze.contrast_k,
                    "Fixed contrast factor k (<= 0 selects the 70th-percentile rule)")
        ->capture_default_str();
    cmd->add_option("--kaze-dims", ff.params.kaze.m, "KAZE block length m (multiple of 64)")
        ->capture_default_str();
    cmd->add_option("--kaze-base-sigma", ff.params.kaze.base_smoothing, "KAZE base scale")
        ->capture_default_str();
}

struct LearnFlags {
    std::string classifier = "svc";
    ForestConfig forest;
    BoostConfig boost;
    SvcConfig svc;
    std::string kernel = "rbf";
    double train_fraction = 0.8;
    bool no_stratify = false;

    TrainOptions options(std::uint64_t seed, int threads) const {
        TrainOptions o;
        o.kind = model_kind_from_name(classifier);
        o.forest = forest;
        o.boost = boost;
        o.svc = svc;
        o.svc.kernel = kernel == "linear" ? SvmKernel::linear : SvmKernel::rbf;
        o.seed = seed;
        o.threads = threads;
        return o;
    }

    SplitSpec split(std::uint64_t seed) const {
        SplitSpec s;
        s.train_fraction = train_fraction;
        s.stratified = !no_stratify;
        s.seed = seed;
        return s;
    }
};

void add_classifier_flags(CLI::App* cmd, LearnFlags& lf) {
    cmd->add_option("--classifier", lf.classifier, "Classifier kind")
        ->check(CLI::IsMember({"rf", "random-forest", "et", "extra-trees", "gb",
                               "gradient-boosting", "svc", "svm"}))
        ->capture_default_str();
    cmd->add_option("--trees", lf.forest.n_trees, "Trees per forest")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--max-depth", lf.forest.max_depth, "Forest depth cap (0 = to purity)")
        ->capture_default_str();
    cmd->add_option("--feature-subset", lf.forest.feature_subset,
                    "Candidate features per node (0 = floor(sqrt(d)))")
        ->capture_default_str();
    cmd->add_option("--rounds", lf.boost.rounds, "Boosting rounds")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--learning-rate", lf.boost.learning_rate, "Boosting shrinkage")
        ->capture_default_str();
    cmd->add_option("--gb-depth", lf.boost.max_depth, "Boosting tree depth")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--svc-c", lf.svc.C, "SVC box constraint C")->capture_default_str();
    cmd->add_option("--kernel", lf.kernel, "SVC kernel")
        ->check(CLI::IsMember({"rbf", "linear"}))
        ->capture_default_str();
    cmd->add_option("--gamma", lf.svc.gamma, "RBF gamma (<= 0 = 1/(d * mean feature variance))")
        ->capture_default_str();
    cmd->add_option("--tol", lf.svc.tol, "SVC KKT tolerance")->capture_default_str();
    cmd->add_flag("--standardize", lf.svc.standardize,
                  "Z-score features inside the SVC (fitted on the training split)");
    cmd->add_option("--max-pair-updates", lf.svc.max_pair_updates,
                    "SMO pair-update budget before giving up")
        ->capture_default_str();
}

void add_split_flags(CLI::App* cmd, LearnFlags& lf) {
    cmd->add_option("--train-fraction", lf.train_fraction, "Training share of the split")
        ->capture_default_str();
    cmd->add_flag("--no-stratify", lf.no_stratify, "Plain shuffle split instead of stratified");
}

void write_effective_config(const CLI::App& app, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(Errc::io_failure, "cannot write " + path.string());
    out << app.config_to_str(true, true);
}

// ---- keyframes ------------------------------------------------------------

struct KeyframeArgs {
    std::string frames_dir;
    std::string manifest;
    std::string out_dir;
    double fps = 30.0;
    KeyframePolicy policy;
    bool no_skip = false;
};

std::vector<fs::path> list_frame_images(const fs::path& dir) {
    if (!fs::is_directory(dir))
        throw Error(Errc::empty_class, "no frames found: '" + dir.string() + "' is not a directory");
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::string ext = e.path().extension().string();
        for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (ext == ".png" || ext == ".pgm") out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    if (out.empty())
        throw Error(Errc::empty_class, "no frames found under '" + dir.string() + "'");
    return out;
}

// Manifest lines: "<timestamp> <path>"; blank lines and '#' comments ignored.
void read_manifest(const fs::path& file, std::vector<double>& ts, std::vector<fs::path>& paths) {
    std::ifstream in(file);
    if (!in) throw Error(Errc::io_failure, "cannot open manifest " + file.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t a = line.find_first_not_of(" \t");
        if (a == std::string::npos || line[a] == '#') continue;
        const std::size_t sp = line.find_first_of(" \t", a);
        if (sp == std::string::npos)
            throw Error(Errc::malformed_file,
                        "manifest line " + std::to_string(lineno) + ": expected '<timestamp> <path>'");
        const double t = textio::parse_double(line.substr(a, sp - a));
        std::size_t b = line.find_first_not_of(" \t", sp);
        if (b == std::string::npos)
            throw Error(Errc::malformed_file,
                        "manifest line " + std::to_string(lineno) + ": missing path");
        ts.push_back(t);
        paths.push_back(fs::path(line.substr(b)));
    }
    if (ts.empty()) throw Error(Errc::empty_class, "no frames found in manifest " + file.string());
}

void run_keyframes(const CLI::App& app, KeyframeArgs& args) {
    args.policy.skip_enabled = !args.no_skip;
    args.policy.validate();

    std::vector<double> timestamps;
    std::vector<fs::path> frame_paths;
    if (!args.manifest.empty()) {
        read_manifest(args.manifest, timestamps, frame_paths);
    } else {
        if (!(args.fps > 0.0)) throw Error(Errc::invalid_argument, "--fps must be positive");
        frame_paths = list_frame_images(args.frames_dir);
        timestamps = uniform_timestamps(static_cast<int>(frame_paths.size()), args.fps);
    }

    const KeyframeResult res = select_keyframes(timestamps, args.policy, [&](int i) {
        try {
            return load_image(frame_paths[static_cast<std::size_t>(i)]);
        } catch (const Error& e) {
            throw Error(Errc::frame_load_failure,
                        frame_paths[static_cast<std::size_t>(i)].string() + ": " + e.what());
        }
    });

    fs::create_directories(args.out_dir);
    std::vector<std::string> names(res.log.size());
    for (std::size_t j = 0; j < res.kept_indices.size(); ++j) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "keyframe-%05d.pgm", res.kept_indices[j]);
        save_pgm(fs::path(args.out_dir) / buf, res.keyframes[j]);
        for (auto& d : res.log)
            if (d.index == res.kept_indices[j]) {
                names[static_cast<std::size_t>(&d - res.log.data())] = buf;
                break;
            }
    }

    std::ofstream log(fs::path(args.out_dir) / "selection-log.txt");
    if (!log) throw Error(Errc::io_failure, "cannot write selection log");
    textio::write_magic(log, "keyframes", 1);
    textio::write_field(log, "interval", textio::fmt_double(args.policy.interval));
    textio::write_field(log, "skip-head", std::to_string(args.policy.skip_head));
    textio::write_field(log, "skip-tail", std::to_string(args.policy.skip_tail));
    textio::write_field(log, "skip", args.policy.skip_enabled ? "1" : "0");
    textio::write_field(log, "dedup-threshold", textio::fmt_double(args.policy.dedup_threshold));
    textio::write_field(log, "frames", std::to_string(timestamps.size()));
    textio::write_field(log, "kept", std::to_string(res.kept_indices.size()));
    log << "\n";
    for (std::size_t j = 0; j < res.log.size(); ++j) {
        const KeyframeDecision& d = res.log[j];
        log << "frame " << d.index << " t " << textio::fmt_double(d.timestamp) << " similarity "
            << (d.has_similarity ? textio::fmt_double(d.similarity) : "-") << ' '
            << (d.kept ? "kept" : "dropped");
        if (d.kept) log << ' ' << names[j];
        log << "\n";
    }

    write_effective_config(app, fs::path(args.out_dir) / "run-config.ini");
    std::cout << "kept " << res.kept_indices.size() << " of " << timestamps.size()
              << " frames -> " << args.out_dir << "\n";
}

// ---- features ---------------------------------------------------------------

struct FeaturesArgs {
    std::string corpus;
    std::string out;
    int threads = 0;
};

void run_features(const CLI::App& app, const FeaturesArgs& args, const FeatureFlags& ff) {
    const FuseParams params = ff.resolve();
    const Scheme scheme = ff.resolved_scheme();
    PrepareSummary summary;
    const Dataset ds = prepare_dataset(args.corpus, scheme, params, args.threads, &summary);
    export_features(ds, args.out);
    write_effective_config(app, args.out + ".config");
    for (const auto& [path, why] : summary.skipped)
        std::cerr << "skipped " << path << ": " << why << "\n";
    std::cout << "rows " << ds.rows() << " cols " << ds.cols << " real " << summary.real_ok
              << " fake " << summary.fake_ok << " skipped " << summary.skipped.size()
              << "\nfeatures written to " << args.out << "\n";
}

// ---- train ------------------------------------------------------------------

struct TrainArgs {
    std::string features;
    std::string out;
    std::string split_test; // when set, hold out a test share and export it
    std::uint64_t seed = kDefaultSeed;
    int threads = 0;
};

void run_train(const CLI::App& app, const TrainArgs& args, const LearnFlags& lf) {
    Dataset ds = import_features(args.features);
    Dataset train_ds = std::move(ds);
    if (!args.split_test.empty()) {
        auto [tr, te] = train_test_split(train_ds, lf.split(args.seed));
        export_features(te, args.split_test);
        std::cout << "held out " << te.rows() << " rows -> " << args.split_test << "\n";
        train_ds = std::move(tr);
    }
    const TrainedModel model = train_model(train_ds, lf.options(args.seed, args.threads));
    save_model(model, args.out);
    write_effective_config(app, args.out + ".config");
    if (model.kind == ModelKind::svc && !model.svc.converged)
        std::cerr << "warning: SMO stopped at the pair-update budget; model flagged converged=0\n";
    std::cout << "trained " << model_kind_name(model.kind) << " on " << train_ds.rows()
              << " rows x " << train_ds.cols << " dims (scheme " << scheme_name(train_ds.scheme)
              << ", seed " << args.seed << ")\nmodel written to " << args.out << "\n";
}

// ---- eval ---------------------------------------------------------------------

struct EvalArgs {
    std::string model;
    std::string features;
    std::string out;
};

void print_eval(std::ostream& os, const EvalReport& r) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "n %zu  tp %ld tn %ld fp %ld fn %ld\n", r.n, r.tp, r.tn, r.fp,
                  r.fn);
    os << buf;
    std::snprintf(buf, sizeof(buf), "accuracy %.6f\n", r.accuracy);
    os << buf;
    const auto metric = [&](const char* name, double v, bool defined) {
        if (defined)
            std::snprintf(buf, sizeof(buf), "%s %.6f\n", name, v);
        else
            std::snprintf(buf, sizeof(buf), "%s undefined\n", name);
        os << buf;
    };
    metric("precision", r.precision, r.precision_defined);
    metric("recall", r.recall, r.recall_defined);
    metric("f1", r.f1, r.f1_defined);
}

void write_eval_file(const EvalReport& r, const TrainedModel& model, const EvalArgs& args) {
    std::ofstream out(args.out);
    if (!out) throw Error(Errc::io_failure, "cannot write " + args.out);
    textio::write_magic(out, "eval", 1);
    textio::write_field(out, "model", args.model);
    textio::write_field(out, "features", args.features);
    textio::write_field(out, "classifier", model_kind_name(model.kind));
    textio::write_field(out, "scheme", scheme_name(model.scheme));
    textio::write_field(out, "fingerprint", textio::fmt_hex64(model.fingerprint));
    textio::write_field(out, "n", std::to_string(r.n));
    textio::write_field(out, "tp", std::to_string(r.tp));
    textio::write_field(out, "tn", std::to_string(r.tn));
    textio::write_field(out, "fp", std::to_string(r.fp));
    textio::write_field(out, "fn", std::to_string(r.fn));
    textio::write_field(out, "accuracy", textio::fmt_double(r.accuracy));
    textio::write_field(out, "precision",
                        r.precision_defined ? textio::fmt_double(r.precision) : "undefined");
    textio::write_field(out, "recall",
                        r.recall_defined ? textio::fmt_double(r.recall) : "undefined");
    textio::write_field(out, "f1", r.f1_defined ? textio::fmt_double(r.f1) : "undefined");
}

void run_eval(const CLI::App& app, const EvalArgs& args) {
    const TrainedModel model = load_model(args.model);
    const Dataset ds = import_features(args.features);
    const EvalReport r = evaluate(model, ds);
    print_eval(std::cout, r);
    if (!args.out.empty()) {
        write_eval_file(r, model, args);
        write_effective_config(app, args.out + ".config");
    }
}

// ---- bench --------------------------------------------------------------------

struct BenchArgs {
    std::string corpus;
    std::string out = "bench-report.txt";
    int runs = 3;
    bool table = false;
    std::uint64_t seed = kDefaultSeed;
    int threads = 0;
};

void run_bench(const CLI::App& app, const BenchArgs& args, const FeatureFlags& ff,
               const LearnFlags& lf) {
    BenchConfig cfg;
    cfg.scheme = ff.resolved_scheme();
    cfg.classifier = model_kind_from_name(lf.classifier);
    cfg.n_runs = args.runs;
    cfg.features = ff.resolve();
    cfg.split = lf.split(args.seed);
    cfg.train = lf.options(args.seed, args.threads);
    cfg.train.kind = cfg.classifier;

    const BenchReport rep = bench_pipeline(args.corpus, cfg);
    write_bench_report(rep, args.out);
    write_effective_config(app, args.out + ".config");
    if (args.table)
        std::cout << render_table(rep);
    else
        std::cout << "benchmed " << scheme_name(cfg.scheme) << "/"
                  << model_kind_name(cfg.classifier) << ": accuracy " << rep.eval.accuracy
                  << ", report written to " << args.out << "\n";
}

// ---- pipeline -------------------------------------------------------------------

struct PipelineArgs {
    std::string corpus;
    std::string out_dir;
    std::uint64_t seed = kDefaultSeed;
    int threads = 0;
};

void run_pipeline(const CLI::App& app, const PipelineArgs& args, const FeatureFlags& ff,
                  const LearnFlags& lf) {
    const FuseParams params = ff.resolve();
    const Scheme scheme = ff.resolved_scheme();
    fs::create_directories(args.out_dir);
    const fs::path dir(args.out_dir);

    PrepareSummary summary;
    const Dataset ds = prepare_dataset(args.corpus, scheme, params, args.threads, &summary);
    export_features(ds, (dir / "features.txt").string());
    std::cout << "features: " << ds.rows() << " rows x " << ds.cols << " cols (skipped "
              << summary.skipped.size() << ")\n";

    auto [train_ds, test_ds] = train_test_split(ds, lf.split(args.seed));
    export_features(test_ds, (dir / "test-features.txt").string());

    const TrainedModel model = train_model(train_ds, lf.options(args.seed, args.threads));
    save_model(model, (dir / "model.txt").string());
    std::cout << "trained " << model_kind_name(model.kind) << " on " << train_ds.rows()
              << " rows (seed " << args.seed << ")\n";

    const EvalReport r = evaluate(model, test_ds);
    print_eval(std::cout, r);
    EvalArgs eargs;
    eargs.model = (dir / "model.txt").string();
    eargs.features = (dir / "test-features.txt").string();
    eargs.out = (dir / "eval.txt").string();
    write_eval_file(r, model, eargs);
    write_effective_config(app, dir / "run-config.ini");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"classical texture-feature pipeline for real/fake image classification"};
    app.set_version_flag("--version", "texfuse 1.0.0");
    app.set_config("--config", "", "Read options from an INI file (flags override)");
    app.require_subcommand(1);

    KeyframeArgs ka;
    CLI::App* kf = app.add_subcommand("keyframes", "Select keyframes from a frame sequence");
    auto* frames_opt = kf->add_option("--frames", ka.frames_dir, "Directory of frame images");
    auto* manifest_opt =
        kf->add_option("--manifest", ka.manifest, "File of '<timestamp> <path>' lines");
    frames_opt->excludes(manifest_opt);
    kf->add_option("--out", ka.out_dir, "Output directory")->required();
    kf->add_option("--fps", ka.fps, "Frame rate used with --frames")->capture_default_str();
    kf->add_option("--interval", ka.policy.interval, "Sampling interval in seconds")
        ->capture_default_str();
    kf->add_option("--skip-head", ka.policy.skip_head, "Frames skipped at the start")
        ->capture_default_str();
    kf->add_option("--skip-tail", ka.policy.skip_tail, "Frames skipped at the end")
        ->capture_default_str();
    kf->add_flag("--no-skip", ka.no_skip, "Disable head/tail skipping");
    kf->add_option("--dedup-threshold", ka.policy.dedup_threshold,
                   "Similarity threshold for dropping near-duplicates")
        ->capture_default_str();

    FeaturesArgs fa;
    FeatureFlags f_ff;
    CLI::App* fe = app.add_subcommand("features", "Extract fused feature vectors from a corpus");
    fe->add_option("--corpus", fa.corpus, "Corpus root containing real/ and fake/")->required();
    fe->add_option("--out", fa.out, "Feature file to write")->required();
    fe->add_option("--threads", fa.threads, "Worker threads (0 = all cores)")
        ->capture_default_str();
    add_feature_flags(fe, f_ff);

    TrainArgs ta;
    LearnFlags t_lf;
    CLI::App* tr = app.add_subcommand("train", "Train a classifier from a feature file");
    tr->add_option("--features", ta.features, "Feature file")->required();
    tr->add_option("--out", ta.out, "Model file to write")->required();
    tr->add_option("--split-test", ta.split_test,
                   "Hold out a test share before training and write it here");
    tr->add_option("--seed", ta.seed, "Random seed")->capture_default_str();
    tr->add_option("--threads", ta.threads, "Worker threads (0 = all cores)")
        ->capture_default_str();
    add_classifier_flags(tr, t_lf);
    add_split_flags(tr, t_lf);

    EvalArgs ea;
    CLI::App* ev = app.add_subcommand("eval", "Evaluate a model on a feature file");
    ev->add_option("--model", ea.model, "Model file")->required();
    ev->add_option("--features", ea.features, "Feature file")->required();
    ev->add_option("--out", ea.out, "Structured report file to write");

    BenchArgs ba;
    FeatureFlags b_ff;
    LearnFlags b_lf;
    CLI::App* be = app.add_subcommand("bench", "Time extraction, training, and inference");
    be->add_option("--corpus", ba.corpus, "Corpus root containing real/ and fake/")->required();
    be->add_option("--out", ba.out, "Report file to write")->capture_default_str();
    be->add_option("--runs", ba.runs, "Timed runs per phase")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    be->add_flag("--table", ba.table, "Print the phase table to stdout");
    be->add_option("--seed", ba.seed, "Random seed")->capture_default_str();
    be->add_option("--threads", ba.threads, "Worker threads (0 = all cores)")
        ->capture_default_str();
    add_feature_flags(be, b_ff);
    add_classifier_flags(be, b_lf);
    add_split_flags(be, b_lf);

    PipelineArgs pa;
    FeatureFlags p_ff;
    LearnFlags p_lf;
    CLI::App* pl = app.add_subcommand("pipeline", "Features, split, train, and eval in one run");
    pl->add_option("--corpus", pa.corpus, "Corpus root containing real/ and fake/")->required();
    pl->add_option("--out", pa.out_dir, "Output directory")->required();
    pl->add_option("--seed", pa.seed, "Random seed")->capture_default_str();
    pl->add_option("--threads", pa.threads, "Worker threads (0 = all cores)")
        ->capture_default_str();
    add_feature_flags(pl, p_ff);
    add_classifier_flags(pl, p_lf);
    add_split_flags(pl, p_lf);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help / --version
        app.exit(e);                                    // prints the usage message
        return 2;
    }

    try {
        if (*kf) {
            if (ka.frames_dir.empty() && ka.manifest.empty())
                throw Error(Errc::invalid_argument, "one of --frames or --manifest is required");
            run_keyframes(app, ka);
        } else if (*fe) {
            run_features(app, fa, f_ff);
        } else if (*tr) {
            run_train(app, ta, t_lf);
        } else if (*ev) {
            run_eval(app, ea);
        } else if (*be) {
            run_bench(app, ba, b_ff, b_lf);
        } else if (*pl) {
            run_pipeline(app, pa, p_ff, p_lf);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (const char* hint = remediation_hint(e.code())) std::cerr << hint << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
