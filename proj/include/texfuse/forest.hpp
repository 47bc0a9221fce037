#ifndef TEXFUSE_FOREST_HPP
#define TEXFUSE_FOREST_HPP

#include <cstddef>
#include <numeric>
#include <vector>

#include "texfuse/parallel.hpp"
#include "texfuse/rng.hpp"
#include "texfuse/tree.hpp"

namespace texfuse {

struct ForestConfig {
    int n_trees = 100;
    int max_depth = 0;      // 0 = grow to purity
    int feature_subset = 0; // 0 = floor(sqrt(d))
    bool extra_trees = false;
};

struct ForestModel {
    ForestConfig config;
    std::vector<Tree> trees;

    // Majority vote in tree order; exact ties go to class 0.
    int predict(const double* x) const {
        long ones = 0;
        for (const Tree& t : trees) ones += t.predict_label(x);
        return 2 * ones > static_cast<long>(trees.size()) ? 1 : 0;
    }
};

// Each tree consumes its own seeded stream keyed by (seed, tree index), so the
// model is byte-identical no matter how many worker threads run the loop.
inline ForestModel train_forest(const double* X, std::size_t rows, std::size_t cols,
                                const std::vector<int>& y, const ForestConfig& cfg,
                                std::uint64_t seed, int threads = 0) {
    ForestModel model;
    model.config = cfg;
    model.trees.resize(static_cast<std::size_t>(cfg.n_trees));
    parallel_for(static_cast<std::size_t>(cfg.n_trees), resolve_threads(threads), [&](std::size_t ti) {
        Rng rng = Rng::stream(seed, ti);
        std::vector<std::size_t> samples(rows);
        if (cfg.extra_trees) {
            std::iota(samples.begin(), samples.end(), std::size_t{0});
        } else {
            for (std::size_t i = 0; i < rows; ++i) samples[i] = rng.uniform_index(rows);
        }
        ClassTreeConfig tc;
        tc.max_depth = cfg.max_depth;
        tc.feature_subset = cfg.feature_subset;
        tc.random_thresholds = cfg.extra_trees;
        ClassTreeBuilder builder(X, cols, y, tc, rng);
        model.trees[ti] = builder.build(std::move(samples));
    });
    return model;
}

} // namespace texfuse

#endif
