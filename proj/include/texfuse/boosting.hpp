#ifndef TEXFUSE_BOOSTING_HPP
#define TEXFUSE_BOOSTING_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "texfuse/tree.hpp"

namespace texfuse {

struct BoostConfig {
    int rounds = 100;
    double learning_rate = 0.1;
    int max_depth = 3;
};

namespace detail {

inline double softplus(double x) {
    return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

} // namespace detail

struct BoostModel {
    BoostConfig config;
    double f0 = 0.0;
    std::vector<Tree> trees; // leaf values are raw Newton steps; shrinkage applies here

    double score(const double* x) const {
        double f = f0;
        for (const Tree& t : trees) f += config.learning_rate * t.predict_value(x);
        return f;
    }
    int predict(const double* x) const { return score(x) >= 0.0 ? 1 : 0; }
};

struct BoostResult {
    BoostModel model;
    // Mean train log-loss after initialization and after every round
    // (rounds + 1 entries). Nonincreasing up to rounding noise.
    std::vector<double> train_logloss;
};

inline BoostResult train_boosting(const double* X, std::size_t rows, std::size_t cols,
                                  const std::vector<int>& y, const BoostConfig& cfg) {
    BoostResult out;
    out.model.config = cfg;

    long ones = 0;
    for (int v : y) ones += v;
    const double n = static_cast<double>(rows);
    // Log-odds prior; the clip keeps single-class sets finite.
    double f0 = 0.0;
    if (ones == 0)
        f0 = -10.0;
    else if (ones == static_cast<long>(rows))
        f0 = 10.0;
    else
        f0 = std::log(static_cast<double>(ones) / (n - static_cast<double>(ones)));
    f0 = std::clamp(f0, -10.0, 10.0);
    out.model.f0 = f0;

    std::vector<double> F(rows, f0);
    const auto mean_logloss = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < rows; ++i)
            s += detail::softplus(y[i] == 1 ? -F[i] : F[i]);
        return s / n;
    };
    out.train_logloss.push_back(mean_logloss());

    // Sample order per feature is fixed for the whole fit.
    std::vector<std::vector<std::size_t>> presorted(cols);
    for (std::size_t f = 0; f < cols; ++f) {
        auto& ord = presorted[f];
        ord.resize(rows);
        std::iota(ord.begin(), ord.end(), std::size_t{0});
        std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) {
            const double va = X[a * cols + f], vb = X[b * cols + f];
            if (va != vb) return va < vb;
            return a < b;
        });
    }

    std::vector<double> residual(rows), hess(rows);
    RegTreeBuilder builder(X, cols, presorted);
    for (int round = 0; round < cfg.rounds; ++round) {
        for (std::size_t i = 0; i < rows; ++i) {
            const double p = detail::sigmoid(F[i]);
            residual[i] = static_cast<double>(y[i]) - p;
            hess[i] = p * (1.0 - p);
        }
        auto [tree, members] = builder.build(residual, cfg.max_depth);
        for (std::size_t nid = 0; nid < tree.nodes.size(); ++nid) {
            TreeNode& nd = tree.nodes[nid];
            if (nd.feature >= 0) continue;
            double rs = 0.0, hs = 0.0;
            for (std::size_t i : members[nid]) {
                rs += residual[i];
                hs += hess[i];
            }
            // One Newton step per leaf; the clip bounds steps on
            // near-saturated leaves where the curvature vanishes.
            nd.value = std::clamp(rs / (hs + 1e-12), -10.0, 10.0);
            for (std::size_t i : members[nid]) F[i] += cfg.learning_rate * nd.value;
        }
        out.model.trees.push_back(std::move(tree));
        out.train_logloss.push_back(mean_logloss());
    }
    return out;
}

} // namespace texfuse

#endif
