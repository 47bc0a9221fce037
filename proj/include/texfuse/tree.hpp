#ifndef TEXFUSE_TREE_HPP
#define TEXFUSE_TREE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "texfuse/error.hpp"
#include "texfuse/rng.hpp"

namespace texfuse {

// One node layout shared by classification and regression trees. feature -1
// marks a leaf; split rule is x[feature] < threshold goes left.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int label = 0;      // classification leaves
    double value = 0.0; // regression leaves
};

struct Tree {
    std::vector<TreeNode> nodes;

    int leaf_for(const double* x) const {
        int n = 0;
        while (nodes[static_cast<std::size_t>(n)].feature >= 0) {
            const TreeNode& nd = nodes[static_cast<std::size_t>(n)];
            n = x[nd.feature] < nd.threshold ? nd.left : nd.right;
        }
        return n;
    }
    int predict_label(const double* x) const { return nodes[static_cast<std::size_t>(leaf_for(x))].label; }
    double predict_value(const double* x) const { return nodes[static_cast<std::size_t>(leaf_for(x))].value; }
};

namespace detail {

// Split quality for binary labels. Maximizing
//   S = (l0^2 + l1^2)/nL + (r0^2 + r1^2)/nR
// over candidate splits is algebraically equivalent to maximizing Gini gain;
// the counts are exact integers, so equal-quality splits compare equal
// bit-for-bit regardless of scan order.
inline double gini_score(long l0, long l1, long r0, long r1) {
    const double nl = static_cast<double>(l0 + l1);
    const double nr = static_cast<double>(r0 + r1);
    const double a = static_cast<double>(l0) * l0 + static_cast<double>(l1) * l1;
    const double b = static_cast<double>(r0) * r0 + static_cast<double>(r1) * r1;
    return a / nl + b / nr;
}

struct SplitChoice {
    bool valid = false;
    int feature = -1;
    double threshold = 0.0;
    double score = -std::numeric_limits<double>::infinity();
};

// Ties resolve to the lowest feature index, then the lowest threshold, so
// results never depend on evaluation order.
inline bool improves(const SplitChoice& cand, const SplitChoice& best) {
    if (!cand.valid) return false;
    if (!best.valid) return true;
    if (cand.score != best.score) return cand.score > best.score;
    if (cand.feature != best.feature) return cand.feature < best.feature;
    return cand.threshold < best.threshold;
}

} // namespace detail

struct ClassTreeConfig {
    int max_depth = 0;      // 0 = grow to purity
    int feature_subset = 0; // candidate features per node; 0 = floor(sqrt(d)), >=d = all
    bool random_thresholds = false; // extra-trees style: one uniform threshold per candidate
};

class ClassTreeBuilder {
public:
    ClassTreeBuilder(const double* X, std::size_t cols, const std::vector<int>& y,
                     const ClassTreeConfig& cfg, Rng& rng)
        : X_(X), cols_(cols), y_(y), cfg_(cfg), rng_(rng) {}

    Tree build(std::vector<std::size_t> samples) {
        Tree t;
        grow(t, std::move(samples), 0);
        return t;
    }

private:
    double at(std::size_t row, int f) const { return X_[row * cols_ + f]; }

    int subset_size() const {
        if (cfg_.feature_subset > 0)
            return std::min<int>(cfg_.feature_subset, static_cast<int>(cols_));
        return std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(cols_)))));
    }

    int grow(Tree& t, std::vector<std::size_t> samples, int depth) {
        long c0 = 0, c1 = 0;
        for (std::size_t i : samples) (y_[i] == 0 ? c0 : c1)++;

        const int node_id = static_cast<int>(t.nodes.size());
        t.nodes.emplace_back();
        t.nodes[static_cast<std::size_t>(node_id)].label = c1 > c0 ? 1 : 0;

        const bool depth_ok = cfg_.max_depth == 0 || depth < cfg_.max_depth;
        if (c0 == 0 || c1 == 0 || !depth_ok || samples.size() < 2) return node_id;

        const detail::SplitChoice best = find_split(samples, c0, c1);
        if (!best.valid) return node_id;

        std::vector<std::size_t> left, right;
        for (std::size_t i : samples) (at(i, best.feature) < best.threshold ? left : right).push_back(i);
        samples.clear();
        samples.shrink_to_fit();

        t.nodes[static_cast<std::size_t>(node_id)].feature = best.feature;
        t.nodes[static_cast<std::size_t>(node_id)].threshold = best.threshold;
        const int l = grow(t, std::move(left), depth + 1);
        t.nodes[static_cast<std::size_t>(node_id)].left = l;
        const int r = grow(t, std::move(right), depth + 1);
        t.nodes[static_cast<std::size_t>(node_id)].right = r;
        return node_id;
    }

    detail::SplitChoice find_split(const std::vector<std::size_t>& samples, long c0, long c1) {
        const int k = subset_size();
        std::vector<std::size_t> feats;
        if (k >= static_cast<int>(cols_)) {
            feats.resize(cols_);
            for (std::size_t f = 0; f < cols_; ++f) feats[f] = f;
        } else {
            feats = rng_.sample_indices(static_cast<std::size_t>(k), cols_);
        }

        detail::SplitChoice best;
        std::vector<std::pair<double, int>> vals; // (value, label)
        for (std::size_t f : feats) {
            if (cfg_.random_thresholds) {
                double lo = at(samples[0], static_cast<int>(f)), hi = lo;
                for (std::size_t i : samples) {
                    const double v = at(i, static_cast<int>(f));
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
                if (!(hi > lo)) continue; // constant feature: no draw, no split
                const double thr = rng_.uniform(lo, hi);
                if (!(thr > lo)) continue; // rounding collapsed the interval
                long l0 = 0, l1 = 0;
                for (std::size_t i : samples)
                    if (at(i, static_cast<int>(f)) < thr) (y_[i] == 0 ? l0 : l1)++;
                if (l0 + l1 == 0 || l0 + l1 == static_cast<long>(samples.size())) continue;
                detail::SplitChoice cand{true, static_cast<int>(f), thr,
                                         detail::gini_score(l0, l1, c0 - l0, c1 - l1)};
                if (detail::improves(cand, best)) best = cand;
            } else {
                vals.clear();
                vals.reserve(samples.size());
                for (std::size_t i : samples) vals.emplace_back(at(i, static_cast<int>(f)), y_[i]);
                std::sort(vals.begin(), vals.end(),
                          [](const auto& a, const auto& b) { return a.first < b.first; });
                long l0 = 0, l1 = 0;
                for (std::size_t i = 1; i < vals.size(); ++i) {
                    (vals[i - 1].second == 0 ? l0 : l1)++;
                    const double a = vals[i - 1].first, b = vals[i].first;
                    if (!(b > a)) continue;
                    const double thr = 0.5 * (a + b);
                    // The midpoint of adjacent representable values can
                    // collapse onto an endpoint; only thresholds that really
                    // separate the two sides are admissible.
                    if (!(thr > a && thr <= b)) continue;
                    detail::SplitChoice cand{true, static_cast<int>(f), thr,
                                             detail::gini_score(l0, l1, c0 - l0, c1 - l1)};
                    if (detail::improves(cand, best)) best = cand;
                }
            }
        }
        return best;
    }

    const double* X_;
    std::size_t cols_;
    const std::vector<int>& y_;
    ClassTreeConfig cfg_;
    Rng& rng_;
};

// Least-squares regression tree on residuals, grown breadth-first with
// per-feature presorted sample orders so each level costs one pass over the
// data per feature. Leaf values are filled in by the caller (they depend on
// the boosting loss), via the returned leaf sample lists.
class RegTreeBuilder {
public:
    // presorted[f] lists all sample indices ascending by feature f.
    RegTreeBuilder(const double* X, std::size_t cols,
                   const std::vector<std::vector<std::size_t>>& presorted)
        : X_(X), cols_(cols), presorted_(presorted) {}

    // Returns the tree plus, for each node id, the samples that reached it
    // (leaves only; inner nodes get empty lists to keep indexing simple).
    std::pair<Tree, std::vector<std::vector<std::size_t>>>
    build(const std::vector<double>& residual, int max_depth) {
        const std::size_t n = residual.size();
        Tree t;
        t.nodes.emplace_back();
        std::vector<int> node_of(n, 0);

        struct NodeAgg {
            double sum = 0.0;
            long count = 0;
            detail::SplitChoice best;
        };

        std::vector<int> frontier{0};
        for (int depth = 0; depth < max_depth && !frontier.empty(); ++depth) {
            std::vector<NodeAgg> agg(t.nodes.size());
            std::vector<char> active(t.nodes.size(), 0);
            for (int fr : frontier) active[static_cast<std::size_t>(fr)] = 1;
            for (std::size_t i = 0; i < n; ++i) {
                NodeAgg& a = agg[static_cast<std::size_t>(node_of[i])];
                a.sum += residual[i];
                a.count += 1;
            }

            // One sweep per feature; every active node consumes the samples
            // it owns in ascending feature order.
            struct Scan {
                double left_sum = 0.0;
                long left_count = 0;
                double prev = 0.0;
                bool started = false;
            };
            std::vector<Scan> scan(t.nodes.size());
            for (std::size_t f = 0; f < cols_; ++f) {
                for (auto& s : scan) s = Scan{};
                for (std::size_t i : presorted_[f]) {
                    const int nd = node_of[i];
                    if (!active[static_cast<std::size_t>(nd)]) continue;
                    Scan& s = scan[static_cast<std::size_t>(nd)];
                    const double v = X_[i * cols_ + f];
                    if (s.started && s.left_count > 0 && v > s.prev) {
                        const double thr = 0.5 * (s.prev + v);
                        if (thr > s.prev && thr <= v &&
                            s.left_count < agg[static_cast<std::size_t>(nd)].count) {
                            const NodeAgg& a = agg[static_cast<std::size_t>(nd)];
                            const double rs = a.sum - s.left_sum;
                            const double rc = static_cast<double>(a.count - s.left_count);
                            const double score = s.left_sum * s.left_sum / s.left_count +
                                                 rs * rs / rc;
                            detail::SplitChoice cand{true, static_cast<int>(f), thr, score};
                            if (detail::improves(cand, agg[static_cast<std::size_t>(nd)].best))
                                agg[static_cast<std::size_t>(nd)].best = cand;
                        }
                    }
                    s.left_sum += residual[i];
                    s.left_count += 1;
                    s.prev = v;
                    s.started = true;
                }
            }

            std::vector<int> next;
            for (int nd : frontier) {
                const detail::SplitChoice& best = agg[static_cast<std::size_t>(nd)].best;
                if (!best.valid) continue;
                const int left = static_cast<int>(t.nodes.size());
                t.nodes.emplace_back();
                t.nodes.emplace_back();
                // take the reference only after the inserts, which may move the pool
                TreeNode& node = t.nodes[static_cast<std::size_t>(nd)];
                node.feature = best.feature;
                node.threshold = best.threshold;
                node.left = left;
                node.right = left + 1;
                next.push_back(left);
                next.push_back(left + 1);
            }
            if (next.empty()) break;
            for (std::size_t i = 0; i < n; ++i) {
                const TreeNode& node = t.nodes[static_cast<std::size_t>(node_of[i])];
                if (node.feature >= 0)
                    node_of[i] = X_[i * cols_ + node.feature] < node.threshold ? node.left
                                                                               : node.right;
            }
            frontier = std::move(next);
        }

        std::vector<std::vector<std::size_t>> members(t.nodes.size());
        for (std::size_t i = 0; i < n; ++i)
            members[static_cast<std::size_t>(node_of[i])].push_back(i);
        return {std::move(t), std::move(members)};
    }

private:
    const double* X_;
    std::size_t cols_;
    const std::vector<std::vector<std::size_t>>& presorted_;
};

} // namespace texfuse

#endif
