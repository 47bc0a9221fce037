#ifndef TEXFUSE_KEYFRAME_HPP
#define TEXFUSE_KEYFRAME_HPP

#include <functional>
#include <utility>
#include <vector>

#include "texfuse/error.hpp"
#include "texfuse/image.hpp"

namespace texfuse {

struct KeyframePolicy {
    double interval = 0.5; // seconds between consecutive selections
    int skip_head = 10;    // frames dropped at the start
    int skip_tail = 10;    // frames dropped at the end
    bool skip_enabled = true;
    // A sampled frame survives dedup only when its difference from the last
    // kept frame exceeds this fraction of full scale.
    double dedup_threshold = 0.05;

    void validate() const {
        if (interval <= 0.0) throw Error(Errc::invalid_argument, "keyframe: interval must be positive");
        if (skip_head < 0 || skip_tail < 0)
            throw Error(Errc::invalid_argument, "keyframe: skip counts must be >= 0");
        if (dedup_threshold < 0.0 || dedup_threshold > 1.0)
            throw Error(Errc::invalid_argument, "keyframe: threshold must be in [0,1]");
    }
};

inline std::vector<double> uniform_timestamps(int frame_count, double fps) {
    if (fps <= 0.0) throw Error(Errc::invalid_argument, "keyframe: fps must be positive");
    std::vector<double> ts(static_cast<std::size_t>(std::max(frame_count, 0)));
    for (int i = 0; i < frame_count; ++i) ts[static_cast<std::size_t>(i)] = i / fps;
    return ts;
}

// Greedy interval sampling over timestamps: the first usable frame is always
// taken; afterwards the earliest frame at least `interval` past the previous
// selection is taken. Head/tail skips shrink the usable range first — a clip
// shorter than the two margins yields nothing.
inline std::vector<int> sample_frame_indices(const std::vector<double>& timestamps,
                                             const KeyframePolicy& policy) {
    policy.validate();
    const int n = static_cast<int>(timestamps.size());
    std::vector<int> out;
    const int first = policy.skip_enabled ? policy.skip_head : 0;
    const int last = n - 1 - (policy.skip_enabled ? policy.skip_tail : 0);
    if (first > last) return out;
    out.push_back(first);
    // Timestamps synthesized as frame/fps carry rounding on the order of an
    // ulp, which would push a frame sitting exactly on the grid to its
    // successor. A nanosecond of slack is far below any real frame period.
    constexpr double kGridSlack = 1e-9;
    double last_t = timestamps[static_cast<std::size_t>(first)];
    for (int i = first + 1; i <= last; ++i) {
        if (timestamps[static_cast<std::size_t>(i)] + kGridSlack >= last_t + policy.interval) {
            out.push_back(i);
            last_t = timestamps[static_cast<std::size_t>(i)];
        }
    }
    return out;
}

using FrameLoader = std::function<GrayImage(int)>;

struct KeyframeDecision {
    int index = 0;
    double timestamp = 0.0;
    double similarity = 0.0; // vs. the last kept frame; meaningless on the first sample
    bool has_similarity = false;
    bool kept = false;
};

struct KeyframeResult {
    std::vector<GrayImage> keyframes;
    std::vector<int> kept_indices;
    std::vector<KeyframeDecision> log; // one entry per sampled frame
};

// Sample, then deduplicate against the most recently *kept* frame, so a slow
// drift cannot push a long run of near-identical frames through. The first
// sample is always kept.
inline KeyframeResult select_keyframes(const std::vector<double>& timestamps,
                                       const KeyframePolicy& policy, const FrameLoader& load) {
    KeyframeResult res;
    const std::vector<int> sampled = sample_frame_indices(timestamps, policy);
    const GrayImage* last = nullptr;
    for (int idx : sampled) {
        GrayImage frame = load(idx);
        KeyframeDecision d;
        d.index = idx;
        d.timestamp = timestamps[static_cast<std::size_t>(idx)];
        if (last == nullptr) {
            d.kept = true;
        } else {
            d.similarity = frame_similarity(*last, frame);
            d.has_similarity = true;
            d.kept = d.similarity > policy.dedup_threshold;
        }
        if (d.kept) {
            res.keyframes.push_back(std::move(frame));
            res.kept_indices.push_back(idx);
            last = &res.keyframes.back();
        }
        res.log.push_back(d);
    }
    return res;
}

} // namespace texfuse

#endif
