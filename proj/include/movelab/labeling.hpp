#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "movelab/rng.hpp"
#include "movelab/segmentation.hpp"
#include "movelab/synthgen.hpp"

namespace movelab {

// Simulated video annotation: boundaries snap to video frames and pick up
// human timing error that grows with movement speed.
struct VideoLabelParams {
    double fps = 30.0;
    std::array<double, 3> jitter_std = {0.04, 0.06, 0.12}; // seconds, by SpeedClass
    std::uint64_t seed = 0;

    void validate() const {
        if (!(fps > 0.0)) throw InvalidConfig("video labeling fps must be positive");
        for (const double j : jitter_std) {
            if (j < 0.0) throw InvalidConfig("video labeling jitter must be >= 0");
        }
    }
};

inline double interval_iou(std::size_t s1, std::size_t e1, std::size_t s2, std::size_t e2) {
    const double inter = static_cast<double>(
        std::max<long>(0, static_cast<long>(std::min(e1, e2)) - static_cast<long>(std::max(s1, s2))));
    const double uni = static_cast<double>((e1 - s1) + (e2 - s2)) - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

// Each detected segment inherits the label of the truth segment with maximal
// temporal IoU when that IoU exceeds the threshold; unmatched segments are
// dropped. Boundaries stay the detected ones.
inline std::vector<Segment> trajectory_labels(const std::vector<Segment>& detected,
                                              const std::vector<Segment>& truth,
                                              double iou_threshold = 0.5) {
    std::vector<Segment> out;
    out.reserve(detected.size());
    for (const Segment& d : detected) {
        double best = 0.0;
        const Segment* match = nullptr;
        for (const Segment& t : truth) {
            const double iou = interval_iou(d.start, d.end, t.start, t.end);
            if (iou > best) { // ties keep the earlier truth segment
                best = iou;
                match = &t;
            }
        }
        if (match != nullptr && best > iou_threshold && match->label) {
            Segment s = d;
            s.label = match->label;
            s.provenance = Provenance::trajectory;
            out.push_back(s);
        }
    }
    return out;
}

// Perturbs every truth boundary with seeded Gaussian timing error, snaps it
// to the video frame grid and back to the capture grid, then repairs ordering
// so each segment keeps at least 2 frames. Labels are never permuted.
inline std::vector<Segment> video_labels(const std::vector<Segment>& truth,
                                         const VideoLabelParams& params, SpeedClass speed,
                                         double sample_rate, std::size_t n_frames) {
    params.validate();
    if (truth.empty()) return {};
    Rand rng(params.seed);
    const double jitter = params.jitter_std[static_cast<std::size_t>(speed_index(speed))];

    const std::size_t m = truth.size();
    std::vector<long> bounds(2 * m);
    for (std::size_t i = 0; i < m; ++i) {
        for (int side = 0; side < 2; ++side) {
            const std::size_t frame = side == 0 ? truth[i].start : truth[i].end;
            const double t = static_cast<double>(frame) / sample_rate;
            const double eps = rng.normal(0.0, jitter);
            const double video_t = std::round((t + eps) * params.fps) / params.fps;
            bounds[2 * i + static_cast<std::size_t>(side)] = std::lround(video_t * sample_rate);
        }
    }

    // re-sort repairs local inversions without touching the label pairing
    std::sort(bounds.begin(), bounds.end());

    // forward pass: clamp into range and enforce >=2 frames per segment with
    // strictly increasing boundaries
    const long n = static_cast<long>(n_frames);
    for (std::size_t j = 0; j < bounds.size(); ++j) {
        const long gap = (j % 2 == 1) ? 2 : (j == 0 ? 0 : 1);
        const long floor_j = j == 0 ? 0 : bounds[j - 1] + gap;
        bounds[j] = std::max(bounds[j], floor_j);
    }
    // backward pass keeps everything inside the recording
    if (bounds.back() > n) {
        bounds.back() = n;
        for (std::size_t j = bounds.size() - 1; j > 0; --j) {
            const long gap = (j % 2 == 1) ? 2 : 1;
            if (bounds[j - 1] > bounds[j] - gap) bounds[j - 1] = bounds[j] - gap;
        }
        if (bounds[0] < 0) throw Error("video_labels: recording too short for segment count");
    }

    std::vector<Segment> out;
    out.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        Segment s;
        s.start = static_cast<std::size_t>(bounds[2 * i]);
        s.end = static_cast<std::size_t>(bounds[2 * i + 1]);
        s.label = truth[i].label;
        s.provenance = Provenance::video;
        out.push_back(s);
    }
    return out;
}

} // namespace movelab
