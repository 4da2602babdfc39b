#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "movelab/errors.hpp"
#include "movelab/kinematics.hpp"
#include "movelab/labels.hpp"

namespace movelab {

enum class Provenance { truth, trajectory, video };

inline std::string_view to_string(Provenance p) {
    switch (p) {
        case Provenance::truth: return "truth";
        case Provenance::trajectory: return "trajectory";
        default: return "video";
    }
}

inline Provenance provenance_from_string(std::string_view s) {
    if (s == "truth") return Provenance::truth;
    if (s == "trajectory") return Provenance::trajectory;
    if (s == "video") return Provenance::video;
    throw ParseError("unknown provenance '" + std::string(s) + "'");
}

// Half-open frame range [start, end) into a trajectory. bell_nrmse is
// transient segmentation metadata and is not serialized.
struct Segment {
    std::size_t start = 0;
    std::size_t end = 0;
    std::optional<LabelClass> label;
    Provenance provenance = Provenance::truth;
    double bell_nrmse = -1.0;
    bool bell = false;

    std::size_t length() const { return end - start; }

    bool operator==(const Segment& o) const {
        return start == o.start && end == o.end && label == o.label && provenance == o.provenance;
    }
};

struct SegmentationParams {
    double sigma_s = 0.025;       // speed smoothing, seconds
    double v_min = 0.05;          // activity threshold, m/s
    double min_duration = 0.15;   // seconds
    double prominence = 0.5;      // fraction in (0,1)
    double bell_nrmse_max = 0.35; // fraction in (0,1]

    void validate() const {
        if (!(sigma_s > 0.0) || !(v_min > 0.0) || !(min_duration > 0.0) || !(prominence > 0.0) ||
            !(bell_nrmse_max > 0.0)) {
            throw InvalidConfig("segmentation params must all be positive");
        }
        if (!(prominence < 1.0)) throw InvalidConfig("segmentation prominence must be < 1");
        if (!(bell_nrmse_max <= 1.0)) throw InvalidConfig("segmentation bell_nrmse_max must be <= 1");
    }
};

// Minimum-jerk speed template g(tau) = 30 tau^2 (1-tau)^2; peak g(1/2) = 1.875.
inline double bell_template(double tau) {
    const double a = tau * (1.0 - tau);
    return 30.0 * a * a;
}

// Rising half-maximum of the template: g(tau) = 1.875/2 at this tau.
inline constexpr double kBellHalfMaxTau = 0.22936706131736295;
// Distance from half-max to profile start, as a multiple of the half-max to
// peak distance. Used to extrapolate segment edges back to zero speed.
inline constexpr double kBellEdgeRatio = kBellHalfMaxTau / (0.5 - kBellHalfMaxTau);

struct BellFit {
    double amplitude = 0.0;
    double nrmse = 0.0;
};

// Least-squares fit of the minimum-jerk speed template to a speed segment.
inline BellFit bell_fit(const std::vector<double>& s) {
    const std::size_t n = s.size();
    if (n < 4) throw TooShort("bell_fit: segment length < 4");
    const double mx = *std::max_element(s.begin(), s.end());
    if (!(mx > 0.0)) throw ZeroSignal("bell_fit: all-zero speed segment");
    double sg = 0.0;
    double gg = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double g = bell_template(static_cast<double>(i) / static_cast<double>(n - 1));
        sg += s[i] * g;
        gg += g * g;
    }
    const double a = sg / gg;
    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double g = bell_template(static_cast<double>(i) / static_cast<double>(n - 1));
        const double r = s[i] - a * g;
        sq += r * r;
    }
    return {a, std::sqrt(sq / static_cast<double>(n)) / mx};
}

// Boundary candidates on a smoothed speed profile: prominence-filtered local
// minima (deepest first, greedily, measured against the peaks toward the
// already accepted neighbors) plus up/down crossings of v_min.
inline std::vector<std::size_t> detect_boundaries(const std::vector<double>& speed,
                                                  const SegmentationParams& params) {
    params.validate();
    const std::size_t n = speed.size();
    if (n < 3) return {};

    // local minima, plateau ties toward the earlier index
    std::vector<std::size_t> candidates;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (speed[i] < speed[i - 1] && speed[i] <= speed[i + 1]) candidates.push_back(i);
    }
    std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
        if (speed[a] != speed[b]) return speed[a] < speed[b];
        return a < b;
    });

    std::vector<std::size_t> accepted; // kept sorted
    for (const std::size_t m : candidates) {
        const auto it = std::lower_bound(accepted.begin(), accepted.end(), m);
        const std::size_t left = it == accepted.begin() ? 0 : *(it - 1);
        const std::size_t right = it == accepted.end() ? n - 1 : *it;
        double left_peak = 0.0;
        for (std::size_t i = left; i < m; ++i) left_peak = std::max(left_peak, speed[i]);
        double right_peak = 0.0;
        for (std::size_t i = m + 1; i <= right; ++i) right_peak = std::max(right_peak, speed[i]);
        if (speed[m] < (1.0 - params.prominence) * std::min(left_peak, right_peak)) {
            accepted.insert(std::lower_bound(accepted.begin(), accepted.end(), m), m);
        }
    }

    for (std::size_t i = 1; i < n; ++i) {
        const bool rising = speed[i - 1] < params.v_min && speed[i] >= params.v_min;
        const bool falling = speed[i - 1] >= params.v_min && speed[i] < params.v_min;
        if (rising || falling) {
            accepted.insert(std::lower_bound(accepted.begin(), accepted.end(), i), i);
        }
    }
    accepted.erase(std::unique(accepted.begin(), accepted.end()), accepted.end());
    return accepted;
}

namespace detail {

// Anchors an edge on the bell geometry: locate the half-maximum crossing and
// the adjacent peak, then extrapolate the template to its zero. Returns the
// fractional frame of the estimated true edge, or a negative value when the
// shape gives no usable anchor.
inline double bell_edge_estimate(const std::vector<double>& speed, std::size_t seg_start,
                                 std::size_t seg_end, std::size_t limit, bool rising) {
    const std::size_t n = speed.size();
    if (seg_end - seg_start < 4) return -1.0;
    double segmax = 0.0;
    for (std::size_t i = seg_start; i < seg_end; ++i) segmax = std::max(segmax, speed[i]);
    if (!(segmax > 0.0)) return -1.0;
    const double coarse = 0.5 * segmax;

    if (rising) {
        std::size_t q = seg_start;
        while (q < seg_end && speed[q] < coarse) ++q;
        if (q >= seg_end) return -1.0;
        std::size_t p = q; // first local max on this slope
        while (p + 1 < seg_end && speed[p + 1] > speed[p]) ++p;
        const double h = 0.5 * speed[p];
        std::size_t lo = std::min(limit, seg_start);
        std::size_t q2 = p;
        while (q2 > lo && speed[q2 - 1] >= h) --q2;
        if (q2 == lo || speed[q2] <= speed[q2 - 1]) return -1.0;
        const double t_h =
            static_cast<double>(q2 - 1) + (h - speed[q2 - 1]) / (speed[q2] - speed[q2 - 1]);
        return t_h - kBellEdgeRatio * (static_cast<double>(p) - t_h);
    }

    std::size_t q = seg_end - 1;
    while (q > seg_start && speed[q] < coarse) --q;
    if (q == seg_start && speed[q] < coarse) return -1.0;
    std::size_t p = q; // last local max on this slope
    while (p > seg_start && speed[p - 1] > speed[p]) --p;
    const double h = 0.5 * speed[p];
    const std::size_t hi = std::max(limit, seg_end); // exclusive
    std::size_t q2 = p;
    while (q2 + 1 < hi && q2 + 1 < n && speed[q2 + 1] >= h) ++q2;
    if (q2 + 1 >= std::min(hi, n) || speed[q2] <= speed[q2 + 1]) return -1.0;
    const double t_h = static_cast<double>(q2) + (speed[q2] - h) / (speed[q2] - speed[q2 + 1]);
    return t_h + kBellEdgeRatio * (t_h - static_cast<double>(p));
}

} // namespace detail

// Decompose a trajectory into movement units with bell-shaped hand speed.
// Pipeline: smoothed hand speed -> boundary candidates -> short-segment merge
// -> sub-threshold drop -> bell-anchored edge refinement -> bell annotation.
inline std::vector<Segment> segment(const Trajectory& traj, const SegmentationParams& params) {
    params.validate();
    traj.validate();
    const std::vector<double> speed = speed_profile(traj, Marker::hand, params.sigma_s);
    const std::size_t n = speed.size();
    const std::vector<std::size_t> bounds = detect_boundaries(speed, params);

    struct Cand {
        std::size_t start, end;
    };
    std::vector<Cand> cands;
    std::size_t prev = 0;
    for (const std::size_t b : bounds) {
        if (b > prev && b < n) {
            cands.push_back({prev, b});
            prev = b;
        }
    }
    if (prev < n) cands.push_back({prev, n});

    // merge candidates shorter than min_duration into the neighbor across the
    // lower-speed shared boundary; shortest first, ties toward earlier
    const std::size_t min_frames =
        static_cast<std::size_t>(std::lround(params.min_duration * traj.sample_rate));
    while (cands.size() > 1) {
        std::size_t pick = cands.size();
        std::size_t pick_len = 0;
        for (std::size_t i = 0; i < cands.size(); ++i) {
            const std::size_t len = cands[i].end - cands[i].start;
            if (len < min_frames && (pick == cands.size() || len < pick_len)) {
                pick = i;
                pick_len = len;
            }
        }
        if (pick == cands.size()) break;
        bool into_left;
        if (pick == 0) {
            into_left = false;
        } else if (pick + 1 == cands.size()) {
            into_left = true;
        } else {
            into_left = speed[cands[pick].start] <= speed[cands[pick].end];
        }
        if (into_left) {
            cands[pick - 1].end = cands[pick].end;
        } else {
            cands[pick + 1].start = cands[pick].start;
        }
        cands.erase(cands.begin() + static_cast<std::ptrdiff_t>(pick));
    }

    // drop candidates that never reach the activity threshold
    std::vector<Cand> active;
    for (const Cand& c : cands) {
        double peak = 0.0;
        for (std::size_t i = c.start; i < c.end; ++i) peak = std::max(peak, speed[i]);
        if (peak >= params.v_min) active.push_back(c);
    }

    // refine edges toward the bell template's zeros
    std::vector<Segment> out;
    out.reserve(active.size());
    for (std::size_t i = 0; i < active.size(); ++i) {
        const Cand& c = active[i];
        const std::size_t lo = i > 0 ? active[i - 1].end : 0;
        const std::size_t hi = i + 1 < active.size() ? active[i + 1].start : n;
        Segment s;
        s.provenance = Provenance::trajectory;
        s.start = c.start;
        s.end = c.end;
        const double t0 = detail::bell_edge_estimate(speed, c.start, c.end, lo, true);
        if (t0 >= 0.0) {
            const long r = std::lround(t0);
            s.start = static_cast<std::size_t>(std::clamp<long>(r, static_cast<long>(lo),
                                                                static_cast<long>(c.end) - 2));
        }
        const double t1 = detail::bell_edge_estimate(speed, c.start, c.end, hi, false);
        if (t1 >= 0.0) {
            const long r = std::lround(t1);
            s.end = static_cast<std::size_t>(std::clamp<long>(r, static_cast<long>(s.start) + 2,
                                                              static_cast<long>(hi)));
        }
        out.push_back(s);
    }

    // non-overlap guard; refinement almost never makes this bind
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (out[i].start < out[i - 1].end) {
            out[i].start = out[i - 1].end;
            if (out[i].start + 2 > out[i].end) out[i].end = std::min(n, out[i].start + 2);
        }
    }

    for (Segment& s : out) {
        const std::vector<double> slice(speed.begin() + static_cast<std::ptrdiff_t>(s.start),
                                        speed.begin() + static_cast<std::ptrdiff_t>(s.end));
        const BellFit fit = bell_fit(slice);
        s.bell_nrmse = fit.nrmse;
        s.bell = fit.nrmse <= params.bell_nrmse_max;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Segment JSON-lines format: one object per line with fields start, end,
// label (name or null) and provenance. Round-trip is identity.

inline void write_segments(const std::filesystem::path& path, const std::vector<Segment>& segments) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    for (const Segment& s : segments) {
        nlohmann::json j;
        j["start"] = s.start;
        j["end"] = s.end;
        if (s.label) {
            j["label"] = std::string(to_string(*s.label));
        } else {
            j["label"] = nullptr;
        }
        j["provenance"] = std::string(to_string(s.provenance));
        out << j.dump() << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

inline std::vector<Segment> read_segments(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());
    std::vector<Segment> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string ctx = path.string() + ":" + std::to_string(lineno);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(ctx + ": " + e.what());
        }
        try {
            Segment s;
            s.start = j.at("start").get<std::size_t>();
            s.end = j.at("end").get<std::size_t>();
            if (!j.at("label").is_null()) s.label = label_from_string(j.at("label").get<std::string>());
            s.provenance = provenance_from_string(j.at("provenance").get<std::string>());
            if (s.start >= s.end) throw ParseError("segment start must be < end");
            out.push_back(s);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(ctx + ": " + e.what());
        } catch (const ParseError& e) {
            throw ParseError(ctx + ": " + e.what());
        }
    }
    return out;
}

} // namespace movelab
