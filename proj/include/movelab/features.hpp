#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "movelab/errors.hpp"
#include "movelab/kinematics.hpp"
#include "movelab/labels.hpp"
#include "movelab/segmentation.hpp"

namespace movelab {

// Channel layout (fixed order, D = 17 when all groups are enabled):
//   0-2   hand position        3-5   elbow position      6-8  shoulder position
//   9-11  hand velocity        12-14 forearm direction (unit hand-elbow)
//   15    elbow angle          16    shoulder angle (to the back centroid)
struct FeatureConfig {
    std::size_t resample_length = 50;
    bool positions = true;
    bool velocity = true;
    bool orientation = true;
    bool elbow_angle = true;
    bool shoulder_angle = true;

    std::size_t dims() const {
        return (positions ? 9u : 0u) + (velocity ? 3u : 0u) + (orientation ? 3u : 0u) +
               (elbow_angle ? 1u : 0u) + (shoulder_angle ? 1u : 0u);
    }
    void validate() const {
        if (resample_length < 2) throw InvalidConfig("feature resample_length must be >= 2");
        if (dims() == 0) throw InvalidConfig("feature config selects no channels");
    }
};

// L x D matrix, row-major (time-major).
struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;
    std::optional<LabelClass> label;

    double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

// Per-frame channels over the segment, then each channel resampled to L.
// The trajectory must already be in the back frame.
inline FeatureMatrix extract_features(const Trajectory& traj, const Segment& seg,
                                      const FeatureConfig& cfg) {
    cfg.validate();
    if (seg.end > traj.frames.size() || seg.start >= seg.end) {
        throw DegenerateSegment("segment out of trajectory range");
    }
    const std::size_t n = seg.length();
    if (n < 2) throw DegenerateSegment("segment has fewer than 2 frames");
    const double dt = 1.0 / traj.sample_rate;
    const std::size_t D = cfg.dims();

    std::vector<double> times(n);
    std::vector<std::vector<double>> raw(n);
    for (std::size_t i = 0; i < n; ++i) {
        const MarkerFrame& fr = traj.frames[seg.start + i];
        times[i] = fr.t;
        std::vector<double> row;
        row.reserve(D);
        if (cfg.positions) {
            for (const Vec3* p : {&fr.hand, &fr.elbow, &fr.shoulder}) {
                row.push_back(p->x);
                row.push_back(p->y);
                row.push_back(p->z);
            }
        }
        if (cfg.velocity) {
            Vec3 v;
            const auto& frames = traj.frames;
            const std::size_t g = seg.start + i;
            if (i == 0) {
                v = (frames[g + 1].hand - frames[g].hand) * (1.0 / dt);
            } else if (i == n - 1) {
                v = (frames[g].hand - frames[g - 1].hand) * (1.0 / dt);
            } else {
                v = (frames[g + 1].hand - frames[g - 1].hand) * (1.0 / (2.0 * dt));
            }
            row.push_back(v.x);
            row.push_back(v.y);
            row.push_back(v.z);
        }
        if (cfg.orientation) {
            const Vec3 f = normalized(fr.hand - fr.elbow);
            row.push_back(f.x);
            row.push_back(f.y);
            row.push_back(f.z);
        }
        if (cfg.elbow_angle) {
            row.push_back(joint_angle(fr.hand, fr.elbow, fr.shoulder));
        }
        if (cfg.shoulder_angle) {
            const Vec3 back_centroid = (fr.back[0] + fr.back[1] + fr.back[2]) * (1.0 / 3.0);
            row.push_back(joint_angle(fr.elbow, fr.shoulder, back_centroid));
        }
        raw[i] = std::move(row);
    }

    const auto resampled = resample(times, raw, cfg.resample_length);
    FeatureMatrix m;
    m.rows = cfg.resample_length;
    m.cols = D;
    m.values.resize(m.rows * m.cols);
    for (std::size_t r = 0; r < m.rows; ++r) {
        for (std::size_t c = 0; c < D; ++c) m.at(r, c) = resampled[r][c];
    }
    m.label = seg.label;
    return m;
}

// Per-channel min/max fitted on training data only.
struct Normalizer {
    std::vector<double> lo;
    std::vector<double> hi;
};

inline Normalizer fit_normalizer(const std::vector<FeatureMatrix>& train) {
    if (train.empty()) throw EmptyTrainingSet("fit_normalizer: no training matrices");
    const std::size_t D = train.front().cols;
    Normalizer n;
    n.lo.assign(D, std::numeric_limits<double>::infinity());
    n.hi.assign(D, -std::numeric_limits<double>::infinity());
    for (const FeatureMatrix& m : train) {
        if (m.cols != D) throw DimensionMismatch("fit_normalizer: inconsistent channel count");
        for (std::size_t r = 0; r < m.rows; ++r) {
            for (std::size_t c = 0; c < D; ++c) {
                n.lo[c] = std::min(n.lo[c], m.at(r, c));
                n.hi[c] = std::max(n.hi[c], m.at(r, c));
            }
        }
    }
    return n;
}

// v' = (v - lo)/(hi - lo) clamped to [0,1]; constant channels map to 0.5.
inline FeatureMatrix apply_normalizer(const Normalizer& n, const FeatureMatrix& m) {
    if (m.cols != n.lo.size()) throw DimensionMismatch("apply_normalizer: channel count mismatch");
    FeatureMatrix out = m;
    for (std::size_t c = 0; c < m.cols; ++c) {
        const double span = n.hi[c] - n.lo[c];
        for (std::size_t r = 0; r < m.rows; ++r) {
            out.at(r, c) = span > 0.0 ? std::clamp((m.at(r, c) - n.lo[c]) / span, 0.0, 1.0) : 0.5;
        }
    }
    return out;
}

// Row-major (time-major) flattening to an L*D vector.
inline std::vector<double> flatten(const FeatureMatrix& m) { return m.values; }

inline FeatureMatrix unflatten(const std::vector<double>& v, std::size_t rows, std::size_t cols,
                               std::optional<LabelClass> label = {}) {
    if (v.size() != rows * cols) throw DimensionMismatch("unflatten: size != rows*cols");
    FeatureMatrix m;
    m.rows = rows;
    m.cols = cols;
    m.values = v;
    m.label = label;
    return m;
}

// ---------------------------------------------------------------------------
// Feature dump CSV: one row per segment, label column then L*D features.
// Values are written with shortest round-trip formatting so that a staged
// pipeline reproduces the in-memory experiment bit for bit.

inline void write_features_csv(const std::filesystem::path& path,
                               const std::vector<FeatureMatrix>& mats) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    std::string buf;
    if (!mats.empty()) {
        buf += "label";
        for (std::size_t i = 0; i < mats.front().values.size(); ++i) {
            buf += ",f";
            buf += std::to_string(i);
        }
        buf += '\n';
    }
    for (const FeatureMatrix& m : mats) {
        buf += m.label ? std::string(to_string(*m.label)) : std::string("");
        for (const double v : m.values) {
            buf += ',';
            detail::append_double(buf, v);
        }
        buf += '\n';
        if (buf.size() > (1 << 20)) {
            out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
            buf.clear();
        }
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

// Reads a feature dump back; rows/cols hints reconstruct the matrix shape
// (cols must divide the stored width).
inline std::vector<FeatureMatrix> read_features_csv(const std::filesystem::path& path,
                                                    std::size_t rows, std::size_t cols) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());
    std::vector<FeatureMatrix> out;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!header_seen) {
            header_seen = true;
            if (line.rfind("label", 0) != 0) {
                throw ParseError(path.string() + ":1: expected feature CSV header");
            }
            continue;
        }
        const std::string ctx = path.string() + ":" + std::to_string(lineno);
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos) throw ParseError(ctx + ": missing feature columns");
        FeatureMatrix m;
        m.rows = rows;
        m.cols = cols;
        const std::string label_name = line.substr(0, comma);
        if (!label_name.empty()) m.label = label_from_string(label_name);
        std::size_t pos = comma + 1;
        while (pos <= line.size()) {
            const std::size_t next = line.find(',', pos);
            const std::string_view cell(line.data() + pos,
                                        (next == std::string::npos ? line.size() : next) - pos);
            m.values.push_back(detail::parse_double(cell, ctx));
            if (next == std::string::npos) break;
            pos = next + 1;
        }
        if (m.values.size() != rows * cols) {
            throw ParseError(ctx + ": expected " + std::to_string(rows * cols) + " features, got " +
                             std::to_string(m.values.size()));
        }
        out.push_back(std::move(m));
    }
    return out;
}

} // namespace movelab
