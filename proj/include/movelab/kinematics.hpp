#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "movelab/errors.hpp"
#include "movelab/vec3.hpp"

namespace movelab {

// One motion-capture sample: arm markers plus the three rigid reference
// markers on the back.
struct MarkerFrame {
    double t = 0.0;
    Vec3 hand;
    Vec3 elbow;
    Vec3 shoulder;
    std::array<Vec3, 3> back;
};

enum class Marker { hand, elbow, shoulder };

struct Trajectory {
    std::vector<MarkerFrame> frames;
    double sample_rate = 0.0; // Hz

    std::size_t size() const { return frames.size(); }

    // timestamps strictly increasing and uniform to 1e-9 s, length >= 2
    void validate() const {
        if (frames.size() < 2) throw TooShort("trajectory needs at least 2 frames");
        if (!(sample_rate > 0.0)) throw Error("trajectory sample_rate must be positive");
        const double dt = 1.0 / sample_rate;
        for (std::size_t i = 1; i < frames.size(); ++i) {
            const double step = frames[i].t - frames[i - 1].t;
            if (!(step > 0.0) || std::abs(step - dt) > 1e-9) {
                throw Error("trajectory timestamps not uniform at frame " + std::to_string(i));
            }
        }
    }
};

namespace detail {

struct BackFrameAxes {
    Vec3 origin;
    Vec3 a1, a2, a3;
};

// Orthonormal frame from the three back markers: centroid origin, first axis
// along marker2-marker1, third axis normal to the marker plane.
inline BackFrameAxes back_axes(const std::array<Vec3, 3>& back) {
    const Vec3 u = back[1] - back[0];
    const Vec3 w = back[2] - back[0];
    const double nu = norm(u);
    const double nw = norm(w);
    if (nu < 1e-9 || nw < 1e-9 || norm(cross(u, w)) < 1e-8 * nu * nw) {
        throw CollinearReference("back reference markers are collinear");
    }
    BackFrameAxes f;
    f.origin = (back[0] + back[1] + back[2]) * (1.0 / 3.0);
    f.a1 = normalized(u);
    f.a3 = normalized(cross(f.a1, w));
    f.a2 = cross(f.a3, f.a1);
    return f;
}

inline Vec3 to_local(const BackFrameAxes& f, const Vec3& p) {
    const Vec3 d = p - f.origin;
    return {dot(d, f.a1), dot(d, f.a2), dot(d, f.a3)};
}

} // namespace detail

// Express all markers in the body-anchored frame built per-frame from the
// back markers. Invariant under rigid transforms applied to the whole body.
inline Trajectory to_back_frame(const Trajectory& traj) {
    Trajectory out;
    out.sample_rate = traj.sample_rate;
    out.frames.reserve(traj.frames.size());
    for (const MarkerFrame& fr : traj.frames) {
        const auto axes = detail::back_axes(fr.back);
        MarkerFrame g;
        g.t = fr.t;
        g.hand = detail::to_local(axes, fr.hand);
        g.elbow = detail::to_local(axes, fr.elbow);
        g.shoulder = detail::to_local(axes, fr.shoulder);
        for (int i = 0; i < 3; ++i) g.back[i] = detail::to_local(axes, fr.back[i]);
        out.frames.push_back(g);
    }
    return out;
}

// Truncated Gaussian smoothing, kernel half-width ceil(3*sigma) samples,
// renormalized where the kernel is clipped at the signal boundaries.
inline std::vector<double> smooth_gaussian(const std::vector<double>& signal, double sigma_samples) {
    const std::size_t n = signal.size();
    if (sigma_samples <= 0.0 || n == 0) return signal;
    const long half = static_cast<long>(std::ceil(3.0 * sigma_samples));
    if (half < 1) return signal;
    std::vector<double> kernel(static_cast<std::size_t>(2 * half + 1));
    for (long j = -half; j <= half; ++j) {
        kernel[static_cast<std::size_t>(j + half)] =
            std::exp(-0.5 * (static_cast<double>(j) / sigma_samples) * (static_cast<double>(j) / sigma_samples));
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        double wsum = 0.0;
        const long lo = std::max<long>(-half, -static_cast<long>(i));
        const long hi = std::min<long>(half, static_cast<long>(n - 1 - i));
        for (long j = lo; j <= hi; ++j) {
            const double w = kernel[static_cast<std::size_t>(j + half)];
            acc += w * signal[static_cast<std::size_t>(static_cast<long>(i) + j)];
            wsum += w;
        }
        out[i] = acc / wsum;
    }
    return out;
}

inline const Vec3& marker_position(const MarkerFrame& fr, Marker m) {
    switch (m) {
        case Marker::hand: return fr.hand;
        case Marker::elbow: return fr.elbow;
        default: return fr.shoulder;
    }
}

// Speed of one marker: norm of the central-difference derivative (one-sided
// at the ends), then Gaussian-smoothed with std sigma_s seconds.
inline std::vector<double> speed_profile(const Trajectory& traj, Marker marker, double sigma_s) {
    traj.validate();
    if (sigma_s < 0.0) throw Error("speed_profile: sigma_s must be >= 0");
    const std::size_t n = traj.frames.size();
    const double dt = 1.0 / traj.sample_rate;
    std::vector<double> speed(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vec3 v;
        if (i == 0) {
            v = (marker_position(traj.frames[1], marker) - marker_position(traj.frames[0], marker)) * (1.0 / dt);
        } else if (i == n - 1) {
            v = (marker_position(traj.frames[n - 1], marker) - marker_position(traj.frames[n - 2], marker)) *
                (1.0 / dt);
        } else {
            v = (marker_position(traj.frames[i + 1], marker) - marker_position(traj.frames[i - 1], marker)) *
                (1.0 / (2.0 * dt));
        }
        speed[i] = norm(v);
    }
    return smooth_gaussian(speed, sigma_s * traj.sample_rate);
}

// Angle at vertex b between rays b->a and b->c, in [0, pi].
inline double joint_angle(const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 u = a - b;
    const Vec3 v = c - b;
    const double nu = norm(u);
    const double nv = norm(v);
    if (nu <= 1e-9 || nv <= 1e-9) throw DegenerateAngle("joint_angle: ray shorter than 1e-9");
    double cosang = dot(u, v) / (nu * nv);
    cosang = std::clamp(cosang, -1.0, 1.0);
    return std::acos(cosang);
}

// Linear interpolation of a multi-channel series onto L uniformly spaced
// time points spanning [t_first, t_last]; endpoints reproduced exactly.
inline std::vector<std::vector<double>> resample(const std::vector<double>& t,
                                                 const std::vector<std::vector<double>>& values,
                                                 std::size_t L) {
    if (t.size() < 2 || values.size() < 2) throw TooShort("resample: input length < 2");
    if (t.size() != values.size()) throw LengthMismatch("resample: timestamps/values length mismatch");
    if (L < 2) throw TooShort("resample: L must be >= 2");
    std::vector<std::vector<double>> out(L);
    out[0] = values.front();
    out[L - 1] = values.back();
    const double t0 = t.front();
    const double t1 = t.back();
    std::size_t seg = 0;
    for (std::size_t k = 1; k + 1 < L; ++k) {
        const double tk = t0 + (t1 - t0) * (static_cast<double>(k) / static_cast<double>(L - 1));
        while (seg + 2 < t.size() && t[seg + 1] < tk) ++seg;
        const double span = t[seg + 1] - t[seg];
        const double w = span > 0.0 ? (tk - t[seg]) / span : 0.0;
        const std::size_t dim = values[seg].size();
        std::vector<double> row(dim);
        for (std::size_t d = 0; d < dim; ++d) {
            row[d] = values[seg][d] + w * (values[seg + 1][d] - values[seg][d]);
        }
        out[k] = std::move(row);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Trajectory CSV format.
// Header: t,hand.x,...,back3.z ; one row per frame; values round-trip exactly.

namespace detail {

inline void append_double(std::string& out, double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

inline double parse_double(std::string_view s, const std::string& context) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last) {
        throw ParseError(context + ": bad number '" + std::string(s) + "'");
    }
    return v;
}

} // namespace detail

inline const char* trajectory_csv_header() {
    return "t,hand.x,hand.y,hand.z,elbow.x,elbow.y,elbow.z,shoulder.x,shoulder.y,shoulder.z,"
           "back1.x,back1.y,back1.z,back2.x,back2.y,back2.z,back3.x,back3.y,back3.z";
}

inline void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    std::string buf;
    buf.reserve(1 << 20);
    buf += trajectory_csv_header();
    buf += '\n';
    for (const MarkerFrame& fr : traj.frames) {
        const Vec3* vecs[6] = {&fr.hand, &fr.elbow, &fr.shoulder, &fr.back[0], &fr.back[1], &fr.back[2]};
        detail::append_double(buf, fr.t);
        for (const Vec3* v : vecs) {
            buf += ',';
            detail::append_double(buf, v->x);
            buf += ',';
            detail::append_double(buf, v->y);
            buf += ',';
            detail::append_double(buf, v->z);
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

inline Trajectory read_trajectory_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path.string() + ":1: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != trajectory_csv_header()) {
        throw ParseError(path.string() + ":1: unexpected trajectory CSV header");
    }
    Trajectory traj;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string ctx = path.string() + ":" + std::to_string(lineno);
        std::array<double, 19> vals{};
        std::size_t field = 0;
        std::size_t pos = 0;
        while (field < 19) {
            const std::size_t comma = line.find(',', pos);
            const std::string_view cell(line.data() + pos,
                                        (comma == std::string::npos ? line.size() : comma) - pos);
            vals[field++] = detail::parse_double(cell, ctx);
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (field != 19) throw ParseError(ctx + ": expected 19 fields, got " + std::to_string(field));
        MarkerFrame fr;
        fr.t = vals[0];
        fr.hand = {vals[1], vals[2], vals[3]};
        fr.elbow = {vals[4], vals[5], vals[6]};
        fr.shoulder = {vals[7], vals[8], vals[9]};
        for (int b = 0; b < 3; ++b) {
            fr.back[b] = {vals[10 + 3 * b], vals[11 + 3 * b], vals[12 + 3 * b]};
        }
        traj.frames.push_back(fr);
    }
    if (traj.frames.size() < 2) throw ParseError(path.string() + ": trajectory needs at least 2 frames");
    traj.sample_rate =
        static_cast<double>(traj.frames.size() - 1) / (traj.frames.back().t - traj.frames.front().t);
    traj.validate();
    return traj;
}

} // namespace movelab
