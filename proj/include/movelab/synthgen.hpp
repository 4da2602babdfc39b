#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "movelab/errors.hpp"
#include "movelab/kinematics.hpp"
#include "movelab/rng.hpp"
#include "movelab/segmentation.hpp"
#include "movelab/threads.hpp"
#include "movelab/vec3.hpp"

namespace movelab {

enum class SpeedClass : int { slow = 0, normal = 1, fast = 2 };

inline constexpr std::array<std::string_view, 3> kSpeedNames = {"slow", "normal", "fast"};

inline std::string_view to_string(SpeedClass s) {
    return kSpeedNames[static_cast<std::size_t>(s)];
}

inline SpeedClass speed_from_string(std::string_view name) {
    for (int i = 0; i < 3; ++i) {
        if (kSpeedNames[static_cast<std::size_t>(i)] == name) return static_cast<SpeedClass>(i);
    }
    throw ParseError("unknown speed class '" + std::string(name) + "'");
}

inline int speed_index(SpeedClass s) { return static_cast<int>(s); }

// Nominal single-unit durations per speed class, seconds.
struct SpeedDurations {
    double slow = 1.6;
    double normal = 1.0;
    double fast = 0.5;

    double of(SpeedClass s) const {
        switch (s) {
            case SpeedClass::slow: return slow;
            case SpeedClass::normal: return normal;
            default: return fast;
        }
    }
    void validate() const {
        if (!(slow > normal && normal > fast && fast > 0.0)) {
            throw InvalidConfig("speed durations must satisfy slow > normal > fast > 0");
        }
    }
};

enum class Brick : int { green = 0, red = 1, blue = 2, yellow = 3 };

inline constexpr std::array<std::string_view, 4> kBrickNames = {"green", "red", "blue", "yellow"};

inline std::string_view to_string(Brick b) { return kBrickNames[static_cast<std::size_t>(b)]; }

inline Brick brick_from_string(std::string_view name) {
    for (int i = 0; i < 4; ++i) {
        if (kBrickNames[static_cast<std::size_t>(i)] == name) return static_cast<Brick>(i);
    }
    throw ParseError("unknown brick '" + std::string(name) + "'");
}

// Brick pick-up positions on the table plus the stack position in the middle.
// All at table height so that every reach shares the same vertical geometry.
struct TableLayout {
    Vec3 middle = {0.0, 0.40, 0.0};
    Vec3 front = {0.0, 0.68, 0.0};
    Vec3 left = {-0.30, 0.40, 0.0};
    Vec3 right = {0.30, 0.40, 0.0};
    Vec3 down = {0.0, 0.14, 0.0};
    double lift_height = 0.08;

    void validate() const {
        const std::array<const Vec3*, 5> pos = {&middle, &front, &left, &right, &down};
        for (std::size_t i = 0; i < pos.size(); ++i) {
            for (std::size_t j = i + 1; j < pos.size(); ++j) {
                if (norm(*pos[i] - *pos[j]) < 0.1) {
                    throw InvalidConfig("table positions must be pairwise >= 0.1 m apart");
                }
            }
        }
        if (!(lift_height >= 0.0)) throw InvalidConfig("lift_height must be >= 0");
    }

    // fixed color -> position mapping: green=front, red=left, blue=right, yellow=down
    const Vec3& position_of(Brick b) const {
        switch (b) {
            case Brick::green: return front;
            case Brick::red: return left;
            case Brick::blue: return right;
            default: return down;
        }
    }

    // reach label (middle -> brick position) and carry label (back to middle)
    static LabelClass reach_label(Brick b) {
        switch (b) {
            case Brick::green: return LabelClass::middle2front;
            case Brick::red: return LabelClass::middle2left;
            case Brick::blue: return LabelClass::middle2right;
            default: return LabelClass::middle2down;
        }
    }
    static LabelClass carry_label(Brick b) {
        switch (b) {
            case Brick::green: return LabelClass::front2middle;
            case Brick::red: return LabelClass::left2middle;
            case Brick::blue: return LabelClass::right2middle;
            default: return LabelClass::down2middle;
        }
    }
};

struct NoiseParams {
    double pos_std = 0.0005;   // white marker noise, meters
    double duration_cv = 0.1;  // per-unit duration spread
    double endpoint_std = 0.01; // waypoint jitter, meters

    void validate() const {
        if (pos_std < 0.0 || duration_cv < 0.0 || endpoint_std < 0.0) {
            throw InvalidConfig("noise parameters must be >= 0");
        }
    }
};

struct ScenarioSpec {
    std::array<Brick, 3> stacking_order = {Brick::red, Brick::blue, Brick::yellow};
    int repetitions = 1;
    SpeedClass speed = SpeedClass::normal;
    NoiseParams noise;
    std::uint64_t seed = 0;
    double sample_rate = 500.0;
    SpeedDurations durations;
    double gap_min = 0.1; // rest between units, seconds
    double gap_max = 0.3;

    void validate() const {
        if (repetitions < 1) throw InvalidConfig("repetitions must be >= 1");
        if (!(sample_rate > 0.0)) throw InvalidConfig("sample_rate must be positive");
        if (!(gap_min > 0.0 && gap_max >= gap_min)) throw InvalidConfig("bad rest gap range");
        noise.validate();
        durations.validate();
        if (stacking_order[0] == stacking_order[1] || stacking_order[0] == stacking_order[2] ||
            stacking_order[1] == stacking_order[2]) {
            throw InvalidConfig("stacking order must be a permutation of red/blue/yellow");
        }
        for (const Brick b : stacking_order) {
            if (b == Brick::green) throw InvalidConfig("green is always stacked first");
        }
    }
};

// Point-to-point minimum-jerk path with a sinusoidal vertical lift arc,
// sampled on the capture grid. Returns round(T*rate)+1 samples covering
// tau in [0, 1]; velocity is zero at both ends.
inline std::vector<Vec3> min_jerk_path(const Vec3& p0, const Vec3& p1, double T, double lift,
                                       double sample_rate) {
    if (!(T > 0.0)) throw InvalidConfig("min_jerk_path: T must be positive");
    if (norm(p1 - p0) == 0.0) throw DegenerateMove("min_jerk_path: p0 equals p1");
    const long n = std::max<long>(2, std::lround(T * sample_rate));
    std::vector<Vec3> out;
    out.reserve(static_cast<std::size_t>(n + 1));
    const Vec3 d = p1 - p0;
    for (long k = 0; k <= n; ++k) {
        const double tau = static_cast<double>(k) / static_cast<double>(n);
        const double s = tau * tau * tau * (10.0 + tau * (-15.0 + 6.0 * tau));
        const double arc = std::sin(3.14159265358979323846 * tau);
        out.push_back(p0 + d * s + Vec3{0.0, 0.0, lift * arc * arc});
    }
    return out;
}

struct ArmStreams {
    std::vector<Vec3> elbow;
    std::vector<Vec3> shoulder;
    std::array<std::vector<Vec3>, 3> back;
};

namespace detail {
inline constexpr Vec3 kShoulderBase = {0.18, 0.05, 0.40};
inline constexpr std::array<Vec3, 3> kBackBase = {
    Vec3{-0.08, -0.08, 0.30}, Vec3{0.08, -0.08, 0.30}, Vec3{0.00, -0.14, 0.42}};
} // namespace detail

// Derives the remaining marker streams from the hand path: the shoulder
// follows 5% of the hand displacement, the elbow hangs below the
// hand-shoulder midpoint, and the rigid back triangle follows 2%.
inline ArmStreams arm_follow(const std::vector<Vec3>& hand) {
    ArmStreams a;
    const std::size_t n = hand.size();
    a.elbow.reserve(n);
    a.shoulder.reserve(n);
    for (auto& b : a.back) b.reserve(n);
    const Vec3 origin = n > 0 ? hand[0] : Vec3{};
    for (const Vec3& h : hand) {
        const Vec3 d = h - origin;
        const Vec3 shoulder = detail::kShoulderBase + d * 0.05;
        a.shoulder.push_back(shoulder);
        a.elbow.push_back((shoulder + h) * 0.5 - Vec3{0.0, 0.0, 0.05});
        for (int i = 0; i < 3; ++i) a.back[i].push_back(detail::kBackBase[i] + d * 0.02);
    }
    return a;
}

struct Recording {
    std::string id;
    SpeedClass speed = SpeedClass::normal;
    std::array<Brick, 3> order = {Brick::red, Brick::blue, Brick::yellow};
    int rep = 0;
    Trajectory traj;
    std::vector<Segment> truth;
};

// One stacking recording: 8 movement units (reach + carry per brick, green
// first) separated by rest gaps, with exact truth segments.
inline Recording generate_recording(const ScenarioSpec& spec, const TableLayout& layout) {
    spec.validate();
    layout.validate();
    Rand rng(spec.seed);

    const std::array<Brick, 4> bricks = {Brick::green, spec.stacking_order[0],
                                         spec.stacking_order[1], spec.stacking_order[2]};

    // waypoints: middle, pos1, middle, pos2, ... (9 total); each visit gets
    // its own jitter so consecutive units remain continuous
    std::array<Vec3, 9> waypoints;
    for (int i = 0; i < 9; ++i) {
        const Vec3 nominal = (i % 2 == 0) ? layout.middle : layout.position_of(bricks[i / 2]);
        const Vec3 jitter{rng.normal(), rng.normal(), rng.normal()};
        waypoints[static_cast<std::size_t>(i)] = nominal + jitter * spec.noise.endpoint_std;
    }

    std::array<double, 8> unit_T;
    const double T = spec.durations.of(spec.speed);
    for (double& t : unit_T) {
        t = T * std::max(0.2, rng.normal(1.0, spec.noise.duration_cv));
    }

    std::array<double, 9> gaps; // lead, 7 inter-unit, tail
    for (double& g : gaps) g = rng.uniform(spec.gap_min, spec.gap_max);
    gaps[0] += 0.2;

    std::vector<Vec3> hand;
    std::vector<Segment> truth;
    const auto hold = [&](const Vec3& p, double seconds) {
        const long frames = std::lround(seconds * spec.sample_rate);
        for (long k = 0; k < frames; ++k) hand.push_back(p);
    };
    hold(waypoints[0], gaps[0]);
    for (int u = 0; u < 8; ++u) {
        const Vec3& from = waypoints[static_cast<std::size_t>(u)];
        const Vec3& to = waypoints[static_cast<std::size_t>(u + 1)];
        const auto path = min_jerk_path(from, to, unit_T[static_cast<std::size_t>(u)],
                                        layout.lift_height, spec.sample_rate);
        Segment s;
        s.start = hand.size();
        s.end = s.start + path.size() - 1; // arrival frame is rest, not unit
        const Brick b = bricks[static_cast<std::size_t>(u / 2)];
        s.label = (u % 2 == 0) ? TableLayout::reach_label(b) : TableLayout::carry_label(b);
        s.provenance = Provenance::truth;
        truth.push_back(s);
        hand.insert(hand.end(), path.begin(), path.end());
        hold(to, gaps[static_cast<std::size_t>(u + 1)]);
    }

    ArmStreams arm = arm_follow(hand);

    Recording rec;
    rec.speed = spec.speed;
    rec.order = spec.stacking_order;
    rec.traj.sample_rate = spec.sample_rate;
    rec.traj.frames.resize(hand.size());
    for (std::size_t i = 0; i < hand.size(); ++i) {
        MarkerFrame& fr = rec.traj.frames[i];
        fr.t = static_cast<double>(i) / spec.sample_rate;
        fr.hand = hand[i];
        fr.elbow = arm.elbow[i];
        fr.shoulder = arm.shoulder[i];
        for (int b = 0; b < 3; ++b) fr.back[b] = arm.back[b][i];
    }

    if (spec.noise.pos_std > 0.0) {
        for (MarkerFrame& fr : rec.traj.frames) {
            Vec3* markers[6] = {&fr.hand, &fr.elbow, &fr.shoulder, &fr.back[0], &fr.back[1],
                                &fr.back[2]};
            for (Vec3* m : markers) {
                m->x += spec.noise.pos_std * rng.normal();
                m->y += spec.noise.pos_std * rng.normal();
                m->z += spec.noise.pos_std * rng.normal();
            }
        }
        // condition the noisy signal the way a tracker pipeline would
        const double sigma = 0.010 * spec.sample_rate;
        const std::size_t n = rec.traj.frames.size();
        std::vector<double> channel(n);
        for (int c = 0; c < 18; ++c) {
            for (std::size_t i = 0; i < n; ++i) {
                MarkerFrame& fr = rec.traj.frames[i];
                Vec3* markers[6] = {&fr.hand, &fr.elbow, &fr.shoulder, &fr.back[0], &fr.back[1],
                                    &fr.back[2]};
                const Vec3& v = *markers[c / 3];
                channel[i] = c % 3 == 0 ? v.x : (c % 3 == 1 ? v.y : v.z);
            }
            channel = smooth_gaussian(channel, sigma);
            for (std::size_t i = 0; i < n; ++i) {
                MarkerFrame& fr = rec.traj.frames[i];
                Vec3* markers[6] = {&fr.hand, &fr.elbow, &fr.shoulder, &fr.back[0], &fr.back[1],
                                    &fr.back[2]};
                double* comp = c % 3 == 0 ? &markers[c / 3]->x
                                          : (c % 3 == 1 ? &markers[c / 3]->y : &markers[c / 3]->z);
                *comp = channel[i];
            }
        }
    }

    rec.truth = std::move(truth);
    return rec;
}

// The 6 stacking orders (green is always first and not part of the order).
inline const std::array<std::array<Brick, 3>, 6>& stacking_orders() {
    static const std::array<std::array<Brick, 3>, 6> orders = {{
        {Brick::red, Brick::blue, Brick::yellow},
        {Brick::red, Brick::yellow, Brick::blue},
        {Brick::blue, Brick::red, Brick::yellow},
        {Brick::blue, Brick::yellow, Brick::red},
        {Brick::yellow, Brick::red, Brick::blue},
        {Brick::yellow, Brick::blue, Brick::red},
    }};
    return orders;
}

struct GeneratorConfig {
    double sample_rate = 500.0;
    SpeedDurations durations;
    NoiseParams noise;
    TableLayout layout;
    std::array<int, 3> repetitions = {3, 3, 4}; // slow, normal, fast
    double gap_min = 0.1;
    double gap_max = 0.3;
};

struct Dataset {
    std::uint64_t seed = 0;
    GeneratorConfig config;
    std::vector<Recording> recordings;
};

namespace detail {
inline constexpr std::uint64_t kSynthStream = 0x53594e5448ULL; // namespacing constant
}

// Full stacking dataset: 6 orders x {3,3,4} repetitions x 8 units
// = 144/144/192 truth segments. Per-recording seeds are derived by stable
// indices, so parallel generation equals sequential.
inline Dataset generate_dataset(std::uint64_t seed, const GeneratorConfig& config = {},
                                unsigned threads = 1) {
    config.layout.validate();
    config.durations.validate();
    config.noise.validate();
    Dataset ds;
    ds.seed = seed;
    ds.config = config;

    struct Slot {
        SpeedClass speed;
        int order_idx;
        int rep;
    };
    std::vector<Slot> slots;
    for (int s = 0; s < 3; ++s) {
        for (int o = 0; o < 6; ++o) {
            for (int r = 0; r < config.repetitions[static_cast<std::size_t>(s)]; ++r) {
                slots.push_back({static_cast<SpeedClass>(s), o, r});
            }
        }
    }
    ds.recordings.resize(slots.size());
    parallel_for(slots.size(), threads, [&](std::size_t i) {
        const Slot& sl = slots[i];
        ScenarioSpec spec;
        spec.stacking_order = stacking_orders()[static_cast<std::size_t>(sl.order_idx)];
        spec.repetitions = config.repetitions[static_cast<std::size_t>(speed_index(sl.speed))];
        spec.speed = sl.speed;
        spec.noise = config.noise;
        spec.sample_rate = config.sample_rate;
        spec.durations = config.durations;
        spec.gap_min = config.gap_min;
        spec.gap_max = config.gap_max;
        spec.seed = derive_seed(seed, detail::kSynthStream, static_cast<std::uint64_t>(sl.speed),
                                static_cast<std::uint64_t>(sl.order_idx),
                                static_cast<std::uint64_t>(sl.rep));
        Recording rec = generate_recording(spec, config.layout);
        rec.id = std::string(to_string(sl.speed)) + "-o" + std::to_string(sl.order_idx) + "-r" +
                 std::to_string(sl.rep);
        rec.rep = sl.rep;
        ds.recordings[i] = std::move(rec);
    });
    return ds;
}

// ---------------------------------------------------------------------------
// Dataset directory: manifest.json + per-recording trajectory CSV and truth
// segment JSON-lines.

inline void write_dataset(const std::filesystem::path& dir, const Dataset& ds) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create dataset directory " + dir.string() + ": " + ec.message());

    nlohmann::json manifest;
    manifest["format_version"] = 1;
    manifest["seed"] = ds.seed;
    manifest["sample_rate"] = ds.config.sample_rate;
    nlohmann::json params;
    params["t_slow"] = ds.config.durations.slow;
    params["t_normal"] = ds.config.durations.normal;
    params["t_fast"] = ds.config.durations.fast;
    params["duration_cv"] = ds.config.noise.duration_cv;
    params["pos_std"] = ds.config.noise.pos_std;
    params["endpoint_std"] = ds.config.noise.endpoint_std;
    params["lift_height"] = ds.config.layout.lift_height;
    params["gap_min"] = ds.config.gap_min;
    params["gap_max"] = ds.config.gap_max;
    params["reps_slow"] = ds.config.repetitions[0];
    params["reps_normal"] = ds.config.repetitions[1];
    params["reps_fast"] = ds.config.repetitions[2];
    manifest["params"] = params;

    nlohmann::json counts;
    for (int s = 0; s < 3; ++s) {
        std::size_t recs = 0;
        std::size_t segs = 0;
        for (const Recording& r : ds.recordings) {
            if (speed_index(r.speed) == s) {
                ++recs;
                segs += r.truth.size();
            }
        }
        nlohmann::json c;
        c["recordings"] = recs;
        c["segments"] = segs;
        counts[std::string(kSpeedNames[static_cast<std::size_t>(s)])] = c;
    }
    manifest["counts"] = counts;

    nlohmann::json recs = nlohmann::json::array();
    for (const Recording& r : ds.recordings) {
        nlohmann::json j;
        j["id"] = r.id;
        j["speed"] = std::string(to_string(r.speed));
        j["order"] = {std::string(to_string(r.order[0])), std::string(to_string(r.order[1])),
                      std::string(to_string(r.order[2]))};
        j["rep"] = r.rep;
        j["trajectory"] = r.id + ".csv";
        j["truth"] = r.id + ".truth.jsonl";
        j["frames"] = r.traj.frames.size();
        recs.push_back(j);
        write_trajectory_csv(dir / (r.id + ".csv"), r.traj);
        write_segments(dir / (r.id + ".truth.jsonl"), r.truth);
    }
    manifest["recordings"] = recs;

    std::ofstream out(dir / "manifest.json", std::ios::binary);
    if (!out) throw IoError("cannot write manifest in " + dir.string());
    out << manifest.dump(2) << '\n';
}

inline Dataset load_dataset(const std::filesystem::path& dir, unsigned threads = 1) {
    const auto manifest_path = dir / "manifest.json";
    if (!std::filesystem::exists(manifest_path)) {
        throw MissingDataset("no dataset manifest at " + manifest_path.string());
    }
    std::ifstream in(manifest_path, std::ios::binary);
    if (!in) throw IoError("cannot open " + manifest_path.string());
    nlohmann::json manifest;
    try {
        in >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(manifest_path.string() + ": " + e.what());
    }
    Dataset ds;
    try {
        ds.seed = manifest.at("seed").get<std::uint64_t>();
        ds.config.sample_rate = manifest.at("sample_rate").get<double>();
        const auto& params = manifest.at("params");
        ds.config.durations.slow = params.at("t_slow").get<double>();
        ds.config.durations.normal = params.at("t_normal").get<double>();
        ds.config.durations.fast = params.at("t_fast").get<double>();
        ds.config.noise.duration_cv = params.at("duration_cv").get<double>();
        ds.config.noise.pos_std = params.at("pos_std").get<double>();
        ds.config.noise.endpoint_std = params.at("endpoint_std").get<double>();
        ds.config.layout.lift_height = params.at("lift_height").get<double>();
        ds.config.gap_min = params.at("gap_min").get<double>();
        ds.config.gap_max = params.at("gap_max").get<double>();
        ds.config.repetitions[0] = params.at("reps_slow").get<int>();
        ds.config.repetitions[1] = params.at("reps_normal").get<int>();
        ds.config.repetitions[2] = params.at("reps_fast").get<int>();

        const auto& recs = manifest.at("recordings");
        ds.recordings.resize(recs.size());
        std::vector<nlohmann::json> entries(recs.begin(), recs.end());
        parallel_for(entries.size(), threads, [&](std::size_t i) {
            const nlohmann::json& j = entries[i];
            Recording r;
            r.id = j.at("id").get<std::string>();
            r.speed = speed_from_string(j.at("speed").get<std::string>());
            for (int k = 0; k < 3; ++k) {
                r.order[static_cast<std::size_t>(k)] =
                    brick_from_string(j.at("order").at(k).get<std::string>());
            }
            r.rep = j.at("rep").get<int>();
            r.traj = read_trajectory_csv(dir / j.at("trajectory").get<std::string>());
            r.truth = read_segments(dir / j.at("truth").get<std::string>());
            ds.recordings[i] = std::move(r);
        });
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(manifest_path.string() + ": " + e.what());
    }
    return ds;
}

} // namespace movelab
