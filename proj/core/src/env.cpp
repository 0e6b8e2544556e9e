#include "hasflow/env.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace hasflow::env {

using nlohmann::json;

std::array<double, 2> expert_action(const WorldState& s, double gain, double v_max) {
    if (gain <= 0.0 || v_max <= 0.0) throw std::invalid_argument("expert: gain and v_max must be > 0");
    double ax = gain * (s.tx - s.px);
    double ay = gain * (s.ty - s.py);
    double mag = std::sqrt(ax * ax + ay * ay);
    if (mag > v_max) {
        ax *= v_max / mag;
        ay *= v_max / mag;
    }
    return {ax, ay};
}

static double clamp_ws(double v) { return std::clamp(v, -kWorkspaceHalf, kWorkspaceHalf); }

void step(WorldState& s, double ax, double ay) {
    s.px = clamp_ws(s.px + ax);
    s.py = clamp_ws(s.py + ay);
    s.tick += 1;
}

Mat expert_chunk(const WorldState& s, int H, double gain, double v_max) {
    if (H < 1) throw std::invalid_argument("expert_chunk: H must be >= 1");
    Mat chunk(H, 2);
    WorldState roll = s;
    for (int i = 0; i < H; ++i) {
        auto a = expert_action(roll, gain, v_max);
        chunk.at(i, 0) = a[0];
        chunk.at(i, 1) = a[1];
        roll.px = clamp_ws(roll.px + a[0]);
        roll.py = clamp_ws(roll.py + a[1]);
    }
    return chunk;
}

static std::array<double, 2> draw_jump_target(Rng& rng, double from_x, double from_y,
                                              double min_dist) {
    // Rejection sample a uniform workspace point at least min_dist away so
    // events are unambiguous.
    for (int tries = 0; tries < 256; ++tries) {
        double x = rng.uniform(-kWorkspaceHalf, kWorkspaceHalf);
        double y = rng.uniform(-kWorkspaceHalf, kWorkspaceHalf);
        double dx = x - from_x, dy = y - from_y;
        if (dx * dx + dy * dy >= min_dist * min_dist) return {x, y};
    }
    return {-from_x, -from_y};
}

EventSchedule make_event_schedule(long duration_ticks, const EnvConfig& cfg, uint64_t seed) {
    EventSchedule sched;
    sched.seed = seed;
    Rng rng(seed);
    if (cfg.mean_jump_interval <= 0.0) return sched;  // jump rate 0: fixed target
    double p = 1.0 / cfg.mean_jump_interval;
    long t = 0;
    double last_x = 0.0, last_y = 0.0;
    while (true) {
        // Geometric inter-arrival with mean cfg.mean_jump_interval.
        long gap = 1;
        while (!rng.bernoulli(p)) gap++;
        t += gap;
        if (t >= duration_ticks) break;
        auto tgt = draw_jump_target(rng, last_x, last_y, cfg.min_jump_dist);
        sched.jump_times.push_back(t);
        sched.jump_targets.push_back(tgt);
        last_x = tgt[0];
        last_y = tgt[1];
    }
    return sched;
}

static std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void generate_dataset(const std::string& path, int num_episodes, long episode_len, int H,
                      const EnvConfig& cfg, uint64_t seed) {
    if (num_episodes < 1 || episode_len < 1 || H < 1)
        throw std::invalid_argument("generate_dataset: sizes must be positive");
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open dataset for writing: " + path);

    // Header line: metadata needed to replay generation.
    os << "{\"episodes\":" << num_episodes << ",\"episode_len\":" << episode_len << ",\"H\":" << H
       << ",\"gain_lo\":" << fmt_double(cfg.gain_lo) << ",\"gain_hi\":" << fmt_double(cfg.gain_hi)
       << ",\"v_max\":" << fmt_double(cfg.v_max)
       << ",\"mean_jump_interval\":" << fmt_double(cfg.mean_jump_interval)
       << ",\"min_jump_dist\":" << fmt_double(cfg.min_jump_dist) << ",\"seed\":" << seed << "}\n";

    for (int ep = 0; ep < num_episodes; ++ep) {
        // Episodes are independent given per-episode seeds, so generation
        // could shard across workers without changing bytes.
        uint64_t ep_seed = seed + 0x100000001ull * static_cast<uint64_t>(ep + 1);
        Rng rng(ep_seed);
        double gain = rng.uniform(cfg.gain_lo, cfg.gain_hi);  // hidden per-episode gain
        WorldState s;
        s.px = rng.uniform(-kWorkspaceHalf, kWorkspaceHalf);
        s.py = rng.uniform(-kWorkspaceHalf, kWorkspaceHalf);
        auto first_target = draw_jump_target(rng, s.px, s.py, cfg.min_jump_dist);
        s.tx = first_target[0];
        s.ty = first_target[1];

        EventSchedule jumps = make_event_schedule(episode_len, cfg, ep_seed ^ 0xabcdef12345ull);
        size_t next_jump = 0;

        for (long t = 0; t < episode_len; ++t) {
            if (next_jump < jumps.jump_times.size() && jumps.jump_times[next_jump] == t) {
                s.tx = jumps.jump_targets[next_jump][0];
                s.ty = jumps.jump_targets[next_jump][1];
                next_jump++;
            }
            Mat chunk = expert_chunk(s, H, gain, cfg.v_max);
            os << "{\"ep\":" << ep << ",\"t\":" << t << ",\"obs\":[" << fmt_double(s.px) << ","
               << fmt_double(s.py) << "," << fmt_double(s.tx) << "," << fmt_double(s.ty)
               << "],\"chunk\":[";
            for (int i = 0; i < H; ++i) {
                if (i) os << ",";
                os << "[" << fmt_double(chunk.at(i, 0)) << "," << fmt_double(chunk.at(i, 1)) << "]";
            }
            os << "]}\n";
            auto a = expert_action(s, gain, cfg.v_max);
            step(s, a[0], a[1]);
        }
    }
    if (!os) throw std::runtime_error("dataset write failed: " + path);
}

Dataset load_dataset(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open dataset: " + path);
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("dataset is empty: " + path);

    Dataset ds;
    json header = json::parse(line);
    ds.meta.episodes = header.at("episodes").get<int>();
    ds.meta.episode_len = header.at("episode_len").get<long>();
    ds.meta.H = header.at("H").get<int>();
    ds.meta.env.gain_lo = header.at("gain_lo").get<double>();
    ds.meta.env.gain_hi = header.at("gain_hi").get<double>();
    ds.meta.env.v_max = header.at("v_max").get<double>();
    ds.meta.env.mean_jump_interval = header.at("mean_jump_interval").get<double>();
    ds.meta.env.min_jump_dist = header.at("min_jump_dist").get<double>();
    ds.meta.seed = header.at("seed").get<uint64_t>();

    while (std::getline(is, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        TickRecord r;
        r.episode = j.at("ep").get<int>();
        r.tick = j.at("t").get<long>();
        r.obs = j.at("obs").get<Vec>();
        const auto& rows = j.at("chunk");
        r.chunk = Mat(static_cast<int>(rows.size()), 2);
        for (size_t i = 0; i < rows.size(); ++i) {
            r.chunk.at(static_cast<int>(i), 0) = rows[i][0].get<double>();
            r.chunk.at(static_cast<int>(i), 1) = rows[i][1].get<double>();
        }
        ds.records.push_back(std::move(r));
    }
    return ds;
}

std::vector<flow::TrainSample> to_train_samples(const Dataset& ds) {
    std::vector<flow::TrainSample> out;
    out.reserve(ds.records.size());
    for (const auto& r : ds.records) out.push_back({r.obs, r.chunk});
    return out;
}

ReactionSample measure_reaction(const std::vector<ExecutedAction>& trace,
                                const ReactionEvent& event) {
    ReactionSample out;
    bool covered = false;
    for (const auto& a : trace) {
        if (a.exec_time < event.time) continue;
        covered = true;
        if (out.protocol < 0.0 && a.obs_time >= event.time) out.protocol = a.exec_time - event.time;
        if (!out.behavioral.has_value()) {
            double bx = event.new_tx - event.px;
            double by = event.new_ty - event.py;
            double bm = std::sqrt(bx * bx + by * by);
            double am = std::sqrt(a.ax * a.ax + a.ay * a.ay);
            if (bm > 1e-12 && am > 1e-9) {
                double cosang = (a.ax * bx + a.ay * by) / (am * bm);
                if (cosang >= std::cos(30.0 * M_PI / 180.0))
                    out.behavioral = a.exec_time - event.time;
            }
        }
        if (out.protocol >= 0.0 && out.behavioral.has_value()) break;
    }
    if (!covered) throw std::invalid_argument("measure_reaction: event not covered by trace");
    return out;
}

}  // namespace hasflow::env
