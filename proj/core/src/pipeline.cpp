#include "hasflow/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace hasflow::pipeline {

const char* mode_name(Mode m) {
    switch (m) {
        case Mode::Sync: return "sync";
        case Mode::AsyncNaive: return "async";
        case Mode::AsyncPrefix: return "async-prefix";
        case Mode::Faster: return "faster";
    }
    return "?";
}

Mode mode_from_name(const std::string& name) {
    if (name == "sync") return Mode::Sync;
    if (name == "async" || name == "async-naive") return Mode::AsyncNaive;
    if (name == "async-prefix") return Mode::AsyncPrefix;
    if (name == "faster") return Mode::Faster;
    throw std::invalid_argument("unknown mode: " + name);
}

TimingModel fit_timing(double full_latency, double ttfa, int N, double dt_ctrl, double overhead) {
    if (N < 2) throw std::invalid_argument("fit_timing: N must be >= 2");
    if (full_latency <= ttfa) throw std::invalid_argument("fit_timing: full latency must exceed TTFA");
    TimingModel t;
    t.dt_ctrl = dt_ctrl;
    t.steps = N;
    t.overhead = overhead;
    t.dt_ae = (full_latency - ttfa) / (N - 1);
    t.dt_vlm = ttfa - t.dt_ae - overhead;
    if (t.dt_vlm < 0.0) throw std::invalid_argument("fit_timing: negative dt_vlm; overhead too large");
    return t;
}

static void check_timing(const TimingModel& t) {
    if (t.dt_ctrl <= 0.0 || t.dt_vlm < 0.0 || t.dt_ae < 0.0 || t.overhead < 0.0 || t.steps < 1)
        throw std::invalid_argument("invalid timing model");
}

double infer_latency(const TimingModel& t, Mode mode) {
    check_timing(t);
    int n = (mode == Mode::Faster) ? 1 : t.steps;
    return t.dt_vlm + n * t.dt_ae + t.overhead;
}

// Sampler steps until every index in [d, d+s-1] is finalized.
static int steps_for_window(const ScheduleSpec& sched, int N, int d, int s) {
    auto hits = schedule::hit_times(sched.H, d, sched.alpha, sched.u_d);
    int last = std::min(d + s - 1, sched.H - 1);
    return schedule::finalize_step(hits.values[last], N);
}

DelaySmin delay_and_smin(const TimingModel& t, Mode mode, const ScheduleSpec& sched) {
    check_timing(t);
    DelaySmin out;
    if (mode != Mode::Faster) {
        double li = infer_latency(t, mode);
        double q = li / t.dt_ctrl;
        out.d = static_cast<int>(std::floor(q + 1e-9));
        out.s_min = std::max(1, static_cast<int>(std::ceil(q - 1e-9)));
        out.steps_used = t.steps;
        out.latency = li;
        return out;
    }

    const double base = t.dt_vlm + t.overhead;
    for (int s = 1; s < sched.H; ++s) {
        // Fixed point: d is the floor of the very latency the window implies.
        int d = std::max(0, static_cast<int>(std::floor(infer_latency(t, Mode::Faster) / t.dt_ctrl)));
        int steps = 1;
        double latency = 0.0;
        for (int iter = 0; iter < 32; ++iter) {
            if (d + s > sched.H) break;
            steps = steps_for_window(sched, t.steps, d, s);
            latency = base + steps * t.dt_ae;
            int nd = static_cast<int>(std::floor(latency / t.dt_ctrl + 1e-9));
            if (nd == d) break;
            d = nd;
        }
        if (d + s > sched.H) continue;
        if (s * t.dt_ctrl >= latency + t.stream_margin - 1e-9) {
            out.d = d;
            out.s_min = s;
            out.steps_used = steps;
            out.latency = latency;
            return out;
        }
    }
    throw std::runtime_error("delay_and_smin: no feasible execution horizon (controller too fast)");
}

UniformDist reaction_distribution(const TimingModel& t, Mode mode, int s,
                                  const ScheduleSpec& sched) {
    if (s < 1) throw std::invalid_argument("reaction_distribution: s must be >= 1");
    if (mode != Mode::Sync) {
        int smin = delay_and_smin(t, mode, sched).s_min;
        if (s < smin)
            throw std::invalid_argument("reaction_distribution: s below s_min for async mode");
    }
    double li = infer_latency(t, mode);
    double exec = s * t.dt_ctrl;
    if (mode == Mode::Sync) return {li, 2.0 * li + exec};
    return {li, li + exec};
}

double dominance_probability(const UniformDist& a, const UniformDist& b) {
    if (a.hi < a.lo || b.hi < b.lo) throw std::invalid_argument("dominance: invalid distribution");
    const double wa = a.hi - a.lo, wb = b.hi - b.lo;
    if (wa <= 0.0 && wb <= 0.0) return a.lo < b.lo ? 1.0 : (a.lo > b.lo ? 0.0 : 0.5);
    if (wa <= 0.0) return std::clamp((b.hi - a.lo) / wb, 0.0, 1.0);
    if (wb <= 0.0) return std::clamp((b.lo - a.lo) / wa, 0.0, 1.0);
    // P(X < y) integrated over y: ramp on [a.lo, a.hi], saturated above.
    double p = 0.0;
    double ramp_lo = std::max(b.lo, a.lo);
    double ramp_hi = std::min(b.hi, a.hi);
    if (ramp_hi > ramp_lo)
        p += ((ramp_hi - a.lo) * (ramp_hi - a.lo) - (ramp_lo - a.lo) * (ramp_lo - a.lo)) / (2.0 * wa);
    if (b.hi > a.hi) p += b.hi - std::max(a.hi, b.lo);
    return p / wb;
}

// ---- scripted simulation ----

RunTrace simulate_scripted(const SimConfig& cfg) {
    check_timing(cfg.timing);
    const TimingModel& t = cfg.timing;
    auto ds = delay_and_smin(t, cfg.mode, cfg.sched);
    int s = cfg.s > 0 ? cfg.s : ds.s_min;
    if (cfg.mode != Mode::Sync && s < ds.s_min)
        throw std::invalid_argument("simulate: s below s_min is infeasible for async modes");

    double li = infer_latency(t, cfg.mode);
    double exec = s * t.dt_ctrl;
    double cycle = (cfg.mode == Mode::Sync) ? li + exec : exec;

    RunTrace trace;
    trace.d = ds.d;
    trace.s = s;
    trace.duration = cfg.duration;
    for (double tt = 0.0; tt < cfg.duration; tt += cycle) trace.trigger_times.push_back(tt);

    // Controller occupancy: sync stalls for the full latency each cycle.
    trace.total_ticks = static_cast<long>(std::floor(cfg.duration / t.dt_ctrl));
    if (cfg.mode == Mode::Sync) {
        long cycles = static_cast<long>(std::floor(cfg.duration / cycle));
        trace.stall_ticks = static_cast<long>(std::llround(cycles * li / t.dt_ctrl));
    }

    Rng rng(cfg.seed);
    // Keep one full cycle of headroom so every event is answered in-window.
    double event_hi = cfg.duration - 2.0 * cycle - li;
    if (cfg.num_events > 0 && event_hi <= 0.0)
        throw std::invalid_argument("simulate: duration too short for events");
    for (int i = 0; i < cfg.num_events; ++i) {
        double e = rng.uniform(0.0, event_hi);
        env::ReactionEvent ev;
        ev.time = e;
        trace.events.push_back(ev);
        // First trigger at or after the event observes it; its first action
        // executes one effective latency later.
        double next_trigger = std::ceil(e / cycle) * cycle;
        trace.protocol_reactions.push_back(next_trigger + li - e);
        trace.behavioral_reactions.push_back(-1.0);
    }
    return trace;
}

// ---- env-driven simulation ----

namespace {

struct PendingChunk {
    uint32_t id = 0;
    double obs_time = 0.0;
    Mat chunk;                      // de-normalized H x A
    std::vector<double> avail;      // per-index availability time (seconds)
    int first_index = 0;            // first executable row
};

}  // namespace

RunTrace simulate_env(const SimConfig& cfg, const flow::FlowModel& model,
                      const env::EnvConfig& env_cfg) {
    check_timing(cfg.timing);
    const TimingModel& t = cfg.timing;
    const int H = model.H;
    auto ds = delay_and_smin(t, cfg.mode, cfg.sched);
    const int d = cfg.d_override.value_or(ds.d);
    const int s = cfg.s > 0 ? cfg.s : ds.s_min;
    if (cfg.mode != Mode::Sync && s < ds.s_min)
        throw std::invalid_argument("simulate: s below s_min is infeasible for async modes");
    if (d < 0 || d >= H || s < 1 || s > H - d)
        throw std::invalid_argument("simulate: infeasible (d, s) for this horizon");

    const long ticks = static_cast<long>(std::floor(cfg.duration / t.dt_ctrl));
    RunTrace trace;
    trace.d = d;
    trace.s = s;
    trace.duration = cfg.duration;

    Rng rng(cfg.seed);
    env::WorldState world;
    world.px = rng.uniform(-0.5, 0.5);
    world.py = rng.uniform(-0.5, 0.5);
    world.tx = rng.uniform(-1.0, 1.0);
    world.ty = rng.uniform(-1.0, 1.0);

    env::EventSchedule jumps = env::make_event_schedule(ticks, env_cfg, cfg.seed ^ 0x5eedu);

    const double full_latency = t.dt_vlm + t.steps * t.dt_ae + t.overhead;
    uint32_t next_chunk_id = 1;
    std::map<long, std::pair<env::ExecutedAction, double>> schedule_by_tick;  // action, avail time
    Mat prev_chunk;  // previous sampled chunk (de-normalized)
    bool have_prev = false;
    long next_trigger_tick = 0;
    double server_free_at = 0.0;

    auto sample_chunk = [&](double now, const Vec& obs) {
        PendingChunk pc;
        pc.id = next_chunk_id++;
        pc.obs_time = now;
        double start = std::max(now, server_free_at);

        Mat prefix(0, model.A);
        int req_d = 0;
        if ((cfg.mode == Mode::AsyncPrefix || cfg.mode == Mode::Faster) && have_prev && d > 0) {
            req_d = d;
            prefix = Mat(d, model.A);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < model.A; ++j)
                    prefix.at(i, j) = prev_chunk.at(std::min(s + i, H - 1), j);
        }

        if (cfg.mode == Mode::Faster) {
            flow::SamplerConfig sc;
            sc.N = t.steps;
            sc.alpha = cfg.sched.alpha;
            sc.u_d = cfg.sched.u_d;
            sc.early_stop = true;
            // The early-stop window must reach the last executed index d+s-1
            // even when this request carries a shorter prefix (warmup).
            sc.s = std::min(d + s - req_d, H - req_d);
            auto [chunk, str] = flow::sample_model_has(model, obs, req_d, prefix, sc, rng);
            pc.chunk = std::move(chunk);
            pc.avail.assign(H, std::numeric_limits<double>::infinity());
            for (int i = req_d; i < H; ++i)
                if (str.finalize_step[i] > 0)
                    pc.avail[i] = start + t.dt_vlm + str.finalize_step[i] * t.dt_ae + t.overhead;
            server_free_at = start + t.dt_vlm + str.steps_used * t.dt_ae + t.overhead;
        } else {
            auto [chunk, str] = flow::sample_model_constant(model, obs, t.steps, req_d, prefix, rng);
            (void)str;
            pc.chunk = std::move(chunk);
            double arrival = start + full_latency;
            pc.avail.assign(H, arrival);
            server_free_at = arrival;
        }
        pc.first_index = d;
        return pc;
    };

    auto schedule_chunk = [&](const PendingChunk& pc, long first_exec_tick) {
        for (int m = 0; m < s && pc.first_index + m < H; ++m) {
            long tick = first_exec_tick + m;
            int idx = pc.first_index + m;
            env::ExecutedAction a;
            a.obs_time = pc.obs_time;
            a.chunk_id = pc.id;
            a.index = idx;
            a.ax = pc.chunk.at(idx, 0);
            a.ay = pc.chunk.at(idx, 1);
            schedule_by_tick[tick] = {a, pc.avail[idx]};
        }
    };

    size_t next_jump = 0;
    bool sync_waiting = false;
    double sync_arrival = 0.0;
    PendingChunk sync_chunk;

    for (long tick = 0; tick < ticks; ++tick) {
        double now = tick * t.dt_ctrl;

        if (next_jump < jumps.jump_times.size() && jumps.jump_times[next_jump] == tick) {
            env::ReactionEvent ev;
            ev.time = now;
            ev.px = world.px;
            ev.py = world.py;
            ev.new_tx = jumps.jump_targets[next_jump][0];
            ev.new_ty = jumps.jump_targets[next_jump][1];
            trace.events.push_back(ev);
            world.tx = ev.new_tx;
            world.ty = ev.new_ty;
            next_jump++;
        }

        if (cfg.mode == Mode::Sync) {
            if (sync_waiting && now + 1e-9 >= sync_arrival) {
                schedule_chunk(sync_chunk, tick);
                sync_waiting = false;
            }
            bool buffer_empty = schedule_by_tick.lower_bound(tick) == schedule_by_tick.end();
            if (!sync_waiting && buffer_empty) {
                trace.trigger_times.push_back(now);
                sync_chunk = sample_chunk(now, world.observation());
                sync_chunk.first_index = 0;  // sync executes from the chunk head
                sync_arrival = sync_chunk.avail[0];
                sync_waiting = true;
            }
        } else {
            if (tick == next_trigger_tick) {
                trace.trigger_times.push_back(now);
                PendingChunk pc = sample_chunk(now, world.observation());
                prev_chunk = pc.chunk;
                have_prev = true;
                schedule_chunk(pc, tick + d + 1);
                next_trigger_tick += s;
            }
        }

        auto it = schedule_by_tick.find(tick);
        bool executed = false;
        if (it != schedule_by_tick.end()) {
            const auto& [action, avail] = it->second;
            if (avail <= now + 1e-9) {
                env::ExecutedAction a = action;
                a.exec_time = now;
                trace.executed.push_back(a);
                env::step(world, a.ax, a.ay);
                executed = true;
            }
        }
        trace.total_ticks++;
        if (!executed) {
            // For async pipelines the first d+1 ticks are warmup, not stalls.
            if (cfg.mode == Mode::Sync || tick > d) trace.stall_ticks++;
            world.tick++;  // time passes, the controller holds position
        }
        schedule_by_tick.erase(schedule_by_tick.begin(), schedule_by_tick.upper_bound(tick));
    }

    for (const auto& ev : trace.events) {
        // Skip events too close to the end to be answered.
        if (ev.time > cfg.duration - 3.0 * std::max(full_latency, s * t.dt_ctrl)) break;
        auto r = env::measure_reaction(trace.executed, ev);
        if (r.protocol >= 0.0) {
            trace.protocol_reactions.push_back(r.protocol);
            trace.behavioral_reactions.push_back(r.behavioral.value_or(-1.0));
        }
    }
    return trace;
}

// ---- comparison tables ----

std::vector<ModeRow> compare_modes(const TimingModel& t, const ScheduleSpec& sched) {
    std::vector<ModeRow> rows;
    for (Mode m : {Mode::Sync, Mode::AsyncNaive, Mode::Faster}) {
        auto ds = delay_and_smin(t, m, sched);
        auto dist = reaction_distribution(t, m, ds.s_min, sched);
        ModeRow r;
        r.mode = m;
        r.ttfa_ms = infer_latency(t, m) * 1e3;
        r.smin = ds.s_min;
        r.expected_react_ms = dist.mean() * 1e3;
        r.lo_ms = dist.lo * 1e3;
        r.hi_ms = dist.hi * 1e3;
        double li = infer_latency(t, m);
        r.stall_fraction = (m == Mode::Sync) ? li / (li + ds.s_min * t.dt_ctrl) : 0.0;
        rows.push_back(r);
    }
    return rows;
}

Speedups speedup_vs_async(const std::vector<ModeRow>& rows) {
    const ModeRow* async_row = nullptr;
    const ModeRow* faster_row = nullptr;
    for (const auto& r : rows) {
        if (r.mode == Mode::AsyncNaive) async_row = &r;
        if (r.mode == Mode::Faster) faster_row = &r;
    }
    if (!async_row || !faster_row) throw std::invalid_argument("speedup: need async and faster rows");
    Speedups s;
    s.ttfa = async_row->ttfa_ms / faster_row->ttfa_ms;
    s.smin = static_cast<double>(async_row->smin) / faster_row->smin;
    s.react = async_row->expected_react_ms / faster_row->expected_react_ms;
    return s;
}

std::vector<DominancePair> dominance_matrix(const TimingModel& t, const ScheduleSpec& sched) {
    const Mode modes[] = {Mode::Sync, Mode::AsyncNaive, Mode::Faster};
    std::vector<DominancePair> out;
    for (Mode a : modes) {
        auto da = delay_and_smin(t, a, sched);
        auto dista = reaction_distribution(t, a, da.s_min, sched);
        for (Mode b : modes) {
            if (a == b) continue;
            auto db = delay_and_smin(t, b, sched);
            auto distb = reaction_distribution(t, b, db.s_min, sched);
            out.push_back({a, b, dominance_probability(dista, distb)});
        }
    }
    return out;
}

}  // namespace hasflow::pipeline
