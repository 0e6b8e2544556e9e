#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hasflow/env.hpp"
#include "hasflow/flow.hpp"
#include "hasflow/schedule.hpp"

namespace hasflow::pipeline {

enum class Mode { Sync, AsyncNaive, AsyncPrefix, Faster };

const char* mode_name(Mode m);
Mode mode_from_name(const std::string& name);

// Constant-latency timing model driving both the closed-form reaction math
// and the simulator. All durations in seconds.
struct TimingModel {
    double dt_ctrl = 1.0 / 30.0;
    double dt_vlm = 0.0;       // backbone prefill
    double dt_ae = 0.0;        // one sampler step
    int steps = 10;            // N
    double overhead = 0.0;     // network + processing per request
    // Extra allowance charged against the streaming path when sizing the
    // Faster execution horizon. Bulk replies pay serialization once; the
    // streaming path pays it per packet, which the two-latency fit cannot
    // see. 10ms sits in the measured per-packet range on real deployments.
    double stream_margin = 0.010;
};

// Solves dt_vlm and dt_ae from a (full latency, time-to-first-action) pair:
// full = dt_vlm + N*dt_ae + overhead, ttfa = dt_vlm + dt_ae + overhead.
TimingModel fit_timing(double full_latency, double ttfa, int N, double dt_ctrl,
                       double overhead = 0.0);

// Full-chunk latency for Sync/Async, TTFA for Faster.
double infer_latency(const TimingModel& t, Mode mode);

// Hit-time parameters used when sizing the Faster pipeline.
struct ScheduleSpec {
    int H = 50;
    double alpha = 0.6;
    double u_d = 0.9;
};

struct DelaySmin {
    int d = 0;
    int s_min = 1;
    int steps_used = 0;      // sampler steps behind the Faster s_min
    double latency = 0.0;    // effective latency behind the Faster s_min
};

// Sync/Async: d = floor(full/dt_ctrl), s_min = ceil(full/dt_ctrl).
// Faster: smallest s with s*dt_ctrl >= dt_vlm + steps(s)*dt_ae + overhead +
// stream_margin, where steps(s) counts sampler steps until [d, d+s-1] all
// finalize; d is the fixed point of floor(latency/dt_ctrl).
DelaySmin delay_and_smin(const TimingModel& t, Mode mode, const ScheduleSpec& sched = {});

struct UniformDist {
    double lo = 0.0;
    double hi = 0.0;
    double mean() const { return 0.5 * (lo + hi); }
};

// Sync: U(infer, 2*infer + exec); Async/Faster: U(infer, infer + exec) with
// the mode's effective latency and exec = s*dt_ctrl.
UniformDist reaction_distribution(const TimingModel& t, Mode mode, int s,
                                  const ScheduleSpec& sched = {});

// Exact P(X < Y) for independent X ~ a, Y ~ b.
double dominance_probability(const UniformDist& a, const UniformDist& b);

struct SimConfig {
    Mode mode = Mode::AsyncNaive;
    int s = 0;  // execution horizon; 0 selects s_min
    std::optional<int> d_override;
    TimingModel timing;
    ScheduleSpec sched;
    double duration = 60.0;  // seconds
    int num_events = 0;
    uint64_t seed = 0;
};

struct RunTrace {
    std::vector<double> trigger_times;
    std::vector<env::ExecutedAction> executed;
    std::vector<env::ReactionEvent> events;
    std::vector<double> protocol_reactions;    // seconds, one per covered event
    std::vector<double> behavioral_reactions;  // -1 when absent
    long stall_ticks = 0;
    long total_ticks = 0;
    double duration = 0.0;
    int d = 0;
    int s = 0;
    bool truncated = false;

    double stall_fraction() const {
        return total_ticks > 0 ? static_cast<double>(stall_ticks) / total_ticks : 0.0;
    }
};

// Latency-model-only simulation on a continuous timeline; events are placed
// uniformly over the run and reactions measured against the trigger/execution
// schedule. Deterministic per seed.
RunTrace simulate_scripted(const SimConfig& cfg);

// Tick-resolution simulation of a client driving the toy env with the flow
// policy; latencies are virtual (from the timing model), so runs are
// deterministic and faster than real time.
RunTrace simulate_env(const SimConfig& cfg, const flow::FlowModel& model,
                      const env::EnvConfig& env_cfg);

struct ModeRow {
    Mode mode;
    double ttfa_ms = 0.0;
    int smin = 0;
    double expected_react_ms = 0.0;
    double lo_ms = 0.0;
    double hi_ms = 0.0;
    double stall_fraction = 0.0;
};

// Canonical three-row comparison (sync, async, faster) at s = s_min.
std::vector<ModeRow> compare_modes(const TimingModel& t, const ScheduleSpec& sched);

struct DominancePair {
    Mode a;
    Mode b;
    double p_faster = 0.0;  // P(reaction_a < reaction_b)
};

std::vector<DominancePair> dominance_matrix(const TimingModel& t, const ScheduleSpec& sched);

// Relative gains of the streaming mode over the async baseline.
struct Speedups {
    double ttfa = 1.0;
    double smin = 1.0;
    double react = 1.0;
};

Speedups speedup_vs_async(const std::vector<ModeRow>& rows);

}  // namespace hasflow::pipeline
