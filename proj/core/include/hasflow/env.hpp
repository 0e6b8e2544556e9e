#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "hasflow/flow.hpp"
#include "hasflow/mat.hpp"
#include "hasflow/rng.hpp"

namespace hasflow::env {

// Workspace is [-1, 1]^2; actions are commanded planar velocities in
// workspace units per control period, so kinematics advance p += a per tick.
inline constexpr double kWorkspaceHalf = 1.0;

struct WorldState {
    double px = 0.0, py = 0.0;  // point mass position
    double tx = 0.0, ty = 0.0;  // target position
    long tick = 0;

    Vec observation() const { return {px, py, tx, ty}; }
};

struct EnvConfig {
    // The expert gain is drawn per episode and is not observable, mimicking
    // demonstrator variability: with the speed cap binding early on, near-term
    // actions are pinned down by the observation while far-horizon actions
    // diverge across gains.
    double gain_lo = 0.1;
    double gain_hi = 0.6;
    double v_max = 0.03;          // speed cap, workspace units per tick
    double mean_jump_interval = 12.0;  // ticks between target jumps (geometric)
    double min_jump_dist = 0.8;   // targets move at least this far

    double mean_gain() const { return 0.5 * (gain_lo + gain_hi); }
};

struct EventSchedule {
    std::vector<long> jump_times;                    // strictly increasing ticks
    std::vector<std::array<double, 2>> jump_targets; // same length
    uint64_t seed = 0;
};

struct TickRecord {
    int episode = 0;
    long tick = 0;
    Vec obs;    // length 4
    Mat chunk;  // H x 2 expert chunk
};

struct DatasetMeta {
    int episodes = 0;
    long episode_len = 0;
    int H = 0;
    EnvConfig env;
    uint64_t seed = 0;
};

struct Dataset {
    DatasetMeta meta;
    std::vector<TickRecord> records;
};

// a = gain * (target - position), magnitude clipped to v_max.
std::array<double, 2> expert_action(const WorldState& s, double gain, double v_max);

// Rolls p += a forward H steps with the target held fixed, recording actions.
Mat expert_chunk(const WorldState& s, int H, double gain, double v_max);

// Advances the state by one executed action, clamping to the workspace.
void step(WorldState& s, double ax, double ay);

EventSchedule make_event_schedule(long duration_ticks, const EnvConfig& cfg, uint64_t seed);

// Writes JSON-Lines: a header record followed by one record per tick
// {"ep":..,"t":..,"obs":[4],"chunk":[[2] x H]}. Byte-identical under a fixed
// seed.
void generate_dataset(const std::string& path, int num_episodes, long episode_len, int H,
                      const EnvConfig& cfg, uint64_t seed);

Dataset load_dataset(const std::string& path);

std::vector<flow::TrainSample> to_train_samples(const Dataset& ds);

// One executed action with its provenance, as recorded by clients and the
// simulator.
struct ExecutedAction {
    double exec_time = 0.0;   // seconds
    double obs_time = 0.0;    // capture time of the chunk's observation
    double ax = 0.0, ay = 0.0;
    uint32_t chunk_id = 0;
    int index = 0;            // row within the chunk
};

struct ReactionEvent {
    double time = 0.0;          // seconds
    double new_tx = 0.0, new_ty = 0.0;
    double px = 0.0, py = 0.0;  // position when the event fired
};

struct ReactionSample {
    double protocol = -1.0;                 // seconds; < 0 when not covered
    std::optional<double> behavioral;       // absent when the policy never reorients
};

// Protocol reaction: first execution of an action whose observation was
// captured at or after the event. Behavioral reaction (secondary metric):
// first executed action whose direction is within 30 degrees of the
// post-event target bearing.
ReactionSample measure_reaction(const std::vector<ExecutedAction>& trace,
                                const ReactionEvent& event);

}  // namespace hasflow::env
