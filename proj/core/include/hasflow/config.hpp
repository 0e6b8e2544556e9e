#pragma once

#include <cstdint>
#include <string>

#include "hasflow/env.hpp"
#include "hasflow/flow.hpp"
#include "hasflow/pipeline.hpp"

namespace hasflow::config {

struct ScheduleSection {
    double alpha = 0.6;
    double u_d = 0.9;
    double p = 0.5;
    int d_max = 10;
};

struct TrainSection {
    int epochs = 30;
    int batch_size = 32;
    double lr = 2e-3;
    double beta1 = 0.9;
    double beta2 = 0.95;
    double weight_decay = 0.0;
    double grad_clip = 1.0;
    double holdout_frac = 0.1;
    std::vector<int> hidden = {128, 128};
};

struct EnvSection {
    int H = 50;
    int episodes = 200;
    long episode_len = 300;
    double gain_lo = 0.1;
    double gain_hi = 0.6;
    double v_max = 0.03;
    double mean_jump_interval = 12.0;
    double min_jump_dist = 0.8;
};

struct TimingSection {
    double dt_ctrl_ms = 1000.0 / 30.0;
    double dt_vlm_ms = 55.0;
    double dt_ae_ms = 7.0;
    int N = 10;
    double overhead_ms = 0.0;
    double stream_margin_ms = 10.0;
};

struct WireSection {
    std::string host = "127.0.0.1";
    uint16_t port = 7461;
    std::string mode = "faster";  // sync | async | async-prefix | faster
    int s = 0;                    // 0 selects s_min
    int d_override = -1;          // < 0 selects the derived delay
    double duration_s = 10.0;
};

struct Config {
    EnvSection env;
    TrainSection train;
    ScheduleSection schedule;
    TimingSection timing;
    WireSection wire;
};

// Loads JSON, applying defaults field-by-field. Unknown keys anywhere are an
// error (exit code 2 paths in the CLI).
Config load_config(const std::string& path);
Config parse_config(const std::string& json_text);
std::string dump_config(const Config& c);

// FNV-1a over the canonical dump; changes iff any effective parameter does.
uint64_t config_hash(const Config& c);

pipeline::TimingModel to_timing_model(const Config& c);
pipeline::ScheduleSpec to_schedule_spec(const Config& c);
env::EnvConfig to_env_config(const Config& c);
flow::TrainConfig to_train_config(const Config& c, uint64_t seed);

// Writes out_dir/manifest.json with seed, config hash, and tool version.
void write_manifest(const std::string& out_dir, const Config& c, uint64_t seed);

}  // namespace hasflow::config
