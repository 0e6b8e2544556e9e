#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hasflow/mat.hpp"
#include "hasflow/neural.hpp"
#include "hasflow/rng.hpp"
#include "hasflow/schedule.hpp"

namespace hasflow::flow {

// An action chunk is an H x A matrix, one future action per row.
using ActionChunk = Mat;

// Velocity field callback; all three tensors live in the model's normalized
// space. Tests inject analytic oracles through this hook.
using VelocityFn =
    std::function<void(const Vec& obs, const Mat& noisy, const Vec& tau, Mat& out)>;

// Per-action receiver invoked the step an action finalizes. `action` points
// at A de-normalized values.
using DispatchFn = std::function<void(int index, const double* action, int step)>;

struct Normalization {
    Vec obs_mean, obs_scale;  // length O
    Vec act_mean, act_scale;  // length A
};

struct FlowModel {
    neural::DenseNet net;
    int H = 0, A = 0, O = 0;
    Normalization norm;

    // net input = concat(obs_n, flattened noisy chunk, per-index timesteps)
    int expected_input_dim() const { return O + H * A + H; }
    VelocityFn velocity_fn() const;
};

Vec normalize_obs(const FlowModel& m, const Vec& obs);
Mat normalize_chunk(const FlowModel& m, const Mat& chunk);
void denormalize_chunk_inplace(const FlowModel& m, Mat& chunk);
Vec denormalize_action(const FlowModel& m, const double* action);

struct SamplerConfig {
    int N = 10;
    double alpha = 0.6;
    double u_d = -1.0;        // < 0 means the default (N-1)/N
    bool early_stop = false;
    int s = 0;                // execution horizon; 0 means H - d
    DispatchFn sink;          // optional
    bool record_clean = false;
    // Test hook: when non-empty, used instead of hit_times(H, d, alpha, u_d).
    std::vector<double> hit_override;

    double effective_u_d() const { return u_d > 0.0 ? u_d : (N - 1.0) / N; }
};

struct SampleTrace {
    std::vector<double> rho;            // global timestep per executed step
    std::vector<int> finalize_step;     // per index; 0 on the prefix
    int steps_used = 0;
    bool early_stopped = false;
    std::vector<Mat> clean_estimates;   // per executed step, if requested
};

// Row i of the result is tau_i * noise_i + (1 - tau_i) * clean_i.
Mat interpolate(const Mat& clean, const Mat& noise, const schedule::TimestepVector& tau);

// One-shot extrapolation toward tau = 0: row i = noisy_i - velocity_i * tau_i.
Mat clean_estimate(const Mat& noisy, const Mat& velocity, const schedule::TimestepVector& tau);

// Constant-schedule Euler sampling: N uniform steps, every valid action
// finalizes at the last one. Inputs and outputs in the vfn's space; `prefix`
// (d x A) overwrites rows [0, d) before every network call.
std::pair<ActionChunk, SampleTrace> sample_constant(const VelocityFn& vfn, const Vec& obs, int H,
                                                    int A, int N, int d, const Mat& prefix,
                                                    Rng& rng, const SamplerConfig& cfg = {});

// Horizon-aware sampling: per-index local timesteps from hit times, rowwise
// Euler updates, streaming dispatch the step each index's next timestep
// reaches zero, optional early stop once [d, d+s-1] are all finalized.
std::pair<ActionChunk, SampleTrace> sample_has(const VelocityFn& vfn, const Vec& obs, int H, int A,
                                               int d, const Mat& prefix, const SamplerConfig& cfg,
                                               Rng& rng);

// Convenience wrappers that normalize obs/prefix, run in model space, and
// de-normalize both the returned chunk and dispatched actions.
std::pair<ActionChunk, SampleTrace> sample_model_constant(const FlowModel& model, const Vec& obs,
                                                          int N, int d, const Mat& prefix,
                                                          Rng& rng);
std::pair<ActionChunk, SampleTrace> sample_model_has(const FlowModel& model, const Vec& obs, int d,
                                                     const Mat& prefix, const SamplerConfig& cfg,
                                                     Rng& rng);

// Masked flow-matching loss (normalized space): ||m (x) (v - (eps - clean))||^2 / ||m||_1,
// mask broadcast across action dims. Gradients are accumulated into `grads`.
double training_loss(const FlowModel& model, const Vec& obs_raw, const Mat& clean_raw,
                     const Mat& noise, const schedule::ScheduleSample& sched,
                     neural::ParamGrads* grads);

struct TrainSample {
    Vec obs;    // raw observation, length O
    Mat chunk;  // raw expert chunk, H x A
};

struct TrainConfig {
    int epochs = 3;
    int batch_size = 32;
    double p = 0.5;       // HAS mixing probability
    int d_max = 10;
    double alpha = 0.6;
    double u_d = 0.9;
    int N = 10;
    std::vector<int> hidden = {256, 256};
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.95;
    double adam_eps = 1e-8;
    double weight_decay = 0.0;
    double grad_clip = 1.0;
    double holdout_frac = 0.1;
    uint64_t seed = 0;
};

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;       // mixed-schedule loss over the epoch
    double holdout_loss = 0.0;     // mixed-schedule loss on held-out samples
    double holdout_fm_loss = 0.0;  // constant-schedule d=0 loss on held-out samples
};

struct TrainResult {
    FlowModel model;
    std::vector<EpochStats> log;
    double init_holdout_fm_loss = 0.0;
};

using EpochCallback = std::function<void(const EpochStats&)>;

TrainResult train(const std::vector<TrainSample>& dataset, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

// Pilot-study metrics over an eval set, computed with constant-schedule
// sampling at d = 0. The noise seed varies per eval sample.
struct PilotReport {
    Vec straightness_mean;  // per index
    Vec straightness_p05;
    Vec straightness_p95;
    Mat deviation;          // N x H, mean l2 distance of clean estimate to final
};

PilotReport pilot_study(const FlowModel& model, const std::vector<Vec>& eval_obs_raw, int N,
                        uint64_t seed);

Vec straightness(const FlowModel& model, const std::vector<Vec>& eval_obs_raw, int N,
                 uint64_t seed);
Mat deviation_curves(const FlowModel& model, const std::vector<Vec>& eval_obs_raw, int N,
                     uint64_t seed);

// Flow checkpoint = FCNET1 net blob followed by H, A, O (u32 LE) and the
// normalization vectors (f32 LE).
void save_model(const std::string& path, const FlowModel& model);
FlowModel load_model(const std::string& path);

}  // namespace hasflow::flow
