#include "hasflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace hasflow::flow {

using schedule::TimestepVector;

VelocityFn FlowModel::velocity_fn() const {
    const FlowModel* self = this;
    return [self](const Vec& obs, const Mat& noisy, const Vec& tau, Mat& out) {
        Vec x(self->expected_input_dim());
        std::copy(obs.begin(), obs.end(), x.begin());
        std::copy(noisy.data.begin(), noisy.data.end(), x.begin() + self->O);
        std::copy(tau.begin(), tau.end(), x.begin() + self->O + self->H * self->A);
        Vec y = neural::forward(self->net, x);
        out = Mat(self->H, self->A);
        std::copy(y.begin(), y.end(), out.data.begin());
    };
}

Mat interpolate(const Mat& clean, const Mat& noise, const TimestepVector& tau) {
    if (clean.rows != noise.rows || clean.cols != noise.cols ||
        static_cast<int>(tau.values.size()) != clean.rows)
        throw std::invalid_argument("interpolate: shape mismatch");
    Mat out(clean.rows, clean.cols);
    for (int i = 0; i < clean.rows; ++i) {
        double t = tau.values[i];
        const double* c = clean.row(i);
        const double* n = noise.row(i);
        double* o = out.row(i);
        for (int j = 0; j < clean.cols; ++j) o[j] = t * n[j] + (1.0 - t) * c[j];
    }
    return out;
}

Mat clean_estimate(const Mat& noisy, const Mat& velocity, const TimestepVector& tau) {
    if (noisy.rows != velocity.rows || noisy.cols != velocity.cols ||
        static_cast<int>(tau.values.size()) != noisy.rows)
        throw std::invalid_argument("clean_estimate: shape mismatch");
    Mat out(noisy.rows, noisy.cols);
    for (int i = 0; i < noisy.rows; ++i) {
        double t = tau.values[i];
        const double* n = noisy.row(i);
        const double* v = velocity.row(i);
        double* o = out.row(i);
        for (int j = 0; j < noisy.cols; ++j) o[j] = n[j] - v[j] * t;
    }
    return out;
}

static void check_prefix_shape(const Mat& prefix, int d, int A) {
    if (d > 0 && (prefix.rows < d || prefix.cols != A))
        throw std::invalid_argument("sampler: prefix must be at least d x A");
}

static Mat gaussian_chunk(int H, int A, Rng& rng) {
    Mat m(H, A);
    for (auto& v : m.data) v = rng.normal();
    return m;
}

// Shared Euler loop. Both samplers are instances of it; the constant sampler
// passes a schedule with all-zero hit times, under which every local timestep
// equals the global one.
static std::pair<ActionChunk, SampleTrace> run_sampler(const VelocityFn& vfn, const Vec& obs,
                                                       int H, int A, int d, const Mat& prefix,
                                                       const schedule::HitTimes& hits,
                                                       const SamplerConfig& cfg, Rng& rng) {
    if (H < 1 || d < 0 || d >= H) throw std::invalid_argument("sampler: need 0 <= d < H");
    if (cfg.N < 1) throw std::invalid_argument("sampler: N must be >= 1");
    check_prefix_shape(prefix, d, A);
    const int s = cfg.s > 0 ? cfg.s : (H - d);
    if (s < 1 || s > H - d) throw std::invalid_argument("sampler: need 1 <= s <= H - d");

    const int N = cfg.N;
    Mat chunk = gaussian_chunk(H, A, rng);
    SampleTrace trace;
    trace.finalize_step.assign(H, 0);
    std::vector<uint8_t> dispatched(H, 0);

    Mat vel;
    for (int j = 1; j <= N; ++j) {
        double rho = static_cast<double>(N - j + 1) / N;
        double rho_next = static_cast<double>(N - j) / N;  // rho^{N+1} := 0
        TimestepVector tau = schedule::local_timesteps(rho, hits);
        TimestepVector tau_next = schedule::local_timesteps(rho_next, hits);
        trace.rho.push_back(rho);

        for (int i = 0; i < d; ++i)
            std::copy(prefix.row(i), prefix.row(i) + A, chunk.row(i));

        vfn(obs, chunk, tau.values, vel);
        if (vel.rows != H || vel.cols != A) throw std::invalid_argument("velocity shape mismatch");

        if (cfg.record_clean) trace.clean_estimates.push_back(clean_estimate(chunk, vel, tau));

        for (int i = d; i < H; ++i) {
            double dt = tau_next.values[i] - tau.values[i];
            if (dt != 0.0) {
                double* c = chunk.row(i);
                const double* v = vel.row(i);
                for (int k = 0; k < A; ++k) c[k] += v[k] * dt;
            }
        }

        trace.steps_used = j;
        for (int i = d; i < H; ++i) {
            if (!dispatched[i] && tau_next.values[i] <= schedule::kFinalizeTol) {
                dispatched[i] = 1;
                trace.finalize_step[i] = j;
                if (cfg.sink) cfg.sink(i, chunk.row(i), j);
            }
        }

        if (cfg.early_stop) {
            bool window_done = true;
            for (int i = d; i < d + s; ++i) window_done = window_done && dispatched[i];
            if (window_done && j < N) {
                trace.early_stopped = true;
                break;
            }
        }
    }
    return {std::move(chunk), std::move(trace)};
}

std::pair<ActionChunk, SampleTrace> sample_constant(const VelocityFn& vfn, const Vec& obs, int H,
                                                    int A, int N, int d, const Mat& prefix,
                                                    Rng& rng, const SamplerConfig& cfg_in) {
    SamplerConfig cfg = cfg_in;
    cfg.N = N;
    cfg.early_stop = false;
    schedule::HitTimes zero;
    zero.values.assign(H, 0.0);
    zero.prefix_len = d;
    return run_sampler(vfn, obs, H, A, d, prefix, zero, cfg, rng);
}

std::pair<ActionChunk, SampleTrace> sample_has(const VelocityFn& vfn, const Vec& obs, int H, int A,
                                               int d, const Mat& prefix, const SamplerConfig& cfg,
                                               Rng& rng) {
    schedule::HitTimes hits;
    if (!cfg.hit_override.empty()) {
        if (static_cast<int>(cfg.hit_override.size()) != H)
            throw std::invalid_argument("hit_override must have length H");
        hits.values = cfg.hit_override;
        hits.prefix_len = d;
    } else if (cfg.effective_u_d() <= 0.0) {
        // N = 1 degenerates to u_d = 0: everything finalizes on the only step.
        hits.values.assign(H, 0.0);
        hits.prefix_len = d;
    } else {
        hits = schedule::hit_times(H, d, cfg.alpha, cfg.effective_u_d());
    }
    return run_sampler(vfn, obs, H, A, d, prefix, hits, cfg, rng);
}

// ---- normalization helpers ----

Vec normalize_obs(const FlowModel& m, const Vec& obs) {
    if (static_cast<int>(obs.size()) != m.O) throw std::invalid_argument("obs dimension mismatch");
    Vec o(obs.size());
    for (size_t i = 0; i < obs.size(); ++i)
        o[i] = (obs[i] - m.norm.obs_mean[i]) / m.norm.obs_scale[i];
    return o;
}

Mat normalize_chunk(const FlowModel& m, const Mat& chunk) {
    Mat out(chunk.rows, chunk.cols);
    for (int i = 0; i < chunk.rows; ++i)
        for (int j = 0; j < chunk.cols; ++j)
            out.at(i, j) = (chunk.at(i, j) - m.norm.act_mean[j]) / m.norm.act_scale[j];
    return out;
}

void denormalize_chunk_inplace(const FlowModel& m, Mat& chunk) {
    for (int i = 0; i < chunk.rows; ++i)
        for (int j = 0; j < chunk.cols; ++j)
            chunk.at(i, j) = chunk.at(i, j) * m.norm.act_scale[j] + m.norm.act_mean[j];
}

Vec denormalize_action(const FlowModel& m, const double* action) {
    Vec out(m.A);
    for (int j = 0; j < m.A; ++j) out[j] = action[j] * m.norm.act_scale[j] + m.norm.act_mean[j];
    return out;
}

static SamplerConfig wrap_sink_denorm(const FlowModel& model, const SamplerConfig& cfg) {
    SamplerConfig wrapped = cfg;
    if (cfg.sink) {
        DispatchFn inner = cfg.sink;
        const Normalization* norm = &model.norm;
        int A = model.A;
        wrapped.sink = [inner, norm, A](int index, const double* action, int step) {
            Vec denorm(A);
            for (int j = 0; j < A; ++j) denorm[j] = action[j] * norm->act_scale[j] + norm->act_mean[j];
            inner(index, denorm.data(), step);
        };
    }
    return wrapped;
}

std::pair<ActionChunk, SampleTrace> sample_model_constant(const FlowModel& model, const Vec& obs,
                                                          int N, int d, const Mat& prefix,
                                                          Rng& rng) {
    Vec obs_n = normalize_obs(model, obs);
    Mat prefix_n = d > 0 ? normalize_chunk(model, prefix) : Mat(0, model.A);
    auto [chunk, trace] =
        sample_constant(model.velocity_fn(), obs_n, model.H, model.A, N, d, prefix_n, rng);
    denormalize_chunk_inplace(model, chunk);
    return {std::move(chunk), std::move(trace)};
}

std::pair<ActionChunk, SampleTrace> sample_model_has(const FlowModel& model, const Vec& obs, int d,
                                                     const Mat& prefix, const SamplerConfig& cfg,
                                                     Rng& rng) {
    Vec obs_n = normalize_obs(model, obs);
    Mat prefix_n = d > 0 ? normalize_chunk(model, prefix) : Mat(0, model.A);
    SamplerConfig wrapped = wrap_sink_denorm(model, cfg);
    auto [chunk, trace] =
        sample_has(model.velocity_fn(), obs_n, model.H, model.A, d, prefix_n, wrapped, rng);
    denormalize_chunk_inplace(model, chunk);
    return {std::move(chunk), std::move(trace)};
}

// ---- training ----

double training_loss(const FlowModel& model, const Vec& obs_raw, const Mat& clean_raw,
                     const Mat& noise, const schedule::ScheduleSample& sched,
                     neural::ParamGrads* grads) {
    if (sched.mask.count_ones < 1) throw std::invalid_argument("training_loss: all-zero mask");
    const int H = model.H, A = model.A;
    if (clean_raw.rows != H || clean_raw.cols != A || noise.rows != H || noise.cols != A)
        throw std::invalid_argument("training_loss: chunk shape mismatch");

    Vec obs_n = normalize_obs(model, obs_raw);
    Mat clean_n = normalize_chunk(model, clean_raw);
    // Prefix rows of the interpolant automatically equal the clean actions
    // because their timestep is zero (action conditioning).
    Mat noisy = interpolate(clean_n, noise, sched.tau);

    Vec x(model.expected_input_dim());
    std::copy(obs_n.begin(), obs_n.end(), x.begin());
    std::copy(noisy.data.begin(), noisy.data.end(), x.begin() + model.O);
    std::copy(sched.tau.values.begin(), sched.tau.values.end(), x.begin() + model.O + H * A);

    neural::ForwardCache cache;
    neural::forward_cached(model.net, x, cache);

    const double inv_count = 1.0 / sched.mask.count_ones;
    double loss = 0.0;
    Vec upstream(static_cast<size_t>(H) * A, 0.0);
    for (int i = 0; i < H; ++i) {
        if (!sched.mask.bits[i]) continue;
        for (int j = 0; j < A; ++j) {
            double target = noise.at(i, j) - clean_n.at(i, j);
            double r = cache.output[static_cast<size_t>(i) * A + j] - target;
            loss += r * r;
            upstream[static_cast<size_t>(i) * A + j] = 2.0 * r * inv_count;
        }
    }
    loss *= inv_count;
    if (grads != nullptr) neural::backward(model.net, cache, upstream, *grads);
    return loss;
}

static Normalization compute_normalization(const std::vector<TrainSample>& data, int O, int A) {
    Normalization n;
    n.obs_mean.assign(O, 0.0);
    n.obs_scale.assign(O, 0.0);
    n.act_mean.assign(A, 0.0);
    n.act_scale.assign(A, 0.0);
    size_t obs_count = 0, act_count = 0;
    for (const auto& s : data) {
        for (int i = 0; i < O; ++i) n.obs_mean[i] += s.obs[i];
        obs_count++;
        for (int r = 0; r < s.chunk.rows; ++r)
            for (int j = 0; j < A; ++j) n.act_mean[j] += s.chunk.at(r, j);
        act_count += s.chunk.rows;
    }
    for (int i = 0; i < O; ++i) n.obs_mean[i] /= obs_count;
    for (int j = 0; j < A; ++j) n.act_mean[j] /= act_count;
    for (const auto& s : data) {
        for (int i = 0; i < O; ++i) {
            double dd = s.obs[i] - n.obs_mean[i];
            n.obs_scale[i] += dd * dd;
        }
        for (int r = 0; r < s.chunk.rows; ++r)
            for (int j = 0; j < A; ++j) {
                double dd = s.chunk.at(r, j) - n.act_mean[j];
                n.act_scale[j] += dd * dd;
            }
    }
    for (int i = 0; i < O; ++i) n.obs_scale[i] = std::max(std::sqrt(n.obs_scale[i] / obs_count), 1e-6);
    for (int j = 0; j < A; ++j) n.act_scale[j] = std::max(std::sqrt(n.act_scale[j] / act_count), 1e-6);
    return n;
}

static double eval_loss(const FlowModel& model, const std::vector<TrainSample>& data,
                        const std::vector<size_t>& idx, const TrainConfig& cfg, bool mixed,
                        uint64_t seed) {
    Rng rng(seed);
    double total = 0.0;
    for (size_t k : idx) {
        const TrainSample& s = data[k];
        Mat noise(model.H, model.A);
        for (auto& v : noise.data) v = rng.normal();
        schedule::ScheduleSample sched;
        if (mixed) {
            sched = schedule::sample_training_schedule(rng, model.H, cfg.alpha, cfg.u_d, cfg.p,
                                                       cfg.d_max);
        } else {
            // Plain conditional flow-matching draw: constant schedule, d = 0.
            sched.rho = rng.uniform();
            sched.d = 0;
            sched.kind = schedule::ScheduleKind::Constant;
            sched.tau = schedule::constant_timesteps(sched.rho, model.H, 0);
            sched.mask = schedule::prefix_mask(model.H, 0);
        }
        total += training_loss(model, s.obs, s.chunk, noise, sched, nullptr);
    }
    return idx.empty() ? 0.0 : total / idx.size();
}

TrainResult train(const std::vector<TrainSample>& dataset, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
    if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
    const int H = dataset.front().chunk.rows;
    const int A = dataset.front().chunk.cols;
    const int O = static_cast<int>(dataset.front().obs.size());
    if (cfg.d_max >= H) throw std::invalid_argument("train: d_max must be < H");
    if (cfg.epochs < 1 || cfg.batch_size < 1) throw std::invalid_argument("train: bad budget");

    Rng rng(cfg.seed);
    TrainResult result;
    FlowModel& model = result.model;
    model.H = H;
    model.A = A;
    model.O = O;
    model.norm = compute_normalization(dataset, O, A);

    std::vector<int> dims;
    dims.push_back(O + H * A + H);
    dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
    dims.push_back(H * A);
    model.net = neural::make_mlp(dims, rng);

    // Deterministic holdout split from the tail of a seeded shuffle.
    std::vector<size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);
    for (size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.uniform_int(0, static_cast<int>(i) - 1)]);
    size_t holdout_n = std::min(dataset.size() - 1,
                                static_cast<size_t>(cfg.holdout_frac * dataset.size()));
    std::vector<size_t> holdout(order.end() - holdout_n, order.end());
    std::vector<size_t> train_idx(order.begin(), order.end() - holdout_n);

    const uint64_t eval_seed = cfg.seed ^ 0x9e3779b97f4a7c15ull;
    result.init_holdout_fm_loss = eval_loss(model, dataset, holdout, cfg, false, eval_seed);

    neural::AdamState opt = neural::AdamState::init(model.net, cfg.lr, cfg.beta1, cfg.beta2,
                                                    cfg.adam_eps, cfg.weight_decay);
    neural::ParamGrads grads = neural::ParamGrads::zeros_like(model.net);

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        for (size_t i = train_idx.size(); i > 1; --i)
            std::swap(train_idx[i - 1], train_idx[rng.uniform_int(0, static_cast<int>(i) - 1)]);

        double epoch_loss = 0.0;
        size_t seen = 0;
        for (size_t start = 0; start < train_idx.size(); start += cfg.batch_size) {
            size_t end = std::min(train_idx.size(), start + cfg.batch_size);
            grads.zero();
            double batch_loss = 0.0;
            for (size_t k = start; k < end; ++k) {
                const TrainSample& s = dataset[train_idx[k]];
                Mat noise(H, A);
                for (auto& v : noise.data) v = rng.normal();
                auto sched =
                    schedule::sample_training_schedule(rng, H, cfg.alpha, cfg.u_d, cfg.p, cfg.d_max);
                batch_loss += training_loss(model, s.obs, s.chunk, noise, sched, &grads);
            }
            double inv = 1.0 / static_cast<double>(end - start);
            grads.scale(inv);
            neural::clip_grad_norm(grads, cfg.grad_clip);
            neural::adam_step(opt, model.net, grads);
            epoch_loss += batch_loss;
            seen += end - start;
        }

        EpochStats st;
        st.epoch = epoch;
        st.train_loss = epoch_loss / static_cast<double>(seen);
        st.holdout_loss = eval_loss(model, dataset, holdout, cfg, true, eval_seed + epoch);
        st.holdout_fm_loss = eval_loss(model, dataset, holdout, cfg, false, eval_seed);
        result.log.push_back(st);
        if (on_epoch) on_epoch(st);
    }
    return result;
}

// ---- pilot study ----

PilotReport pilot_study(const FlowModel& model, const std::vector<Vec>& eval_obs_raw, int N,
                        uint64_t seed) {
    if (eval_obs_raw.empty()) throw std::invalid_argument("pilot_study: empty eval set");
    const int H = model.H, A = model.A;
    const VelocityFn vfn = model.velocity_fn();
    const Mat no_prefix(0, A);

    PilotReport rep;
    rep.deviation = Mat(N, H);
    std::vector<Vec> per_sample_s(eval_obs_raw.size(), Vec(H, 0.0));

    for (size_t si = 0; si < eval_obs_raw.size(); ++si) {
        // Per-sample noise seed (the eval expectation ranges over both data
        // and noise draws).
        Rng rng(seed + si);
        Vec obs_n = normalize_obs(model, eval_obs_raw[si]);

        std::vector<Mat> velocities;
        // Run the constant-schedule Euler loop inline so A^1 and each v^j
        // stay visible.
        Mat chunk(H, A);
        for (auto& v : chunk.data) v = rng.normal();
        Mat initial = chunk;
        Mat vel;
        std::vector<Mat> clean_ests;
        for (int j = 1; j <= N; ++j) {
            double rho = static_cast<double>(N - j + 1) / N;
            auto tau = schedule::constant_timesteps(rho, H, 0);
            vfn(obs_n, chunk, tau.values, vel);
            velocities.push_back(vel);
            clean_ests.push_back(clean_estimate(chunk, vel, tau));
            double dt = -1.0 / N;
            for (int i = 0; i < H; ++i) {
                double* c = chunk.row(i);
                const double* v = vel.row(i);
                for (int k = 0; k < A; ++k) c[k] += v[k] * dt;
            }
        }
        const Mat& final_chunk = chunk;

        for (int j = 0; j < N; ++j) {
            for (int i = 0; i < H; ++i) {
                double s2 = 0.0, dev2 = 0.0;
                for (int k = 0; k < A; ++k) {
                    double disp = initial.at(i, k) - final_chunk.at(i, k);
                    double dvel = disp - velocities[j].at(i, k);
                    s2 += dvel * dvel;
                    double dc = clean_ests[j].at(i, k) - final_chunk.at(i, k);
                    dev2 += dc * dc;
                }
                per_sample_s[si][i] += s2 / N;
                rep.deviation.at(j, i) += std::sqrt(dev2);
            }
        }
    }

    const double inv_n = 1.0 / static_cast<double>(eval_obs_raw.size());
    for (auto& v : rep.deviation.data) v *= inv_n;

    rep.straightness_mean.assign(H, 0.0);
    rep.straightness_p05.assign(H, 0.0);
    rep.straightness_p95.assign(H, 0.0);
    Vec column(eval_obs_raw.size());
    for (int i = 0; i < H; ++i) {
        for (size_t si = 0; si < eval_obs_raw.size(); ++si) {
            rep.straightness_mean[i] += per_sample_s[si][i];
            column[si] = per_sample_s[si][i];
        }
        rep.straightness_mean[i] *= inv_n;
        std::sort(column.begin(), column.end());
        auto pct = [&](double q) {
            double pos = q * (column.size() - 1);
            size_t lo = static_cast<size_t>(pos);
            size_t hi = std::min(lo + 1, column.size() - 1);
            double frac = pos - lo;
            return column[lo] * (1.0 - frac) + column[hi] * frac;
        };
        rep.straightness_p05[i] = pct(0.05);
        rep.straightness_p95[i] = pct(0.95);
    }
    return rep;
}

Vec straightness(const FlowModel& model, const std::vector<Vec>& eval_obs_raw, int N,
                 uint64_t seed) {
    return pilot_study(model, eval_obs_raw, N, seed).straightness_mean;
}

Mat deviation_curves(const FlowModel& model, const std::vector<Vec>& eval_obs_raw, int N,
                     uint64_t seed) {
    return pilot_study(model, eval_obs_raw, N, seed).deviation;
}

// ---- checkpoint io ----

static void put_u32f(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

static uint32_t take_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw std::runtime_error("flow checkpoint truncated");
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

static void put_f32v(std::ostream& os, const Vec& v) {
    for (double x : v) {
        float f = static_cast<float>(x);
        uint32_t u;
        std::memcpy(&u, &f, 4);
        put_u32f(os, u);
    }
}

static Vec take_f32v(std::istream& is, size_t n) {
    Vec out(n);
    for (size_t i = 0; i < n; ++i) {
        uint32_t u = take_u32(is);
        float f;
        std::memcpy(&f, &u, 4);
        out[i] = f;
    }
    return out;
}

void save_model(const std::string& path, const FlowModel& model) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    neural::save_net(os, model.net);
    put_u32f(os, static_cast<uint32_t>(model.H));
    put_u32f(os, static_cast<uint32_t>(model.A));
    put_u32f(os, static_cast<uint32_t>(model.O));
    put_f32v(os, model.norm.obs_mean);
    put_f32v(os, model.norm.obs_scale);
    put_f32v(os, model.norm.act_mean);
    put_f32v(os, model.norm.act_scale);
    if (!os) throw std::runtime_error("checkpoint write failed: " + path);
}

FlowModel load_model(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
    FlowModel m;
    m.net = neural::load_net(is);
    m.H = static_cast<int>(take_u32(is));
    m.A = static_cast<int>(take_u32(is));
    m.O = static_cast<int>(take_u32(is));
    if (m.net.input_dim != m.expected_input_dim() || m.net.output_dim != m.H * m.A)
        throw std::runtime_error("checkpoint dimensions inconsistent with net");
    m.norm.obs_mean = take_f32v(is, m.O);
    m.norm.obs_scale = take_f32v(is, m.O);
    m.norm.act_mean = take_f32v(is, m.A);
    m.norm.act_scale = take_f32v(is, m.A);
    return m;
}

}  // namespace hasflow::flow
