#include <benchmark/benchmark.h>

#include "hasflow/flow.hpp"
#include "hasflow/pipeline.hpp"
#include "hasflow/schedule.hpp"
#include "hasflow/wire.hpp"

using namespace hasflow;

static void BM_HitTimes(benchmark::State& state) {
    const int H = static_cast<int>(state.range(0));
    for (auto _ : state) {
        auto u = schedule::hit_times(H, 3, 0.6, 0.9);
        benchmark::DoNotOptimize(u.values.data());
    }
}
BENCHMARK(BM_HitTimes)->Arg(30)->Arg(50)->Arg(100);

static void BM_LocalTimesteps(benchmark::State& state) {
    auto u = schedule::hit_times(50, 3, 0.6, 0.9);
    double rho = 0.7;
    for (auto _ : state) {
        auto tau = schedule::local_timesteps(rho, u);
        benchmark::DoNotOptimize(tau.values.data());
    }
}
BENCHMARK(BM_LocalTimesteps);

static void BM_SamplerStepMlp(benchmark::State& state) {
    // one velocity-net forward at the default toy dimensions
    Rng rng(1);
    const int H = 50, A = 2, O = 4;
    neural::DenseNet net = neural::make_mlp({O + H * A + H, 256, 256, H * A}, rng);
    Vec x(O + H * A + H);
    for (auto& v : x) v = rng.normal();
    for (auto _ : state) {
        Vec y = neural::forward(net, x);
        benchmark::DoNotOptimize(y.data());
    }
}
BENCHMARK(BM_SamplerStepMlp);

static void BM_SampleHasChunk(benchmark::State& state) {
    const int H = 50, A = 2, N = 10;
    Mat target(H, A);
    flow::VelocityFn vfn = [&](const Vec&, const Mat& noisy, const Vec&, Mat& out) {
        out = noisy;  // placeholder field; measures the sampler loop itself
    };
    Vec obs;
    Mat no_prefix(0, A);
    flow::SamplerConfig cfg;
    cfg.N = N;
    cfg.early_stop = true;
    cfg.s = 4;
    uint64_t seed = 0;
    for (auto _ : state) {
        Rng rng(seed++);
        auto [chunk, trace] = flow::sample_has(vfn, obs, H, A, 0, no_prefix, cfg, rng);
        benchmark::DoNotOptimize(chunk.data.data());
        benchmark::DoNotOptimize(trace.steps_used);
    }
}
BENCHMARK(BM_SampleHasChunk);

static void BM_EncodeDecodeActionPacket(benchmark::State& state) {
    wire::ActionPacket pkt;
    pkt.chunk_id = 7;
    pkt.index = 12;
    pkt.action = {0.25f, -0.5f};
    pkt.step = 3;
    pkt.server_us = 123456789;
    for (auto _ : state) {
        auto bytes = wire::encode(pkt);
        wire::FrameReader reader;
        reader.feed(bytes.data(), bytes.size());
        auto f = reader.next();
        auto back = wire::decode_action_packet(*f, 2);
        benchmark::DoNotOptimize(back.index);
    }
}
BENCHMARK(BM_EncodeDecodeActionPacket);

static void BM_DominanceClosedForm(benchmark::State& state) {
    pipeline::UniformDist a{0.0621, 0.1621}, b{0.080, 0.180};
    for (auto _ : state) {
        double p = pipeline::dominance_probability(a, b);
        benchmark::DoNotOptimize(p);
    }
}
BENCHMARK(BM_DominanceClosedForm);

static void BM_ScriptedSim10kEvents(benchmark::State& state) {
    pipeline::SimConfig cfg;
    cfg.mode = pipeline::Mode::AsyncNaive;
    cfg.timing = pipeline::fit_timing(0.080, 0.0621, 10, 1.0 / 30.0);
    cfg.duration = 3600.0;
    cfg.num_events = 10000;
    for (auto _ : state) {
        auto tr = pipeline::simulate_scripted(cfg);
        benchmark::DoNotOptimize(tr.protocol_reactions.data());
    }
}
BENCHMARK(BM_ScriptedSim10kEvents);

BENCHMARK_MAIN();
