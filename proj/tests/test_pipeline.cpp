#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "hasflow/pipeline.hpp"

using namespace hasflow;
using namespace hasflow::pipeline;

namespace {

constexpr double kCtrl = 1.0 / 30.0;

TimingModel fitted(double full_ms, double ttfa_ms) {
    TimingModel t = fit_timing(full_ms * 1e-3, ttfa_ms * 1e-3, 10, kCtrl);
    t.stream_margin = 0.010;
    return t;
}

// Monte Carlo oracle for P(X < Y); independent of the closed form.
double dominance_mc(const UniformDist& a, const UniformDist& b, int n, uint64_t seed) {
    Rng rng(seed);
    int wins = 0;
    for (int i = 0; i < n; ++i) {
        double x = rng.uniform(a.lo, a.hi);
        double y = rng.uniform(b.lo, b.hi);
        if (x < y) wins++;
    }
    return static_cast<double>(wins) / n;
}

}  // namespace

TEST_CASE("infer_latency arithmetic and the two-latency fit") {
    TimingModel t;
    t.dt_ctrl = kCtrl;
    t.dt_vlm = 0.0;
    t.dt_ae = 0.008;
    t.steps = 10;
    CHECK(infer_latency(t, Mode::AsyncNaive) == doctest::Approx(0.080));
    CHECK(infer_latency(t, Mode::Faster) == doctest::Approx(0.008));

    TimingModel f = fitted(80.0, 62.1);
    CHECK(f.dt_ae * 1e3 == doctest::Approx(1.98889).epsilon(1e-4));
    CHECK((f.dt_vlm + f.dt_ae + f.overhead) * 1e3 == doctest::Approx(62.1));
    CHECK(infer_latency(f, Mode::Sync) * 1e3 == doctest::Approx(80.0));
    CHECK(infer_latency(f, Mode::Faster) * 1e3 == doctest::Approx(62.1));

    CHECK_THROWS_AS(fit_timing(0.05, 0.08, 10, kCtrl), std::invalid_argument);
}

TEST_CASE("delay_and_smin: floor/ceil for bulk modes") {
    TimingModel t = fitted(80.0, 62.1);
    auto ds = delay_and_smin(t, Mode::AsyncNaive);
    CHECK(ds.d == 2);       // floor(80 / 33.3)
    CHECK(ds.s_min == 3);   // ceil(80 / 33.3)
    auto sync = delay_and_smin(t, Mode::Sync);
    CHECK(sync.s_min == 3);

    auto lo = delay_and_smin(fitted(303.3, 238.6), Mode::AsyncNaive);
    CHECK(lo.d == 9);
    CHECK(lo.s_min == 10);
    CHECK(delay_and_smin(fitted(113.7, 44.8), Mode::AsyncNaive).s_min == 4);
    CHECK(delay_and_smin(fitted(399.5, 129.2), Mode::AsyncNaive).s_min == 12);
}

TEST_CASE("delay_and_smin: Faster early-stop horizon across the reference profiles") {
    ScheduleSpec a50{50, 0.6, 0.9};
    ScheduleSpec a30{30, 0.6, 0.9};

    CHECK(delay_and_smin(fitted(80.0, 62.1), Mode::Faster, a50).s_min == 3);
    CHECK(delay_and_smin(fitted(303.3, 238.6), Mode::Faster, a50).s_min == 8);
    CHECK(delay_and_smin(fitted(113.7, 44.8), Mode::Faster, a30).s_min == 2);
    CHECK(delay_and_smin(fitted(399.5, 129.2), Mode::Faster, a30).s_min == 6);

    // the two spec-pinned cells hold with the streaming margin removed too
    TimingModel lo = fitted(303.3, 238.6);
    lo.stream_margin = 0.0;
    CHECK(delay_and_smin(lo, Mode::Faster, a50).s_min == 8);
    TimingModel hi = fitted(113.7, 44.8);
    hi.stream_margin = 0.0;
    CHECK(delay_and_smin(hi, Mode::Faster, a30).s_min == 2);

    // fixed-point delay and step count for the consumer-GPU large profile
    auto ds = delay_and_smin(fitted(303.3, 238.6), Mode::Faster, a50);
    CHECK(ds.d == 7);
    CHECK(ds.steps_used == 2);
}

TEST_CASE("reaction_distribution matches the reference table rows") {
    ScheduleSpec a50{50, 0.6, 0.9};
    TimingModel hi = fitted(80.0, 62.1);

    auto sync = reaction_distribution(hi, Mode::Sync, 3);
    CHECK(sync.lo * 1e3 == doctest::Approx(80.0));
    CHECK(sync.hi * 1e3 == doctest::Approx(260.0));
    CHECK(sync.mean() * 1e3 == doctest::Approx(170.0));

    auto async = reaction_distribution(hi, Mode::AsyncNaive, 3);
    CHECK(async.lo * 1e3 == doctest::Approx(80.0));
    CHECK(async.hi * 1e3 == doctest::Approx(180.0));
    CHECK(async.mean() * 1e3 == doctest::Approx(130.0));

    auto fast = reaction_distribution(hi, Mode::Faster, 3, a50);
    CHECK(fast.lo * 1e3 == doctest::Approx(62.1));
    CHECK(fast.hi * 1e3 == doctest::Approx(162.1));
    CHECK(fast.mean() * 1e3 == doctest::Approx(112.1));

    ScheduleSpec a30{30, 0.6, 0.9};
    auto xlo = reaction_distribution(fitted(399.5, 129.2), Mode::Faster, 6, a30);
    CHECK(xlo.lo * 1e3 == doctest::Approx(129.2));
    CHECK(xlo.hi * 1e3 == doctest::Approx(329.2));

    CHECK_THROWS_AS(reaction_distribution(hi, Mode::AsyncNaive, 2), std::invalid_argument);
}

TEST_CASE("dominance_probability: reference values, closed form vs Monte Carlo") {
    struct Case {
        UniformDist a, b;
        double expect;
    };
    // all nine two-decimal reference entries
    std::vector<Case> cases = {
        {{0.0621, 0.1621}, {0.080, 0.180}, 0.66},
        {{0.080, 0.180}, {0.080, 0.260}, 0.72},
        {{0.0621, 0.1621}, {0.080, 0.260}, 0.81},
        {{0.3033, 0.6366333}, {0.3033, 0.9399333}, 0.74},
        {{0.2386, 0.5052667}, {0.3033, 0.9399333}, 0.88},
        {{0.2386, 0.5052667}, {0.3033, 0.6366333}, 0.77},
        {{0.1137, 0.2470333}, {0.1137, 0.3607333}, 0.73},
        {{0.3995, 0.7995}, {0.3995, 1.199}, 0.75},
        {{0.0448, 0.1114667}, {0.1137, 0.2470333}, 1.00},
    };
    int idx = 0;
    for (const auto& c : cases) {
        double p = dominance_probability(c.a, c.b);
        CHECK(std::fabs(p - c.expect) < 0.005);
        double mc = dominance_mc(c.a, c.b, 1000000, 1000 + idx);
        CHECK(std::fabs(p - mc) < 0.005);
        idx++;
    }

    UniformDist u{1.0, 2.0};
    CHECK(dominance_probability(u, u) == doctest::Approx(0.5));
    CHECK(dominance_probability({0.0, 1.0}, {2.0, 3.0}) == doctest::Approx(1.0));
    CHECK(dominance_probability({2.0, 3.0}, {0.0, 1.0}) == doctest::Approx(0.0));
}

TEST_CASE("scripted simulation: events at triggers hit the lower bound") {
    SimConfig cfg;
    cfg.mode = Mode::AsyncNaive;
    cfg.timing = fitted(80.0, 62.1);
    cfg.duration = 600.0;
    cfg.num_events = 0;
    auto tr = simulate_scripted(cfg);
    REQUIRE(!tr.trigger_times.empty());
    CHECK(tr.s == 3);
    CHECK(tr.stall_ticks == 0);

    // manual reaction query at an exact trigger time
    double li = infer_latency(cfg.timing, Mode::AsyncNaive);
    double cycle = tr.s * cfg.timing.dt_ctrl;
    double e = 5 * cycle;
    double next_trigger = std::ceil(e / cycle) * cycle;
    CHECK(next_trigger + li - e == doctest::Approx(li));
}

TEST_CASE("scripted simulation: distribution law per mode") {
    for (Mode mode : {Mode::Sync, Mode::AsyncNaive, Mode::Faster}) {
        SimConfig cfg;
        cfg.mode = mode;
        cfg.timing = fitted(80.0, 62.1);
        cfg.sched = {50, 0.6, 0.9};
        cfg.duration = 3600.0;
        cfg.num_events = 10000;
        cfg.seed = 11;
        auto tr = simulate_scripted(cfg);
        REQUIRE(tr.protocol_reactions.size() == 10000);

        auto ds = delay_and_smin(cfg.timing, mode, cfg.sched);
        auto dist = reaction_distribution(cfg.timing, mode, ds.s_min, cfg.sched);
        double mean = 0.0, lo = 1e9, hi = -1e9;
        for (double r : tr.protocol_reactions) {
            mean += r;
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        mean /= tr.protocol_reactions.size();
        CHECK(std::fabs(mean - dist.mean()) / dist.mean() < 0.02);
        CHECK(lo >= dist.lo - 1e-9);
        CHECK(hi <= dist.hi + cfg.timing.dt_ctrl + 1e-9);
    }
}

TEST_CASE("scripted simulation: midpoint law at three standard errors") {
    SimConfig cfg;
    cfg.mode = Mode::AsyncNaive;
    cfg.timing = fitted(80.0, 62.1);
    cfg.duration = 36000.0;
    cfg.num_events = 100000;
    cfg.seed = 271828;
    auto tr = simulate_scripted(cfg);
    auto dist = reaction_distribution(cfg.timing, Mode::AsyncNaive, tr.s);
    double mean = 0.0;
    for (double r : tr.protocol_reactions) mean += r;
    mean /= tr.protocol_reactions.size();
    double width = dist.hi - dist.lo;
    double se = width / std::sqrt(12.0) / std::sqrt(static_cast<double>(tr.protocol_reactions.size()));
    CHECK(std::fabs(mean - dist.mean()) < 3.0 * se);
}

TEST_CASE("scripted simulation: sync stall fraction and async feasibility") {
    SimConfig cfg;
    cfg.mode = Mode::Sync;
    cfg.timing = fitted(80.0, 62.1);
    cfg.duration = 1200.0;
    auto tr = simulate_scripted(cfg);
    double li = 0.080, exec = 3 * cfg.timing.dt_ctrl;
    CHECK(tr.stall_fraction() == doctest::Approx(li / (li + exec)).epsilon(0.05));

    SimConfig bad = cfg;
    bad.mode = Mode::AsyncNaive;
    bad.s = 2;  // below s_min = 3
    CHECK_THROWS_AS(simulate_scripted(bad), std::invalid_argument);
}

TEST_CASE("expected reaction is monotone in s and Faster dominates Async") {
    TimingModel t = fitted(80.0, 62.1);
    ScheduleSpec sched{50, 0.6, 0.9};
    double prev = 0.0;
    for (int s = 3; s <= 12; ++s) {
        double e = reaction_distribution(t, Mode::AsyncNaive, s).mean();
        CHECK(e >= prev);
        prev = e;
    }
    auto fa = delay_and_smin(t, Mode::Faster, sched);
    auto as = delay_and_smin(t, Mode::AsyncNaive, sched);
    CHECK(reaction_distribution(t, Mode::Faster, fa.s_min, sched).mean() <=
          reaction_distribution(t, Mode::AsyncNaive, as.s_min, sched).mean());
}

TEST_CASE("env simulation: bounds, no stalls at s_min, zero-stall async guarantee") {
    // tiny untrained model; protocol timing is independent of action values
    Rng rng(1);
    flow::FlowModel model;
    model.H = 12;
    model.A = 2;
    model.O = 4;
    model.net = neural::make_mlp({4 + 12 * 2 + 12, 16, 24}, rng);
    model.norm.obs_mean.assign(4, 0.0);
    model.norm.obs_scale.assign(4, 1.0);
    model.norm.act_mean.assign(2, 0.0);
    model.norm.act_scale.assign(2, 1.0);

    env::EnvConfig ecfg;
    ecfg.mean_jump_interval = 40.0;

    for (Mode mode : {Mode::AsyncNaive, Mode::AsyncPrefix, Mode::Faster}) {
        SimConfig cfg;
        cfg.mode = mode;
        cfg.timing.dt_ctrl = kCtrl;
        cfg.timing.dt_vlm = 0.030;
        cfg.timing.dt_ae = 0.007;
        cfg.timing.steps = 10;
        cfg.timing.stream_margin = 0.010;
        cfg.sched = {12, 0.6, 0.9};
        cfg.duration = 120.0;
        cfg.seed = 3;
        auto tr = simulate_env(cfg, model, ecfg);
        CHECK(tr.stall_ticks == 0);
        REQUIRE(!tr.protocol_reactions.empty());

        auto dist = reaction_distribution(cfg.timing, mode, tr.s, cfg.sched);
        for (double r : tr.protocol_reactions) {
            CHECK(r >= dist.lo - 1e-9);
            CHECK(r <= dist.hi + cfg.timing.dt_ctrl + 1e-9);
        }
    }

    // sync stalls while waiting for inference
    SimConfig cfg;
    cfg.mode = Mode::Sync;
    cfg.timing.dt_ctrl = kCtrl;
    cfg.timing.dt_vlm = 0.030;
    cfg.timing.dt_ae = 0.007;
    cfg.timing.steps = 10;
    cfg.sched = {12, 0.6, 0.9};
    cfg.duration = 60.0;
    cfg.seed = 4;
    auto tr = simulate_env(cfg, model, ecfg);
    CHECK(tr.stall_ticks > 0);
}

TEST_CASE("compare_modes table is internally consistent") {
    TimingModel t = fitted(80.0, 62.1);
    ScheduleSpec sched{50, 0.6, 0.9};
    auto rows = compare_modes(t, sched);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].mode == Mode::Sync);
    CHECK(rows[2].mode == Mode::Faster);
    CHECK(rows[0].expected_react_ms > rows[1].expected_react_ms);
    CHECK(rows[1].expected_react_ms > rows[2].expected_react_ms);
    CHECK(rows[0].stall_fraction > 0.0);
    CHECK(rows[1].stall_fraction == 0.0);

    auto dom = dominance_matrix(t, sched);
    CHECK(dom.size() == 6);
    for (const auto& p : dom) {
        CHECK(p.p_faster >= 0.0);
        CHECK(p.p_faster <= 1.0);
    }
}

TEST_CASE("speedup ratios reproduce the reference row and degenerate to 1.0") {
    // large-backbone, high-end tier: TTFA 80 -> 62.1, E[react] 130 -> 112.1
    auto rows = compare_modes(fitted(80.0, 62.1), {50, 0.6, 0.9});
    auto s = speedup_vs_async(rows);
    CHECK(s.ttfa == doctest::Approx(1.29).epsilon(0.005));
    CHECK(s.react == doctest::Approx(1.16).epsilon(0.005));
    CHECK(s.smin == doctest::Approx(1.0));

    // equal per-mode latencies (dt_ae = 0) leave nothing to gain
    TimingModel flat;
    flat.dt_ctrl = kCtrl;
    flat.dt_vlm = 0.080;
    flat.dt_ae = 0.0;
    flat.steps = 10;
    flat.stream_margin = 0.0;
    auto flat_rows = compare_modes(flat, {50, 0.6, 0.9});
    auto fs = speedup_vs_async(flat_rows);
    CHECK(fs.ttfa == doctest::Approx(1.0));
    CHECK(fs.smin == doctest::Approx(1.0));
    CHECK(fs.react == doctest::Approx(1.0));
}
