// hasflow: horizon-aware streaming flow-policy toolkit.
//
// Subcommands: gen-data | train | sample | pilot | simulate | compare |
// serve | client | reproduce. Each writes its artifacts to
// <out>/<name>/ with a manifest (seed, config hash, version).

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "hasflow/client.hpp"
#include "hasflow/config.hpp"
#include "hasflow/env.hpp"
#include "hasflow/flow.hpp"
#include "hasflow/pipeline.hpp"
#include "hasflow/server.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hasflow;

namespace {

struct Common {
    std::string config_path;
    std::string out_dir = "out";
    std::string name;
    uint64_t seed = 0;
};

config::Config load_or_default(const Common& common) {
    if (common.config_path.empty()) return config::Config{};
    return config::load_config(common.config_path);
}

std::string run_dir(const Common& common, const std::string& default_name) {
    std::string name = common.name.empty() ? default_name : common.name;
    std::string dir = common.out_dir + "/" + name;
    fs::create_directories(dir);
    return dir;
}

std::ofstream open_csv(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    return os;
}

void write_mode_table_csv(const std::string& path, const std::vector<pipeline::ModeRow>& rows) {
    auto os = open_csv(path);
    os << "mode,ttfa_ms,smin,expected_react_ms,lo_ms,hi_ms,stall_fraction\n";
    for (const auto& r : rows) {
        char line[256];
        std::snprintf(line, sizeof(line), "%s,%.1f,%d,%.1f,%.1f,%.1f,%.4f\n",
                      pipeline::mode_name(r.mode), r.ttfa_ms, r.smin, r.expected_react_ms, r.lo_ms,
                      r.hi_ms, r.stall_fraction);
        os << line;
    }
}

void write_dominance_csv(const std::string& path, const std::vector<pipeline::DominancePair>& m) {
    auto os = open_csv(path);
    os << "mode_a,mode_b,p_faster\n";
    for (const auto& p : m) {
        char line[128];
        std::snprintf(line, sizeof(line), "%s,%s,%.4f\n", pipeline::mode_name(p.a),
                      pipeline::mode_name(p.b), p.p_faster);
        os << line;
    }
}

void write_speedup_csv(const std::string& path, const std::vector<pipeline::ModeRow>& rows) {
    auto s = pipeline::speedup_vs_async(rows);
    auto os = open_csv(path);
    os << "mode,ttfa_speedup,smin_speedup,react_speedup\n";
    char line[128];
    std::snprintf(line, sizeof(line), "faster,%.2f,%.2f,%.2f\n", s.ttfa, s.smin, s.react);
    os << line;
}

void write_trace_jsonl(const std::string& path, const pipeline::RunTrace& tr) {
    std::ofstream os(path);
    os << json{{"d", tr.d},
               {"s", tr.s},
               {"duration", tr.duration},
               {"stall_ticks", tr.stall_ticks},
               {"total_ticks", tr.total_ticks},
               {"truncated", tr.truncated}}
              .dump()
       << "\n";
    for (const auto& e : tr.executed)
        os << json{{"type", "exec"},    {"t", e.exec_time}, {"obs_t", e.obs_time},
                   {"chunk", e.chunk_id}, {"index", e.index}, {"ax", e.ax},
                   {"ay", e.ay}}
                  .dump()
           << "\n";
    for (const auto& e : tr.events)
        os << json{{"type", "event"}, {"t", e.time}, {"tx", e.new_tx}, {"ty", e.new_ty}}.dump()
           << "\n";
    for (size_t i = 0; i < tr.protocol_reactions.size(); ++i)
        os << json{{"type", "reaction"},
                   {"protocol", tr.protocol_reactions[i]},
                   {"behavioral", tr.behavioral_reactions[i]}}
                  .dump()
           << "\n";
}

struct TimingProfile {
    std::string name;
    double full_ms = 0.0;
    double ttfa_ms = 0.0;
    int H = 50;
    double alpha = 0.6;
};

struct TimingFile {
    std::vector<TimingProfile> profiles;
    double dt_ctrl_ms = 1000.0 / 30.0;
    int N = 10;
    double u_d = 0.9;
    double stream_margin_ms = 10.0;
};

TimingFile load_timing_profiles(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open timing profiles: " + path);
    json j = json::parse(is);
    TimingFile tf;
    tf.dt_ctrl_ms = j.value("dt_ctrl_ms", tf.dt_ctrl_ms);
    tf.N = j.value("N", tf.N);
    tf.u_d = j.value("u_d", tf.u_d);
    tf.stream_margin_ms = j.value("stream_margin_ms", tf.stream_margin_ms);
    for (const auto& p : j.at("profiles")) {
        TimingProfile tp;
        tp.name = p.at("name").get<std::string>();
        tp.full_ms = p.at("full_ms").get<double>();
        tp.ttfa_ms = p.at("ttfa_ms").get<double>();
        tp.H = p.value("H", 50);
        tp.alpha = p.value("alpha", 0.6);
        tf.profiles.push_back(tp);
    }
    return tf;
}

std::vector<Vec> eval_obs_from_dataset(const env::Dataset& ds, int count, uint64_t seed) {
    Rng rng(seed);
    std::vector<Vec> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i)
        out.push_back(ds.records[rng.uniform_int(0, static_cast<int>(ds.records.size()) - 1)].obs);
    return out;
}

int cmd_gen_data(const Common& common, const config::Config& cfg) {
    std::string dir = run_dir(common, "gen-data");
    config::write_manifest(dir, cfg, common.seed);
    env::generate_dataset(dir + "/dataset.jsonl", cfg.env.episodes, cfg.env.episode_len, cfg.env.H,
                          config::to_env_config(cfg), common.seed);
    std::cout << "wrote " << dir << "/dataset.jsonl (" << cfg.env.episodes << " episodes x "
              << cfg.env.episode_len << " ticks, H=" << cfg.env.H << ")\n";
    return 0;
}

int cmd_train(const Common& common, const config::Config& cfg, const std::string& data_path) {
    std::string dir = run_dir(common, "train");
    config::write_manifest(dir, cfg, common.seed);
    env::Dataset ds = env::load_dataset(data_path);
    auto samples = env::to_train_samples(ds);
    auto tc = config::to_train_config(cfg, common.seed);

    std::ofstream log(dir + "/training_log.csv");
    log << "epoch,train_loss,holdout_loss,holdout_fm_loss\n";
    auto result = flow::train(samples, tc, [&](const flow::EpochStats& st) {
        char line[160];
        std::snprintf(line, sizeof(line), "%d,%.6f,%.6f,%.6f\n", st.epoch, st.train_loss,
                      st.holdout_loss, st.holdout_fm_loss);
        log << line;
        log.flush();
        std::cout << "epoch " << st.epoch << ": train " << st.train_loss << "  holdout "
                  << st.holdout_loss << "  holdout-fm " << st.holdout_fm_loss << "\n";
    });
    flow::save_model(dir + "/checkpoint.bin", result.model);
    double final_fm = result.log.back().holdout_fm_loss;
    std::cout << "init holdout-fm loss " << result.init_holdout_fm_loss << " -> final " << final_fm
              << " (" << result.init_holdout_fm_loss / std::max(final_fm, 1e-12) << "x)\n";
    std::cout << "wrote " << dir << "/checkpoint.bin\n";
    return 0;
}

int cmd_sample(const Common& common, const config::Config& cfg, const std::string& ckpt,
               const std::string& obs_str, const std::string& mode, int d, int s,
               const std::string& prefix_str) {
    std::string dir = run_dir(common, "sample");
    config::write_manifest(dir, cfg, common.seed);
    flow::FlowModel model = flow::load_model(ckpt);

    Vec obs;
    std::stringstream ss(obs_str);
    std::string tok;
    while (std::getline(ss, tok, ',')) obs.push_back(std::stod(tok));
    if (static_cast<int>(obs.size()) != model.O)
        throw std::runtime_error("sample: --obs needs " + std::to_string(model.O) + " values");

    Rng rng(common.seed);
    // prefix rows as "ax,ay;ax,ay;..."; missing rows are zero-filled
    Mat prefix(d, model.A);
    if (!prefix_str.empty()) {
        std::stringstream rows(prefix_str);
        std::string row;
        int r = 0;
        while (std::getline(rows, row, ';') && r < d) {
            std::stringstream cells(row);
            std::string cell;
            int c = 0;
            while (std::getline(cells, cell, ',') && c < model.A) prefix.at(r, c++) = std::stod(cell);
            r++;
        }
    }
    flow::ActionChunk chunk;
    flow::SampleTrace trace;
    if (mode == "constant") {
        std::tie(chunk, trace) = flow::sample_model_constant(model, obs, cfg.timing.N, d, prefix, rng);
    } else {
        flow::SamplerConfig sc;
        sc.N = cfg.timing.N;
        sc.alpha = cfg.schedule.alpha;
        sc.u_d = cfg.schedule.u_d;
        sc.early_stop = s > 0;
        sc.s = s;
        std::tie(chunk, trace) = flow::sample_model_has(model, obs, d, prefix, sc, rng);
    }
    auto os = open_csv(dir + "/chunk.csv");
    os << "index,ax,ay,finalize_step\n";
    for (int i = 0; i < model.H; ++i)
        os << i << "," << chunk.at(i, 0) << "," << chunk.at(i, 1) << "," << trace.finalize_step[i]
           << "\n";
    std::cout << "steps_used " << trace.steps_used << (trace.early_stopped ? " (early stop)" : "")
              << "; wrote " << dir << "/chunk.csv\n";
    return 0;
}

int cmd_pilot(const Common& common, const config::Config& cfg, const std::string& ckpt,
              const std::string& data_path, int samples) {
    std::string dir = run_dir(common, "pilot");
    config::write_manifest(dir, cfg, common.seed);
    flow::FlowModel model = flow::load_model(ckpt);
    env::Dataset ds = env::load_dataset(data_path);
    auto eval_obs = eval_obs_from_dataset(ds, samples, common.seed + 1);

    auto rep = flow::pilot_study(model, eval_obs, cfg.timing.N, common.seed + 2);

    auto os = open_csv(dir + "/straightness.csv");
    os << "index,straightness,p05,p95\n";
    for (int i = 0; i < model.H; ++i)
        os << i << "," << rep.straightness_mean[i] << "," << rep.straightness_p05[i] << ","
           << rep.straightness_p95[i] << "\n";

    auto os2 = open_csv(dir + "/deviation.csv");
    os2 << "step,index,deviation\n";
    for (int j = 0; j < rep.deviation.rows; ++j)
        for (int i = 0; i < rep.deviation.cols; ++i)
            os2 << (j + 1) << "," << i << "," << rep.deviation.at(j, i) << "\n";

    // Trend summary: first 20% of indices vs last 20%.
    int H = model.H;
    int band = std::max(1, H / 5);
    auto band_mean = [&](const Vec& v, bool early) {
        double s = 0.0;
        for (int i = 0; i < band; ++i) s += v[early ? i : H - 1 - i];
        return s / band;
    };
    double s_early = band_mean(rep.straightness_mean, true);
    double s_late = band_mean(rep.straightness_mean, false);
    Vec dev1(rep.deviation.row(0), rep.deviation.row(0) + H);
    double d_early = band_mean(dev1, true);
    double d_late = band_mean(dev1, false);
    std::cout << "straightness early/late: " << s_early << " / " << s_late << " (margin "
              << s_late - s_early << ")\n";
    std::cout << "step-1 deviation early/late: " << d_early << " / " << d_late << " (margin "
              << d_late - d_early << ")\n";
    std::ofstream(dir + "/trend.json")
        << json{{"straightness_early", s_early},
                {"straightness_late", s_late},
                {"deviation1_early", d_early},
                {"deviation1_late", d_late}}
               .dump(2)
        << "\n";
    return 0;
}

int cmd_simulate(const Common& common, const config::Config& cfg, const std::string& mode,
                 int events, double duration, int s, const std::string& ckpt) {
    std::string dir = run_dir(common, "simulate");
    config::write_manifest(dir, cfg, common.seed);

    pipeline::SimConfig sim;
    sim.mode = pipeline::mode_from_name(mode);
    sim.s = s;
    sim.timing = config::to_timing_model(cfg);
    sim.sched = config::to_schedule_spec(cfg);
    sim.duration = duration;
    sim.num_events = events;
    sim.seed = common.seed;

    pipeline::RunTrace tr;
    if (ckpt.empty()) {
        tr = pipeline::simulate_scripted(sim);
    } else {
        flow::FlowModel model = flow::load_model(ckpt);
        tr = pipeline::simulate_env(sim, model, config::to_env_config(cfg));
    }
    write_trace_jsonl(dir + "/trace.jsonl", tr);

    auto os = open_csv(dir + "/reactions.csv");
    os << "protocol_s,behavioral_s\n";
    double mean = 0.0;
    for (size_t i = 0; i < tr.protocol_reactions.size(); ++i) {
        os << tr.protocol_reactions[i] << "," << tr.behavioral_reactions[i] << "\n";
        mean += tr.protocol_reactions[i];
    }
    if (!tr.protocol_reactions.empty()) mean /= tr.protocol_reactions.size();
    std::cout << "mode " << mode << " d=" << tr.d << " s=" << tr.s << ": "
              << tr.protocol_reactions.size() << " reactions, mean " << mean * 1e3
              << " ms, stall fraction " << tr.stall_fraction() << "\n";
    return 0;
}

int cmd_compare(const Common& common, const config::Config& cfg) {
    std::string dir = run_dir(common, "compare");
    config::write_manifest(dir, cfg, common.seed);
    auto t = config::to_timing_model(cfg);
    auto sched = config::to_schedule_spec(cfg);
    auto rows = pipeline::compare_modes(t, sched);
    write_mode_table_csv(dir + "/modes.csv", rows);
    write_dominance_csv(dir + "/dominance.csv", pipeline::dominance_matrix(t, sched));
    write_speedup_csv(dir + "/speedup.csv", rows);
    std::cout << "wrote " << dir << "/modes.csv, dominance.csv, speedup.csv\n";
    return 0;
}

int cmd_serve(const config::Config& cfg, const std::string& ckpt, uint16_t port,
              const std::string& mode, uint64_t seed) {
    flow::FlowModel model = flow::load_model(ckpt);
    wire::ServeOptions opts;
    opts.port = port;
    opts.mode = mode == "constant" ? wire::ServerMode::Constant : wire::ServerMode::Streaming;
    opts.N = cfg.timing.N;
    opts.alpha = cfg.schedule.alpha;
    opts.u_d = cfg.schedule.u_d;
    opts.dt_vlm = cfg.timing.dt_vlm_ms * 1e-3;
    opts.dt_ae = cfg.timing.dt_ae_ms * 1e-3;
    opts.seed = seed;
    std::cout << "serving H=" << model.H << " A=" << model.A << " mode=" << mode << " on port "
              << port << " (SIGINT to stop)\n";
    wire::serve_forever(std::move(model), opts);
    return 0;
}

int cmd_client(const Common& common, const config::Config& cfg, const std::string& mode, int s,
               int d_override, double duration, uint16_t port) {
    std::string dir = run_dir(common, "client");
    config::write_manifest(dir, cfg, common.seed);
    wire::ClientOptions opts;
    opts.host = cfg.wire.host;
    opts.port = port != 0 ? port : cfg.wire.port;
    opts.mode = pipeline::mode_from_name(mode);
    opts.s = s;
    if (d_override >= 0) opts.d_override = d_override;
    opts.timing = config::to_timing_model(cfg);
    opts.sched = config::to_schedule_spec(cfg);
    opts.duration = duration;
    opts.env = config::to_env_config(cfg);
    opts.seed = common.seed;

    auto report = wire::run_client(opts);
    write_trace_jsonl(dir + "/trace.jsonl", report.trace);
    if (report.protocol_error) {
        std::cerr << "client error: " << report.error << "\n";
        return 1;
    }
    double react_mean = 0.0;
    for (double r : report.trace.protocol_reactions) react_mean += r;
    if (!report.trace.protocol_reactions.empty())
        react_mean /= report.trace.protocol_reactions.size();
    json summary{{"requests", report.requests},
                 {"packets", report.packets},
                 {"late_packets", report.late_packets},
                 {"ttfa_mean_ms", report.ttfa_mean() * 1e3},
                 {"stall_ticks", report.trace.stall_ticks},
                 {"total_ticks", report.trace.total_ticks},
                 {"reactions", report.trace.protocol_reactions.size()},
                 {"mean_protocol_reaction_ms", react_mean * 1e3},
                 {"d", report.trace.d},
                 {"s", report.trace.s}};
    std::ofstream(dir + "/client_report.json") << summary.dump(2) << "\n";
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int cmd_reproduce(const Common& common, const config::Config& cfg, const std::string& timings_path,
                  bool tables) {
    std::string dir = run_dir(common, "reproduce");
    config::write_manifest(dir, cfg, common.seed);
    if (!tables) {
        std::cerr << "reproduce: nothing to do (pass --tables)\n";
        return 1;
    }
    TimingFile tf = load_timing_profiles(timings_path);
    for (const auto& p : tf.profiles) {
        pipeline::TimingModel t =
            pipeline::fit_timing(p.full_ms * 1e-3, p.ttfa_ms * 1e-3, tf.N, tf.dt_ctrl_ms * 1e-3);
        t.stream_margin = tf.stream_margin_ms * 1e-3;
        pipeline::ScheduleSpec sched{p.H, p.alpha, tf.u_d};
        auto rows = pipeline::compare_modes(t, sched);
        auto dom = pipeline::dominance_matrix(t, sched);
        write_mode_table_csv(dir + "/tables_" + p.name + ".csv", rows);
        write_dominance_csv(dir + "/dominance_" + p.name + ".csv", dom);
        write_speedup_csv(dir + "/speedup_" + p.name + ".csv", rows);

        std::cout << p.name << " (full " << p.full_ms << " ms, ttfa " << p.ttfa_ms << " ms):\n";
        for (const auto& r : rows) {
            char line[256];
            std::snprintf(line, sizeof(line),
                          "  %-12s ttfa %7.1f ms  smin %2d  E[react] %7.1f ms  D=U(%.1f, %.1f)\n",
                          pipeline::mode_name(r.mode), r.ttfa_ms, r.smin, r.expected_react_ms,
                          r.lo_ms, r.hi_ms);
            std::cout << line;
        }
        for (const auto& dp : dom) {
            bool shown = (dp.a == pipeline::Mode::AsyncNaive && dp.b == pipeline::Mode::Sync) ||
                         (dp.a == pipeline::Mode::Faster && dp.b != pipeline::Mode::Faster);
            if (!shown) continue;
            char line[128];
            std::snprintf(line, sizeof(line), "  P(%s < %s) = %.2f\n", pipeline::mode_name(dp.a),
                          pipeline::mode_name(dp.b), dp.p_faster);
            std::cout << line;
        }
        auto sp = pipeline::speedup_vs_async(rows);
        char spline[128];
        std::snprintf(spline, sizeof(spline), "  speedup vs async: ttfa %.2fx  smin %.2fx  E[react] %.2fx\n",
                      sp.ttfa, sp.smin, sp.react);
        std::cout << spline;
    }
    std::cout << "wrote per-profile CSVs under " << dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"horizon-aware streaming flow-policy toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    Common common;
    app.add_option("--config", common.config_path, "JSON config file");
    app.add_option("--seed", common.seed, "base RNG seed");
    app.add_option("--out", common.out_dir, "output root directory");
    app.add_option("--name", common.name, "run name (default: subcommand)");

    auto* gen = app.add_subcommand("gen-data", "generate the synthetic chase dataset");
    int gen_episodes = -1;
    long gen_len = -1;
    gen->add_option("--episodes", gen_episodes, "episode count override");
    gen->add_option("--episode-len", gen_len, "episode length override");

    auto* train = app.add_subcommand("train", "train the flow policy on a dataset");
    std::string train_data;
    train->add_option("--data", train_data, "dataset JSONL path")->required();
    int train_epochs = -1;
    train->add_option("--epochs", train_epochs, "epoch override");

    auto* sample = app.add_subcommand("sample", "sample one chunk from a checkpoint");
    std::string sample_ckpt, sample_obs = "0,0,0.5,0.5", sample_mode = "has", sample_prefix;
    int sample_d = 0, sample_s = 0;
    sample->add_option("--checkpoint", sample_ckpt)->required();
    sample->add_option("--obs", sample_obs, "comma-separated observation");
    sample->add_option("--mode", sample_mode, "has | constant");
    sample->add_option("--d", sample_d, "prefix length");
    sample->add_option("--s", sample_s, "execution horizon (enables early stop)");
    sample->add_option("--prefix", sample_prefix, "prefix rows 'ax,ay;ax,ay' (zeros if omitted)");

    auto* pilot = app.add_subcommand("pilot", "straightness and clean-estimate deviation study");
    std::string pilot_ckpt, pilot_data;
    int pilot_samples = 200;
    pilot->add_option("--checkpoint", pilot_ckpt)->required();
    pilot->add_option("--data", pilot_data, "dataset JSONL path")->required();
    pilot->add_option("--samples", pilot_samples, "eval set size");

    auto* simulate = app.add_subcommand("simulate", "discrete-event pipeline simulation");
    std::string sim_mode = "async", sim_ckpt;
    int sim_events = 10000, sim_s = 0;
    double sim_duration = 0.0;
    simulate->add_option("--mode", sim_mode, "sync | async | async-prefix | faster");
    simulate->add_option("--events", sim_events, "number of reaction events");
    simulate->add_option("--duration", sim_duration, "simulated seconds (0 = auto)");
    simulate->add_option("--s", sim_s, "execution horizon (0 = s_min)");
    simulate->add_option("--checkpoint", sim_ckpt, "run the env-driven sim with this policy");

    auto* compare = app.add_subcommand("compare", "mode comparison table for the config timing");

    auto* serve = app.add_subcommand("serve", "run the policy server");
    std::string serve_ckpt, serve_mode = "has";
    uint16_t serve_port = 0;
    serve->add_option("--checkpoint", serve_ckpt)->required();
    serve->add_option("--port", serve_port, "bind port (0 = ephemeral)");
    serve->add_option("--mode", serve_mode, "has | constant");

    auto* client = app.add_subcommand("client", "run the controller client against a server");
    std::string client_mode = "faster";
    int client_s = 0, client_d = -1;
    double client_duration = 0.0;
    uint16_t client_port = 0;
    client->add_option("--mode", client_mode, "sync | async | async-prefix | faster");
    client->add_option("--s", client_s, "execution horizon (0 = s_min)");
    client->add_option("--d", client_d, "delay override");
    client->add_option("--duration", client_duration, "seconds (0 = config)");
    client->add_option("--port", client_port, "server port");

    auto* reproduce = app.add_subcommand("reproduce", "reproduce the reference latency tables");
    bool repro_tables = false;
    std::string repro_timings = "configs/timings.json";
    reproduce->add_flag("--tables", repro_tables, "emit reaction/dominance tables");
    reproduce->add_option("--timings", repro_timings, "timing profile JSON");

    // exit codes: 0 ok, 1 usage/config, 2 runtime
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        config::Config cfg = load_or_default(common);
        if (*gen) {
            if (gen_episodes > 0) cfg.env.episodes = gen_episodes;
            if (gen_len > 0) cfg.env.episode_len = gen_len;
            return cmd_gen_data(common, cfg);
        }
        if (*train) {
            if (train_epochs > 0) cfg.train.epochs = train_epochs;
            return cmd_train(common, cfg, train_data);
        }
        if (*sample)
            return cmd_sample(common, cfg, sample_ckpt, sample_obs, sample_mode, sample_d, sample_s,
                              sample_prefix);
        if (*pilot) return cmd_pilot(common, cfg, pilot_ckpt, pilot_data, pilot_samples);
        if (*simulate) {
            double duration = sim_duration;
            if (duration <= 0.0) duration = sim_ckpt.empty() ? 3600.0 : cfg.wire.duration_s;
            return cmd_simulate(common, cfg, sim_mode, sim_events, duration, sim_s, sim_ckpt);
        }
        if (*compare) return cmd_compare(common, cfg);
        if (*serve) return cmd_serve(cfg, serve_ckpt, serve_port, serve_mode, common.seed);
        if (*client) {
            double duration = client_duration > 0.0 ? client_duration : cfg.wire.duration_s;
            return cmd_client(common, cfg, client_mode, client_s, client_d, duration, client_port);
        }
        if (*reproduce) return cmd_reproduce(common, cfg, repro_timings, repro_tables);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        std::string msg = e.what();
        return msg.find("config") != std::string::npos ? 1 : 2;
    }
    return 0;
}
