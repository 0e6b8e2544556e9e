#include "hasflow/config.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace hasflow::config {

using nlohmann::json;

namespace {

// Pulls known keys out of `j`, erroring on leftovers so typos never pass
// silently.
class Section {
  public:
    Section(json j, std::string name) : j_(std::move(j)), name_(std::move(name)) {
        if (!j_.is_object()) throw std::runtime_error("config section '" + name_ + "' must be an object");
    }

    template <typename T>
    void take(const char* key, T& out) {
        auto it = j_.find(key);
        if (it == j_.end()) return;
        try {
            out = it->get<T>();
        } catch (const json::exception&) {
            throw std::runtime_error("config key '" + name_ + "." + key + "' has the wrong type");
        }
        j_.erase(it);
    }

    json take_object(const char* key) {
        auto it = j_.find(key);
        if (it == j_.end()) return json::object();
        json out = *it;
        j_.erase(it);
        return out;
    }

    void finish() const {
        if (!j_.empty())
            throw std::runtime_error("unknown config key '" + name_ + "." + j_.begin().key() + "'");
    }

  private:
    json j_;
    std::string name_;
};

}  // namespace

Config parse_config(const std::string& text) {
    json root_json;
    try {
        root_json = json::parse(text);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("config is not valid JSON: ") + e.what());
    }
    Config c;
    Section root(root_json, "root");

    Section env(root.take_object("env"), "env");
    env.take("H", c.env.H);
    env.take("episodes", c.env.episodes);
    env.take("episode_len", c.env.episode_len);
    env.take("gain_lo", c.env.gain_lo);
    env.take("gain_hi", c.env.gain_hi);
    env.take("v_max", c.env.v_max);
    env.take("mean_jump_interval", c.env.mean_jump_interval);
    env.take("min_jump_dist", c.env.min_jump_dist);
    env.finish();

    Section train(root.take_object("train"), "train");
    train.take("epochs", c.train.epochs);
    train.take("batch_size", c.train.batch_size);
    train.take("lr", c.train.lr);
    train.take("beta1", c.train.beta1);
    train.take("beta2", c.train.beta2);
    train.take("weight_decay", c.train.weight_decay);
    train.take("grad_clip", c.train.grad_clip);
    train.take("holdout_frac", c.train.holdout_frac);
    train.take("hidden", c.train.hidden);
    train.finish();

    Section sched(root.take_object("schedule"), "schedule");
    sched.take("alpha", c.schedule.alpha);
    sched.take("u_d", c.schedule.u_d);
    sched.take("p", c.schedule.p);
    sched.take("d_max", c.schedule.d_max);
    sched.finish();

    Section timing(root.take_object("timing"), "timing");
    timing.take("dt_ctrl_ms", c.timing.dt_ctrl_ms);
    timing.take("dt_vlm_ms", c.timing.dt_vlm_ms);
    timing.take("dt_ae_ms", c.timing.dt_ae_ms);
    timing.take("N", c.timing.N);
    timing.take("overhead_ms", c.timing.overhead_ms);
    timing.take("stream_margin_ms", c.timing.stream_margin_ms);
    timing.finish();

    Section wire(root.take_object("wire"), "wire");
    wire.take("host", c.wire.host);
    wire.take("port", c.wire.port);
    wire.take("mode", c.wire.mode);
    wire.take("s", c.wire.s);
    wire.take("d_override", c.wire.d_override);
    wire.take("duration_s", c.wire.duration_s);
    wire.finish();

    root.finish();

    if (c.env.H < 1) throw std::runtime_error("env.H must be >= 1");
    if (!(c.env.gain_lo > 0.0 && c.env.gain_hi >= c.env.gain_lo))
        throw std::runtime_error("env.gain_lo/gain_hi must satisfy 0 < lo <= hi");
    if (c.schedule.d_max >= c.env.H) throw std::runtime_error("schedule.d_max must be < env.H");
    if (!(c.schedule.alpha > 0.0 && c.schedule.alpha <= 1.0))
        throw std::runtime_error("schedule.alpha must lie in (0, 1]");
    if (!(c.schedule.u_d > 0.0 && c.schedule.u_d < 1.0))
        throw std::runtime_error("schedule.u_d must lie in (0, 1)");
    if (c.schedule.p < 0.0 || c.schedule.p > 1.0)
        throw std::runtime_error("schedule.p must lie in [0, 1]");
    if (c.timing.N < 1) throw std::runtime_error("timing.N must be >= 1");
    try {
        pipeline::mode_from_name(c.wire.mode);
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(std::string("config key 'wire.mode': ") + e.what());
    }
    return c;
}

Config load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config: " + path);
    std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return parse_config(text);
}

std::string dump_config(const Config& c) {
    json j;
    j["env"] = {{"H", c.env.H},
                {"episodes", c.env.episodes},
                {"episode_len", c.env.episode_len},
                {"gain_lo", c.env.gain_lo},
                {"gain_hi", c.env.gain_hi},
                {"v_max", c.env.v_max},
                {"mean_jump_interval", c.env.mean_jump_interval},
                {"min_jump_dist", c.env.min_jump_dist}};
    j["train"] = {{"epochs", c.train.epochs},
                  {"batch_size", c.train.batch_size},
                  {"lr", c.train.lr},
                  {"beta1", c.train.beta1},
                  {"beta2", c.train.beta2},
                  {"weight_decay", c.train.weight_decay},
                  {"grad_clip", c.train.grad_clip},
                  {"holdout_frac", c.train.holdout_frac},
                  {"hidden", c.train.hidden}};
    j["schedule"] = {{"alpha", c.schedule.alpha},
                     {"u_d", c.schedule.u_d},
                     {"p", c.schedule.p},
                     {"d_max", c.schedule.d_max}};
    j["timing"] = {{"dt_ctrl_ms", c.timing.dt_ctrl_ms},
                   {"dt_vlm_ms", c.timing.dt_vlm_ms},
                   {"dt_ae_ms", c.timing.dt_ae_ms},
                   {"N", c.timing.N},
                   {"overhead_ms", c.timing.overhead_ms},
                   {"stream_margin_ms", c.timing.stream_margin_ms}};
    j["wire"] = {{"host", c.wire.host},
                 {"port", c.wire.port},
                 {"mode", c.wire.mode},
                 {"s", c.wire.s},
                 {"d_override", c.wire.d_override},
                 {"duration_s", c.wire.duration_s}};
    return j.dump(2);
}

uint64_t config_hash(const Config& c) {
    std::string s = dump_config(c);
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

pipeline::TimingModel to_timing_model(const Config& c) {
    pipeline::TimingModel t;
    t.dt_ctrl = c.timing.dt_ctrl_ms * 1e-3;
    t.dt_vlm = c.timing.dt_vlm_ms * 1e-3;
    t.dt_ae = c.timing.dt_ae_ms * 1e-3;
    t.steps = c.timing.N;
    t.overhead = c.timing.overhead_ms * 1e-3;
    t.stream_margin = c.timing.stream_margin_ms * 1e-3;
    return t;
}

pipeline::ScheduleSpec to_schedule_spec(const Config& c) {
    return {c.env.H, c.schedule.alpha, c.schedule.u_d};
}

env::EnvConfig to_env_config(const Config& c) {
    env::EnvConfig e;
    e.gain_lo = c.env.gain_lo;
    e.gain_hi = c.env.gain_hi;
    e.v_max = c.env.v_max;
    e.mean_jump_interval = c.env.mean_jump_interval;
    e.min_jump_dist = c.env.min_jump_dist;
    return e;
}

flow::TrainConfig to_train_config(const Config& c, uint64_t seed) {
    flow::TrainConfig t;
    t.epochs = c.train.epochs;
    t.batch_size = c.train.batch_size;
    t.p = c.schedule.p;
    t.d_max = c.schedule.d_max;
    t.alpha = c.schedule.alpha;
    t.u_d = c.schedule.u_d;
    t.N = c.timing.N;
    t.hidden = c.train.hidden;
    t.lr = c.train.lr;
    t.beta1 = c.train.beta1;
    t.beta2 = c.train.beta2;
    t.weight_decay = c.train.weight_decay;
    t.grad_clip = c.train.grad_clip;
    t.holdout_frac = c.train.holdout_frac;
    t.seed = seed;
    return t;
}

void write_manifest(const std::string& out_dir, const Config& c, uint64_t seed) {
    std::filesystem::create_directories(out_dir);
    json j;
    j["seed"] = seed;
    j["config_hash"] = config_hash(c);
    j["config"] = json::parse(dump_config(c));
    j["version"] = "hasflow 0.1.0";
    std::ofstream os(out_dir + "/manifest.json");
    if (!os) throw std::runtime_error("cannot write manifest in " + out_dir);
    os << j.dump(2) << "\n";
}

}  // namespace hasflow::config
