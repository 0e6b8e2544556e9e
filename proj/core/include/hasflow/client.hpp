#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hasflow/env.hpp"
#include "hasflow/pipeline.hpp"

namespace hasflow::wire {

struct ClientOptions {
    std::string host = "127.0.0.1";
    uint16_t port = 0;
    pipeline::Mode mode = pipeline::Mode::Faster;
    int s = 0;  // execution horizon; 0 selects s_min from the timing model
    std::optional<int> d_override;
    pipeline::TimingModel timing;
    pipeline::ScheduleSpec sched;
    double duration = 10.0;  // seconds
    env::EnvConfig env;
    uint64_t seed = 0;
};

struct ClientReport {
    pipeline::RunTrace trace;
    std::vector<double> ttfa;  // per request: first reply byte - request send
    int requests = 0;
    int packets = 0;
    int late_packets = 0;  // received after their required execution time
    bool protocol_error = false;
    std::string error;

    double ttfa_mean() const;
};

// Fixed-rate controller driving the toy env from a shared action buffer while
// a receiver thread appends incoming actions. Measures wall-clock TTFA and
// protocol reactions against locally generated target-jump events.
ClientReport run_client(const ClientOptions& opts);

}  // namespace hasflow::wire
