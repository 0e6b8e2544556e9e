#pragma once

#include <atomic>
#include <string>
#include <thread>

#include "hasflow/flow.hpp"
#include "hasflow/pipeline.hpp"

namespace hasflow::wire {

enum class ServerMode { Constant, Streaming };

struct ServeOptions {
    std::string bind_addr = "127.0.0.1";
    uint16_t port = 0;  // 0 binds an ephemeral port
    ServerMode mode = ServerMode::Streaming;
    int N = 10;
    double alpha = 0.6;
    double u_d = -1.0;  // default (N-1)/N
    bool early_stop = true;
    // Artificial pacing so wall-clock latency follows the timing model:
    // dt_vlm before the first step, each step padded to dt_ae.
    double dt_vlm = 0.0;
    double dt_ae = 0.0;
    uint64_t seed = 1;
};

// Policy server over a TCP stream socket. Connections are handled one at a
// time; per connection, requests strictly in arrival order.
class Server {
  public:
    Server(flow::FlowModel model, ServeOptions opts);
    ~Server();

    // Binds, then serves on a background thread until stop().
    void start();
    void stop();
    uint16_t port() const { return port_; }
    uint64_t chunks_served() const { return chunks_served_.load(); }

  private:
    void accept_loop();
    void handle_connection(int fd);

    flow::FlowModel model_;
    ServeOptions opts_;
    int listen_fd_ = -1;
    uint16_t port_ = 0;
    std::thread thread_;
    std::atomic<bool> stopping_{false};
    std::atomic<int> active_fd_{-1};
    std::atomic<uint64_t> chunks_served_{0};
};

// Blocking convenience wrapper used by the CLI: runs until the process is
// interrupted.
void serve_forever(flow::FlowModel model, const ServeOptions& opts);

}  // namespace hasflow::wire
