#include "hasflow/server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <csignal>
#include <cstring>
#include <stdexcept>
#include <thread>

#include "hasflow/wire.hpp"

namespace hasflow::wire {

using Clock = std::chrono::steady_clock;

static uint64_t wall_us() {
    return std::chrono::duration_cast<std::chrono::microseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

static bool write_all(int fd, const uint8_t* data, size_t n) {
    while (n > 0) {
        ssize_t rv = ::send(fd, data, n, MSG_NOSIGNAL);
        if (rv <= 0) return false;
        data += rv;
        n -= static_cast<size_t>(rv);
    }
    return true;
}

Server::Server(flow::FlowModel model, ServeOptions opts)
    : model_(std::move(model)), opts_(std::move(opts)) {}

Server::~Server() { stop(); }

void Server::start() {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw std::runtime_error("socket() failed");
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(opts_.port);
    if (::inet_pton(AF_INET, opts_.bind_addr.c_str(), &addr.sin_addr) != 1)
        throw std::runtime_error("bad bind address: " + opts_.bind_addr);
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
        throw std::runtime_error("bind() failed");
    if (::listen(listen_fd_, 4) != 0) throw std::runtime_error("listen() failed");
    socklen_t len = sizeof(addr);
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    thread_ = std::thread([this] { accept_loop(); });
}

void Server::stop() {
    if (listen_fd_ < 0) return;
    stopping_.store(true);
    ::shutdown(listen_fd_, SHUT_RDWR);
    int active = active_fd_.load();
    if (active >= 0) ::shutdown(active, SHUT_RDWR);  // unblock a mid-connection recv
    ::close(listen_fd_);
    listen_fd_ = -1;
    if (thread_.joinable()) thread_.join();
}

void Server::accept_loop() {
    while (!stopping_.load()) {
        int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) break;
        int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
        active_fd_.store(fd);
        try {
            handle_connection(fd);
        } catch (const std::exception&) {
            // connection-level failure; keep serving
        }
        active_fd_.store(-1);
        ::close(fd);
    }
}

void Server::handle_connection(int fd) {
    Hello hello;
    hello.horizon = static_cast<uint16_t>(model_.H);
    hello.action_dim = static_cast<uint16_t>(model_.A);
    hello.obs_dim = static_cast<uint16_t>(model_.O);
    hello.sampler_steps = static_cast<uint8_t>(opts_.N);
    hello.streaming = opts_.mode == ServerMode::Streaming ? 1 : 0;
    auto hello_bytes = encode(hello);
    if (!write_all(fd, hello_bytes.data(), hello_bytes.size())) return;

    Rng rng(opts_.seed);
    FrameReader reader;
    uint8_t buf[4096];
    const double u_d = opts_.u_d > 0.0 ? opts_.u_d : (opts_.N - 1.0) / opts_.N;

    while (!stopping_.load()) {
        ssize_t n = ::recv(fd, buf, sizeof(buf), 0);
        if (n <= 0) return;
        reader.feed(buf, static_cast<size_t>(n));

        std::optional<Frame> frame;
        while ((frame = reader.next())) {
            ObsRequest req;
            try {
                req = decode_obs_request(*frame, model_.A);
                if (static_cast<int>(req.obs.size()) != model_.O)
                    throw ProtocolError("observation dimension mismatch");
            } catch (const ProtocolError& e) {
                ErrorMsg err{1, e.what()};
                auto bytes = encode(err);
                write_all(fd, bytes.data(), bytes.size());
                return;  // malformed request closes the connection
            }
            if (req.d >= model_.H || req.s < 1 || req.s > model_.H - req.d) {
                ErrorMsg err{2, "infeasible (d, s) for this horizon"};
                auto bytes = encode(err);
                if (!write_all(fd, bytes.data(), bytes.size())) return;
                continue;
            }

            Vec obs(req.obs.begin(), req.obs.end());
            Mat prefix(req.d, model_.A);
            for (size_t i = 0; i < req.prefix.size(); ++i)
                prefix.data[i] = req.prefix[i];
            Vec obs_n = flow::normalize_obs(model_, obs);
            Mat prefix_n = req.d > 0 ? flow::normalize_chunk(model_, prefix) : Mat(0, model_.A);

            // Pace the sampler so wall-clock latency follows the configured
            // timing model: dt_vlm up front, every step padded to dt_ae.
            auto vlm_done = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                               std::chrono::duration<double>(opts_.dt_vlm));
            std::this_thread::sleep_until(vlm_done);
            int step_counter = 0;
            flow::VelocityFn model_vfn = model_.velocity_fn();
            flow::VelocityFn paced = [&](const Vec& o, const Mat& noisy, const Vec& tau, Mat& out) {
                model_vfn(o, noisy, tau, out);
                step_counter++;
                std::this_thread::sleep_until(
                    vlm_done + std::chrono::duration_cast<Clock::duration>(
                                   std::chrono::duration<double>(opts_.dt_ae * step_counter)));
            };

            bool ok = true;
            if (opts_.mode == ServerMode::Streaming) {
                flow::SamplerConfig sc;
                sc.N = opts_.N;
                sc.alpha = opts_.alpha;
                sc.u_d = u_d;
                sc.early_stop = opts_.early_stop;
                sc.s = req.s;
                sc.sink = [&](int index, const double* action, int step) {
                    Vec denorm = flow::denormalize_action(model_, action);
                    ActionPacket pkt;
                    pkt.chunk_id = req.chunk_id;
                    pkt.index = static_cast<uint16_t>(index);
                    pkt.action.assign(denorm.begin(), denorm.end());
                    pkt.step = static_cast<uint8_t>(step);
                    pkt.server_us = wall_us();
                    auto bytes = encode(pkt);
                    if (!write_all(fd, bytes.data(), bytes.size())) ok = false;
                };
                auto [chunk, trace] =
                    flow::sample_has(paced, obs_n, model_.H, model_.A, req.d, prefix_n, sc, rng);
                (void)chunk;
                ChunkDone done;
                done.chunk_id = req.chunk_id;
                done.steps_used = static_cast<uint8_t>(trace.steps_used);
                done.early_stopped = trace.early_stopped ? 1 : 0;
                auto bytes = encode(done);
                ok = ok && write_all(fd, bytes.data(), bytes.size());
            } else {
                auto [chunk, trace] = flow::sample_constant(paced, obs_n, model_.H, model_.A,
                                                            opts_.N, req.d, prefix_n, rng);
                (void)trace;
                flow::denormalize_chunk_inplace(model_, chunk);
                ChunkBulk bulk;
                bulk.chunk_id = req.chunk_id;
                bulk.first_index = req.d;
                bulk.count = static_cast<uint16_t>(model_.H - req.d);
                bulk.actions.reserve(static_cast<size_t>(bulk.count) * model_.A);
                for (int i = req.d; i < model_.H; ++i)
                    for (int j = 0; j < model_.A; ++j)
                        bulk.actions.push_back(static_cast<float>(chunk.at(i, j)));
                bulk.server_us = wall_us();
                auto bytes = encode(bulk);
                ok = write_all(fd, bytes.data(), bytes.size());
            }
            if (!ok) return;
            chunks_served_.fetch_add(1);
        }
    }
}

void serve_forever(flow::FlowModel model, const ServeOptions& opts) {
    Server server(std::move(model), opts);
    server.start();
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);
    int sig = 0;
    sigwait(&set, &sig);
    server.stop();
}

}  // namespace hasflow::wire
