#include "hasflow/client.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <thread>

#include "hasflow/wire.hpp"

namespace hasflow::wire {

using Clock = std::chrono::steady_clock;
using pipeline::Mode;

double ClientReport::ttfa_mean() const {
    if (ttfa.empty()) return 0.0;
    double s = 0.0;
    for (double v : ttfa) s += v;
    return s / ttfa.size();
}

namespace {

struct BufferedAction {
    double ax = 0.0, ay = 0.0;
    uint32_t chunk_id = 0;
    int index = 0;
    double obs_time = 0.0;
};

struct ChunkState {
    long trigger_tick = 0;
    Clock::time_point send_steady;
    bool got_first = false;
    std::optional<ChunkAssembler> assembler;
    std::vector<std::optional<std::array<double, 2>>> values;  // by index
};

struct Shared {
    std::mutex mu;
    std::map<long, BufferedAction> buffer;            // tick -> action
    std::map<uint32_t, ChunkState> chunks;
    std::vector<double> ttfa;
    int packets = 0;
    int late_packets = 0;
    bool failed = false;
    std::string error;
    std::atomic<long> current_tick{0};
    std::atomic<bool> done{false};
};

bool write_all_fd(int fd, const uint8_t* data, size_t n) {
    while (n > 0) {
        ssize_t rv = ::send(fd, data, n, MSG_NOSIGNAL);
        if (rv <= 0) return false;
        data += rv;
        n -= static_cast<size_t>(rv);
    }
    return true;
}

}  // namespace

ClientReport run_client(const ClientOptions& opts) {
    ClientReport report;
    const pipeline::TimingModel& t = opts.timing;
    const double dt = t.dt_ctrl;

    auto ds = pipeline::delay_and_smin(t, opts.mode, opts.sched);
    const int d_exec = opts.mode == Mode::Sync ? 0 : opts.d_override.value_or(ds.d);
    const int s = opts.s > 0 ? opts.s : ds.s_min;

    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) {
        report.error = "socket() failed";
        report.protocol_error = true;
        return report;
    }
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(opts.port);
    ::inet_pton(AF_INET, opts.host.c_str(), &addr.sin_addr);
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        report.error = "connect() failed";
        report.protocol_error = true;
        ::close(fd);
        return report;
    }
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));

    // HELLO carries the model dimensions.
    FrameReader reader;
    Hello hello;
    {
        uint8_t buf[512];
        bool got = false;
        while (!got) {
            ssize_t n = ::recv(fd, buf, sizeof(buf), 0);
            if (n <= 0) {
                report.error = "connection closed before HELLO";
                report.protocol_error = true;
                ::close(fd);
                return report;
            }
            reader.feed(buf, static_cast<size_t>(n));
            if (auto f = reader.next()) {
                hello = decode_hello(*f);
                got = true;
            }
        }
    }
    const int H = hello.horizon;
    const int A = hello.action_dim;
    if (d_exec >= H || s < 1 || s > H - d_exec) {
        report.error = "infeasible (d, s) for the server horizon";
        report.protocol_error = true;
        ::close(fd);
        return report;
    }

    Shared shared;
    const long total_ticks = static_cast<long>(std::floor(opts.duration / dt));
    const Clock::time_point t0 = Clock::now() + std::chrono::milliseconds(20);

    // Receiver: parses frames, validates stream order, fills the buffer.
    std::thread receiver([&] {
        uint8_t buf[8192];
        try {
            while (!shared.done.load()) {
                ssize_t n = ::recv(fd, buf, sizeof(buf), 0);
                if (n <= 0) break;
                reader.feed(buf, static_cast<size_t>(n));
                std::optional<Frame> f;
                while ((f = reader.next())) {
                    auto now = Clock::now();
                    std::lock_guard<std::mutex> lock(shared.mu);
                    if (f->type == kActionPacket) {
                        ActionPacket pkt = decode_action_packet(*f, A);
                        auto it = shared.chunks.find(pkt.chunk_id);
                        if (it == shared.chunks.end()) throw ProtocolError("packet for unknown chunk");
                        ChunkState& cs = it->second;
                        cs.assembler->accept(pkt);
                        shared.packets++;
                        if (!cs.got_first) {
                            cs.got_first = true;
                            shared.ttfa.push_back(
                                std::chrono::duration<double>(now - cs.send_steady).count());
                        }
                        cs.values[pkt.index] = {pkt.action[0], pkt.action[1]};
                        long exec_tick = cs.trigger_tick + pkt.index + 1;
                        if (pkt.index >= d_exec && pkt.index < d_exec + s) {
                            auto required = t0 + std::chrono::duration_cast<Clock::duration>(
                                                     std::chrono::duration<double>(exec_tick * dt));
                            if (now > required) shared.late_packets++;
                            shared.buffer[exec_tick] = {pkt.action[0], pkt.action[1], pkt.chunk_id,
                                                        pkt.index, cs.trigger_tick * dt};
                        }
                    } else if (f->type == kChunkBulk) {
                        ChunkBulk bulk = decode_chunk_bulk(*f, A);
                        auto it = shared.chunks.find(bulk.chunk_id);
                        if (it == shared.chunks.end()) throw ProtocolError("bulk for unknown chunk");
                        ChunkState& cs = it->second;
                        if (!cs.got_first) {
                            cs.got_first = true;
                            shared.ttfa.push_back(
                                std::chrono::duration<double>(now - cs.send_steady).count());
                        }
                        for (int i = 0; i < bulk.count; ++i) {
                            int idx = bulk.first_index + i;
                            if (idx >= H) throw ProtocolError("bulk index out of range");
                            cs.values[idx] = {bulk.actions[static_cast<size_t>(i) * A],
                                              bulk.actions[static_cast<size_t>(i) * A + 1]};
                        }
                        long base_tick = opts.mode == Mode::Sync
                                             ? shared.current_tick.load() + 1
                                             : cs.trigger_tick + d_exec + 1;
                        for (int m = 0; m < s; ++m) {
                            int idx = d_exec + m;
                            if (idx >= H || !cs.values[idx].has_value()) continue;
                            shared.buffer[base_tick + m] = {(*cs.values[idx])[0],
                                                            (*cs.values[idx])[1], bulk.chunk_id,
                                                            idx, cs.trigger_tick * dt};
                        }
                    } else if (f->type == kChunkDone) {
                        ChunkDone done = decode_chunk_done(*f);
                        auto it = shared.chunks.find(done.chunk_id);
                        if (it != shared.chunks.end() && it->second.assembler)
                            it->second.assembler->finish(done);
                    } else if (f->type == kError) {
                        ErrorMsg err = decode_error(*f);
                        throw ProtocolError("server error: " + err.message);
                    } else {
                        throw ProtocolError("unknown msg_type");
                    }
                }
            }
        } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(shared.mu);
            shared.failed = true;
            shared.error = e.what();
        }
    });

    // Controller: fixed-rate loop over the toy env.
    pipeline::RunTrace& trace = report.trace;
    trace.d = d_exec;
    trace.s = s;
    trace.duration = total_ticks * dt;

    Rng rng(opts.seed);
    env::WorldState world;
    world.px = rng.uniform(-0.5, 0.5);
    world.py = rng.uniform(-0.5, 0.5);
    world.tx = rng.uniform(-1.0, 1.0);
    world.ty = rng.uniform(-1.0, 1.0);
    env::EventSchedule jumps = env::make_event_schedule(total_ticks, opts.env, opts.seed ^ 0x77u);
    size_t next_jump = 0;

    uint32_t next_chunk_id = 1;
    uint32_t prev_chunk_id = 0;
    long next_trigger_tick = 0;
    bool sync_awaiting = false;

    auto send_request = [&](long tick) {
        ObsRequest req;
        req.chunk_id = next_chunk_id++;
        Vec obs = world.observation();
        req.obs.assign(obs.begin(), obs.end());
        req.client_send_us = static_cast<uint64_t>(
            std::chrono::duration_cast<std::chrono::microseconds>(Clock::now().time_since_epoch())
                .count());

        int req_d = 0;
        std::vector<float> prefix;
        bool want_prefix = (opts.mode == Mode::AsyncPrefix || opts.mode == Mode::Faster) &&
                           d_exec > 0 && prev_chunk_id != 0;
        {
            std::lock_guard<std::mutex> lock(shared.mu);
            if (want_prefix) {
                auto it = shared.chunks.find(prev_chunk_id);
                if (it != shared.chunks.end()) {
                    bool complete = true;
                    for (int i = 0; i < d_exec; ++i) {
                        int idx = s + i;
                        if (idx >= H || !it->second.values[idx].has_value()) complete = false;
                    }
                    if (complete) {
                        req_d = d_exec;
                        prefix.reserve(static_cast<size_t>(d_exec) * A);
                        for (int i = 0; i < d_exec; ++i) {
                            const auto& v = *it->second.values[s + i];
                            prefix.push_back(static_cast<float>(v[0]));
                            prefix.push_back(static_cast<float>(v[1]));
                        }
                    }
                }
            }
            req.d = static_cast<uint16_t>(req_d);
            req.s = static_cast<uint16_t>(std::min(H - req_d, d_exec + s - req_d));
            req.prefix = std::move(prefix);
            ChunkState cs;
            cs.trigger_tick = tick;
            cs.send_steady = Clock::now();
            cs.assembler.emplace(req.chunk_id, req_d, H);
            cs.values.assign(H, std::nullopt);
            shared.chunks.emplace(req.chunk_id, std::move(cs));
            // Old chunks are dead once their successor's successor exists.
            while (shared.chunks.size() > 4) shared.chunks.erase(shared.chunks.begin());
        }
        auto bytes = encode(req);
        if (!write_all_fd(fd, bytes.data(), bytes.size())) {
            std::lock_guard<std::mutex> lock(shared.mu);
            shared.failed = true;
            shared.error = "request write failed";
        }
        trace.trigger_times.push_back(tick * dt);
        report.requests++;
        prev_chunk_id = req.chunk_id;
    };

    for (long tick = 0; tick < total_ticks; ++tick) {
        std::this_thread::sleep_until(
            t0 + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(tick * dt)));
        shared.current_tick.store(tick);
        {
            std::lock_guard<std::mutex> lock(shared.mu);
            if (shared.failed) break;
        }

        if (next_jump < jumps.jump_times.size() && jumps.jump_times[next_jump] == tick) {
            env::ReactionEvent ev;
            ev.time = tick * dt;
            ev.px = world.px;
            ev.py = world.py;
            ev.new_tx = jumps.jump_targets[next_jump][0];
            ev.new_ty = jumps.jump_targets[next_jump][1];
            trace.events.push_back(ev);
            world.tx = ev.new_tx;
            world.ty = ev.new_ty;
            next_jump++;
        }

        if (opts.mode == Mode::Sync) {
            bool buffer_has_future;
            {
                std::lock_guard<std::mutex> lock(shared.mu);
                buffer_has_future = shared.buffer.lower_bound(tick) != shared.buffer.end();
                if (sync_awaiting && buffer_has_future) sync_awaiting = false;
            }
            if (!sync_awaiting && !buffer_has_future) {
                send_request(tick);
                sync_awaiting = true;
            }
        } else if (tick == next_trigger_tick) {
            send_request(tick);
            next_trigger_tick += s;
        }

        bool executed = false;
        {
            std::lock_guard<std::mutex> lock(shared.mu);
            auto it = shared.buffer.find(tick);
            if (it != shared.buffer.end()) {
                const BufferedAction& a = it->second;
                env::ExecutedAction ex;
                ex.exec_time = tick * dt;
                ex.obs_time = a.obs_time;
                ex.ax = a.ax;
                ex.ay = a.ay;
                ex.chunk_id = a.chunk_id;
                ex.index = a.index;
                trace.executed.push_back(ex);
                executed = true;
            }
            shared.buffer.erase(shared.buffer.begin(), shared.buffer.upper_bound(tick));
        }
        if (executed) {
            const auto& ex = trace.executed.back();
            env::step(world, ex.ax, ex.ay);
        } else {
            world.tick++;
        }
        trace.total_ticks++;
        // For async pipelines, ticks before the first chunk can possibly
        // deliver are warmup, not stalls. Sync counts every wait tick.
        bool in_steady_state = opts.mode == Mode::Sync || tick > d_exec;
        if (!executed && in_steady_state) trace.stall_ticks++;
    }

    shared.done.store(true);
    ::shutdown(fd, SHUT_RDWR);
    receiver.join();
    ::close(fd);

    {
        std::lock_guard<std::mutex> lock(shared.mu);
        report.ttfa = shared.ttfa;
        report.packets = shared.packets;
        report.late_packets = shared.late_packets;
        if (shared.failed) {
            report.protocol_error = true;
            report.error = shared.error;
            trace.truncated = true;
        }
    }

    double horizon_margin = 3.0 * std::max(pipeline::infer_latency(t, opts.mode), s * dt);
    for (const auto& ev : trace.events) {
        if (ev.time > trace.duration - horizon_margin) break;
        try {
            auto r = env::measure_reaction(trace.executed, ev);
            if (r.protocol >= 0.0) {
                trace.protocol_reactions.push_back(r.protocol);
                trace.behavioral_reactions.push_back(r.behavioral.value_or(-1.0));
            }
        } catch (const std::invalid_argument&) {
            break;  // trace ended before this event was answered
        }
    }
    return report;
}

}  // namespace hasflow::wire
