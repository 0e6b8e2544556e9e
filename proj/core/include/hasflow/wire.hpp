#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hasflow/mat.hpp"

namespace hasflow::wire {

// Length-prefixed little-endian framing: u32 length (payload bytes + 1),
// u8 msg_type, payload.
enum MsgType : uint8_t {
    kHello = 1,
    kObsRequest = 2,
    kActionPacket = 3,
    kChunkBulk = 4,
    kChunkDone = 5,
    kError = 15,
};

inline constexpr uint32_t kMaxFrameLen = 1u << 22;

struct ProtocolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Frame {
    uint8_t type = 0;
    std::vector<uint8_t> payload;
};

std::vector<uint8_t> encode_frame(uint8_t type, const std::vector<uint8_t>& payload);

// Incremental frame parser; feed() accepts arbitrary fragments, next() pops
// complete frames. Parsing is independent of how the stream was split.
class FrameReader {
  public:
    void feed(const uint8_t* data, size_t n);
    std::optional<Frame> next();

  private:
    std::vector<uint8_t> buf_;
    size_t consumed_ = 0;
};

struct Hello {
    uint16_t horizon = 0;
    uint16_t action_dim = 0;
    uint16_t obs_dim = 0;
    uint8_t sampler_steps = 0;
    uint8_t streaming = 0;  // 1 when the server streams per-action packets
};

struct ObsRequest {
    uint32_t chunk_id = 0;
    std::vector<float> obs;
    uint16_t d = 0;
    uint16_t s = 0;
    std::vector<float> prefix;  // d * action_dim values, row-major
    uint64_t client_send_us = 0;
};

struct ActionPacket {
    uint32_t chunk_id = 0;
    uint16_t index = 0;
    std::vector<float> action;
    uint8_t step = 0;
    uint64_t server_us = 0;
};

struct ChunkBulk {
    uint32_t chunk_id = 0;
    uint16_t first_index = 0;
    uint16_t count = 0;
    std::vector<float> actions;  // count * action_dim values
    uint64_t server_us = 0;
};

struct ChunkDone {
    uint32_t chunk_id = 0;
    uint8_t steps_used = 0;
    uint8_t early_stopped = 0;
};

struct ErrorMsg {
    uint8_t code = 0;
    std::string message;
};

std::vector<uint8_t> encode(const Hello& m);
std::vector<uint8_t> encode(const ObsRequest& m);
std::vector<uint8_t> encode(const ActionPacket& m);
std::vector<uint8_t> encode(const ChunkBulk& m);
std::vector<uint8_t> encode(const ChunkDone& m);
std::vector<uint8_t> encode(const ErrorMsg& m);

// Decoders throw ProtocolError on truncation or trailing bytes. The
// action-dimension comes from the HELLO exchange.
Hello decode_hello(const Frame& f);
ObsRequest decode_obs_request(const Frame& f, int action_dim);
ActionPacket decode_action_packet(const Frame& f, int action_dim);
ChunkBulk decode_chunk_bulk(const Frame& f, int action_dim);
ChunkDone decode_chunk_done(const Frame& f);
ErrorMsg decode_error(const Frame& f);

// Client-side per-chunk stream validator: indices must arrive strictly
// increasing, one packet per index, all within [d, H-1].
class ChunkAssembler {
  public:
    ChunkAssembler(uint32_t chunk_id, int d, int horizon);

    // Throws ProtocolError on duplicate, out-of-order, or out-of-range index.
    void accept(const ActionPacket& p);
    void finish(const ChunkDone& done);

    int received() const { return received_; }
    bool done() const { return done_; }

  private:
    uint32_t chunk_id_;
    int d_;
    int horizon_;
    int last_index_ = -1;
    int received_ = 0;
    bool done_ = false;
};

}  // namespace hasflow::wire
