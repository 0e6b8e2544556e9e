#include "hasflow/wire.hpp"

#include <cstring>

namespace hasflow::wire {

namespace {

void put_u16(std::vector<uint8_t>& b, uint16_t v) {
    b.push_back(static_cast<uint8_t>(v));
    b.push_back(static_cast<uint8_t>(v >> 8));
}

void put_u32(std::vector<uint8_t>& b, uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<uint8_t>& b, uint64_t v) {
    for (int i = 0; i < 8; ++i) b.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void put_f32(std::vector<uint8_t>& b, float v) {
    uint32_t u;
    std::memcpy(&u, &v, 4);
    put_u32(b, u);
}

struct Cursor {
    const uint8_t* p;
    size_t n;
    size_t off = 0;

    void need(size_t k) const {
        if (off + k > n) throw ProtocolError("truncated frame");
    }
    uint8_t u8() {
        need(1);
        return p[off++];
    }
    uint16_t u16() {
        need(2);
        uint16_t v = static_cast<uint16_t>(p[off]) | (static_cast<uint16_t>(p[off + 1]) << 8);
        off += 2;
        return v;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(p[off + i]) << (8 * i);
        off += 4;
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[off + i]) << (8 * i);
        off += 8;
        return v;
    }
    float f32() {
        uint32_t u = u32();
        float f;
        std::memcpy(&f, &u, 4);
        return f;
    }
    void expect_end() const {
        if (off != n) throw ProtocolError("frame length mismatch (trailing bytes)");
    }
};

Cursor cursor(const Frame& f) { return Cursor{f.payload.data(), f.payload.size()}; }

void expect_type(const Frame& f, uint8_t t) {
    if (f.type != t) throw ProtocolError("unexpected message type");
}

}  // namespace

std::vector<uint8_t> encode_frame(uint8_t type, const std::vector<uint8_t>& payload) {
    std::vector<uint8_t> out;
    out.reserve(5 + payload.size());
    put_u32(out, static_cast<uint32_t>(payload.size() + 1));
    out.push_back(type);
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

void FrameReader::feed(const uint8_t* data, size_t n) {
    // Compact lazily so long streams do not grow the buffer unboundedly.
    if (consumed_ > 0 && consumed_ == buf_.size()) {
        buf_.clear();
        consumed_ = 0;
    } else if (consumed_ > 4096 && consumed_ > buf_.size() / 2) {
        buf_.erase(buf_.begin(), buf_.begin() + consumed_);
        consumed_ = 0;
    }
    buf_.insert(buf_.end(), data, data + n);
}

std::optional<Frame> FrameReader::next() {
    size_t avail = buf_.size() - consumed_;
    if (avail < 4) return std::nullopt;
    const uint8_t* p = buf_.data() + consumed_;
    uint32_t len = 0;
    for (int i = 0; i < 4; ++i) len |= static_cast<uint32_t>(p[i]) << (8 * i);
    if (len == 0) throw ProtocolError("empty frame (length 0 carries no msg_type)");
    if (len > kMaxFrameLen) throw ProtocolError("frame too large");
    if (avail < 4 + static_cast<size_t>(len)) return std::nullopt;
    Frame f;
    f.type = p[4];
    f.payload.assign(p + 5, p + 4 + len);
    consumed_ += 4 + len;
    return f;
}

std::vector<uint8_t> encode(const Hello& m) {
    std::vector<uint8_t> b;
    put_u16(b, m.horizon);
    put_u16(b, m.action_dim);
    put_u16(b, m.obs_dim);
    b.push_back(m.sampler_steps);
    b.push_back(m.streaming);
    return encode_frame(kHello, b);
}

std::vector<uint8_t> encode(const ObsRequest& m) {
    std::vector<uint8_t> b;
    put_u32(b, m.chunk_id);
    put_u16(b, static_cast<uint16_t>(m.obs.size()));
    for (float v : m.obs) put_f32(b, v);
    put_u16(b, m.d);
    put_u16(b, m.s);
    for (float v : m.prefix) put_f32(b, v);
    put_u64(b, m.client_send_us);
    return encode_frame(kObsRequest, b);
}

std::vector<uint8_t> encode(const ActionPacket& m) {
    std::vector<uint8_t> b;
    put_u32(b, m.chunk_id);
    put_u16(b, m.index);
    for (float v : m.action) put_f32(b, v);
    b.push_back(m.step);
    put_u64(b, m.server_us);
    return encode_frame(kActionPacket, b);
}

std::vector<uint8_t> encode(const ChunkBulk& m) {
    std::vector<uint8_t> b;
    put_u32(b, m.chunk_id);
    put_u16(b, m.first_index);
    put_u16(b, m.count);
    for (float v : m.actions) put_f32(b, v);
    put_u64(b, m.server_us);
    return encode_frame(kChunkBulk, b);
}

std::vector<uint8_t> encode(const ChunkDone& m) {
    std::vector<uint8_t> b;
    put_u32(b, m.chunk_id);
    b.push_back(m.steps_used);
    b.push_back(m.early_stopped);
    return encode_frame(kChunkDone, b);
}

std::vector<uint8_t> encode(const ErrorMsg& m) {
    std::vector<uint8_t> b;
    b.push_back(m.code);
    b.insert(b.end(), m.message.begin(), m.message.end());
    return encode_frame(kError, b);
}

Hello decode_hello(const Frame& f) {
    expect_type(f, kHello);
    auto c = cursor(f);
    Hello m;
    m.horizon = c.u16();
    m.action_dim = c.u16();
    m.obs_dim = c.u16();
    m.sampler_steps = c.u8();
    m.streaming = c.u8();
    c.expect_end();
    return m;
}

ObsRequest decode_obs_request(const Frame& f, int action_dim) {
    expect_type(f, kObsRequest);
    auto c = cursor(f);
    ObsRequest m;
    m.chunk_id = c.u32();
    uint16_t obs_dim = c.u16();
    m.obs.resize(obs_dim);
    for (auto& v : m.obs) v = c.f32();
    m.d = c.u16();
    m.s = c.u16();
    m.prefix.resize(static_cast<size_t>(m.d) * action_dim);
    for (auto& v : m.prefix) v = c.f32();
    m.client_send_us = c.u64();
    c.expect_end();
    return m;
}

ActionPacket decode_action_packet(const Frame& f, int action_dim) {
    expect_type(f, kActionPacket);
    auto c = cursor(f);
    ActionPacket m;
    m.chunk_id = c.u32();
    m.index = c.u16();
    m.action.resize(action_dim);
    for (auto& v : m.action) v = c.f32();
    m.step = c.u8();
    m.server_us = c.u64();
    c.expect_end();
    return m;
}

ChunkBulk decode_chunk_bulk(const Frame& f, int action_dim) {
    expect_type(f, kChunkBulk);
    auto c = cursor(f);
    ChunkBulk m;
    m.chunk_id = c.u32();
    m.first_index = c.u16();
    m.count = c.u16();
    m.actions.resize(static_cast<size_t>(m.count) * action_dim);
    for (auto& v : m.actions) v = c.f32();
    m.server_us = c.u64();
    c.expect_end();
    return m;
}

ChunkDone decode_chunk_done(const Frame& f) {
    expect_type(f, kChunkDone);
    auto c = cursor(f);
    ChunkDone m;
    m.chunk_id = c.u32();
    m.steps_used = c.u8();
    m.early_stopped = c.u8();
    c.expect_end();
    return m;
}

ErrorMsg decode_error(const Frame& f) {
    expect_type(f, kError);
    auto c = cursor(f);
    ErrorMsg m;
    m.code = c.u8();
    m.message.assign(f.payload.begin() + 1, f.payload.end());
    return m;
}

ChunkAssembler::ChunkAssembler(uint32_t chunk_id, int d, int horizon)
    : chunk_id_(chunk_id), d_(d), horizon_(horizon) {}

void ChunkAssembler::accept(const ActionPacket& p) {
    if (p.chunk_id != chunk_id_) throw ProtocolError("packet for a different chunk");
    if (done_) throw ProtocolError("packet after ChunkDone");
    int idx = p.index;
    if (idx < d_ || idx >= horizon_) throw ProtocolError("action index out of range");
    if (idx == last_index_) throw ProtocolError("duplicate action index");
    if (idx < last_index_) throw ProtocolError("out-of-order action index");
    last_index_ = idx;
    received_++;
}

void ChunkAssembler::finish(const ChunkDone& done) {
    if (done.chunk_id != chunk_id_) throw ProtocolError("ChunkDone for a different chunk");
    done_ = true;
}

}  // namespace hasflow::wire
