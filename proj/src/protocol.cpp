#include "daf/protocol.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace daf {

namespace {

void validate(const DafHeader& h) {
    if (h.packet_id > kMaxPacketId) throw ProtocolError("PacketID does not fit in 24 bits");
    if (h.window_size < 1) throw ProtocolError("WSize must be >= 1");
    if (h.payload_size < 1) throw ProtocolError("P must be >= 1");
    if (!(h.slope >= -1.0f && h.slope <= 1.0f)) throw ProtocolError("SlopeF outside [-1, 1]");
}

}  // namespace

std::array<std::uint8_t, kHeaderSize> encode_header(const DafHeader& h) {
    validate(h);
    std::array<std::uint8_t, kHeaderSize> out{};
    const std::uint32_t slope_bits = std::bit_cast<std::uint32_t>(h.slope);
    auto put = [&out](std::size_t at, std::uint32_t v, int bytes) {
        for (int i = 0; i < bytes; ++i)
            out[at + static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v >> (8 * (bytes - 1 - i)));
    };
    put(0, h.start_packet, 4);
    put(4, h.window_size, 2);
    put(6, slope_bits, 4);
    put(10, h.packet_id, 3);
    put(13, h.payload_size, 2);
    return out;
}

DafHeader decode_header(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kHeaderSize)
        throw ProtocolError("truncated header: " + std::to_string(bytes.size()) + " bytes");
    auto get = [&bytes](std::size_t at, int n) {
        std::uint32_t v = 0;
        for (int i = 0; i < n; ++i) v = (v << 8) | bytes[at + static_cast<std::size_t>(i)];
        return v;
    };
    DafHeader h;
    h.start_packet = get(0, 4);
    h.window_size = static_cast<std::uint16_t>(get(4, 2));
    h.slope = std::bit_cast<float>(get(6, 4));
    h.packet_id = get(10, 3);
    h.payload_size = static_cast<std::uint16_t>(get(13, 2));
    validate(h);
    return h;
}

std::vector<std::uint8_t> encode_packet(const DafHeader& h, std::span<const std::uint8_t> payload) {
    if (payload.size() != h.payload_size) throw ProtocolError("payload length differs from P");
    const auto head = encode_header(h);
    std::vector<std::uint8_t> out(kHeaderSize + payload.size());
    std::copy(head.begin(), head.end(), out.begin());
    std::copy(payload.begin(), payload.end(), out.begin() + kHeaderSize);
    return out;
}

DafPacket decode_packet(std::span<const std::uint8_t> datagram) {
    DafPacket pkt;
    pkt.header = decode_header(datagram);
    const auto body = datagram.subspan(kHeaderSize);
    if (body.size() != pkt.header.payload_size)
        throw ProtocolError("framing error: header claims " + std::to_string(pkt.header.payload_size) +
                            " payload bytes, datagram carries " + std::to_string(body.size()));
    pkt.payload.assign(body.begin(), body.end());
    return pkt;
}

}  // namespace daf
