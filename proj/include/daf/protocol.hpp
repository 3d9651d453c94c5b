#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace daf {

class ProtocolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Wire layout, big-endian, 15 bytes:
//   StartP (4) | WSize (2) | SlopeF (4, IEEE-754 binary32) | PacketID (3) | P (2)
inline constexpr std::size_t kHeaderSize = 15;
inline constexpr std::uint32_t kMaxPacketId = (1u << 24) - 1;

struct DafHeader {
    std::uint32_t start_packet = 1;  // StartP
    std::uint16_t window_size = 1;   // WSize
    float slope = 0.0f;              // SlopeF
    std::uint32_t packet_id = 1;     // PacketID, 24 bits
    std::uint16_t payload_size = 1;  // P

    bool operator==(const DafHeader&) const = default;
};

std::array<std::uint8_t, kHeaderSize> encode_header(const DafHeader& h);
DafHeader decode_header(std::span<const std::uint8_t> bytes);

struct DafPacket {
    DafHeader header;
    std::vector<std::uint8_t> payload;
};

/// Header followed by exactly P payload bytes.
std::vector<std::uint8_t> encode_packet(const DafHeader& h, std::span<const std::uint8_t> payload);
DafPacket decode_packet(std::span<const std::uint8_t> datagram);

}  // namespace daf
