#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace daf {

class TraceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Frame-size description of a video stream.
///
/// Frames and packets are numbered from 1, matching the packet sequence
/// numbers carried on the wire. Instances are immutable once built.
class VideoTrace {
public:
    /// Builds a trace from per-frame byte counts. Every frame occupies
    /// ceil(bytes / packet_size) packets, and at least one.
    VideoTrace(std::vector<std::uint64_t> frame_bytes, double fps, std::uint32_t gop_size,
               std::uint32_t packet_size, std::vector<char> frame_types = {});

    /// Builds a trace directly from packet counts (frame_bytes = s(t) * P).
    static VideoTrace from_packet_counts(std::vector<std::uint32_t> packets_per_frame, double fps,
                                         std::uint32_t gop_size, std::uint32_t packet_size);

    std::size_t frame_count() const noexcept { return packets_.size(); }
    double fps() const noexcept { return fps_; }
    std::uint32_t gop_size() const noexcept { return gop_size_; }
    std::uint32_t packet_size() const noexcept { return packet_size_; }
    std::uint64_t total_packets() const noexcept { return cum_.back(); }

    const std::vector<std::uint64_t>& frame_bytes() const noexcept { return frame_bytes_; }
    const std::vector<std::uint32_t>& packets_per_frame() const noexcept { return packets_; }
    const std::vector<char>& frame_types() const noexcept { return types_; }

    /// s(t), 1-based.
    std::uint32_t packets_in(std::size_t frame) const;

    /// pktno(t): first packet number of frame t. pktno(T+1) = k+1.
    std::uint64_t first_packet(std::size_t frame) const;

    /// frmno(p): frame holding packet p.
    std::size_t frame_of(std::uint64_t packet) const;

    /// pkt(t0, j): packets in frames t0 .. t0+j-1.
    std::uint64_t packets_in_range(std::size_t first_frame, std::size_t frame_count) const;

private:
    VideoTrace() = default;
    void build_index();

    std::vector<std::uint64_t> frame_bytes_;
    std::vector<std::uint32_t> packets_;
    std::vector<char> types_;
    std::vector<std::uint64_t> cum_;  // cum_[i] = packets in frames 1..i
    double fps_ = 0;
    std::uint32_t gop_size_ = 1;
    std::uint32_t packet_size_ = 1;
};

/// Reads a "frame,bytes,type" CSV trace.
VideoTrace load_trace(std::istream& in, std::uint32_t packet_size, double fps = 30.0,
                      std::uint32_t gop_size = 1);
VideoTrace load_trace_file(const std::string& path, std::uint32_t packet_size, double fps = 30.0,
                           std::uint32_t gop_size = 1);

void write_trace(std::ostream& out, const VideoTrace& trace);

/// Splits per-frame payloads into P-byte native packets, zero-padding the last
/// packet of every frame. An empty payload list yields k all-zero packets.
/// The result is a flat buffer of k * P bytes; packet p starts at (p-1) * P.
std::vector<std::uint8_t> packetize(const VideoTrace& trace,
                                    std::span<const std::vector<std::uint8_t>> payloads);

/// Merges every `factor` consecutive frames into one superframe.
VideoTrace downsample(const VideoTrace& trace, std::uint32_t factor);

// Synthetic traces. Byte counts are deterministic functions of the arguments.
namespace synthetic {

VideoTrace constant(std::size_t frames, std::uint64_t bytes_per_frame, double fps,
                    std::uint32_t packet_size);

VideoTrace sinusoidal(std::size_t frames, std::uint64_t mean_bytes, double relative_amplitude,
                      double period_frames, double fps, std::uint32_t packet_size);

/// Two-level square wave: `high_frames` frames at high_bytes out of every
/// `period_frames`, the rest at low_bytes.
VideoTrace burst(std::size_t frames, std::uint64_t low_bytes, std::uint64_t high_bytes,
                 std::size_t period_frames, std::size_t high_frames, double fps,
                 std::uint32_t packet_size);

/// A CIF-like IPPP stream: a large first I-frame followed by P-frames whose
/// size drifts slowly (camera motion) with frame-level jitter.
VideoTrace foreman_like(std::size_t frames, double fps, std::uint32_t packet_size);

}  // namespace synthetic

}  // namespace daf
