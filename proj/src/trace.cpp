#include "daf/trace.hpp"

#include "daf/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace daf {

namespace {

std::uint32_t packets_for(std::uint64_t bytes, std::uint32_t packet_size) {
    const std::uint64_t n = (bytes + packet_size - 1) / packet_size;
    return static_cast<std::uint32_t>(std::max<std::uint64_t>(n, 1));
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
    s = trim(s);
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

VideoTrace::VideoTrace(std::vector<std::uint64_t> frame_bytes, double fps, std::uint32_t gop_size,
                       std::uint32_t packet_size, std::vector<char> frame_types)
    : frame_bytes_(std::move(frame_bytes)),
      types_(std::move(frame_types)),
      fps_(fps),
      gop_size_(gop_size),
      packet_size_(packet_size) {
    if (frame_bytes_.empty()) throw TraceError("trace has no frames");
    if (!(fps_ > 0)) throw TraceError("frame rate must be positive");
    if (gop_size_ < 1) throw TraceError("GOP size must be >= 1");
    if (packet_size_ < 1) throw TraceError("packet size must be >= 1");
    if (types_.empty()) types_.assign(frame_bytes_.size(), 'P');
    if (types_.size() != frame_bytes_.size()) throw TraceError("frame type count mismatch");
    packets_.reserve(frame_bytes_.size());
    for (auto b : frame_bytes_) packets_.push_back(packets_for(b, packet_size_));
    build_index();
}

VideoTrace VideoTrace::from_packet_counts(std::vector<std::uint32_t> packets_per_frame, double fps,
                                          std::uint32_t gop_size, std::uint32_t packet_size) {
    std::vector<std::uint64_t> bytes;
    bytes.reserve(packets_per_frame.size());
    for (auto s : packets_per_frame) {
        if (s < 1) throw TraceError("every frame needs at least one packet");
        bytes.push_back(std::uint64_t{s} * packet_size);
    }
    return VideoTrace(std::move(bytes), fps, gop_size, packet_size);
}

void VideoTrace::build_index() {
    cum_.assign(packets_.size() + 1, 0);
    for (std::size_t i = 0; i < packets_.size(); ++i) cum_[i + 1] = cum_[i] + packets_[i];
}

std::uint32_t VideoTrace::packets_in(std::size_t frame) const {
    if (frame < 1 || frame > packets_.size()) throw TraceError("frame number out of range");
    return packets_[frame - 1];
}

std::uint64_t VideoTrace::first_packet(std::size_t frame) const {
    if (frame < 1 || frame > packets_.size() + 1) throw TraceError("frame number out of range");
    return cum_[frame - 1] + 1;
}

std::size_t VideoTrace::frame_of(std::uint64_t packet) const {
    if (packet < 1 || packet > total_packets()) throw TraceError("packet number out of range");
    // First cum_[i] >= packet gives frame i.
    auto it = std::lower_bound(cum_.begin() + 1, cum_.end(), packet);
    return static_cast<std::size_t>(it - cum_.begin());
}

std::uint64_t VideoTrace::packets_in_range(std::size_t first_frame, std::size_t frame_count) const {
    if (frame_count == 0) {
        if (first_frame < 1 || first_frame > packets_.size() + 1)
            throw TraceError("frame number out of range");
        return 0;
    }
    if (first_frame < 1 || first_frame + frame_count - 1 > packets_.size())
        throw TraceError("frame range out of bounds");
    return cum_[first_frame + frame_count - 1] - cum_[first_frame - 1];
}

VideoTrace load_trace(std::istream& in, std::uint32_t packet_size, double fps, std::uint32_t gop_size) {
    if (packet_size < 1) throw TraceError("packet size must be >= 1");
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::vector<std::uint64_t> bytes;
    std::vector<char> types;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = trim(line);
        if (view.empty()) continue;
        if (!header_seen) {
            if (view != "frame,bytes,type")
                throw TraceError("line " + std::to_string(line_no) +
                                 ": expected header \"frame,bytes,type\"");
            header_seen = true;
            continue;
        }
        std::vector<std::string_view> cols;
        std::size_t start = 0;
        while (true) {
            auto comma = view.find(',', start);
            cols.push_back(view.substr(start, comma == std::string_view::npos ? comma : comma - start));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        auto fail = [&](const std::string& what) {
            return TraceError("line " + std::to_string(line_no) + ": " + what);
        };
        if (cols.size() < 2 || cols.size() > 3) throw fail("expected 2 or 3 columns");
        std::uint64_t frame = 0, size = 0;
        if (!parse_number(cols[0], frame)) throw fail("bad frame number");
        if (!parse_number(cols[1], size)) throw fail("bad byte count");
        if (frame != bytes.size() + 1)
            throw fail("frame numbers must ascend from 1 without gaps");
        char type = 'P';
        if (cols.size() == 3) {
            auto t = trim(cols[2]);
            if (t.size() > 1) throw fail("frame type must be a single character");
            if (!t.empty()) type = t.front();
        }
        bytes.push_back(size);
        types.push_back(type);
    }
    if (!header_seen || bytes.empty()) throw TraceError("empty trace");
    return VideoTrace(std::move(bytes), fps, gop_size, packet_size, std::move(types));
}

VideoTrace load_trace_file(const std::string& path, std::uint32_t packet_size, double fps,
                           std::uint32_t gop_size) {
    std::ifstream in(path);
    if (!in) throw TraceError("cannot open trace file " + path);
    return load_trace(in, packet_size, fps, gop_size);
}

void write_trace(std::ostream& out, const VideoTrace& trace) {
    out << "frame,bytes,type\n";
    for (std::size_t t = 0; t < trace.frame_count(); ++t)
        out << t + 1 << ',' << trace.frame_bytes()[t] << ',' << trace.frame_types()[t] << '\n';
}

std::vector<std::uint8_t> packetize(const VideoTrace& trace,
                                    std::span<const std::vector<std::uint8_t>> payloads) {
    const std::size_t P = trace.packet_size();
    std::vector<std::uint8_t> out(trace.total_packets() * P, 0);
    if (payloads.empty()) return out;
    if (payloads.size() != trace.frame_count())
        throw TraceError("payload count does not match frame count");
    for (std::size_t t = 1; t <= trace.frame_count(); ++t) {
        const auto& blob = payloads[t - 1];
        if (blob.size() != trace.frame_bytes()[t - 1])
            throw TraceError("payload of frame " + std::to_string(t) + " has wrong length");
        std::copy(blob.begin(), blob.end(), out.begin() + (trace.first_packet(t) - 1) * P);
    }
    return out;
}

VideoTrace downsample(const VideoTrace& trace, std::uint32_t factor) {
    if (factor < 1) throw TraceError("downsample factor must be >= 1");
    if (trace.frame_count() % factor != 0)
        throw TraceError("frame count is not divisible by the downsample factor");
    if (factor % trace.gop_size() != 0)
        throw TraceError("downsample factor must be a multiple of the GOP size");
    if (factor == 1) return trace;
    std::vector<std::uint32_t> s;
    s.reserve(trace.frame_count() / factor);
    for (std::size_t t = 1; t <= trace.frame_count(); t += factor)
        s.push_back(static_cast<std::uint32_t>(trace.packets_in_range(t, factor)));
    return VideoTrace::from_packet_counts(std::move(s), trace.fps() / factor, 1, trace.packet_size());
}

namespace synthetic {

VideoTrace constant(std::size_t frames, std::uint64_t bytes_per_frame, double fps,
                    std::uint32_t packet_size) {
    return VideoTrace(std::vector<std::uint64_t>(frames, bytes_per_frame), fps, 1, packet_size);
}

VideoTrace sinusoidal(std::size_t frames, std::uint64_t mean_bytes, double relative_amplitude,
                      double period_frames, double fps, std::uint32_t packet_size) {
    std::vector<std::uint64_t> bytes(frames);
    for (std::size_t i = 0; i < frames; ++i) {
        const double phase = 2.0 * std::numbers::pi * static_cast<double>(i) / period_frames;
        const double v = static_cast<double>(mean_bytes) * (1.0 + relative_amplitude * std::sin(phase));
        bytes[i] = static_cast<std::uint64_t>(std::max(1.0, std::round(v)));
    }
    return VideoTrace(std::move(bytes), fps, 1, packet_size);
}

VideoTrace burst(std::size_t frames, std::uint64_t low_bytes, std::uint64_t high_bytes,
                 std::size_t period_frames, std::size_t high_frames, double fps,
                 std::uint32_t packet_size) {
    if (period_frames == 0 || high_frames > period_frames)
        throw TraceError("invalid burst shape");
    std::vector<std::uint64_t> bytes(frames);
    for (std::size_t i = 0; i < frames; ++i)
        bytes[i] = (i % period_frames) >= period_frames - high_frames ? high_bytes : low_bytes;
    return VideoTrace(std::move(bytes), fps, 1, packet_size);
}

VideoTrace foreman_like(std::size_t frames, double fps, std::uint32_t packet_size) {
    std::vector<std::uint64_t> bytes(frames);
    std::vector<char> types(frames, 'P');
    constexpr double kMean = 8500.0;
    for (std::size_t i = 0; i < frames; ++i) {
        const double t = static_cast<double>(i);
        // a motion cycle of three seconds plus per-frame jitter in [-12%, +12%]
        const double drift = 1.0 + 0.45 * std::sin(2.0 * std::numbers::pi * t / 90.0 - 1.2);
        const double jitter = 0.24 * (counter_unit(0x466F72656D616EULL, i) - 0.5);
        bytes[i] = static_cast<std::uint64_t>(std::round(kMean * drift * (1.0 + jitter)));
    }
    if (frames > 0) {
        bytes[0] = 42000;
        types[0] = 'I';
    }
    return VideoTrace(std::move(bytes), fps, 1, packet_size, std::move(types));
}

}  // namespace synthetic

}  // namespace daf
