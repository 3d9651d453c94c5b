#pragma once

#include "daf/trace.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace daf {

class ParamError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Mode { Daf, DafL, SlidingLt, Block, Expand };

std::string_view to_string(Mode mode) noexcept;
Mode parse_mode(std::string_view name);
inline constexpr Mode kAllModes[] = {Mode::Daf, Mode::DafL, Mode::SlidingLt, Mode::Block, Mode::Expand};

/// Exactly one of the two must be set; the other is derived from C = k / N.
struct RateSpec {
    std::optional<double> code_rate;
    std::optional<double> data_rate;  // bytes per second

    static RateSpec from_code_rate(double c) { return {c, std::nullopt}; }
    static RateSpec from_data_rate(double r) { return {std::nullopt, r}; }
};

struct CodingParams {
    Mode mode = Mode::Daf;
    double data_rate = 0;        // R, bytes/s
    double code_rate = 0;        // C = k / N
    std::size_t delay = 0;       // T_Delay, frames
    std::size_t step = 1;        // delta t, frames
    std::size_t window = 1;      // W, frames
    double packets_per_step = 0; // N_W
    std::size_t window_steps = 0;  // N_window
    std::size_t entry_count = 0;   // number of window positions actually sent
    std::uint64_t coded_total = 0; // N
    std::uint64_t native_total = 0;  // k
    double fps = 30;
    std::uint32_t packet_size = 1;
    std::size_t frame_count = 0;

    bool sliding() const noexcept { return mode != Mode::Block; }
};

/// Derives W, N_W, N and the missing rate. Sliding modes take the largest W
/// with W + dt <= T_Delay; block mode takes the largest W with 2W <= T_Delay
/// and then slides by dt = W.
CodingParams derive_params(const VideoTrace& trace, const RateSpec& rate, std::size_t delay_frames,
                           std::size_t step, Mode mode);

struct ScheduleEntry {
    std::size_t start_frame = 1;   // first frame of the time-based window
    std::size_t end_frame = 1;     // last frame of the time-based window
    std::uint64_t start_packet = 1;  // StartP
    std::uint64_t window_packets = 1;  // WSize
    std::uint64_t budget = 0;      // coded packets sent for this entry
    std::uint64_t first_coded = 0; // coded packets sent before this entry
};

struct WindowSchedule {
    Mode mode = Mode::Daf;
    std::vector<ScheduleEntry> entries;

    std::uint64_t coded_total() const noexcept {
        return entries.empty() ? 0 : entries.back().first_coded + entries.back().budget;
    }
};

WindowSchedule schedule(const CodingParams& params, const VideoTrace& trace);

/// The fixed S-LT window: the packet count of the smallest W-frame window.
std::uint64_t sliding_lt_window(const VideoTrace& trace, std::size_t window_frames);

struct WcpFrames {
    std::vector<std::size_t> warmup;
    std::vector<std::size_t> cooldown;

    bool contains(std::size_t frame) const noexcept;
    bool operator==(const WcpFrames&) const = default;
};

/// Frames covered by fewer than W/dt windows at the start and end of the
/// stream. Empty for block coding.
WcpFrames wcp_frames(const CodingParams& params);

/// For each frame, the number of coded packets sent up to and including the
/// last entry whose time-based window covers it. A packet of that frame is
/// in time iff it is decoded by that coded packet.
std::vector<std::uint64_t> frame_deadlines(const WindowSchedule& sched, std::size_t frame_count);

}  // namespace daf
