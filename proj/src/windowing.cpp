#include "daf/windowing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace daf {

std::string_view to_string(Mode mode) noexcept {
    switch (mode) {
        case Mode::Daf: return "DAF";
        case Mode::DafL: return "DAF-L";
        case Mode::SlidingLt: return "S-LT";
        case Mode::Block: return "Block";
        case Mode::Expand: return "Expand";
    }
    return "?";
}

Mode parse_mode(std::string_view name) {
    for (Mode m : kAllModes)
        if (to_string(m) == name) return m;
    std::string lower(name);
    for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower == "daf") return Mode::Daf;
    if (lower == "daf-l" || lower == "dafl") return Mode::DafL;
    if (lower == "s-lt" || lower == "slt") return Mode::SlidingLt;
    if (lower == "block") return Mode::Block;
    if (lower == "expand") return Mode::Expand;
    throw ParamError("unknown mode '" + std::string(name) + "'");
}

CodingParams derive_params(const VideoTrace& trace, const RateSpec& rate, std::size_t delay_frames,
                           std::size_t step, Mode mode) {
    if (rate.code_rate.has_value() == rate.data_rate.has_value())
        throw ParamError("give exactly one of code rate and data rate");
    if (step < 1) throw ParamError("step size must be >= 1 frame");
    if (step % trace.gop_size() != 0) throw ParamError("step size must be a multiple of the GOP size");
    if (delay_frames < 2 * step)
        throw ParamError("infeasible: delay of " + std::to_string(delay_frames) +
                         " frames is below twice the step size");

    const std::size_t T = trace.frame_count();
    CodingParams p;
    p.mode = mode;
    p.delay = delay_frames;
    p.fps = trace.fps();
    p.packet_size = trace.packet_size();
    p.frame_count = T;
    p.native_total = trace.total_packets();

    if (mode == Mode::Block) {
        const std::size_t w = (delay_frames / 2) / step * step;
        if (w >= T) throw ParamError("infeasible: block covers the whole trace");
        p.window = w;
        p.step = w;
        // a trailing partial block is sent as a shorter window
        p.entry_count = (T + w - 1) / w;
        p.window_steps = p.entry_count - 1;
    } else {
        if (T % step != 0) throw ParamError("frame count must be a multiple of the step size");
        const std::size_t w = (delay_frames - step) / step * step;
        if (w >= T) throw ParamError("infeasible: window covers the whole trace");
        p.window = w;
        p.step = step;
        p.window_steps = (T - w) / step;
        p.entry_count = p.window_steps + 1;
    }

    const double F = p.fps;
    const double P = p.packet_size;
    const double span = static_cast<double>(p.window_steps * p.step);  // T - W frames
    if (rate.code_rate) {
        const double c = *rate.code_rate;
        if (!(c > 0) || !std::isfinite(c)) throw ParamError("code rate must be positive");
        p.coded_total = static_cast<std::uint64_t>(std::llround(static_cast<double>(p.native_total) / c));
        if (p.coded_total == 0) throw ParamError("code rate leaves no coded packets");
        p.data_rate = static_cast<double>(p.coded_total) * F * P / span;
    } else {
        const double r = *rate.data_rate;
        if (!(r > 0) || !std::isfinite(r)) throw ParamError("data rate must be positive");
        p.data_rate = r;
        p.coded_total = static_cast<std::uint64_t>(std::floor(r * span / (F * P)));
        if (p.coded_total == 0) throw ParamError("data rate leaves no coded packets");
    }
    p.packets_per_step = p.data_rate * static_cast<double>(p.step) / (F * P);
    p.code_rate = static_cast<double>(p.native_total) / static_cast<double>(p.coded_total);
    return p;
}

std::uint64_t sliding_lt_window(const VideoTrace& trace, std::size_t window_frames) {
    std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
    for (std::size_t t = 1; t + window_frames - 1 <= trace.frame_count(); ++t)
        best = std::min(best, trace.packets_in_range(t, window_frames));
    return best;
}

WindowSchedule schedule(const CodingParams& params, const VideoTrace& trace) {
    if (params.frame_count != trace.frame_count() || params.native_total != trace.total_packets())
        throw ParamError("coding parameters were derived for a different trace");
    const std::size_t T = trace.frame_count();
    const std::size_t W = params.window;
    const std::size_t E = params.entry_count;
    const std::uint64_t k = trace.total_packets();
    const std::uint64_t slt = params.mode == Mode::SlidingLt ? sliding_lt_window(trace, W) : 0;

    WindowSchedule sched;
    sched.mode = params.mode;
    sched.entries.reserve(E);
    std::uint64_t sent = 0;
    for (std::size_t m = 0; m < E; ++m) {
        ScheduleEntry e;
        e.start_frame = 1 + m * params.step;
        e.end_frame = std::min(T, e.start_frame + W - 1);
        const std::uint64_t window_end = trace.first_packet(e.end_frame + 1) - 1;
        switch (params.mode) {
            case Mode::Daf:
            case Mode::DafL:
            case Mode::Block:
                e.start_packet = trace.first_packet(e.start_frame);
                e.window_packets = window_end - e.start_packet + 1;
                break;
            case Mode::SlidingLt:
                e.start_packet = trace.first_packet(e.start_frame);
                e.window_packets = std::min(slt, k - e.start_packet + 1);
                break;
            case Mode::Expand: {
                const std::size_t block_start = (e.start_frame - 1) / W * W + 1;
                e.start_packet = trace.first_packet(block_start);
                e.window_packets = window_end - e.start_packet + 1;
                break;
            }
        }
        // N spread over the E entries so the running total after entry m+1
        // is floor((m+1) N / E)
        const std::uint64_t upto = params.coded_total * (m + 1) / E;
        e.first_coded = sent;
        e.budget = upto - sent;
        sent = upto;
        sched.entries.push_back(e);
    }
    return sched;
}

bool WcpFrames::contains(std::size_t frame) const noexcept {
    return (!warmup.empty() && frame <= warmup.back()) ||
           (!cooldown.empty() && frame >= cooldown.front());
}

WcpFrames wcp_frames(const CodingParams& params) {
    WcpFrames out;
    if (params.mode == Mode::Block || params.window <= params.step) return out;
    const std::size_t len = params.window - params.step;
    const std::size_t T = params.frame_count;
    for (std::size_t t = 1; t <= len; ++t) out.warmup.push_back(t);
    for (std::size_t t = T - len + 1; t <= T; ++t) out.cooldown.push_back(t);
    return out;
}

std::vector<std::uint64_t> frame_deadlines(const WindowSchedule& sched, std::size_t frame_count) {
    std::vector<std::uint64_t> deadline(frame_count + 1, 0);
    // entries are in start order, so the last writer wins
    for (const auto& e : sched.entries)
        for (std::size_t t = e.start_frame; t <= e.end_frame && t <= frame_count; ++t)
            deadline[t] = e.first_coded + e.budget;
    return deadline;
}

}  // namespace daf
