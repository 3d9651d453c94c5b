#pragma once

#include "daf/channel.hpp"
#include "daf/ltcode.hpp"
#include "daf/trace.hpp"
#include "daf/windowing.hpp"

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <string>
#include <vector>

namespace daf {

/// Per-window slope factors, one per schedule entry. Empty means uniform.
struct SamplingPlan {
    std::vector<double> slopes;
};

/// Optimized slopes for DAF; uniform for every other mode.
SamplingPlan make_plan(const VideoTrace& trace, const CodingParams& params);

/// Thread-safe memo of make_plan keyed by (mode, W, dt), for sweeps that
/// revisit the same window geometry.
class PlanCache {
public:
    explicit PlanCache(const VideoTrace& trace) : trace_(trace) {}
    SamplingPlan get(const CodingParams& params);

private:
    const VideoTrace& trace_;
    std::mutex mu_;
    std::map<std::pair<std::size_t, std::size_t>, SamplingPlan> slopes_;
};

struct SessionOptions {
    bool carry_payload = false;  // XOR real bytes and verify them against the source
    double soliton_c = 0.03;
    double soliton_delta = 0.02;
};

inline constexpr std::uint64_t kNeverDecoded = std::numeric_limits<std::uint64_t>::max();

struct Metrics {
    double idr = 0;
    double fdr = 0;
};

struct SessionResult {
    Mode mode = Mode::Daf;
    std::uint64_t seed = 0;
    std::string config;  // echo of the parameters that produced this result
    /// Coded-packet index (PacketID) at which each native packet was decoded,
    /// 0 for W/CP padding, kNeverDecoded if it never was. Index p-1.
    std::vector<std::uint64_t> decoded_at;
    /// Per-frame deadline in coded-packet index. Index t-1.
    std::vector<std::uint64_t> deadline;
    WcpFrames wcp;
    std::uint64_t wcp_packets = 0;
    std::uint64_t in_time = 0;
    std::uint64_t late = 0;
    std::uint64_t never = 0;
    std::uint64_t coded_sent = 0;
    std::uint64_t coded_delivered = 0;
    std::uint64_t meta_mismatches = 0;     // decoder-side (degree, neighbors) != encoder's
    std::uint64_t payload_mismatches = 0;  // decoded bytes != source bytes

    Metrics metrics() const;
    /// Canonical byte encoding; equal results serialize identically.
    std::string serialize() const;
    bool operator==(const SessionResult&) const = default;
};

/// Send time of coded packet `packet_id` (1-based) at a constant data rate.
double send_time(const CodingParams& params, std::uint64_t packet_id);

SessionResult run_session(const VideoTrace& trace, const CodingParams& params, const SamplingPlan& plan,
                          const ChannelModel& channel, std::uint64_t seed, const SessionOptions& opts = {});

// ---- sweeps -----------------------------------------------------------------

struct SweepGrid {
    std::vector<Mode> modes;
    std::vector<double> code_rates;
    std::vector<double> delays_s;
    std::vector<ChannelModel> channels;
    std::size_t step_frames = 1;
    std::size_t repetitions = 20;
    std::uint64_t base_seed = 1;
};

struct SweepRow {
    Mode mode = Mode::Daf;
    double code_rate = 0;
    double delay_s = 0;
    std::string channel;
    double idr = 0;  // median over repetitions
    double fdr = 0;
    std::size_t repetitions = 0;
};

std::size_t delay_frames(double delay_s, double fps);

double median(std::vector<double> values);

/// Runs every cell of the grid with seeds base .. base+reps-1 and reports
/// medians. Rows come back in grid order (mode, code rate, delay, channel)
/// regardless of how many threads ran them.
std::vector<SweepRow> sweep(const VideoTrace& trace, const SweepGrid& grid, unsigned threads = 0,
                            const SessionOptions& opts = {});

// ---- reporting --------------------------------------------------------------

inline constexpr const char* kSweepCsvHeader = "mode,code_rate,delay_s,channel,idr,fdr";

/// Ratios below 10% print as N/A.
std::string format_ratio(double ratio);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, bool header = true);
/// Text table grouped by (code rate, delay, channel) with one line per mode.
void write_summary(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace daf
