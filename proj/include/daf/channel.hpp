#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace daf {

enum class ChannelKind { Single, Chain, MobileRelay };

std::string_view to_string(ChannelKind kind) noexcept;
ChannelKind parse_channel_kind(std::string_view name);

/// Independent-erasure stand-in for a wireless path.
///
/// Single hop and chain draw one Bernoulli per packet against the composite
/// delivery probability (1 - plr)^hops. The mobile relay is a two-hop chain
/// behind a square-wave gate: the relay is reachable for the first
/// `duty * period` seconds of every period and everything sent outside that
/// phase is lost.
struct ChannelModel {
    ChannelKind kind = ChannelKind::Single;
    double plr = 0.0;        // per hop
    unsigned hops = 1;
    double period_s = 4.0;   // mobile relay only
    double duty = 1.0;       // fraction of each period the relay is connected
    std::uint64_t seed = 1;

    void validate() const;
    double delivery_probability() const noexcept;
    bool relay_connected(double send_time) const noexcept;
    /// Short label used in sweep output, e.g. "single:0.1", "chain3:0.05".
    std::string label() const;
};

/// Whether a packet gets through. A pure function of (model, index, time).
bool transmit(const ChannelModel& model, std::uint64_t packet_index, double send_time);

}  // namespace daf
