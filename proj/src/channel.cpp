#include "daf/channel.hpp"

#include "daf/rng.hpp"

#include <cmath>
#include <sstream>

namespace daf {

std::string_view to_string(ChannelKind kind) noexcept {
    switch (kind) {
        case ChannelKind::Single: return "single";
        case ChannelKind::Chain: return "chain";
        case ChannelKind::MobileRelay: return "mobile-relay";
    }
    return "?";
}

ChannelKind parse_channel_kind(std::string_view name) {
    if (name == "single") return ChannelKind::Single;
    if (name == "chain") return ChannelKind::Chain;
    if (name == "mobile-relay" || name == "mobile") return ChannelKind::MobileRelay;
    throw std::invalid_argument("unknown channel kind '" + std::string(name) + "'");
}

void ChannelModel::validate() const {
    if (!(plr >= 0.0 && plr < 1.0)) throw std::invalid_argument("channel plr must be in [0, 1)");
    if (hops < 1) throw std::invalid_argument("channel needs at least one hop");
    if (kind == ChannelKind::MobileRelay) {
        if (!(period_s > 0)) throw std::invalid_argument("relay period must be positive");
        if (!(duty > 0.0 && duty <= 1.0)) throw std::invalid_argument("relay duty cycle must be in (0, 1]");
    }
}

double ChannelModel::delivery_probability() const noexcept {
    const unsigned h = kind == ChannelKind::Single ? 1u : kind == ChannelKind::MobileRelay ? 2u : hops;
    return std::pow(1.0 - plr, static_cast<double>(h));
}

bool ChannelModel::relay_connected(double send_time) const noexcept {
    if (kind != ChannelKind::MobileRelay) return true;
    const double phase = std::fmod(send_time, period_s) / period_s;
    return phase < duty;
}

std::string ChannelModel::label() const {
    std::ostringstream os;
    switch (kind) {
        case ChannelKind::Single: os << "single:" << plr; break;
        case ChannelKind::Chain: os << "chain" << hops << ':' << plr; break;
        case ChannelKind::MobileRelay: os << "relay:" << plr << ':' << duty << '@' << period_s << 's'; break;
    }
    return os.str();
}

bool transmit(const ChannelModel& model, std::uint64_t packet_index, double send_time) {
    if (!model.relay_connected(send_time)) return false;
    if (model.plr == 0.0) return true;
    return counter_unit(model.seed, packet_index) < model.delivery_probability();
}

}  // namespace daf
