#pragma once

#include "daf/channel.hpp"
#include "daf/harness.hpp"
#include "daf/trace.hpp"
#include "daf/windowing.hpp"

#include <istream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace daf {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Flat `key = value` configuration. `#` starts a comment; lists are
/// comma-separated.
class Config {
public:
    static Config parse(std::istream& in);
    static Config load(const std::string& path);

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    /// Applies a "key=value" override.
    void apply(const std::string& assignment);
    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string str(const std::string& key, const std::string& fallback) const;
    std::string str(const std::string& key) const;
    double num(const std::string& key, double fallback) const;
    double num(const std::string& key) const;
    std::optional<double> maybe_num(const std::string& key) const;
    std::vector<std::string> list(const std::string& key) const;
    std::vector<double> num_list(const std::string& key) const;
    bool flag(const std::string& key, bool fallback) const;

    const std::map<std::string, std::string>& values() const noexcept { return values_; }

private:
    std::map<std::string, std::string> values_;
};

/// `trace = <path>` or `trace = synthetic:{foreman,constant,sinusoidal,burst}`
/// with trace.* shape keys, packet_size, trace.fps, trace.gop.
VideoTrace trace_from_config(const Config& cfg);

/// Exactly one of code_rate and data_rate_kbps.
RateSpec rate_from_config(const Config& cfg);

/// channel.kind, channel.plr, channel.hops, channel.period_s, channel.duty.
ChannelModel channel_from_config(const Config& cfg);

/// sweep.modes, sweep.code_rates, sweep.delays_s, sweep.plrs plus the base
/// channel; falls back to the single-run keys for any list not given.
SweepGrid grid_from_config(const Config& cfg);

SessionOptions session_options_from_config(const Config& cfg);

}  // namespace daf
