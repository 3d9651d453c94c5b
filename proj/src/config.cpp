#include "daf/config.hpp"

#include <charconv>
#include <fstream>

namespace daf {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': '" + text + "' is not a number");
    }
}

}  // namespace

Config Config::parse(std::istream& in) {
    Config cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        cfg.values_[key] = trim(line.substr(eq + 1));
    }
    return cfg;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    return parse(in);
}

void Config::apply(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
    values_[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

std::string Config::str(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

std::string Config::str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
    return it->second;
}

double Config::num(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : to_double(key, it->second);
}

double Config::num(const std::string& key) const { return to_double(key, str(key)); }

std::optional<double> Config::maybe_num(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return num(key);
}

std::vector<std::string> Config::list(const std::string& key) const {
    std::vector<std::string> out;
    const std::string text = str(key, "");
    std::size_t start = 0;
    while (start <= text.size()) {
        auto comma = text.find(',', start);
        if (comma == std::string::npos) comma = text.size();
        const std::string item = trim(text.substr(start, comma - start));
        if (!item.empty()) out.push_back(item);
        start = comma + 1;
    }
    return out;
}

std::vector<double> Config::num_list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : list(key)) out.push_back(to_double(key, item));
    return out;
}

bool Config::flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = str(key);
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw ConfigError("config key '" + key + "': '" + v + "' is not a boolean");
}

VideoTrace trace_from_config(const Config& cfg) {
    const auto P = static_cast<std::uint32_t>(cfg.num("packet_size", 1024));
    const double fps = cfg.num("trace.fps", 30);
    const auto gop = static_cast<std::uint32_t>(cfg.num("trace.gop", 1));
    const std::string source = cfg.str("trace", "synthetic:foreman");
    const auto frames = static_cast<std::size_t>(cfg.num("trace.frames", 300));
    if (source.rfind("synthetic:", 0) != 0) return load_trace_file(source, P, fps, gop);

    const std::string kind = source.substr(10);
    if (kind == "foreman") return synthetic::foreman_like(frames, fps, P);
    if (kind == "constant")
        return synthetic::constant(frames, static_cast<std::uint64_t>(cfg.num("trace.bytes", 8192)), fps, P);
    if (kind == "sinusoidal")
        return synthetic::sinusoidal(frames, static_cast<std::uint64_t>(cfg.num("trace.bytes", 9000)),
                                     cfg.num("trace.amplitude", 0.5), cfg.num("trace.period", 100), fps, P);
    if (kind == "burst")
        return synthetic::burst(frames, static_cast<std::uint64_t>(cfg.num("trace.low_bytes", 4096)),
                                static_cast<std::uint64_t>(cfg.num("trace.high_bytes", 16384)),
                                static_cast<std::size_t>(cfg.num("trace.period", 60)),
                                static_cast<std::size_t>(cfg.num("trace.high_frames", 20)), fps, P);
    throw ConfigError("unknown synthetic trace '" + kind + "'");
}

RateSpec rate_from_config(const Config& cfg) {
    const bool c = cfg.has("code_rate");
    const bool r = cfg.has("data_rate_kbps");
    if (c == r) throw ConfigError("set exactly one of code_rate and data_rate_kbps");
    if (c) return RateSpec::from_code_rate(cfg.num("code_rate"));
    return RateSpec::from_data_rate(cfg.num("data_rate_kbps") * 1000.0 / 8.0);
}

ChannelModel channel_from_config(const Config& cfg) {
    ChannelModel ch;
    try {
        ch.kind = parse_channel_kind(cfg.str("channel.kind", "single"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    ch.plr = cfg.num("channel.plr", 0.0);
    ch.hops = static_cast<unsigned>(cfg.num("channel.hops", ch.kind == ChannelKind::MobileRelay ? 2 : 1));
    ch.period_s = cfg.num("channel.period_s", 4.0);
    ch.duty = cfg.num("channel.duty", 1.0);
    try {
        ch.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return ch;
}

SweepGrid grid_from_config(const Config& cfg) {
    SweepGrid grid;
    const auto modes = cfg.has("sweep.modes") ? cfg.list("sweep.modes") : std::vector<std::string>{cfg.str("mode", "DAF")};
    for (const auto& m : modes) {
        try {
            grid.modes.push_back(parse_mode(m));
        } catch (const ParamError& e) {
            throw ConfigError(e.what());
        }
    }
    grid.code_rates = cfg.has("sweep.code_rates") ? cfg.num_list("sweep.code_rates")
                                                  : std::vector<double>{cfg.num("code_rate")};
    grid.delays_s = cfg.has("sweep.delays_s") ? cfg.num_list("sweep.delays_s")
                                              : std::vector<double>{cfg.num("delay_s")};
    const ChannelModel base = channel_from_config(cfg);
    if (cfg.has("sweep.plrs")) {
        for (double plr : cfg.num_list("sweep.plrs")) {
            ChannelModel ch = base;
            ch.plr = plr;
            ch.validate();
            grid.channels.push_back(ch);
        }
    } else {
        grid.channels.push_back(base);
    }
    grid.step_frames = static_cast<std::size_t>(cfg.num("dt_frames", 1));
    grid.repetitions = static_cast<std::size_t>(cfg.num("reps", 20));
    grid.base_seed = static_cast<std::uint64_t>(cfg.num("seed", 1));
    if (grid.modes.empty() || grid.code_rates.empty() || grid.delays_s.empty())
        throw ConfigError("sweep grid is empty");
    return grid;
}

SessionOptions session_options_from_config(const Config& cfg) {
    SessionOptions o;
    o.carry_payload = cfg.flag("carry_payload", false);
    o.soliton_c = cfg.num("soliton.c", 0.03);
    o.soliton_delta = cfg.num("soliton.delta", 0.02);
    return o;
}

}  // namespace daf
