#include "daf/config.hpp"
#include "daf/harness.hpp"
#include "daf/protocol.hpp"
#include "daf/sampling.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

namespace {

struct Common {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> reps;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("-c,--config", c.config_path, "flat key = value config file");
    cmd->add_option("-s,--set", c.overrides, "override a config key (key=value)");
    cmd->add_option("-o,--out", c.out, "output file (default stdout)");
    cmd->add_option("--seed", c.seed, "base seed");
    cmd->add_option("--reps", c.reps, "repetitions per cell");
}

daf::Config load_config(const Common& c) {
    daf::Config cfg = c.config_path.empty() ? daf::Config{} : daf::Config::load(c.config_path);
    for (const auto& o : c.overrides) cfg.apply(o);
    if (c.seed) cfg.set("seed", std::to_string(*c.seed));
    if (c.reps) cfg.set("reps", std::to_string(*c.reps));
    return cfg;
}

/// Returns stdout or an opened file; throws if the file cannot be created.
std::ostream& output(const Common& c, std::unique_ptr<std::ofstream>& holder) {
    if (c.out.empty() || c.out == "-") return std::cout;
    holder = std::make_unique<std::ofstream>(c.out);
    if (!*holder) throw std::runtime_error("cannot write " + c.out);
    return *holder;
}

std::size_t step_of(const daf::Config& cfg) { return static_cast<std::size_t>(cfg.num("dt_frames", 1)); }

daf::CodingParams params_of(const daf::Config& cfg, const daf::VideoTrace& trace, daf::Mode mode) {
    const auto delay = daf::delay_frames(cfg.num("delay_s"), trace.fps());
    return daf::derive_params(trace, daf::rate_from_config(cfg), delay, step_of(cfg), mode);
}

int cmd_optimize(const Common& c, bool skip_per_frame) {
    const auto cfg = load_config(c);
    const auto trace = daf::trace_from_config(cfg);
    const std::size_t step = step_of(cfg);
    std::size_t window = 0;
    if (cfg.has("window_frames")) {
        window = static_cast<std::size_t>(cfg.num("window_frames"));
    } else {
        const auto delay = daf::delay_frames(cfg.num("delay_s"), trace.fps());
        if (delay <= step) throw daf::ConfigError("delay_s too small for dt_frames");
        window = (delay - step) / step * step;
    }
    const auto geo = daf::make_geometry(trace, window, step);
    const auto uniform = daf::uniform_asp(geo).normalized();
    const auto slope = daf::optimize_slopes(geo);
    const auto slope_n = slope.asp.normalized();
    std::vector<double> per_frame_n;
    double per_frame_var = 0;
    if (!skip_per_frame) {
        const auto pf = daf::optimize_per_frame(geo);
        per_frame_n = pf.asp.normalized();
        per_frame_var = pf.asp.normalized_variance();
    }

    std::unique_ptr<std::ofstream> file;
    std::ostream& out = output(c, file);
    out << "frame,P_uniform,P_slope,P_perframe\n" << std::setprecision(10);
    for (std::size_t t = 1; t <= trace.frame_count(); ++t) {
        const std::size_t u = (t - 1) / step;
        out << t << ',' << uniform[u] << ',' << slope_n[u] << ',';
        if (!skip_per_frame) out << per_frame_n[u];
        out << '\n';
    }
    std::cerr << "window " << window << " frames, step " << step << " frames\n"
              << "normalized variance: uniform " << daf::uniform_asp(geo).normalized_variance() << ", slope "
              << slope.asp.normalized_variance();
    if (!skip_per_frame) std::cerr << ", per-frame " << per_frame_var;
    std::cerr << '\n';
    return 0;
}

int cmd_run(const Common& c) {
    const auto cfg = load_config(c);
    const auto trace = daf::trace_from_config(cfg);
    const auto mode = daf::parse_mode(cfg.str("mode", "DAF"));
    const auto params = params_of(cfg, trace, mode);
    auto channel = daf::channel_from_config(cfg);
    const auto seed = static_cast<std::uint64_t>(cfg.num("seed", 1));
    const auto plan = daf::make_plan(trace, params);
    const auto r = daf::run_session(trace, params, plan, channel, seed, daf::session_options_from_config(cfg));
    const auto m = r.metrics();

    std::unique_ptr<std::ofstream> file;
    std::ostream& out = output(c, file);
    out << "mode,code_rate,data_rate_kbps,delay_s,window,channel,seed,idr,fdr,in_time,late,never,"
           "wcp_packets,coded_sent,coded_delivered,meta_mismatches,payload_mismatches\n";
    out << std::setprecision(6) << daf::to_string(mode) << ',' << params.code_rate << ','
        << params.data_rate * 8.0 / 1000.0 << ',' << cfg.num("delay_s") << ',' << params.window << ','
        << channel.label() << ',' << seed << ',' << m.idr << ',' << m.fdr << ',' << r.in_time << ','
        << r.late << ',' << r.never << ',' << r.wcp_packets << ',' << r.coded_sent << ','
        << r.coded_delivered << ',' << r.meta_mismatches << ',' << r.payload_mismatches << '\n';
    return 0;
}

int cmd_sweep(const Common& c, unsigned threads, bool summary) {
    const auto cfg = load_config(c);
    const auto trace = daf::trace_from_config(cfg);
    const auto grid = daf::grid_from_config(cfg);
    const auto rows = daf::sweep(trace, grid, threads, daf::session_options_from_config(cfg));
    std::unique_ptr<std::ofstream> file;
    std::ostream& out = output(c, file);
    daf::write_sweep_csv(out, rows);
    if (summary) daf::write_summary(std::cerr, rows);
    return 0;
}

std::string hex(std::span<const std::uint8_t> bytes) {
    std::ostringstream s;
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        if (i) s << ' ';
        s << std::hex << std::uppercase << std::setw(2) << std::setfill('0') << int(bytes[i]);
    }
    return s.str();
}

int cmd_golden(const Common& c) {
    std::unique_ptr<std::ofstream> file;
    std::ostream& out = output(c, file);
    const daf::DafHeader vectors[] = {
        {1, 1, 0.0f, 1, 1024},
        {1, 1, -1.0f, 1, 1024},
        {0x01020304, 0x0506, 0.5f, 0x0708090A & daf::kMaxPacketId, 0x0B0C},
    };
    out << "start_packet,window_size,slope,packet_id,payload_size,bytes\n";
    for (const auto& h : vectors) {
        out << h.start_packet << ',' << h.window_size << ',' << h.slope << ',' << h.packet_id << ','
            << h.payload_size << ',' << hex(daf::encode_header(h)) << '\n';
    }
    return 0;
}

int cmd_trace(const Common& c) {
    const auto cfg = load_config(c);
    const auto trace = daf::trace_from_config(cfg);
    std::unique_ptr<std::ofstream> file;
    daf::write_trace(output(c, file), trace);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Delay-aware sliding-window fountain codes"};
    app.require_subcommand(1);

    Common common;
    bool skip_per_frame = false;
    unsigned threads = 0;
    bool summary = false;

    auto* optimize = app.add_subcommand("optimize", "emit uniform, slope and per-frame ASP profiles as CSV");
    add_common(optimize, common);
    optimize->add_flag("--skip-per-frame", skip_per_frame, "only run the slope optimizer");

    auto* run = app.add_subcommand("run", "run one coding session and print its metrics");
    add_common(run, common);

    auto* sweep = app.add_subcommand("sweep", "run a mode x C x delay x channel grid, median metrics as CSV");
    add_common(sweep, common);
    sweep->add_option("-j,--threads", threads, "worker threads (0 = hardware concurrency)");
    sweep->add_flag("--summary", summary, "print a grouped table to stderr");

    auto* golden = app.add_subcommand("golden", "print header golden vectors");
    add_common(golden, common);

    auto* trace = app.add_subcommand("trace", "write the configured trace as frame,bytes,type CSV");
    add_common(trace, common);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*optimize) return cmd_optimize(common, skip_per_frame);
        if (*run) return cmd_run(common);
        if (*sweep) return cmd_sweep(common, threads, summary);
        if (*golden) return cmd_golden(common);
        if (*trace) return cmd_trace(common);
    } catch (const daf::SolverError& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
