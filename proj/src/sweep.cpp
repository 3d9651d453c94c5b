#include "daf/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <iomanip>
#include <thread>

namespace daf {

std::size_t delay_frames(double delay_s, double fps) {
    if (!(delay_s > 0)) throw ParamError("delay must be positive");
    return static_cast<std::size_t>(std::llround(delay_s * fps));
}

double median(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<SweepRow> sweep(const VideoTrace& trace, const SweepGrid& grid, unsigned threads,
                            const SessionOptions& opts) {
    struct Cell {
        SweepRow row;
        CodingParams params;
        const ChannelModel* channel;
    };
    std::vector<Cell> cells;
    for (Mode mode : grid.modes)
        for (double c : grid.code_rates)
            for (double d : grid.delays_s)
                for (const auto& ch : grid.channels) {
                    ch.validate();
                    Cell cell;
                    cell.row.mode = mode;
                    cell.row.code_rate = c;
                    cell.row.delay_s = d;
                    cell.row.channel = ch.label();
                    cell.row.repetitions = grid.repetitions;
                    cell.params = derive_params(trace, RateSpec::from_code_rate(c),
                                                delay_frames(d, trace.fps()), grid.step_frames, mode);
                    cell.channel = &ch;
                    cells.push_back(std::move(cell));
                }
    if (cells.empty() || grid.repetitions == 0) return {};

    PlanCache plans(trace);
    std::vector<SamplingPlan> cell_plans(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) cell_plans[i] = plans.get(cells[i].params);

    const std::size_t reps = grid.repetitions;
    const std::size_t tasks = cells.size() * reps;
    std::vector<Metrics> results(tasks);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;

    auto worker = [&]() {
        for (std::size_t i; (i = next.fetch_add(1)) < tasks;) {
            const std::size_t c = i / reps;
            const std::size_t r = i % reps;
            try {
                results[i] = run_session(trace, cells[c].params, cell_plans[c], *cells[c].channel,
                                         grid.base_seed + r, opts)
                                 .metrics();
            } catch (...) {
                std::lock_guard lock(failure_mu);
                if (!failure) failure = std::current_exception();
                next.store(tasks);
            }
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, tasks));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);

    std::vector<SweepRow> rows;
    rows.reserve(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
        std::vector<double> idr, fdr;
        for (std::size_t r = 0; r < reps; ++r) {
            idr.push_back(results[c * reps + r].idr);
            fdr.push_back(results[c * reps + r].fdr);
        }
        SweepRow row = cells[c].row;
        row.idr = median(idr);
        row.fdr = median(fdr);
        rows.push_back(row);
    }
    return rows;
}

std::string format_ratio(double ratio) {
    if (ratio < 0.10) return "N/A";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", ratio);
    return buf;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, bool header) {
    if (header) out << kSweepCsvHeader << '\n';
    for (const auto& r : rows) {
        out << to_string(r.mode) << ',' << r.code_rate << ',' << r.delay_s << ',' << r.channel << ','
            << format_ratio(r.idr) << ',' << format_ratio(r.fdr) << '\n';
    }
}

void write_summary(std::ostream& out, const std::vector<SweepRow>& rows) {
    auto pct = [](double v) {
        if (v < 0.10) return std::string("N/A");
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * v);
        return std::string(buf);
    };
    // group by (code rate, delay, channel) in first-seen order
    std::vector<std::size_t> done(rows.size(), 0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (done[i]) continue;
        const auto& key = rows[i];
        out << "C=" << key.code_rate << "  delay=" << key.delay_s << "s  channel=" << key.channel << '\n';
        out << "  " << std::left << std::setw(8) << "scheme" << std::right << std::setw(10) << "IDR"
            << std::setw(10) << "FDR" << '\n';
        for (std::size_t j = i; j < rows.size(); ++j) {
            const auto& r = rows[j];
            if (done[j] || r.code_rate != key.code_rate || r.delay_s != key.delay_s || r.channel != key.channel)
                continue;
            done[j] = 1;
            out << "  " << std::left << std::setw(8) << to_string(r.mode) << std::right << std::setw(10)
                << pct(r.idr) << std::setw(10) << pct(r.fdr) << '\n';
        }
    }
}

}  // namespace daf
