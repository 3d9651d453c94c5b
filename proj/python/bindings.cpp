#include "daf/config.hpp"
#include "daf/harness.hpp"
#include "daf/protocol.hpp"
#include "daf/sampling.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;

namespace {

daf::VideoTrace trace_from_csv(const std::string& text, std::uint32_t packet_size, double fps) {
    std::istringstream in(text);
    return daf::load_trace(in, packet_size, fps);
}

std::string trace_to_csv(const daf::VideoTrace& trace) {
    std::ostringstream out;
    daf::write_trace(out, trace);
    return out.str();
}

std::vector<double> matrix_rows(const daf::SamplingMatrix& m, std::size_t row) {
    std::vector<double> out(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) out[static_cast<std::size_t>(c)] = m(static_cast<Eigen::Index>(row), c);
    return out;
}

py::bytes header_bytes(const daf::DafHeader& h) {
    const auto b = daf::encode_header(h);
    return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
}

daf::DafHeader header_from_bytes(const py::bytes& data) {
    const std::string s = data;
    return daf::decode_header(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

}  // namespace

PYBIND11_MODULE(dafcodes, m) {
    m.doc() = "Delay-aware sliding-window fountain codes: traces, sampling optimizers, sessions and sweeps.";

    py::register_exception<daf::TraceError>(m, "TraceError", PyExc_ValueError);
    py::register_exception<daf::ParamError>(m, "ParamError", PyExc_ValueError);
    py::register_exception<daf::SamplingError>(m, "SamplingError", PyExc_ValueError);
    py::register_exception<daf::ProtocolError>(m, "ProtocolError", PyExc_ValueError);
    py::register_exception<daf::ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<daf::SolverError>(m, "SolverError", PyExc_RuntimeError);

    py::class_<daf::VideoTrace>(m, "VideoTrace")
        .def_property_readonly("frame_count", &daf::VideoTrace::frame_count)
        .def_property_readonly("fps", &daf::VideoTrace::fps)
        .def_property_readonly("packet_size", &daf::VideoTrace::packet_size)
        .def_property_readonly("total_packets", &daf::VideoTrace::total_packets)
        .def_property_readonly("frame_bytes", &daf::VideoTrace::frame_bytes)
        .def_property_readonly("packets_per_frame", &daf::VideoTrace::packets_per_frame)
        .def("to_csv", &trace_to_csv);

    m.def("trace_from_csv", &trace_from_csv, py::arg("text"), py::arg("packet_size") = 1024,
          py::arg("fps") = 30.0);
    m.def("constant_trace", &daf::synthetic::constant, py::arg("frames"), py::arg("bytes_per_frame"),
          py::arg("fps") = 30.0, py::arg("packet_size") = 1024);
    m.def("burst_trace", &daf::synthetic::burst, py::arg("frames"), py::arg("low_bytes"), py::arg("high_bytes"),
          py::arg("period"), py::arg("high_frames"), py::arg("fps") = 30.0, py::arg("packet_size") = 1024);
    m.def("foreman_like_trace", &daf::synthetic::foreman_like, py::arg("frames") = 300, py::arg("fps") = 30.0,
          py::arg("packet_size") = 1024);

    py::class_<daf::AspProfile>(m, "AspProfile")
        .def_readonly("value", &daf::AspProfile::value)
        .def_readonly("step", &daf::AspProfile::step)
        .def_readonly("windows", &daf::AspProfile::windows)
        .def("objective", &daf::AspProfile::objective)
        .def("normalized_variance", &daf::AspProfile::normalized_variance)
        .def("normalized", &daf::AspProfile::normalized);

    m.def(
        "uniform_asp",
        [](const daf::VideoTrace& t, std::size_t window, std::size_t step) {
            return daf::uniform_asp(daf::make_geometry(t, window, step));
        },
        py::arg("trace"), py::arg("window"), py::arg("step") = 1);
    m.def(
        "slope_asp",
        [](const daf::VideoTrace& t, std::size_t window, std::size_t step, const std::vector<double>& slopes) {
            return daf::asp_from_window_slopes(daf::make_geometry(t, window, step), slopes);
        },
        py::arg("trace"), py::arg("window"), py::arg("step"), py::arg("slopes"));
    m.def(
        "optimize_slopes",
        [](const daf::VideoTrace& t, std::size_t window, std::size_t step) {
            auto r = daf::optimize_slopes(daf::make_geometry(t, window, step));
            return py::make_tuple(r.slopes, r.asp, r.objective);
        },
        py::arg("trace"), py::arg("window"), py::arg("step") = 1,
        "Returns (slopes, asp, objective).");
    m.def(
        "optimize_per_frame",
        [](const daf::VideoTrace& t, std::size_t window, std::size_t step) {
            auto r = daf::optimize_per_frame(daf::make_geometry(t, window, step));
            std::vector<std::vector<double>> plan;
            for (Eigen::Index i = 0; i < r.plan.rows(); ++i) plan.push_back(matrix_rows(r.plan, static_cast<std::size_t>(i)));
            return py::make_tuple(plan, r.asp, r.objective);
        },
        py::arg("trace"), py::arg("window"), py::arg("step") = 1,
        "Returns (plan rows, asp, objective).");

    py::class_<daf::CodingParams>(m, "CodingParams")
        .def_property_readonly("mode", [](const daf::CodingParams& p) { return std::string(daf::to_string(p.mode)); })
        .def_readonly("data_rate", &daf::CodingParams::data_rate)
        .def_readonly("code_rate", &daf::CodingParams::code_rate)
        .def_readonly("delay", &daf::CodingParams::delay)
        .def_readonly("step", &daf::CodingParams::step)
        .def_readonly("window", &daf::CodingParams::window)
        .def_readonly("packets_per_step", &daf::CodingParams::packets_per_step)
        .def_readonly("coded_total", &daf::CodingParams::coded_total)
        .def_readonly("native_total", &daf::CodingParams::native_total);

    m.def(
        "derive_params",
        [](const daf::VideoTrace& t, const std::string& mode, double delay_s, std::optional<double> code_rate,
           std::optional<double> data_rate_kbps, std::size_t step) {
            if (code_rate.has_value() == data_rate_kbps.has_value())
                throw daf::ParamError("give exactly one of code_rate and data_rate_kbps");
            const auto rate = code_rate ? daf::RateSpec::from_code_rate(*code_rate)
                                        : daf::RateSpec::from_data_rate(*data_rate_kbps * 1000.0 / 8.0);
            return daf::derive_params(t, rate, daf::delay_frames(delay_s, t.fps()), step, daf::parse_mode(mode));
        },
        py::arg("trace"), py::arg("mode"), py::arg("delay_s"), py::arg("code_rate") = py::none(),
        py::arg("data_rate_kbps") = py::none(), py::arg("step") = 1);

    py::class_<daf::ChannelModel>(m, "ChannelModel")
        .def(py::init([](const std::string& kind, double plr, unsigned hops, double period_s, double duty) {
                 daf::ChannelModel c;
                 c.kind = daf::parse_channel_kind(kind);
                 c.plr = plr;
                 c.hops = hops;
                 c.period_s = period_s;
                 c.duty = duty;
                 c.validate();
                 return c;
             }),
             py::arg("kind") = "single", py::arg("plr") = 0.0, py::arg("hops") = 1, py::arg("period_s") = 4.0,
             py::arg("duty") = 1.0)
        .def_property_readonly("label", &daf::ChannelModel::label)
        .def("delivery_probability", &daf::ChannelModel::delivery_probability);

    py::class_<daf::SessionResult>(m, "SessionResult")
        .def_property_readonly("idr", [](const daf::SessionResult& r) { return r.metrics().idr; })
        .def_property_readonly("fdr", [](const daf::SessionResult& r) { return r.metrics().fdr; })
        .def_readonly("in_time", &daf::SessionResult::in_time)
        .def_readonly("late", &daf::SessionResult::late)
        .def_readonly("never", &daf::SessionResult::never)
        .def_readonly("wcp_packets", &daf::SessionResult::wcp_packets)
        .def_readonly("coded_sent", &daf::SessionResult::coded_sent)
        .def_readonly("coded_delivered", &daf::SessionResult::coded_delivered)
        .def_readonly("meta_mismatches", &daf::SessionResult::meta_mismatches)
        .def_readonly("payload_mismatches", &daf::SessionResult::payload_mismatches)
        .def_readonly("config", &daf::SessionResult::config)
        .def("serialize", [](const daf::SessionResult& r) { return py::bytes(r.serialize()); });

    m.def(
        "run_session",
        [](const daf::VideoTrace& t, const daf::CodingParams& p, const daf::ChannelModel& ch, std::uint64_t seed,
           bool carry_payload) {
            daf::SessionOptions o;
            o.carry_payload = carry_payload;
            py::gil_scoped_release release;
            return daf::run_session(t, p, daf::make_plan(t, p), ch, seed, o);
        },
        py::arg("trace"), py::arg("params"), py::arg("channel"), py::arg("seed") = 1,
        py::arg("carry_payload") = false);

    m.def(
        "sweep",
        [](const daf::VideoTrace& t, const std::vector<std::string>& modes, const std::vector<double>& code_rates,
           const std::vector<double>& delays_s, const std::vector<daf::ChannelModel>& channels,
           std::size_t repetitions, std::uint64_t base_seed, std::size_t step) {
            daf::SweepGrid g;
            for (const auto& mode : modes) g.modes.push_back(daf::parse_mode(mode));
            g.code_rates = code_rates;
            g.delays_s = delays_s;
            g.channels = channels;
            g.repetitions = repetitions;
            g.base_seed = base_seed;
            g.step_frames = step;
            std::vector<daf::SweepRow> rows;
            {
                py::gil_scoped_release release;
                rows = daf::sweep(t, g);
            }
            std::ostringstream out;
            daf::write_sweep_csv(out, rows);
            return out.str();
        },
        py::arg("trace"), py::arg("modes"), py::arg("code_rates"), py::arg("delays_s"), py::arg("channels"),
        py::arg("repetitions") = 20, py::arg("base_seed") = 1, py::arg("step") = 1,
        "Runs the grid and returns the CSV text.");

    py::class_<daf::DafHeader>(m, "DafHeader")
        .def(py::init([](std::uint32_t start_packet, std::uint16_t window_size, float slope, std::uint32_t packet_id,
                         std::uint16_t payload_size) {
                 return daf::DafHeader{start_packet, window_size, slope, packet_id, payload_size};
             }),
             py::arg("start_packet"), py::arg("window_size"), py::arg("slope"), py::arg("packet_id"),
             py::arg("payload_size"))
        .def_readwrite("start_packet", &daf::DafHeader::start_packet)
        .def_readwrite("window_size", &daf::DafHeader::window_size)
        .def_readwrite("slope", &daf::DafHeader::slope)
        .def_readwrite("packet_id", &daf::DafHeader::packet_id)
        .def_readwrite("payload_size", &daf::DafHeader::payload_size)
        .def("__eq__", [](const daf::DafHeader& a, const daf::DafHeader& b) { return a == b; });

    m.def("encode_header", &header_bytes, py::arg("header"));
    m.def("decode_header", &header_from_bytes, py::arg("data"));
    m.attr("HEADER_SIZE") = daf::kHeaderSize;
}
