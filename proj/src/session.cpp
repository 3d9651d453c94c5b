#include "daf/harness.hpp"

#include "daf/protocol.hpp"
#include "daf/rng.hpp"
#include "daf/sampling.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <sstream>

namespace daf {

SamplingPlan make_plan(const VideoTrace& trace, const CodingParams& params) {
    SamplingPlan plan;
    if (params.mode != Mode::Daf) return plan;
    const auto geo = make_geometry(trace, params.window, params.step);
    plan.slopes = optimize_slopes(geo).slopes;
    return plan;
}

SamplingPlan PlanCache::get(const CodingParams& params) {
    if (params.mode != Mode::Daf) return {};
    const auto key = std::make_pair(params.window, params.step);
    {
        std::lock_guard lock(mu_);
        if (auto it = slopes_.find(key); it != slopes_.end()) return it->second;
    }
    SamplingPlan plan = make_plan(trace_, params);
    std::lock_guard lock(mu_);
    return slopes_.emplace(key, std::move(plan)).first->second;
}

Metrics SessionResult::metrics() const {
    const double counted = static_cast<double>(in_time + late + never);
    if (counted == 0) return {};
    return {static_cast<double>(in_time) / counted, static_cast<double>(in_time + late) / counted};
}

std::string SessionResult::serialize() const {
    std::string out;
    auto put = [&out](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
    };
    out += config;
    out.push_back('\0');
    put(static_cast<std::uint64_t>(mode));
    put(seed);
    put(decoded_at.size());
    for (auto v : decoded_at) put(v);
    put(deadline.size());
    for (auto v : deadline) put(v);
    for (auto v : {wcp_packets, in_time, late, never, coded_sent, coded_delivered, meta_mismatches,
                   payload_mismatches})
        put(v);
    return out;
}

double send_time(const CodingParams& params, std::uint64_t packet_id) {
    return static_cast<double>(packet_id - 1) * params.packet_size / params.data_rate;
}

namespace {

std::string describe(const CodingParams& p, const ChannelModel& ch) {
    std::ostringstream os;
    os.precision(17);
    os << "mode=" << to_string(p.mode) << " C=" << p.code_rate << " R=" << p.data_rate
       << " delay=" << p.delay << " dt=" << p.step << " W=" << p.window << " N=" << p.coded_total
       << " k=" << p.native_total << " channel=" << ch.label();
    return os.str();
}

// Receiver-side sampling table, rebuilt only when the window fields change.
class WindowTables {
public:
    WindowTables(const VideoTrace& units, DegreeCache& degrees) : units_(units), degrees_(degrees) {}

    std::span<const double> cdf(const WindowRef& ref) {
        if (!valid_ || !(ref == ref_)) {
            cdf_ = cumulative(window_pdf(units_, ref));
            ref_ = ref;
            valid_ = true;
        }
        return cdf_;
    }
    const DegreeDistribution& degrees(std::uint32_t w) { return degrees_.get(w); }

private:
    const VideoTrace& units_;
    DegreeCache& degrees_;
    WindowRef ref_;
    std::vector<double> cdf_;
    bool valid_ = false;
};

}  // namespace

SessionResult run_session(const VideoTrace& trace, const CodingParams& params, const SamplingPlan& plan,
                          const ChannelModel& channel_in, std::uint64_t seed, const SessionOptions& opts) {
    channel_in.validate();
    if (params.frame_count != trace.frame_count() || params.native_total != trace.total_packets())
        throw ParamError("coding parameters were derived for a different trace");
    const WindowSchedule sched = schedule(params, trace);
    if (!plan.slopes.empty() && plan.slopes.size() != sched.entries.size())
        throw ParamError("sampling plan has " + std::to_string(plan.slopes.size()) + " slopes for " +
                         std::to_string(sched.entries.size()) + " windows");
    if (sched.coded_total() > kMaxPacketId) throw ParamError("session exceeds the 24-bit PacketID space");
    if (params.packet_size > 0xFFFF) throw ParamError("packet size does not fit the header");

    ChannelModel channel = channel_in;
    channel.seed = seed;

    const std::uint64_t k = trace.total_packets();
    const std::size_t P = params.packet_size;
    const std::size_t carried = opts.carry_payload ? P : 0;

    // Slope densities are defined over the units the optimizer saw.
    const VideoTrace units = (params.sliding() && params.step > 1)
                                 ? downsample(trace, static_cast<std::uint32_t>(params.step))
                                 : trace;

    SessionResult res;
    res.mode = params.mode;
    res.seed = seed;
    res.config = describe(params, channel_in);
    res.wcp = wcp_frames(params);
    const auto deadlines = frame_deadlines(sched, trace.frame_count());
    res.deadline.assign(deadlines.begin() + 1, deadlines.end());
    res.decoded_at.assign(k, kNeverDecoded);

    std::vector<std::uint8_t> natives;
    if (opts.carry_payload) {
        natives.resize(k * P);
        for (std::uint64_t i = 0; i < natives.size(); i += 8) {
            const std::uint64_t word = splitmix64(seed ^ splitmix64(i));
            for (std::uint64_t b = 0; b < 8 && i + b < natives.size(); ++b)
                natives[i + b] = static_cast<std::uint8_t>(word >> (8 * b));
        }
    }

    DecoderState decoder(k, carried);
    std::vector<std::uint64_t> wcp_packets;
    for (const auto* frames : {&res.wcp.warmup, &res.wcp.cooldown})
        for (auto t : *frames)
            for (auto p = trace.first_packet(t); p < trace.first_packet(t + 1); ++p) wcp_packets.push_back(p);
    for (auto p : wcp_packets) {
        // padding is all zeros on both ends
        if (opts.carry_payload) std::fill_n(natives.begin() + static_cast<std::ptrdiff_t>((p - 1) * P), P, 0);
        decoder.mark_known(p);
        res.decoded_at[p - 1] = 0;
    }
    res.wcp_packets = wcp_packets.size();

    DegreeCache enc_degrees(opts.soliton_c, opts.soliton_delta);
    DegreeCache dec_degrees(opts.soliton_c, opts.soliton_delta);
    WindowTables receiver(units, dec_degrees);

    std::uint32_t packet_id = 0;
    for (std::size_t m = 0; m < sched.entries.size(); ++m) {
        const ScheduleEntry& e = sched.entries[m];
        if (e.window_packets > 0xFFFF) throw ParamError("window does not fit the 16-bit WSize field");
        WindowRef ref;
        ref.start_packet = e.start_packet;
        ref.window_size = static_cast<std::uint32_t>(e.window_packets);
        ref.slope = plan.slopes.empty() ? 0.0f : static_cast<float>(plan.slopes[m]);
        const auto enc_cdf = cumulative(window_pdf(units, ref));
        const DegreeDistribution& enc_dist = enc_degrees.get(ref.window_size);

        for (std::uint64_t j = 0; j < e.budget; ++j) {
            ++packet_id;
            const CodedPacketMeta meta = draw(packet_id, ref, enc_cdf, enc_dist);
            std::vector<std::uint8_t> payload;
            if (opts.carry_payload) payload = encode(meta, natives, P);

            DafHeader h;
            h.start_packet = static_cast<std::uint32_t>(ref.start_packet);
            h.window_size = static_cast<std::uint16_t>(ref.window_size);
            h.slope = ref.slope;
            h.packet_id = packet_id;
            h.payload_size = static_cast<std::uint16_t>(P);
            std::vector<std::uint8_t> wire;
            if (opts.carry_payload) {
                wire = encode_packet(h, payload);
            } else {
                const auto head = encode_header(h);
                wire.assign(head.begin(), head.end());
            }
            ++res.coded_sent;

            if (!transmit(channel, packet_id, send_time(params, packet_id))) continue;
            ++res.coded_delivered;

            // receiver side: everything below uses only the datagram bytes
            DafHeader rh;
            std::vector<std::uint8_t> rpayload;
            if (opts.carry_payload) {
                DafPacket pkt = decode_packet(wire);
                rh = pkt.header;
                rpayload = std::move(pkt.payload);
            } else {
                rh = decode_header(wire);
            }
            const WindowRef rref{rh.start_packet, rh.window_size, rh.slope};
            const CodedPacketMeta rmeta =
                draw(rh.packet_id, rref, receiver.cdf(rref), receiver.degrees(rh.window_size));
            if (!(rmeta == meta)) ++res.meta_mismatches;
            for (auto p : decoder.ingest(rmeta, rpayload)) res.decoded_at[p - 1] = rh.packet_id;
        }
    }

    for (std::size_t t = 1; t <= trace.frame_count(); ++t) {
        if (res.wcp.contains(t)) continue;
        const std::uint64_t due = res.deadline[t - 1];
        for (auto p = trace.first_packet(t); p < trace.first_packet(t + 1); ++p) {
            const std::uint64_t at = res.decoded_at[p - 1];
            if (at == kNeverDecoded) {
                ++res.never;
                continue;
            }
            if (at <= due) ++res.in_time;
            else ++res.late;
            if (opts.carry_payload) {
                const auto got = decoder.packet(p);
                if (!std::equal(got.begin(), got.end(), natives.begin() + static_cast<std::ptrdiff_t>((p - 1) * P)))
                    ++res.payload_mismatches;
            }
        }
    }
    return res;
}

}  // namespace daf
