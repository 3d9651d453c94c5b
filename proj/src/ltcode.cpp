#include "daf/ltcode.hpp"

#include "daf/rng.hpp"
#include "daf/sampling.hpp"

#include <algorithm>
#include <cmath>

namespace daf {

DegreeDistribution::DegreeDistribution(std::uint32_t k, double c, double delta) : k_(k) {
    if (k < 1) throw CodingError("robust soliton needs k >= 1");
    if (!(c > 0)) throw CodingError("robust soliton needs c > 0");
    if (!(delta > 0 && delta < 1)) throw CodingError("robust soliton needs 0 < delta < 1");
    const double kd = k;
    const double S = c * std::log(kd / delta) * std::sqrt(kd);
    spike_ = static_cast<std::uint32_t>(std::clamp(std::ceil(kd / S), 1.0, kd));

    pmf_.assign(k, 0.0);
    pmf_[0] = 1.0 / kd;
    for (std::uint32_t d = 2; d <= k; ++d) pmf_[d - 1] = 1.0 / (static_cast<double>(d) * (d - 1));
    for (std::uint32_t d = 1; d < spike_; ++d) pmf_[d - 1] += S / (kd * d);
    pmf_[spike_ - 1] += std::max(0.0, S * std::log(S / delta) / kd);

    beta_ = 0;
    for (double p : pmf_) beta_ += p;
    cdf_.resize(k);
    double acc = 0;
    for (std::uint32_t d = 0; d < k; ++d) {
        pmf_[d] /= beta_;
        acc += pmf_[d];
        cdf_[d] = acc;
    }
}

double DegreeDistribution::mean() const noexcept {
    double m = 0;
    for (std::size_t d = 0; d < pmf_.size(); ++d) m += static_cast<double>(d + 1) * pmf_[d];
    return m;
}

std::uint32_t DegreeDistribution::sample(double u) const noexcept {
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u * cdf_.back());
    const auto d = static_cast<std::uint32_t>(it - cdf_.begin()) + 1;
    return std::min(d, k_);
}

DegreeDistribution robust_soliton(std::uint32_t k, double c, double delta) {
    return DegreeDistribution(k, c, delta);
}

const DegreeDistribution& DegreeCache::get(std::uint32_t k) {
    auto it = tables_.find(k);
    if (it == tables_.end()) it = tables_.emplace(k, DegreeDistribution(k, c_, delta_)).first;
    return it->second;
}

std::vector<double> window_pdf(const VideoTrace& units, const WindowRef& window) {
    const std::uint64_t w = window.window_size;
    if (w < 1) throw CodingError("window must hold at least one packet");
    const std::uint64_t last = window.start_packet + w - 1;
    if (window.start_packet < 1 || last > units.total_packets())
        throw CodingError("window exceeds the native packet range");
    if (window.slope == 0.0f) return std::vector<double>(w, 1.0 / static_cast<double>(w));

    std::vector<std::uint32_t> pieces;
    std::uint64_t cur = window.start_packet;
    while (cur <= last) {
        const std::size_t f = units.frame_of(cur);
        const std::uint64_t frame_end = units.first_packet(f + 1) - 1;
        const std::uint64_t end = std::min(frame_end, last);
        pieces.push_back(static_cast<std::uint32_t>(end - cur + 1));
        cur = end + 1;
    }
    return slope_pdf(pieces, static_cast<double>(window.slope));
}

std::vector<double> cumulative(std::span<const double> pdf) {
    std::vector<double> cdf(pdf.size());
    double acc = 0;
    for (std::size_t i = 0; i < pdf.size(); ++i) {
        acc += pdf[i];
        cdf[i] = acc;
    }
    return cdf;
}

CodedPacketMeta draw(std::uint32_t packet_id, const WindowRef& window,
                     std::span<const double> neighbor_cdf, const DegreeDistribution& degrees) {
    const std::uint32_t w = window.window_size;
    if (neighbor_cdf.size() != w) throw CodingError("sampling table does not match WSize");
    if (degrees.k() != w) throw CodingError("degree distribution does not match WSize");

    Xorshift64Star rng(packet_id);
    CodedPacketMeta meta;
    meta.packet_id = packet_id;
    meta.window = window;
    meta.degree = std::min(degrees.sample(rng.next_unit()), w);

    const double total = neighbor_cdf.back();
    std::vector<std::uint32_t> picked;
    picked.reserve(meta.degree);
    while (picked.size() < meta.degree) {
        const double u = rng.next_unit() * total;
        auto idx = static_cast<std::uint32_t>(std::upper_bound(neighbor_cdf.begin(), neighbor_cdf.end(), u) -
                                              neighbor_cdf.begin());
        idx = std::min(idx, w - 1);
        if (std::find(picked.begin(), picked.end(), idx) == picked.end()) picked.push_back(idx);
    }
    meta.neighbors.reserve(picked.size());
    for (auto i : picked) meta.neighbors.push_back(window.start_packet + i);
    return meta;
}

std::vector<std::uint8_t> encode(const CodedPacketMeta& meta, std::span<const std::uint8_t> natives,
                                 std::size_t packet_size) {
    std::vector<std::uint8_t> out(packet_size, 0);
    const std::uint64_t k = packet_size ? natives.size() / packet_size : 0;
    for (auto p : meta.neighbors) {
        if (p < 1 || p > k) throw CodingError("native packet " + std::to_string(p) + " is not available");
        const auto src = natives.subspan((p - 1) * packet_size, packet_size);
        for (std::size_t i = 0; i < packet_size; ++i) out[i] ^= src[i];
    }
    return out;
}

DecoderState::DecoderState(std::uint64_t native_count, std::size_t packet_size)
    : packet_size_(packet_size),
      decoded_(native_count, 0),
      natives_(native_count * packet_size, 0),
      refs_(native_count) {}

std::span<const std::uint8_t> DecoderState::packet(std::uint64_t p) const {
    if (!is_decoded(p)) throw CodingError("packet " + std::to_string(p) + " is not decoded");
    return std::span<const std::uint8_t>(natives_).subspan((p - 1) * packet_size_, packet_size_);
}

void DecoderState::xor_into(std::span<std::uint8_t> dst, std::uint64_t packet) const {
    if (packet_size_ == 0) return;
    const std::uint8_t* src = natives_.data() + (packet - 1) * packet_size_;
    for (std::size_t i = 0; i < packet_size_; ++i) dst[i] ^= src[i];
}

void DecoderState::release(std::uint64_t packet, std::span<const std::uint8_t> bytes,
                           std::vector<std::uint64_t>& out) {
    if (decoded_[packet - 1]) return;
    decoded_[packet - 1] = 1;
    ++decoded_count_;
    if (packet_size_ != 0)
        std::copy(bytes.begin(), bytes.end(), natives_.begin() + static_cast<std::ptrdiff_t>((packet - 1) * packet_size_));
    out.push_back(packet);
    for (auto c : refs_[packet - 1]) {
        Pending& q = pending_[c];
        if (!q.active) continue;
        q.unresolved.erase(std::find(q.unresolved.begin(), q.unresolved.end(), packet));
        xor_into(q.payload, packet);
        if (q.unresolved.size() == 1) {
            ripple_.push_back(c);
        } else if (q.unresolved.empty()) {
            q.active = false;
            q.payload = {};
            --active_pending_;
        }
    }
    refs_[packet - 1] = {};
}

void DecoderState::drain(std::vector<std::uint64_t>& out) {
    while (!ripple_.empty()) {
        const auto c = ripple_.front();
        ripple_.pop_front();
        Pending& q = pending_[c];
        if (!q.active || q.unresolved.size() != 1) continue;
        const auto target = q.unresolved.front();
        q.unresolved.clear();
        q.active = false;
        --active_pending_;
        std::vector<std::uint8_t> bytes = std::move(q.payload);
        q.payload = {};
        release(target, bytes, out);
    }
}

std::vector<std::uint64_t> DecoderState::mark_known(std::uint64_t packet, std::span<const std::uint8_t> bytes) {
    if (packet < 1 || packet > decoded_.size()) throw CodingError("packet number out of range");
    std::vector<std::uint64_t> out;
    std::vector<std::uint8_t> zeros;
    if (packet_size_ != 0 && bytes.empty()) {
        zeros.assign(packet_size_, 0);
        bytes = zeros;
    }
    if (packet_size_ != 0 && bytes.size() != packet_size_) throw CodingError("known packet has wrong size");
    release(packet, bytes, out);
    drain(out);
    return out;
}

std::vector<std::uint64_t> DecoderState::ingest(const CodedPacketMeta& meta, std::span<const std::uint8_t> payload) {
    std::vector<std::uint64_t> out;
    if (packet_size_ != 0 && payload.size() != packet_size_)
        throw CodingError("coded payload has wrong size");
    for (auto nb : meta.neighbors)
        if (nb < 1 || nb > decoded_.size()) throw CodingError("neighbor out of range");
    if (!seen_.insert(meta.packet_id).second) return out;

    Pending q;
    if (packet_size_ != 0) q.payload.assign(payload.begin(), payload.end());
    for (auto nb : meta.neighbors) {
        if (decoded_[nb - 1]) xor_into(q.payload, nb);
        else q.unresolved.push_back(nb);
    }
    if (q.unresolved.empty()) return out;

    const auto idx = static_cast<std::uint32_t>(pending_.size());
    q.active = true;
    ++active_pending_;
    for (auto nb : q.unresolved) refs_[nb - 1].push_back(idx);
    const bool ready = q.unresolved.size() == 1;
    pending_.push_back(std::move(q));
    if (ready) ripple_.push_back(idx);
    drain(out);
    return out;
}

bool DecoderState::pending_references_decoded() const {
    for (const auto& q : pending_) {
        if (!q.active) continue;
        for (auto nb : q.unresolved)
            if (decoded_[nb - 1]) return true;
    }
    return false;
}

}  // namespace daf
