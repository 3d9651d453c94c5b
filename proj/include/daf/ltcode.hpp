#pragma once

#include "daf/trace.hpp"

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <span>
#include <stdexcept>
#include <unordered_set>
#include <vector>

namespace daf {

class CodingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Robust soliton distribution over degrees 1..k.
class DegreeDistribution {
public:
    DegreeDistribution(std::uint32_t k, double c, double delta);

    std::uint32_t k() const noexcept { return k_; }
    /// Probability of degree d (1-based).
    double probability(std::uint32_t d) const { return pmf_.at(d - 1); }
    const std::vector<double>& pmf() const noexcept { return pmf_; }
    double mean() const noexcept;
    /// Position of the tau spike, ceil(k / S) clamped to [1, k].
    std::uint32_t spike() const noexcept { return spike_; }
    /// Normalizer beta = sum(rho + tau).
    double beta() const noexcept { return beta_; }
    /// Inverse CDF: the smallest d whose cumulative probability exceeds u.
    std::uint32_t sample(double u) const noexcept;

private:
    std::uint32_t k_;
    std::uint32_t spike_ = 1;
    double beta_ = 1;
    std::vector<double> pmf_;
    std::vector<double> cdf_;
};

DegreeDistribution robust_soliton(std::uint32_t k, double c = 0.03, double delta = 0.02);

/// Robust soliton tables keyed by window size, built on first use.
class DegreeCache {
public:
    explicit DegreeCache(double c = 0.03, double delta = 0.02) : c_(c), delta_(delta) {}
    const DegreeDistribution& get(std::uint32_t k);

private:
    double c_;
    double delta_;
    std::map<std::uint32_t, DegreeDistribution> tables_;
};

/// The window fields of a coded packet header.
struct WindowRef {
    std::uint64_t start_packet = 1;
    std::uint32_t window_size = 1;
    float slope = 0.0f;

    bool operator==(const WindowRef&) const = default;
};

/// Per-packet sampling probabilities of a window. The window's packet range
/// is split at the unit boundaries of `units` and the slope density is
/// averaged over each piece.
std::vector<double> window_pdf(const VideoTrace& units, const WindowRef& window);

/// Cumulative table used for inverse-CDF neighbor draws.
std::vector<double> cumulative(std::span<const double> pdf);

struct CodedPacketMeta {
    std::uint32_t packet_id = 0;
    std::uint32_t degree = 0;
    std::vector<std::uint64_t> neighbors;  // absolute packet numbers, draw order
    WindowRef window;

    bool operator==(const CodedPacketMeta&) const = default;
};

/// Expands a packet ID into (degree, neighbors). The generator is seeded only
/// by the packet ID; the degree is drawn first, then distinct neighbors by
/// inverse CDF with duplicate rejection. Degrees above WSize clamp to WSize.
CodedPacketMeta draw(std::uint32_t packet_id, const WindowRef& window,
                     std::span<const double> neighbor_cdf, const DegreeDistribution& degrees);

/// XOR of the neighbor packets out of a flat k*P native buffer.
std::vector<std::uint8_t> encode(const CodedPacketMeta& meta, std::span<const std::uint8_t> natives,
                                 std::size_t packet_size);

/// Belief-propagation (peeling) decoder over k native packets.
///
/// With packet_size 0 the decoder runs symbolically and ignores payloads.
class DecoderState {
public:
    DecoderState(std::uint64_t native_count, std::size_t packet_size);

    /// Marks a packet as known (W/CP padding) and propagates the ripple.
    std::vector<std::uint64_t> mark_known(std::uint64_t packet, std::span<const std::uint8_t> bytes = {});

    /// Ingests one coded packet; returns every native packet it released.
    /// Duplicate packet IDs are ignored.
    std::vector<std::uint64_t> ingest(const CodedPacketMeta& meta, std::span<const std::uint8_t> payload);

    bool is_decoded(std::uint64_t packet) const { return decoded_.at(packet - 1) != 0; }
    std::uint64_t decoded_count() const noexcept { return decoded_count_; }
    std::uint64_t native_count() const noexcept { return decoded_.size(); }
    std::size_t pending_count() const noexcept { return active_pending_; }
    std::span<const std::uint8_t> packet(std::uint64_t p) const;

    /// True if some pending coded packet still lists a decoded native among
    /// its unresolved neighbors. Must never happen.
    bool pending_references_decoded() const;

private:
    struct Pending {
        std::vector<std::uint64_t> unresolved;
        std::vector<std::uint8_t> payload;
        bool active = false;
    };

    void release(std::uint64_t packet, std::span<const std::uint8_t> bytes,
                 std::vector<std::uint64_t>& out);
    void drain(std::vector<std::uint64_t>& out);
    void xor_into(std::span<std::uint8_t> dst, std::uint64_t packet) const;

    std::size_t packet_size_;
    std::vector<std::uint8_t> decoded_;
    std::vector<std::uint8_t> natives_;
    std::vector<std::vector<std::uint32_t>> refs_;  // native -> pending indices
    std::vector<Pending> pending_;
    std::deque<std::uint32_t> ripple_;
    std::unordered_set<std::uint32_t> seen_;
    std::uint64_t decoded_count_ = 0;
    std::size_t active_pending_ = 0;
};

}  // namespace daf
