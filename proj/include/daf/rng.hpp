#pragma once

#include <cstdint>

namespace daf {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// xorshift64* (Vigna 2014). This is the generator both ends of a session use
// to expand a PacketID into a degree and a neighbor set, so its constants are
// part of the wire protocol and must never change.
//
// The seed (PacketID ^ kSeedMask) goes through one splitmix64 round before it
// becomes the state. Without it, consecutive PacketIDs start from states that
// differ in a few low bits, and since xorshift is linear their draws stay
// visibly correlated for several outputs.
class Xorshift64Star {
public:
    static constexpr std::uint64_t kSeedMask = 0x9E3779B97F4A7C15ULL;
    static constexpr std::uint64_t kMultiplier = 0x2545F4914F6CDD1DULL;

    explicit constexpr Xorshift64Star(std::uint64_t seed) noexcept
        : state_(splitmix64(seed ^ kSeedMask)) {
        if (state_ == 0) state_ = kSeedMask;
    }

    constexpr std::uint64_t next_u64() noexcept {
        state_ ^= state_ >> 12;
        state_ ^= state_ << 25;
        state_ ^= state_ >> 27;
        return state_ * kMultiplier;
    }

    /// Uniform double in [0, 1) from the top 53 bits.
    constexpr double next_unit() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

/// Counter-based uniform in [0, 1): a pure function of (key, counter).
constexpr double counter_unit(std::uint64_t key, std::uint64_t counter) noexcept {
    const std::uint64_t h = splitmix64(splitmix64(key) ^ splitmix64(counter + 0x632BE59BD9B4E019ULL));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace daf
