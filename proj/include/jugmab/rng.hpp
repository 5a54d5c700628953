#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace jugmab {

/// SplitMix64 finalizer. Used both as a stand-alone mixer for deriving
/// sub-stream seeds and to expand a single 64-bit seed into generator state.
inline constexpr std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Deterministic, platform-independent random stream (xoshiro256++ core with
/// explicit uniform/normal transforms, so output never depends on the
/// standard library's distribution implementations).
///
/// Streams are cheap value types. Simulation code derives one stream per
/// logical unit of work (e.g. one search) so that evaluation order and
/// parallelism cannot change the draws any unit sees.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    /// Stream keyed by (seed, a, b); same key, same draw sequence.
    static RngStream derived(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
        std::uint64_t h = seed;
        (void)splitmix64(h);
        h ^= a + 0x9E3779B97F4A7C15ULL;
        (void)splitmix64(h);
        h ^= b + 0xD1B54A32D192ED03ULL;
        return RngStream(splitmix64(h));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n), unbiased. n must be positive.
    std::uint64_t uniform_below(std::uint64_t n) {
        const std::uint64_t threshold = (0ULL - n) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    /// Standard normal via Box-Muller; the spare value is cached, so a
    /// stream's normal sequence is deterministic but interleaving normal()
    /// and uniform() draws is part of the stream's identity.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // u1 in (0, 1] so the log is finite.
        const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

  private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace jugmab
