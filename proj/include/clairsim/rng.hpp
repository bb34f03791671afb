#ifndef CLAIRSIM_RNG_HPP
#define CLAIRSIM_RNG_HPP

#include <cstdint>
#include <numeric>
#include <vector>

namespace clairsim {

// Counter-based PRNG: a SplitMix64 stream evaluated by position,
// out(pos) = mix64(key + pos * GAMMA). Random access to any stream
// position is O(1), so an epoch index can be folded into the position
// (epoch e owns positions [e<<34, (e+1)<<34)) without touching the key.
// All draws are integer-exact and reproduce bit-identically everywhere.

inline constexpr uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr uint64_t mix64(uint64_t z) noexcept {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

// Purpose tags keep independent draw streams (shuffling, size generation)
// uncorrelated under the same user seed.
inline constexpr uint64_t kPermutationTag = 0x7065726dULL;  // "perm"
inline constexpr uint64_t kSizeTag = 0x73697a65ULL;         // "size"

constexpr uint64_t derive_key(uint64_t seed, uint64_t tag) noexcept {
    return mix64(seed ^ mix64(tag));
}

class CounterRng {
public:
    CounterRng(uint64_t key, uint64_t start_pos = 0) noexcept
        : key_(key), pos_(start_pos) {}

    static CounterRng for_stream(uint64_t seed, uint64_t tag, uint64_t start_pos = 0) noexcept {
        return CounterRng(derive_key(seed, tag), start_pos);
    }

    uint64_t next() noexcept {
        return mix64(key_ + (++pos_) * kGolden);
    }

    // Unbiased draw in [0, n) (Lemire multiply-shift with rejection).
    uint64_t bounded(uint64_t n) noexcept {
        uint64_t x = next();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        auto lo = static_cast<uint64_t>(m);
        if (lo < n) {
            const uint64_t t = (0 - n) % n;
            while (lo < t) {
                x = next();
                m = static_cast<__uint128_t>(x) * n;
                lo = static_cast<uint64_t>(m);
            }
        }
        return static_cast<uint64_t>(m >> 64);
    }

    // One standard normal per call (Box-Muller, cosine branch only, so the
    // draw count per sample is fixed).
    double normal() noexcept;

    uint64_t position() const noexcept { return pos_; }

private:
    uint64_t key_;
    uint64_t pos_;
};

// In-place Fisher-Yates over [0, count) using draws from rng.
std::vector<uint32_t> shuffled_identity(uint32_t count, CounterRng& rng);

}  // namespace clairsim

#endif
