#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace rotodop {

// Identifier written to run manifests; bump the suffix whenever the stream
// derivation or the variate transforms change.
inline constexpr std::string_view rng_algorithm = "xoshiro256**/splitmix64-v1";

constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

class SplitMix64 {
public:
    explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}
    constexpr std::uint64_t next() noexcept {
        state_ += 0x9E3779B97F4A7C15ull;
        return splitmix64_mix(state_);
    }

private:
    std::uint64_t state_;
};

// xoshiro256** 1.0 (Blackman & Vigna).
class Xoshiro256 {
public:
    using result_type = std::uint64_t;

    explicit constexpr Xoshiro256(std::uint64_t seed) noexcept {
        SplitMix64 sm(seed);
        for (auto& w : s_) w = sm.next();
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    constexpr result_type operator()() noexcept {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on the open interval (0, 1), 53-bit resolution.
    constexpr double uniform() noexcept {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> s_{};
};

// Seed of the independent stream for work unit (batch, chunk) of a run.
// Depends only on the run seed and the unit's position in the fixed split
// schedule.
constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t batch, std::uint64_t chunk) noexcept {
    std::uint64_t key = splitmix64_mix(seed ^ 0x6A09E667F3BCC909ull);
    key = splitmix64_mix(key ^ splitmix64_mix(batch + 0x243F6A8885A308D3ull));
    key = splitmix64_mix(key ^ splitmix64_mix(chunk + 0x13198A2E03707344ull));
    return key;
}

} // namespace rotodop
