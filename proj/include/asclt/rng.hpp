#pragma once

#include <cmath>
#include <cstdint>

namespace asclt {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/**
 * xoshiro256++ generator, seeded through splitmix64.
 *
 * Self-contained so that streams are bit-stable across standard libraries;
 * replica streams are derived by counter, never by jumping.
 */
class Rng {
public:
    Rng() : Rng(0x853C49E6748FEA9Bull) {}

    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_)
            word = splitmix64(sm);
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

    /// Uniform on [0,1) with 53 significant bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on (0,1]; safe as input to log().
    double uniform01_open() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

    /// Standard normal via Box-Muller, one spare cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u = uniform01_open();
        const double v = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u));
        const double a = 6.283185307179586476925286766559 * v;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double exponential() { return -std::log(uniform01_open()); }

    double cauchy() { return std::tan(3.14159265358979323846 * (uniform01() - 0.5)); }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Deterministic per-replica stream: same (base, index) gives the same stream
/// regardless of thread layout.
inline Rng derive_rng(std::uint64_t base_seed, std::uint64_t stream_index) {
    std::uint64_t s = base_seed;
    std::uint64_t a = splitmix64(s);
    s = a ^ (0xD1B54A32D192ED03ull * (stream_index + 1));
    std::uint64_t b = splitmix64(s);
    return Rng(b);
}

}  // namespace asclt
