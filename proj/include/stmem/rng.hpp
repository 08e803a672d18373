#pragma once

// Deterministic pseudo-random generator for the whole simulator.
// xoshiro256++ (Blackman & Vigna, public domain) seeded through splitmix64,
// so any 64-bit seed gives a well-mixed state. Self-contained on purpose:
// results must be bit-reproducible from (seed, call sequence) alone, with no
// dependence on standard-library distribution internals.

#include <cmath>
#include <cstdint>
#include <limits>

namespace stmem {

inline uint64_t splitmix64(uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

class Rng {
public:
    using result_type = uint64_t;

    explicit Rng(uint64_t seed = 0) { reseed(seed); }

    void reseed(uint64_t seed) {
        uint64_t sm = seed;
        for (auto& word : s_) word = splitmix64(sm);
    }

    /// Independent stream derived from this seed and a stream tag. Used to
    /// decouple e.g. weight init, shuffling, and write-failure sampling.
    static Rng stream(uint64_t seed, uint64_t tag) {
        uint64_t sm = seed;
        const uint64_t mixed = splitmix64(sm) ^ (0x6a09e667f3bcc909ull * (tag + 1));
        return Rng(mixed);
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    uint64_t operator()() { return next_u64(); }
    static constexpr uint64_t min() { return 0; }
    static constexpr uint64_t max() { return std::numeric_limits<uint64_t>::max(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in (0, 1]; safe as a log() argument.
    double uniform_pos() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n), unbiased (rejection on the top range).
    uint64_t below(uint64_t n) {
        const uint64_t threshold = (0 - n) % n;
        for (;;) {
            const uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Number of successes before the next failure in a Bernoulli(p) stream
    /// (geometric on {0,1,2,...}). Used for skip-sampling rare failures.
    uint64_t geometric_skips(double p) {
        if (p >= 1.0) return 0;
        if (p <= 0.0) return std::numeric_limits<uint64_t>::max();
        const double g = std::floor(std::log(uniform_pos()) / std::log1p(-p));
        if (g >= 1.8e19) return std::numeric_limits<uint64_t>::max();
        return static_cast<uint64_t>(g);
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t s_[4];
};

}  // namespace stmem
