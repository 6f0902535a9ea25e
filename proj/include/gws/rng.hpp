#pragma once

#include <array>
#include <cstdint>

namespace gws {

// Deterministic splittable random stream: a (master seed, stream index)
// pair fully determines the output sequence, and distinct stream indices
// give statistically independent streams.
//
// The generator is xoshiro256++ (public-domain algorithm by Blackman and
// Vigna); the four state words are derived from the seed pair with the
// splitmix64 finalizer. A hand-rolled generator keeps results byte-stable
// across standard-library versions, which the reproducibility contract
// needs; the stdlib engines are avoided in sampling paths for that reason.
class SeededRng {
public:
    SeededRng(std::uint64_t master_seed, std::uint64_t stream)
        : seed_(master_seed), stream_(stream) {
        std::uint64_t key = mix64(mix64(master_seed) ^ mix64(stream + 0x6A09E667F3BCC909ull));
        for (auto& word : state_) {
            key += 0x9E3779B97F4A7C15ull;
            word = mix64(key);
        }
    }

    std::uint64_t master_seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    using State = std::array<std::uint64_t, 4>;

    // The generator core as a free-standing step over an explicit state,
    // so batch loops can keep the four words in registers (through a
    // reference the state is memory-resident, which measurably dominates
    // tight sampling loops).
    static std::uint64_t step(State& s) {
        const std::uint64_t result = rotl(s[0] + s[3], 23) + s[0];
        const std::uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rotl(s[3], 45);
        return result;
    }

    // Uniform in [0,1) with 53 random bits.
    static double step_double(State& s) {
        return static_cast<double>(step(s) >> 11) * 0x1.0p-53;
    }

    std::uint64_t next() { return step(state_); }
    double next_double() { return step_double(state_); }

    // Uniform integer in [0, bound); unbiased (Lemire's multiply-shift with
    // rejection). bound must be >= 1.
    std::uint64_t next_below(std::uint64_t bound) {
        std::uint64_t x = next();
        __uint128_t m = static_cast<__uint128_t>(x) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t cutoff = -bound % bound;
            while (low < cutoff) {
                x = next();
                m = static_cast<__uint128_t>(x) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    // Snapshot/restore lets rejection loops re-play an accepted attempt
    // instead of buffering every draw.
    State state() const { return state_; }
    void restore(const State& s) { state_ = s; }

private:
    static std::uint64_t mix64(std::uint64_t x) {
        // splitmix64 finalizer
        x += 0x9E3779B97F4A7C15ull;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
        return x ^ (x >> 31);
    }
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    State state_;
};

// Stream-index layout shared by every experiment, so that two experiments
// with the same master seed that need "replicate rep of a size-n
// conditioned tree" consume the identical stream and therefore see the
// identical tree. Draw families that must not collide with those (spine
// constructions, unconditioned runs, resampling) carry a tag in the top
// byte.
namespace streams {

inline constexpr std::uint64_t conditioned(std::uint64_t n, std::uint64_t rep) {
    return (n << 24) | rep; // rep < 2^24, n < 2^32
}
inline constexpr std::uint64_t kesten(std::uint64_t rep) {
    return (1ull << 56) | rep;
}
inline constexpr std::uint64_t unconditioned(std::uint64_t rep) {
    return (2ull << 56) | rep;
}
inline constexpr std::uint64_t bootstrap(std::uint64_t tag) {
    return (3ull << 56) | tag;
}

} // namespace streams

} // namespace gws
