#ifndef JLW_RANDOM_HPP
#define JLW_RANDOM_HPP

#include <cstdint>

namespace jlw {

/**
 * SplitMix64: the output at position n is a bit-mix of seed + n * golden64,
 * so a (seed, counter) pair fully determines every draw. Small, fast, and
 * reproducible across platforms; all simulation randomness flows through it.
 */
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Unbiased uniform integer in [0, n), n >= 1, by rejection.
    std::uint32_t next_below(std::uint32_t n) {
        const std::uint64_t span = 0x100000000ull;
        const std::uint64_t limit = span - span % n;
        while (true) {
            const std::uint64_t x = next() >> 32;
            if (x < limit) return static_cast<std::uint32_t>(x % n);
        }
    }

    /// Derived seed for replica `stream` of a base seed; replicas 0,1,2,...
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
        SplitMix64 g(seed);
        std::uint64_t s = 0;
        for (std::uint64_t i = 0; i <= stream; ++i) s = g.next();
        return s;
    }
};

}  // namespace jlw

#endif  // JLW_RANDOM_HPP
