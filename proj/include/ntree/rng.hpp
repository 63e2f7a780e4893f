#pragma once

#include <cstdint>
#include <random>

namespace ntree {

// SplitMix64 mixer (Steele, Lea, Flood 2014). Used both as a small fast
// generator and to derive independent stream seeds from (seed, index).
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Seedable, splittable random stream. Each derived stream is an mt19937_64
// seeded by splitmix64 mixing of (root seed, stream index), so runs are
// reproducible and independent regardless of scheduling order.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(mix_seed(seed, 0)) {}
    RandomStream(std::uint64_t seed, std::uint64_t stream_index)
        : engine_(mix_seed(seed, stream_index)) {}

    // Independent stream for run `index`; safe to call concurrently on a
    // const parent because it touches no mutable state.
    static RandomStream derived(std::uint64_t seed, std::uint64_t index) {
        return RandomStream(seed, index);
    }

    // Uniform in [0, 1) with 53 random bits. One call = one draw.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        std::uniform_int_distribution<std::uint64_t> dist(0, n - 1);
        return dist(engine_);
    }

    std::mt19937_64& engine() { return engine_; }

private:
    static std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
        std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL * (index + 1));
        return splitmix64(s);
    }

    std::mt19937_64 engine_;
};

}  // namespace ntree
