#pragma once

#include <cstdint>
#include <limits>

namespace nematic {

/// What a random stream is used for. Part of the seed derivation so that
/// streams for different purposes never overlap.
enum class Purpose : std::uint64_t {
    jump_sample = 1,
    thinning = 2,
    sde_path = 3,
    convolution = 4,
    importance = 5,
    study = 6,
    testing = 99,
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Key for the stream (root, purpose, index). Index is typically a path number.
constexpr std::uint64_t derive_seed(std::uint64_t root, Purpose purpose, std::uint64_t index = 0) {
    return mix64(mix64(root ^ mix64(static_cast<std::uint64_t>(purpose))) + mix64(index + 0x632be59bd9b4e019ULL));
}

/// Counter-based generator: the n-th output is mix64(key + n * gamma).
/// Satisfies UniformRandomBitGenerator.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit constexpr CounterRng(std::uint64_t key) : key_(key) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() { return mix64(key_ + (counter_++) * 0x9e3779b97f4a7c15ULL); }

    /// Uniform on [0, 1) with 53 random bits.
    constexpr double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    constexpr std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace nematic
