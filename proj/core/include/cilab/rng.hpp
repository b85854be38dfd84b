#pragma once

#include <cstdint>

namespace cilab {

// Dataset content must be reproducible bit-for-bit across languages and
// across parallel generation schedules, so the generator is pinned here
// rather than delegated to the host <random>: a 64-bit counter scheme
// (splitmix64) with a fixed uniform-double conversion.

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ull;

/// splitmix64 finalizer (Stafford mix 13).
constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
}

/// Per-sample seed derivation: child = mix64(seed XOR golden*(k+1)).
/// Independent of generation order, so parallel workers produce the same file.
constexpr std::uint64_t child_seed(std::uint64_t seed, std::uint64_t k) {
    return mix64(seed ^ (kGoldenGamma * (k + 1)));
}

/// Counter-based stream: output_i = mix64(seed + (i+1)*golden).
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += kGoldenGamma;
        return mix64(state_);
    }

    /// Uniform double in [0,1): top 53 bits scaled by 2^-53. Exact, so a
    /// seed pins the stream bit-for-bit in any IEEE-754 implementation.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [-amp, amp).
    double next_symmetric(double amp) {
        return amp * (2.0 * next_unit() - 1.0);
    }

private:
    std::uint64_t state_;
};

} // namespace cilab
