#pragma once

#include <cstdint>

namespace multibang {

/// Counter-based standard normal variates.
///
/// Uniform bits come from the SplitMix64 sequence keyed by the seed, so draw k does not
/// depend on any earlier draw: bits(k) = mix(seed * phi + (k + 1) * phi) with
/// phi = 0x9e3779b97f4a7c15 and mix the SplitMix64 finalizer. Normal variate k uses the
/// cosine branch of Box-Muller on the uniforms with counters 2k and 2k+1.
class CounterNormal {
public:
    explicit CounterNormal(std::uint64_t seed) noexcept : seed_(seed) {}

    /// Uniform on (0, 1] with 53 random bits.
    double uniform(std::uint64_t counter) const noexcept;
    double normal(std::uint64_t k) const noexcept;

private:
    std::uint64_t seed_;
};

std::uint64_t splitmix64_mix(std::uint64_t z) noexcept;

}  // namespace multibang
