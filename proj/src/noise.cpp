#include "multibang/noise.hpp"

#include <cmath>
#include <numbers>

namespace multibang {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}

std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double CounterNormal::uniform(std::uint64_t counter) const noexcept {
    const std::uint64_t bits = splitmix64_mix(seed_ * kGolden + (counter + 1) * kGolden);
    return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

double CounterNormal::normal(std::uint64_t k) const noexcept {
    const double u1 = uniform(2 * k);
    const double u2 = uniform(2 * k + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace multibang
