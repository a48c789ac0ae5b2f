#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace stochinv {

/// Counter-based normal deviates: the value depends only on (seed, stream, counter), so a
/// realization is reproducible regardless of evaluation order or thread count.
/// Bits come from the SplitMix64 finalizer applied to a keyed counter.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) noexcept : seed_(mix(seed ^ 0x243f6a8885a308d3ULL)) {}

  std::uint64_t bits(std::uint64_t stream, std::uint64_t counter) const noexcept {
    return mix(seed_ ^ mix(stream * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL) ^
               (counter * 0xd1b54a32d192ed03ULL));
  }

  /// Uniform on the open interval (0, 1).
  double uniform(std::uint64_t stream, std::uint64_t counter) const noexcept {
    return (static_cast<double>(bits(stream, counter) >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller on two independent counters.
  double normal(std::uint64_t stream, std::uint64_t counter) const noexcept {
    const double u1 = uniform(stream, 2 * counter);
    const double u2 = uniform(stream, 2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  static std::uint64_t mix(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t seed_;
};

/// Seed of realization `index` in an ensemble rooted at `base_seed`.
inline std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index) noexcept {
  return CounterRng::mix(CounterRng::mix(base_seed) + index);
}

}  // namespace stochinv
