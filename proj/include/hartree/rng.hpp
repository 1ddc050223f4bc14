#pragma once

#include <cstdint>

#include "hartree/field.hpp"

namespace hartree {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

/// The SplitMix64 finalizer (Stafford variant 13).
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Sequential SplitMix64 generator; bit-exact on every platform.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t state) noexcept : state_(state) {}
  constexpr std::uint64_t next() noexcept {
    state_ += kGoldenGamma;
    return splitmix64_mix(state_);
  }
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  /// Uniform double in (0, 1].
  double uniform_open_zero() noexcept { return 1.0 - uniform(); }
  /// Complex Gaussian with independent parts of variance 1/2 (E|g|² = 1).
  Complex complex_gaussian() noexcept;
  /// Real standard normal.
  double normal() noexcept;

 private:
  std::uint64_t state_;
};

/// Per-stream seed: one SplitMix64 step from state master ^ (index·γ).
/// derive_seed(0, 0) is the first SplitMix64 output for seed 0,
/// 0xE220A8397B1DCDAF.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return SplitMix64(master ^ (index * kGoldenGamma)).next();
}

}  // namespace hartree
