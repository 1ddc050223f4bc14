#include "hartree/rng.hpp"

#include <cmath>
#include <numbers>

namespace hartree {

Complex SplitMix64::complex_gaussian() noexcept {
  const double radius = std::sqrt(-std::log(uniform_open_zero()));
  const double angle = 2.0 * std::numbers::pi * uniform();
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

double SplitMix64::normal() noexcept {
  const double radius = std::sqrt(-2.0 * std::log(uniform_open_zero()));
  return radius * std::cos(2.0 * std::numbers::pi * uniform());
}

}  // namespace hartree
