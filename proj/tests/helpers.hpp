#pragma once

#include <cmath>
#include <random>

#include "hartree/field.hpp"
#include "hartree/grid.hpp"

namespace testing {

using hartree::Complex;
using hartree::Field;
using hartree::Grid;

/// Smooth random field: Gaussian coefficients damped by e^{-|ξ|²/(2σ²)}.
inline Field random_field(const Grid& g, std::uint64_t seed, double sigma = 3.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Field f = Field::zeros(g, hartree::Rep::frequency);
  const auto ksq = g.frequency_squared();
  for (std::size_t i = 0; i < g.size(); ++i) {
    f.data()[i] = Complex(nd(rng), nd(rng)) * std::exp(-0.5 * ksq[i] / (sigma * sigma));
  }
  return f.to_physical();
}

/// Random coefficients on the modes with |ξ| ≤ band and zero elsewhere.
inline Field band_limited(const Grid& g, std::uint64_t seed, double band) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Field f = Field::zeros(g, hartree::Rep::frequency);
  const auto ksq = g.frequency_squared();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Complex c(nd(rng), nd(rng));
    if (ksq[i] <= band * band) f.data()[i] = c;
  }
  return f.to_physical();
}

inline Field gaussian(const Grid& g, double width = 1.0) {
  return Field::sample(g, [width](std::span<const double> x) {
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    return Complex(std::exp(-0.5 * r2 / (width * width)), 0.0);
  });
}

/// e^{i k·x 2π/L} for an integer wave vector k.
inline Field plane_wave(const Grid& g, std::span<const int> k) {
  const double c = 2.0 * M_PI / g.length();
  return Field::sample(g, [&](std::span<const double> x) {
    double phase = 0.0;
    for (std::size_t a = 0; a < x.size(); ++a) phase += c * k[a] * x[a];
    return std::polar(1.0, phase);
  });
}

inline double max_abs(const Field& f) {
  double m = 0.0;
  for (const auto& z : f.data()) m = std::max(m, std::abs(z));
  return m;
}

inline double max_diff(const Field& a, const Field& b) {
  const Field bb = b.in(a.rep());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - bb.data()[i]));
  return m;
}

}  // namespace testing
