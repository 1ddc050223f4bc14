#pragma once

// Test-side reference computations. They deliberately avoid the library's
// transforms and kernels and work from the defining formulas.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

using Complex = std::complex<double>;
inline constexpr double pi = std::numbers::pi;

/// Composite Simpson rule on [a, b] with an even number of panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels = 20000) {
  const double h = (b - a) / panels;
  double acc = f(a) + f(b);
  for (int i = 1; i < panels; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return acc * h / 3.0;
}

/// Surface area of the unit sphere in ℝ^d.
inline double sphere_area(int d) { return 2.0 * std::pow(pi, 0.5 * d) / std::tgamma(0.5 * d); }

/// Minimal-image offset of index difference m on an n-point periodic axis.
inline int minimal_image(int m, int n) {
  m = ((m % n) + n) % n;
  return m < n / 2 ? m : m - n;
}

/// |x|^{-γ} sample for the periodic kernel in d=1, origin replaced by the
/// mean of |x|^{-γ} over [-Δx/2, Δx/2].
inline double kernel_1d(int offset, double dx, double gamma) {
  if (offset == 0) return std::pow(0.5 * dx, -gamma) / (1.0 - gamma);
  return std::pow(std::abs(offset) * dx, -gamma);
}

/// (K ∗ ρ)(x_i) = Δx Σ_j K(x_i - x_j) ρ_j by direct summation.
inline std::vector<double> direct_potential_1d(const std::vector<double>& rho, double dx, double gamma) {
  const int n = static_cast<int>(rho.size());
  std::vector<double> out(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) out[i] += kernel_1d(minimal_image(i - j, n), dx, gamma) * rho[j];
    out[i] *= dx;
  }
  return out;
}

/// Spectral derivative of periodic samples by an explicit trigonometric sum
/// over wave numbers -n/2 < k < n/2.
inline std::vector<Complex> trig_derivative_1d(const std::vector<Complex>& f, double L) {
  const int n = static_cast<int>(f.size());
  std::vector<Complex> coef(n);
  for (int k = 0; k < n; ++k) {
    Complex acc = 0.0;
    for (int j = 0; j < n; ++j) acc += f[j] * std::polar(1.0, -2.0 * pi * k * j / n);
    coef[k] = acc / static_cast<double>(n);
  }
  std::vector<Complex> out(n);
  for (int j = 0; j < n; ++j) {
    Complex acc = 0.0;
    for (int k = 0; k < n; ++k) {
      const int kk = k < n / 2 ? k : k - n;
      if (kk == -n / 2) continue;
      acc += Complex(0.0, 2.0 * pi * kk / L) * coef[k] * std::polar(1.0, 2.0 * pi * k * j / n);
    }
    out[j] = acc;
  }
  return out;
}

/// Modulus of the free Schrödinger evolution of e^{-x²/2} in one dimension.
inline double free_gaussian_peak(double t) { return std::pow(1.0 + 4.0 * t * t, -0.25); }

}  // namespace oracle
