#pragma once

#include <functional>
#include <span>
#include <vector>

#include "hartree/field.hpp"

namespace hartree {

/// Average of |x|^{-γ} over the d-ball of radius Δx/2 (requires γ < d).
/// Stands in for the singular sample at x = 0.
double half_cell_average(int d, double spacing, double gamma);

/// Samples `fn(r, |r|)` at the minimal-image offset r of every storage
/// index (origin at index 0). The origin receives `origin_value`.
std::vector<double> sample_minimal_image(
    const Grid& grid, const std::function<double(std::span<const double>, double)>& fn,
    double origin_value);

/// Minimal-image sampling of |x|^{-γ} with the half-cell average at x = 0.
std::vector<double> power_kernel_samples(const Grid& grid, double gamma);

/// Periodic convolution (G ∗ A)(x) = Δx^d Σ_y G(x - y) A(y) represented by
/// its DFT multiplier Δx^d·DFT(G).
class ConvolutionKernel {
 public:
  ConvolutionKernel() = default;
  static ConvolutionKernel from_samples(const Grid& grid, std::span<const double> samples);
  /// `multiplier` is indexed in FFT storage order.
  static ConvolutionKernel from_multiplier(const Grid& grid, std::vector<Complex> multiplier);

  const Grid& grid() const noexcept { return grid_; }
  std::span<const Complex> multiplier() const noexcept { return multiplier_; }

  /// G ∗ a for real a (the imaginary residue is dropped).
  std::vector<double> apply(std::span<const double> a) const;
  /// G ∗ a for complex a.
  std::vector<Complex> apply(std::span<const Complex> a) const;

 private:
  ConvolutionKernel(Grid grid, std::vector<Complex> multiplier)
      : grid_(std::move(grid)), multiplier_(std::move(multiplier)) {}
  Grid grid_;
  std::vector<Complex> multiplier_;
};

/// Unnormalized DFT of real samples (no centering phase).
std::vector<Complex> dft_of_real(const Grid& grid, std::span<const double> values);

/// ⟨G ∗ A, B⟩ = Δx^d Σ_x (G∗A)(x) B(x) for real A, B given their
/// unnormalized DFTs. Evaluated by Parseval without an inverse transform.
double convolution_pairing(const ConvolutionKernel& kernel, std::span<const Complex> a_hat,
                           std::span<const Complex> b_hat);

/// Same pairing with an explicit multiplier table.
double convolution_pairing(const Grid& grid, std::span<const Complex> multiplier,
                           std::span<const Complex> a_hat, std::span<const Complex> b_hat);

}  // namespace hartree
