#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "hartree/grid.hpp"

namespace hartree {

using Complex = std::complex<double>;

enum class Rep { physical, frequency };

/// A complex function on a Grid, held either as point samples or as
/// Fourier coefficients.
///
/// Frequency coefficients follow the symmetric convention
///   f̂(ξ) = (2π)^{-d/2} ∫ f(x) e^{-ix·ξ} dx
/// evaluated by the rectangle rule on the box, so that
///   Δx^d Σ|f|² = (2π/L)^d Σ|f̂|²   (Plancherel).
class Field {
 public:
  Field() = default;
  Field(Grid grid, Rep rep, std::vector<Complex> data);

  static Field zeros(const Grid& grid, Rep rep = Rep::physical);
  /// Samples `fn(x)` at every physical grid point; `x` has `grid.dim()` entries.
  static Field sample(const Grid& grid,
                      const std::function<Complex(std::span<const double>)>& fn);

  const Grid& grid() const noexcept { return grid_; }
  Rep rep() const noexcept { return rep_; }
  std::span<const Complex> data() const noexcept { return data_; }
  std::span<Complex> data() noexcept { return data_; }
  std::size_t size() const noexcept { return data_.size(); }

  Field to_frequency() const;
  Field to_physical() const;
  Field in(Rep rep) const { return rep == Rep::physical ? to_physical() : to_frequency(); }

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(Complex scale);

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(Field a, Complex s) { return a *= s; }
  friend Field operator*(Complex s, Field a) { return a *= s; }

 private:
  Grid grid_;
  Rep rep_ = Rep::physical;
  std::vector<Complex> data_;
};

/// Throws GridMismatch unless both grids are identical.
void require_same_grid(const Grid& a, const Grid& b);

// Raw transforms shared by the operator modules. `forward_coefficients`
// maps physical samples to normalized f̂ values; `inverse_coefficients` is
// its exact inverse. Both act in place.
void forward_coefficients(const Grid& grid, std::span<Complex> data);
void inverse_coefficients(const Grid& grid, std::span<Complex> data);

}  // namespace hartree
