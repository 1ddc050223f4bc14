#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace hartree {

inline constexpr int kMaxDim = 5;
using Index = std::array<int, kMaxDim>;

/// Default upper bound on n^d accepted by make_grid (about 1 GiB per field).
inline constexpr std::size_t kDefaultPointBudget = std::size_t{1} << 26;

/// Periodic box [-L/2, L/2)^d sampled with n points per axis.
///
/// Physical samples sit at x_i = -L/2 + i·Δx. Frequency data is stored in
/// FFT order: storage index i on an axis corresponds to the wave index
/// k = i for i < n/2 and k = i - n otherwise, i.e. ξ = 2πk/L with
/// k ∈ [-n/2, n/2). Copies share the precomputed lattice tables.
class Grid {
 public:
  int dim() const noexcept { return d_; }
  int points_per_axis() const noexcept { return n_; }
  double length() const noexcept { return L_; }
  double spacing() const noexcept { return L_ / n_; }
  double cell_volume() const noexcept;
  /// Lattice spacing in frequency space, 2π/L.
  double frequency_spacing() const noexcept;
  std::size_t size() const noexcept { return size_; }

  /// Wave index k ∈ [-n/2, n/2) of storage index i along one axis.
  int wave_index(int i) const noexcept { return i < n_ / 2 ? i : i - n_; }
  /// Minimal-image offset (in cells) of storage index i along one axis.
  int offset_index(int i) const noexcept { return wave_index(i); }
  double position(int i) const noexcept { return -0.5 * L_ + i * spacing(); }

  /// Row-major decomposition of a flat index into per-axis indices.
  Index unravel(std::size_t flat) const noexcept;
  std::size_t ravel(const Index& idx) const noexcept;

  /// |ξ|² for every frequency-storage index.
  std::span<const double> frequency_squared() const noexcept;
  /// (-1)^{Σk}: the phase that centers the transform on the box midpoint.
  std::span<const double> centering_sign() const noexcept;

  /// ξ_axis for every frequency-storage index (component `axis` of ξ).
  std::vector<double> frequency_component(int axis) const;
  /// Minimal-image offset component (physical units) for every storage index.
  std::vector<double> offset_component(int axis) const;
  /// Physical coordinate component for every storage index.
  std::vector<double> position_component(int axis) const;

  friend bool operator==(const Grid& a, const Grid& b) noexcept {
    return a.d_ == b.d_ && a.n_ == b.n_ && a.L_ == b.L_;
  }

 private:
  friend Grid make_grid(int d, int n, double L, std::size_t point_budget);
  struct Tables;

  int d_ = 0;
  int n_ = 0;
  double L_ = 0.0;
  std::size_t size_ = 0;
  std::shared_ptr<const Tables> tables_;
};

/// Builds a grid; throws ParameterError when d ∉ [1, 5], n is odd or < 4,
/// L ≤ 0, or n^d exceeds `point_budget`.
Grid make_grid(int d, int n, double L,
               std::size_t point_budget = kDefaultPointBudget);

}  // namespace hartree
