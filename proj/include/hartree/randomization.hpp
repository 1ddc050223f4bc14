#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "json.hpp"

#include "hartree/field.hpp"

namespace hartree {

/// Regularity s and cube-shrink exponent a of the narrowed Wiener
/// randomization. Construction enforces a > max{4-2s, 5-4s, -s/2, 3}.
class RandomizationParams {
 public:
  static RandomizationParams make(double s, int a);

  /// max{4-2s, 5-4s, -s/2, 3}.
  static double lower_bound(double s) noexcept;
  /// Smallest admissible integer a for regularity s.
  static int minimal_a(double s) noexcept;

  double s() const noexcept { return s_; }
  int a() const noexcept { return a_; }

 private:
  RandomizationParams(double s, int a) : s_(s), a_(a) {}
  double s_;
  int a_;
};

/// One frequency cell Q_j of the partition.
struct CubeCell {
  double annulus;   // N of the annulus O_{2N}\O_N; 0 for the central cube O_1
  double side;      // cell side actually used (N^{-a} or one lattice point)
};

/// Per-annulus bookkeeping for reporting.
struct AnnulusSummary {
  double N;               // 0 for the central cube
  std::size_t cells;
  std::size_t lattice_points;
  double nominal_side;    // N^{-a}
  double side_used;
  bool sub_lattice;       // N^{-a} below the lattice spacing
};

/// The partition of the frequency lattice into cells: the central cube O_1,
/// then the cells of each annulus Q_N in increasing N. Within an annulus
/// cells are ordered lexicographically by their integer cell coordinates.
/// ψ_j is the indicator of the lattice points assigned to cell j, so the
/// weights sum to one at every lattice frequency.
class CubeSystem {
 public:
  const Grid& grid() const noexcept { return grid_; }
  const RandomizationParams& params() const noexcept { return params_; }
  std::size_t cube_count() const noexcept { return cells_.size(); }
  const CubeCell& cell(std::size_t j) const { return cells_.at(j); }

  /// Frequency-storage indices in cell j.
  std::span<const std::size_t> members(std::size_t j) const;
  /// Cell owning frequency-storage index i.
  std::uint32_t owner(std::size_t i) const noexcept { return owner_[i]; }
  std::span<const std::uint32_t> owners() const noexcept { return owner_; }
  /// ψ_j(ξ_i): 1 if cell j owns index i, else 0.
  double weight(std::size_t j, std::size_t i) const noexcept {
    return owner_[i] == j ? 1.0 : 0.0;
  }

  /// Largest annulus N present on the grid.
  double max_annulus() const noexcept { return max_annulus_; }
  const std::vector<AnnulusSummary>& annuli() const noexcept { return annuli_; }

  nlohmann::json summary() const;

 private:
  friend CubeSystem build_cube_system(const Grid& grid, const RandomizationParams& params);
  CubeSystem(Grid grid, RandomizationParams params)
      : grid_(std::move(grid)), params_(params) {}

  Grid grid_;
  RandomizationParams params_;
  std::vector<CubeCell> cells_;
  std::vector<std::uint32_t> owner_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> members_;
  std::vector<AnnulusSummary> annuli_;
  double max_annulus_ = 0.0;
};

CubeSystem build_cube_system(const Grid& grid, const RandomizationParams& params);

/// Complex Gaussians g_j with E|g_j|² = 1; g_j depends only on (seed, j).
struct RandomCoefficients {
  std::uint64_t seed = 0;
  std::vector<Complex> values;
};

RandomCoefficients sample_coefficients(std::uint64_t seed, std::size_t count);
/// The single coefficient g_j of the stream `seed`.
Complex coefficient(std::uint64_t seed, std::size_t j) noexcept;

/// □_j f: frequency coefficients restricted to cell j.
Field box_project(const Field& f, std::size_t j, const CubeSystem& cs);

/// f^ω = Σ_j g_j □_j f.
Field randomize(const Field& f, const CubeSystem& cs, const RandomCoefficients& coeffs);

/// ‖□_j f‖²_{L²} for every cell j, computed in one pass.
std::vector<double> box_energies(const Field& f, const CubeSystem& cs);

struct HighLowSplit {
  Field high;  // v₀ = P_{≥N₀} f
  Field low;   // w₀ = P_{<N₀} f
};

/// u₀ = P_{≥N₀}u₀ + P_{<N₀}u₀ with P_{<N₀} = P_{≤N₀/2}.
HighLowSplit split_high_low(const Field& f, double N0);

}  // namespace hartree
