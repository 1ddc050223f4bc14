#include "hartree/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "hartree/error.hpp"

namespace hartree {

struct Grid::Tables {
  std::vector<double> frequency_squared;
  std::vector<double> centering_sign;
};

double Grid::cell_volume() const noexcept { return std::pow(spacing(), d_); }

double Grid::frequency_spacing() const noexcept {
  return 2.0 * std::numbers::pi / L_;
}

Index Grid::unravel(std::size_t flat) const noexcept {
  Index idx{};
  for (int a = d_ - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % static_cast<std::size_t>(n_));
    flat /= static_cast<std::size_t>(n_);
  }
  return idx;
}

std::size_t Grid::ravel(const Index& idx) const noexcept {
  std::size_t flat = 0;
  for (int a = 0; a < d_; ++a) {
    flat = flat * static_cast<std::size_t>(n_) + static_cast<std::size_t>(idx[a]);
  }
  return flat;
}

std::span<const double> Grid::frequency_squared() const noexcept {
  return tables_->frequency_squared;
}

std::span<const double> Grid::centering_sign() const noexcept {
  return tables_->centering_sign;
}

std::vector<double> Grid::frequency_component(int axis) const {
  std::vector<double> out(size_);
  const double dk = frequency_spacing();
  for (std::size_t i = 0; i < size_; ++i) {
    out[i] = dk * wave_index(unravel(i)[axis]);
  }
  return out;
}

std::vector<double> Grid::offset_component(int axis) const {
  std::vector<double> out(size_);
  const double h = spacing();
  for (std::size_t i = 0; i < size_; ++i) {
    out[i] = h * offset_index(unravel(i)[axis]);
  }
  return out;
}

std::vector<double> Grid::position_component(int axis) const {
  std::vector<double> out(size_);
  for (std::size_t i = 0; i < size_; ++i) out[i] = position(unravel(i)[axis]);
  return out;
}

Grid make_grid(int d, int n, double L, std::size_t point_budget) {
  if (d < 1 || d > kMaxDim) {
    throw ParameterError("grid dimension out of range: d=" + std::to_string(d) +
                         " (expected 1..5)");
  }
  if (n < 4 || n % 2 != 0) {
    throw ParameterError("points per axis must be even and >= 4, got " +
                         std::to_string(n));
  }
  if (!(L > 0.0) || !std::isfinite(L)) {
    throw ParameterError("box length must be positive and finite");
  }
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) {
    if (total > point_budget / static_cast<std::size_t>(n)) {
      throw ParameterError("grid exceeds the memory budget of " +
                           std::to_string(point_budget) + " points");
    }
    total *= static_cast<std::size_t>(n);
  }

  Grid g;
  g.d_ = d;
  g.n_ = n;
  g.L_ = L;
  g.size_ = total;

  auto tables = std::make_shared<Grid::Tables>();
  tables->frequency_squared.resize(total);
  tables->centering_sign.resize(total);
  const double dk = g.frequency_spacing();
  for (std::size_t i = 0; i < total; ++i) {
    const Index idx = g.unravel(i);
    double ksq = 0.0;
    int parity = 0;
    for (int a = 0; a < d; ++a) {
      const int k = g.wave_index(idx[a]);
      ksq += (dk * k) * (dk * k);
      parity += k;
    }
    tables->frequency_squared[i] = ksq;
    tables->centering_sign[i] = (parity % 2 == 0) ? 1.0 : -1.0;
  }
  g.tables_ = std::move(tables);
  return g;
}

}  // namespace hartree
