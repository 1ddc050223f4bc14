#include "hartree/field.hpp"

#include <cmath>
#include <numbers>

#include "hartree/error.hpp"
#include "hartree/fft.hpp"

namespace hartree {
namespace {

double forward_scale(const Grid& g) {
  return std::pow(2.0 * std::numbers::pi, -0.5 * g.dim()) * g.cell_volume();
}

}  // namespace

Field::Field(Grid grid, Rep rep, std::vector<Complex> data)
    : grid_(std::move(grid)), rep_(rep), data_(std::move(data)) {
  if (data_.size() != grid_.size()) {
    throw ParameterError("field data length does not match the grid");
  }
}

Field Field::zeros(const Grid& grid, Rep rep) {
  return Field(grid, rep, std::vector<Complex>(grid.size()));
}

Field Field::sample(const Grid& grid,
                    const std::function<Complex(std::span<const double>)>& fn) {
  std::vector<Complex> data(grid.size());
  std::array<double, kMaxDim> x{};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Index idx = grid.unravel(i);
    for (int a = 0; a < grid.dim(); ++a) x[a] = grid.position(idx[a]);
    data[i] = fn(std::span<const double>(x.data(), grid.dim()));
  }
  return Field(grid, Rep::physical, std::move(data));
}

void forward_coefficients(const Grid& grid, std::span<Complex> data) {
  fft::forward(grid.dim(), grid.points_per_axis(), data);
  const double scale = forward_scale(grid);
  const auto sign = grid.centering_sign();
  for (std::size_t i = 0; i < data.size(); ++i) data[i] *= scale * sign[i];
}

void inverse_coefficients(const Grid& grid, std::span<Complex> data) {
  const double scale = 1.0 / (forward_scale(grid) * static_cast<double>(grid.size()));
  const auto sign = grid.centering_sign();
  for (std::size_t i = 0; i < data.size(); ++i) data[i] *= scale * sign[i];
  fft::backward(grid.dim(), grid.points_per_axis(), data);
}

Field Field::to_frequency() const {
  if (rep_ == Rep::frequency) return *this;
  Field out = *this;
  forward_coefficients(grid_, out.data_);
  out.rep_ = Rep::frequency;
  return out;
}

Field Field::to_physical() const {
  if (rep_ == Rep::physical) return *this;
  Field out = *this;
  inverse_coefficients(grid_, out.data_);
  out.rep_ = Rep::physical;
  return out;
}

Field& Field::operator+=(const Field& other) {
  require_same_grid(grid_, other.grid_);
  if (other.rep_ == rep_) {
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  } else {
    const Field tmp = other.in(rep_);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += tmp.data_[i];
  }
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require_same_grid(grid_, other.grid_);
  if (other.rep_ == rep_) {
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  } else {
    const Field tmp = other.in(rep_);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= tmp.data_[i];
  }
  return *this;
}

Field& Field::operator*=(Complex scale) {
  for (auto& z : data_) z *= scale;
  return *this;
}

void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) throw GridMismatch();
}

}  // namespace hartree
