#include "hartree/kernels.hpp"

#include <cmath>

#include "hartree/error.hpp"
#include "hartree/fft.hpp"

namespace hartree {

double half_cell_average(int d, double spacing, double gamma) {
  if (!(gamma < d)) throw ParameterError("half-cell average needs gamma < d");
  return d / (d - gamma) * std::pow(0.5 * spacing, -gamma);
}

std::vector<double> sample_minimal_image(
    const Grid& grid, const std::function<double(std::span<const double>, double)>& fn,
    double origin_value) {
  std::vector<double> out(grid.size());
  std::array<double, kMaxDim> r{};
  const double h = grid.spacing();
  out[0] = origin_value;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const Index idx = grid.unravel(i);
    double rsq = 0.0;
    for (int a = 0; a < grid.dim(); ++a) {
      r[a] = h * grid.offset_index(idx[a]);
      rsq += r[a] * r[a];
    }
    out[i] = fn(std::span<const double>(r.data(), grid.dim()), std::sqrt(rsq));
  }
  return out;
}

std::vector<double> power_kernel_samples(const Grid& grid, double gamma) {
  return sample_minimal_image(
      grid, [gamma](std::span<const double>, double r) { return std::pow(r, -gamma); },
      half_cell_average(grid.dim(), grid.spacing(), gamma));
}

std::vector<Complex> dft_of_real(const Grid& grid, std::span<const double> values) {
  std::vector<Complex> out(values.begin(), values.end());
  fft::forward(grid.dim(), grid.points_per_axis(), out);
  return out;
}

ConvolutionKernel ConvolutionKernel::from_samples(const Grid& grid,
                                                  std::span<const double> samples) {
  if (samples.size() != grid.size()) throw ParameterError("kernel samples do not match grid");
  std::vector<Complex> mult = dft_of_real(grid, samples);
  const double vol = grid.cell_volume();
  for (auto& z : mult) z *= vol;
  return ConvolutionKernel(grid, std::move(mult));
}

ConvolutionKernel ConvolutionKernel::from_multiplier(const Grid& grid,
                                                     std::vector<Complex> multiplier) {
  if (multiplier.size() != grid.size()) throw ParameterError("kernel multiplier does not match grid");
  return ConvolutionKernel(grid, std::move(multiplier));
}

std::vector<Complex> ConvolutionKernel::apply(std::span<const Complex> a) const {
  if (a.size() != grid_.size()) throw GridMismatch();
  std::vector<Complex> buf(a.begin(), a.end());
  const int d = grid_.dim();
  const int n = grid_.points_per_axis();
  fft::forward(d, n, buf);
  const double inv = 1.0 / static_cast<double>(grid_.size());
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] *= multiplier_[i] * inv;
  fft::backward(d, n, buf);
  return buf;
}

std::vector<double> ConvolutionKernel::apply(std::span<const double> a) const {
  std::vector<Complex> in(a.begin(), a.end());
  const std::vector<Complex> out = apply(std::span<const Complex>(in));
  std::vector<double> re(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) re[i] = out[i].real();
  return re;
}

double convolution_pairing(const Grid& grid, std::span<const Complex> multiplier,
                           std::span<const Complex> a_hat, std::span<const Complex> b_hat) {
  double acc = 0.0;
  for (std::size_t i = 0; i < multiplier.size(); ++i) {
    acc += (multiplier[i] * a_hat[i] * std::conj(b_hat[i])).real();
  }
  return acc * grid.cell_volume() / static_cast<double>(grid.size());
}

double convolution_pairing(const ConvolutionKernel& kernel, std::span<const Complex> a_hat,
                           std::span<const Complex> b_hat) {
  return convolution_pairing(kernel.grid(), kernel.multiplier(), a_hat, b_hat);
}

}  // namespace hartree
