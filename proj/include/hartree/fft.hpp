#pragma once

#include <complex>
#include <span>

namespace hartree::fft {

// Unnormalized in-place complex DFTs over a d-dimensional cube of side n,
// row-major. forward uses exp(-2πi k·j/n), backward exp(+2πi k·j/n); a
// forward/backward pair multiplies the data by n^d.
void forward(int d, int n, std::span<std::complex<double>> data);
void backward(int d, int n, std::span<std::complex<double>> data);

}  // namespace hartree::fft
