#include "hartree/fft.hpp"

#include <fftw3.h>

#include <array>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace hartree::fft {
namespace {

// FFTW planning is not thread-safe; execution of an existing plan on new
// arrays is. Plans are created once per (d, n, sign) and never destroyed.
class PlanCache {
 public:
  fftw_plan get(int d, int n, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::make_tuple(d, n, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;

    std::array<int, 5> dims{};
    std::size_t total = 1;
    for (int a = 0; a < d; ++a) {
      dims[a] = n;
      total *= static_cast<std::size_t>(n);
    }
    std::vector<std::complex<double>> scratch(total);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft(d, dims.data(), buf, buf, sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan == nullptr) throw std::runtime_error("FFTW planning failed");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

void execute(int d, int n, int sign, std::span<std::complex<double>> data) {
  fftw_plan plan = cache().get(d, n, sign);
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, buf, buf);
}

}  // namespace

void forward(int d, int n, std::span<std::complex<double>> data) {
  execute(d, n, FFTW_FORWARD, data);
}

void backward(int d, int n, std::span<std::complex<double>> data) {
  execute(d, n, FFTW_BACKWARD, data);
}

}  // namespace hartree::fft
