#include "hartree/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hartree/error.hpp"

namespace hartree {

namespace symbols {

MultiplierSymbol identity() {
  return {[](std::span<const double>, double) { return Complex(1.0, 0.0); },
          Complex(1.0, 0.0)};
}

MultiplierSymbol abs_grad_pow(double s, Complex zero_mode) {
  return {[s](std::span<const double>, double r) { return Complex(std::pow(r, s), 0.0); },
          zero_mode};
}

MultiplierSymbol bracket_pow(double s) {
  return {[s](std::span<const double>, double r) {
            return Complex(std::pow(1.0 + r * r, 0.5 * s), 0.0);
          },
          Complex(1.0, 0.0)};
}

MultiplierSymbol partial(int axis) {
  return {[axis](std::span<const double> xi, double) { return Complex(0.0, xi[axis]); },
          Complex(0.0, 0.0)};
}

}  // namespace symbols

Field apply_multiplier(const Field& f, const MultiplierSymbol& m) {
  const Grid& g = f.grid();
  Field out = f.to_frequency();
  auto data = out.data();
  std::array<double, kMaxDim> xi{};
  const double dk = g.frequency_spacing();
  const auto ksq = g.frequency_squared();
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (i == 0) {
      data[i] *= m.zero_mode;
      continue;
    }
    const Index idx = g.unravel(i);
    for (int a = 0; a < g.dim(); ++a) xi[a] = dk * g.wave_index(idx[a]);
    const Complex factor =
        m.evaluator(std::span<const double>(xi.data(), g.dim()), std::sqrt(ksq[i]));
    if (!std::isfinite(factor.real()) || !std::isfinite(factor.imag())) {
      throw ParameterError("multiplier symbol is not finite at a nonzero frequency");
    }
    data[i] *= factor;
  }
  return out.in(f.rep());
}

namespace {

// Diagonal multiplier depending only on |ξ|; cheaper than the generic path.
template <class Fn>
Field radial_multiply(const Field& f, Fn&& fn) {
  Field out = f.to_frequency();
  auto data = out.data();
  const auto ksq = f.grid().frequency_squared();
  for (std::size_t i = 0; i < data.size(); ++i) data[i] *= fn(i, std::sqrt(ksq[i]));
  return out.in(f.rep());
}

}  // namespace

Field abs_grad(const Field& f, double s) {
  return radial_multiply(f, [s](std::size_t i, double r) {
    return i == 0 ? 0.0 : std::pow(r, s);
  });
}

Field bracket_grad(const Field& f, double s) {
  return radial_multiply(f, [s](std::size_t, double r) {
    return std::pow(1.0 + r * r, 0.5 * s);
  });
}

Field partial_derivative(const Field& f, int axis) {
  if (axis < 0 || axis >= f.grid().dim()) throw ParameterError("axis out of range");
  const Grid& g = f.grid();
  Field out = f.to_frequency();
  auto data = out.data();
  const double dk = g.frequency_spacing();
  const std::size_t n = static_cast<std::size_t>(g.points_per_axis());
  std::size_t stride = 1;
  for (int a = g.dim() - 1; a > axis; --a) stride *= n;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int k = g.wave_index(static_cast<int>((i / stride) % n));
    data[i] *= k == -static_cast<int>(n / 2) ? Complex(0.0, 0.0) : Complex(0.0, dk * k);
  }
  return out.in(f.rep());
}

double lp_bump(double r) noexcept {
  if (r <= 1.0) return 1.0;
  if (r >= 2.0) return 0.0;
  const double t = r - 1.0;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  return b / (a + b);
}

bool is_dyadic(double N) noexcept {
  if (!(N > 0.0) || !std::isfinite(N)) return false;
  int exponent = 0;
  return std::frexp(N, &exponent) == 0.5;
}

Field lp_project(const Field& f, Band band, double N, CutoffProfile profile) {
  if (!is_dyadic(N)) {
    throw ParameterError("Littlewood-Paley scale must be dyadic, got " + std::to_string(N));
  }
  auto bump = [profile](double r) {
    return profile == CutoffProfile::smooth ? lp_bump(r) : (r <= 1.0 ? 1.0 : 0.0);
  };
  return radial_multiply(f, [&](std::size_t, double r) {
    switch (band) {
      case Band::at_most: return bump(r / N);
      case Band::exactly: return bump(r / N) - bump(2.0 * r / N);
      case Band::above: return 1.0 - bump(r / N);
      case Band::at_least: return 1.0 - bump(2.0 * r / N);
    }
    return 0.0;
  });
}

Field free_propagate(const Field& f, double t) {
  if (t == 0.0) return f;
  Field out = f.to_frequency();
  auto data = out.data();
  const auto ksq = f.grid().frequency_squared();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double phase = -ksq[i] * t;
    data[i] *= Complex(std::cos(phase), std::sin(phase));
  }
  return out.in(f.rep());
}

double lp_norm(const Grid& grid, std::span<const double> values, double p) {
  if (!(p >= 1.0)) throw ParameterError("L^p norm requires p >= 1");
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
  double acc = 0.0;
  for (double v : values) acc += std::pow(std::abs(v), p);
  return std::pow(grid.cell_volume() * acc, 1.0 / p);
}

double norm(const Field& f, const NormKind& kind) {
  const Grid& g = f.grid();
  if (const auto* lp = std::get_if<Lp>(&kind)) {
    if (!(lp->p >= 1.0)) throw ParameterError("L^p norm requires p >= 1");
    const Field phys = f.to_physical();
    std::vector<double> mod(phys.size());
    for (std::size_t i = 0; i < mod.size(); ++i) mod[i] = std::abs(phys.data()[i]);
    return lp_norm(g, mod, lp->p);
  }
  const Field freq = f.to_frequency();
  const auto ksq = g.frequency_squared();
  const auto data = freq.data();
  double acc = 0.0;
  if (const auto* hs = std::get_if<Hs>(&kind)) {
    for (std::size_t i = 0; i < data.size(); ++i) {
      acc += std::pow(1.0 + ksq[i], hs->s) * std::norm(data[i]);
    }
  } else {
    const double s = std::get<HsDot>(kind).s;
    for (std::size_t i = 1; i < data.size(); ++i) {
      acc += std::pow(ksq[i], s) * std::norm(data[i]);
    }
  }
  return std::sqrt(acc * std::pow(g.frequency_spacing(), g.dim()));
}

Field scale_field(const Field& f, double lambda, const Grid& target) {
  const Grid& src = f.grid();
  if (!(lambda > 0.0)) throw ParameterError("scaling factor must be positive");
  if (target.dim() != src.dim() ||
      std::abs(target.length() * lambda - src.length()) > 1e-12 * src.length()) {
    throw ParameterError("target grid must have the same dimension and side L/lambda");
  }
  const int d = src.dim();
  const double exponent = 0.5 * (d - 2) - d;  // λ^{(d-2)/2} u(λ·) ↦ λ^{(d-2)/2 - d} f̂(·/λ)
  const double factor = std::pow(lambda, exponent);

  const Field in = f.to_frequency();
  Field out = Field::zeros(target, Rep::frequency);
  const int ns = src.points_per_axis();
  const int nt = target.points_per_axis();
  const int half = std::min(ns, nt) / 2;
  auto to_storage = [](int k, int n) { return k >= 0 ? k : k + n; };

  // Walk the common wave-index block.
  const std::size_t block = [&] {
    std::size_t b = 1;
    for (int a = 0; a < d; ++a) b *= static_cast<std::size_t>(2 * half);
    return b;
  }();
  Index ks{}, is{}, it{};
  for (std::size_t c = 0; c < block; ++c) {
    std::size_t rem = c;
    for (int a = d - 1; a >= 0; --a) {
      ks[a] = static_cast<int>(rem % static_cast<std::size_t>(2 * half)) - half;
      rem /= static_cast<std::size_t>(2 * half);
    }
    for (int a = 0; a < d; ++a) {
      is[a] = to_storage(ks[a], ns);
      it[a] = to_storage(ks[a], nt);
    }
    out.data()[target.ravel(it)] = factor * in.data()[src.ravel(is)];
  }
  return out.in(f.rep());
}

}  // namespace hartree
