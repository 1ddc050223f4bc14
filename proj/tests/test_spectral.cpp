#include <array>
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "oracles.hpp"

#include "hartree/error.hpp"
#include "hartree/spectral.hpp"

using namespace hartree;
using namespace testing;

TEST_CASE("make_grid lattice and limits") {
  const Grid g1 = make_grid(1, 8, 2.0 * M_PI);
  const auto xi = g1.frequency_component(0);
  std::vector<double> sorted(xi.begin(), xi.end());
  std::sort(sorted.begin(), sorted.end());
  for (int k = -4; k <= 3; ++k) CHECK(sorted[k + 4] == doctest::Approx(k).epsilon(1e-15));

  CHECK(make_grid(5, 16, 40.0).size() == 1048576u);
  CHECK_THROWS_AS(make_grid(6, 8, 1.0), ParameterError);
  CHECK_THROWS_AS(make_grid(2, 7, 1.0), ParameterError);
  CHECK_THROWS_AS(make_grid(2, 8, -1.0), ParameterError);
}

TEST_CASE("transform round trip and Plancherel") {
  const Grid g = make_grid(2, 16, 7.0);
  for (std::uint64_t s = 0; s < 100; ++s) {
    const Field f = random_field(g, s, 4.0);
    const Field back = f.to_frequency().to_physical();
    CHECK(max_diff(f, back) / max_abs(f) < 1e-12);

    const Field fh = f.to_frequency();
    double phys = 0.0, freq = 0.0;
    for (const auto& z : f.data()) phys += std::norm(z);
    for (const auto& z : fh.data()) freq += std::norm(z);
    phys *= g.cell_volume();
    freq *= std::pow(g.frequency_spacing(), 2);
    CHECK(std::abs(std::sqrt(phys) - std::sqrt(freq)) / std::sqrt(phys) < 1e-10);
  }
}

TEST_CASE("identity multiplier is exact in frequency space") {
  const Grid g = make_grid(3, 8, 5.0);
  const Field f = random_field(g, 7).to_frequency();
  const Field out = apply_multiplier(f, symbols::bracket_pow(0.0));
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(out.data()[i] == f.data()[i]);
}

TEST_CASE("plane waves are eigenfunctions of |grad|^s") {
  const Grid g = make_grid(2, 16, 2.0 * M_PI);
  const std::array<int, 2> k{3, -2};
  const Field f = plane_wave(g, k);
  const double s = 0.7;
  const Field out = abs_grad(f, s).to_physical();
  const double lam = std::pow(std::sqrt(13.0), s);
  CHECK(max_diff(out, f * Complex(lam, 0.0)) < 1e-12 * lam);
}

TEST_CASE("inverse |grad| on a Gaussian matches the Fourier series oracle") {
  const int n = 64;
  const double L = 20.0;
  const Grid g = make_grid(1, n, L);
  const Field f = gaussian(g);
  const Field out = abs_grad(f, -1.0).to_physical();
  // Series with the exact transform e^{-ξ²/2} and the zero mode removed.
  const double dk = 2.0 * M_PI / L;
  double worst = 0.0, scale = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = g.position(i);
    Complex acc = 0.0;
    for (int k = -n / 2; k < n / 2; ++k) {
      if (k == 0) continue;
      const double xi = dk * k;
      acc += std::exp(-0.5 * xi * xi) / std::abs(xi) * std::polar(1.0, xi * x);
    }
    acc *= dk / std::sqrt(2.0 * M_PI);
    worst = std::max(worst, std::abs(acc - out.data()[i]));
    scale = std::max(scale, std::abs(acc));
  }
  CHECK(worst / scale < 1e-6);
}

TEST_CASE("|grad|^s then |grad|^-s restores the zero-mean part") {
  const Grid g = make_grid(3, 12, 6.0);
  for (double s : {0.5, 1.0, 2.0}) {
    const Field f = random_field(g, 11).to_frequency();
    Field zero_mean = f;
    zero_mean.data()[0] = 0.0;
    const Field back = abs_grad(abs_grad(f, s), -s);
    CHECK(max_diff(back, zero_mean) < 1e-10 * max_abs(zero_mean));
  }
}

TEST_CASE("Littlewood-Paley projections") {
  const Grid g = make_grid(2, 32, 2.0 * M_PI);
  const Field one = Field::sample(g, [](std::span<const double>) { return Complex(1.0, 0.0); });
  for (double N : {1.0, 2.0, 4.0}) CHECK(max_diff(lp_project(one, Band::at_most, N), one) < 1e-14);

  Field single = Field::zeros(g, Rep::frequency);
  single.data()[g.ravel(Index{8, 0})] = 1.0;  // |ξ| = 8 = 4N for N = 2
  CHECK(max_abs(lp_project(single, Band::at_most, 2.0).to_physical()) == 0.0);

  const Field f = random_field(g, 3, 8.0).to_frequency();
  for (double N : {1.0, 2.0, 4.0, 8.0}) {
    const Field sum = lp_project(f, Band::at_most, N) + lp_project(f, Band::above, N);
    CHECK(max_diff(sum, f) < 1e-14 * max_abs(f));
    const Field sharp = lp_project(f, Band::at_most, N, CutoffProfile::sharp);
    CHECK(max_diff(lp_project(sharp, Band::at_most, N, CutoffProfile::sharp), sharp) == 0.0);
  }
  CHECK_THROWS_AS(lp_project(f, Band::at_most, 3.0), ParameterError);
  CHECK(lp_bump(0.5) == 1.0);
  CHECK(lp_bump(2.0) == 0.0);
}

TEST_CASE("Bernstein sanity for dyadic pieces") {
  const Grid g = make_grid(2, 32, 2.0 * M_PI);
  const double N = 4.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const Field f = band_limited(g, 100 + s, 2.0 * N);
    const Field pn = lp_project(f, Band::exactly, N);
    const double base = norm(pn, Lp{2.0});
    for (double e : {-1.0, -0.5, 0.5, 1.0}) {
      const double r = norm(abs_grad(pn, e), Lp{2.0}) / (std::pow(N, e) * base);
      CHECK(r >= std::pow(2.0, -std::abs(e)));
      CHECK(r <= std::pow(2.0, std::abs(e) + 1.0));
    }
  }
}

TEST_CASE("free propagation") {
  const Grid g = make_grid(2, 16, 2.0 * M_PI);
  const Field f = random_field(g, 5);
  CHECK(max_diff(free_propagate(f, 0.0), f) == 0.0);

  const std::array<int, 2> k{2, 1};
  const double t = 0.37;
  const Field pw = plane_wave(g, k);
  CHECK(max_diff(free_propagate(pw, t), pw * std::polar(1.0, -5.0 * t)) < 1e-12);

  const Grid g1 = make_grid(1, 512, 60.0);
  const Field u0 = gaussian(g1);
  for (double tt : {0.25, 0.5, 1.0}) {
    const double peak = max_abs(free_propagate(u0, tt).to_physical());
    CHECK(std::abs(peak - oracle::free_gaussian_peak(tt)) / oracle::free_gaussian_peak(tt) < 1e-3);
  }
}

TEST_CASE("norms") {
  const Grid g1 = make_grid(1, 16, 2.0 * M_PI);
  const Field one = Field::sample(g1, [](std::span<const double>) { return Complex(1.0, 0.0); });
  CHECK(norm(one, Lp{2.0}) == doctest::Approx(std::sqrt(2.0 * M_PI)).epsilon(1e-14));

  const Grid g = make_grid(3, 8, 4.0);
  const std::array<int, 3> k{1, 2, -2};
  const double xi = 3.0 * 2.0 * M_PI / 4.0;
  for (double s : {0.5, 1.0, 2.0}) {
    CHECK(norm(plane_wave(g, k), HsDot{s}) ==
          doctest::Approx(std::pow(xi, s) * std::pow(4.0, 1.5)).epsilon(1e-12));
  }

  const Grid g5 = make_grid(5, 24, 16.0);
  CHECK(norm(gaussian(g5), Lp{2.0}) == doctest::Approx(std::pow(M_PI, 1.25)).epsilon(1e-6));
}

TEST_CASE("energy-critical rescaling") {
  const Grid src = make_grid(5, 8, 16.0);
  const Grid dst = make_grid(5, 8, 8.0);
  const Field f = band_limited(src, 9, 2.0 * M_PI / 16.0 * 1.5);
  CHECK(max_diff(scale_field(f, 1.0, src), f) < 1e-14 * max_abs(f));
  const Field sf = scale_field(f, 2.0, dst);
  CHECK(norm(sf, HsDot{1.0}) / norm(f, HsDot{1.0}) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(norm(sf, HsDot{0.0}) / norm(f, HsDot{0.0}) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK_THROWS_AS(scale_field(f, 2.0, src), ParameterError);
}
