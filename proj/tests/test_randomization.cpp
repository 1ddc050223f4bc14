#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "helpers.hpp"

#include "hartree/error.hpp"
#include "hartree/randomization.hpp"
#include "hartree/rng.hpp"
#include "hartree/spectral.hpp"

using namespace hartree;
using namespace testing;

namespace {

double admissibility_bound(double s) {
  return std::max({4.0 - 2.0 * s, 5.0 - 4.0 * s, -0.5 * s, 3.0});
}

double l2sq(const Field& f) { return std::pow(norm(f, Lp{2.0}), 2); }

}  // namespace

TEST_CASE("SplitMix64 reference vector and seed derivation") {
  CHECK(derive_seed(0, 0) == 0xE220A8397B1DCDAFULL);
  SplitMix64 g(0);
  CHECK(g.next() == 0xE220A8397B1DCDAFULL);
  CHECK(g.next() == 0x6E789E6AA1B965F4ULL);
  CHECK(g.next() == 0x06C45D188009454FULL);

  std::mt19937_64 rng(42);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t m = rng();
    CHECK(derive_seed(m, 3) == derive_seed(m, 3));
    CHECK(derive_seed(m, 0) != derive_seed(m, 1));
    seen.insert(derive_seed(m, 0));
  }
  CHECK(seen.size() == 1000u);
}

TEST_CASE("admissible cube exponents") {
  CHECK(RandomizationParams::minimal_a(0.0) == 6);
  CHECK(RandomizationParams::minimal_a(-1.0) == 10);
  for (double s : {-2.0, -1.0, 0.0, 0.5, 1.0}) {
    const double bound = admissibility_bound(s);
    for (int a = 0; a <= 30; ++a) {
      if (a > bound) {
        CHECK_NOTHROW(RandomizationParams::make(s, a));
      } else {
        CHECK_THROWS_AS(RandomizationParams::make(s, a), ParameterError);
      }
    }
  }
}

TEST_CASE("cube system partitions the lattice") {
  const Grid g = make_grid(1, 16, 2.0 * M_PI);
  const CubeSystem cs = build_cube_system(g, RandomizationParams::make(0.0, 6));
  CHECK(cs.cell(0).annulus == 0.0);
  const std::size_t central = cs.members(0).size();
  CHECK(cs.cube_count() == 16 - central + 1);
  for (std::size_t j = 1; j < cs.cube_count(); ++j) CHECK(cs.members(j).size() == 1u);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < cs.cube_count(); ++j) total += cs.weight(j, i);
    CHECK(total == 1.0);
  }

  const Grid g3 = make_grid(3, 16, 40.0);
  const CubeSystem cs3 = build_cube_system(g3, RandomizationParams::make(0.0, 6));
  std::vector<int> hits(g3.size(), 0);
  for (std::size_t j = 0; j < cs3.cube_count(); ++j) {
    for (std::size_t i : cs3.members(j)) ++hits[i];
  }
  for (int h : hits) CHECK(h == 1);
}

TEST_CASE("box projections") {
  const Grid g = make_grid(2, 16, 30.0);
  const CubeSystem cs = build_cube_system(g, RandomizationParams::make(0.0, 6));

  const std::size_t i = g.ravel(Index{3, 2});
  Field single = Field::zeros(g, Rep::frequency);
  single.data()[i] = Complex(0.5, -1.0);
  const std::size_t owner = cs.owner(i);
  CHECK(max_diff(box_project(single, owner, cs), single) == 0.0);
  for (std::size_t j = 0; j < cs.cube_count(); j += 7) {
    if (j != owner) CHECK(max_abs(box_project(single, j, cs)) == 0.0);
  }

  for (std::uint64_t s = 0; s < 100; ++s) {
    const Field f = random_field(g, s, 2.0);
    const std::vector<double> e = box_energies(f, cs);
    double total = 0.0;
    for (double v : e) total += v;
    CHECK(std::abs(total - l2sq(f)) / l2sq(f) < 1e-10);
  }

  const Field f = random_field(g, 1000, 2.0).to_frequency();
  Field sum = Field::zeros(g, Rep::frequency);
  for (std::size_t j = 0; j < cs.cube_count(); ++j) sum += box_project(f, j, cs);
  CHECK(max_diff(sum, f) < 1e-14 * max_abs(f));
}

TEST_CASE("Gaussian coefficients") {
  const RandomCoefficients a = sample_coefficients(99, 10000);
  const RandomCoefficients b = sample_coefficients(99, 10000);
  CHECK(a.values == b.values);
  double msq = 0.0;
  Complex mean = 0.0;
  for (const auto& g : a.values) {
    msq += std::norm(g);
    mean += g;
  }
  msq /= 1e4;
  mean /= 1e4;
  CHECK(msq > 1.0 - 3.0 / 100.0 * std::sqrt(2.0));
  CHECK(msq < 1.0 + 3.0 / 100.0 * std::sqrt(2.0));
  CHECK(std::abs(mean) < 0.03 * std::sqrt(2.0));
  for (std::size_t j = 0; j < 100; ++j) CHECK(coefficient(99, j) == a.values[j]);
}

TEST_CASE("randomization identities") {
  const Grid g = make_grid(2, 16, 30.0);
  const CubeSystem cs = build_cube_system(g, RandomizationParams::make(0.0, 6));
  const Field f = random_field(g, 5, 2.0);
  const std::size_t m = cs.cube_count();

  RandomCoefficients ones{0, std::vector<Complex>(m, Complex(1.0, 0.0))};
  CHECK(max_diff(randomize(f, cs, ones), f) < 1e-14 * max_abs(f));
  RandomCoefficients zeros{0, std::vector<Complex>(m, Complex(0.0, 0.0))};
  CHECK(max_abs(randomize(f, cs, zeros)) == 0.0);
  CHECK_THROWS(randomize(f, cs, RandomCoefficients{0, std::vector<Complex>(m - 1)}));

  // E‖f^ω‖² = Σ_j ‖□_j f‖², also with an H^s weight.
  for (double s : {0.0, 1.0}) {
    double expected = 0.0;
    for (std::size_t j = 0; j < m; ++j) expected += std::pow(norm(box_project(f, j, cs), Hs{s}), 2);
    std::vector<double> draws;
    for (std::uint64_t k = 0; k < 200; ++k) {
      draws.push_back(std::pow(norm(randomize(f, cs, sample_coefficients(derive_seed(7, k), m)), Hs{s}), 2));
    }
    double mean = 0.0, var = 0.0;
    for (double v : draws) mean += v;
    mean /= draws.size();
    for (double v : draws) var += (v - mean) * (v - mean);
    const double se = std::sqrt(var / (draws.size() - 1) / draws.size());
    CHECK(std::abs(mean - expected) < 3.0 * se);
  }
}

TEST_CASE("high-low split") {
  const Grid g = make_grid(2, 32, 2.0 * M_PI);
  const double N0 = 8.0;

  const Field low = band_limited(g, 3, N0 / 2.0);
  const HighLowSplit a = split_high_low(low, N0);
  CHECK(max_abs(a.high) < 1e-14 * max_abs(low));
  CHECK(max_diff(a.low, low) < 1e-14 * max_abs(low));

  Field high = Field::zeros(g, Rep::frequency);
  high.data()[g.ravel(Index{0, 16})] = 1.0;  // |ξ| = 16 = 4·N₀ for N₀ = 4
  const HighLowSplit b = split_high_low(high, 4.0);
  CHECK(max_abs(b.low) == 0.0);
  CHECK(max_diff(b.high, high) == 0.0);

  const Field f = random_field(g, 4, 10.0);
  const HighLowSplit c = split_high_low(f, N0);
  CHECK(max_diff(c.high + c.low, f) < 1e-14 * max_abs(f));
  CHECK_THROWS_AS(split_high_low(f, 6.0), ParameterError);
}
