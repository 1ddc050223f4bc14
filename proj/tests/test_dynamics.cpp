#include <cmath>
#include <memory>

#include "doctest.h"
#include "helpers.hpp"
#include "oracles.hpp"

#include "hartree/dynamics.hpp"
#include "hartree/error.hpp"
#include "hartree/randomization.hpp"
#include "hartree/spectral.hpp"

using namespace hartree;
using namespace testing;

namespace {

SolverConfig solver(const Grid& g, double gamma, double dt, double T, std::size_t every = 1) {
  SolverConfig c;
  c.dt = dt;
  c.T = T;
  c.record_every = every;
  c.kernel = std::make_shared<HartreeKernel>(make_hartree_kernel(g, gamma));
  return c;
}

double l2(const Field& f) { return norm(f, Lp{2.0}); }

}  // namespace

TEST_CASE("Riesz symbol constant against radial quadrature") {
  // ∫|x|^{-γ}e^{-|x|²/2}dx = (2π)^{-d/2} c ∫|ξ|^{γ-d}e^{-|ξ|²/2}dξ, radial
  // integrals taken after r = u² to tame the endpoint singularity.
  auto radial = [](double p) {
    return oracle::simpson([p](double u) { return 2.0 * std::pow(u, 2.0 * p + 1.0) * std::exp(-0.5 * std::pow(u, 4)); },
                           0.0, 4.0, 40000);
  };
  for (auto [d, gamma] : {std::pair{5, 4.0}, {3, 2.0}, {1, 0.5}, {5, 2.5}, {4, 1.0}}) {
    const double c = std::pow(2.0 * M_PI, 0.5 * d) * radial(d - 1 - gamma) / radial(gamma - 1);
    CHECK(riesz_symbol_constant(d, gamma) == doctest::Approx(c).epsilon(1e-8));
  }
  CHECK(riesz_symbol_constant(5, 4.0) == doctest::Approx(2.0 * std::pow(M_PI, 3)).epsilon(1e-14));
  CHECK_THROWS_AS(riesz_symbol_constant(3, 3.0), ParameterError);
}

TEST_CASE("Hartree potential") {
  const int n = 32;
  const double L = 12.0;
  const Grid g = make_grid(1, n, L);
  const auto k = make_hartree_kernel(g, 0.5);

  for (double v : potential_values(Field::zeros(g), k)) CHECK(v == 0.0);

  const Field u = gaussian(g, 1.3);
  std::vector<double> rho(n);
  for (int i = 0; i < n; ++i) rho[i] = std::norm(u.data()[i]);
  const std::vector<double> want = oracle::direct_potential_1d(rho, g.spacing(), 0.5);
  const std::vector<double> got = potential_values(u, k);
  for (int i = 0; i < n; ++i) CHECK(std::abs(got[i] - want[i]) < 1e-8 * std::abs(want[i]));

  // Lattice shifts commute with the convolution.
  const Grid g2 = make_grid(2, 16, 8.0);
  const auto k2 = make_hartree_kernel(g2, 1.0);
  const Field f = random_field(g2, 3, 2.0);
  Field shifted = Field::zeros(g2);
  for (std::size_t i = 0; i < g2.size(); ++i) {
    Index idx = g2.unravel(i);
    idx[0] = (idx[0] + 3) % 16;
    idx[1] = (idx[1] + 5) % 16;
    shifted.data()[g2.ravel(idx)] = f.data()[i];
  }
  const auto p = potential_values(f, k2);
  const auto ps = potential_values(shifted, k2);
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < g2.size(); ++i) {
    Index idx = g2.unravel(i);
    idx[0] = (idx[0] + 3) % 16;
    idx[1] = (idx[1] + 5) % 16;
    worst = std::max(worst, std::abs(ps[g2.ravel(idx)] - p[i]));
    scale = std::max(scale, std::abs(p[i]));
  }
  CHECK(worst < 1e-12 * scale);
}

TEST_CASE("continuum kernel symbol") {
  const Grid g = make_grid(3, 16, 10.0);
  const auto k = make_hartree_kernel(g, 2.0, KernelMode::continuum);
  const auto ksq = g.frequency_squared();
  const double c = riesz_symbol_constant(3, 2.0);
  const auto m = k.convolution.multiplier();
  for (std::size_t i = 1; i < g.size(); i += 97) {
    CHECK(m[i].real() == doctest::Approx(c / std::sqrt(ksq[i])).epsilon(1e-13));
  }
}

TEST_CASE("Strang step basics") {
  const Grid g = make_grid(2, 32, 10.0);
  const auto k = make_hartree_kernel(g, 1.0);
  CHECK(max_abs(strang_step(Field::zeros(g), 0.01, k)) == 0.0);

  const Field u = random_field(g, 1, 3.0);
  const Field v = strang_step(u, 0.01, k);
  CHECK(std::abs(l2(v) - l2(u)) / l2(u) < 1e-13);
  const Field back = strang_step(v, -0.01, k);
  CHECK(max_diff(back, u) < 1e-11 * max_abs(u));
}

TEST_CASE("second-order self-convergence") {
  const Grid g = make_grid(2, 32, 10.0);
  const Field u0 = gaussian(g, 1.2) * Complex(2.0, 0.0);
  auto final_state = [&](double dt) { return evolve(u0, solver(g, 1.0, dt, 0.4, 1000)).snapshots.back(); };
  const Field a = final_state(0.02), b = final_state(0.01), c = final_state(0.005);
  const double ratio = norm(a - b, Lp{2.0}) / norm(b - c, Lp{2.0});
  CHECK(ratio > 3.4);
  CHECK(ratio < 4.6);
}

TEST_CASE("evolve contract") {
  const Grid g = make_grid(2, 16, 8.0);
  const Field u0 = random_field(g, 2, 2.0);

  const Trajectory zero = evolve(u0, solver(g, 1.0, 0.01, 0.0));
  CHECK(zero.times.size() == 1u);
  CHECK(max_diff(zero.snapshots[0], u0) == 0.0);

  const Trajectory tr = evolve(u0, solver(g, 1.0, 0.01, 0.105, 5));
  CHECK(tr.times.size() == 4u);
  CHECK(tr.times.back() == 0.105);
  CHECK(tr.times[1] == doctest::Approx(0.05));

  const double theta = 0.8;
  const Field rot = evolve(u0 * std::polar(1.0, theta), solver(g, 1.0, 0.01, 0.1)).snapshots.back();
  const Field plain = evolve(u0, solver(g, 1.0, 0.01, 0.1)).snapshots.back();
  CHECK(max_diff(rot, plain * std::polar(1.0, theta)) < 1e-12 * max_abs(plain));

  Field bad = u0;
  bad.data()[5] = Complex(std::nan(""), 0.0);
  CHECK_THROWS_AS(evolve(bad, solver(g, 1.0, 0.01, 0.05)), BlowUpError);

  SolverConfig c = solver(g, 1.0, 0.01, 0.1);
  c.mu = -1;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = solver(g, 1.0, 0.0, 0.1);
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c.dt = 0.1;
  c.kernel.reset();
  CHECK_THROWS_AS(c.validate(), ParameterError);
}

TEST_CASE("mass conservation over many steps") {
  const Grid g = make_grid(3, 16, 10.0);
  const Field u0 = gaussian(g, 1.5) * Complex(1.5, 0.0);
  const Trajectory tr = evolve(u0, solver(g, 4.0 - 1.5, 1e-3, 0.3, 300));
  CHECK(std::abs(l2(tr.snapshots.back()) - l2(u0)) / l2(u0) < 1e-10);
}

TEST_CASE("perturbed evolution") {
  const Grid g = make_grid(2, 64, 12.0);
  const double N0 = 4.0;

  SUBCASE("low-frequency data leaves v and e at zero") {
    const Field u0 = band_limited(g, 8, 1.0);
    const PerturbedTrajectory pt = evolve_perturbed(u0, N0, solver(g, 1.0, 0.01, 0.05, 1));
    const Trajectory direct = evolve(u0, solver(g, 1.0, 0.01, 0.05, 1));
    for (std::size_t i = 0; i < pt.states.size(); ++i) {
      CHECK(max_abs(pt.states[i].v) < 1e-13);
      CHECK(max_abs(pt.errors[i]) < 1e-13);
      CHECK(max_diff(pt.states[i].w, direct.snapshots[i]) < 1e-12);
    }
  }

  SUBCASE("pure high-frequency data") {
    const Field u0 = lp_project(random_field(g, 9, 10.0), Band::above, N0, CutoffProfile::sharp);
    const auto cfg = solver(g, 1.0, 0.01, 0.0);
    const PerturbedTrajectory pt = evolve_perturbed(u0, N0, cfg);
    REQUIRE(pt.states.size() == 1u);
    CHECK(max_abs(pt.states[0].w) < 1e-14 * max_abs(u0));
    CHECK(max_diff(pt.errors[0], hartree_nonlinearity(pt.states[0].v, *cfg.kernel)) <
          1e-12 * max_abs(pt.errors[0]));
  }

  SUBCASE("two-path consistency and linearity of v") {
    const Field u0 = random_field(g, 10, 6.0);
    const auto cfg = solver(g, 1.0, 0.01, 0.5, 10);
    const PerturbedTrajectory pt = evolve_perturbed(u0, N0, cfg);
    const Trajectory direct = evolve(u0, cfg);
    REQUIRE(pt.states.size() == direct.snapshots.size());
    const Field v0 = pt.states[0].v;
    for (std::size_t i = 0; i < pt.states.size(); ++i) {
      CHECK(l2(pt.states[i].u() - direct.snapshots[i]) < 1e-8);
      CHECK(max_diff(free_propagate(pt.states[i].v, -pt.states[i].t), v0) < 1e-10 * max_abs(v0));
    }
  }
}

TEST_CASE("stability probe") {
  const Grid g = make_grid(2, 32, 10.0);
  const auto cfg = solver(g, 1.0, 0.01, 0.2, 5);
  const Field w0 = gaussian(g, 1.5);
  const Field zero = Field::zeros(g);

  for (const auto& s : stability_probe(w0, w0, zero, cfg)) CHECK(s.deviation < 1e-12);

  const double eps = 1e-3;
  const Field bump = band_limited(g, 4, 2.0) * Complex(eps / norm(band_limited(g, 4, 2.0), Hs{1.0}), 0.0);
  const auto dev = stability_probe(w0 + bump, w0, zero, cfg);
  CHECK(dev.front().deviation == doctest::Approx(eps).epsilon(1e-12));

  const Field high = split_high_low(random_field(g, 6, 12.0), 8.0).high;
  const Field unit_high = high * Complex(1.0 / l2(high), 0.0);
  std::vector<double> last;
  for (double m : {1.0, 2.0, 4.0}) {
    last.push_back(stability_probe(w0, w0, unit_high * Complex(0.05 * m, 0.0), cfg).back().deviation);
  }
  CHECK(last[1] >= 0.9 * last[0]);
  CHECK(last[2] >= 0.9 * last[1]);
}
