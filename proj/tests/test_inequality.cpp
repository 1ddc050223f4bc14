#include <cmath>
#include <string>

#include "doctest.h"
#include "helpers.hpp"

#include "hartree/error.hpp"
#include "hartree/inequality_lab.hpp"
#include "hartree/spectral.hpp"

using namespace hartree;
using namespace testing;

namespace {

EnsembleSpec small(int d, int n, std::size_t count, FieldClass c = FieldClass::band_limited) {
  EnsembleSpec s;
  s.d = d;
  s.n = n;
  s.L = 2.0 * M_PI;
  s.count = count;
  s.field_class = c;
  s.seed = 17;
  return s;
}

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ParameterError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("ensembles") {
  CHECK(make_ensemble(small(2, 16, 0)).empty());

  const auto a = make_ensemble(small(2, 16, 5));
  const auto b = make_ensemble(small(2, 16, 5));
  REQUIRE(a.size() == 5u);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(max_diff(a[i], b[i]) == 0.0);

  const EnsembleSpec spec = small(2, 16, 10);
  for (const Field& f : make_ensemble(spec)) {
    CHECK(norm(f, Lp{2.0}) == doctest::Approx(1.0).epsilon(1e-12));
    const Field fh = f.to_frequency();
    const auto ksq = f.grid().frequency_squared();
    double outside = 0.0, inside = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      double& slot = ksq[i] > spec.band * spec.band ? outside : inside;
      slot = std::max(slot, std::abs(fh.data()[i]));
    }
    CHECK(outside < 1e-14 * inside);
  }

  // Refining n at fixed L reproduces the band-limited functions.
  const auto coarse = make_ensemble(small(2, 16, 3));
  const auto fine = make_ensemble(small(2, 32, 3));
  for (std::size_t i = 0; i < 3; ++i) {
    const Field up = scale_field(coarse[i], 1.0, fine[i].grid());
    CHECK(max_diff(up, fine[i]) < 1e-12 * max_abs(fine[i]));
  }

  for (auto c : {FieldClass::gaussian_bump, FieldClass::randomized}) {
    for (const Field& f : make_ensemble(small(2, 16, 4, c))) {
      CHECK(norm(f, Lp{2.0}) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  CHECK(parse_field_class("gaussian_bump") == FieldClass::gaussian_bump);
  CHECK_THROWS_AS(parse_field_class("nope"), ParameterError);
}

TEST_CASE("exponent constraints are enforced") {
  CheckParams p;
  p.hardy_s = 1.5;
  const std::string hardy = message_of([&] { run_check("hardy", small(3, 8, 2), p); });
  CHECK(hardy.find("0<s<\\frac{d}{2}") != std::string::npos);

  p = {};
  p.hls_gamma = 3.0;
  CHECK_THROWS_AS(run_check("hls", small(3, 8, 2), p), ParameterError);
  p.hls_gamma = 2.0;
  p.hls_p = 1.0;
  CHECK_THROWS_AS(run_check("hls", small(3, 8, 2), p), ParameterError);

  CHECK_THROWS_AS(run_check("visan", small(3, 8, 2)), ParameterError);
  CHECK_THROWS_AS(run_check("lieb_loss", small(3, 8, 2)), ParameterError);
  CHECK_THROWS_AS(run_check("nonsense", small(3, 8, 2)), ParameterError);
  CHECK_THROWS_AS(run_check("hardy", small(3, 8, 0)), ParameterError);
}

TEST_CASE("orthogonality is exact") {
  const CheckReport r = run_check("orthogonality", small(2, 16, 1));
  REQUIRE(r.ratios.size() == 1u);
  CHECK(std::abs(r.ratios[0] - 1.0) < 1e-10);
  CHECK(r.pass);
}

TEST_CASE("small-scale inequality checks") {
  CheckParams p;
  p.hls_gamma = 2.0;
  for (const char* name : {"bernstein", "gagliardo_nirenberg", "hardy", "hls"}) {
    const CheckReport r = run_check(name, small(3, 8, 20), p);
    CHECK(r.all_finite);
    const bool bernstein = std::string(name) == "bernstein";
    CHECK(r.ratios.size() == (bernstein ? 20u * p.bernstein_s.size() : 20u));
    CHECK(r.pass);
    if (!bernstein) {
      REQUIRE(r.stability.has_value());
      CHECK(r.stability->n_fine == 16);
    }
  }

  const CheckReport box = run_check("box_lq_lp", small(1, 16, 20));
  CHECK(box.pass);
  CHECK(box.max_ratio <= std::pow(2.0 * M_PI, -0.5) * (1.0 + 1e-12));
  CHECK(!box.per_annulus.empty());

  const std::string csv = summary_csv({box});
  CHECK(csv.rfind("check,dimension,ensemble,max_ratio,stability_factor,pass\n", 0) == 0);
  const auto j = box.to_json();
  CHECK(j.at("check") == "box_lq_lp");
  CHECK(j.at("ratios").size() == 20u);
}

TEST_CASE("Lieb-Loss proportionality on a small grid") {
  EnsembleSpec s = small(4, 8, 10, FieldClass::gaussian_bump);
  s.L = 8.0;
  const CheckReport r = run_check("lieb_loss", s);
  CHECK(r.all_finite);
  CHECK(r.relative_spread < 0.05);
}
