#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "doctest.h"

#include "hartree/ensemble.hpp"
#include "hartree/error.hpp"

using namespace hartree;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json small_config() {
  return {{"kind", "ensemble"}, {"d", 2},         {"n", 16},         {"L", 20.0},
          {"dt", 0.01},         {"T", 0.1},       {"record_every", 2}, {"gamma", 1.0},
          {"s", 0.0},           {"a", 6},         {"N0", 2.0},       {"K", 4},
          {"master_seed", 11},  {"profile_width", 2.0}};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string error_of(const json& j) {
  try {
    ExperimentConfig::from_json(j).validate();
  } catch (const ParameterError& e) {
    return e.what();
  }
  return {};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hartree_ensemble_" + name);
  fs::remove_all(p);
  return p;
}

OmegaStats stats(double scale) {
  OmegaStats o;
  o.hs_u0 = 1.0;
  o.hs_u0w = scale;
  o.y_v = scale;
  o.w0_term = scale;
  o.l2_u0w = scale;
  o.l10_u0w = scale;
  return o;
}

}  // namespace

TEST_CASE("config parsing names the offending field") {
  CHECK(error_of(small_config()).empty());

  json j = small_config();
  j["colour"] = 1;
  CHECK(error_of(j).find("colour") != std::string::npos);

  j = small_config();
  j["dt"] = "fast";
  CHECK(error_of(j).find("dt") != std::string::npos);

  for (auto [key, value] : std::vector<std::pair<std::string, json>>{{"gamma", 2.5},
                                                                    {"mu", -1},
                                                                    {"N0", 3.0},
                                                                    {"K", 0},
                                                                    {"a", 4},
                                                                    {"kernel_mode", "fancy"},
                                                                    {"kind", "nope"}}) {
    j = small_config();
    j[key] = value;
    CAPTURE(key);
    CHECK(error_of(j).find(key) != std::string::npos);
  }

  j = small_config();
  j["kind"] = "morawetz-audit";
  CHECK(error_of(j).find("d") != std::string::npos);

  const ExperimentConfig c = ExperimentConfig::from_json(small_config());
  const ExperimentConfig back = ExperimentConfig::from_json(c.to_json());
  CHECK(dump_json(back.to_json()) == dump_json(c.to_json()));
}

TEST_CASE("runs are deterministic across reruns and worker counts") {
  const ExperimentConfig cfg = ExperimentConfig::from_json(small_config());
  const fs::path a = scratch("a"), b = scratch("b");
  setenv("HARTREE_WORKERS", "1", 1);
  const RunSet ra = run_experiment(cfg, a);
  setenv("HARTREE_WORKERS", "3", 1);
  run_experiment(cfg, b);
  unsetenv("HARTREE_WORKERS");
  CHECK(slurp(a / "summary.json") == slurp(b / "summary.json"));
  CHECK(slurp(a / "diagnostics" / "sample_0002.csv") == slurp(b / "diagnostics" / "sample_0002.csv"));

  REQUIRE(ra.records.size() == 4u);
  for (const auto& r : ra.records) {
    CHECK(r.scalars.at("mass_drift_rel") < 1e-12);
    CHECK(r.omega.has_value());
  }
  CHECK(ra.records[0].seed != ra.records[1].seed);

  const json rep = build_report(a);
  CHECK(rep.at("records") == 4);
  CHECK(rep.at("omega_fraction").size() == 4u);
  const std::string csv = slurp(a / "report.csv");
  CHECK(csv.rfind("index,seed,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  CHECK(build_report(scratch("empty")).at("records") == 0);

  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("without a high-frequency part w is the whole solution") {
  json j = small_config();
  j["kind"] = "single";
  j["K"] = 1;
  j["N0"] = 8.0;  // P_{≥8} vanishes on this lattice
  const fs::path dir = scratch("single");
  const RunSet rs = run_experiment(ExperimentConfig::from_json(j), dir);
  REQUIRE(rs.records.size() == 1u);
  const auto& sc = rs.records[0].scalars;
  CHECK(sc.at("y_norm_v") == 0.0);
  CHECK(sc.at("max_Mw_drift") < 1e-12);
  CHECK(sc.at("max_Ew_drift") < 1e-4);
  fs::remove_all(dir);
}

TEST_CASE("omega event counts") {
  std::vector<RunRecord> recs(3);
  recs[0].omega = stats(0.1);
  recs[1].omega = stats(1.0);
  recs[2].omega = stats(10.0);
  const std::vector<double> f = omega_event_count(recs, {0.0, 1.0, 5.0, 100.0});
  CHECK(f[0] == 0.0);
  CHECK(f[1] == doctest::Approx(1.0 / 3.0));
  CHECK(f[2] == doctest::Approx(2.0 / 3.0));
  CHECK(f[3] == 1.0);

  std::mt19937_64 rng(3);
  std::lognormal_distribution<double> ln;
  std::vector<RunRecord> many(50);
  for (auto& r : many) r.omega = stats(ln(rng));
  std::vector<double> levels;
  for (int k = 0; k < 20; ++k) levels.push_back(0.25 * k);
  const auto frac = omega_event_count(many, levels);
  for (std::size_t k = 1; k < frac.size(); ++k) CHECK(frac[k] >= frac[k - 1]);

  recs.push_back(RunRecord{});
  CHECK_THROWS_AS(omega_event_count(recs, {1.0}), ParameterError);

  const RunRecord back = RunRecord::from_json(recs[1].to_json());
  REQUIRE(back.omega.has_value());
  CHECK(back.omega->y_v == 1.0);
}

TEST_CASE("tail statistics") {
  CHECK_THROWS_AS(tail_statistics(std::vector<double>(99, 1.0), {}), ParameterError);

  const TailReport flat = tail_statistics(std::vector<double>(200, 1.0), {0.5, 2.0});
  CHECK(flat.survival[0] == 1.0);
  CHECK(flat.survival[1] == 0.0);
  CHECK(flat.fitted_points == 0u);

  // |g| with E|g|²=1 is Rayleigh: P(|g| > λ) = e^{-λ²}.
  const TailReport r = tail_statistics(rayleigh_samples(5, 500), {});
  CHECK(r.lambdas.size() == 16u);
  CHECK(r.slope < 0.0);
  CHECK(r.slope == doctest::Approx(-1.0).epsilon(0.1));
  CHECK(r.r2 > 0.9);
  CHECK(rayleigh_samples(5, 10) == rayleigh_samples(5, 10));
}
