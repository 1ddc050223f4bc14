#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hartree/field.hpp"

namespace hartree {

enum class FieldClass { band_limited, gaussian_bump, randomized };

FieldClass parse_field_class(const std::string& name);
std::string to_string(FieldClass c);

struct EnsembleSpec {
  int d = 3;
  int n = 16;
  double L = 2.0 * 3.141592653589793;
  FieldClass field_class = FieldClass::band_limited;
  std::size_t count = 100;
  std::uint64_t seed = 0;
  /// Frequency cutoff |ξ| ≤ band for the band-limited class.
  double band = 2.0;
  /// Randomization parameters for the randomized class.
  double s = 0.0;
  int a = 6;

  Grid grid() const;
  void validate() const;
};

/// Deterministic ensemble of unit-L² fields. Gaussian bumps have width in
/// [L/12, L/6] and centers within L/8 of the box center.
///
/// Band-limited fields draw one Gaussian per integer wave vector, keyed by the
/// wave vector itself, so refining n at fixed L reproduces the same functions.
std::vector<Field> make_ensemble(const EnsembleSpec& spec);

/// Knobs for the individual checks.
struct CheckParams {
  std::vector<double> bernstein_s{-1.0, -0.5, 0.5, 1.0};
  double bernstein_N = 2.0;
  double hardy_s = 1.0;
  double hls_gamma = 4.0;
  double hls_p = 2.0;
  /// Refine n → 2n and report the growth of the empirical maximum.
  bool refine = true;
  double stability_limit = 1.2;
  double lieb_loss_limit = 0.05;
  /// Largest number of cells inspected per field by the box check.
  std::size_t box_cells = 64;
};

struct StabilityRecord {
  int n_coarse = 0;
  int n_fine = 0;
  double max_coarse = 0.0;
  double max_fine = 0.0;
  double growth = 0.0;  // max_fine / max_coarse
};

struct CheckReport {
  std::string name;
  EnsembleSpec spec;
  std::vector<double> ratios;
  double max_ratio = 0.0;
  double mean_ratio = 0.0;
  double relative_spread = 0.0;  // std/mean of the ratios
  bool all_finite = true;
  std::optional<StabilityRecord> stability;
  /// Box check: per-annulus max of the literal lemma ratio (N → value).
  std::vector<std::pair<double, double>> per_annulus;
  std::string rule;
  bool pass = false;

  nlohmann::json to_json() const;
};

/// Names accepted by run_check.
const std::vector<std::string>& check_names();

/// Runs one check over the ensemble. Throws ParameterError when the check's
/// exponent constraints are violated.
CheckReport run_check(const std::string& name, const EnsembleSpec& spec,
                      const CheckParams& params = {});

/// check,dimension,ensemble,max_ratio,stability_factor,pass
std::string summary_csv(const std::vector<CheckReport>& reports);

}  // namespace hartree
