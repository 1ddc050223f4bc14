#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hartree/dynamics.hpp"
#include "hartree/field.hpp"
#include "hartree/randomization.hpp"

namespace hartree {

enum class ExperimentKind { single, ensemble, nzero_sweep, tail_study, inequality_suite, morawetz_audit };

std::string to_string(ExperimentKind k);
ExperimentKind parse_experiment_kind(const std::string& s);

/// Everything an experiment needs; read from a JSON document whose keys are
/// exactly the member names below (unknown keys are rejected).
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::single;
  int d = 5;
  int n = 16;
  double L = 20.0;
  double dt = 1e-3;
  double T = 0.1;
  std::size_t record_every = 10;
  double gamma = 4.0;
  int mu = 1;
  std::string kernel_mode = "sampled";
  double s = 0.0;
  int a = 6;
  double N0 = 4.0;
  std::vector<double> N0_list{2.0, 4.0, 8.0};
  // Base profile amplitude·exp(-|x|²/(2 width²))·exp(i phase x₁), rescaled to
  // ‖u₀‖_{H^s} = hs_norm when hs_norm > 0.
  double profile_width = 1.5;
  double profile_amplitude = 1.0;
  double profile_phase = 0.0;
  double hs_norm = 0.0;
  bool randomize = true;
  std::uint64_t master_seed = 0;
  std::size_t K = 1;
  double A = 1.0;
  std::vector<double> lambda_grid;
  std::vector<double> M_levels{1.0, 2.0, 4.0, 8.0};
  std::vector<std::string> checks;
  std::string field_class = "band_limited";
  double band = 2.0;
  std::size_t audit_stride = 20;
  std::string morawetz_kernels = "spectral";
  bool morawetz_terms = false;
  bool write_snapshots = false;

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
  /// Re-validates every solver and randomization precondition. Throws
  /// ParameterError naming the offending field.
  void validate() const;

  Grid grid() const;
  SolverConfig solver(std::shared_ptr<const HartreeKernel> kernel) const;
};

/// Inputs of the Ω_M membership test for one sample.
struct OmegaStats {
  double hs_u0w = 0.0;    // ‖u₀^ω‖_{H^s}
  double y_v = 0.0;       // ‖v‖_Y over the simulated window
  double w0_term = 0.0;   // N₀^s‖w₀‖_{L²} + N₀^{s-1}‖w₀‖_{Ḣ¹}
  double l2_u0w = 0.0;    // ‖u₀^ω‖_{L²}
  double l10_u0w = 0.0;   // ‖u₀^ω‖_{L¹⁰}
  double hs_u0 = 0.0;     // ‖u₀‖_{H^s} of the deterministic profile

  bool inside(double M) const;
};

struct RunRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::string diagnostics_path;
  std::vector<std::string> snapshot_paths;
  std::map<std::string, double> scalars;
  std::optional<OmegaStats> omega;

  nlohmann::json to_json() const;
  static RunRecord from_json(const nlohmann::json& j);
};

struct RunSet {
  std::vector<RunRecord> records;
  nlohmann::json summary;
};

/// Worker count from HARTREE_WORKERS (default 1).
std::size_t worker_count();

/// Runs the experiment and writes records, diagnostics and summary.json
/// under `out_dir`. Every file is written atomically. Scalar outputs depend
/// only on the config.
RunSet run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// The profile u₀ before randomization.
Field base_profile(const ExperimentConfig& cfg, const Grid& grid);

/// Stable JSON serialization used for every summary file.
std::string dump_json(const nlohmann::json& j);

struct TailReport {
  std::vector<double> lambdas;
  std::vector<double> survival;  // empirical P(X > λ)
  std::size_t fitted_points = 0;
  double slope = 0.0;            // of log P against λ²
  double intercept = 0.0;
  double r2 = 0.0;

  nlohmann::json to_json() const;
};

/// Weighted least-squares fit of log P̂(X > λ) against λ² with weights
/// nP̂/(1-P̂); λ with P̂ ∈ {0, 1} are reported but excluded from the fit.
/// An empty grid uses 16 points between the 5% and 99% sample quantiles.
TailReport tail_statistics(const std::vector<double>& samples, std::vector<double> lambda_grid);

/// Fraction of records inside Ω_M for every level. Throws ParameterError
/// when a record lacks the Ω_M statistics.
std::vector<double> omega_event_count(const std::vector<RunRecord>& records,
                                      const std::vector<double>& M_levels);

/// |g_j| for j < count from the stream `seed`: the Rayleigh calibration source.
std::vector<double> rayleigh_samples(std::uint64_t seed, std::size_t count);

/// Aggregates records/*.json under `run_dir` into report.csv and report.json.
nlohmann::json build_report(const std::filesystem::path& run_dir);

}  // namespace hartree
