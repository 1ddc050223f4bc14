#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "hartree/field.hpp"
#include "hartree/kernels.hpp"

namespace hartree {

enum class KernelMode { sampled, continuum };

/// Frequency response of V(x) = |x|^{-γ} on a grid.
///
/// Sampled mode transforms the minimal-image samples of |x|^{-γ} (origin
/// replaced by the half-cell average). Continuum mode uses the exact symbol
/// c_{d,γ}|ξ|^{γ-d}, c_{d,γ} = π^{d/2} 2^{d-γ} Γ((d-γ)/2)/Γ(γ/2), with the
/// zero mode taken from the sampled kernel.
struct HartreeKernel {
  double gamma = 4.0;
  KernelMode mode = KernelMode::sampled;
  ConvolutionKernel convolution;
};

HartreeKernel make_hartree_kernel(const Grid& grid, double gamma = 4.0,
                                  KernelMode mode = KernelMode::sampled);

/// c_{d,γ} of ∫|x|^{-γ} e^{-ix·ξ} dx = c_{d,γ}|ξ|^{γ-d}.
double riesz_symbol_constant(int d, double gamma);

/// V ∗ |u|² on the grid (real values).
std::vector<double> potential_values(const Field& u, const HartreeKernel& k);
/// V ∗ |u|² as a physical-representation field with zero imaginary part.
Field hartree_potential(const Field& u, const HartreeKernel& k);
/// F(u) = (V ∗ |u|²) u in physical representation.
Field hartree_nonlinearity(const Field& u, const HartreeKernel& k);

struct SolverConfig {
  double dt = 1e-3;
  double T = 0.0;
  std::size_t record_every = 1;
  std::shared_ptr<const HartreeKernel> kernel;
  int mu = 1;  // defocusing only

  /// Throws ParameterError unless dt > 0, T ≥ 0, record_every ≥ 1, μ = +1
  /// and a kernel is set.
  void validate() const;
  std::size_t step_count() const;
};

/// One Strang step: half free flow, exact nonlinear phase rotation
/// u ← u·exp(-i dt V∗|u|²), half free flow. Negative dt steps backwards.
Field strang_step(const Field& u, double dt, const HartreeKernel& k);

struct Trajectory {
  std::vector<double> times;
  std::vector<Field> snapshots;  // one per entry of `times`
};

/// Called at every step (including step 0) with the current solution.
using StepObserver = std::function<void(std::size_t step, double t, const Field& u)>;

/// Repeated Strang steps from u₀ up to cfg.T. Snapshots are stored every
/// `record_every` steps and at the final time. Throws BlowUpError when the
/// field becomes non-finite or its sup norm exceeds 1e6× the initial one.
Trajectory evolve(const Field& u0, const SolverConfig& cfg, const StepObserver& observer = {});

/// u = v + w with v = e^{itΔ}v₀ the free evolution of the high-frequency
/// part and w the remainder.
struct PerturbedState {
  Field v;
  Field w;
  double N0 = 1.0;
  double t = 0.0;

  Field u() const { return v + w; }
};

struct PerturbedTrajectory {
  double N0 = 1.0;
  Field v0;
  std::vector<PerturbedState> states;
  /// e = F(u) - F(w) at each state's time.
  std::vector<Field> errors;
  std::vector<double> times() const;
};

/// e = F(v + w) - F(w).
Field perturbation_error(const PerturbedState& st, const HartreeKernel& k);

/// Observer variant receiving the perturbed state at every step.
using PerturbedObserver = std::function<void(std::size_t step, const PerturbedState& st)>;

/// Splits u₀ at N₀, evolves the full flow and records (v, w, e) at every
/// snapshot time.
PerturbedTrajectory evolve_perturbed(const Field& u0, double N0, const SolverConfig& cfg,
                                     const PerturbedObserver& observer = {});

struct StabilitySample {
  double t;
  double deviation;  // ‖w(t) - w̃(t)‖_{H¹}
};

/// Evolves w (forced by v = e^{itΔ}v₀) and w̃ (unforced) side by side and
/// reports their H¹ distance at every snapshot time.
std::vector<StabilitySample> stability_probe(const Field& w0, const Field& w0_tilde,
                                             const Field& v0, const SolverConfig& cfg);

}  // namespace hartree
