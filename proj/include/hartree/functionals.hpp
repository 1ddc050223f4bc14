#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "hartree/dynamics.hpp"
#include "hartree/field.hpp"
#include "hartree/kernels.hpp"

namespace hartree {

/// ∫|u|².
double mass(const Field& u);

struct EnergyParts {
  double kinetic = 0.0;    // ½‖∇u‖²
  double potential = 0.0;  // ¼⟨V∗|u|², |u|²⟩
  double total = 0.0;
};

EnergyParts energy(const Field& u, const HartreeKernel& k);

/// ¼⟨V∗|u|², |u|²⟩ alone.
double potential_energy(const Field& u, const HartreeKernel& k);

struct PerturbedMassEnergy {
  double M_w = 0.0;
  double E_w = 0.0;  // ½‖∇w‖² + ¼⟨V∗|u|², |u|²⟩ with u = v + w
};

PerturbedMassEnergy perturbed_mass_energy(const PerturbedState& st, const HartreeKernel& k);

/// {f,g}_p = Re(f∇ḡ - g∇f̄), one real array per axis.
std::vector<std::vector<double>> momentum_bracket(const Field& f, const Field& g);

/// Im(w̄ ∂_k w) for every axis k.
std::vector<std::vector<double>> momentum_density(const Field& w);

struct InteractionQuantity {
  double kernel_form = 0.0;     // ⟨|x|^{-3} ∗ |u|², |u|²⟩
  double surrogate_form = 0.0;  // c·‖|∇|^{-(d-3)/2}|u|²‖²
};

/// Proportionality constant between the two forms of the interaction
/// quantity, fitted on the Gaussian e^{-|x|²/2} centered on `grid`.
/// Cached per grid.
double lieb_loss_constant(const Grid& grid);

/// Both forms of ∬|u(x)|²|u(y)|²|x-y|^{-3}. Requires d ≥ 4.
InteractionQuantity interaction_quantity(const Field& u);

/// Convolution kernels derived from the Morawetz weight m(x) = |x|.
///
/// `sampled` tabulates the closed forms x_k/|x|, (δ_jk - x_j x_k/|x|²)/|x|,
/// (d-1)/|x| and (d-1)(d-3)/|x|³ at minimal-image points. `spectral`
/// differentiates the transform of the sampled |x| (iξ_k m̂, -ξ_jξ_k m̂,
/// -|ξ|²m̂, -|ξ|⁴m̂), which makes the discrete integrations by parts exact.
enum class KernelScheme { sampled, spectral };

struct MorawetzKernels {
  Grid grid;
  KernelScheme scheme = KernelScheme::sampled;
  std::vector<std::vector<Complex>> gradient;  // ∇m, one multiplier per axis
  std::vector<std::vector<Complex>> hessian;   // m_jk, packed j ≤ k
  std::vector<Complex> laplacian;              // Δm
  std::vector<Complex> bilaplacian;            // -ΔΔm

  const std::vector<Complex>& hess(int j, int k) const;
};

MorawetzKernels make_morawetz_kernels(const Grid& grid,
                                      KernelScheme scheme = KernelScheme::sampled);

/// M = 2 Σ_k ⟨∂_k m ∗ |w|², Im(w̄ ∂_k w)⟩.
double morawetz_action(const Field& w);
double morawetz_action(const Field& w, const MorawetzKernels& mk);

/// Labels of the seven terms of the derivative of M.
inline constexpr std::array<const char*, 7> kMorawetzTermNames = {
    "C-Ma1", "C-Mb1", "C-Mc1", "C-Md1", "C-Me1", "C-Mf1", "C-Mg1"};

struct MorawetzBreakdown {
  double t = 0.0;
  std::array<double, 7> terms{};
  /// -2 Σ_j ⟨∂_j m ∗ |w|², |w|² ∂_j(V∗|w|²)⟩, the nonlinear contribution
  /// without integrating by parts against the weight.
  double nonlinear_exact = 0.0;
  double dM_dt_fd = 0.0;

  double sum() const;
  /// Σ of the terms with C-Md1 replaced by `nonlinear_exact`.
  double exact_sum() const;
  double scale() const;  // max |term|
};

MorawetzBreakdown morawetz_terms(const PerturbedState& st, const HartreeKernel& k,
                                 const MorawetzKernels& mk);

struct MorawetzAudit {
  std::vector<double> action;             // M(t) at every step
  std::vector<MorawetzBreakdown> breakdowns;  // at every `stride`-th step
};

/// Evolves the perturbed flow, tracks M(w(t)) at every step and evaluates the
/// term breakdown every `stride` steps with a centered difference of M.
MorawetzAudit morawetz_audit(const Field& u0, double N0, const SolverConfig& cfg,
                             const MorawetzKernels& mk, std::size_t stride);

/// One summand (∫ ‖⟨∇⟩^σ f(t)‖^q_{L^r} dt)^{1/q}.
struct NormSummand {
  double q;
  double r;
  double sigma;
};

struct SpaceTimeNormSpec {
  std::string name;
  std::vector<NormSummand> summands;

  /// L²L^{10/3} with ⟨∇⟩, L⁴L⁴, L⁴L⁵ and L³L⁶.
  static SpaceTimeNormSpec x_norm();
  /// L²L⁵ with ⟨∇⟩^{s+a/2}, L⁴L⁵, L⁴L⁴ and L⁶L³.
  static SpaceTimeNormSpec y_norm(double s, int a);
  void validate() const;
};

double spacetime_norm(const std::vector<double>& times, const std::vector<Field>& fields,
                      const SpaceTimeNormSpec& spec);
double spacetime_norm(const Trajectory& traj, const SpaceTimeNormSpec& spec);

/// ‖e^{-it₂Δ}u(t₂) - e^{-it₁Δ}u(t₁)‖_{H¹} for consecutive snapshots.
std::vector<double> scattering_diagnostic(const Trajectory& traj);

struct AlmostConservationRecord {
  std::vector<double> times;
  std::vector<double> M_w;
  std::vector<double> E_w;
  std::vector<double> dMw_dt_fd;
  std::vector<double> dEw_dt_fd;
  std::vector<double> mass_integrand;    // 2|∫ e w̄|
  std::vector<double> energy_integrand;  // |∫ (V∗|u|²) u Δv̄|
  std::vector<double> mass_ratio;        // |dM_w/dt| / integrand
  std::vector<double> energy_ratio;

  double max_mass_drift() const;    // max_t |M_w(t) - M_w(0)|
  double max_energy_drift() const;  // max_t |E_w(t) - E_w(0)|
};

/// Centered differences at interior points, one-sided at the ends.
std::vector<double> finite_difference(const std::vector<double>& t, const std::vector<double>& y);

AlmostConservationRecord almost_conservation_bounds(const PerturbedTrajectory& traj,
                                                    const HartreeKernel& k);

/// One CSV row of per-time diagnostics. Missing values are written empty.
struct DiagnosticsRow {
  double t = 0.0;
  double mass = 0.0;
  double kinetic = 0.0;
  double potential = 0.0;
  double E_w = 0.0;
  double M_w = 0.0;
  double action = 0.0;
  std::array<double, 7> morawetz{};
  bool has_morawetz = false;
  double mass_integrand = 0.0;
  double energy_integrand = 0.0;
  double scattering_increment = 0.0;
  bool has_increment = false;
};

void write_diagnostics_csv(std::ostream& os, const std::vector<DiagnosticsRow>& rows);

}  // namespace hartree
