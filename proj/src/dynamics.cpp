#include "hartree/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hartree/error.hpp"
#include "hartree/fft.hpp"
#include "hartree/randomization.hpp"
#include "hartree/spectral.hpp"

namespace hartree {

double riesz_symbol_constant(int d, double gamma) {
  if (!(gamma > 0.0 && gamma < d)) throw ParameterError("Riesz symbol needs 0 < gamma < d");
  return std::pow(std::numbers::pi, 0.5 * d) * std::pow(2.0, d - gamma) *
         std::tgamma(0.5 * (d - gamma)) / std::tgamma(0.5 * gamma);
}

HartreeKernel make_hartree_kernel(const Grid& grid, double gamma, KernelMode mode) {
  if (!(gamma > 0.0 && gamma < grid.dim())) {
    throw ParameterError("Hartree exponent must satisfy 0 < gamma < d");
  }
  HartreeKernel k;
  k.gamma = gamma;
  k.mode = mode;
  const std::vector<double> samples = power_kernel_samples(grid, gamma);
  ConvolutionKernel sampled = ConvolutionKernel::from_samples(grid, samples);
  if (mode == KernelMode::sampled) {
    // The sampled kernel is real and even, so its multiplier is real up to
    // rounding; drop the residue to keep the potential exactly real.
    std::vector<Complex> mult(sampled.multiplier().begin(), sampled.multiplier().end());
    for (auto& z : mult) z = Complex(z.real(), 0.0);
    k.convolution = ConvolutionKernel::from_multiplier(grid, std::move(mult));
    return k;
  }
  const double c = riesz_symbol_constant(grid.dim(), gamma);
  const auto ksq = grid.frequency_squared();
  std::vector<Complex> mult(grid.size());
  mult[0] = Complex(sampled.multiplier()[0].real(), 0.0);
  for (std::size_t i = 1; i < mult.size(); ++i) {
    mult[i] = c * std::pow(ksq[i], 0.5 * (gamma - grid.dim()));
  }
  k.convolution = ConvolutionKernel::from_multiplier(grid, std::move(mult));
  return k;
}

std::vector<double> potential_values(const Field& u, const HartreeKernel& k) {
  require_same_grid(u.grid(), k.convolution.grid());
  const Field phys = u.to_physical();
  std::vector<Complex> density(phys.size());
  double peak = 0.0;
  for (std::size_t i = 0; i < density.size(); ++i) {
    density[i] = std::norm(phys.data()[i]);
    peak = std::max(peak, density[i].real());
  }
  const std::vector<Complex> conv = k.convolution.apply(std::span<const Complex>(density));
  std::vector<double> out(conv.size());
  double max_re = 0.0, max_im = 0.0;
  for (std::size_t i = 0; i < conv.size(); ++i) {
    out[i] = conv[i].real();
    max_re = std::max(max_re, std::abs(conv[i].real()));
    max_im = std::max(max_im, std::abs(conv[i].imag()));
  }
  if (max_im > 1e-12 * max_re + 1e-300 && peak > 0.0) {
    throw std::logic_error("Hartree potential has a non-negligible imaginary part");
  }
  return out;
}

Field hartree_potential(const Field& u, const HartreeKernel& k) {
  const std::vector<double> p = potential_values(u, k);
  std::vector<Complex> data(p.begin(), p.end());
  return Field(u.grid(), Rep::physical, std::move(data));
}

Field hartree_nonlinearity(const Field& u, const HartreeKernel& k) {
  const std::vector<double> p = potential_values(u, k);
  Field out = u.to_physical();
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= p[i];
  return out;
}

void SolverConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ParameterError("dt must be positive");
  if (!(T >= 0.0) || !std::isfinite(T)) throw ParameterError("T must be non-negative");
  if (record_every < 1) throw ParameterError("record_every must be at least 1");
  if (mu != 1) throw ParameterError("only the defocusing sign mu = +1 is supported");
  if (!kernel) throw ParameterError("solver config has no Hartree kernel");
}

std::size_t SolverConfig::step_count() const {
  return static_cast<std::size_t>(std::llround(std::ceil(T / dt - 1e-9)));
}

namespace {

void kinetic_phase(const Grid& g, std::span<Complex> data, double tau) {
  fft::forward(g.dim(), g.points_per_axis(), data);
  const auto ksq = g.frequency_squared();
  const double inv = 1.0 / static_cast<double>(g.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double phase = -ksq[i] * tau;
    data[i] *= Complex(std::cos(phase), std::sin(phase)) * inv;
  }
  fft::backward(g.dim(), g.points_per_axis(), data);
}

double sup_norm(const Field& u) {
  double m = 0.0;
  for (const auto& z : u.data()) {
    const double a = std::abs(z);
    if (!std::isfinite(a)) return a;
    m = std::max(m, a);
  }
  return m;
}

// Step sizes: all equal to dt except possibly a shorter final one.
double step_size(const SolverConfig& cfg, std::size_t step, std::size_t steps) {
  if (step + 1 < steps) return cfg.dt;
  return cfg.T - cfg.dt * static_cast<double>(steps - 1);
}

class BlowUpGuard {
 public:
  explicit BlowUpGuard(const Field& u0) : initial_(sup_norm(u0)) {}
  void check(const Field& u, double t) const {
    const double m = sup_norm(u);
    if (!std::isfinite(m)) throw BlowUpError("non-finite field values at t=" + std::to_string(t), t);
    if (initial_ > 0.0 && m > 1e6 * initial_) {
      throw BlowUpError("sup norm exceeded 1e6 x its initial value at t=" + std::to_string(t), t);
    }
  }

 private:
  double initial_;
};

}  // namespace

Field strang_step(const Field& u, double dt, const HartreeKernel& k) {
  require_same_grid(u.grid(), k.convolution.grid());
  Field out = u.to_physical();
  const Grid& g = out.grid();
  kinetic_phase(g, out.data(), 0.5 * dt);
  const std::vector<double> p = potential_values(out, k);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double phase = -dt * p[i];
    out.data()[i] *= Complex(std::cos(phase), std::sin(phase));
  }
  kinetic_phase(g, out.data(), 0.5 * dt);
  for (const auto& z : out.data()) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw BlowUpError("non-finite field values after a Strang step", 0.0);
    }
  }
  return out;
}

Trajectory evolve(const Field& u0, const SolverConfig& cfg, const StepObserver& observer) {
  cfg.validate();
  const std::size_t steps = cfg.step_count();
  Trajectory traj;
  Field u = u0.to_physical();
  const BlowUpGuard guard(u);
  double t = 0.0;
  traj.times.push_back(t);
  traj.snapshots.push_back(u);
  if (observer) observer(0, t, u);
  for (std::size_t s = 0; s < steps; ++s) {
    const double h = step_size(cfg, s, steps);
    try {
      u = strang_step(u, h, *cfg.kernel);
    } catch (const BlowUpError&) {
      throw BlowUpError("non-finite field values at t=" + std::to_string(t + h), t + h);
    }
    t = (s + 1 == steps) ? cfg.T : cfg.dt * static_cast<double>(s + 1);
    guard.check(u, t);
    if ((s + 1) % cfg.record_every == 0 || s + 1 == steps) {
      traj.times.push_back(t);
      traj.snapshots.push_back(u);
    }
    if (observer) observer(s + 1, t, u);
  }
  return traj;
}

std::vector<double> PerturbedTrajectory::times() const {
  std::vector<double> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(s.t);
  return out;
}

Field perturbation_error(const PerturbedState& st, const HartreeKernel& k) {
  return hartree_nonlinearity(st.u(), k) - hartree_nonlinearity(st.w, k);
}

PerturbedTrajectory evolve_perturbed(const Field& u0, double N0, const SolverConfig& cfg,
                                     const PerturbedObserver& observer) {
  cfg.validate();
  const HighLowSplit split = split_high_low(u0.to_physical(), N0);
  PerturbedTrajectory out;
  out.N0 = N0;
  out.v0 = split.high;
  const Field v0_freq = split.high.to_frequency();
  const Field start = u0.to_physical();

  auto make_state = [&](double t, const Field& u) {
    PerturbedState st{free_propagate(v0_freq, t).to_physical(), Field::zeros(u.grid()), N0, t};
    st.w = u - st.v;
    return st;
  };

  SolverConfig inner = cfg;
  inner.record_every = cfg.step_count() + 1;
  evolve(start, inner, [&](std::size_t step, double t, const Field& u) {
    const bool snapshot = step % cfg.record_every == 0 || step == cfg.step_count();
    if (!snapshot && !observer) return;
    PerturbedState st = make_state(t, u);
    if (observer) observer(step, st);
    if (snapshot) {
      out.errors.push_back(perturbation_error(st, *cfg.kernel));
      out.states.push_back(std::move(st));
    }
  });
  return out;
}

std::vector<StabilitySample> stability_probe(const Field& w0, const Field& w0_tilde,
                                             const Field& v0, const SolverConfig& cfg) {
  cfg.validate();
  require_same_grid(w0.grid(), w0_tilde.grid());
  require_same_grid(w0.grid(), v0.grid());
  const std::size_t steps = cfg.step_count();
  const Field v0_freq = v0.to_frequency();
  Field u = (w0 + v0).to_physical();
  Field w_tilde = w0_tilde.to_physical();
  const BlowUpGuard guard_u(u), guard_tilde(w_tilde);

  std::vector<StabilitySample> out;
  auto record = [&](double t) {
    const Field w = u - free_propagate(v0_freq, t).to_physical();
    out.push_back({t, norm(w - w_tilde, Hs{1.0})});
  };
  record(0.0);
  for (std::size_t s = 0; s < steps; ++s) {
    const double h = step_size(cfg, s, steps);
    u = strang_step(u, h, *cfg.kernel);
    w_tilde = strang_step(w_tilde, h, *cfg.kernel);
    const double t = (s + 1 == steps) ? cfg.T : cfg.dt * static_cast<double>(s + 1);
    guard_u.check(u, t);
    guard_tilde.check(w_tilde, t);
    if ((s + 1) % cfg.record_every == 0 || s + 1 == steps) record(t);
  }
  return out;
}

}  // namespace hartree
