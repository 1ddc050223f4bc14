#include "hartree/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <tuple>

#include "hartree/error.hpp"
#include "hartree/randomization.hpp"
#include "hartree/spectral.hpp"

namespace hartree {
namespace {

std::vector<double> density(const Field& u) {
  const Field p = u.to_physical();
  std::vector<double> rho(p.size());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::norm(p.data()[i]);
  return rho;
}

std::vector<Field> gradients(const Field& w) {
  std::vector<Field> out;
  out.reserve(w.grid().dim());
  for (int k = 0; k < w.grid().dim(); ++k) out.push_back(partial_derivative(w, k).to_physical());
  return out;
}

double pair(const Grid& g, const std::vector<Complex>& mult, const std::vector<Complex>& a,
            const std::vector<Complex>& b) {
  return convolution_pairing(g, mult, a, b);
}

std::vector<Complex> multiplier_of(const Grid& g, const std::vector<double>& samples) {
  const ConvolutionKernel kernel = ConvolutionKernel::from_samples(g, samples);
  return {kernel.multiplier().begin(), kernel.multiplier().end()};
}

int packed_index(int d, int j, int k) {
  if (j > k) std::swap(j, k);
  return j * d - j * (j - 1) / 2 + (k - j);
}

double kinetic_part(const Field& u) {
  const Field f = u.to_frequency();
  const auto ksq = f.grid().frequency_squared();
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += ksq[i] * std::norm(f.data()[i]);
  return 0.5 * acc * std::pow(f.grid().frequency_spacing(), f.grid().dim());
}

}  // namespace

double mass(const Field& u) {
  const Field p = u.to_physical();
  double acc = 0.0;
  for (const auto& z : p.data()) acc += std::norm(z);
  return acc * p.grid().cell_volume();
}

double potential_energy(const Field& u, const HartreeKernel& k) {
  require_same_grid(u.grid(), k.convolution.grid());
  const std::vector<Complex> rho_hat = dft_of_real(u.grid(), density(u));
  return 0.25 * convolution_pairing(k.convolution, rho_hat, rho_hat);
}

EnergyParts energy(const Field& u, const HartreeKernel& k) {
  EnergyParts e;
  e.kinetic = kinetic_part(u);
  e.potential = potential_energy(u, k);
  e.total = e.kinetic + e.potential;
  return e;
}

PerturbedMassEnergy perturbed_mass_energy(const PerturbedState& st, const HartreeKernel& k) {
  require_same_grid(st.v.grid(), st.w.grid());
  PerturbedMassEnergy out;
  out.M_w = mass(st.w);
  out.E_w = kinetic_part(st.w) + potential_energy(st.u(), k);
  return out;
}

std::vector<std::vector<double>> momentum_bracket(const Field& f, const Field& g) {
  require_same_grid(f.grid(), g.grid());
  const Field fp = f.to_physical();
  const Field gp = g.to_physical();
  const std::vector<Field> df = gradients(fp);
  const std::vector<Field> dg = gradients(gp);
  std::vector<std::vector<double>> out(f.grid().dim(), std::vector<double>(f.size()));
  for (int k = 0; k < f.grid().dim(); ++k) {
    for (std::size_t i = 0; i < f.size(); ++i) {
      const Complex val = fp.data()[i] * std::conj(dg[k].data()[i]) -
                          gp.data()[i] * std::conj(df[k].data()[i]);
      out[k][i] = val.real();
    }
  }
  return out;
}

std::vector<std::vector<double>> momentum_density(const Field& w) {
  const Field wp = w.to_physical();
  const std::vector<Field> dw = gradients(wp);
  std::vector<std::vector<double>> out(w.grid().dim(), std::vector<double>(w.size()));
  for (int k = 0; k < w.grid().dim(); ++k) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      out[k][i] = (std::conj(wp.data()[i]) * dw[k].data()[i]).imag();
    }
  }
  return out;
}

namespace {

struct InteractionRaw {
  double kernel_form;
  double surrogate_raw;
};

InteractionRaw interaction_raw(const Field& u) {
  const Grid& g = u.grid();
  const std::vector<double> k3 = power_kernel_samples(g, 3.0);
  const ConvolutionKernel kernel = ConvolutionKernel::from_samples(g, k3);
  const std::vector<Complex> rho_hat = dft_of_real(g, density(u));
  const auto ksq = g.frequency_squared();
  std::vector<Complex> riesz(g.size());
  for (std::size_t i = 1; i < riesz.size(); ++i) riesz[i] = std::pow(ksq[i], -0.5 * (g.dim() - 3));
  return {convolution_pairing(kernel, rho_hat, rho_hat),
          convolution_pairing(g, riesz, rho_hat, rho_hat)};
}

void require_lieb_loss_dim(const Grid& g) {
  if (g.dim() < 4) throw ParameterError("interaction quantity requires d >= 4");
}

}  // namespace

double lieb_loss_constant(const Grid& grid) {
  require_lieb_loss_dim(grid);
  static std::mutex mu;
  static std::map<std::tuple<int, int, double>, double> cache;
  const auto key = std::make_tuple(grid.dim(), grid.points_per_axis(), grid.length());
  {
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const Field gauss = Field::sample(grid, [](std::span<const double> x) {
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    return Complex(std::exp(-0.5 * r2), 0.0);
  });
  const InteractionRaw raw = interaction_raw(gauss);
  const double c = raw.kernel_form / raw.surrogate_raw;
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(key, c);
  return c;
}

InteractionQuantity interaction_quantity(const Field& u) {
  require_lieb_loss_dim(u.grid());
  const InteractionRaw raw = interaction_raw(u);
  return {raw.kernel_form, lieb_loss_constant(u.grid()) * raw.surrogate_raw};
}

const std::vector<Complex>& MorawetzKernels::hess(int j, int k) const {
  return hessian.at(packed_index(grid.dim(), j, k));
}

MorawetzKernels make_morawetz_kernels(const Grid& grid, KernelScheme scheme) {
  const int d = grid.dim();
  MorawetzKernels mk;
  mk.grid = grid;
  mk.scheme = scheme;
  mk.hessian.resize(d * (d + 1) / 2);
  const double h = grid.spacing();

  if (scheme == KernelScheme::spectral) {
    const std::vector<double> absx =
        sample_minimal_image(grid, [](std::span<const double>, double r) { return r; }, 0.0);
    const std::vector<Complex> m_hat = multiplier_of(grid, absx);
    std::vector<std::vector<double>> xi;
    for (int a = 0; a < d; ++a) xi.push_back(grid.frequency_component(a));
    const auto ksq = grid.frequency_squared();
    const double nyquist = -0.5 * grid.points_per_axis() * grid.frequency_spacing();
    auto odd = [&](int a, std::size_t i) { return xi[a][i] == nyquist ? 0.0 : xi[a][i]; };
    for (int a = 0; a < d; ++a) {
      std::vector<Complex> m(grid.size());
      for (std::size_t i = 0; i < m.size(); ++i) m[i] = Complex(0.0, odd(a, i)) * m_hat[i];
      mk.gradient.push_back(std::move(m));
    }
    for (int j = 0; j < d; ++j) {
      for (int k = j; k < d; ++k) {
        std::vector<Complex> m(grid.size());
        for (std::size_t i = 0; i < m.size(); ++i) {
          m[i] = j == k ? -xi[j][i] * xi[j][i] * m_hat[i] : -odd(j, i) * odd(k, i) * m_hat[i];
        }
        mk.hessian[packed_index(d, j, k)] = std::move(m);
      }
    }
    mk.laplacian.resize(grid.size());
    mk.bilaplacian.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      mk.laplacian[i] = -ksq[i] * m_hat[i];
      mk.bilaplacian[i] = -ksq[i] * ksq[i] * m_hat[i];
    }
    return mk;
  }

  for (int a = 0; a < d; ++a) {
    mk.gradient.push_back(multiplier_of(
        grid, sample_minimal_image(
                  grid, [a](std::span<const double> x, double r) { return x[a] / r; }, 0.0)));
  }
  const double avg1 = d > 1 ? half_cell_average(d, h, 1.0) : 0.0;
  for (int j = 0; j < d; ++j) {
    for (int k = j; k < d; ++k) {
      const double delta = j == k ? 1.0 : 0.0;
      const double origin = delta * (1.0 - 1.0 / d) * avg1;
      mk.hessian[packed_index(d, j, k)] = multiplier_of(
          grid, sample_minimal_image(
                    grid,
                    [j, k, delta](std::span<const double> x, double r) {
                      return (delta - x[j] * x[k] / (r * r)) / r;
                    },
                    origin));
    }
  }
  mk.laplacian = multiplier_of(
      grid, sample_minimal_image(
                grid, [d](std::span<const double>, double r) { return (d - 1) / r; },
                (d - 1) * avg1));
  if (d > 3) {
    const double c = (d - 1.0) * (d - 3.0);
    mk.bilaplacian = multiplier_of(
        grid, sample_minimal_image(
                  grid, [c](std::span<const double>, double r) { return c / (r * r * r); },
                  c * half_cell_average(d, h, 3.0)));
  } else {
    mk.bilaplacian.assign(grid.size(), Complex(0.0, 0.0));
  }
  return mk;
}

double morawetz_action(const Field& w, const MorawetzKernels& mk) {
  require_same_grid(w.grid(), mk.grid);
  const Grid& g = w.grid();
  const std::vector<Complex> rho_hat = dft_of_real(g, density(w));
  const auto J = momentum_density(w);
  double acc = 0.0;
  for (int k = 0; k < g.dim(); ++k) acc += pair(g, mk.gradient[k], rho_hat, dft_of_real(g, J[k]));
  return 2.0 * acc;
}

double morawetz_action(const Field& w) {
  return morawetz_action(w, make_morawetz_kernels(w.grid(), KernelScheme::sampled));
}

double MorawetzBreakdown::sum() const {
  double s = 0.0;
  for (double t : terms) s += t;
  return s;
}

double MorawetzBreakdown::exact_sum() const { return sum() - terms[3] + nonlinear_exact; }

double MorawetzBreakdown::scale() const {
  double s = 0.0;
  for (double t : terms) s = std::max(s, std::abs(t));
  return s;
}

MorawetzBreakdown morawetz_terms(const PerturbedState& st, const HartreeKernel& k,
                                 const MorawetzKernels& mk) {
  const Grid& g = st.w.grid();
  const int d = g.dim();
  if (d < 4) throw ParameterError("Morawetz term breakdown requires d >= 4");
  require_same_grid(g, mk.grid);
  require_same_grid(g, k.convolution.grid());

  const Field w = st.w.to_physical();
  const Field e = perturbation_error(st, k);
  const std::vector<Field> dw = gradients(w);
  const std::vector<double> rho = density(w);
  const std::vector<double> P = potential_values(w, k);
  const std::size_t size = g.size();

  auto dft_of = [&](auto&& fn) {
    std::vector<double> vals(size);
    for (std::size_t i = 0; i < size; ++i) vals[i] = fn(i);
    return dft_of_real(g, vals);
  };

  const std::vector<Complex> rho_hat = dft_of_real(g, rho);
  std::vector<std::vector<Complex>> J_hat(d);
  for (int a = 0; a < d; ++a) {
    J_hat[a] = dft_of([&](std::size_t i) { return (std::conj(w.data()[i]) * dw[a].data()[i]).imag(); });
  }

  MorawetzBreakdown b;
  b.t = st.t;
  double ma = 0.0, mc = 0.0;
  for (int j = 0; j < d; ++j) {
    for (int kk = 0; kk < d; ++kk) {
      ma += pair(g, mk.hess(j, kk), J_hat[j], J_hat[kk]);
      if (kk < j) continue;
      const std::vector<Complex> T_hat = dft_of([&](std::size_t i) {
        return (std::conj(dw[j].data()[i]) * dw[kk].data()[i]).real();
      });
      mc += (kk == j ? 1.0 : 2.0) * pair(g, mk.hess(j, kk), rho_hat, T_hat);
    }
  }
  b.terms[0] = -4.0 * ma;
  b.terms[1] = pair(g, mk.bilaplacian, rho_hat, rho_hat);
  b.terms[2] = 4.0 * mc;
  b.terms[3] = pair(g, mk.laplacian, rho_hat, dft_of([&](std::size_t i) { return P[i] * rho[i]; }));

  double me = 0.0, mf = 0.0;
  const std::vector<Complex> imew = dft_of([&](std::size_t i) {
    return (e.data()[i] * std::conj(w.data()[i])).imag();
  });
  for (int a = 0; a < d; ++a) {
    me += pair(g, mk.gradient[a], imew, J_hat[a]);
    mf += pair(g, mk.gradient[a], rho_hat, dft_of([&](std::size_t i) {
                 return (e.data()[i] * std::conj(dw[a].data()[i])).real();
               }));
  }
  b.terms[4] = 4.0 * me;
  b.terms[5] = 4.0 * mf;
  b.terms[6] = 2.0 * pair(g, mk.laplacian, rho_hat, dft_of([&](std::size_t i) {
                            return (e.data()[i] * std::conj(w.data()[i])).real();
                          }));

  const Field Pf(g, Rep::physical, std::vector<Complex>(P.begin(), P.end()));
  double nl = 0.0;
  for (int a = 0; a < d; ++a) {
    const Field dP = partial_derivative(Pf, a).to_physical();
    nl += pair(g, mk.gradient[a], rho_hat,
               dft_of([&](std::size_t i) { return rho[i] * dP.data()[i].real(); }));
  }
  b.nonlinear_exact = -2.0 * nl;
  return b;
}

std::vector<double> finite_difference(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() != y.size()) throw ParameterError("finite difference needs matching series");
  const std::size_t n = t.size();
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  out[0] = (y[1] - y[0]) / (t[1] - t[0]);
  out[n - 1] = (y[n - 1] - y[n - 2]) / (t[n - 1] - t[n - 2]);
  for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (y[i + 1] - y[i - 1]) / (t[i + 1] - t[i - 1]);
  return out;
}

MorawetzAudit morawetz_audit(const Field& u0, double N0, const SolverConfig& cfg,
                             const MorawetzKernels& mk, std::size_t stride) {
  cfg.validate();
  if (stride < 1) throw ParameterError("audit stride must be at least 1");
  const HighLowSplit split = split_high_low(u0.to_physical(), N0);
  const Field v0 = split.high.to_frequency();

  SolverConfig quiet = cfg;
  quiet.record_every = std::max<std::size_t>(cfg.step_count(), 1);
  MorawetzAudit audit;
  std::vector<double> times;
  std::vector<std::size_t> marks;
  evolve(u0, quiet, [&](std::size_t step, double t, const Field& u) {
    PerturbedState st{free_propagate(v0, t).to_physical(), Field(), N0, t};
    st.w = u - st.v;
    times.push_back(t);
    audit.action.push_back(morawetz_action(st.w, mk));
    if (step % stride == 0) {
      audit.breakdowns.push_back(morawetz_terms(st, *cfg.kernel, mk));
      marks.push_back(step);
    }
  });
  const std::vector<double> dM = finite_difference(times, audit.action);
  for (std::size_t i = 0; i < marks.size(); ++i) audit.breakdowns[i].dM_dt_fd = dM[marks[i]];
  return audit;
}

SpaceTimeNormSpec SpaceTimeNormSpec::x_norm() {
  return {"X", {{2.0, 10.0 / 3.0, 1.0}, {4.0, 4.0, 0.0}, {4.0, 5.0, 0.0}, {3.0, 6.0, 0.0}}};
}

SpaceTimeNormSpec SpaceTimeNormSpec::y_norm(double s, int a) {
  return {"Y", {{2.0, 5.0, s + 0.5 * a}, {4.0, 5.0, 0.0}, {4.0, 4.0, 0.0}, {6.0, 3.0, 0.0}}};
}

void SpaceTimeNormSpec::validate() const {
  if (summands.empty()) throw ParameterError("space-time norm has no summands");
  for (const auto& s : summands) {
    if (!(s.q >= 1.0) || !(s.r >= 1.0)) throw ParameterError("space-time exponents must be >= 1");
  }
}

double spacetime_norm(const std::vector<double>& times, const std::vector<Field>& fields,
                      const SpaceTimeNormSpec& spec) {
  spec.validate();
  if (times.size() != fields.size()) throw ParameterError("times and fields differ in length");
  if (times.size() < 2) throw ParameterError("space-time norm needs at least two snapshots");
  double total = 0.0;
  for (const auto& s : spec.summands) {
    std::vector<double> vals(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
      const Field f = s.sigma == 0.0 ? fields[i] : bracket_grad(fields[i], s.sigma);
      vals[i] = std::pow(norm(f, Lp{s.r}), s.q);
    }
    double integral = 0.0;
    for (std::size_t i = 1; i < times.size(); ++i) {
      integral += 0.5 * (vals[i] + vals[i - 1]) * (times[i] - times[i - 1]);
    }
    total += std::pow(integral, 1.0 / s.q);
  }
  return total;
}

double spacetime_norm(const Trajectory& traj, const SpaceTimeNormSpec& spec) {
  return spacetime_norm(traj.times, traj.snapshots, spec);
}

std::vector<double> scattering_diagnostic(const Trajectory& traj) {
  if (traj.snapshots.size() < 2) throw ParameterError("scattering diagnostic needs two snapshots");
  std::vector<double> out;
  Field prev = free_propagate(traj.snapshots[0].to_frequency(), -traj.times[0]);
  for (std::size_t i = 1; i < traj.snapshots.size(); ++i) {
    Field cur = free_propagate(traj.snapshots[i].to_frequency(), -traj.times[i]);
    out.push_back(norm(cur - prev, Hs{1.0}));
    prev = std::move(cur);
  }
  return out;
}

double AlmostConservationRecord::max_mass_drift() const {
  double m = 0.0;
  for (double x : M_w) m = std::max(m, std::abs(x - M_w.front()));
  return m;
}

double AlmostConservationRecord::max_energy_drift() const {
  double m = 0.0;
  for (double x : E_w) m = std::max(m, std::abs(x - E_w.front()));
  return m;
}

AlmostConservationRecord almost_conservation_bounds(const PerturbedTrajectory& traj,
                                                    const HartreeKernel& k) {
  if (traj.errors.size() != traj.states.size()) {
    throw ParameterError("perturbed trajectory is missing error-term records");
  }
  AlmostConservationRecord rec;
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const PerturbedState& st = traj.states[i];
    const Grid& g = st.w.grid();
    const PerturbedMassEnergy me = perturbed_mass_energy(st, k);
    rec.times.push_back(st.t);
    rec.M_w.push_back(me.M_w);
    rec.E_w.push_back(me.E_w);

    const Field w = st.w.to_physical();
    const Field e = traj.errors[i].to_physical();
    Complex ew = 0.0;
    for (std::size_t x = 0; x < w.size(); ++x) ew += e.data()[x] * std::conj(w.data()[x]);
    rec.mass_integrand.push_back(2.0 * std::abs(ew) * g.cell_volume());

    const Field Fu = hartree_nonlinearity(st.u(), k);
    const Field lap_v = abs_grad(st.v, 2.0).to_physical() * Complex(-1.0, 0.0);
    Complex fl = 0.0;
    for (std::size_t x = 0; x < w.size(); ++x) fl += Fu.data()[x] * std::conj(lap_v.data()[x]);
    rec.energy_integrand.push_back(std::abs(fl) * g.cell_volume());
  }
  rec.dMw_dt_fd = finite_difference(rec.times, rec.M_w);
  rec.dEw_dt_fd = finite_difference(rec.times, rec.E_w);

  auto ratios = [](const std::vector<double>& fd, const std::vector<double>& bound) {
    const double peak = bound.empty() ? 0.0 : *std::max_element(bound.begin(), bound.end());
    const double floor = 1e-8 * peak;
    std::vector<double> out(fd.size());
    for (std::size_t i = 0; i < fd.size(); ++i) {
      const double denom = std::max(bound[i], floor);
      out[i] = denom > 0.0 ? std::abs(fd[i]) / denom
                           : (fd[i] == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    }
    return out;
  };
  rec.mass_ratio = ratios(rec.dMw_dt_fd, rec.mass_integrand);
  rec.energy_ratio = ratios(rec.dEw_dt_fd, rec.energy_integrand);
  return rec;
}

void write_diagnostics_csv(std::ostream& os, const std::vector<DiagnosticsRow>& rows) {
  os << "t,mass,kinetic,potential,E_w,M_w,M";
  for (const char* name : kMorawetzTermNames) os << ',' << name;
  os << ",mass_integrand,energy_integrand,scattering_increment\n";
  os << std::setprecision(17);
  for (const auto& r : rows) {
    os << r.t << ',' << r.mass << ',' << r.kinetic << ',' << r.potential << ',' << r.E_w << ','
       << r.M_w << ',' << r.action;
    for (double m : r.morawetz) {
      os << ',';
      if (r.has_morawetz) os << m;
    }
    os << ',' << r.mass_integrand << ',' << r.energy_integrand << ',';
    if (r.has_increment) os << r.scattering_increment;
    os << '\n';
  }
}

}  // namespace hartree
