#include "hartree/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "hartree/error.hpp"
#include "hartree/functionals.hpp"
#include "hartree/inequality_lab.hpp"
#include "hartree/rng.hpp"
#include "hartree/snapshot_io.hpp"
#include "hartree/spectral.hpp"

namespace hartree {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::single: return "single";
    case ExperimentKind::ensemble: return "ensemble";
    case ExperimentKind::nzero_sweep: return "nzero-sweep";
    case ExperimentKind::tail_study: return "tail-study";
    case ExperimentKind::inequality_suite: return "inequality-suite";
    case ExperimentKind::morawetz_audit: return "morawetz-audit";
  }
  return "?";
}

ExperimentKind parse_experiment_kind(const std::string& s) {
  for (auto k : {ExperimentKind::single, ExperimentKind::ensemble, ExperimentKind::nzero_sweep,
                 ExperimentKind::tail_study, ExperimentKind::inequality_suite,
                 ExperimentKind::morawetz_audit}) {
    if (to_string(k) == s) return k;
  }
  throw ParameterError("config field 'kind': unknown experiment kind '" + s + "'");
}

namespace {

template <class T>
void read_field(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParameterError(std::string("config field '") + key + "': " + e.what());
  }
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "kind", "d", "n", "L", "dt", "T", "record_every", "gamma", "mu", "kernel_mode", "s", "a",
      "N0", "N0_list", "profile_width", "profile_amplitude", "profile_phase", "hs_norm",
      "randomize", "master_seed", "K", "A", "lambda_grid", "M_levels", "checks", "field_class",
      "band", "audit_stride", "morawetz_kernels", "morawetz_terms", "write_snapshots"};
  return keys;
}

std::string padded(std::size_t i) {
  std::ostringstream os;
  os << std::setw(4) << std::setfill('0') << i;
  return os.str();
}

KernelMode kernel_mode_of(const std::string& s) {
  return s == "continuum" ? KernelMode::continuum : KernelMode::sampled;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw ParameterError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known_keys().count(key)) throw ParameterError("config field '" + key + "': unknown key");
  }
  ExperimentConfig c;
  std::string kind = to_string(c.kind);
  read_field(j, "kind", kind);
  c.kind = parse_experiment_kind(kind);
  read_field(j, "d", c.d);
  read_field(j, "n", c.n);
  read_field(j, "L", c.L);
  read_field(j, "dt", c.dt);
  read_field(j, "T", c.T);
  read_field(j, "record_every", c.record_every);
  read_field(j, "gamma", c.gamma);
  read_field(j, "mu", c.mu);
  read_field(j, "kernel_mode", c.kernel_mode);
  read_field(j, "s", c.s);
  read_field(j, "a", c.a);
  read_field(j, "N0", c.N0);
  read_field(j, "N0_list", c.N0_list);
  read_field(j, "profile_width", c.profile_width);
  read_field(j, "profile_amplitude", c.profile_amplitude);
  read_field(j, "profile_phase", c.profile_phase);
  read_field(j, "hs_norm", c.hs_norm);
  read_field(j, "randomize", c.randomize);
  read_field(j, "master_seed", c.master_seed);
  read_field(j, "K", c.K);
  read_field(j, "A", c.A);
  read_field(j, "lambda_grid", c.lambda_grid);
  read_field(j, "M_levels", c.M_levels);
  read_field(j, "checks", c.checks);
  read_field(j, "field_class", c.field_class);
  read_field(j, "band", c.band);
  read_field(j, "audit_stride", c.audit_stride);
  read_field(j, "morawetz_kernels", c.morawetz_kernels);
  read_field(j, "morawetz_terms", c.morawetz_terms);
  read_field(j, "write_snapshots", c.write_snapshots);
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw FormatError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(j);
}

json ExperimentConfig::to_json() const {
  return {{"kind", to_string(kind)},
          {"d", d},
          {"n", n},
          {"L", L},
          {"dt", dt},
          {"T", T},
          {"record_every", record_every},
          {"gamma", gamma},
          {"mu", mu},
          {"kernel_mode", kernel_mode},
          {"s", s},
          {"a", a},
          {"N0", N0},
          {"N0_list", N0_list},
          {"profile_width", profile_width},
          {"profile_amplitude", profile_amplitude},
          {"profile_phase", profile_phase},
          {"hs_norm", hs_norm},
          {"randomize", randomize},
          {"master_seed", master_seed},
          {"K", K},
          {"A", A},
          {"lambda_grid", lambda_grid},
          {"M_levels", M_levels},
          {"checks", checks},
          {"field_class", field_class},
          {"band", band},
          {"audit_stride", audit_stride},
          {"morawetz_kernels", morawetz_kernels},
          {"morawetz_terms", morawetz_terms},
          {"write_snapshots", write_snapshots}};
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ParameterError("config field '" + field + "': " + why);
  };
  try {
    (void)grid();
  } catch (const ParameterError& e) {
    fail("d/n/L", e.what());
  }
  if (!(dt > 0.0)) fail("dt", "must be positive");
  if (!(T >= 0.0)) fail("T", "must be non-negative");
  if (record_every < 1) fail("record_every", "must be at least 1");
  if (mu != 1) fail("mu", "only the defocusing sign +1 is supported");
  const bool dynamic = kind != ExperimentKind::tail_study && kind != ExperimentKind::inequality_suite;
  if (dynamic && !(gamma > 0.0 && gamma < d)) fail("gamma", "must satisfy 0 < gamma < d");
  if (kernel_mode != "sampled" && kernel_mode != "continuum") fail("kernel_mode", "expected sampled or continuum");
  try {
    (void)RandomizationParams::make(s, a);
  } catch (const ParameterError& e) {
    fail("a", e.what());
  }
  if (!is_dyadic(N0)) fail("N0", "must be dyadic");
  for (double v : N0_list) {
    if (!is_dyadic(v)) fail("N0_list", "entries must be dyadic");
  }
  if (K < 1) fail("K", "must be at least 1");
  if (!(profile_width > 0.0)) fail("profile_width", "must be positive");
  if (hs_norm < 0.0) fail("hs_norm", "must be non-negative");
  if (!(A > 0.0)) fail("A", "must be positive");
  for (double l : lambda_grid) {
    if (!(l > 0.0)) fail("lambda_grid", "entries must be positive");
  }
  for (double m : M_levels) {
    if (!(m >= 0.0)) fail("M_levels", "entries must be non-negative");
  }
  for (const auto& c : checks) {
    if (std::find(check_names().begin(), check_names().end(), c) == check_names().end()) {
      fail("checks", "unknown check '" + c + "'");
    }
  }
  try {
    (void)parse_field_class(field_class);
  } catch (const ParameterError& e) {
    fail("field_class", e.what());
  }
  if (!(band > 0.0)) fail("band", "must be positive");
  if (audit_stride < 1) fail("audit_stride", "must be at least 1");
  if (morawetz_kernels != "spectral" && morawetz_kernels != "sampled") {
    fail("morawetz_kernels", "expected spectral or sampled");
  }
  if (kind == ExperimentKind::morawetz_audit && d < 4) fail("d", "the Morawetz audit needs d >= 4");
  if (kind == ExperimentKind::tail_study && K < 100) fail("K", "tail studies need at least 100 samples");
}

Grid ExperimentConfig::grid() const { return make_grid(d, n, L); }

SolverConfig ExperimentConfig::solver(std::shared_ptr<const HartreeKernel> kernel) const {
  SolverConfig sc;
  sc.dt = dt;
  sc.T = T;
  sc.record_every = record_every;
  sc.kernel = std::move(kernel);
  sc.mu = mu;
  return sc;
}

bool OmegaStats::inside(double M) const {
  return hs_u0w + y_v < M * hs_u0 && w0_term + l2_u0w + l10_u0w < M * hs_u0;
}

json RunRecord::to_json() const {
  json j;
  j["index"] = index;
  j["seed"] = seed;
  j["diagnostics"] = diagnostics_path;
  j["snapshots"] = snapshot_paths;
  j["scalars"] = scalars;
  if (omega) {
    j["omega"] = {{"hs_u0w", omega->hs_u0w}, {"y_v", omega->y_v},
                  {"w0_term", omega->w0_term}, {"l2_u0w", omega->l2_u0w},
                  {"l10_u0w", omega->l10_u0w}, {"hs_u0", omega->hs_u0}};
  }
  return j;
}

RunRecord RunRecord::from_json(const json& j) {
  RunRecord r;
  try {
    r.index = j.at("index").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.diagnostics_path = j.value("diagnostics", std::string());
    r.snapshot_paths = j.value("snapshots", std::vector<std::string>{});
    r.scalars = j.value("scalars", std::map<std::string, double>{});
    if (j.contains("omega")) {
      const json& o = j.at("omega");
      r.omega = OmegaStats{o.at("hs_u0w").get<double>(), o.at("y_v").get<double>(),
                           o.at("w0_term").get<double>(), o.at("l2_u0w").get<double>(),
                           o.at("l10_u0w").get<double>(), o.at("hs_u0").get<double>()};
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed run record: ") + e.what());
  }
  return r;
}

std::size_t worker_count() {
  if (const char* env = std::getenv("HARTREE_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<std::size_t>(v);
  }
  return 1;
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

Field base_profile(const ExperimentConfig& cfg, const Grid& grid) {
  const double w = cfg.profile_width;
  Field u = Field::sample(grid, [&](std::span<const double> x) {
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    return cfg.profile_amplitude * std::exp(-0.5 * r2 / (w * w)) *
           std::polar(1.0, cfg.profile_phase * x[0]);
  });
  if (cfg.hs_norm > 0.0) {
    const double cur = norm(u, Hs{cfg.s});
    if (cur > 0.0) u *= Complex(cfg.hs_norm / cur, 0.0);
  }
  return u;
}

std::vector<double> rayleigh_samples(std::uint64_t seed, std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t j = 0; j < count; ++j) out[j] = std::abs(coefficient(seed, j));
  return out;
}

json TailReport::to_json() const {
  return {{"lambdas", lambdas}, {"survival", survival}, {"fitted_points", fitted_points},
          {"slope", slope}, {"intercept", intercept}, {"r2", r2}};
}

TailReport tail_statistics(const std::vector<double>& samples, std::vector<double> lambda_grid) {
  if (samples.size() < 100) throw ParameterError("tail statistics need at least 100 samples");
  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  if (lambda_grid.empty()) {
    auto quantile = [&](double q) { return sorted[static_cast<std::size_t>(q * (n - 1))]; };
    const double lo = quantile(0.05), hi = quantile(0.99);
    for (int i = 0; i < 16; ++i) lambda_grid.push_back(lo + (hi - lo) * i / 15.0);
  }
  TailReport rep;
  double sw = 0, sx = 0, sy = 0;
  std::vector<std::array<double, 3>> pts;
  for (double lam : lambda_grid) {
    const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), lam);
    const double P = static_cast<double>(above) / n;
    rep.lambdas.push_back(lam);
    rep.survival.push_back(P);
    if (P > 0.0 && P < 1.0) {
      const double w = n * P / (1.0 - P);
      pts.push_back({lam * lam, std::log(P), w});
      sw += w;
      sx += w * lam * lam;
      sy += w * std::log(P);
    }
  }
  rep.fitted_points = pts.size();
  if (pts.size() < 2) {
    rep.slope = rep.intercept = rep.r2 = std::nan("");
    return rep;
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& [x, y, w] : pts) {
    sxx += w * (x - mx) * (x - mx);
    sxy += w * (x - mx) * (y - my);
    syy += w * (y - my) * (y - my);
  }
  rep.slope = sxy / sxx;
  rep.intercept = my - rep.slope * mx;
  double sse = 0;
  for (const auto& [x, y, w] : pts) {
    const double r = y - (rep.intercept + rep.slope * x);
    sse += w * r * r;
  }
  rep.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return rep;
}

std::vector<double> omega_event_count(const std::vector<RunRecord>& records,
                                      const std::vector<double>& M_levels) {
  std::vector<double> out;
  for (double M : M_levels) {
    std::size_t inside = 0;
    for (const auto& r : records) {
      if (!r.omega) throw ParameterError("record " + std::to_string(r.index) + " lacks the Omega_M statistics");
      if (r.omega->inside(M)) ++inside;
    }
    out.push_back(records.empty() ? 0.0 : static_cast<double>(inside) / records.size());
  }
  return out;
}

namespace {

struct Context {
  const ExperimentConfig& cfg;
  fs::path out_dir;
  Grid grid;
  std::shared_ptr<const HartreeKernel> kernel;
  std::optional<CubeSystem> cubes;
  Field base;
  double base_hs = 0.0;
  std::optional<MorawetzKernels> action_kernels;
  std::optional<MorawetzKernels> term_kernels;

  explicit Context(const ExperimentConfig& c, fs::path dir) : cfg(c), out_dir(std::move(dir)), grid(c.grid()) {
    base = base_profile(cfg, grid);
    base_hs = norm(base, Hs{cfg.s});
  }

  void need_kernel() {
    if (!kernel) {
      kernel = std::make_shared<HartreeKernel>(
          make_hartree_kernel(grid, cfg.gamma, kernel_mode_of(cfg.kernel_mode)));
    }
  }
  void need_cubes() {
    if (!cubes) cubes.emplace(build_cube_system(grid, RandomizationParams::make(cfg.s, cfg.a)));
  }

  Field initial(std::uint64_t seed) const {
    if (!cfg.randomize) return base;
    return randomize(base, *cubes, sample_coefficients(seed, cubes->cube_count()));
  }
};

void write_text(const fs::path& p, const std::string& s) {
  fs::create_directories(p.parent_path());
  write_file_atomic(p, s);
}

OmegaStats omega_stats(const Context& ctx, const Field& u0w, const HighLowSplit& split,
                       const std::vector<double>& times, const std::vector<Field>& v) {
  const ExperimentConfig& c = ctx.cfg;
  OmegaStats o;
  o.hs_u0w = norm(u0w, Hs{c.s});
  o.y_v = times.size() >= 2 ? spacetime_norm(times, v, SpaceTimeNormSpec::y_norm(c.s, c.a)) : 0.0;
  o.w0_term = std::pow(c.N0, c.s) * norm(split.low, Lp{2.0}) +
              std::pow(c.N0, c.s - 1.0) * norm(split.low, HsDot{1.0});
  o.l2_u0w = norm(u0w, Lp{2.0});
  o.l10_u0w = norm(u0w, Lp{10.0});
  o.hs_u0 = ctx.base_hs;
  return o;
}

RunRecord run_perturbed_sample(const Context& ctx, std::size_t i) {
  const ExperimentConfig& c = ctx.cfg;
  RunRecord rec;
  rec.index = i;
  rec.seed = derive_seed(c.master_seed, i);
  const Field u0w = ctx.initial(rec.seed);
  const HighLowSplit split = split_high_low(u0w, c.N0);
  const SolverConfig sc = c.solver(ctx.kernel);
  PerturbedTrajectory traj = evolve_perturbed(u0w, c.N0, sc);
  const AlmostConservationRecord ac = almost_conservation_bounds(traj, *ctx.kernel);
  traj.errors.clear();

  std::vector<double> times;
  std::vector<DiagnosticsRow> rows;
  Field prev;
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const PerturbedState& st = traj.states[k];
    const Field u = st.u();
    times.push_back(st.t);
    DiagnosticsRow r;
    r.t = st.t;
    r.mass = mass(u);
    const EnergyParts e = energy(u, *ctx.kernel);
    r.kinetic = e.kinetic;
    r.potential = e.potential;
    r.E_w = ac.E_w[k];
    r.M_w = ac.M_w[k];
    r.action = morawetz_action(st.w, *ctx.action_kernels);
    if (ctx.term_kernels) {
      r.morawetz = morawetz_terms(st, *ctx.kernel, *ctx.term_kernels).terms;
      r.has_morawetz = true;
    }
    r.mass_integrand = ac.mass_integrand[k];
    r.energy_integrand = ac.energy_integrand[k];
    if (k > 0) {
      r.scattering_increment = scattering_diagnostic(Trajectory{{times[k - 1], st.t}, {prev, u}}).front();
      r.has_increment = true;
    }
    if (k == 0 && c.write_snapshots) {
      const std::string a = "snapshots/sample_" + padded(i) + "_initial.hrt";
      fs::create_directories(ctx.out_dir / "snapshots");
      store_field(ctx.out_dir / a, u, st.t);
      rec.snapshot_paths.push_back(a);
    }
    if (k + 1 == traj.states.size() && c.write_snapshots) {
      const std::string b = "snapshots/sample_" + padded(i) + "_final.hrt";
      store_field(ctx.out_dir / b, u, st.t);
      rec.snapshot_paths.push_back(b);
    }
    prev = u;
    rows.push_back(r);
  }
  std::vector<Field> vs;
  for (auto& st : traj.states) {
    vs.push_back(std::move(st.v));
    st.w = Field();
  }
  std::ostringstream csv;
  write_diagnostics_csv(csv, rows);
  rec.diagnostics_path = "diagnostics/sample_" + padded(i) + ".csv";
  write_text(ctx.out_dir / rec.diagnostics_path, csv.str());

  const double m0 = rows.front().mass, m1 = rows.back().mass;
  const double e0 = rows.front().kinetic + rows.front().potential;
  const double e1 = rows.back().kinetic + rows.back().potential;
  double max_Mw = 0.0;
  for (double m : ac.M_w) max_Mw = std::max(max_Mw, m);
  rec.scalars["mass_drift_rel"] = m0 > 0.0 ? std::abs(m1 - m0) / m0 : 0.0;
  rec.scalars["energy_drift_rel"] = e0 > 0.0 ? std::abs(e1 - e0) / e0 : 0.0;
  rec.scalars["max_Mw_drift"] = ac.max_mass_drift();
  rec.scalars["max_Ew_drift"] = ac.max_energy_drift();
  rec.scalars["max_Mw"] = max_Mw;
  rec.scalars["mass_bound_2A"] = max_Mw <= 2.0 * c.A * std::pow(c.N0, -2.0 * c.s) ? 1.0 : 0.0;
  rec.scalars["max_mass_ratio"] =
      ac.mass_ratio.empty() ? 0.0 : *std::max_element(ac.mass_ratio.begin(), ac.mass_ratio.end());
  rec.scalars["max_energy_ratio"] =
      ac.energy_ratio.empty() ? 0.0 : *std::max_element(ac.energy_ratio.begin(), ac.energy_ratio.end());
  rec.omega = omega_stats(ctx, u0w, split, times, vs);
  rec.scalars["y_norm_v"] = rec.omega->y_v;
  return rec;
}

std::string n0_key(const char* what, double N0) {
  std::ostringstream os;
  os << what << "_N0_" << N0;
  return os.str();
}

RunRecord run_sweep_sample(const Context& ctx, std::size_t i) {
  const ExperimentConfig& c = ctx.cfg;
  RunRecord rec;
  rec.index = i;
  rec.seed = derive_seed(c.master_seed, i);
  const Field u0w = ctx.initial(rec.seed);
  const Trajectory traj = evolve(u0w, c.solver(ctx.kernel));
  std::vector<double> potential;
  for (const auto& u : traj.snapshots) potential.push_back(potential_energy(u, *ctx.kernel));
  for (double N0 : c.N0_list) {
    const Field v0 = split_high_low(u0w, N0).high.to_frequency();
    double M0 = 0.0, E0 = 0.0, dM = 0.0, dE = 0.0;
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
      const Field w = traj.snapshots[k] - free_propagate(v0, traj.times[k]).to_physical();
      const double M = mass(w);
      const double E = energy(w, *ctx.kernel).kinetic + potential[k];
      if (k == 0) {
        M0 = M;
        E0 = E;
      }
      dM = std::max(dM, std::abs(M - M0));
      dE = std::max(dE, std::abs(E - E0));
    }
    rec.scalars[n0_key("max_Mw_drift", N0)] = dM;
    rec.scalars[n0_key("max_Ew_drift", N0)] = dE;
  }
  return rec;
}

RunRecord run_tail_sample(const Context& ctx, std::size_t i) {
  const ExperimentConfig& c = ctx.cfg;
  RunRecord rec;
  rec.index = i;
  rec.seed = derive_seed(c.master_seed, i);
  const Field u0w = ctx.initial(rec.seed).to_frequency();
  std::vector<double> times;
  std::vector<Field> fields;
  const std::size_t steps = c.solver(nullptr).step_count();
  for (std::size_t k = 0; k <= steps; k += c.record_every) {
    const double t = std::min(c.T, c.dt * static_cast<double>(k));
    times.push_back(t);
    fields.push_back(free_propagate(u0w, t).to_physical());
  }
  if (times.back() < c.T) {
    times.push_back(c.T);
    fields.push_back(free_propagate(u0w, c.T).to_physical());
  }
  rec.scalars["y_norm"] = spacetime_norm(times, fields, SpaceTimeNormSpec::y_norm(c.s, c.a));
  rec.scalars["hs_norm_u0w"] = norm(u0w, Hs{c.s});
  return rec;
}

template <class Fn>
std::vector<RunRecord> run_samples(std::size_t count, Fn&& fn) {
  std::vector<RunRecord> out(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        out[i] = fn(i);
      } catch (const BlowUpError& e) {
        errors[i] = std::make_exception_ptr(
            BlowUpError("sample " + std::to_string(i) + ": " + e.what(), e.time()));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::min(worker_count(), count);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

json mean_scalars(const std::vector<RunRecord>& recs) {
  std::map<std::string, double> sums;
  for (const auto& r : recs) {
    for (const auto& [k, v] : r.scalars) sums[k] += v;
  }
  json j = json::object();
  for (const auto& [k, v] : sums) j[k] = v / static_cast<double>(recs.size());
  return j;
}

json run_morawetz(Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  const Field u0 = ctx.initial(derive_seed(c.master_seed, 0));
  const KernelScheme scheme = c.morawetz_kernels == "sampled" ? KernelScheme::sampled : KernelScheme::spectral;
  const MorawetzKernels mk = make_morawetz_kernels(ctx.grid, scheme);
  const MorawetzAudit audit = morawetz_audit(u0, c.N0, c.solver(ctx.kernel), mk, c.audit_stride);

  std::ostringstream csv;
  csv << "t,dM_dt_fd";
  for (const char* name : kMorawetzTermNames) csv << ',' << name;
  csv << ",sum,nonlinear_exact,relative_residual\n" << std::setprecision(17);
  double worst = 0.0, md_min = INFINITY, ac_min = INFINITY;
  const std::size_t count = audit.breakdowns.size();
  for (std::size_t k = 0; k < count; ++k) {
    const MorawetzBreakdown& b = audit.breakdowns[k];
    const double scale = b.scale();
    const double rel = scale > 0.0 ? std::abs(b.dM_dt_fd - b.sum()) / scale : 0.0;
    const bool interior = k > 0 && k + 1 < count;
    if (interior) worst = std::max(worst, rel);
    if (scale > 0.0) {
      md_min = std::min(md_min, b.terms[3] / scale);
      ac_min = std::min(ac_min, (b.terms[0] + b.terms[2]) / scale);
    }
    csv << b.t << ',' << b.dM_dt_fd;
    for (double t : b.terms) csv << ',' << t;
    csv << ',' << b.sum() << ',' << b.nonlinear_exact << ',' << rel << '\n';
  }
  write_text(ctx.out_dir / "morawetz_audit.csv", csv.str());
  return {{"snapshots", count},
          {"max_interior_relative_residual", worst},
          {"min_Md_over_scale", md_min},
          {"min_Ma_plus_Mc_over_scale", ac_min},
          {"kernels", c.morawetz_kernels}};
}

json run_inequalities(Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  EnsembleSpec spec;
  spec.d = c.d;
  spec.n = c.n;
  spec.L = c.L;
  spec.field_class = parse_field_class(c.field_class);
  spec.count = c.K;
  spec.seed = c.master_seed;
  spec.band = c.band;
  spec.s = c.s;
  spec.a = c.a;
  std::vector<std::string> names = c.checks;
  if (names.empty()) {
    for (const auto& n : check_names()) {
      if ((n == "lieb_loss" || n == "visan") && c.d < 4) continue;
      if (n == "hls" && c.d < 3) continue;
      names.push_back(n);
    }
  }
  CheckParams params;
  if (c.d != 5) params.hls_gamma = c.d - 1.0;
  if (c.d <= 2) params.hardy_s = 0.25 * c.d;
  std::vector<CheckReport> reports;
  json arr = json::array();
  for (const auto& n : names) {
    reports.push_back(run_check(n, spec, params));
    const json j = reports.back().to_json();
    write_text(ctx.out_dir / "checks" / (n + ".json"), dump_json(j));
    json brief = j;
    brief.erase("ratios");
    arr.push_back(brief);
  }
  write_text(ctx.out_dir / "inequality_summary.csv", summary_csv(reports));
  return arr;
}

}  // namespace

RunSet run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  fs::create_directories(out_dir);
  Context ctx(cfg, out_dir);
  RunSet rs;
  json summary;
  summary["config"] = cfg.to_json();
  json agg = json::object();

  switch (cfg.kind) {
    case ExperimentKind::single:
    case ExperimentKind::ensemble: {
      ctx.need_kernel();
      if (cfg.randomize) ctx.need_cubes();
      ctx.action_kernels.emplace(make_morawetz_kernels(ctx.grid, KernelScheme::sampled));
      if (cfg.morawetz_terms && cfg.d >= 4) {
        ctx.term_kernels.emplace(make_morawetz_kernels(
            ctx.grid, cfg.morawetz_kernels == "sampled" ? KernelScheme::sampled : KernelScheme::spectral));
      }
      const std::size_t count = cfg.kind == ExperimentKind::single ? 1 : cfg.K;
      rs.records = run_samples(count, [&](std::size_t i) { return run_perturbed_sample(ctx, i); });
      agg["mean"] = mean_scalars(rs.records);
      agg["omega_levels"] = cfg.M_levels;
      agg["omega_fraction"] = omega_event_count(rs.records, cfg.M_levels);
      break;
    }
    case ExperimentKind::nzero_sweep: {
      ctx.need_kernel();
      if (cfg.randomize) ctx.need_cubes();
      rs.records = run_samples(cfg.K, [&](std::size_t i) { return run_sweep_sample(ctx, i); });
      const json mean = mean_scalars(rs.records);
      agg["mean"] = mean;
      for (const char* what : {"max_Mw_drift", "max_Ew_drift"}) {
        std::vector<double> series;
        for (double N0 : cfg.N0_list) series.push_back(mean.at(n0_key(what, N0)).get<double>());
        bool ordered = true;
        for (std::size_t k = 1; k < series.size(); ++k) ordered = ordered && series[k] <= 1.1 * series[k - 1];
        agg[std::string(what) + "_by_N0"] = series;
        agg[std::string(what) + "_non_increasing"] = ordered;
      }
      agg["N0_list"] = cfg.N0_list;
      break;
    }
    case ExperimentKind::tail_study: {
      if (cfg.randomize) ctx.need_cubes();
      rs.records = run_samples(cfg.K, [&](std::size_t i) { return run_tail_sample(ctx, i); });
      std::vector<double> y;
      for (const auto& r : rs.records) y.push_back(r.scalars.at("y_norm"));
      const TailReport tail = tail_statistics(y, cfg.lambda_grid);
      agg["tail"] = tail.to_json();
      agg["gaussian_tail"] = tail.slope < 0.0 && tail.r2 > 0.85;
      agg["rayleigh_calibration"] =
          tail_statistics(rayleigh_samples(cfg.master_seed, std::max<std::size_t>(cfg.K, 500)), {}).to_json();
      agg["mean"] = mean_scalars(rs.records);
      break;
    }
    case ExperimentKind::inequality_suite:
      agg["checks"] = run_inequalities(ctx);
      break;
    case ExperimentKind::morawetz_audit:
      ctx.need_kernel();
      if (cfg.randomize) ctx.need_cubes();
      agg["audit"] = run_morawetz(ctx);
      break;
  }

  json recs = json::array();
  for (const auto& r : rs.records) {
    json j = r.to_json();
    j["config"] = summary["config"];
    if (r.omega) {
      std::vector<bool> inside;
      for (double M : cfg.M_levels) inside.push_back(r.omega->inside(M));
      j["omega_inside"] = inside;
    }
    write_text(out_dir / "records" / ("sample_" + padded(r.index) + ".json"), dump_json(j));
    recs.push_back(j);
  }
  summary["records"] = recs;
  summary["aggregate"] = agg;
  rs.summary = summary;
  write_text(out_dir / "summary.json", dump_json(summary));
  return rs;
}

json build_report(const fs::path& run_dir) {
  std::vector<fs::path> files;
  if (fs::exists(run_dir / "records")) {
    for (const auto& e : fs::directory_iterator(run_dir / "records")) {
      if (e.path().extension() == ".json") files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<RunRecord> recs;
  for (const auto& f : files) {
    std::ifstream is(f);
    try {
      recs.push_back(RunRecord::from_json(json::parse(is)));
    } catch (const json::parse_error& e) {
      throw FormatError("record " + f.string() + " is not valid JSON: " + e.what());
    }
  }
  std::set<std::string> keys;
  for (const auto& r : recs) {
    for (const auto& [k, v] : r.scalars) keys.insert(k);
  }
  std::ostringstream csv;
  csv << "index,seed";
  for (const auto& k : keys) csv << ',' << k;
  csv << '\n' << std::setprecision(17);
  for (const auto& r : recs) {
    csv << r.index << ',' << r.seed;
    for (const auto& k : keys) {
      csv << ',';
      if (auto it = r.scalars.find(k); it != r.scalars.end()) csv << it->second;
    }
    csv << '\n';
  }
  write_text(run_dir / "report.csv", csv.str());

  json rep;
  rep["records"] = recs.size();
  rep["mean"] = recs.empty() ? json::object() : mean_scalars(recs);
  const bool have_omega =
      !recs.empty() && std::all_of(recs.begin(), recs.end(), [](const auto& r) { return r.omega.has_value(); });
  if (have_omega) {
    std::vector<double> levels{1.0, 2.0, 4.0, 8.0};
    if (fs::exists(run_dir / "summary.json")) {
      std::ifstream is(run_dir / "summary.json");
      const json s = json::parse(is, nullptr, false);
      if (!s.is_discarded() && s.contains("config")) levels = s["config"].value("M_levels", levels);
    }
    rep["omega_levels"] = levels;
    rep["omega_fraction"] = omega_event_count(recs, levels);
  }
  write_text(run_dir / "report.json", dump_json(rep));
  return rep;
}

}  // namespace hartree
