#include "hartree/inequality_lab.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>

#include "hartree/error.hpp"
#include "hartree/functionals.hpp"
#include "hartree/kernels.hpp"
#include "hartree/randomization.hpp"
#include "hartree/rng.hpp"
#include "hartree/spectral.hpp"

namespace hartree {

FieldClass parse_field_class(const std::string& name) {
  if (name == "band_limited") return FieldClass::band_limited;
  if (name == "gaussian_bump") return FieldClass::gaussian_bump;
  if (name == "randomized") return FieldClass::randomized;
  throw ParameterError("unknown field class '" + name + "'");
}

std::string to_string(FieldClass c) {
  switch (c) {
    case FieldClass::band_limited: return "band_limited";
    case FieldClass::gaussian_bump: return "gaussian_bump";
    case FieldClass::randomized: return "randomized";
  }
  return "?";
}

Grid EnsembleSpec::grid() const { return make_grid(d, n, L); }

void EnsembleSpec::validate() const {
  (void)grid();
  if (field_class == FieldClass::band_limited && !(band > 0.0)) {
    throw ParameterError("band-limited ensembles need band > 0");
  }
  if (field_class == FieldClass::randomized) (void)RandomizationParams::make(s, a);
}

namespace {

constexpr std::uint64_t kRandomizedStream = 0x52414E444F4D4953ULL;

std::uint64_t wave_key(const Grid& g, const Index& idx) {
  std::uint64_t h = 0;
  for (int a = 0; a < g.dim(); ++a) {
    const auto k = static_cast<std::uint64_t>(g.wave_index(idx[a]) + (1 << 20));
    h = splitmix64_mix(h ^ (k + static_cast<std::uint64_t>(a) * kGoldenGamma));
  }
  return h;
}

Field normalized(Field f) {
  const double m = std::sqrt(mass(f));
  if (m > 0.0) f *= Complex(1.0 / m, 0.0);
  return f;
}

Field gaussian_bump(const Grid& g, SplitMix64& rng) {
  const double L = g.length();
  std::array<double, kMaxDim> center{}, kick{};
  for (int a = 0; a < g.dim(); ++a) {
    center[a] = (rng.uniform() - 0.5) * L / 4.0;
    kick[a] = 2.0 * rng.uniform() - 1.0;
  }
  const double width = L / 12.0 * (1.0 + rng.uniform());
  return Field::sample(g, [&](std::span<const double> x) {
    double r2 = 0.0, phase = 0.0;
    for (std::size_t a = 0; a < x.size(); ++a) {
      r2 += (x[a] - center[a]) * (x[a] - center[a]);
      phase += kick[a] * x[a];
    }
    return std::exp(-0.5 * r2 / (width * width)) * std::polar(1.0, phase);
  });
}

// Lazily produces ensemble members so large grids need not hold them all.
class EnsembleSource {
 public:
  explicit EnsembleSource(const EnsembleSpec& spec) : spec_(spec), grid_(spec.grid()) {
    spec.validate();
    if (spec.field_class == FieldClass::randomized) {
      cubes_.emplace(build_cube_system(grid_, RandomizationParams::make(spec.s, spec.a)));
    }
  }

  const Grid& grid() const { return grid_; }

  Field member(std::size_t i) const {
    const std::uint64_t stream = derive_seed(spec_.seed, i);
    switch (spec_.field_class) {
      case FieldClass::band_limited: {
        Field f = Field::zeros(grid_, Rep::frequency);
        const auto ksq = grid_.frequency_squared();
        const double band2 = spec_.band * spec_.band;
        for (std::size_t x = 0; x < f.size(); ++x) {
          if (ksq[x] <= band2) f.data()[x] = coefficient(stream, wave_key(grid_, grid_.unravel(x)));
        }
        return normalized(f.to_physical());
      }
      case FieldClass::gaussian_bump: {
        SplitMix64 rng(stream);
        return normalized(gaussian_bump(grid_, rng));
      }
      case FieldClass::randomized: {
        SplitMix64 rng(stream);
        const Field base = gaussian_bump(grid_, rng);
        const RandomCoefficients g =
            sample_coefficients(derive_seed(stream, kRandomizedStream), cubes_->cube_count());
        return normalized(randomize(base, *cubes_, g));
      }
    }
    return Field::zeros(grid_);
  }

 private:
  EnsembleSpec spec_;
  Grid grid_;
  std::optional<CubeSystem> cubes_;
};

struct Stats {
  double max = 0.0;
  double mean = 0.0;
  double spread = 0.0;
  bool finite = true;
};

Stats stats_of(const std::vector<double>& r) {
  Stats s;
  if (r.empty()) return s;
  s.max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (double x : r) {
    if (!std::isfinite(x)) s.finite = false;
    s.max = std::max(s.max, x);
    sum += x;
  }
  s.mean = sum / r.size();
  double var = 0.0;
  for (double x : r) var += (x - s.mean) * (x - s.mean);
  var /= r.size();
  s.spread = s.mean != 0.0 ? std::sqrt(var) / std::abs(s.mean) : 0.0;
  return s;
}

using RatioFn = std::function<void(const Field&, std::vector<double>&)>;

struct CheckPlan {
  RatioFn ratio;
  enum Kind { inequality, bernstein, orthogonality, equivalence } kind = inequality;
  bool refinable = true;
};

double hls_exponent(int d, double gamma, double p) {
  const double inv_q = 1.0 / p + gamma / d - 1.0;
  if (!(gamma > 0.0 && gamma < d) || !(p > 1.0) || !(inv_q > 0.0) || !(inv_q < 1.0 / p)) {
    throw ParameterError(
        "HLS requires 0<gamma<d and 1<p<q<infinity with 1/q = 1/p + gamma/d - 1");
  }
  return 1.0 / inv_q;
}

CheckPlan plan_for(const std::string& name, const EnsembleSpec& spec, const CheckParams& prm,
                   const Grid& g, std::vector<std::pair<double, double>>* annuli) {
  const int d = g.dim();
  if (name == "bernstein") {
    if (!is_dyadic(prm.bernstein_N)) throw ParameterError("Bernstein scale must be dyadic");
    return {[&prm](const Field& f, std::vector<double>& out) {
              const double N = prm.bernstein_N;
              const Field P = lp_project(f, Band::exactly, N);
              const double base = norm(P, Lp{2.0});
              if (!(base > 0.0)) return;
              for (double s : prm.bernstein_s) {
                out.push_back(norm(abs_grad(P, s), Lp{2.0}) / (std::pow(N, s) * base));
              }
            },
            CheckPlan::bernstein, false};
  }
  if (name == "orthogonality") {
    auto cs = std::make_shared<CubeSystem>(
        build_cube_system(g, RandomizationParams::make(spec.s, spec.a)));
    return {[cs](const Field& f, std::vector<double>& out) {
              const std::vector<double> e = box_energies(f, *cs);
              out.push_back(std::accumulate(e.begin(), e.end(), 0.0) / mass(f));
            },
            CheckPlan::orthogonality, false};
  }
  if (name == "box_lq_lp") {
    auto cs = std::make_shared<CubeSystem>(
        build_cube_system(g, RandomizationParams::make(spec.s, spec.a)));
    const double dk = g.frequency_spacing();
    const int a = spec.a;
    const std::size_t limit = prm.box_cells;
    return {[cs, dk, d, a, limit, annuli](const Field& f, std::vector<double>& out) {
              const std::vector<double> e = box_energies(f, *cs);
              std::vector<std::size_t> order(e.size());
              std::iota(order.begin(), order.end(), 0);
              std::stable_sort(order.begin(), order.end(),
                               [&](std::size_t x, std::size_t y) { return e[x] > e[y]; });
              double worst = 0.0;
              for (std::size_t r = 0; r < std::min(limit, order.size()); ++r) {
                const std::size_t j = order[r];
                if (!(e[j] > 0.0)) break;
                const Field B = box_project(f, j, *cs).to_physical();
                double sup = 0.0;
                for (const auto& z : B.data()) sup = std::max(sup, std::abs(z));
                const double vol = static_cast<double>(cs->members(j).size()) * std::pow(dk, d);
                worst = std::max(worst, sup / (std::sqrt(vol * e[j])));
                if (annuli) {
                  const double lemma = sup / norm(bracket_grad(B, -0.5 * a * d), Lp{2.0});
                  const double N = cs->cell(j).annulus;
                  auto it = std::find_if(annuli->begin(), annuli->end(),
                                         [N](const auto& p) { return p.first == N; });
                  if (it == annuli->end()) annuli->emplace_back(N, lemma);
                  else it->second = std::max(it->second, lemma);
                }
              }
              out.push_back(worst);
            },
            CheckPlan::inequality, true};
  }
  if (name == "lieb_loss") {
    if (d < 4) throw ParameterError("Lieb-Loss check requires d >= 4");
    return {[](const Field& f, std::vector<double>& out) {
              const InteractionQuantity q = interaction_quantity(f);
              out.push_back(q.kernel_form / q.surrogate_form);
            },
            CheckPlan::equivalence, false};
  }
  if (name == "visan") {
    if (d < 4) throw ParameterError("Visan's estimate requires d > 3");
    return {[d](const Field& f, std::vector<double>& out) {
              const double lhs = std::pow(norm(abs_grad(f, -0.25 * (d - 3)), Lp{4.0}), 2.0);
              const Field rho = Field(f.grid(), Rep::physical, [&] {
                const Field p = f.to_physical();
                std::vector<Complex> r(p.size());
                for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::norm(p.data()[i]);
                return r;
              }());
              out.push_back(lhs / norm(abs_grad(rho, -0.5 * (d - 3)), Lp{2.0}));
            },
            CheckPlan::inequality, true};
  }
  if (name == "gagliardo_nirenberg") {
    return {[](const Field& f, std::vector<double>& out) {
              const double lhs = std::pow(norm(f, Lp{3.0}), 3.0);
              const double rhs = norm(f, Hs{1.0}) * std::pow(norm(abs_grad(f, -0.5), Lp{4.0}), 2.0);
              out.push_back(lhs / rhs);
            },
            CheckPlan::inequality, true};
  }
  if (name == "hardy") {
    const double s = prm.hardy_s;
    if (!(s > 0.0 && s < 0.5 * d)) {
      throw ParameterError("Hardy's inequality requires 0<s<\\frac{d}{2}, got s=" +
                           std::to_string(s) + " in d=" + std::to_string(d));
    }
    std::vector<double> weight(g.size());
    std::array<double, kMaxDim> x{};
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Index idx = g.unravel(i);
      double r2 = 0.0;
      for (int a = 0; a < d; ++a) {
        x[a] = g.position(idx[a]);
        r2 += x[a] * x[a];
      }
      weight[i] = r2 > 0.0 ? std::pow(r2, -s) : half_cell_average(d, g.spacing(), 2.0 * s);
    }
    const double vol = g.cell_volume();
    return {[weight = std::move(weight), vol, s](const Field& f, std::vector<double>& out) {
              const Field p = f.to_physical();
              double acc = 0.0;
              for (std::size_t i = 0; i < p.size(); ++i) acc += weight[i] * std::norm(p.data()[i]);
              out.push_back(std::sqrt(acc * vol) / norm(f, HsDot{s}));
            },
            CheckPlan::inequality, true};
  }
  if (name == "hls") {
    const double p = prm.hls_p;
    const double q = hls_exponent(d, prm.hls_gamma, p);
    auto kernel = std::make_shared<ConvolutionKernel>(
        ConvolutionKernel::from_samples(g, power_kernel_samples(g, prm.hls_gamma)));
    return {[kernel, p, q](const Field& f, std::vector<double>& out) {
              const Field fp = f.to_physical();
              const std::vector<Complex> conv = kernel->apply(fp.data());
              std::vector<double> mag(conv.size());
              for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::abs(conv[i]);
              out.push_back(lp_norm(fp.grid(), mag, q) / norm(fp, Lp{p}));
            },
            CheckPlan::inequality, true};
  }
  throw ParameterError("unknown check '" + name + "'");
}

std::vector<double> collect(const std::string& name, const EnsembleSpec& spec,
                            const CheckParams& prm, CheckPlan::Kind* kind, bool* refinable,
                            std::vector<std::pair<double, double>>* annuli) {
  const EnsembleSource source(spec);
  const CheckPlan plan = plan_for(name, spec, prm, source.grid(), annuli);
  if (kind) *kind = plan.kind;
  if (refinable) *refinable = plan.refinable;
  std::vector<double> ratios;
  for (std::size_t i = 0; i < spec.count; ++i) plan.ratio(source.member(i), ratios);
  return ratios;
}

}  // namespace

std::vector<Field> make_ensemble(const EnsembleSpec& spec) {
  std::vector<Field> out;
  if (spec.count == 0) return out;
  const EnsembleSource source(spec);
  out.reserve(spec.count);
  for (std::size_t i = 0; i < spec.count; ++i) out.push_back(source.member(i));
  return out;
}

const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names = {
      "bernstein", "orthogonality", "box_lq_lp", "lieb_loss",
      "visan",     "gagliardo_nirenberg", "hardy", "hls"};
  return names;
}

CheckReport run_check(const std::string& name, const EnsembleSpec& spec, const CheckParams& params) {
  if (spec.count < 1) throw ParameterError("ensemble count must be at least 1");
  CheckReport rep;
  rep.name = name;
  rep.spec = spec;
  CheckPlan::Kind kind = CheckPlan::inequality;
  bool refinable = false;
  rep.ratios = collect(name, spec, params, &kind, &refinable, &rep.per_annulus);
  std::sort(rep.per_annulus.begin(), rep.per_annulus.end());
  const Stats st = stats_of(rep.ratios);
  rep.max_ratio = st.max;
  rep.mean_ratio = st.mean;
  rep.relative_spread = st.spread;
  rep.all_finite = st.finite && !rep.ratios.empty();

  if (params.refine && refinable) {
    EnsembleSpec fine = spec;
    fine.n = 2 * spec.n;
    const Stats fs = stats_of(collect(name, fine, params, nullptr, nullptr, nullptr));
    StabilityRecord s;
    s.n_coarse = spec.n;
    s.n_fine = fine.n;
    s.max_coarse = st.max;
    s.max_fine = fs.max;
    s.growth = fs.max / st.max;
    rep.all_finite = rep.all_finite && fs.finite;
    rep.stability = s;
  }

  switch (kind) {
    case CheckPlan::bernstein: {
      rep.rule = "2^{-|s|} <= ratio <= 2^{|s|+1} for every s and sample";
      rep.pass = rep.all_finite;
      const std::size_t ns = params.bernstein_s.size();
      for (std::size_t i = 0; i < rep.ratios.size(); ++i) {
        const double s = std::abs(params.bernstein_s[i % ns]);
        if (rep.ratios[i] < std::pow(2.0, -s) || rep.ratios[i] > std::pow(2.0, s + 1.0)) rep.pass = false;
      }
      break;
    }
    case CheckPlan::orthogonality: {
      rep.rule = "|ratio - 1| < 1e-10 for every sample";
      rep.pass = rep.all_finite;
      for (double r : rep.ratios) rep.pass = rep.pass && std::abs(r - 1.0) < 1e-10;
      break;
    }
    case CheckPlan::equivalence: {
      std::ostringstream os;
      os << "std/mean of the ratios < " << params.lieb_loss_limit;
      rep.rule = os.str();
      rep.pass = rep.all_finite && rep.relative_spread < params.lieb_loss_limit;
      break;
    }
    case CheckPlan::inequality: {
      std::ostringstream os;
      os << "all ratios finite";
      if (rep.stability) os << " and max grows by < " << params.stability_limit << "x under n -> 2n";
      if (name == "box_lq_lp") os << " and ratio <= (2pi)^{-d/2}";
      rep.rule = os.str();
      rep.pass = rep.all_finite && (!rep.stability || rep.stability->growth < params.stability_limit);
      if (name == "box_lq_lp") {
        rep.pass = rep.pass && rep.max_ratio <= std::pow(2.0 * std::numbers::pi, -0.5 * spec.d) * (1.0 + 1e-9);
      }
      break;
    }
  }
  return rep;
}

nlohmann::json CheckReport::to_json() const {
  nlohmann::json j;
  j["check"] = name;
  j["ensemble"] = {{"d", spec.d}, {"n", spec.n}, {"L", spec.L},
                   {"field_class", to_string(spec.field_class)}, {"count", spec.count},
                   {"seed", spec.seed}, {"band", spec.band}, {"s", spec.s}, {"a", spec.a}};
  j["ratios"] = ratios;
  j["max_ratio"] = max_ratio;
  j["mean_ratio"] = mean_ratio;
  j["relative_spread"] = relative_spread;
  j["all_finite"] = all_finite;
  if (stability) {
    j["stability"] = {{"n_coarse", stability->n_coarse}, {"n_fine", stability->n_fine},
                      {"max_coarse", stability->max_coarse}, {"max_fine", stability->max_fine},
                      {"growth", stability->growth}};
  }
  if (!per_annulus.empty()) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [N, v] : per_annulus) arr.push_back({{"N", N}, {"max_lemma_ratio", v}});
    j["per_annulus"] = arr;
  }
  j["rule"] = rule;
  j["pass"] = pass;
  return j;
}

std::string summary_csv(const std::vector<CheckReport>& reports) {
  std::ostringstream os;
  os << "check,dimension,ensemble,max_ratio,stability_factor,pass\n" << std::setprecision(10);
  for (const auto& r : reports) {
    os << r.name << ',' << r.spec.d << ',' << to_string(r.spec.field_class) << ',' << r.max_ratio << ',';
    if (r.stability) os << r.stability->growth;
    os << ',' << (r.pass ? "true" : "false") << '\n';
  }
  return os.str();
}

}  // namespace hartree
