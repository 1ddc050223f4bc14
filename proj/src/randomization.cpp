#include "hartree/randomization.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <tuple>

#include "hartree/error.hpp"
#include "hartree/rng.hpp"
#include "hartree/spectral.hpp"

namespace hartree {

double RandomizationParams::lower_bound(double s) noexcept {
  return std::max({4.0 - 2.0 * s, 5.0 - 4.0 * s, -0.5 * s, 3.0});
}

int RandomizationParams::minimal_a(double s) noexcept {
  return static_cast<int>(std::floor(lower_bound(s))) + 1;
}

RandomizationParams RandomizationParams::make(double s, int a) {
  if (!std::isfinite(s)) throw ParameterError("regularity s must be finite");
  const struct {
    double value;
    const char* text;
  } bounds[] = {{4.0 - 2.0 * s, "4-2s"}, {5.0 - 4.0 * s, "5-4s"}, {-0.5 * s, "-s/2"}, {3.0, "3"}};
  for (const auto& b : bounds) {
    if (!(a > b.value)) {
      std::ostringstream msg;
      msg << "cube exponent a=" << a << " violates a > " << b.text << " = " << b.value
          << " (need a > max{4-2s, 5-4s, -s/2, 3} for s=" << s << ")";
      throw ParameterError(msg.str());
    }
  }
  return RandomizationParams(s, a);
}

namespace {

struct CellKey {
  int annulus_exp;                 // -1 for the central cube
  std::array<long, kMaxDim> coord; // integer cell coordinates
  auto tie() const { return std::tie(annulus_exp, coord); }
  friend bool operator<(const CellKey& a, const CellKey& b) { return a.tie() < b.tie(); }
  friend bool operator==(const CellKey& a, const CellKey& b) { return a.tie() == b.tie(); }
};

constexpr double kTol = 1e-12;

}  // namespace

CubeSystem build_cube_system(const Grid& grid, const RandomizationParams& params) {
  CubeSystem cs(grid, params);
  const int d = grid.dim();
  const double dk = grid.frequency_spacing();
  const std::size_t total = grid.size();

  std::vector<CellKey> keys(total);
  for (std::size_t i = 0; i < total; ++i) {
    const Index idx = grid.unravel(i);
    double sup = 0.0;
    for (int a = 0; a < d; ++a) sup = std::max(sup, std::abs(dk * grid.wave_index(idx[a])));
    CellKey key{};
    if (sup <= 1.0 + kTol) {
      key.annulus_exp = -1;
    } else {
      // N < sup ≤ 2N with N = 2^e, e ≥ 0.
      int e = 0;
      while (2.0 * std::ldexp(1.0, e) * (1.0 + kTol) < sup) ++e;
      key.annulus_exp = e;
      const double N = std::ldexp(1.0, e);
      const double side = std::pow(N, -params.a());
      for (int a = 0; a < d; ++a) {
        const int k = grid.wave_index(idx[a]);
        key.coord[a] = side >= dk * (1.0 - kTol)
                           ? static_cast<long>(std::floor(dk * k / side + kTol))
                           : static_cast<long>(k);
      }
    }
    keys[i] = key;
  }

  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return keys[x] < keys[y]; });

  cs.owner_.resize(total);
  cs.members_.reserve(total);
  for (std::size_t pos = 0; pos < total; ++pos) {
    const std::size_t i = order[pos];
    if (pos == 0 || !(keys[i] == keys[order[pos - 1]])) {
      cs.offsets_.push_back(cs.members_.size());
      const int e = keys[i].annulus_exp;
      CubeCell cell{};
      if (e < 0) {
        cell.annulus = 0.0;
        cell.side = 2.0;
      } else {
        const double N = std::ldexp(1.0, e);
        const double side = std::pow(N, -params.a());
        cell.annulus = N;
        cell.side = side >= dk * (1.0 - kTol) ? side : dk;
      }
      cs.cells_.push_back(cell);
    }
    cs.owner_[i] = static_cast<std::uint32_t>(cs.cells_.size() - 1);
    cs.members_.push_back(i);
  }
  cs.offsets_.push_back(cs.members_.size());

  for (std::size_t j = 0; j < cs.cells_.size(); ++j) {
    const CubeCell& c = cs.cells_[j];
    if (cs.annuli_.empty() || cs.annuli_.back().N != c.annulus) {
      AnnulusSummary s{};
      s.N = c.annulus;
      s.nominal_side = c.annulus == 0.0 ? 2.0 : std::pow(c.annulus, -params.a());
      s.side_used = c.side;
      s.sub_lattice = c.annulus != 0.0 && s.nominal_side < dk * (1.0 - kTol);
      cs.annuli_.push_back(s);
    }
    cs.annuli_.back().cells += 1;
    cs.annuli_.back().lattice_points += cs.offsets_[j + 1] - cs.offsets_[j];
    cs.max_annulus_ = std::max(cs.max_annulus_, c.annulus);
  }
  return cs;
}

std::span<const std::size_t> CubeSystem::members(std::size_t j) const {
  if (j >= cells_.size()) throw ParameterError("cube index out of range");
  return std::span<const std::size_t>(members_).subspan(offsets_[j], offsets_[j + 1] - offsets_[j]);
}

nlohmann::json CubeSystem::summary() const {
  nlohmann::json annuli = nlohmann::json::array();
  for (const auto& a : annuli_) {
    annuli.push_back({{"N", a.N},
                      {"cells", a.cells},
                      {"lattice_points", a.lattice_points},
                      {"nominal_side", a.nominal_side},
                      {"side_used", a.side_used},
                      {"sub_lattice", a.sub_lattice}});
  }
  return {{"parameters", {{"s", params_.s()}, {"a", params_.a()}}},
          {"grid", {{"d", grid_.dim()}, {"n", grid_.points_per_axis()}, {"L", grid_.length()}}},
          {"cube_count", cells_.size()},
          {"max_annulus", max_annulus_},
          {"annuli", annuli}};
}

Complex coefficient(std::uint64_t seed, std::size_t j) noexcept {
  SplitMix64 stream(derive_seed(seed, j));
  return stream.complex_gaussian();
}

RandomCoefficients sample_coefficients(std::uint64_t seed, std::size_t count) {
  if (count < 1) throw ParameterError("coefficient count must be at least 1");
  RandomCoefficients out;
  out.seed = seed;
  out.values.resize(count);
  for (std::size_t j = 0; j < count; ++j) out.values[j] = coefficient(seed, j);
  return out;
}

Field box_project(const Field& f, std::size_t j, const CubeSystem& cs) {
  require_same_grid(f.grid(), cs.grid());
  const auto idx = cs.members(j);
  const Field in = f.to_frequency();
  Field out = Field::zeros(f.grid(), Rep::frequency);
  for (std::size_t i : idx) out.data()[i] = in.data()[i];
  return out.in(f.rep());
}

Field randomize(const Field& f, const CubeSystem& cs, const RandomCoefficients& coeffs) {
  require_same_grid(f.grid(), cs.grid());
  if (coeffs.values.size() < cs.cube_count()) {
    throw ParameterError("need " + std::to_string(cs.cube_count()) + " coefficients, got " +
                         std::to_string(coeffs.values.size()));
  }
  Field out = f.to_frequency();
  auto data = out.data();
  for (std::size_t i = 0; i < data.size(); ++i) data[i] *= coeffs.values[cs.owner(i)];
  return out.in(f.rep());
}

std::vector<double> box_energies(const Field& f, const CubeSystem& cs) {
  require_same_grid(f.grid(), cs.grid());
  const Field in = f.to_frequency();
  std::vector<double> out(cs.cube_count(), 0.0);
  const double w = std::pow(f.grid().frequency_spacing(), f.grid().dim());
  for (std::size_t i = 0; i < in.size(); ++i) out[cs.owner(i)] += w * std::norm(in.data()[i]);
  return out;
}

HighLowSplit split_high_low(const Field& f, double N0) {
  if (!is_dyadic(N0)) throw ParameterError("N0 must be dyadic");
  const Field in = f.to_frequency();
  Field high = Field::zeros(f.grid(), Rep::frequency);
  Field low = Field::zeros(f.grid(), Rep::frequency);
  const auto ksq = f.grid().frequency_squared();
  for (std::size_t i = 0; i < in.size(); ++i) {
    const double keep_low = lp_bump(2.0 * std::sqrt(ksq[i]) / N0);
    low.data()[i] = keep_low * in.data()[i];
    high.data()[i] = in.data()[i] - low.data()[i];
  }
  return {high.in(f.rep()), low.in(f.rep())};
}

}  // namespace hartree
