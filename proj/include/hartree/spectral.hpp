#pragma once

#include <functional>
#include <limits>
#include <span>
#include <variant>
#include <vector>

#include "hartree/field.hpp"

namespace hartree {

/// A Fourier multiplier m(ξ) with an explicit value at ξ = 0.
struct MultiplierSymbol {
  std::function<Complex(std::span<const double> xi, double abs_xi)> evaluator;
  Complex zero_mode{0.0, 0.0};
};

namespace symbols {
MultiplierSymbol identity();
/// |ξ|^s; the zero mode is set to `zero_mode` (0 by default).
MultiplierSymbol abs_grad_pow(double s, Complex zero_mode = 0.0);
/// ⟨ξ⟩^s = (1 + |ξ|²)^{s/2}.
MultiplierSymbol bracket_pow(double s);
/// i ξ_axis (a partial derivative).
MultiplierSymbol partial(int axis);
}  // namespace symbols

/// Multiplies frequency coefficients by m(ξ). The output keeps the input's
/// representation. Throws when m is non-finite at a nonzero lattice frequency.
Field apply_multiplier(const Field& f, const MultiplierSymbol& m);

/// Convenience wrappers for the most common multipliers.
Field abs_grad(const Field& f, double s);       // |∇|^s, zero mode dropped
Field bracket_grad(const Field& f, double s);   // ⟨∇⟩^s
Field partial_derivative(const Field& f, int axis);  // Nyquist mode zeroed

enum class Band { at_most, exactly, above, at_least };
enum class CutoffProfile { smooth, sharp };

/// The bump φ: 1 on [0,1], 0 on [2,∞), C^∞ in between.
double lp_bump(double r) noexcept;

/// Littlewood–Paley projection. With the smooth profile:
///   P_{≤N} ↔ φ(ξ/N), P_{>N} ↔ 1-φ(ξ/N), P_N ↔ φ(ξ/N)-φ(2ξ/N),
///   P_{≥N} = P_{>N/2} ↔ 1-φ(2ξ/N).
/// The sharp profile replaces φ(r) by the indicator of r ≤ 1. N must be an
/// exact power of two.
Field lp_project(const Field& f, Band band, double N,
                 CutoffProfile profile = CutoffProfile::smooth);

/// True when N = 2^k for some integer k.
bool is_dyadic(double N) noexcept;

/// e^{itΔ}: multiplies each coefficient by e^{-i|ξ|²t}.
Field free_propagate(const Field& f, double t);

struct Lp {
  double p;
};
struct Hs {
  double s;
};
struct HsDot {
  double s;
};
using NormKind = std::variant<Lp, Hs, HsDot>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// L^p by rectangle rule; H^s and Ḣ^s by Plancherel (Ḣ^s drops ξ = 0).
double norm(const Field& f, const NormKind& kind);

/// L^p norm of real samples with the grid's quadrature weight.
double lp_norm(const Grid& grid, std::span<const double> values, double p);

/// Energy-critical rescaling u ↦ λ^{(d-2)/2} u(λx) resampled onto
/// `target` (side L/λ, any even n) by zero-padding or truncating the
/// Fourier series.
Field scale_field(const Field& f, double lambda, const Grid& target);

}  // namespace hartree
