#pragma once

// Distance of a perturbed state from the attractor, in one of three norms:
// plain Euclidean, component-wise relative, or the mechanical-energy norm used
// for the spring/magnet wagon (work done against the clamped restoring force
// plus kinetic energy).

#include <cmath>
#include <optional>
#include <span>

#include "basin/core.hpp"

namespace basin {

enum class DistanceKind { Euclidean, Energy, Relative };

inline const char* to_string(DistanceKind k) {
  switch (k) {
    case DistanceKind::Euclidean: return "euclidean";
    case DistanceKind::Energy: return "energy";
    default: return "relative";
  }
}

/// Physical constants of the wagon needed by the energy norm.
struct EnergyParams {
  double mass = 1.0;
  double stiffness = 1.0;          // linear spring constant k
  double magnetic_stiffness = 1.0; // magnet strength k_m
  double magnet_position = 5.0;    // magnet location a (domain is x < a)
};

struct DistanceSpec {
  DistanceKind kind = DistanceKind::Euclidean;
  /// Reference point (the attractor). For Energy this is (x_eq, 0).
  State reference;
  std::optional<EnergyParams> energy;        // required for Energy
  std::optional<State> relative_scale;       // required for Relative, all != 0

  void validate() const {
    if (reference.empty()) throw ConfigError("distance reference is empty");
    if (kind == DistanceKind::Energy) {
      if (!energy) throw ConfigError("energy distance requires energy params");
      if (reference.size() != 2)
        throw ConfigError("energy distance is defined for 2-d wagon states");
      if (!(energy->mass > 0.0))
        throw ConfigError("energy distance requires positive mass");
    }
    if (kind == DistanceKind::Relative) {
      if (!relative_scale || relative_scale->size() != reference.size())
        throw ConfigError("relative distance requires a scale per component");
      for (double s : *relative_scale)
        if (s == 0.0)
          throw ConfigError("relative distance scale components must be nonzero");
    }
  }
};

namespace detail {

/// Adaptive Simpson quadrature with absolute tolerance. The integrands here
/// are bounded with at most a kink, so straight recursion with the classic
/// 15-fold error estimate is enough.
template <class F>
double adaptive_simpson_rec(const F& f, double a, double b, double fa,
                            double fm, double fb, double whole, double tol,
                            int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol) {
  if (a == b) return 0.0;
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace detail

/// Work needed to displace the wagon quasi-statically from x_eq to x0 against
/// the net restoring force, never crediting stretches where the force assists
/// the motion (the integrand clamps at zero there), plus kinetic energy.
/// Quadrature tolerance is 1e-9 absolute.
inline double energy_distance(const EnergyParams& p, double x_eq, double x0,
                              double y0) {
  const double k = p.stiffness, km = p.magnetic_stiffness, a = p.magnet_position;
  // Net force opposing motion away from equilibrium; sign-flipped for
  // leftward displacements so the clamp always measures resistance.
  double potential = 0.0;
  if (x0 > x_eq) {
    auto f = [&](double x) {
      double d = x - a;
      return std::max(0.0, k * x - km / (d * d));
    };
    potential = detail::adaptive_simpson(f, x_eq, x0, 1e-9);
  } else if (x0 < x_eq) {
    auto f = [&](double x) {
      double d = x - a;
      return std::max(0.0, km / (d * d) - k * x);
    };
    potential = detail::adaptive_simpson(f, x0, x_eq, 1e-9);
  }
  return potential + 0.5 * p.mass * y0 * y0;
}

/// Distance from `x` to the reference in the spec's norm. Zero exactly at the
/// reference and positive elsewhere.
inline double distance(const DistanceSpec& spec, std::span<const double> x) {
  switch (spec.kind) {
    case DistanceKind::Euclidean: {
      double s = 0.0;
      for (std::size_t i = 0; i < spec.reference.size(); ++i) {
        double d = x[i] - spec.reference[i];
        s += d * d;
      }
      return std::sqrt(s);
    }
    case DistanceKind::Relative: {
      const State& sc = *spec.relative_scale;
      double s = 0.0;
      for (std::size_t i = 0; i < spec.reference.size(); ++i) {
        double d = (x[i] - spec.reference[i]) / sc[i];
        s += d * d;
      }
      return std::sqrt(s);
    }
    case DistanceKind::Energy:
      return energy_distance(*spec.energy, spec.reference[0], x[0], x[1]);
  }
  return 0.0;  // unreachable
}

}  // namespace basin
