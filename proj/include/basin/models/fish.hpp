#pragma once

// Stage-structured consumer-resource population: juvenile biomass J, adult
// biomass A, shared resource R.
//
//   dJ/dt = (w_J(R) - v(w_J(R)) - d_J - h_J) J + w_A(R) A
//   dA/dt = v(w_J(R)) J - (d_A + h_A) A
//   dR/dt = r (R_max - R) - I_max R/(H+R) (J + q A)
//
// w_J, w_A are net biomass production per unit biomass (clamped at 0); v is
// the maturation rate with a removable singularity at x = d_J + h_J. The
// system has a unique global attractor: either a positive equilibrium or the
// extinction state (0, 0, R_max).

#include <cmath>
#include <stdexcept>

#include "basin/core.hpp"
#include "basin/linalg.hpp"

namespace basin::models {

struct FishParams {
  double half_saturation = 1.0;    // H
  double maintenance = 1.0;        // T
  double turnover = 1.0;           // r
  double ingestion_max = 10.0;     // I_max
  double juvenile_mortality = 0.1; // d_J
  double adult_mortality = 0.1;    // d_A
  double ingestion_ratio = 0.85;   // q (adult vs juvenile)
  double efficiency = 0.5;         // sigma
  double resource_max = 2.0;       // R_max
  double size_ratio = 0.01;        // z = s_born / s_max
  double juvenile_harvest = 0.0;   // h_J
  double adult_harvest = 0.0;      // h_A

  void validate() const {
    if (!(half_saturation > 0.0) || !(maintenance >= 0.0) ||
        !(turnover > 0.0) || !(ingestion_max > 0.0) ||
        !(juvenile_mortality >= 0.0) || !(adult_mortality >= 0.0) ||
        !(ingestion_ratio > 0.0) || !(efficiency > 0.0) ||
        !(resource_max > 0.0) || !(size_ratio > 0.0) || !(size_ratio < 1.0) ||
        !(juvenile_harvest >= 0.0) || !(adult_harvest >= 0.0))
      throw ConfigError("fish parameters out of range");
  }
};

/// Net production per unit juvenile biomass at resource level R.
inline double fish_w_juvenile(const FishParams& p, double r_level) {
  double intake = p.efficiency * p.ingestion_max * r_level /
                  (p.half_saturation + r_level);
  return std::max(0.0, intake - p.maintenance);
}

/// Net production per unit adult biomass at resource level R.
inline double fish_w_adult(const FishParams& p, double r_level) {
  double intake = p.efficiency * p.ingestion_ratio * p.ingestion_max *
                  r_level / (p.half_saturation + r_level);
  return std::max(0.0, intake - p.maintenance);
}

/// Maturation rate v(x) = (x - m) / (1 - z^(1 - m/x)) with m = d_J + h_J.
/// The singularity at x = m is removable; near it we use the expansion
/// v = -x/ln(z) + (x-m)/2 + O((x-m)^2), whose leading term is the limit
/// value -m/ln(z).
inline double fish_maturation(const FishParams& p, double x) {
  const double m = p.juvenile_mortality + p.juvenile_harvest;
  const double log_z = std::log(p.size_ratio);
  const double u = x - m;
  if (std::abs(u) < 1e-8) return -x / log_z + 0.5 * u;
  return u / (1.0 - std::pow(p.size_ratio, 1.0 - m / x));
}

inline SystemModel make_fish(const FishParams& p) {
  p.validate();
  SystemModel m;
  m.dim = 3;
  m.name = "fish";
  m.rhs = [p](std::span<const double> x, double, int,
              std::span<double> dxdt) {
    const double J = x[0], A = x[1], R = x[2];
    const double wj = fish_w_juvenile(p, R);
    const double wa = fish_w_adult(p, R);
    const double v = fish_maturation(p, wj);
    dxdt[0] = (wj - v - p.juvenile_mortality - p.juvenile_harvest) * J +
              wa * A;
    dxdt[1] = v * J - (p.adult_mortality + p.adult_harvest) * A;
    dxdt[2] = p.turnover * (p.resource_max - R) -
              p.ingestion_max * R / (p.half_saturation + R) *
                  (J + p.ingestion_ratio * A);
  };
  m.params = {{"half_saturation", p.half_saturation},
              {"maintenance", p.maintenance},
              {"turnover", p.turnover},
              {"ingestion_max", p.ingestion_max},
              {"juvenile_mortality", p.juvenile_mortality},
              {"adult_mortality", p.adult_mortality},
              {"ingestion_ratio", p.ingestion_ratio},
              {"efficiency", p.efficiency},
              {"resource_max", p.resource_max},
              {"size_ratio", p.size_ratio},
              {"juvenile_harvest", p.juvenile_harvest},
              {"adult_harvest", p.adult_harvest}};
  return m;
}

struct FishEquilibrium {
  State state;  // (J, A, R)
  bool extinct = false;
};

namespace detail {

// Scalar equilibrium condition in R alone. With A = v(w_J) J / (d_A + h_A)
// from dA/dt = 0, the J balance divided by J > 0 becomes
//   phi(R) = w_J - v(w_J) - d_J - h_J + w_A v(w_J) / (d_A + h_A) = 0.
// phi < 0 wherever w_J = 0 and increases with R, so a positive equilibrium
// exists iff phi(R_max) > 0.
inline double fish_phi(const FishParams& p, double r_level) {
  const double wj = fish_w_juvenile(p, r_level);
  const double wa = fish_w_adult(p, r_level);
  const double v = fish_maturation(p, wj);
  return wj - v - p.juvenile_mortality - p.juvenile_harvest +
         wa * v / (p.adult_mortality + p.adult_harvest);
}

}  // namespace detail

/// Solve for the positive equilibrium via the scalar reduction in R, then
/// polish with Newton on the full system. Falls back to the extinction state
/// (0, 0, R_max) when no positive equilibrium exists.
inline FishEquilibrium fish_equilibrium(const FishParams& p) {
  p.validate();
  if (p.adult_mortality + p.adult_harvest <= 0.0)
    throw ConfigError("fish equilibrium needs d_A + h_A > 0");
  if (detail::fish_phi(p, p.resource_max) <= 0.0)
    return {{0.0, 0.0, p.resource_max}, true};

  // phi goes from negative (low R, starvation) to positive at R_max; bracket
  // the sign change on a grid, then bisect.
  constexpr int kCells = 400;
  double lo = 0.0, hi = p.resource_max;
  for (int i = kCells; i >= 1; --i) {
    double r = p.resource_max * static_cast<double>(i - 1) / kCells;
    if (detail::fish_phi(p, r) <= 0.0) {
      lo = r;
      hi = p.resource_max * static_cast<double>(i) / kCells;
      break;
    }
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14 * p.resource_max; ++it) {
    double mid = 0.5 * (lo + hi);
    (detail::fish_phi(p, mid) <= 0.0 ? lo : hi) = mid;
  }
  const double r_eq = 0.5 * (lo + hi);

  const double wj = fish_w_juvenile(p, r_eq);
  const double v = fish_maturation(p, wj);
  const double rho = v / (p.adult_mortality + p.adult_harvest);  // A / J
  const double consumption =
      p.ingestion_max * r_eq / (p.half_saturation + r_eq);
  const double total = p.turnover * (p.resource_max - r_eq) / consumption;
  const double j_eq = total / (1.0 + p.ingestion_ratio * rho);

  SystemModel model = make_fish(p);
  State guess = {j_eq, rho * j_eq, r_eq};
  State polished = find_equilibrium(model, guess);
  if (polished[0] <= 0.0 || polished[1] <= 0.0 || polished[2] <= 0.0)
    throw SolveError("fish equilibrium polish left the positive orthant",
                     0.0);
  return {polished, false};
}

/// Catch per unit time at equilibrium under the given harvest rates.
inline double fish_yield(double juvenile_harvest, double adult_harvest,
                         double j_eq, double a_eq) {
  if (juvenile_harvest < 0.0 || adult_harvest < 0.0 || j_eq < 0.0 ||
      a_eq < 0.0)
    throw ConfigError("yield inputs must be nonnegative");
  return juvenile_harvest * j_eq + adult_harvest * a_eq;
}

/// Largest equal-harvest rate h_J = h_A = h with a positive equilibrium.
inline double fish_extinction_threshold(FishParams p) {
  auto alive = [&](double h) {
    p.juvenile_harvest = p.adult_harvest = h;
    return detail::fish_phi(p, p.resource_max) > 0.0;
  };
  if (!alive(0.0)) return 0.0;
  double lo = 0.0, hi = 1.0;
  while (alive(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) throw SolveError("no extinction threshold found", 0.0);
  }
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    (alive(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace basin::models
