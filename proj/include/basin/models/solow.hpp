#pragma once

// One-dimensional capital-accumulation model dx/dt = F(x) - C x with a family
// of production curves F. All variants share the healthy equilibrium E of the
// base curve and coincide with it exactly on a neighbourhood of E; they differ
// in local slope at E (Fa), in transient speed away from E (Fb), or by
// carrying a second, unstable equilibrium E1 below which capital collapses to
// zero (Fc far from E, Fd close to E). The variant structure is verified at
// construction by sign analysis of F - C x.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "basin/core.hpp"

namespace basin::models {

namespace detail {

/// C-infinity ramp: 0 for u <= 0, 1 for u >= 1, strictly rising between.
inline double smoothstep(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  double a = std::exp(-1.0 / u);
  double b = std::exp(-1.0 / (1.0 - u));
  return a / (a + b);
}

/// C-infinity bump supported on (-1, 1), equal to 1 at u = 0.
inline double bump(double u) {
  if (std::abs(u) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - u * u));
}

}  // namespace detail

enum class SolowVariant { Base, Fa, Fb, Fc, Fd };

inline const char* to_string(SolowVariant v) {
  switch (v) {
    case SolowVariant::Base: return "base";
    case SolowVariant::Fa: return "fa";
    case SolowVariant::Fb: return "fb";
    case SolowVariant::Fc: return "fc";
    default: return "fd";
  }
}

inline std::optional<SolowVariant> solow_variant_from_string(
    std::string_view s) {
  if (s == "base") return SolowVariant::Base;
  if (s == "fa") return SolowVariant::Fa;
  if (s == "fb") return SolowVariant::Fb;
  if (s == "fc") return SolowVariant::Fc;
  if (s == "fd") return SolowVariant::Fd;
  return std::nullopt;
}

struct SolowParams {
  SolowVariant variant = SolowVariant::Base;
  double maintenance = 0.25;      // C
  double saving_scale = 1.0;      // s in the Hill numerator
  double half_saturation = 1.0;   // h in the base (p = 1) Hill curve
  // Fa: the gap F - C x is rescaled by this factor, halving the local rate.
  double gap_scale = 0.5;
  // Fb: smooth dip in the gap on (dip_center +- dip_halfwidth), away from E.
  double dip_center = 2.0;
  double dip_halfwidth = 0.6;
  double dip_depth = 0.75;
  // Fc/Fd: C-infinity blend from a steeper Hill branch (exponent
  // low_hill_exponent, half-saturation low_half_saturation) into the base
  // curve across (ramp_start, ramp_start + ramp_width). Defaults put the
  // collapse threshold E1 far from E for Fc and close to E for Fd.
  double ramp_start = 0.6;
  double ramp_width = 1.8;
  double low_half_saturation = 4.0;
  double low_hill_exponent = 3.0;

  static SolowParams variant_defaults(SolowVariant v) {
    SolowParams p;
    p.variant = v;
    if (v == SolowVariant::Fd) {
      p.ramp_start = 1.915;
      p.ramp_width = 0.735;
    }
    return p;
  }
};

/// Production saved per unit time for the configured variant.
inline double saved_output(const SolowParams& p, double x) {
  double base = p.saving_scale * x / (p.half_saturation + x);
  switch (p.variant) {
    case SolowVariant::Base:
      return base;
    case SolowVariant::Fa:
      return p.maintenance * x + p.gap_scale * (base - p.maintenance * x);
    case SolowVariant::Fb: {
      double b = detail::bump((x - p.dip_center) / p.dip_halfwidth);
      return base - p.dip_depth * b * (base - p.maintenance * x);
    }
    case SolowVariant::Fc:
    case SolowVariant::Fd: {
      double u = (x - p.ramp_start) / p.ramp_width;
      double sigma = detail::smoothstep(u);
      if (sigma >= 1.0) return base;
      double x3 = std::pow(x, p.low_hill_exponent);
      double h3 = std::pow(p.low_half_saturation, p.low_hill_exponent);
      double low = p.saving_scale * x3 / (h3 + x3);
      return (1.0 - sigma) * low + sigma * base;
    }
  }
  return base;  // unreachable
}

inline double solow_gap(const SolowParams& p, double x) {
  return saved_output(p, x) - p.maintenance * x;
}

namespace detail {

inline double refine_root(const SolowParams& p, double lo, double hi) {
  // Bisection on the gap; the bracket comes from the construction-time scan.
  double flo = solow_gap(p, lo);
  for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
    double mid = 0.5 * (lo + hi);
    double fmid = solow_gap(p, mid);
    if ((fmid > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct SolowStructure {
  double healthy;                  // E
  std::optional<double> collapse;  // E1 (bistable variants only)
};

/// Scan the sign structure of F - C x on (0, x_hi] and check it matches the
/// declared variant; returns the refined equilibria.
inline SolowStructure analyze_structure(const SolowParams& p) {
  if (!(p.maintenance > 0.0) || !(p.saving_scale > 0.0) ||
      !(p.half_saturation > 0.0))
    throw ConfigError("solow parameters must be positive");
  if (p.variant == SolowVariant::Fa &&
      !(p.gap_scale > 0.0 && p.gap_scale < 1.0))
    throw ConfigError("solow gap_scale must lie in (0, 1)");
  if (p.variant == SolowVariant::Fb &&
      !(p.dip_depth > 0.0 && p.dip_depth < 1.0 && p.dip_halfwidth > 0.0))
    throw ConfigError("solow dip parameters out of range");
  if ((p.variant == SolowVariant::Fc || p.variant == SolowVariant::Fd) &&
      !(p.ramp_width > 0.0 && p.ramp_start >= 0.0))
    throw ConfigError("solow ramp parameters out of range");

  // The base curve saturates at saving_scale, so every equilibrium lies below
  // saving_scale / maintenance.
  const double x_hi = 1.5 * p.saving_scale / p.maintenance;
  const int cells = 3000;
  std::vector<std::pair<double, bool>> crossings;  // (x_left, upward)
  double prev_x = x_hi / cells;
  double prev_g = solow_gap(p, prev_x);
  for (int i = 2; i <= cells; ++i) {
    double x = x_hi * i / cells;
    double g = solow_gap(p, x);
    if ((g > 0.0) != (prev_g > 0.0)) crossings.push_back({prev_x, g > 0.0});
    prev_x = x;
    prev_g = g;
  }

  bool bistable =
      p.variant == SolowVariant::Fc || p.variant == SolowVariant::Fd;
  const char* shape_err =
      "solow variant parameters break the declared equilibrium structure";
  SolowStructure s{};
  if (bistable) {
    if (crossings.size() != 2 || !crossings[0].second || crossings[1].second)
      throw ConfigError(shape_err);
    double step = x_hi / cells;
    s.collapse = refine_root(p, crossings[0].first, crossings[0].first + step);
    s.healthy = refine_root(p, crossings[1].first, crossings[1].first + step);
    if (*s.collapse < 0.05)
      throw ConfigError("solow collapse threshold sits too close to zero");
  } else {
    if (crossings.size() != 1 || crossings[0].second)
      throw ConfigError(shape_err);
    double step = x_hi / cells;
    s.healthy = refine_root(p, crossings[0].first, crossings[0].first + step);
  }

  // The modified stretch of the curve must end below E with a margin, so all
  // variants are exactly the base curve on a neighbourhood of E and the local
  // spectrum stays blind to everything except Fa.
  constexpr double kCoincideMargin = 0.3;
  if (p.variant == SolowVariant::Fb) {
    if (p.dip_center - p.dip_halfwidth <= 0.0 ||
        p.dip_center + p.dip_halfwidth > s.healthy - kCoincideMargin)
      throw ConfigError("solow dip must sit strictly between 0 and E");
  }
  if (bistable &&
      p.ramp_start + p.ramp_width > s.healthy - kCoincideMargin)
    throw ConfigError("solow ramp must finish below E");
  return s;
}

}  // namespace detail

/// The healthy equilibrium E (the attractor being probed).
inline double solow_equilibrium(const SolowParams& p) {
  return detail::analyze_structure(p).healthy;
}

/// The collapse threshold E1; absent for variants with a globally attracting E.
inline std::optional<double> solow_collapse_threshold(const SolowParams& p) {
  return detail::analyze_structure(p).collapse;
}

inline SystemModel make_solow(const SolowParams& p) {
  detail::analyze_structure(p);  // reject malformed variants early
  SystemModel m;
  m.dim = 1;
  m.name = std::string("solow-") + to_string(p.variant);
  m.rhs = [p](std::span<const double> x, double, int, std::span<double> dxdt) {
    dxdt[0] = solow_gap(p, x[0]);
  };
  m.params = {{"maintenance", p.maintenance},
              {"saving_scale", p.saving_scale},
              {"half_saturation", p.half_saturation},
              {"gap_scale", p.gap_scale},
              {"dip_center", p.dip_center},
              {"dip_halfwidth", p.dip_halfwidth},
              {"dip_depth", p.dip_depth},
              {"ramp_start", p.ramp_start},
              {"ramp_width", p.ramp_width},
              {"low_half_saturation", p.low_half_saturation},
              {"low_hill_exponent", p.low_hill_exponent}};
  return m;
}

}  // namespace basin::models
