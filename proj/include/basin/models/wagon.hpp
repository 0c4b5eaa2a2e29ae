#pragma once

// Spring-mounted wagon attracted by a magnet at x = a (valid for x < a):
//   dx/dt = y
//   dy/dt = -(k/m) x - (c/m) y + k_m / (m (x - a)^2)
// Below the fold stiffness k = 27 k_m / (4 a^3) the spring cannot hold the
// wagon anywhere and no equilibrium exists. An optional speed limit snaps the
// spring: once y >= speed_limit the restoring term is gone for good (latched
// per trajectory).

#include <cmath>
#include <limits>
#include <optional>

#include "basin/core.hpp"

namespace basin::models {

struct WagonParams {
  double mass = 1.0;                // m
  double damping = 1.0;             // c
  double stiffness = 0.7;           // k
  double magnetic_stiffness = 1.0;  // k_m
  double magnet_position = 5.0;     // a
  double speed_limit = std::numeric_limits<double>::infinity();

  void validate() const {
    if (!(mass > 0.0) || !(damping >= 0.0) || !(stiffness >= 0.0) ||
        !(magnetic_stiffness >= 0.0) || !(magnet_position > 0.0))
      throw ConfigError("wagon parameters out of range");
  }
};

/// Stiffness at the saddle-node fold: for k below this no equilibrium exists.
inline double wagon_fold_stiffness(const WagonParams& p) {
  return 27.0 * p.magnetic_stiffness /
         (4.0 * std::pow(p.magnet_position, 3));
}

/// Rest position of the stable equilibrium (y = 0), or absent below the fold.
/// k x (x - a)^2 = k_m has its small root in (0, a/3]; a/3 maximizes the left
/// side there, which is why the fold sits at 27 k_m / (4 a^3).
inline std::optional<double> wagon_equilibrium_x(const WagonParams& p) {
  p.validate();
  const double k = p.stiffness, km = p.magnetic_stiffness,
               a = p.magnet_position;
  if (km == 0.0) return 0.0;
  if (k == 0.0) return std::nullopt;
  auto g = [&](double x) { return k * x * (x - a) * (x - a) - km; };
  double hi = a / 3.0;
  if (g(hi) < 0.0) return std::nullopt;  // below the fold
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * a; ++it) {
    double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline SystemModel make_wagon(const WagonParams& p) {
  p.validate();
  SystemModel m;
  m.dim = 2;
  m.name = "wagon";
  const double a = p.magnet_position;
  m.rhs = [p, a](std::span<const double> x, double, int mode,
                 std::span<double> dxdt) {
    double d = x[0] - a;
    double spring = (mode == 0) ? p.stiffness * x[0] : 0.0;
    dxdt[0] = x[1];
    dxdt[1] = (-spring - p.damping * x[1] +
               p.magnetic_stiffness / (d * d)) /
              p.mass;
  };
  m.domain = [a](std::span<const double> x) { return x[0] < a; };
  if (std::isfinite(p.speed_limit)) {
    double limit = p.speed_limit;
    m.latch = [limit](std::span<const double> x) { return x[1] - limit; };
  }
  m.params = {{"mass", p.mass},
              {"damping", p.damping},
              {"stiffness", p.stiffness},
              {"magnetic_stiffness", p.magnetic_stiffness},
              {"magnet_position", p.magnet_position},
              {"speed_limit", p.speed_limit}};
  return m;
}

}  // namespace basin::models
