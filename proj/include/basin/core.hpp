#pragma once

// Core vocabulary shared by every module: state vectors, the system/attractor
// descriptions consumed by the classifier, trajectory outcomes, and the small
// exception hierarchy used for configuration and solver failures.

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace basin {

using State = std::vector<double>;

/// Invalid user-supplied configuration (bad parameter combinations, malformed
/// files, schema mismatches). The CLI maps these to a nonzero exit.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// API misuse detected at runtime (e.g. lambda_max called off-equilibrium).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical solve failed to converge; carries the last residual seen.
class SolveError : public std::runtime_error {
 public:
  SolveError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  [[nodiscard]] double residual() const { return residual_; }

 private:
  double residual_;
};

/// Right-hand side of an autonomous ODE system, plus the predicates the
/// classifier needs. `mode` selects between piecewise dynamics: it starts at 0
/// and moves (once, irreversibly) to 1 when `latch` crosses zero from below.
/// Models without piecewise behaviour ignore `mode` and leave `latch` empty.
struct SystemModel {
  int dim = 0;
  std::string name;
  std::function<void(std::span<const double> x, double t, int mode,
                     std::span<double> dxdt)>
      rhs;
  /// True while the state is inside the model's domain; empty means the whole
  /// space. Leaving the domain classifies the trajectory Unsafe.
  std::function<bool(std::span<const double> x)> domain;
  /// Latched mode switch: mode 0 -> 1 the first time this becomes >= 0.
  std::function<double(std::span<const double> x)> latch;
  std::map<std::string, double> params;
};

enum class CaptureNorm { Euclidean, RelativeEllipsoid };

/// The attractor the safe trajectories must return to. Capture means entering
/// the `capture_radius` neighbourhood (in `capture_norm`) and, if `dwell_time`
/// is positive, staying inside for that long without interruption.
struct AttractorSpec {
  State center;
  double capture_radius = 0.01;
  CaptureNorm capture_norm = CaptureNorm::Euclidean;
  double dwell_time = 0.0;
  /// Optional: true on states that are definitely lost (e.g. wagon at the
  /// magnet). Must be false at `center`.
  std::function<bool(std::span<const double> x)> unsafe;

  void validate() const {
    if (center.empty()) throw ConfigError("attractor center is empty");
    if (!(capture_radius > 0.0))
      throw ConfigError("attractor capture_radius must be positive");
    if (dwell_time < 0.0)
      throw ConfigError("attractor dwell_time must be nonnegative");
    if (capture_norm == CaptureNorm::RelativeEllipsoid) {
      for (double c : center)
        if (c == 0.0)
          throw ConfigError(
              "relative-ellipsoid capture requires nonzero center components");
    }
    if (unsafe && unsafe(center))
      throw ConfigError("attractor center must not satisfy the unsafe predicate");
  }
};

/// Distance from a state to the attractor center in the capture norm.
inline double capture_distance(const AttractorSpec& a,
                               std::span<const double> x) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.center.size(); ++i) {
    double d = x[i] - a.center[i];
    if (a.capture_norm == CaptureNorm::RelativeEllipsoid) d /= a.center[i];
    s += d * d;
  }
  return std::sqrt(s);
}

enum class Verdict { Safe, Unsafe, Undetermined };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Safe: return "safe";
    case Verdict::Unsafe: return "unsafe";
    default: return "undetermined";
  }
}

inline std::optional<Verdict> verdict_from_string(std::string_view s) {
  if (s == "safe") return Verdict::Safe;
  if (s == "unsafe") return Verdict::Unsafe;
  if (s == "undetermined") return Verdict::Undetermined;
  return std::nullopt;
}

/// Result of integrating one perturbed initial condition.
/// `return_time` is set exactly when `verdict == Safe`.
struct TrajectoryOutcome {
  State initial_condition;
  Verdict verdict = Verdict::Undetermined;
  std::optional<double> return_time;
  State terminal_state;
  long steps_taken = 0;
};

}  // namespace basin
