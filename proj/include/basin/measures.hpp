#pragma once

// Estimators for the nonlocal stability and resilience measures, computed
// from one list of classified trajectories, plus the local linearization
// baseline. All reductions run in sample-index order so results are
// byte-identical however the classification work was parallelized.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "basin/core.hpp"
#include "basin/distance.hpp"
#include "basin/linalg.hpp"
#include "basin/sample.hpp"

namespace basin {

struct PEstimate {
  double p_hat = 0.0;
  double std_err = 0.0;  // sqrt(p (1-p) / n)
};

/// Fraction of initial conditions that returned. Undetermined outcomes count
/// as not-safe (the conservative side).
inline PEstimate estimate_p(std::span<const TrajectoryOutcome> outcomes) {
  if (outcomes.empty()) throw UsageError("estimate_p needs at least one outcome");
  long safe = 0;
  for (const auto& o : outcomes)
    if (o.verdict == Verdict::Safe) ++safe;
  double n = static_cast<double>(outcomes.size());
  double p = static_cast<double>(safe) / n;
  return {p, std::sqrt(p * (1.0 - p) / n)};
}

struct DEstimate {
  double value = 0.0;
  State argmin;
};

/// Smallest distance from the attractor to a non-returning IC; absent when
/// every IC returned.
inline std::optional<DEstimate> estimate_d(
    std::span<const TrajectoryOutcome> outcomes, const DistanceSpec& spec) {
  spec.validate();
  std::optional<DEstimate> best;
  for (const auto& o : outcomes) {
    if (o.verdict == Verdict::Safe) continue;
    double d = distance(spec, o.initial_condition);
    if (!best || d < best->value) best = DEstimate{d, o.initial_condition};
  }
  return best;
}

/// Mean return rate 1/(T + t_eps), counting non-returning ICs as rate 0.
inline double estimate_r(std::span<const TrajectoryOutcome> outcomes,
                         double t_eps) {
  if (outcomes.empty()) throw UsageError("estimate_r needs at least one outcome");
  if (!(t_eps > 0.0)) throw ConfigError("t_eps must be positive");
  double sum = 0.0;
  for (const auto& o : outcomes)
    if (o.verdict == Verdict::Safe) sum += 1.0 / (*o.return_time + t_eps);
  return sum / static_cast<double>(outcomes.size());
}

/// Standard error of estimate_r (sample standard deviation of the per-IC
/// rates over sqrt(n)).
inline double estimate_r_std_err(std::span<const TrajectoryOutcome> outcomes,
                                 double t_eps) {
  const double n = static_cast<double>(outcomes.size());
  if (n < 2.0) return 0.0;
  double mean = estimate_r(outcomes, t_eps);
  double ss = 0.0;
  for (const auto& o : outcomes) {
    double rate =
        o.verdict == Verdict::Safe ? 1.0 / (*o.return_time + t_eps) : 0.0;
    ss += (rate - mean) * (rate - mean);
  }
  return std::sqrt(ss / (n - 1.0) / n);
}

/// Worst return rate over the restricted perturbation set: 0 if any member
/// failed to return, absent if no sampled IC lies in the set.
inline std::optional<double> estimate_r_worst(
    std::span<const TrajectoryOutcome> outcomes, const RestrictedSet& set,
    double t_eps) {
  set.validate();
  if (!(t_eps > 0.0)) throw ConfigError("t_eps must be positive");
  std::optional<double> worst;
  for (const auto& o : outcomes) {
    if (!set.contains(o.initial_condition)) continue;
    if (o.verdict != Verdict::Safe) return 0.0;
    double rate = 1.0 / (*o.return_time + t_eps);
    if (!worst || rate < *worst) worst = rate;
  }
  return worst;
}

inline bool tau_safe(const TrajectoryOutcome& o, double tau) {
  return o.verdict == Verdict::Safe && *o.return_time <= tau;
}

struct BasinTimeEstimate {
  double p_tau = 0.0;
  double p_tau_std_err = 0.0;
  std::optional<DEstimate> d_tau;
};

/// Finite-time variants: an IC is tau-safe when it returns within tau; d_tau
/// is the closest tau-unsafe IC.
inline BasinTimeEstimate estimate_basin_time(
    std::span<const TrajectoryOutcome> outcomes, double tau,
    const DistanceSpec& spec) {
  if (outcomes.empty())
    throw UsageError("estimate_basin_time needs at least one outcome");
  if (!(tau > 0.0)) throw ConfigError("tau must be positive");
  spec.validate();
  BasinTimeEstimate est;
  long safe = 0;
  for (const auto& o : outcomes) {
    if (tau_safe(o, tau)) {
      ++safe;
    } else {
      double d = distance(spec, o.initial_condition);
      if (!est.d_tau || d < est.d_tau->value)
        est.d_tau = DEstimate{d, o.initial_condition};
    }
  }
  double n = static_cast<double>(outcomes.size());
  est.p_tau = static_cast<double>(safe) / n;
  est.p_tau_std_err = std::sqrt(est.p_tau * (1.0 - est.p_tau) / n);
  return est;
}

struct LambdaResult {
  double value = 0.0;  // largest real part of the Jacobian spectrum
  bool condition_warning = false;
};

/// Largest real part of the rhs Jacobian's spectrum at an equilibrium. The
/// point must actually be one: ||rhs||_inf < 1e-8 is enforced.
inline LambdaResult lambda_max(const SystemModel& model,
                               std::span<const double> equilibrium) {
  if (static_cast<int>(equilibrium.size()) != model.dim)
    throw UsageError("equilibrium dimension does not match the model");
  State f(model.dim);
  model.rhs(equilibrium, 0.0, 0, f);
  if (max_abs(f) >= 1e-8)
    throw UsageError("lambda_max called at a non-equilibrium point");
  EigenResult eig = eigenvalues(jacobian_fd(model, equilibrium));
  double best = eig.values.front().real();
  for (const auto& v : eig.values) best = std::max(best, v.real());
  return {best, eig.condition_warning};
}

/// Everything the estimators produce for one parameter point, from one shared
/// sample list. Optional fields are absent when their defining set is empty.
struct MeasureReport {
  double p_hat = 0.0;
  double p_std_err = 0.0;
  std::optional<double> d_hat;
  DistanceKind d_norm_kind = DistanceKind::Euclidean;
  std::optional<State> d_argmin;
  double r_hat = 0.0;
  double r_std_err = 0.0;
  std::optional<double> r_worst;  // absent when no IC fell in the restricted set
  double p_tau = 0.0;
  double p_tau_std_err = 0.0;
  std::optional<double> d_tau;
  std::optional<State> d_tau_argmin;
  double tau = 0.0;
  double t_eps = 0.0;
  std::optional<double> lambda;  // largest real part of the local spectrum
  bool lambda_warning = false;
  long n_safe = 0;
  long n_unsafe = 0;
  long n_undetermined = 0;
  long n_tot = 0;
  std::uint64_t seed = 0;
};

/// Assemble the full report from one classification pass. `restricted` may be
/// null (r_worst stays absent); `lambda` is passed in because the equilibrium
/// solve lives with the model, not the estimators.
inline MeasureReport build_report(std::span<const TrajectoryOutcome> outcomes,
                                  const DistanceSpec& spec,
                                  const RestrictedSet* restricted, double tau,
                                  double t_eps,
                                  std::optional<LambdaResult> lambda,
                                  std::uint64_t seed) {
  MeasureReport rep;
  auto p = estimate_p(outcomes);
  rep.p_hat = p.p_hat;
  rep.p_std_err = p.std_err;
  rep.d_norm_kind = spec.kind;
  if (auto d = estimate_d(outcomes, spec)) {
    rep.d_hat = d->value;
    rep.d_argmin = d->argmin;
  }
  rep.r_hat = estimate_r(outcomes, t_eps);
  rep.r_std_err = estimate_r_std_err(outcomes, t_eps);
  if (restricted) rep.r_worst = estimate_r_worst(outcomes, *restricted, t_eps);
  auto bt = estimate_basin_time(outcomes, tau, spec);
  rep.p_tau = bt.p_tau;
  rep.p_tau_std_err = bt.p_tau_std_err;
  if (bt.d_tau) {
    rep.d_tau = bt.d_tau->value;
    rep.d_tau_argmin = bt.d_tau->argmin;
  }
  rep.tau = tau;
  rep.t_eps = t_eps;
  if (lambda) {
    rep.lambda = lambda->value;
    rep.lambda_warning = lambda->condition_warning;
  }
  for (const auto& o : outcomes) {
    switch (o.verdict) {
      case Verdict::Safe: ++rep.n_safe; break;
      case Verdict::Unsafe: ++rep.n_unsafe; break;
      case Verdict::Undetermined: ++rep.n_undetermined; break;
    }
  }
  rep.n_tot = static_cast<long>(outcomes.size());
  rep.seed = seed;
  return rep;
}

}  // namespace basin
