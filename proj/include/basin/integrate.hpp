#pragma once

// Adaptive Dormand-Prince 5(4) integration with event detection, and the
// trajectory classifier built on it. Events (capture-ball entry/exit, unsafe
// states, domain exits, latched mode switches) are located by bisection on the
// step's dense-output interpolant to 1e-6 in time, so reported return times do
// not depend on the accepted step grid.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "basin/core.hpp"

namespace basin {

struct IntegratorConfig {
  double rel_tol = 1e-3;
  double abs_tol = 1e-6;
  double initial_step = 0.05;
  double max_step = 0.2;
  double t_max = 500.0;
  long max_steps = 2000000;

  void validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
      throw ConfigError("integrator tolerances must be positive");
    if (!(initial_step > 0.0) || !(max_step > 0.0))
      throw ConfigError("integrator step sizes must be positive");
    if (initial_step > max_step)
      throw ConfigError("integrator initial_step must not exceed max_step");
    if (!(t_max > 0.0)) throw ConfigError("integrator t_max must be positive");
    if (max_steps <= 0) throw ConfigError("integrator max_steps must be positive");
  }
};

namespace detail {

// Dormand-Prince 5(4) tableau.
inline constexpr double kA21 = 1.0 / 5;
inline constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
inline constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
inline constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187,
                        kA53 = 64448.0 / 6561, kA54 = -212.0 / 729;
inline constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33,
                        kA63 = 46732.0 / 5247, kA64 = 49.0 / 176,
                        kA65 = -5103.0 / 18656;
inline constexpr double kB1 = 35.0 / 384, kB3 = 500.0 / 1113, kB4 = 125.0 / 192,
                        kB5 = -2187.0 / 6784, kB6 = 11.0 / 84;
inline constexpr double kE1 = 71.0 / 57600, kE3 = -71.0 / 16695,
                        kE4 = 71.0 / 1920, kE5 = -17253.0 / 339200,
                        kE6 = 22.0 / 525, kE7 = -1.0 / 40;
inline constexpr double kD1 = -12715105075.0 / 11282082432.0,
                        kD3 = 87487479700.0 / 32700410799.0,
                        kD4 = -10690763975.0 / 1880347072.0,
                        kD5 = 701980252875.0 / 199316789632.0,
                        kD6 = -1453857185.0 / 822651844.0,
                        kD7 = 69997945.0 / 29380423.0;

inline bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace detail

/// One adaptive RK5(4) stepper bound to a model and a fixed dynamics mode.
/// Holds the dense-output coefficients of the last accepted step so callers
/// can interpolate states anywhere inside it.
class Dopri5 {
 public:
  Dopri5(const SystemModel& model, IntegratorConfig cfg, int mode)
      : model_(model), cfg_(cfg), mode_(mode), n_(model.dim) {
    cfg_.validate();
    y_.resize(n_);
    for (auto* v : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &ytmp_, &yerr_})
      v->resize(n_);
    for (auto* v : {&rc1_, &rc2_, &rc3_, &rc4_, &rc5_}) v->resize(n_);
  }

  /// (Re)start from a state; forgets FSAL/dense data.
  void reset(double t, std::span<const double> y, int mode) {
    t_ = t;
    mode_ = mode;
    std::copy(y.begin(), y.end(), y_.begin());
    h_ = std::min(cfg_.initial_step, cfg_.max_step);
    have_k1_ = false;
    last_rejected_ = false;
  }

  enum class StepStatus { Accepted, Underflow, NonFinite };

  /// Attempt trial steps until one is accepted, the step size underflows, or
  /// the derivative stays non-finite down to the step floor. On success the
  /// dense interpolant covers [step_start_time(), time()].
  StepStatus step(double t_limit) {
    if (!have_k1_) {
      model_.rhs(y_, t_, mode_, k1_);
      if (!detail::all_finite(k1_)) return StepStatus::NonFinite;
      have_k1_ = true;
    }
    for (;;) {
      double h = std::min({h_, cfg_.max_step, t_limit - t_});
      if (h < step_floor()) return StepStatus::Underflow;

      if (!try_step(h)) {
        // A shorter trial step may stay clear of a singularity; report
        // divergence only once the step floor is reached.
        h_ = 0.5 * h;
        if (h_ < step_floor()) return StepStatus::NonFinite;
        last_rejected_ = true;
        continue;
      }
      double err = error_norm();
      if (err <= 1.0) {
        accept(h);
        double grow = last_rejected_ ? 1.0 : 5.0;
        h_ = h * std::min(grow, std::max(0.2, 0.9 * std::pow(err, -0.2)));
        last_rejected_ = false;
        return StepStatus::Accepted;
      }
      h_ = h * std::max(0.2, 0.9 * std::pow(err, -0.2));
      last_rejected_ = true;
    }
  }

  [[nodiscard]] double time() const { return t_; }
  [[nodiscard]] double step_start_time() const { return t_prev_; }
  [[nodiscard]] std::span<const double> state() const { return y_; }
  [[nodiscard]] int mode() const { return mode_; }

  /// Dense-output state at t inside [step_start_time(), time()].
  void interpolate(double t, std::span<double> out) const {
    double theta = (t - t_prev_) / h_last_;
    double th1 = 1.0 - theta;
    for (int i = 0; i < n_; ++i)
      out[i] = rc1_[i] +
               theta * (rc2_[i] +
                        th1 * (rc3_[i] + theta * (rc4_[i] + th1 * rc5_[i])));
  }

 private:
  [[nodiscard]] double step_floor() const {
    return 1e-14 * std::max(1.0, std::abs(t_));
  }

  /// Evaluate all stages for trial step h. Returns false if anything went
  /// non-finite. On success ytmp_/k7_ hold the candidate endpoint and slope.
  bool try_step(double h) {
    using namespace detail;
    auto axpy = [this](State& out,
                       std::initializer_list<std::pair<double, const State*>>
                           terms,
                       double h) {
      for (int i = 0; i < n_; ++i) {
        double acc = 0.0;
        for (const auto& [c, k] : terms) acc += c * (*k)[i];
        out[i] = y_[i] + h * acc;
      }
    };
    auto eval = [this](const State& y, State& dydt) {
      model_.rhs(y, t_, mode_, dydt);
    };
    axpy(ytmp_, {{kA21, &k1_}}, h);
    eval(ytmp_, k2_);
    axpy(ytmp_, {{kA31, &k1_}, {kA32, &k2_}}, h);
    eval(ytmp_, k3_);
    axpy(ytmp_, {{kA41, &k1_}, {kA42, &k2_}, {kA43, &k3_}}, h);
    eval(ytmp_, k4_);
    axpy(ytmp_, {{kA51, &k1_}, {kA52, &k2_}, {kA53, &k3_}, {kA54, &k4_}}, h);
    eval(ytmp_, k5_);
    axpy(ytmp_,
         {{kA61, &k1_}, {kA62, &k2_}, {kA63, &k3_}, {kA64, &k4_}, {kA65, &k5_}},
         h);
    eval(ytmp_, k6_);
    // 5th-order solution (also the FSAL evaluation point).
    axpy(ytmp_, {{kB1, &k1_}, {kB3, &k3_}, {kB4, &k4_}, {kB5, &k5_}, {kB6, &k6_}},
         h);
    if (!all_finite(ytmp_)) return false;
    eval(ytmp_, k7_);
    if (!all_finite(k7_)) return false;
    for (int i = 0; i < n_; ++i)
      yerr_[i] = h * (kE1 * k1_[i] + kE3 * k3_[i] + kE4 * k4_[i] +
                      kE5 * k5_[i] + kE6 * k6_[i] + kE7 * k7_[i]);
    return all_finite(yerr_);
  }

  [[nodiscard]] double error_norm() const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i) {
      double sc = cfg_.abs_tol +
                  cfg_.rel_tol * std::max(std::abs(y_[i]), std::abs(ytmp_[i]));
      double e = yerr_[i] / sc;
      s += e * e;
    }
    return std::sqrt(s / n_);
  }

  void accept(double h) {
    using namespace detail;
    t_prev_ = t_;
    h_last_ = h;
    for (int i = 0; i < n_; ++i) {
      double ydiff = ytmp_[i] - y_[i];
      double bspl = h * k1_[i] - ydiff;
      rc1_[i] = y_[i];
      rc2_[i] = ydiff;
      rc3_[i] = bspl;
      rc4_[i] = ydiff - h * k7_[i] - bspl;
      rc5_[i] = h * (kD1 * k1_[i] + kD3 * k3_[i] + kD4 * k4_[i] +
                     kD5 * k5_[i] + kD6 * k6_[i] + kD7 * k7_[i]);
    }
    t_ += h;
    y_.swap(ytmp_);
    k1_.swap(k7_);  // FSAL
  }

  const SystemModel& model_;
  IntegratorConfig cfg_;
  int mode_;
  int n_;
  double t_ = 0.0, t_prev_ = 0.0, h_ = 0.0, h_last_ = 0.0;
  bool have_k1_ = false, last_rejected_ = false;
  State y_, k1_, k2_, k3_, k4_, k5_, k6_, k7_, ytmp_, yerr_;
  State rc1_, rc2_, rc3_, rc4_, rc5_;
};

namespace detail {

/// Absolute time tolerance for event localization.
inline constexpr double kEventTimeTol = 1e-6;
/// Dense-output nodes scanned per (sub)interval when hunting sign changes.
inline constexpr int kEventScanNodes = 8;

/// Bisect a predicate flip inside [lo, hi] (pred false at lo, true at hi) on
/// the interpolant; returns the earliest time the predicate is known true.
template <class Pred>
double bisect_flip(const Dopri5& stepper, double lo, double hi, State& scratch,
                   const Pred& pred) {
  while (hi - lo > kEventTimeTol) {
    double mid = 0.5 * (lo + hi);
    stepper.interpolate(mid, scratch);
    if (pred(scratch))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace detail

/// Integrate without event handling from (t0, y0) to t1; used for references
/// and oracles. Throws SolveError on step underflow or divergence.
inline State advance(const SystemModel& model, const State& y0, double t0,
                     double t1, const IntegratorConfig& cfg, int mode = 0) {
  if (!(t1 > t0)) return y0;
  Dopri5 stepper(model, cfg, mode);
  stepper.reset(t0, y0, mode);
  long steps = 0;
  const double eps = 1e-12 * std::max(1.0, std::abs(t1));
  while (stepper.time() < t1 - eps) {
    auto status = stepper.step(t1);
    if (status != Dopri5::StepStatus::Accepted)
      throw SolveError("integration failed before reaching t1", 0.0);
    if (++steps > cfg.max_steps)
      throw SolveError("integration exceeded max_steps before t1", 0.0);
  }
  State out(static_cast<std::size_t>(model.dim));
  stepper.interpolate(t1, out);
  return out;
}

/// Integrate one initial condition until it is captured by the attractor,
/// becomes unsafe (unsafe predicate, domain exit, or divergence), or the time
/// budget runs out. Events inside a step are processed in time order.
inline TrajectoryOutcome classify(const SystemModel& model,
                                  const AttractorSpec& attractor,
                                  const State& ic,
                                  const IntegratorConfig& cfg) {
  attractor.validate();
  cfg.validate();
  if (static_cast<int>(ic.size()) != model.dim)
    throw UsageError("initial condition dimension does not match the model");

  TrajectoryOutcome out;
  out.initial_condition = ic;

  auto unsafe_at = [&](std::span<const double> x) {
    if (attractor.unsafe && attractor.unsafe(x)) return true;
    if (model.domain && !model.domain(x)) return true;
    return false;
  };
  auto inside_capture = [&](std::span<const double> x) {
    return capture_distance(attractor, x) <= attractor.capture_radius;
  };

  // Immediate verdicts at t = 0.
  if (unsafe_at(ic)) {
    out.verdict = Verdict::Unsafe;
    out.terminal_state = ic;
    return out;
  }
  int mode = (model.latch && model.latch(ic) >= 0.0) ? 1 : 0;
  bool inside = inside_capture(ic);
  double t_enter = 0.0;
  const double dwell = attractor.dwell_time;
  if (inside && dwell == 0.0) {
    out.verdict = Verdict::Safe;
    out.return_time = 0.0;
    out.terminal_state = ic;
    return out;
  }

  Dopri5 stepper(model, cfg, mode);
  stepper.reset(0.0, ic, mode);
  State node(ic.size()), scratch(ic.size());
  long steps = 0;

  auto finish = [&](Verdict v, std::optional<double> rt,
                    std::span<const double> terminal) {
    out.verdict = v;
    out.return_time = rt;
    out.terminal_state.assign(terminal.begin(), terminal.end());
    out.steps_taken = steps;
    return out;
  };
  auto finish_safe = [&](double entry_time) {
    double t_done = std::min(stepper.time(), entry_time + dwell);
    stepper.interpolate(t_done, scratch);
    return finish(Verdict::Safe, entry_time, scratch);
  };

  const double t_budget_eps = 1e-12 * std::max(1.0, cfg.t_max);
  while (stepper.time() < cfg.t_max - t_budget_eps) {
    auto status = stepper.step(cfg.t_max);
    ++steps;
    if (status == Dopri5::StepStatus::NonFinite)
      // Divergence: treated as leaving the basin. State is the last finite one.
      return finish(Verdict::Unsafe, std::nullopt, stepper.state());
    if (status == Dopri5::StepStatus::Underflow)
      return finish(Verdict::Undetermined, std::nullopt, stepper.state());

    const double tb = stepper.time();
    double cursor = stepper.step_start_time();
    bool latched_mid_step = false;

    // Handle events in (cursor, tb] one at a time, earliest first, rescanning
    // the remainder after each. Capture toggles faster than the node spacing
    // (enter and exit between adjacent nodes) are below the resolution this
    // scan promises and are intentionally ignored.
    while (cursor < tb) {
      enum class Ev { None, Bad, Latch, Cross };
      Ev ev = Ev::None;
      double t_event = std::numeric_limits<double>::infinity();
      bool entering = false;

      const int m = detail::kEventScanNodes;
      double t_lo = cursor;
      for (int j = 1; j <= m && ev == Ev::None; ++j) {
        double tj = (j == m) ? tb : cursor + (tb - cursor) * j / m;
        stepper.interpolate(tj, node);

        double t_bad = std::numeric_limits<double>::infinity();
        if (unsafe_at(node))
          t_bad = detail::bisect_flip(stepper, t_lo, tj, scratch, unsafe_at);
        double t_latch = std::numeric_limits<double>::infinity();
        if (stepper.mode() == 0 && model.latch && model.latch(node) >= 0.0)
          t_latch = detail::bisect_flip(
              stepper, t_lo, tj, scratch,
              [&](std::span<const double> x) { return model.latch(x) >= 0.0; });
        double t_cross = std::numeric_limits<double>::infinity();
        if (inside_capture(node) != inside)
          t_cross = detail::bisect_flip(
              stepper, t_lo, tj, scratch, [&](std::span<const double> x) {
                return inside_capture(x) != inside;
              });

        t_event = std::min({t_bad, t_latch, t_cross});
        if (t_event == t_bad && t_bad < std::numeric_limits<double>::infinity())
          ev = Ev::Bad;
        else if (t_event == t_latch &&
                 t_latch < std::numeric_limits<double>::infinity())
          ev = Ev::Latch;
        else if (t_cross < std::numeric_limits<double>::infinity()) {
          ev = Ev::Cross;
          entering = !inside;
        }
        t_lo = tj;
      }

      // A completed dwell period beats any later event.
      if (inside && t_enter + dwell <= std::min(t_event, tb))
        return finish_safe(t_enter);
      if (ev == Ev::None) break;

      if (ev == Ev::Bad) {
        stepper.interpolate(t_event, scratch);
        return finish(Verdict::Unsafe, std::nullopt, scratch);
      }
      if (ev == Ev::Latch) {
        stepper.interpolate(t_event, scratch);
        stepper.reset(t_event, scratch, 1);
        latched_mid_step = true;
        break;
      }
      // Capture boundary crossing.
      inside = entering;
      if (entering) {
        t_enter = t_event;
        if (dwell == 0.0) return finish_safe(t_enter);
      }
      cursor = std::max(t_event, cursor + detail::kEventTimeTol);
    }

    if (latched_mid_step) continue;
    if (inside && t_enter + dwell <= stepper.time()) return finish_safe(t_enter);
    if (steps >= cfg.max_steps) break;
  }

  return finish(Verdict::Undetermined, std::nullopt, stepper.state());
}

}  // namespace basin
