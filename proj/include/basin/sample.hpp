#pragma once

// Monte-Carlo perturbation sampling: multivariate normal draws around the
// attractor with per-dimension spread, rejection against a domain filter, and
// the restricted neighbourhood used by the worst-case rate estimator.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

#include "basin/core.hpp"
#include "basin/rng.hpp"

namespace basin {

/// How perturbed initial conditions are generated: independent normal offsets
/// per dimension around `center`, redrawn whole until `domain_filter` accepts.
/// Dimensions listed in `frozen_dims` stay exactly at the center value.
struct PerturbationPlan {
  State center;
  State std_dev;
  long count = 0;
  std::uint64_t seed = 0;
  std::function<bool(std::span<const double>)> domain_filter;  // empty: accept all
  std::vector<int> frozen_dims;

  void validate() const {
    if (center.empty()) throw ConfigError("perturbation center is empty");
    if (std_dev.size() != center.size())
      throw ConfigError("perturbation std_dev must match center dimension");
    for (double s : std_dev)
      if (s < 0.0) throw ConfigError("perturbation std_dev must be nonnegative");
    if (count < 0) throw ConfigError("perturbation count must be nonnegative");
    for (int d : frozen_dims)
      if (d < 0 || d >= static_cast<int>(center.size()))
        throw ConfigError("frozen dimension index out of range");
  }
};

/// Draw the sample at one index. Deterministic in (plan.seed, index) alone.
inline State draw_one(const PerturbationPlan& plan, std::uint64_t index) {
  const std::size_t dim = plan.center.size();
  std::vector<bool> frozen(dim, false);
  for (int d : plan.frozen_dims) frozen[static_cast<std::size_t>(d)] = true;

  constexpr std::uint32_t kMaxAttempts = 1000000;
  State x(dim);
  for (std::uint32_t attempt = 0; attempt < kMaxAttempts; ++attempt) {
    NormalStream stream(plan.seed, index, attempt);
    for (std::size_t i = 0; i < dim; ++i) {
      if (frozen[i] || plan.std_dev[i] == 0.0) {
        x[i] = plan.center[i];
        stream.next();  // keep stream consumption independent of freezing
      } else {
        x[i] = plan.center[i] + plan.std_dev[i] * stream.next();
      }
    }
    if (!plan.domain_filter || plan.domain_filter(x)) return x;
  }
  throw ConfigError(
      "perturbation plan acceptance rate below 1e-4: no admissible sample "
      "after 1e6 attempts for one index");
}

/// Draw plan.count samples, optionally generating indices concurrently.
/// Output is identical for any worker count.
inline std::vector<State> draw(const PerturbationPlan& plan, int workers = 1) {
  plan.validate();
  const long n = plan.count;
  std::vector<State> samples(static_cast<std::size_t>(n));
  if (n == 0) return samples;
  if (workers <= 1 || n == 1) {
    for (long i = 0; i < n; ++i)
      samples[static_cast<std::size_t>(i)] =
          draw_one(plan, static_cast<std::uint64_t>(i));
    return samples;
  }
  long nworkers = std::min<long>(workers, n);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(nworkers));
  std::exception_ptr error = nullptr;
  std::mutex error_mutex;
  for (long w = 0; w < nworkers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (long i = w; i < n; i += nworkers)
          samples[static_cast<std::size_t>(i)] =
              draw_one(plan, static_cast<std::uint64_t>(i));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return samples;
}

/// Closed ellipsoid of admissible worst-case perturbations:
/// sum_i ((x_i - center_i)/scale_i)^2 <= radius_sq.
struct RestrictedSet {
  State center;
  State scale;
  double radius_sq = 0.25;

  void validate() const {
    if (center.empty() || scale.size() != center.size())
      throw ConfigError("restricted set needs matching center and scale");
    for (double s : scale)
      if (!(s > 0.0))
        throw ConfigError("restricted set scale components must be positive");
    if (!(radius_sq > 0.0))
      throw ConfigError("restricted set radius_sq must be positive");
  }

  [[nodiscard]] bool contains(std::span<const double> x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < center.size(); ++i) {
      double d = (x[i] - center[i]) / scale[i];
      s += d * d;
    }
    return s <= radius_sq;
  }
};

/// Keep the samples inside the restricted set, preserving order.
inline std::vector<State> restrict_to(const RestrictedSet& set,
                                      const std::vector<State>& samples) {
  set.validate();
  std::vector<State> kept;
  for (const State& s : samples)
    if (set.contains(s)) kept.push_back(s);
  return kept;
}

}  // namespace basin
