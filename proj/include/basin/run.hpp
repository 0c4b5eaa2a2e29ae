#pragma once

// Orchestration: classify a whole sample in parallel, assemble the report for
// one parameter point from that single pass, and drive parameter sweeps and
// the harvesting-strategy comparison. Work is partitioned by sample index and
// merged in index order, so outputs are byte-identical for any worker count.

#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "basin/core.hpp"
#include "basin/integrate.hpp"
#include "basin/io.hpp"
#include "basin/measures.hpp"
#include "basin/models/fish.hpp"
#include "basin/sample.hpp"
#include "basin/scenario.hpp"

namespace basin {

namespace detail {

template <class Fn>
inline void parallel_for_index(long n, int workers, Fn&& fn) {
  if (n <= 0) return;
  long nworkers = std::min<long>(std::max(workers, 1), n);
  if (nworkers == 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(nworkers));
  std::exception_ptr error = nullptr;
  std::mutex error_mutex;
  for (long w = 0; w < nworkers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (long i = w; i < n; i += nworkers) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

/// Classify every initial condition; index i of the result corresponds to
/// ics[i] regardless of how the work was spread over threads.
inline std::vector<TrajectoryOutcome> classify_all(
    const SystemModel& model, const AttractorSpec& attractor,
    const IntegratorConfig& cfg, const std::vector<State>& ics, int workers) {
  std::vector<TrajectoryOutcome> outcomes(ics.size());
  detail::parallel_for_index(
      static_cast<long>(ics.size()), workers, [&](long i) {
        auto idx = static_cast<std::size_t>(i);
        outcomes[idx] = classify(model, attractor, ics[idx], cfg);
      });
  return outcomes;
}

/// The local linearization baseline, evaluated only when the attractor center
/// actually is an equilibrium of the model.
inline std::optional<LambdaResult> lambda_at_center(const Scenario& sc) {
  State f(static_cast<std::size_t>(sc.model.dim));
  sc.model.rhs(sc.attractor.center, 0.0, 0, f);
  if (max_abs(f) >= 1e-8) return std::nullopt;
  return lambda_max(sc.model, sc.attractor.center);
}

struct PointResult {
  std::vector<TrajectoryOutcome> outcomes;
  MeasureReport report;
};

/// Sample, classify once, and compute every estimator from that single pass.
inline PointResult run_point(const Scenario& sc, int workers) {
  PointResult res;
  std::vector<State> ics = draw(sc.plan, workers);
  res.outcomes = classify_all(sc.model, sc.attractor, sc.integrator, ics,
                              workers);
  res.report = build_report(res.outcomes, sc.distance,
                            sc.restricted ? &*sc.restricted : nullptr, sc.tau,
                            sc.t_eps, lambda_at_center(sc), sc.plan.seed);
  return res;
}

struct SweepRow {
  double value = 0.0;        // swept parameter value
  MeasureReport report;      // zero-count when flagged
  State equilibrium;         // empty when flagged
  std::string flag;          // "", "no attractor", or "extinct"
};

/// Re-solve the equilibrium and re-run the full estimator set at each value
/// of the swept parameter. Points without an attractor (below a fold, past
/// extinction) come back flagged; the sweep continues. All points share the
/// base seed, so curves across the sweep use common random numbers.
inline std::vector<SweepRow> run_sweep(const RunConfig& cfg) {
  if (!cfg.sweep) throw ConfigError("config has no sweep section");
  validate_run_config(cfg);
  const SweepSpec& sweep = *cfg.sweep;
  sweep.validate();
  if (cfg.model == "solow")
    detail::check_param_keys({{sweep.parameter, 0.0}},
                             detail::solow_param_keys(), "solow");
  else if (cfg.model == "wagon")
    detail::check_param_keys({{sweep.parameter, 0.0}},
                             detail::wagon_param_keys(), "wagon");
  else
    detail::check_param_keys({{sweep.parameter, 0.0}},
                             detail::fish_param_keys(), "fish");

  std::vector<SweepRow> rows;
  rows.reserve(static_cast<std::size_t>(sweep.points));
  for (int i = 0; i < sweep.points; ++i) {
    SweepRow row;
    row.value = sweep.value_at(i);

    RunConfig point = cfg;
    point.sweep.reset();
    point.params[sweep.parameter] = row.value;
    point.count = sweep.count > 0 ? sweep.count
                                  : (cfg.count > 0 ? cfg.count
                                                   : default_sweep_count(cfg.model));

    // A point may lose its attractor (fold) or break the declared variant
    // structure mid-sweep; both flag the row and the sweep moves on. Config
    // mistakes shared by every point were rejected by validate_run_config.
    ScenarioResult built;
    try {
      built = build_scenario(point);
    } catch (const SolveError&) {
      built = {std::nullopt, "no attractor"};
    } catch (const ConfigError&) {
      built = {std::nullopt, "no attractor"};
    }
    if (!built.scenario) {
      row.flag = built.flag.empty() ? "no attractor" : built.flag;
      row.report.seed = cfg.seed;
      rows.push_back(std::move(row));
      continue;
    }
    row.equilibrium = built.scenario->attractor.center;
    row.report = run_point(*built.scenario, cfg.workers).report;
    rows.push_back(std::move(row));
  }
  return rows;
}

struct ParetoRow {
  std::string strategy;  // "equal" or "adult"
  double rate = 0.0;     // the strategy parameter t
  double yield = 0.0;
  MeasureReport report;
  State equilibrium;
  std::string flag;
};

/// Compare the two harvesting strategies on a shared rate grid: equal
/// harvesting (h_J = h_A = t) versus adult harvesting (h_J = 0, h_A = t).
/// Both strategies reuse the same seed, so matched points share their
/// perturbation stream (common random numbers).
inline std::vector<ParetoRow> run_pareto(const RunConfig& cfg) {
  if (cfg.model != "fish")
    throw ConfigError("pareto compares harvesting strategies; model must be fish");
  if (!cfg.pareto) throw ConfigError("config has no pareto section");
  validate_run_config(cfg);
  const ParetoSpec& spec = *cfg.pareto;
  spec.validate();
  const long count = spec.count > 0
                         ? spec.count
                         : (cfg.count > 0 ? cfg.count : default_sweep_count("fish"));

  std::vector<ParetoRow> rows;
  for (const char* strategy : {"equal", "adult"}) {
    for (int i = 0; i < spec.points; ++i) {
      ParetoRow row;
      row.strategy = strategy;
      row.rate = spec.value_at(i);

      RunConfig point = cfg;
      point.pareto.reset();
      point.count = count;
      point.params.erase("harvest");
      point.params["juvenile_harvest"] =
          row.strategy == "equal" ? row.rate : 0.0;
      point.params["adult_harvest"] = row.rate;

      ScenarioResult built;
      try {
        built = build_scenario(point);
      } catch (const SolveError&) {
        built = {std::nullopt, "no attractor"};
      }
      if (!built.scenario) {
        row.flag = built.flag.empty() ? "no attractor" : built.flag;
        row.report.seed = cfg.seed;
        rows.push_back(std::move(row));
        continue;
      }
      row.equilibrium = built.scenario->attractor.center;
      row.yield = models::fish_yield(point.params["juvenile_harvest"],
                                     point.params["adult_harvest"],
                                     row.equilibrium[0], row.equilibrium[1]);
      row.report = run_point(*built.scenario, cfg.workers).report;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Table and sidecar emission
// ---------------------------------------------------------------------------

inline void write_sweep_csv(std::ostream& out, const std::string& parameter,
                            std::span<const SweepRow> rows, int dim) {
  out << parameter << ',' << io::report_csv_columns() << ",flag";
  for (int i = 1; i <= dim; ++i) out << ",eq_x" << i;
  out << '\n';
  for (const auto& row : rows) {
    out << io::format_double(row.value) << ','
        << io::report_csv_fields(row.report) << ',' << row.flag;
    for (int i = 0; i < dim; ++i)
      out << ','
          << (row.equilibrium.empty()
                  ? std::string()
                  : io::format_double(row.equilibrium[static_cast<std::size_t>(i)]));
    out << '\n';
  }
}

inline void write_pareto_csv(std::ostream& out,
                             std::span<const ParetoRow> rows, int dim) {
  out << "strategy,rate,yield," << io::report_csv_columns() << ",flag";
  for (int i = 1; i <= dim; ++i) out << ",eq_x" << i;
  out << '\n';
  for (const auto& row : rows) {
    out << row.strategy << ',' << io::format_double(row.rate) << ','
        << io::format_double(row.yield) << ','
        << io::report_csv_fields(row.report) << ',' << row.flag;
    for (int i = 0; i < dim; ++i)
      out << ','
          << (row.equilibrium.empty()
                  ? std::string()
                  : io::format_double(row.equilibrium[static_cast<std::size_t>(i)]));
    out << '\n';
  }
}

/// Reproducibility sidecar: everything needed to regenerate a run, and
/// nothing machine-dependent (no worker counts, no timestamps).
inline nlohmann::json run_metadata(const Scenario& sc) {
  nlohmann::json j;
  j["rng"] = "philox4x32-10";
  j["seed"] = sc.plan.seed;
  j["count"] = sc.plan.count;
  j["model"]["name"] = sc.model.name;
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [key, value] : sc.model.params) params[key] = value;
  j["model"]["params"] = params;
  j["attractor"]["center"] = io::state_to_json(sc.attractor.center);
  j["attractor"]["capture_radius"] = sc.attractor.capture_radius;
  j["attractor"]["capture_norm"] =
      sc.attractor.capture_norm == CaptureNorm::Euclidean ? "euclidean"
                                                          : "relative";
  j["attractor"]["dwell_time"] = sc.attractor.dwell_time;
  j["plan"]["std_dev"] = io::state_to_json(sc.plan.std_dev);
  nlohmann::json frozen = nlohmann::json::array();
  for (int d : sc.plan.frozen_dims) frozen.push_back(d);
  j["plan"]["frozen_dims"] = frozen;
  j["distance"]["kind"] = to_string(sc.distance.kind);
  j["measures"]["tau"] = sc.tau;
  j["measures"]["t_eps"] = sc.t_eps;
  j["measures"]["restricted"] = sc.restricted.has_value();
  if (sc.restricted)
    j["measures"]["restricted_radius_sq"] = sc.restricted->radius_sq;
  j["integrator"]["rel_tol"] = sc.integrator.rel_tol;
  j["integrator"]["abs_tol"] = sc.integrator.abs_tol;
  j["integrator"]["initial_step"] = sc.integrator.initial_step;
  j["integrator"]["max_step"] = sc.integrator.max_step;
  j["integrator"]["t_max"] = sc.integrator.t_max;
  j["integrator"]["max_steps"] = sc.integrator.max_steps;
  return j;
}

}  // namespace basin
