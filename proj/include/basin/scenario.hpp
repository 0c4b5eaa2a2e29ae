#pragma once

// Turns a declarative run configuration (typically loaded from JSON) into a
// concrete scenario: the model, the attractor with its capture neighbourhood,
// the perturbation plan, the distance norm, and the measure parameters. Every
// field the config leaves unset is filled with the model's preset, so a config
// can be as short as {"model": {"name": "wagon"}}.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "basin/core.hpp"
#include "basin/distance.hpp"
#include "basin/integrate.hpp"
#include "basin/models/fish.hpp"
#include "basin/models/solow.hpp"
#include "basin/models/wagon.hpp"
#include "basin/sample.hpp"

namespace basin {

struct SweepSpec {
  std::string parameter;
  double from = 0.0;
  double to = 0.0;
  int points = 0;
  long count = 0;  // ICs per point; 0 picks the model default

  void validate() const {
    if (parameter.empty()) throw ConfigError("sweep parameter name is empty");
    if (points < 1) throw ConfigError("sweep needs at least one point");
    if (points > 1 && !(to > from))
      throw ConfigError("sweep range is empty (to must exceed from)");
    if (count < 0) throw ConfigError("sweep count must be nonnegative");
  }

  [[nodiscard]] double value_at(int i) const {
    if (points == 1) return from;
    return from + (to - from) * static_cast<double>(i) / (points - 1);
  }
};

struct ParetoSpec {
  double from = 0.0;
  double to = 0.0;
  int points = 0;
  long count = 0;  // 0 picks the default (2000)

  void validate() const {
    if (points < 1) throw ConfigError("pareto needs at least one point");
    if (points > 1 && !(to > from))
      throw ConfigError("pareto range is empty (to must exceed from)");
    if (from < 0.0) throw ConfigError("pareto harvest rates must be nonnegative");
    if (count < 0) throw ConfigError("pareto count must be nonnegative");
  }

  [[nodiscard]] double value_at(int i) const {
    if (points == 1) return from;
    return from + (to - from) * static_cast<double>(i) / (points - 1);
  }
};

/// Declarative description of a run. Optional fields default to the selected
/// model's preset inside build_scenario.
struct RunConfig {
  std::string model;  // "solow" | "wagon" | "fish"
  std::string variant = "base";
  std::map<std::string, double> params;

  std::optional<State> center;  // absent: solve for the equilibrium
  std::optional<double> capture_radius;
  std::optional<CaptureNorm> capture_norm;
  double dwell_time = 0.0;

  long count = 0;  // 0 picks the model default
  std::optional<State> std_dev;
  std::uint64_t seed = 2024;
  std::vector<int> frozen_dims;
  bool exclude_resource = false;  // fish: freeze the resource dimension

  std::optional<DistanceKind> distance_kind;
  std::optional<double> tau;
  double t_eps = 1.0;
  /// Whether to sample the restricted worst-case set; unset picks the model
  /// preset (solow and fish use one, the wagon does not).
  std::optional<bool> use_restricted;
  double restricted_radius_sq = 0.25;

  IntegratorConfig integrator;

  std::optional<SweepSpec> sweep;
  std::optional<ParetoSpec> pareto;

  int workers = 1;
  std::string out_dir = ".";
};

/// Fully resolved inputs for one parameter point.
struct Scenario {
  SystemModel model;
  AttractorSpec attractor;
  PerturbationPlan plan;
  DistanceSpec distance;
  double tau = 0.0;
  double t_eps = 1.0;
  std::optional<RestrictedSet> restricted;
  IntegratorConfig integrator;
};

/// A scenario, or the reason there is none at this parameter point.
struct ScenarioResult {
  std::optional<Scenario> scenario;
  std::string flag;  // "", "no attractor", or "extinct"
};

namespace detail {

inline double get_param(const std::map<std::string, double>& params,
                        const std::string& key, double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

inline void check_param_keys(const std::map<std::string, double>& params,
                             const std::set<std::string>& allowed,
                             const std::string& model) {
  for (const auto& [key, value] : params)
    if (!allowed.contains(key))
      throw ConfigError("unknown " + model + " parameter '" + key + "'");
}

inline const std::set<std::string>& solow_param_keys() {
  static const std::set<std::string> keys = {
      "maintenance",   "saving_scale", "half_saturation",
      "gap_scale",     "dip_center",   "dip_halfwidth",
      "dip_depth",     "ramp_start",   "ramp_width",
      "low_half_saturation", "low_hill_exponent"};
  return keys;
}

inline const std::set<std::string>& wagon_param_keys() {
  static const std::set<std::string> keys = {
      "mass", "damping", "stiffness", "magnetic_stiffness", "magnet_position",
      "speed_limit"};
  return keys;
}

inline const std::set<std::string>& fish_param_keys() {
  static const std::set<std::string> keys = {
      "half_saturation", "maintenance",      "turnover",
      "ingestion_max",   "juvenile_mortality", "adult_mortality",
      "ingestion_ratio", "efficiency",       "resource_max",
      "size_ratio",      "juvenile_harvest", "adult_harvest",
      "harvest"};
  return keys;
}

}  // namespace detail

inline models::SolowParams solow_params_from(const RunConfig& cfg) {
  auto variant = models::solow_variant_from_string(cfg.variant);
  if (!variant)
    throw ConfigError("unknown solow variant '" + cfg.variant +
                      "' (expected base, fa, fb, fc, or fd)");
  detail::check_param_keys(cfg.params, detail::solow_param_keys(), "solow");
  auto p = models::SolowParams::variant_defaults(*variant);
  p.maintenance = detail::get_param(cfg.params, "maintenance", p.maintenance);
  p.saving_scale = detail::get_param(cfg.params, "saving_scale", p.saving_scale);
  p.half_saturation =
      detail::get_param(cfg.params, "half_saturation", p.half_saturation);
  p.gap_scale = detail::get_param(cfg.params, "gap_scale", p.gap_scale);
  p.dip_center = detail::get_param(cfg.params, "dip_center", p.dip_center);
  p.dip_halfwidth =
      detail::get_param(cfg.params, "dip_halfwidth", p.dip_halfwidth);
  p.dip_depth = detail::get_param(cfg.params, "dip_depth", p.dip_depth);
  p.ramp_start = detail::get_param(cfg.params, "ramp_start", p.ramp_start);
  p.ramp_width = detail::get_param(cfg.params, "ramp_width", p.ramp_width);
  p.low_half_saturation = detail::get_param(cfg.params, "low_half_saturation",
                                            p.low_half_saturation);
  p.low_hill_exponent = detail::get_param(cfg.params, "low_hill_exponent",
                                          p.low_hill_exponent);
  return p;
}

inline models::WagonParams wagon_params_from(const RunConfig& cfg) {
  detail::check_param_keys(cfg.params, detail::wagon_param_keys(), "wagon");
  models::WagonParams p;
  p.mass = detail::get_param(cfg.params, "mass", p.mass);
  p.damping = detail::get_param(cfg.params, "damping", p.damping);
  p.stiffness = detail::get_param(cfg.params, "stiffness", p.stiffness);
  p.magnetic_stiffness =
      detail::get_param(cfg.params, "magnetic_stiffness", p.magnetic_stiffness);
  p.magnet_position =
      detail::get_param(cfg.params, "magnet_position", p.magnet_position);
  p.speed_limit = detail::get_param(cfg.params, "speed_limit", p.speed_limit);
  if (!(p.speed_limit > 0.0))
    throw ConfigError("wagon speed_limit must be positive (omit it for none)");
  return p;
}

inline models::FishParams fish_params_from(const RunConfig& cfg) {
  detail::check_param_keys(cfg.params, detail::fish_param_keys(), "fish");
  models::FishParams p;
  // "harvest" sets both rates; the stage-specific keys win if also given.
  double h = detail::get_param(cfg.params, "harvest", -1.0);
  if (h >= 0.0) p.juvenile_harvest = p.adult_harvest = h;
  p.half_saturation =
      detail::get_param(cfg.params, "half_saturation", p.half_saturation);
  p.maintenance = detail::get_param(cfg.params, "maintenance", p.maintenance);
  p.turnover = detail::get_param(cfg.params, "turnover", p.turnover);
  p.ingestion_max =
      detail::get_param(cfg.params, "ingestion_max", p.ingestion_max);
  p.juvenile_mortality = detail::get_param(cfg.params, "juvenile_mortality",
                                           p.juvenile_mortality);
  p.adult_mortality =
      detail::get_param(cfg.params, "adult_mortality", p.adult_mortality);
  p.ingestion_ratio =
      detail::get_param(cfg.params, "ingestion_ratio", p.ingestion_ratio);
  p.efficiency = detail::get_param(cfg.params, "efficiency", p.efficiency);
  p.resource_max =
      detail::get_param(cfg.params, "resource_max", p.resource_max);
  p.size_ratio = detail::get_param(cfg.params, "size_ratio", p.size_ratio);
  p.juvenile_harvest =
      detail::get_param(cfg.params, "juvenile_harvest", p.juvenile_harvest);
  p.adult_harvest =
      detail::get_param(cfg.params, "adult_harvest", p.adult_harvest);
  return p;
}

namespace detail {

// Scenario presets. Distances from the attractor default to: plain Euclidean
// for the 1-d economy, perturbation energy for the mechanical wagon, and the
// population-relative norm for the fish (perturbations are fractions of the
// standing biomass, so all derived quantities follow suit).
inline constexpr double kSolowStdDev = 1.5;
inline constexpr double kSolowTau = 32.0;
inline constexpr double kSolowCollapseFloor = 0.01;
inline constexpr double kWagonStdDev = 5.0;
inline constexpr double kWagonTau = 10.0;
inline constexpr double kWagonMagnetMargin = 0.01;
inline constexpr double kFishTau = 5.0;
inline constexpr double kFishCaptureRadius = 0.1;
inline constexpr long kDefaultCount = 10000;

inline ScenarioResult build_solow_scenario(const RunConfig& cfg) {
  auto p = solow_params_from(cfg);
  Scenario sc;
  sc.model = models::make_solow(p);  // validates the variant structure
  const double eq = models::solow_equilibrium(p);

  sc.attractor.center = cfg.center ? *cfg.center : State{eq};
  sc.attractor.capture_radius = cfg.capture_radius.value_or(0.01);
  sc.attractor.capture_norm =
      cfg.capture_norm.value_or(CaptureNorm::Euclidean);
  sc.attractor.dwell_time = cfg.dwell_time;
  sc.attractor.unsafe = [](std::span<const double> x) {
    return x[0] <= kSolowCollapseFloor;
  };

  sc.plan.center = sc.attractor.center;
  sc.plan.std_dev = cfg.std_dev.value_or(State{kSolowStdDev});
  sc.plan.count = cfg.count > 0 ? cfg.count : kDefaultCount;
  sc.plan.seed = cfg.seed;
  sc.plan.frozen_dims = cfg.frozen_dims;
  sc.plan.domain_filter = [](std::span<const double> x) { return x[0] > 0.0; };

  sc.distance.kind = cfg.distance_kind.value_or(DistanceKind::Euclidean);
  sc.distance.reference = sc.attractor.center;
  sc.distance.relative_scale = sc.attractor.center;

  sc.tau = cfg.tau.value_or(kSolowTau);
  sc.t_eps = cfg.t_eps;
  if (cfg.use_restricted.value_or(true))
    sc.restricted = RestrictedSet{sc.attractor.center, sc.attractor.center,
                                  cfg.restricted_radius_sq};
  sc.integrator = cfg.integrator;
  return {sc, ""};
}

inline ScenarioResult build_wagon_scenario(const RunConfig& cfg) {
  auto p = wagon_params_from(cfg);
  Scenario sc;
  sc.model = models::make_wagon(p);

  State center;
  if (cfg.center) {
    center = *cfg.center;
  } else {
    auto eq = models::wagon_equilibrium_x(p);
    if (!eq) return {std::nullopt, "no attractor"};
    center = {*eq, 0.0};
  }
  sc.attractor.center = center;
  sc.attractor.capture_radius = cfg.capture_radius.value_or(0.01);
  sc.attractor.capture_norm =
      cfg.capture_norm.value_or(CaptureNorm::Euclidean);
  sc.attractor.dwell_time = cfg.dwell_time;
  const double magnet = p.magnet_position;
  sc.attractor.unsafe = [magnet](std::span<const double> x) {
    return x[0] > magnet - kWagonMagnetMargin;
  };

  sc.plan.center = center;
  sc.plan.std_dev = cfg.std_dev.value_or(State{kWagonStdDev, kWagonStdDev});
  sc.plan.count = cfg.count > 0 ? cfg.count : kDefaultCount;
  sc.plan.seed = cfg.seed;
  sc.plan.frozen_dims = cfg.frozen_dims;
  sc.plan.domain_filter = sc.model.domain;

  sc.distance.kind = cfg.distance_kind.value_or(DistanceKind::Energy);
  sc.distance.reference = center;
  // The energy norm measures the work to impose a perturbation on the intact
  // system, so it always uses the unbroken spring stiffness.
  sc.distance.energy = EnergyParams{p.mass, p.stiffness, p.magnetic_stiffness,
                                    p.magnet_position};
  State scale = center;
  if (scale[1] == 0.0) scale[1] = 1.0;  // y_eq = 0; give the norm a unit scale
  sc.distance.relative_scale = scale;

  sc.tau = cfg.tau.value_or(kWagonTau);
  sc.t_eps = cfg.t_eps;
  if (cfg.use_restricted.value_or(false))  // no restricted set by default
    sc.restricted =
        RestrictedSet{center, scale, cfg.restricted_radius_sq};
  sc.integrator = cfg.integrator;
  return {sc, ""};
}

inline ScenarioResult build_fish_scenario(const RunConfig& cfg) {
  auto p = fish_params_from(cfg);
  Scenario sc;
  sc.model = models::make_fish(p);

  State center;
  if (cfg.center) {
    center = *cfg.center;
  } else {
    auto eq = models::fish_equilibrium(p);
    if (eq.extinct) return {std::nullopt, "extinct"};
    center = eq.state;
  }
  sc.attractor.center = center;
  sc.attractor.capture_radius =
      cfg.capture_radius.value_or(kFishCaptureRadius);
  sc.attractor.capture_norm =
      cfg.capture_norm.value_or(CaptureNorm::RelativeEllipsoid);
  sc.attractor.dwell_time = cfg.dwell_time;

  sc.plan.center = center;
  if (cfg.std_dev) {
    sc.plan.std_dev = *cfg.std_dev;
  } else {
    sc.plan.std_dev = center;
    for (double& s : sc.plan.std_dev) s *= 0.5;
  }
  sc.plan.count = cfg.count > 0 ? cfg.count : kDefaultCount;
  sc.plan.seed = cfg.seed;
  sc.plan.frozen_dims = cfg.frozen_dims;
  if (cfg.exclude_resource) sc.plan.frozen_dims.push_back(2);
  sc.plan.domain_filter = [](std::span<const double> x) {
    for (double v : x)
      if (v <= 0.0) return false;
    return true;
  };

  sc.distance.kind = cfg.distance_kind.value_or(DistanceKind::Relative);
  sc.distance.reference = center;
  sc.distance.relative_scale = center;

  sc.tau = cfg.tau.value_or(kFishTau);
  sc.t_eps = cfg.t_eps;
  if (cfg.use_restricted.value_or(true))
    sc.restricted = RestrictedSet{center, center, cfg.restricted_radius_sq};
  sc.integrator = cfg.integrator;
  return {sc, ""};
}

}  // namespace detail

/// Model-independent sanity checks, shared by every subcommand; sweeps call
/// this once up front so later per-point failures can safely be treated as
/// structural ("no attractor") rather than as config mistakes.
inline void validate_run_config(const RunConfig& cfg) {
  cfg.integrator.validate();
  if (cfg.t_eps <= 0.0) throw ConfigError("t_eps must be positive");
  if (cfg.tau && !(*cfg.tau > 0.0)) throw ConfigError("tau must be positive");
  if (cfg.workers < 1) throw ConfigError("workers must be at least 1");
  if (cfg.exclude_resource && cfg.model != "fish")
    throw ConfigError("exclude_resource only applies to the fish model");
  if (cfg.model != "solow" && cfg.model != "wagon" && cfg.model != "fish")
    throw ConfigError("unknown model '" + cfg.model +
                      "' (expected solow, wagon, or fish)");
}

/// Resolve a config into a runnable scenario; a missing attractor (below the
/// wagon's fold, or a fish population harvested to extinction) comes back as
/// a flag instead of a scenario.
inline ScenarioResult build_scenario(const RunConfig& cfg) {
  validate_run_config(cfg);

  ScenarioResult result;
  if (cfg.model == "solow") {
    result = detail::build_solow_scenario(cfg);
  } else if (cfg.model == "wagon") {
    result = detail::build_wagon_scenario(cfg);
  } else {
    result = detail::build_fish_scenario(cfg);
  }
  if (result.scenario) {
    result.scenario->attractor.validate();
    result.scenario->plan.validate();
    result.scenario->distance.validate();
    if (result.scenario->restricted) result.scenario->restricted->validate();
    if (!(result.scenario->tau > 0.0))
      throw ConfigError("tau must be positive");
  }
  return result;
}

/// Default per-point IC count for sweeps, by model.
inline long default_sweep_count(const std::string& model) {
  if (model == "wagon") return 1000;
  return 2000;
}

// ---------------------------------------------------------------------------
// JSON configuration
// ---------------------------------------------------------------------------

namespace detail {

inline void check_keys(const nlohmann::json& obj, const std::string& where,
                       const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items())
    if (!allowed.contains(key))
      throw ConfigError("unknown config key '" + key + "' in " + where);
}

inline double json_number(const nlohmann::json& v, const std::string& where) {
  if (!v.is_number())
    throw ConfigError("config key " + where + " must be a number");
  return v.get<double>();
}

inline State json_state(const nlohmann::json& v, const std::string& where) {
  if (!v.is_array() || v.empty())
    throw ConfigError("config key " + where +
                      " must be a nonempty array of numbers");
  State s;
  for (const auto& e : v) s.push_back(json_number(e, where));
  return s;
}

}  // namespace detail

inline RunConfig run_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  detail::check_keys(j, "the config root",
                     {"model", "attractor", "plan", "distance", "measures",
                      "integrator", "sweep", "pareto", "workers", "out"});
  RunConfig cfg;

  if (!j.contains("model") || !j["model"].is_object() ||
      !j["model"].contains("name"))
    throw ConfigError("config needs model.name");
  const auto& jm = j["model"];
  detail::check_keys(jm, "model", {"name", "variant", "params"});
  cfg.model = jm["name"].get<std::string>();
  if (jm.contains("variant")) cfg.variant = jm["variant"].get<std::string>();
  if (jm.contains("params")) {
    if (!jm["params"].is_object())
      throw ConfigError("model.params must be an object");
    for (const auto& [key, value] : jm["params"].items())
      cfg.params[key] = detail::json_number(value, "model.params." + key);
  }

  if (j.contains("attractor")) {
    const auto& ja = j["attractor"];
    detail::check_keys(ja, "attractor",
                       {"center", "capture_radius", "capture_norm",
                        "dwell_time"});
    if (ja.contains("center"))
      cfg.center = detail::json_state(ja["center"], "attractor.center");
    if (ja.contains("capture_radius"))
      cfg.capture_radius =
          detail::json_number(ja["capture_radius"], "attractor.capture_radius");
    if (ja.contains("capture_norm")) {
      std::string n = ja["capture_norm"].get<std::string>();
      if (n == "euclidean") cfg.capture_norm = CaptureNorm::Euclidean;
      else if (n == "relative") cfg.capture_norm = CaptureNorm::RelativeEllipsoid;
      else throw ConfigError("attractor.capture_norm must be 'euclidean' or 'relative'");
    }
    if (ja.contains("dwell_time"))
      cfg.dwell_time =
          detail::json_number(ja["dwell_time"], "attractor.dwell_time");
  }

  if (j.contains("plan")) {
    const auto& jp = j["plan"];
    detail::check_keys(jp, "plan",
                       {"count", "std_dev", "seed", "frozen_dims",
                        "exclude_resource"});
    if (jp.contains("count")) cfg.count = jp["count"].get<long>();
    if (jp.contains("std_dev"))
      cfg.std_dev = detail::json_state(jp["std_dev"], "plan.std_dev");
    if (jp.contains("seed")) cfg.seed = jp["seed"].get<std::uint64_t>();
    if (jp.contains("frozen_dims"))
      for (const auto& d : jp["frozen_dims"])
        cfg.frozen_dims.push_back(d.get<int>());
    if (jp.contains("exclude_resource"))
      cfg.exclude_resource = jp["exclude_resource"].get<bool>();
  }

  if (j.contains("distance")) {
    detail::check_keys(j["distance"], "distance", {"kind"});
    if (j["distance"].contains("kind")) {
      std::string k = j["distance"]["kind"].get<std::string>();
      if (k == "euclidean") cfg.distance_kind = DistanceKind::Euclidean;
      else if (k == "energy") cfg.distance_kind = DistanceKind::Energy;
      else if (k == "relative") cfg.distance_kind = DistanceKind::Relative;
      else throw ConfigError("distance.kind must be euclidean, energy, or relative");
    }
  }

  if (j.contains("measures")) {
    const auto& jq = j["measures"];
    detail::check_keys(jq, "measures",
                       {"tau", "t_eps", "restricted", "restricted_radius_sq"});
    if (jq.contains("tau"))
      cfg.tau = detail::json_number(jq["tau"], "measures.tau");
    if (jq.contains("t_eps"))
      cfg.t_eps = detail::json_number(jq["t_eps"], "measures.t_eps");
    if (jq.contains("restricted"))
      cfg.use_restricted = jq["restricted"].get<bool>();
    if (jq.contains("restricted_radius_sq"))
      cfg.restricted_radius_sq = detail::json_number(
          jq["restricted_radius_sq"], "measures.restricted_radius_sq");
  }

  if (j.contains("integrator")) {
    const auto& ji = j["integrator"];
    detail::check_keys(ji, "integrator",
                       {"rel_tol", "abs_tol", "initial_step", "max_step",
                        "t_max", "max_steps"});
    if (ji.contains("rel_tol"))
      cfg.integrator.rel_tol = detail::json_number(ji["rel_tol"], "integrator.rel_tol");
    if (ji.contains("abs_tol"))
      cfg.integrator.abs_tol = detail::json_number(ji["abs_tol"], "integrator.abs_tol");
    if (ji.contains("initial_step"))
      cfg.integrator.initial_step =
          detail::json_number(ji["initial_step"], "integrator.initial_step");
    if (ji.contains("max_step"))
      cfg.integrator.max_step = detail::json_number(ji["max_step"], "integrator.max_step");
    if (ji.contains("t_max"))
      cfg.integrator.t_max = detail::json_number(ji["t_max"], "integrator.t_max");
    if (ji.contains("max_steps"))
      cfg.integrator.max_steps = ji["max_steps"].get<long>();
  }

  if (j.contains("sweep")) {
    const auto& js = j["sweep"];
    detail::check_keys(js, "sweep", {"parameter", "from", "to", "points", "count"});
    SweepSpec s;
    if (!js.contains("parameter"))
      throw ConfigError("sweep.parameter is required");
    s.parameter = js["parameter"].get<std::string>();
    if (js.contains("from")) s.from = detail::json_number(js["from"], "sweep.from");
    if (js.contains("to")) s.to = detail::json_number(js["to"], "sweep.to");
    if (js.contains("points")) s.points = js["points"].get<int>();
    if (js.contains("count")) s.count = js["count"].get<long>();
    s.validate();
    cfg.sweep = s;
  }

  if (j.contains("pareto")) {
    const auto& jp = j["pareto"];
    detail::check_keys(jp, "pareto", {"from", "to", "points", "count"});
    ParetoSpec s;
    if (jp.contains("from")) s.from = detail::json_number(jp["from"], "pareto.from");
    if (jp.contains("to")) s.to = detail::json_number(jp["to"], "pareto.to");
    if (jp.contains("points")) s.points = jp["points"].get<int>();
    if (jp.contains("count")) s.count = jp["count"].get<long>();
    s.validate();
    cfg.pareto = s;
  }

  if (j.contains("workers")) cfg.workers = j["workers"].get<int>();
  if (j.contains("out")) cfg.out_dir = j["out"].get<std::string>();
  return cfg;
}

/// Apply one `path=value` override (dotted path into the JSON document).
/// The value is parsed as JSON when possible, else taken as a string.
inline void apply_override(nlohmann::json& root, const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + assignment + "' must look like path=value");
  std::string path = assignment.substr(0, eq);
  std::string raw = assignment.substr(eq + 1);

  nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;  // unquoted string

  nlohmann::json* node = &root;
  std::size_t start = 0;
  while (true) {
    auto dot = path.find('.', start);
    std::string key = path.substr(start, dot - start);
    if (key.empty())
      throw ConfigError("override path '" + path + "' has an empty segment");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

/// One-line-per-model summary for `models list`.
inline std::string describe_models() {
  return
      "solow  1-d capital accumulation dx/dt = F(x) - C x\n"
      "       variants: base fa fb fc fd\n"
      "       params: maintenance saving_scale half_saturation gap_scale\n"
      "               dip_center dip_halfwidth dip_depth ramp_start ramp_width\n"
      "               low_half_saturation low_hill_exponent\n"
      "wagon  2-d spring/magnet oscillator with optional latched spring break\n"
      "       params: mass damping stiffness magnetic_stiffness\n"
      "               magnet_position speed_limit\n"
      "fish   3-d stage-structured consumer-resource population\n"
      "       params: half_saturation maintenance turnover ingestion_max\n"
      "               juvenile_mortality adult_mortality ingestion_ratio\n"
      "               efficiency resource_max size_ratio juvenile_harvest\n"
      "               adult_harvest harvest\n";
}

}  // namespace basin
