// Command-line front end: loads a JSON run configuration, applies flag
// overrides, and dispatches to classify / measures / sweep / pareto. All
// outputs are deterministic in (config, seed) regardless of --workers.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "basin/io.hpp"
#include "basin/run.hpp"
#include "basin/scenario.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> overrides;
  std::int64_t seed = -1;
  int workers = 0;
  std::string out_dir;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "JSON run configuration");
  cmd->add_option("--set", opts.overrides,
                  "Override a config key, e.g. --set model.params.stiffness=0.3");
  cmd->add_option("--seed", opts.seed, "Override plan.seed");
  cmd->add_option("--workers", opts.workers, "Worker threads (default 1)");
  cmd->add_option("--out", opts.out_dir, "Output directory (default '.')");
}

basin::RunConfig load_config(const CommonOpts& opts) {
  nlohmann::json j = nlohmann::json::object();
  if (!opts.config_path.empty()) {
    std::ifstream in(opts.config_path);
    if (!in)
      throw basin::ConfigError("cannot open config '" + opts.config_path + "'");
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw basin::ConfigError("config '" + opts.config_path +
                               "' is not valid JSON: " + e.what());
    }
  }
  for (const auto& ov : opts.overrides) basin::apply_override(j, ov);
  if (opts.seed >= 0) j["plan"]["seed"] = static_cast<std::uint64_t>(opts.seed);
  if (opts.workers > 0) j["workers"] = opts.workers;
  if (!opts.out_dir.empty()) j["out"] = opts.out_dir;
  return basin::run_config_from_json(j);
}

std::filesystem::path prepare_out_dir(const basin::RunConfig& cfg) {
  std::filesystem::path dir = cfg.out_dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw basin::ConfigError("cannot create output directory '" +
                             dir.string() + "': " + ec.message());
  return dir;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out)
    throw basin::ConfigError("cannot open '" + path.string() + "' for writing");
  out << text;
}

basin::Scenario require_scenario(const basin::RunConfig& cfg) {
  basin::ScenarioResult built = basin::build_scenario(cfg);
  if (!built.scenario)
    throw basin::ConfigError("this configuration has no attractor (" +
                             built.flag + "); nothing to classify");
  return *built.scenario;
}

int cmd_classify(const CommonOpts& opts) {
  basin::RunConfig cfg = load_config(opts);
  basin::Scenario sc = require_scenario(cfg);
  auto dir = prepare_out_dir(cfg);

  basin::PointResult res = basin::run_point(sc, cfg.workers);
  basin::io::write_outcomes_csv((dir / "outcomes.csv").string(), res.outcomes,
                                sc.model.dim);
  write_text(dir / "outcomes.meta.json", basin::run_metadata(sc).dump(2) + "\n");

  std::cout << "classified " << res.report.n_tot << " initial conditions: "
            << res.report.n_safe << " safe, " << res.report.n_unsafe
            << " unsafe, " << res.report.n_undetermined << " undetermined\n"
            << "wrote " << (dir / "outcomes.csv").string() << '\n';
  return 0;
}

int cmd_measures(const CommonOpts& opts, const std::string& outcomes_path) {
  basin::RunConfig cfg = load_config(opts);
  basin::Scenario sc = require_scenario(cfg);
  auto dir = prepare_out_dir(cfg);

  basin::MeasureReport report;
  if (!outcomes_path.empty()) {
    auto outcomes = basin::io::read_outcomes_csv(outcomes_path);
    for (const auto& o : outcomes)
      if (static_cast<int>(o.initial_condition.size()) != sc.model.dim)
        throw basin::ConfigError(
            "outcomes file dimension does not match the configured model");
    report = basin::build_report(
        outcomes, sc.distance, sc.restricted ? &*sc.restricted : nullptr,
        sc.tau, sc.t_eps, basin::lambda_at_center(sc), sc.plan.seed);
  } else {
    report = basin::run_point(sc, cfg.workers).report;
  }

  write_text(dir / "report.json",
             basin::io::report_to_json(report).dump(2) + "\n");
  std::ostringstream csv;
  basin::io::write_report_csv(csv, report);
  write_text(dir / "report.csv", csv.str());

  std::cout << basin::io::report_to_json(report).dump(2) << '\n';
  return 0;
}

int cmd_sweep(const CommonOpts& opts) {
  basin::RunConfig cfg = load_config(opts);
  if (!cfg.sweep) throw basin::ConfigError("config has no sweep section");
  auto dir = prepare_out_dir(cfg);

  auto rows = basin::run_sweep(cfg);
  int dim = cfg.model == "fish" ? 3 : (cfg.model == "wagon" ? 2 : 1);
  std::ostringstream csv;
  basin::write_sweep_csv(csv, cfg.sweep->parameter, rows, dim);
  write_text(dir / "sweep.csv", csv.str());

  std::cout << "swept " << cfg.sweep->parameter << " over " << rows.size()
            << " points\nwrote " << (dir / "sweep.csv").string() << '\n';
  return 0;
}

int cmd_pareto(const CommonOpts& opts) {
  basin::RunConfig cfg = load_config(opts);
  if (!cfg.pareto) throw basin::ConfigError("config has no pareto section");
  auto dir = prepare_out_dir(cfg);

  auto rows = basin::run_pareto(cfg);
  std::ostringstream csv;
  basin::write_pareto_csv(csv, rows, 3);
  write_text(dir / "pareto.csv", csv.str());

  std::cout << "compared equal vs adult harvesting over "
            << rows.size() / 2 << " rates per strategy\nwrote "
            << (dir / "pareto.csv").string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Monte-Carlo stability and resilience measures for ODE attractors"};
  app.require_subcommand(1);

  CommonOpts classify_opts, measures_opts, sweep_opts, pareto_opts;
  std::string outcomes_path;

  auto* classify =
      app.add_subcommand("classify", "Sample perturbations and classify them");
  add_common(classify, classify_opts);

  auto* measures = app.add_subcommand(
      "measures", "Compute every estimator from one classification pass");
  add_common(measures, measures_opts);
  measures->add_option("--outcomes", outcomes_path,
                       "Reuse a previously written outcomes CSV");

  auto* sweep =
      app.add_subcommand("sweep", "Re-run the measures across a parameter range");
  add_common(sweep, sweep_opts);

  auto* pareto = app.add_subcommand(
      "pareto", "Yield vs resilience for equal and adult harvesting");
  add_common(pareto, pareto_opts);

  auto* models = app.add_subcommand("models", "Model catalogue");
  auto* models_list = models->add_subcommand("list", "List bundled models");
  models->require_subcommand(1);

  CLI11_PARSE(app, argc, argv);

  try {
    if (classify->parsed()) return cmd_classify(classify_opts);
    if (measures->parsed()) return cmd_measures(measures_opts, outcomes_path);
    if (sweep->parsed()) return cmd_sweep(sweep_opts);
    if (pareto->parsed()) return cmd_pareto(pareto_opts);
    if (models->parsed() && models_list->parsed()) {
      std::cout << basin::describe_models();
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
