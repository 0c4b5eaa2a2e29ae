#pragma once

// File formats: outcomes/samples CSV, the measure-report JSON and CSV row,
// and the metadata sidecar. Floats are serialized with 17 significant digits
// so that emitted values round-trip bit-exactly; readers validate headers and
// report the first offending column by name.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "basin/core.hpp"
#include "basin/measures.hpp"

namespace basin::io {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string format_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

inline double parse_double_field(const std::string& field,
                                 const std::string& column) {
  // std::from_chars rather than std::stod: stod raises out_of_range on
  // subnormal values, which the writer can legitimately emit.
  double v = 0.0;
  const char* first = field.data();
  const char* last = first + field.size();
  auto [end, ec] = std::from_chars(first, last, v);
  if (end != last || ec != std::errc())
    throw ConfigError("column '" + column + "' holds a non-numeric value '" +
                      field + "'");
  return v;
}

inline std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  return out;
}

inline std::ifstream open_for_read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "' for reading");
  return in;
}

}  // namespace detail

/// Header for the per-IC outcome table: idx, x1..xn, verdict, return_time,
/// term_x1..term_xn.
inline std::string outcomes_csv_header(int dim) {
  std::string h = "idx";
  for (int i = 1; i <= dim; ++i) h += ",x" + std::to_string(i);
  h += ",verdict,return_time";
  for (int i = 1; i <= dim; ++i) h += ",term_x" + std::to_string(i);
  return h;
}

inline void write_outcomes_csv(std::ostream& out,
                               std::span<const TrajectoryOutcome> outcomes,
                               int dim) {
  out << outcomes_csv_header(dim) << '\n';
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    out << i;
    for (double v : o.initial_condition) out << ',' << format_double(v);
    out << ',' << to_string(o.verdict) << ','
        << format_optional(o.return_time);
    for (double v : o.terminal_state) out << ',' << format_double(v);
    out << '\n';
  }
}

inline void write_outcomes_csv(const std::string& path,
                               std::span<const TrajectoryOutcome> outcomes,
                               int dim) {
  auto out = detail::open_for_write(path);
  write_outcomes_csv(out, outcomes, dim);
}

inline std::vector<TrajectoryOutcome> read_outcomes_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw ConfigError("outcomes file is empty (missing header)");
  auto header = detail::split_csv_line(line);
  // Infer the dimension from the column count: 2n + 3 columns.
  if (header.size() < 5 || header.size() % 2 == 0)
    throw ConfigError("outcomes header has " +
                      std::to_string(header.size()) +
                      " columns; expected idx, x1..xn, verdict, return_time, "
                      "term_x1..term_xn");
  const int dim = static_cast<int>((header.size() - 3) / 2);
  auto expect = [&](std::size_t i, const std::string& name) {
    if (header[i] != name)
      throw ConfigError("outcomes header column " + std::to_string(i + 1) +
                        " is '" + header[i] + "', expected '" + name + "'");
  };
  expect(0, "idx");
  for (int i = 0; i < dim; ++i)
    expect(1 + static_cast<std::size_t>(i), "x" + std::to_string(i + 1));
  expect(1 + static_cast<std::size_t>(dim), "verdict");
  expect(2 + static_cast<std::size_t>(dim), "return_time");
  for (int i = 0; i < dim; ++i)
    expect(3 + static_cast<std::size_t>(dim + i),
           "term_x" + std::to_string(i + 1));

  std::vector<TrajectoryOutcome> outcomes;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = detail::split_csv_line(line);
    if (fields.size() != header.size())
      throw ConfigError("outcomes row " +
                        std::to_string(outcomes.size() + 1) + " has " +
                        std::to_string(fields.size()) + " fields, expected " +
                        std::to_string(header.size()));
    TrajectoryOutcome o;
    for (int i = 0; i < dim; ++i)
      o.initial_condition.push_back(detail::parse_double_field(
          fields[1 + static_cast<std::size_t>(i)],
          "x" + std::to_string(i + 1)));
    auto verdict =
        verdict_from_string(fields[1 + static_cast<std::size_t>(dim)]);
    if (!verdict)
      throw ConfigError("column 'verdict' holds unknown value '" +
                        fields[1 + static_cast<std::size_t>(dim)] + "'");
    o.verdict = *verdict;
    const std::string& rt = fields[2 + static_cast<std::size_t>(dim)];
    if (!rt.empty())
      o.return_time = detail::parse_double_field(rt, "return_time");
    if (o.verdict == Verdict::Safe && !o.return_time)
      throw ConfigError("column 'return_time' is empty on a safe row");
    for (int i = 0; i < dim; ++i)
      o.terminal_state.push_back(detail::parse_double_field(
          fields[3 + static_cast<std::size_t>(dim + i)],
          "term_x" + std::to_string(i + 1)));
    outcomes.push_back(std::move(o));
  }
  return outcomes;
}

inline std::vector<TrajectoryOutcome> read_outcomes_csv(
    const std::string& path) {
  auto in = detail::open_for_read(path);
  return read_outcomes_csv(in);
}

/// Samples CSV: one row per IC, columns x1..xn. Lets classification runs be
/// resumed or shared.
inline void write_samples_csv(std::ostream& out,
                              std::span<const State> samples, int dim) {
  for (int i = 1; i <= dim; ++i) out << (i == 1 ? "" : ",") << 'x' << i;
  out << '\n';
  for (const State& s : samples) {
    for (std::size_t i = 0; i < s.size(); ++i)
      out << (i == 0 ? "" : ",") << format_double(s[i]);
    out << '\n';
  }
}

inline std::vector<State> read_samples_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw ConfigError("samples file is empty (missing header)");
  auto header = detail::split_csv_line(line);
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] != "x" + std::to_string(i + 1))
      throw ConfigError("samples header column " + std::to_string(i + 1) +
                        " is '" + header[i] + "', expected 'x" +
                        std::to_string(i + 1) + "'");
  std::vector<State> samples;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = detail::split_csv_line(line);
    if (fields.size() != header.size())
      throw ConfigError("samples row " + std::to_string(samples.size() + 1) +
                        " has " + std::to_string(fields.size()) +
                        " fields, expected " + std::to_string(header.size()));
    State s;
    for (std::size_t i = 0; i < fields.size(); ++i)
      s.push_back(detail::parse_double_field(fields[i], header[i]));
    samples.push_back(std::move(s));
  }
  return samples;
}

inline nlohmann::json state_to_json(const State& s) {
  nlohmann::json arr = nlohmann::json::array();
  for (double v : s) arr.push_back(v);
  return arr;
}

/// Full report as JSON; optional estimators serialize to null when absent.
inline nlohmann::json report_to_json(const MeasureReport& r) {
  nlohmann::json j;
  j["p_hat"] = r.p_hat;
  j["p_std_err"] = r.p_std_err;
  j["d_hat"] = r.d_hat ? nlohmann::json(*r.d_hat) : nlohmann::json();
  j["d_norm"] = to_string(r.d_norm_kind);
  j["d_argmin"] =
      r.d_argmin ? state_to_json(*r.d_argmin) : nlohmann::json();
  j["r_hat"] = r.r_hat;
  j["r_std_err"] = r.r_std_err;
  j["r_worst"] = r.r_worst ? nlohmann::json(*r.r_worst) : nlohmann::json();
  j["p_tau"] = r.p_tau;
  j["p_tau_std_err"] = r.p_tau_std_err;
  j["d_tau"] = r.d_tau ? nlohmann::json(*r.d_tau) : nlohmann::json();
  j["d_tau_argmin"] =
      r.d_tau_argmin ? state_to_json(*r.d_tau_argmin) : nlohmann::json();
  j["tau"] = r.tau;
  j["t_eps"] = r.t_eps;
  j["lambda_max"] = r.lambda ? nlohmann::json(*r.lambda) : nlohmann::json();
  j["lambda_warning"] = r.lambda_warning;
  j["n_safe"] = r.n_safe;
  j["n_unsafe"] = r.n_unsafe;
  j["n_undetermined"] = r.n_undetermined;
  j["n_tot"] = r.n_tot;
  j["seed"] = r.seed;
  return j;
}

/// Fixed report column block shared by the measures/sweep/pareto tables.
inline std::string report_csv_columns() {
  return "p_hat,p_std_err,d_hat,r_hat,r_worst,p_tau,d_tau,lambda_max,"
         "n_safe,n_unsafe,n_undetermined,n_tot,seed";
}

inline std::string report_csv_fields(const MeasureReport& r) {
  std::string row;
  row += format_double(r.p_hat);
  row += ',' + format_double(r.p_std_err);
  row += ',' + format_optional(r.d_hat);
  row += ',' + format_double(r.r_hat);
  row += ',' + format_optional(r.r_worst);
  row += ',' + format_double(r.p_tau);
  row += ',' + format_optional(r.d_tau);
  row += ',' + format_optional(r.lambda);
  row += ',' + std::to_string(r.n_safe);
  row += ',' + std::to_string(r.n_unsafe);
  row += ',' + std::to_string(r.n_undetermined);
  row += ',' + std::to_string(r.n_tot);
  row += ',' + std::to_string(r.seed);
  return row;
}

/// Single-point report CSV: header plus one row.
inline void write_report_csv(std::ostream& out, const MeasureReport& r) {
  out << report_csv_columns() << '\n' << report_csv_fields(r) << '\n';
}

}  // namespace basin::io
