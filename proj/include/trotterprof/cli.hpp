// Copyright 2026 The trotterprof Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "trotterprof/config.hpp"
#include "trotterprof/errors.hpp"
#include "trotterprof/experiments.hpp"
#include "trotterprof/mpf.hpp"
#include "trotterprof/profiling.hpp"

namespace trotterprof {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitNumerical = 2;

namespace detail {

struct CliOptions {
  std::string config_path;
  std::string preset;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::string methods;
  double time = 0.5;
  std::optional<double> t_min;
  std::optional<double> t_max;
};

inline std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline ConfigDocument load_document(const CliOptions& o) {
  ConfigDocument doc;
  if (!o.config_path.empty()) {
    doc = parse_document(read_text_file(o.config_path));
  } else {
    doc = preset_document(o.preset);
  }
  if (o.seed) doc.noise.seed = *o.seed;
  if (!o.out_path.empty()) doc.output.path = o.out_path;
  return doc;
}

inline std::vector<Method> parse_methods(const std::string& list, std::vector<Method> fallback) {
  if (list.empty()) return fallback;
  std::vector<Method> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    const auto comma = list.find(',', start);
    const std::string item = list.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    try {
      out.push_back(parse_method(item));
    } catch (const Error& e) {
      throw ConfigError(std::string("--method: ") + e.what());
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

inline ResultTable new_table(const ConfigDocument& doc) {
  ResultTable table;
  table.metadata = {{"config_hash", config_hash(doc)},
                    {"seed", std::to_string(doc.noise.seed)},
                    {"tool_version", std::string(kToolVersion)}};
  return table;
}

inline void emit_table(ResultTable table, const ConfigDocument& doc, std::ostream& out) {
  table.sort_rows();
  if (doc.output.path.empty()) {
    out << csv_string(table);
  } else {
    write_csv(table, doc.output.path);
  }
}

inline std::string fmt(double v) { return format_double(v); }

inline std::string basis_text(const BasisSpec& b) {
  std::string s = "{";
  for (std::size_t k = 0; k < b.orders.size(); ++k) s += (k ? ", " : "") + std::to_string(b.orders[k]);
  s += "}";
  if (b.include_antisymmetric) s += " + antisymmetric";
  return s;
}

inline int cmd_curves(const CliOptions& o, std::vector<Method> fallback, std::ostream& out) {
  const ConfigDocument doc = load_document(o);
  const ExperimentConfig cfg = build_config(doc);
  ResultTable table = new_table(doc);
  for (Method m : parse_methods(o.methods, std::move(fallback))) add_curve(table, run_error_curve(cfg, m));
  emit_table(std::move(table), doc, out);
  return kExitOk;
}

inline int cmd_profile(const CliOptions& o, std::ostream& out) {
  const ConfigDocument doc = load_document(o);
  const ExperimentConfig cfg = build_config(doc);
  if (!(o.time > 0.0)) throw ConfigError("--time must be positive");
  const BasisSpec basis = resolve_basis(cfg);
  const TrotterStepper stepper(cfg.formula, cfg.partition);
  const auto est = mitigated_estimate(stepper, cfg.formula.symmetric, cfg.formula.alpha, o.time, basis,
                                      cfg.profiling.a_grid, cfg.observable, cfg.initial_state,
                                      cfg.profiling.trotter_steps);
  const double exact = expectation(exact_evolve(cfg.partition.hamiltonian(), o.time, cfg.initial_state), cfg.observable);

  ResultTable table = new_table(doc);
  for (const auto& s : est.samples) table.rows.push_back({"profile", o.time, s.a, s.value, exact, std::abs(s.value - exact)});
  table.rows.push_back({"ep", o.time, static_cast<double>(est.samples.size()), est.estimate, exact,
                        std::abs(est.estimate - exact)});
  std::ostringstream report;
  report << "# basis=" << basis_text(basis) << "\n";
  report << "# y_star=" << fmt(est.fit.y_star) << "\n";
  for (const auto& [s, m] : est.fit.coefficients) report << "# m_" << s << "=" << fmt(m) << "\n";
  for (const auto& [s, m] : est.fit.antisymmetric_coefficients) report << "# n_" << s << "=" << fmt(m) << "\n";
  report << "# residual_norm=" << fmt(est.fit.residual_norm) << "\n";
  report << "# condition_number=" << fmt(est.fit.condition_number) << "\n";
  if (doc.output.path.empty()) {
    out << report.str();
    emit_table(std::move(table), doc, out);
  } else {
    emit_table(std::move(table), doc, out);
    out << report.str();
  }
  return kExitOk;
}

inline int cmd_calibrate(const CliOptions& o, std::ostream& out) {
  const ExperimentConfig cfg = build_config(load_document(o));
  CalibrationOptions opt;
  opt.max_order = cfg.window_top();
  const TrotterStepper stepper(cfg.formula, cfg.partition);
  const ExactPropagator exact(cfg.partition.hamiltonian());
  const Calibration cal = calibrate_basis(stepper, cfg.formula.symmetric, cfg.formula.alpha, exact, cfg.observable,
                                          cfg.initial_state, cfg.profiling.trotter_steps, opt);
  out << "formula " << cfg.formula.name << " alpha " << cfg.formula.alpha << (cfg.formula.symmetric ? " symmetric" : "")
      << "\n";
  out << "window [" << cfg.formula.alpha << ", " << opt.max_order << "]\n";
  out << "basis " << basis_text(cal.basis) << "\n";
  out << "grid_size " << (cfg.profiling.a_grid.empty() ? 2 * cal.basis.orders.size() + 1 : cfg.profiling.a_grid.size())
      << "\n";
  out << "max_asymmetry " << fmt(cal.max_asymmetry) << "\n";
  out << "condition_number " << fmt(cal.condition_number) << "\n";
  for (std::size_t i = 0; i < cal.a_values.size(); ++i) {
    out << "a " << fmt(cal.a_values[i]);
    for (std::size_t c = 0; c < cal.fitted_orders.size() && cal.fitted_orders[c] <= opt.max_order; ++c) {
      out << " c" << cal.fitted_orders[c] << "=" << fmt(cal.coefficients[i][c]);
    }
    out << "\n";
  }
  return kExitOk;
}

inline int cmd_slope(const CliOptions& o, std::ostream& out) {
  const ExperimentConfig cfg = build_config(load_document(o));
  const double lo = o.t_min.value_or(cfg.times.front());
  const double hi = o.t_max.value_or(cfg.times.back());
  for (Method m : parse_methods(o.methods, {Method::kTrotter, Method::kEp, Method::kMpf})) {
    const ErrorCurve curve = run_error_curve(cfg, m);
    out << method_name(m) << " slope " << fmt(slope_fit(curve, lo, hi)) << "\n";
  }
  return kExitOk;
}

inline int cmd_cost(const CliOptions& o, std::ostream& out) {
  const ExperimentConfig cfg = build_config(load_document(o));
  CostParams p;
  p.formula = cfg.formula;
  p.partition = cfg.partition;
  p.trotter_steps = cfg.profiling.trotter_steps;
  if (cfg.profiling.a_grid.empty()) {
    p.grid_size = static_cast<int>(2 * resolve_basis(cfg).orders.size() + 1);
  } else {
    p.grid_size = static_cast<int>(cfg.profiling.a_grid.size());
  }
  p.step_counts = cfg.mpf.step_counts;
  out << "method,circuits,trotter_steps,elementary_gates\n";
  for (Method m : parse_methods(o.methods, {Method::kTrotter, Method::kEp, Method::kMpf})) {
    const CircuitCost c = circuit_cost(m, p);
    out << method_name(m) << "," << c.circuits << "," << c.trotter_steps << "," << c.elementary_gates << "\n";
  }
  return kExitOk;
}

}  // namespace detail

/// Runs one subcommand. args excludes the program name.
inline int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  detail::CliOptions o;
  CLI::App app{"Error profiling and multi-product formula experiments for Trotter circuits", "trotterprof"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON config file");
    sub->add_option("--preset", o.preset, "built-in config, e.g. tfim-ruth3");
    sub->add_option("--seed", o.seed, "noise seed override");
  };
  auto add_out = [&](CLI::App* sub) { sub->add_option("--out", o.out_path, "CSV output path (default: stdout)"); };
  auto add_method = [&](CLI::App* sub) { sub->add_option("--method", o.methods, "comma list of trotter,ep,mpf"); };

  auto* run = app.add_subcommand("run", "error curves for trotter, ep and mpf");
  add_common(run);
  add_out(run);
  add_method(run);
  auto* profile = app.add_subcommand("profile", "single-time a sweep and fit report");
  add_common(profile);
  add_out(profile);
  profile->add_option("--time", o.time, "evolution time");
  auto* mpf = app.add_subcommand("mpf", "multi-product formula error curve");
  add_common(mpf);
  add_out(mpf);
  auto* calibrate = app.add_subcommand("calibrate", "report the calibrated fit basis");
  add_common(calibrate);
  auto* slope = app.add_subcommand("slope", "log-log error slopes");
  add_common(slope);
  add_method(slope);
  slope->add_option("--tmin", o.t_min, "lower time bound");
  slope->add_option("--tmax", o.t_max, "upper time bound");
  auto* cost = app.add_subcommand("cost", "circuit counts per method");
  add_common(cost);
  add_method(cost);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitConfig;
  }

  if (o.config_path.empty() == o.preset.empty()) {
    err << "error: give exactly one of --config or --preset\n" << app.help("", CLI::AppFormatMode::All);
    return kExitConfig;
  }
  try {
    if (run->parsed()) return detail::cmd_curves(o, {Method::kTrotter, Method::kEp, Method::kMpf}, out);
    if (mpf->parsed()) return detail::cmd_curves(o, {Method::kMpf}, out);
    if (profile->parsed()) return detail::cmd_profile(o, out);
    if (calibrate->parsed()) return detail::cmd_calibrate(o, out);
    if (slope->parsed()) return detail::cmd_slope(o, out);
    if (cost->parsed()) return detail::cmd_cost(o, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitConfig;
}

}  // namespace trotterprof
