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

#include <json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <unistd.h>
#include <vector>

#include "trotterprof/errors.hpp"
#include "trotterprof/experiments.hpp"
#include "trotterprof/pauli.hpp"
#include "trotterprof/simulator.hpp"
#include "trotterprof/trotter.hpp"

namespace trotterprof {

inline constexpr std::string_view kToolVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Document model
// ---------------------------------------------------------------------------

struct TermSpec {
  std::string pauli;
  Complex coeff{1.0, 0.0};
  friend bool operator==(const TermSpec&, const TermSpec&) = default;
};

/// Either a built-in name or a custom step list (name empty).
struct FormulaSpec {
  std::string name;
  std::vector<FormulaStep> steps;
  int alpha = 2;
  bool symmetric = false;
  friend bool operator==(const FormulaSpec&, const FormulaSpec&) = default;
};

struct InitialStateSpec {
  std::vector<std::array<Complex, 2>> product;  // per-qubit (|0>, |1>) amplitudes
  std::vector<Complex> amplitudes;              // full 2^n vector, used when product is empty
  friend bool operator==(const InitialStateSpec&, const InitialStateSpec&) = default;
};

struct TimesSpec {
  double start = 0.1;
  double stop = 1.0;
  int points = 20;
  std::string scale = "log";
  friend bool operator==(const TimesSpec&, const TimesSpec&) = default;
};

struct ProfilingSpec {
  int n_extra_orders = -1;
  std::vector<double> a_grid;
  int trotter_steps = 1;
  std::vector<int> orders;  // non-empty: fixed basis, no calibration
  bool include_antisymmetric = false;
  friend bool operator==(const ProfilingSpec&, const ProfilingSpec&) = default;
};

struct MpfSpec {
  std::vector<int> step_counts{1, 2};
  std::optional<bool> symmetric;
  friend bool operator==(const MpfSpec&, const MpfSpec&) = default;
};

struct NoiseSpec {
  double sigma = 0.0;
  std::uint64_t seed = 0;
  friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

struct OutputSpec {
  std::string path;
  std::string format = "csv";
  friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

struct ConfigDocument {
  std::string name;
  int num_qubits = 0;
  std::vector<TermSpec> hamiltonian;
  std::vector<std::vector<int>> partition;
  FormulaSpec formula;
  InitialStateSpec initial_state;
  std::vector<TermSpec> observable;
  TimesSpec times;
  ProfilingSpec profiling;
  MpfSpec mpf;
  NoiseSpec noise;
  OutputSpec output;
  friend bool operator==(const ConfigDocument&, const ConfigDocument&) = default;
};

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

inline std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const char* model : {"tfim", "xxz"}) {
    for (const char* f : {"lie1", "strang2", "ruth3", "suzuki4"}) out.push_back(std::string(model) + "-" + f);
  }
  return out;
}

inline std::vector<TermSpec> term_specs(const OperatorSum& op) {
  std::vector<TermSpec> out;
  for (const auto& t : op.terms()) out.push_back({t.word, t.coeff});
  return out;
}

/// Expanded document for a built-in "model-formula" preset name.
inline ConfigDocument preset_document(std::string_view preset) {
  const auto dash = preset.find('-');
  if (dash == std::string_view::npos) throw ConfigError("unknown preset '" + std::string(preset) + "'");
  const auto model = preset.substr(0, dash);
  const auto formula = preset.substr(dash + 1);
  ExperimentConfig cfg;
  try {
    if (model == "tfim") {
      cfg = tfim_config(formula);
    } else if (model == "xxz") {
      cfg = xxz_config(formula);
    } else {
      throw ConfigError("unknown preset '" + std::string(preset) + "'");
    }
  } catch (const InvalidArgumentError& e) {
    throw ConfigError("unknown preset '" + std::string(preset) + "': " + e.what());
  }
  ConfigDocument doc;
  doc.name = std::string(preset);
  doc.num_qubits = cfg.partition.n;
  int index = 0;
  for (const auto& frag : cfg.partition.fragments) {
    std::vector<int> ids;
    for (const auto& t : frag.terms().terms()) {
      doc.hamiltonian.push_back({t.word, t.coeff});
      ids.push_back(index++);
    }
    doc.partition.push_back(std::move(ids));
  }
  doc.formula.name = std::string(formula);
  const Complex i{0.0, 1.0};
  doc.initial_state.product = {{1.0, 0.0}, {1.0, i}, {1.0, 1.0}, {0.0, 1.0}};
  doc.observable = term_specs(cfg.observable);
  return doc;
}

// ---------------------------------------------------------------------------
// JSON <-> document
// ---------------------------------------------------------------------------

namespace detail {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

inline Complex complex_from_json(const Json& j, const std::string& field) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return {j[0].get<double>(), j[1].get<double>()};
  }
  throw ConfigError(field + ": expected a number or [re, im] pair");
}

inline OrderedJson complex_to_json(Complex c) {
  if (c.imag() == 0.0) return c.real();
  return OrderedJson::array({c.real(), c.imag()});
}

template <class T>
T get_field(const Json& j, const char* key, const std::string& field) {
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(field + "." + key + ": missing or wrong type");
  }
}

inline std::vector<TermSpec> terms_from_json(const Json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError(field + ": expected a list of {pauli, coeff}");
  std::vector<TermSpec> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const std::string f = field + "[" + std::to_string(k) + "]";
    if (!j[k].is_object()) throw ConfigError(f + ": expected an object");
    TermSpec t;
    t.pauli = get_field<std::string>(j[k], "pauli", f);
    t.coeff = j[k].contains("coeff") ? complex_from_json(j[k]["coeff"], f + ".coeff") : Complex{1.0, 0.0};
    out.push_back(std::move(t));
  }
  return out;
}

inline OrderedJson terms_to_json(const std::vector<TermSpec>& terms) {
  OrderedJson arr = OrderedJson::array();
  for (const auto& t : terms) arr.push_back(OrderedJson{{"pauli", t.pauli}, {"coeff", complex_to_json(t.coeff)}});
  return arr;
}

// 1-based line of a byte offset, for syntax diagnostics.
inline std::size_t line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

}  // namespace detail

/// Parses the JSON text; a "preset" key seeds the document and any other
/// sections present override it.
inline ConfigDocument parse_document(std::string_view text) {
  using detail::Json;
  Json j;
  try {
    j = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw ConfigError("syntax error at line " + std::to_string(detail::line_of(text, e.byte)) + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be an object");

  ConfigDocument doc;
  if (j.contains("preset")) {
    if (!j["preset"].is_string()) throw ConfigError("preset: expected a string");
    doc = preset_document(j["preset"].get<std::string>());
  }
  try {
    if (j.contains("name")) doc.name = j["name"].get<std::string>();
    if (j.contains("system")) {
      const auto& s = j["system"];
      doc.num_qubits = detail::get_field<int>(s, "num_qubits", "system");
      if (!s.contains("hamiltonian")) throw ConfigError("system.hamiltonian: missing");
      doc.hamiltonian = detail::terms_from_json(s["hamiltonian"], "system.hamiltonian");
    }
    if (j.contains("partition")) doc.partition = j["partition"].get<std::vector<std::vector<int>>>();
    if (j.contains("formula")) {
      const auto& f = j["formula"];
      doc.formula = FormulaSpec{};
      if (f.is_string()) {
        doc.formula.name = f.get<std::string>();
      } else if (f.is_object()) {
        if (!f.contains("steps") || !f["steps"].is_array()) throw ConfigError("formula.steps: missing or not a list");
        for (const auto& st : f["steps"]) {
          if (!st.is_array() || st.size() != 2) throw ConfigError("formula.steps: expected [fragment, coefficient] pairs");
          doc.formula.steps.push_back({st[0].get<int>(), st[1].get<double>()});
        }
        doc.formula.alpha = detail::get_field<int>(f, "alpha", "formula");
        doc.formula.symmetric = f.value("symmetric", false);
      } else {
        throw ConfigError("formula: expected a name or {steps, alpha, symmetric}");
      }
    }
    if (j.contains("initial_state")) {
      const auto& s = j["initial_state"];
      doc.initial_state = InitialStateSpec{};
      if (s.contains("product")) {
        for (std::size_t q = 0; q < s["product"].size(); ++q) {
          const auto& pair = s["product"][q];
          const std::string f = "initial_state.product[" + std::to_string(q) + "]";
          if (!pair.is_array() || pair.size() != 2) throw ConfigError(f + ": expected two amplitudes");
          doc.initial_state.product.push_back({detail::complex_from_json(pair[0], f), detail::complex_from_json(pair[1], f)});
        }
      } else if (s.contains("amplitudes")) {
        for (const auto& a : s["amplitudes"]) {
          doc.initial_state.amplitudes.push_back(detail::complex_from_json(a, "initial_state.amplitudes"));
        }
      } else {
        throw ConfigError("initial_state: expected 'product' or 'amplitudes'");
      }
    }
    if (j.contains("observable")) doc.observable = detail::terms_from_json(j["observable"], "observable");
    if (j.contains("times")) {
      const auto& t = j["times"];
      doc.times.start = t.value("start", doc.times.start);
      doc.times.stop = t.value("stop", doc.times.stop);
      doc.times.points = t.value("points", doc.times.points);
      doc.times.scale = t.value("scale", doc.times.scale);
    }
    if (j.contains("profiling")) {
      const auto& p = j["profiling"];
      doc.profiling.n_extra_orders = p.value("n_extra_orders", doc.profiling.n_extra_orders);
      if (p.contains("a_grid")) doc.profiling.a_grid = p["a_grid"].get<std::vector<double>>();
      doc.profiling.trotter_steps = p.value("trotter_steps", doc.profiling.trotter_steps);
      if (p.contains("orders")) doc.profiling.orders = p["orders"].get<std::vector<int>>();
      doc.profiling.include_antisymmetric = p.value("include_antisymmetric", doc.profiling.include_antisymmetric);
    }
    if (j.contains("mpf")) {
      const auto& m = j["mpf"];
      if (m.contains("step_counts")) doc.mpf.step_counts = m["step_counts"].get<std::vector<int>>();
      if (m.contains("symmetric")) doc.mpf.symmetric = m["symmetric"].get<bool>();
    }
    if (j.contains("noise")) {
      const auto& n = j["noise"];
      doc.noise.sigma = n.value("sigma", doc.noise.sigma);
      doc.noise.seed = n.value("seed", doc.noise.seed);
    }
    if (j.contains("output")) {
      const auto& o = j["output"];
      doc.output.path = o.value("path", doc.output.path);
      doc.output.format = o.value("format", doc.output.format);
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config field has the wrong type: ") + e.what());
  }
  return doc;
}

/// Fully expanded JSON text; parse_document(serialize(doc)) == doc.
inline std::string serialize(const ConfigDocument& doc) {
  using detail::OrderedJson;
  OrderedJson j;
  if (!doc.name.empty()) j["name"] = doc.name;
  j["system"] = OrderedJson{{"num_qubits", doc.num_qubits}, {"hamiltonian", detail::terms_to_json(doc.hamiltonian)}};
  j["partition"] = doc.partition;
  if (doc.formula.name.empty()) {
    OrderedJson steps = OrderedJson::array();
    for (const auto& s : doc.formula.steps) steps.push_back(OrderedJson::array({s.fragment, s.coefficient}));
    j["formula"] = OrderedJson{{"steps", steps}, {"alpha", doc.formula.alpha}, {"symmetric", doc.formula.symmetric}};
  } else {
    j["formula"] = doc.formula.name;
  }
  if (!doc.initial_state.product.empty()) {
    OrderedJson prod = OrderedJson::array();
    for (const auto& f : doc.initial_state.product) {
      prod.push_back(OrderedJson::array({detail::complex_to_json(f[0]), detail::complex_to_json(f[1])}));
    }
    j["initial_state"] = OrderedJson{{"product", prod}};
  } else {
    OrderedJson amps = OrderedJson::array();
    for (const auto& a : doc.initial_state.amplitudes) amps.push_back(detail::complex_to_json(a));
    j["initial_state"] = OrderedJson{{"amplitudes", amps}};
  }
  j["observable"] = detail::terms_to_json(doc.observable);
  j["times"] = OrderedJson{{"start", doc.times.start}, {"stop", doc.times.stop}, {"points", doc.times.points},
                           {"scale", doc.times.scale}};
  OrderedJson prof{{"n_extra_orders", doc.profiling.n_extra_orders}, {"trotter_steps", doc.profiling.trotter_steps}};
  if (!doc.profiling.a_grid.empty()) prof["a_grid"] = doc.profiling.a_grid;
  if (!doc.profiling.orders.empty()) prof["orders"] = doc.profiling.orders;
  prof["include_antisymmetric"] = doc.profiling.include_antisymmetric;
  j["profiling"] = prof;
  OrderedJson mpf{{"step_counts", doc.mpf.step_counts}};
  if (doc.mpf.symmetric) mpf["symmetric"] = *doc.mpf.symmetric;
  j["mpf"] = mpf;
  j["noise"] = OrderedJson{{"sigma", doc.noise.sigma}, {"seed", doc.noise.seed}};
  j["output"] = OrderedJson{{"path", doc.output.path}, {"format", doc.output.format}};
  return j.dump(2) + "\n";
}

/// FNV-1a over the serialized document, output section excluded.
inline std::string config_hash(const ConfigDocument& doc) {
  ConfigDocument content = doc;
  content.output = OutputSpec{};
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : serialize(content)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Validation: document -> ExperimentConfig
// ---------------------------------------------------------------------------

namespace detail {

inline OperatorSum operator_from_specs(int n, const std::vector<TermSpec>& terms, const std::string& field) {
  OperatorSum op(n);
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const std::string f = field + "[" + std::to_string(k) + "]";
    if (static_cast<int>(terms[k].pauli.size()) != n) {
      throw ConfigError(f + ": word '" + terms[k].pauli + "' does not have " + std::to_string(n) + " letters");
    }
    if (std::abs(terms[k].coeff.imag()) > kHermitianTolerance) {
      throw ConfigError(f + ": coefficient must be real (operator must be Hermitian)");
    }
    try {
      op.add(PauliTerm(terms[k].pauli, terms[k].coeff));
    } catch (const Error& e) {
      throw ConfigError(f + ": " + e.what());
    }
  }
  op.canonicalize();
  return op;
}

}  // namespace detail

inline std::vector<double> expand_times(const TimesSpec& t) {
  if (t.points < 1) throw ConfigError("times.points must be >= 1");
  if (!(t.start > 0.0)) throw ConfigError("times.start must be positive");
  if (t.points > 1 && !(t.stop > t.start)) throw ConfigError("times.stop must exceed times.start");
  if (t.scale == "log") return log_spaced(t.start, t.stop, t.points);
  if (t.scale == "linear") return linear_spaced(t.start, t.stop, t.points);
  throw ConfigError("times.scale must be 'log' or 'linear', got '" + t.scale + "'");
}

inline ExperimentConfig build_config(const ConfigDocument& doc) {
  const int n = doc.num_qubits;
  if (n < 1) throw ConfigError("system.num_qubits must be >= 1");
  if (n > kDenseQubitCap) throw ConfigError("system.num_qubits exceeds the dense cap of " + std::to_string(kDenseQubitCap));
  if (doc.hamiltonian.empty()) throw ConfigError("system.hamiltonian is empty");
  ExperimentConfig cfg;
  cfg.name = doc.name;

  // Partition must cover every Hamiltonian term exactly once.
  std::vector<int> owner(doc.hamiltonian.size(), -1);
  for (std::size_t f = 0; f < doc.partition.size(); ++f) {
    for (int idx : doc.partition[f]) {
      if (idx < 0 || static_cast<std::size_t>(idx) >= doc.hamiltonian.size()) {
        throw ConfigError("partition[" + std::to_string(f) + "]: term index " + std::to_string(idx) + " is out of range");
      }
      if (owner[static_cast<std::size_t>(idx)] >= 0) {
        throw ConfigError("partition: term " + std::to_string(idx) + " (" + doc.hamiltonian[static_cast<std::size_t>(idx)].pauli +
                          ") is assigned to more than one fragment");
      }
      owner[static_cast<std::size_t>(idx)] = static_cast<int>(f);
    }
  }
  for (std::size_t k = 0; k < owner.size(); ++k) {
    if (owner[k] < 0) {
      throw ConfigError("partition: hamiltonian term " + std::to_string(k) + " (" + doc.hamiltonian[k].pauli +
                        ") is not assigned to any fragment");
    }
  }
  (void)detail::operator_from_specs(n, doc.hamiltonian, "system.hamiltonian");
  std::vector<Fragment> fragments;
  for (std::size_t f = 0; f < doc.partition.size(); ++f) {
    std::vector<TermSpec> sub;
    for (int idx : doc.partition[f]) sub.push_back(doc.hamiltonian[static_cast<std::size_t>(idx)]);
    try {
      fragments.emplace_back(detail::operator_from_specs(n, sub, "system.hamiltonian"));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError("partition[" + std::to_string(f) + "]: " + e.what());
    }
  }
  cfg.partition = PartitionedHamiltonian(n, std::move(fragments));

  try {
    if (!doc.formula.name.empty()) {
      cfg.formula = builtin_formula(doc.formula.name, cfg.partition);
    } else {
      cfg.formula.name = "custom";
      cfg.formula.steps = doc.formula.steps;
      cfg.formula.alpha = doc.formula.alpha;
      cfg.formula.symmetric = doc.formula.symmetric;
      validate_formula(cfg.formula, cfg.partition.size());
    }
  } catch (const Error& e) {
    throw ConfigError(std::string("formula: ") + e.what());
  }

  try {
    if (!doc.initial_state.product.empty()) {
      if (static_cast<int>(doc.initial_state.product.size()) != n) {
        throw ConfigError("initial_state.product: expected " + std::to_string(n) + " factors");
      }
      cfg.initial_state = init_product_state(std::span<const std::array<Complex, 2>>(doc.initial_state.product));
    } else {
      if (doc.initial_state.amplitudes.size() != (std::size_t{1} << n)) {
        throw ConfigError("initial_state.amplitudes: expected " + std::to_string(std::size_t{1} << n) + " entries");
      }
      cfg.initial_state = state_from_amplitudes(doc.initial_state.amplitudes);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("initial_state: ") + e.what());
  }

  if (doc.observable.empty()) throw ConfigError("observable is empty");
  cfg.observable = detail::operator_from_specs(n, doc.observable, "observable");
  cfg.times = expand_times(doc.times);

  const auto& p = doc.profiling;
  if (p.trotter_steps < 1) throw ConfigError("profiling.trotter_steps must be >= 1");
  if (p.n_extra_orders < -1) throw ConfigError("profiling.n_extra_orders must be >= 0");
  {
    std::vector<double> g = p.a_grid;
    std::sort(g.begin(), g.end());
    if (std::adjacent_find(g.begin(), g.end()) != g.end()) throw ConfigError("profiling.a_grid contains duplicate a values");
  }
  cfg.profiling.n_extra_orders = p.n_extra_orders;
  cfg.profiling.a_grid = p.a_grid;
  cfg.profiling.trotter_steps = p.trotter_steps;
  if (!p.orders.empty()) {
    BasisSpec b{p.orders, p.include_antisymmetric};
    std::sort(b.orders.begin(), b.orders.end());
    if (std::adjacent_find(b.orders.begin(), b.orders.end()) != b.orders.end()) {
      throw ConfigError("profiling.orders contains duplicates");
    }
    if (b.orders.front() < cfg.formula.alpha) {
      throw ConfigError("profiling.orders must be >= alpha (" + std::to_string(cfg.formula.alpha) + ")");
    }
    cfg.profiling.basis = b;
  }

  if (doc.mpf.step_counts.empty()) throw ConfigError("mpf.step_counts is empty");
  {
    std::vector<int> c = doc.mpf.step_counts;
    std::sort(c.begin(), c.end());
    if (c.front() < 1) throw ConfigError("mpf.step_counts must be >= 1");
    if (std::adjacent_find(c.begin(), c.end()) != c.end()) throw ConfigError("mpf.step_counts contains duplicates");
  }
  cfg.mpf.step_counts = doc.mpf.step_counts;
  cfg.mpf.symmetric = doc.mpf.symmetric;

  if (!(doc.noise.sigma >= 0.0)) throw ConfigError("noise.sigma must be >= 0");
  cfg.noise_sigma = doc.noise.sigma;
  cfg.seed = doc.noise.seed;
  if (doc.output.format != "csv") throw ConfigError("output.format must be 'csv'");
  return cfg;
}

inline ExperimentConfig parse_config(std::string_view text) { return build_config(parse_document(text)); }

// ---------------------------------------------------------------------------
// Result tables and CSV
// ---------------------------------------------------------------------------

struct ResultRow {
  std::string method;
  double t = 0.0;
  double a_or_steps = 0.0;
  double estimate = 0.0;
  double exact = 0.0;
  double abs_error = 0.0;
  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

struct ResultTable {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<ResultRow> rows;

  /// Method, then ascending t, then ascending a_or_steps.
  void sort_rows() {
    std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& x, const ResultRow& y) {
      if (x.method != y.method) return x.method < y.method;
      if (x.t != y.t) return x.t < y.t;
      return x.a_or_steps < y.a_or_steps;
    });
  }
  friend bool operator==(const ResultTable&, const ResultTable&) = default;
};

inline constexpr std::string_view kCsvHeader = "method,t,a_or_steps,estimate,exact,abs_error";

inline void add_curve(ResultTable& table, const ErrorCurve& curve) {
  for (const auto& p : curve.points) table.rows.push_back({curve.method, p.t, p.a_or_steps, p.estimate, p.exact, p.abs_error});
}

/// Shortest decimal that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) throw ConfigError("bad number in CSV: '" + std::string(s) + "'");
  return v;
}

inline std::string csv_string(const ResultTable& table) {
  std::string out;
  for (const auto& [k, v] : table.metadata) out += "# " + k + "=" + v + "\n";
  out += kCsvHeader;
  out += "\n";
  for (const auto& r : table.rows) {
    out += r.method + "," + format_double(r.t) + "," + format_double(r.a_or_steps) + "," + format_double(r.estimate) +
           "," + format_double(r.exact) + "," + format_double(r.abs_error) + "\n";
  }
  return out;
}

/// Writes `contents` to a sibling temp file and renames it over `path`.
inline void write_file_atomically(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw NumericalError("cannot open '" + tmp.string() + "' for writing");
    f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    f.flush();
    if (!f) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw NumericalError("failed writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw NumericalError("cannot move result file into place at '" + path.string() + "'");
  }
}

inline void write_csv(const ResultTable& table, const std::filesystem::path& path) {
  write_file_atomically(path, csv_string(table));
}

inline ResultTable parse_csv(std::string_view text) {
  ResultTable table;
  std::istringstream in{std::string(text)};
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError("malformed CSV metadata line: " + line);
      table.metadata.emplace_back(line.substr(2, eq - 2), line.substr(eq + 1));
      continue;
    }
    if (!header_seen) {
      if (line != kCsvHeader) throw ConfigError("unexpected CSV header: " + line);
      header_seen = true;
      continue;
    }
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t pos; (pos = line.find(',', start)) != std::string::npos; start = pos + 1) {
      fields.push_back(line.substr(start, pos - start));
    }
    fields.push_back(line.substr(start));
    if (fields.size() != 6) throw ConfigError("CSV row does not have 6 fields: " + line);
    table.rows.push_back({fields[0], parse_double(fields[1]), parse_double(fields[2]), parse_double(fields[3]),
                          parse_double(fields[4]), parse_double(fields[5])});
  }
  if (!header_seen) throw ConfigError("CSV has no header line");
  return table;
}

inline ResultTable read_csv(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_csv(ss.str());
}

}  // namespace trotterprof
