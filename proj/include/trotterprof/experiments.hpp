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

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trotterprof/errors.hpp"
#include "trotterprof/mpf.hpp"
#include "trotterprof/numerics.hpp"
#include "trotterprof/pauli.hpp"
#include "trotterprof/profiling.hpp"
#include "trotterprof/simulator.hpp"
#include "trotterprof/trotter.hpp"

namespace trotterprof {

struct ProfilingOptions {
  int n_extra_orders = -1;         // window [alpha, alpha + n]; -1: alpha - 2
  std::vector<double> a_grid;      // empty: 2|S| + 1 Chebyshev nodes
  int trotter_steps = 1;
  std::optional<BasisSpec> basis;  // absent: calibrate
};

struct MpfOptions {
  std::vector<int> step_counts{1, 2};
  std::optional<bool> symmetric;  // absent: follow the formula
};

struct ExperimentConfig {
  std::string name;
  PartitionedHamiltonian partition;
  ProductFormula formula;
  OperatorSum observable{1};
  StateVector initial_state;
  std::vector<double> times;
  ProfilingOptions profiling;
  MpfOptions mpf;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;

  int window_top() const {
    const int extra = profiling.n_extra_orders < 0 ? formula.alpha - 2 : profiling.n_extra_orders;
    return formula.alpha + extra;
  }
  bool mpf_symmetric() const { return mpf.symmetric.value_or(formula.symmetric); }
};

/// 20 log-spaced times on [0.1, 1.0].
inline std::vector<double> default_times() { return log_spaced(0.1, 1.0, 20); }

/// (1, 0) (x) (1, i) (x) (1, 1) (x) (0, 1), normalized (global factor 1/2).
inline StateVector benchmark_initial_state() {
  const Complex i{0.0, 1.0};
  return init_product_state({{1.0, 0.0}, {1.0, i}, {1.0, 1.0}, {0.0, 1.0}});
}

inline void validate_times(std::span<const double> times) {
  if (times.empty()) throw InvalidArgumentError("no times given");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!(times[k] > 0.0) || !std::isfinite(times[k])) throw InvalidArgumentError("times must be positive");
    if (k > 0 && !(times[k] > times[k - 1])) throw InvalidArgumentError("times must be strictly increasing");
  }
}

/// Open four-site transverse-field Ising chain, J = 1, h = 1/3.
/// Fragments: ZZ layer (odd bonds, then even bonds) and X layer.
inline ExperimentConfig tfim_config(std::string_view formula_name) {
  constexpr int n = 4;
  constexpr double j = 1.0;
  constexpr double h = 1.0 / 3.0;
  OperatorSum zz(n, {{"ZZII", j}, {"IIZZ", j}, {"IZZI", j}});
  OperatorSum x(n);
  for (int q = 1; q <= n; ++q) x.add({single_site_word(n, q, 'X'), h});
  x.canonicalize();

  ExperimentConfig cfg;
  cfg.name = "tfim-" + std::string(formula_name);
  cfg.partition = PartitionedHamiltonian(n, {Fragment(zz), Fragment(x)});
  cfg.formula = builtin_formula(formula_name, cfg.partition);
  cfg.observable = OperatorSum(n);
  for (int q = 1; q <= n; ++q) cfg.observable.add({single_site_word(n, q, 'X'), 0.25});
  for (int q = 1; q < n; ++q) cfg.observable.add({two_site_word(n, q, q + 1, 'Z'), 1.0 / 3.0});
  cfg.observable.canonicalize();
  cfg.initial_state = benchmark_initial_state();
  cfg.times = default_times();
  return cfg;
}

/// Open four-site XXZ chain, J = 1, eta = 1/3, with fragments
/// {bond(1,2) + bond(3,4), bond(2,3)}; each bond's three terms commute.
inline ExperimentConfig xxz_config(std::string_view formula_name) {
  constexpr int n = 4;
  constexpr double eta = 1.0 / 3.0;
  auto bond = [](OperatorSum& into, int i) {
    into.add({two_site_word(n, i, i + 1, 'X'), 1.0});
    into.add({two_site_word(n, i, i + 1, 'Y'), 1.0});
    into.add({two_site_word(n, i, i + 1, 'Z'), eta});
  };
  OperatorSum outer(n);
  bond(outer, 1);
  bond(outer, 3);
  outer.canonicalize();
  OperatorSum middle(n);
  bond(middle, 2);
  middle.canonicalize();

  ExperimentConfig cfg;
  cfg.name = "xxz-" + std::string(formula_name);
  cfg.partition = PartitionedHamiltonian(n, {Fragment(outer), Fragment(middle)});
  cfg.formula = builtin_formula(formula_name, cfg.partition);
  cfg.observable = OperatorSum(n);
  for (int q = 1; q <= n; ++q) cfg.observable.add({single_site_word(n, q, 'Z'), 0.25});
  cfg.observable.canonicalize();
  cfg.initial_state = benchmark_initial_state();
  cfg.times = default_times();
  return cfg;
}

enum class Method { kTrotter, kEp, kMpf };

inline std::string_view method_name(Method m) {
  switch (m) {
    case Method::kTrotter: return "trotter";
    case Method::kEp: return "ep";
    case Method::kMpf: return "mpf";
  }
  return "?";
}

inline Method parse_method(std::string_view s) {
  if (s == "trotter") return Method::kTrotter;
  if (s == "ep") return Method::kEp;
  if (s == "mpf") return Method::kMpf;
  throw InvalidArgumentError("unknown method '" + std::string(s) + "' (expected trotter, ep, mpf)");
}

/// Errors below this sit at the double-precision floor.
inline constexpr double kErrorFloor = 1e-15;

struct CurvePoint {
  double t = 0.0;
  double a_or_steps = 0.0;  // trotter: N, ep: grid size, mpf: largest step count
  double estimate = 0.0;
  double exact = 0.0;
  double abs_error = 0.0;
  bool floored = false;
};

struct ErrorCurve {
  std::string method;
  std::vector<CurvePoint> points;
};

namespace detail {

// Independent stream per (seed, method, time index) so results do not depend
// on which worker handled a point.
class PointNoise {
 public:
  PointNoise(double sigma, std::uint64_t seed, Method m, std::size_t index) : sigma_(sigma) {
    if (sigma_ > 0.0) {
      std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                        static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(index)};
      rng_.seed(seq);
    }
  }
  double operator()(double v) {
    if (sigma_ <= 0.0) return v;
    return v + std::normal_distribution<double>(0.0, sigma_)(rng_);
  }

 private:
  double sigma_;
  std::mt19937_64 rng_;
};

}  // namespace detail

inline BasisSpec resolve_basis(const ExperimentConfig& cfg) {
  if (cfg.profiling.basis) return *cfg.profiling.basis;
  CalibrationOptions opt;
  opt.max_order = cfg.window_top();
  const TrotterStepper stepper(cfg.formula, cfg.partition);
  const ExactPropagator exact(cfg.partition.hamiltonian());
  return calibrate_basis(stepper, cfg.formula.symmetric, cfg.formula.alpha, exact, cfg.observable, cfg.initial_state,
                         cfg.profiling.trotter_steps, opt)
      .basis;
}

/// Estimate versus exact value at every configured time.
inline ErrorCurve run_error_curve(const ExperimentConfig& cfg, Method method) {
  validate_times(cfg.times);
  const TrotterStepper stepper(cfg.formula, cfg.partition);
  const ExactPropagator exact(cfg.partition.hamiltonian());
  const int n_steps = cfg.profiling.trotter_steps;

  std::optional<BasisSpec> basis;
  std::vector<double> grid;
  std::optional<MPFWeights> weights;
  if (method == Method::kEp) {
    basis = resolve_basis(cfg);
    grid = cfg.profiling.a_grid.empty() ? default_a_grid(basis->orders.size()) : cfg.profiling.a_grid;
  } else if (method == Method::kMpf) {
    weights = mpf_weights(cfg.mpf.step_counts, cfg.formula.alpha, cfg.mpf_symmetric());
  }

  ErrorCurve curve{std::string(method_name(method)), std::vector<CurvePoint>(cfg.times.size())};
  parallel_for(cfg.times.size(), [&](std::size_t i) {
    const double t = cfg.times[i];
    detail::PointNoise noise(cfg.noise_sigma, cfg.seed, method, i);
    CurvePoint p;
    p.t = t;
    p.exact = expectation(exact.evolve(t, cfg.initial_state), cfg.observable);
    switch (method) {
      case Method::kTrotter: {
        StateVector s = cfg.initial_state;
        Eigen::VectorXcd scratch;
        stepper.apply(t, n_steps, s, scratch);
        p.estimate = noise(expectation(s, cfg.observable));
        p.a_or_steps = n_steps;
        break;
      }
      case Method::kEp: {
        auto samples = profile_sweep(stepper, cfg.formula.symmetric, grid, t, cfg.observable, cfg.initial_state, n_steps);
        for (auto& smp : samples) smp.value = noise(smp.value);
        p.estimate = fit_profile(samples, *basis, cfg.formula.alpha).y_star;
        p.a_or_steps = static_cast<double>(grid.size());
        break;
      }
      case Method::kMpf: {
        auto values = mpf_constituents(stepper, t, *weights, cfg.observable, cfg.initial_state);
        for (auto& v : values) v = noise(v);
        p.estimate = mpf_combine(*weights, values);
        p.a_or_steps = *std::max_element(weights->step_counts.begin(), weights->step_counts.end());
        break;
      }
    }
    p.abs_error = std::abs(p.estimate - p.exact);
    p.floored = p.abs_error < kErrorFloor;
    curve.points[i] = p;
  });
  return curve;
}

/// Log-log slope of abs_error against t over points with t in [t_min, t_max]
/// and abs_error above 1e-14.
inline double slope_fit(const ErrorCurve& curve, double t_min, double t_max) {
  std::vector<double> ts, es;
  for (const auto& p : curve.points) {
    if (p.t >= t_min && p.t <= t_max && p.abs_error > 1e-14) {
      ts.push_back(p.t);
      es.push_back(p.abs_error);
    }
  }
  if (ts.size() < 4) {
    throw NumericalError("slope_fit: only " + std::to_string(ts.size()) + " points of curve '" + curve.method +
                         "' in [" + std::to_string(t_min) + ", " + std::to_string(t_max) +
                         "] have abs_error > 1e-14 (need 4)");
  }
  return log_log_slope(ts, es);
}

struct CircuitCost {
  long circuits = 0;
  long trotter_steps = 0;  // summed over all circuits
  long elementary_gates = 0;
};

struct CostParams {
  ProductFormula formula;
  PartitionedHamiltonian partition;
  int trotter_steps = 1;        // EP base depth N
  int grid_size = 1;            // EP number of a values
  std::vector<int> step_counts;  // MPF
};

/// EP: G * (4, or 1 when symmetric) composite circuits of 2N Trotter steps.
/// MPF: one circuit per step count s, s steps each. Gate totals come from
/// compiled circuits.
inline CircuitCost circuit_cost(Method method, const CostParams& p) {
  CircuitCost c;
  switch (method) {
    case Method::kEp: {
      const int variants = p.formula.symmetric ? 1 : 4;
      c.circuits = static_cast<long>(p.grid_size) * variants;
      c.trotter_steps = c.circuits * 2L * p.trotter_steps;
      for (int v = 1; v <= variants; ++v) {
        const Circuit composite = composite_circuit(CompositeSpec{v, 0.3, 1.0, p.trotter_steps}, p.formula, p.partition);
        c.elementary_gates += static_cast<long>(p.grid_size) * static_cast<long>(composite.size());
      }
      break;
    }
    case Method::kMpf:
      c.circuits = static_cast<long>(p.step_counts.size());
      for (int s : p.step_counts) {
        c.trotter_steps += s;
        c.elementary_gates += static_cast<long>(compile_circuit(p.formula, p.partition, 1.0, s).size());
      }
      break;
    case Method::kTrotter:
      c.circuits = 1;
      c.trotter_steps = p.trotter_steps;
      c.elementary_gates = static_cast<long>(compile_circuit(p.formula, p.partition, 1.0, p.trotter_steps).size());
      break;
  }
  return c;
}

}  // namespace trotterprof
