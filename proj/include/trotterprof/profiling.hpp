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

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trotterprof/errors.hpp"
#include "trotterprof/numerics.hpp"
#include "trotterprof/pauli.hpp"
#include "trotterprof/simulator.hpp"
#include "trotterprof/trotter.hpp"

namespace trotterprof {

// ---------------------------------------------------------------------------
// Time steppers
// ---------------------------------------------------------------------------

/// Something that can apply V_N(x) and V_N(x)^dagger to a state. Lets the
/// composite-circuit machinery run on either Trotter circuits or the exact
/// propagator (where every a-dependence must vanish).
template <class S>
concept TimeStepper = requires(const S& s, double x, int steps, StateVector& psi, Eigen::VectorXcd& scratch) {
  s.apply(x, steps, psi, scratch);
  s.apply_adjoint(x, steps, psi, scratch);
  { s.num_qubits() } -> std::convertible_to<int>;
};

class TrotterStepper {
 public:
  TrotterStepper(ProductFormula formula, PartitionedHamiltonian partition)
      : formula_(std::move(formula)), partition_(std::move(partition)) {}

  int num_qubits() const { return partition_.n; }
  const ProductFormula& formula() const { return formula_; }
  const PartitionedHamiltonian& partition() const { return partition_; }

  void apply(double x, int steps, StateVector& psi, Eigen::VectorXcd& scratch) const {
    apply_circuit_in_place(psi, compile_circuit(formula_, partition_, x, steps), scratch);
  }
  void apply_adjoint(double x, int steps, StateVector& psi, Eigen::VectorXcd& scratch) const {
    apply_circuit_in_place(psi, invert_circuit(compile_circuit(formula_, partition_, x, steps)), scratch);
  }

 private:
  ProductFormula formula_;
  PartitionedHamiltonian partition_;
};

/// U(x) = exp(-iHx) standing in for V_N(x); the step count is irrelevant.
class ExactStepper {
 public:
  explicit ExactStepper(const OperatorSum& h) : propagator_(h) {}

  int num_qubits() const { return propagator_.num_qubits(); }
  const ExactPropagator& propagator() const { return propagator_; }

  void apply(double x, int, StateVector& psi, Eigen::VectorXcd&) const { psi = propagator_.evolve(x, psi); }
  void apply_adjoint(double x, int, StateVector& psi, Eigen::VectorXcd&) const {
    psi = propagator_.evolve(-x, psi);
  }

 private:
  ExactPropagator propagator_;
};

// ---------------------------------------------------------------------------
// Composite circuits
// ---------------------------------------------------------------------------

/// One of the four probe products at auxiliary parameter a:
///   1: V_N(at) V_N(a't)      2: V_N^dag(-at) V_N(a't)
///   3: V_N(at) V_N^dag(-a't) 4: V_N^dag(-at) V_N^dag(-a't)
/// with a' = 1 - a. The right factor acts first.
struct CompositeSpec {
  int variant = 1;
  double a = 0.5;
  double t = 0.0;
  int trotter_steps = 1;

  double a_bar() const { return 1.0 - a; }
};

inline void validate_composite(const CompositeSpec& spec) {
  if (spec.variant < 1 || spec.variant > 4) {
    throw InvalidArgumentError("composite variant must be 1..4, got " + std::to_string(spec.variant));
  }
  if (spec.trotter_steps < 1) throw InvalidArgumentError("trotter_steps must be >= 1");
}

namespace detail {
inline bool left_is_adjoint(int variant) { return variant == 2 || variant == 4; }
inline bool right_is_adjoint(int variant) { return variant == 3 || variant == 4; }
}  // namespace detail

inline Circuit composite_circuit(const CompositeSpec& spec, const ProductFormula& f,
                                 const PartitionedHamiltonian& partition) {
  validate_composite(spec);
  const double left_t = spec.a * spec.t;
  const double right_t = spec.a_bar() * spec.t;
  const int n_steps = spec.trotter_steps;
  Circuit out = detail::right_is_adjoint(spec.variant)
                    ? invert_circuit(compile_circuit(f, partition, -right_t, n_steps))
                    : compile_circuit(f, partition, right_t, n_steps);
  out.append(detail::left_is_adjoint(spec.variant) ? invert_circuit(compile_circuit(f, partition, -left_t, n_steps))
                                                   : compile_circuit(f, partition, left_t, n_steps));
  return out;
}

template <TimeStepper S>
void apply_composite(const S& stepper, const CompositeSpec& spec, StateVector& psi, Eigen::VectorXcd& scratch) {
  validate_composite(spec);
  const double left_t = spec.a * spec.t;
  const double right_t = spec.a_bar() * spec.t;
  if (detail::right_is_adjoint(spec.variant)) {
    stepper.apply_adjoint(-right_t, spec.trotter_steps, psi, scratch);
  } else {
    stepper.apply(right_t, spec.trotter_steps, psi, scratch);
  }
  if (detail::left_is_adjoint(spec.variant)) {
    stepper.apply_adjoint(-left_t, spec.trotter_steps, psi, scratch);
  } else {
    stepper.apply(left_t, spec.trotter_steps, psi, scratch);
  }
}

template <TimeStepper S>
double composite_expectation(const S& stepper, const CompositeSpec& spec, const OperatorSum& obs,
                             const StateVector& psi) {
  StateVector state = psi;
  Eigen::VectorXcd scratch;
  apply_composite(stepper, spec, state, scratch);
  return expectation(state, obs);
}

/// Mean expectation over the four composite variants. Symmetric formulas
/// (V(-x)^dag = V(x)) make the variants coincide, so only variant 1 is run
/// unless `cross_check` asks for all four to be simulated and compared.
template <TimeStepper S>
double averaged_expectation(const S& stepper, bool symmetric, double a, double t, const OperatorSum& obs,
                            const StateVector& psi, int trotter_steps = 1, bool cross_check = false) {
  if (symmetric && !cross_check) {
    return composite_expectation(stepper, CompositeSpec{1, a, t, trotter_steps}, obs, psi);
  }
  double values[4];
  for (int v = 1; v <= 4; ++v) {
    values[v - 1] = composite_expectation(stepper, CompositeSpec{v, a, t, trotter_steps}, obs, psi);
  }
  if (symmetric) {
    for (double x : values) {
      if (std::abs(x - values[0]) > 1e-10) {
        throw NumericalError("symmetric formula produced differing composite variants (" + std::to_string(x) +
                             " vs " + std::to_string(values[0]) + ")");
      }
    }
    return values[0];
  }
  return 0.25 * (values[0] + values[1] + values[2] + values[3]);
}

inline double averaged_expectation(double a, double t, const ProductFormula& f, const PartitionedHamiltonian& partition,
                                   const OperatorSum& obs, const StateVector& psi, int trotter_steps = 1) {
  return averaged_expectation(TrotterStepper(f, partition), f.symmetric, a, t, obs, psi, trotter_steps);
}

// ---------------------------------------------------------------------------
// Sweep and fit
// ---------------------------------------------------------------------------

struct ProfileSample {
  double a = 0.0;
  double value = 0.0;
};

inline void check_distinct(std::span<const double> grid, const char* what) {
  std::vector<double> sorted(grid.begin(), grid.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw DegenerateInputError(std::string(what) + " contains duplicate values");
  }
}

template <TimeStepper S>
std::vector<ProfileSample> profile_sweep(const S& stepper, bool symmetric, std::span<const double> a_grid, double t,
                                         const OperatorSum& obs, const StateVector& psi, int trotter_steps = 1) {
  if (a_grid.empty()) throw InvalidArgumentError("profile_sweep: empty a grid");
  check_distinct(a_grid, "a grid");
  std::vector<ProfileSample> out;
  out.reserve(a_grid.size());
  for (double a : a_grid) {
    const double v = averaged_expectation(stepper, symmetric, a, t, obs, psi, trotter_steps);
    if (!std::isfinite(v)) throw NumericalError("non-finite profile value at a = " + std::to_string(a));
    out.push_back({a, v});
  }
  return out;
}

/// Which error orders enter the fit model
///   value(a) = y* + sum_s m_s (a^s + a'^s) [+ sum_s n_s (a^s - a'^s)].
struct BasisSpec {
  std::vector<int> orders;
  bool include_antisymmetric = false;

  std::size_t num_functions() const { return orders.size() * (include_antisymmetric ? 2 : 1); }
};

struct FitResult {
  double y_star = 0.0;
  std::map<int, double> coefficients;
  std::map<int, double> antisymmetric_coefficients;
  double residual_norm = 0.0;
  double condition_number = 1.0;
};

inline constexpr double kFitConditionLimit = 1e8;

/// Default a grid: 2n + 1 Chebyshev nodes on [-0.5, 1.5], symmetric about 1/2.
inline std::vector<double> default_a_grid(std::size_t n) {
  return chebyshev_nodes(static_cast<int>(2 * n + 1), -0.5, 1.5);
}

inline Eigen::MatrixXd profile_design(std::span<const ProfileSample> samples, const BasisSpec& basis) {
  const auto rows = static_cast<Eigen::Index>(samples.size());
  const auto cols = static_cast<Eigen::Index>(1 + basis.num_functions());
  Eigen::MatrixXd a_mat(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double a = samples[static_cast<std::size_t>(r)].a;
    const double ab = 1.0 - a;
    Eigen::Index c = 0;
    a_mat(r, c++) = 1.0;
    for (int s : basis.orders) a_mat(r, c++) = std::pow(a, s) + std::pow(ab, s);
    if (basis.include_antisymmetric) {
      for (int s : basis.orders) a_mat(r, c++) = std::pow(a, s) - std::pow(ab, s);
    }
  }
  return a_mat;
}

inline FitResult fit_profile(std::span<const ProfileSample> samples, const BasisSpec& basis, int alpha) {
  for (int s : basis.orders) {
    if (s < alpha) throw InvalidArgumentError("basis order " + std::to_string(s) + " is below alpha");
  }
  const std::size_t unknowns = 1 + basis.num_functions();
  std::vector<double> as;
  for (const auto& p : samples) {
    if (!std::isfinite(p.value)) throw NumericalError("non-finite profile sample");
    as.push_back(p.a);
  }
  std::sort(as.begin(), as.end());
  const auto distinct = static_cast<std::size_t>(std::unique(as.begin(), as.end()) - as.begin());
  if (distinct < unknowns) {
    throw SingularFitError("profile fit needs " + std::to_string(unknowns) + " distinct a values, got " +
                               std::to_string(distinct),
                           std::numeric_limits<double>::infinity());
  }
  const Eigen::MatrixXd design = profile_design(samples, basis);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) rhs(static_cast<Eigen::Index>(i)) = samples[i].value;
  const LeastSquares ls = solve_least_squares(design, rhs);
  if (!(ls.condition_number <= kFitConditionLimit)) {
    throw SingularFitError("profile design matrix is singular or ill-conditioned (condition number " +
                               std::to_string(ls.condition_number) + ")",
                           ls.condition_number);
  }
  FitResult fit;
  fit.y_star = ls.solution(0, 0);
  Eigen::Index c = 1;
  for (int s : basis.orders) fit.coefficients[s] = ls.solution(c++, 0);
  if (basis.include_antisymmetric) {
    for (int s : basis.orders) fit.antisymmetric_coefficients[s] = ls.solution(c++, 0);
  }
  fit.residual_norm = ls.residual_norm;
  fit.condition_number = ls.condition_number;
  return fit;
}

// ---------------------------------------------------------------------------
// Basis calibration
// ---------------------------------------------------------------------------

struct CalibrationOptions {
  std::vector<double> t_probe;  // empty: 32 Chebyshev nodes on [-0.2, 0.2]
  std::vector<double> a_probe;  // empty: {-0.25, 0.2}; mirrors 1 - a are always added
  int max_order = 0;            // 0: 2 * alpha - 2
  int extra_fit_orders = 6;     // powers fitted beyond max_order to absorb truncation
  double relative_threshold = 1e-8;
  double absolute_floor = 1e-10;  // on |c_s| tau^s, the order-s contribution at the edge of the t window
  double symmetry_tolerance = 1e-6;
};

struct Calibration {
  BasisSpec basis;
  std::vector<double> a_values;
  std::vector<int> fitted_orders;
  // coefficient[i][j]: t^fitted_orders[j] coefficient of the averaged error at a_values[i].
  std::vector<std::vector<double>> coefficients;
  double condition_number = 1.0;
  double max_asymmetry = 0.0;
};

/// Determines which orders s in [alpha, max_order] carry a nonzero averaged
/// error: fits eps(a, t) = <O>_avg(a, t) - <O>_U(t) as a polynomial in t at
/// each probe a and keeps orders whose coefficient clears the threshold.
template <TimeStepper S>
Calibration calibrate_basis(const S& stepper, bool symmetric, int alpha, const ExactPropagator& exact,
                            const OperatorSum& obs, const StateVector& psi, int trotter_steps = 1,
                            CalibrationOptions opt = {}) {
  if (opt.max_order == 0) opt.max_order = 2 * alpha - 2;
  if (opt.max_order < alpha) {
    // A window [alpha, 2 alpha - 2] below alpha (alpha = 2 gives {2}) still holds alpha.
    opt.max_order = alpha;
  }
  if (opt.t_probe.empty()) opt.t_probe = chebyshev_nodes(32, -0.2, 0.2);
  if (opt.a_probe.empty()) opt.a_probe = {-0.25, 0.2};

  Calibration cal;
  for (double a : opt.a_probe) {
    for (double v : {a, 1.0 - a}) {
      if (std::none_of(cal.a_values.begin(), cal.a_values.end(), [&](double u) { return std::abs(u - v) < 1e-12; })) {
        cal.a_values.push_back(v);
      }
    }
  }
  std::sort(cal.a_values.begin(), cal.a_values.end());

  const int top = opt.max_order + opt.extra_fit_orders;
  for (int s = alpha; s <= top; ++s) cal.fitted_orders.push_back(s);
  const auto rows = static_cast<Eigen::Index>(opt.t_probe.size());
  const auto cols = static_cast<Eigen::Index>(cal.fitted_orders.size());
  if (rows < cols + 2) {
    throw CalibrationError("calibration needs at least " + std::to_string(cols + 2) + " probe times");
  }
  double tau = 0.0;
  for (double t : opt.t_probe) tau = std::max(tau, std::abs(t));
  if (!(tau > 0.0)) throw CalibrationError("calibration probe times are all zero");

  Eigen::MatrixXd design(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      design(r, c) = std::pow(opt.t_probe[static_cast<std::size_t>(r)] / tau, cal.fitted_orders[static_cast<std::size_t>(c)]);
    }
  }
  Eigen::MatrixXd rhs(rows, static_cast<Eigen::Index>(cal.a_values.size()));
  std::vector<double> exact_values;
  for (double t : opt.t_probe) exact_values.push_back(expectation(exact.evolve(t, psi), obs));
  for (std::size_t j = 0; j < cal.a_values.size(); ++j) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      const double t = opt.t_probe[static_cast<std::size_t>(r)];
      rhs(r, static_cast<Eigen::Index>(j)) =
          averaged_expectation(stepper, symmetric, cal.a_values[j], t, obs, psi, trotter_steps) -
          exact_values[static_cast<std::size_t>(r)];
    }
  }
  const LeastSquares ls = solve_least_squares(design, rhs);
  cal.condition_number = ls.condition_number;
  if (!(ls.condition_number <= 1e8)) {
    throw CalibrationError("calibration fit is ill-conditioned (condition number " +
                           std::to_string(ls.condition_number) + ")");
  }

  cal.coefficients.assign(cal.a_values.size(), std::vector<double>(cal.fitted_orders.size()));
  for (std::size_t j = 0; j < cal.a_values.size(); ++j) {
    for (std::size_t c = 0; c < cal.fitted_orders.size(); ++c) {
      cal.coefficients[j][c] = ls.solution(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j)) /
                               std::pow(tau, cal.fitted_orders[c]);
    }
  }

  // Largest magnitude per order inside the window, raw and at the window edge.
  const auto window = static_cast<std::size_t>(opt.max_order - alpha + 1);
  std::vector<double> peak(window, 0.0);
  std::vector<double> edge(window, 0.0);
  for (std::size_t j = 0; j < cal.a_values.size(); ++j) {
    for (std::size_t c = 0; c < window; ++c) {
      peak[c] = std::max(peak[c], std::abs(cal.coefficients[j][c]));
      edge[c] = std::max(edge[c], std::abs(ls.solution(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j))));
    }
  }
  const double largest = *std::max_element(peak.begin(), peak.end());
  for (std::size_t c = 0; c < window; ++c) {
    if (peak[c] > opt.relative_threshold * largest && edge[c] > opt.absolute_floor) {
      cal.basis.orders.push_back(cal.fitted_orders[c]);
    }
  }

  // a <-> 1 - a symmetry of the profile, judged on the window coefficients.
  double edge_asymmetry = 0.0;
  for (std::size_t i = 0; i < cal.a_values.size(); ++i) {
    for (std::size_t j = 0; j < cal.a_values.size(); ++j) {
      if (std::abs(cal.a_values[i] + cal.a_values[j] - 1.0) > 1e-12) continue;
      for (std::size_t c = 0; c < window; ++c) {
        const double d = std::abs(cal.coefficients[i][c] - cal.coefficients[j][c]);
        cal.max_asymmetry = std::max(cal.max_asymmetry, d);
        edge_asymmetry = std::max(edge_asymmetry, d * std::pow(tau, cal.fitted_orders[c]));
      }
    }
  }
  cal.basis.include_antisymmetric = !cal.basis.orders.empty() && edge_asymmetry > opt.absolute_floor &&
                                    cal.max_asymmetry > opt.symmetry_tolerance * largest;
  return cal;
}

// ---------------------------------------------------------------------------
// End-to-end mitigation
// ---------------------------------------------------------------------------

struct ProfilingProblem {
  PartitionedHamiltonian partition;
  ProductFormula formula;
  OperatorSum observable{1};
  StateVector psi;
  int trotter_steps = 1;
  std::vector<double> a_grid;        // empty: default_a_grid(|orders|)
  std::optional<BasisSpec> basis;    // absent: calibrate
  CalibrationOptions calibration;
};

struct MitigatedEstimate {
  double estimate = 0.0;
  FitResult fit;
  BasisSpec basis;
  std::vector<ProfileSample> samples;
};

/// Sweep the a grid at time t and fit; the estimate is the fitted intercept.
template <TimeStepper S>
MitigatedEstimate mitigated_estimate(const S& stepper, bool symmetric, int alpha, double t, const BasisSpec& basis,
                                     std::span<const double> a_grid, const OperatorSum& obs, const StateVector& psi,
                                     int trotter_steps = 1) {
  MitigatedEstimate out;
  out.basis = basis;
  const std::vector<double> grid =
      a_grid.empty() ? default_a_grid(basis.orders.size()) : std::vector<double>(a_grid.begin(), a_grid.end());
  out.samples = profile_sweep(stepper, symmetric, grid, t, obs, psi, trotter_steps);
  out.fit = fit_profile(out.samples, basis, alpha);
  out.estimate = out.fit.y_star;
  return out;
}

inline BasisSpec resolve_basis(const ProfilingProblem& p) {
  if (p.basis) return *p.basis;
  const TrotterStepper stepper(p.formula, p.partition);
  const ExactPropagator exact(p.partition.hamiltonian());
  return calibrate_basis(stepper, p.formula.symmetric, p.formula.alpha, exact, p.observable, p.psi, p.trotter_steps,
                         p.calibration)
      .basis;
}

inline MitigatedEstimate mitigated_estimate(double t, const ProfilingProblem& p) {
  const BasisSpec basis = resolve_basis(p);
  return mitigated_estimate(TrotterStepper(p.formula, p.partition), p.formula.symmetric, p.formula.alpha, t, basis,
                            p.a_grid, p.observable, p.psi, p.trotter_steps);
}

// ---------------------------------------------------------------------------
// Error-operator extraction
// ---------------------------------------------------------------------------

/// E_s for s = start_order .. start_order + operators.size() - 1 in
/// V(t) = U(t) + sum_s E_s t^s.
struct ErrorSeries {
  int start_order = 2;
  std::vector<DenseOperator> operators;
  double condition_number = 1.0;

  int max_order() const { return start_order + static_cast<int>(operators.size()) - 1; }
  bool has(int s) const { return s >= start_order && s <= max_order(); }
  const DenseOperator& at(int s) const {
    if (!has(s)) throw InvalidArgumentError("error series has no order " + std::to_string(s));
    return operators[static_cast<std::size_t>(s - start_order)];
  }
  /// ||E_alpha^dag + E_alpha||, spectral norm.
  double unitarity_defect() const {
    const auto& e = operators.front().matrix;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(e.adjoint() + e);
    return svd.singularValues()(0);
  }
};

struct ExtractionOptions {
  double window = 1.0;    // nodes span [-window, window] / ||H||
  int extra_orders = 10;  // powers fitted beyond max_order
  int nodes_per_unknown = 3;
};

/// Fits every entry of dense(V(t)) - dense(U(t)) on Chebyshev nodes in a
/// symmetric t window to a polynomial with lowest power alpha.
inline ErrorSeries extract_error_operators(const ProductFormula& f, const PartitionedHamiltonian& partition,
                                           int max_order, ExtractionOptions opt = {}) {
  if (max_order < f.alpha) throw InvalidArgumentError("max_order must be >= alpha");
  if (max_order > 2 * f.alpha) throw InvalidArgumentError("max_order must be <= 2 * alpha");
  check_dense_cap(partition.n, kDenseQubitCap);
  const ExactPropagator exact(partition.hamiltonian());
  const double hnorm = std::max(exact.norm(), 1e-12);
  const double tau = opt.window / hnorm;

  std::vector<int> powers;
  for (int s = f.alpha; s <= max_order + opt.extra_orders; ++s) powers.push_back(s);
  const int m = opt.nodes_per_unknown * static_cast<int>(powers.size());
  const std::vector<double> nodes = chebyshev_nodes(m, -tau, tau);

  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << partition.n);
  Eigen::MatrixXd design(m, static_cast<Eigen::Index>(powers.size()));
  Eigen::MatrixXd re(m, dim * dim);
  Eigen::MatrixXd im(m, dim * dim);
  for (int r = 0; r < m; ++r) {
    const double t = nodes[static_cast<std::size_t>(r)];
    for (std::size_t c = 0; c < powers.size(); ++c) design(r, static_cast<Eigen::Index>(c)) = std::pow(t / tau, powers[c]);
    const Eigen::MatrixXcd d = circuit_matrix(compile_circuit(f, partition, t)) - exact.matrix(t);
    const Eigen::Map<const Eigen::VectorXcd> flat(d.data(), dim * dim);
    re.row(r) = flat.real().transpose();
    im.row(r) = flat.imag().transpose();
  }
  Eigen::MatrixXd rhs(m, 2 * dim * dim);
  rhs << re, im;
  const LeastSquares ls = solve_least_squares(design, rhs);
  if (!(ls.condition_number <= 1e8)) {
    throw ExtractionError("error-operator fit is ill-conditioned (condition number " +
                          std::to_string(ls.condition_number) + "); use a smaller t window");
  }
  ErrorSeries series;
  series.start_order = f.alpha;
  series.condition_number = ls.condition_number;
  for (int s = f.alpha; s <= max_order; ++s) {
    const auto c = static_cast<Eigen::Index>(s - f.alpha);
    const double scale = std::pow(tau, s);
    Eigen::MatrixXcd e(dim, dim);
    for (Eigen::Index k = 0; k < dim * dim; ++k) {
      e.data()[k] = Complex{ls.solution(c, k), ls.solution(c, dim * dim + k)} / scale;
    }
    series.operators.push_back(DenseOperator{std::move(e), partition.n});
  }
  return series;
}

/// <psi| (E_a^dag + (-1)^a E_a) O + h.c. |psi> with a = alpha.
inline double matrix_element_m(const ErrorSeries& series, const OperatorSum& obs, const StateVector& psi, int alpha) {
  if (!series.has(alpha)) throw InvalidArgumentError("error series lacks order " + std::to_string(alpha));
  check_same_n(obs.num_qubits(), psi.n, "matrix_element_m");
  const Eigen::MatrixXcd& e = series.at(alpha).matrix;
  const double sign = (alpha % 2 == 0) ? 1.0 : -1.0;
  const Eigen::MatrixXcd g = e.adjoint() + sign * e;
  const Eigen::MatrixXcd o = to_dense(obs).matrix;
  const Eigen::MatrixXcd k = g * o;
  const Complex v = psi.amplitudes.dot((k + k.adjoint()) * psi.amplitudes);
  return v.real();
}

}  // namespace trotterprof
