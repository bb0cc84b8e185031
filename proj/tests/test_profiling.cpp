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

#include "trotterprof/profiling.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_util.hpp"
#include "trotterprof/experiments.hpp"

using namespace trotterprof;
using oracle::kron_sum;

namespace {

using Series = std::vector<Eigen::MatrixXcd>;

// Truncated Taylor series of exp(-i x h) in x.
Series exp_series(const Eigen::MatrixXcd& h, double scale, int degree) {
  Series out;
  Eigen::MatrixXcd term = Eigen::MatrixXcd::Identity(h.rows(), h.cols());
  out.push_back(term);
  for (int j = 1; j <= degree; ++j) {
    term = term * (Complex{0.0, -scale} * h) / static_cast<double>(j);
    out.push_back(term);
  }
  return out;
}

Series multiply(const Series& left, const Series& right) {
  const int degree = static_cast<int>(left.size()) - 1;
  Series out(left.size(), Eigen::MatrixXcd::Zero(left[0].rows(), left[0].cols()));
  for (int i = 0; i <= degree; ++i) {
    for (int j = 0; i + j <= degree; ++j) out[static_cast<std::size_t>(i + j)] += left[static_cast<std::size_t>(i)] * right[static_cast<std::size_t>(j)];
  }
  return out;
}

// Coefficients of t^s in V(t) - U(t), s = 0..degree, by exact series algebra.
Series error_series_oracle(const ProductFormula& f, const PartitionedHamiltonian& p, int degree) {
  const auto dim = Eigen::Index{1} << p.n;
  Series v(static_cast<std::size_t>(degree) + 1, Eigen::MatrixXcd::Zero(dim, dim));
  v[0] = Eigen::MatrixXcd::Identity(dim, dim);
  for (const auto& s : f.steps) {
    v = multiply(exp_series(kron_sum(p.fragments[static_cast<std::size_t>(s.fragment)].terms()), s.coefficient, degree), v);
  }
  const Series u = exp_series(kron_sum(p.hamiltonian()), 1.0, degree);
  for (std::size_t k = 0; k < v.size(); ++k) v[k] -= u[k];
  return v;
}

// H1 = Z (left factor, acts last), H2 = X (acts first) on one qubit.
PartitionedHamiltonian zx_pair() {
  return PartitionedHamiltonian(1, {Fragment(OperatorSum(1, {{"X"}})), Fragment(OperatorSum(1, {{"Z"}}))});
}

ExperimentConfig tfim(const char* f) { return tfim_config(f); }

double trotter_value(const ExperimentConfig& c, double t) {
  return expectation(apply_circuit(c.initial_state, compile_circuit(c.formula, c.partition, t)), c.observable);
}

double exact_value(const ExperimentConfig& c, double t) {
  return expectation(exact_evolve(c.partition.hamiltonian(), t, c.initial_state), c.observable);
}

}  // namespace

TEST(composite, variant_one_at_a_one_is_plain_trotter) {
  const auto c = tfim("ruth3");
  const TrotterStepper st(c.formula, c.partition);
  EXPECT_NEAR(composite_expectation(st, CompositeSpec{1, 1.0, 0.6, 1}, c.observable, c.initial_state),
              trotter_value(c, 0.6), 1e-13);
}

TEST(composite, variant_four_at_a_zero_is_inverse_of_negative_time) {
  const auto c = tfim("ruth3");
  const Circuit composite = composite_circuit(CompositeSpec{4, 0.0, 0.6, 1}, c.formula, c.partition);
  const Circuit expect = invert_circuit(compile_circuit(c.formula, c.partition, -0.6));
  EXPECT_LT((circuit_matrix(composite) - circuit_matrix(expect)).norm(), 1e-12);
}

TEST(composite, circuit_and_stepper_agree) {
  const auto c = tfim("lie1");
  const TrotterStepper st(c.formula, c.partition);
  for (int v = 1; v <= 4; ++v) {
    const CompositeSpec spec{v, 0.3, 0.8, 2};
    const double direct =
        expectation(apply_circuit(c.initial_state, composite_circuit(spec, c.formula, c.partition)), c.observable);
    EXPECT_NEAR(composite_expectation(st, spec, c.observable, c.initial_state), direct, 1e-13);
  }
}

TEST(composite, rejects_bad_variant) {
  EXPECT_THROW(validate_composite(CompositeSpec{5, 0.3, 0.1, 1}), InvalidArgumentError);
  EXPECT_THROW(validate_composite(CompositeSpec{1, 0.3, 0.1, 0}), InvalidArgumentError);
}

TEST(averaged, exact_substitution_is_independent_of_a) {
  const auto c = tfim("ruth3");
  const ExactStepper ex(c.partition.hamiltonian());
  const double target = exact_value(c, 0.7);
  for (double a : {-0.5, 0.0, 0.25, 0.5, 1.0, 1.5}) {
    for (int v = 1; v <= 4; ++v) {
      EXPECT_NEAR(composite_expectation(ex, CompositeSpec{v, a, 0.7, 1}, c.observable, c.initial_state), target, 1e-10);
    }
    EXPECT_NEAR(averaged_expectation(ex, false, a, 0.7, c.observable, c.initial_state), target, 1e-10);
  }
}

TEST(averaged, symmetric_formula_endpoints_agree) {
  for (const char* name : {"strang2", "suzuki4"}) {
    const auto c = tfim(name);
    const TrotterStepper st(c.formula, c.partition);
    const double v1 = averaged_expectation(st, true, 1.0, 0.5, c.observable, c.initial_state);
    const double v0 = averaged_expectation(st, true, 0.0, 0.5, c.observable, c.initial_state);
    EXPECT_NEAR(v1, v0, 1e-12) << name;
    EXPECT_NO_THROW(averaged_expectation(st, true, 0.3, 0.5, c.observable, c.initial_state, 1, true));
  }
}

TEST(averaged, ruth3_deviation_shrinks_with_order_alpha) {
  const auto c = tfim("ruth3");
  const TrotterStepper st(c.formula, c.partition);
  const double v = averaged_expectation(st, false, 0.5, 0.4, c.observable, c.initial_state);
  EXPECT_TRUE(std::isfinite(v));
  std::vector<double> ts{0.02, 0.03, 0.05, 0.08}, dev;
  for (double t : ts) dev.push_back(std::abs(averaged_expectation(st, false, 0.5, t, c.observable, c.initial_state) - exact_value(c, t)));
  EXPECT_GT(log_log_slope(ts, dev), 4.0 - 0.3);
}

TEST(sweep, single_point_at_a_one) {
  const auto c = tfim("strang2");
  const TrotterStepper st(c.formula, c.partition);
  const std::vector<double> grid{1.0};
  const auto s = profile_sweep(st, true, grid, 0.4, c.observable, c.initial_state);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_NEAR(s[0].value, trotter_value(c, 0.4), 1e-13);
}

TEST(sweep, exact_substitution_gives_flat_profile) {
  const auto c = tfim("ruth3");
  const ExactStepper ex(c.partition.hamiltonian());
  const std::vector<double> grid{-0.25, 0.1, 0.5, 0.9, 1.25};
  const auto s = profile_sweep(ex, false, grid, 0.6, c.observable, c.initial_state);
  for (const auto& p : s) EXPECT_NEAR(p.value, s[0].value, 1e-10);
}

TEST(sweep, trotter_profile_varies) {
  const auto c = tfim("ruth3");
  const TrotterStepper st(c.formula, c.partition);
  const auto grid = default_a_grid(2);
  const auto s = profile_sweep(st, false, grid, 0.4, c.observable, c.initial_state);
  double lo = s[0].value, hi = s[0].value;
  for (const auto& p : s) {
    lo = std::min(lo, p.value);
    hi = std::max(hi, p.value);
  }
  EXPECT_GT(hi - lo, 1e-12);
}

TEST(sweep, rejects_duplicates_and_empty_grid) {
  const auto c = tfim("lie1");
  const TrotterStepper st(c.formula, c.partition);
  EXPECT_THROW(profile_sweep(st, false, std::vector<double>{0.2, 0.2}, 0.4, c.observable, c.initial_state),
               DegenerateInputError);
  EXPECT_THROW(profile_sweep(st, false, std::vector<double>{}, 0.4, c.observable, c.initial_state),
               InvalidArgumentError);
}

TEST(fit, recovers_in_span_data) {
  std::vector<ProfileSample> s;
  for (double a : default_a_grid(2)) s.push_back({a, 3.0 + 0.5 * (std::pow(a, 4) + std::pow(1 - a, 4))});
  const FitResult fit = fit_profile(s, BasisSpec{{4}, false}, 4);
  EXPECT_NEAR(fit.y_star, 3.0, 1e-9);
  EXPECT_NEAR(fit.coefficients.at(4), 0.5, 1e-9);
  EXPECT_LT(fit.residual_norm, 1e-10);
  EXPECT_GE(fit.condition_number, 1.0);
}

TEST(fit, recovers_antisymmetric_terms) {
  std::vector<ProfileSample> s;
  for (double a : default_a_grid(4)) {
    const double b = 1 - a;
    s.push_back({a, -1.25 + 0.2 * (std::pow(a, 5) + std::pow(b, 5)) - 0.7 * (std::pow(a, 6) + std::pow(b, 6)) +
                        0.3 * (std::pow(a, 5) - std::pow(b, 5)) + 0.05 * (std::pow(a, 6) - std::pow(b, 6))});
  }
  const FitResult fit = fit_profile(s, BasisSpec{{5, 6}, true}, 4);
  EXPECT_NEAR(fit.y_star, -1.25, 1e-9);
  EXPECT_NEAR(fit.coefficients.at(5), 0.2, 1e-9);
  EXPECT_NEAR(fit.coefficients.at(6), -0.7, 1e-9);
  EXPECT_NEAR(fit.antisymmetric_coefficients.at(5), 0.3, 1e-9);
  EXPECT_NEAR(fit.antisymmetric_coefficients.at(6), 0.05, 1e-9);
}

TEST(fit, constant_data) {
  std::vector<ProfileSample> s;
  for (double a : default_a_grid(2)) s.push_back({a, 0.125});
  const FitResult fit = fit_profile(s, BasisSpec{{4, 5}, false}, 4);
  EXPECT_NEAR(fit.y_star, 0.125, 1e-12);
  EXPECT_NEAR(fit.coefficients.at(4), 0.0, 1e-12);
  EXPECT_NEAR(fit.coefficients.at(5), 0.0, 1e-12);
}

TEST(fit, underdetermined_is_singular) {
  const std::vector<ProfileSample> s{{0.2, 1.0}, {0.7, 1.1}};
  try {
    fit_profile(s, BasisSpec{{5, 6}, false}, 4);
    FAIL() << "expected SingularFitError";
  } catch (const SingularFitError& e) {
    EXPECT_TRUE(std::isinf(e.condition_number()));
  }
  // Mirror pairs give identical rows of the symmetric design.
  const std::vector<ProfileSample> mirrored{{0.2, 1.0}, {0.8, 1.0}, {0.3, 1.1}, {0.7, 1.1}};
  EXPECT_THROW(fit_profile(mirrored, BasisSpec{{4, 5}, false}, 4), SingularFitError);
  EXPECT_THROW(fit_profile(s, BasisSpec{{3}, false}, 4), InvalidArgumentError);
}

TEST(calibration, lie1_window_is_alpha_only) {
  const auto c = tfim("lie1");
  const Calibration cal = calibrate_basis(TrotterStepper(c.formula, c.partition), false, 2,
                                          ExactPropagator(c.partition.hamiltonian()), c.observable, c.initial_state);
  for (int s : cal.basis.orders) EXPECT_EQ(s, 2);
}

TEST(calibration, ruth3_tfim_drops_order_four) {
  const auto c = tfim("ruth3");
  const Calibration cal = calibrate_basis(TrotterStepper(c.formula, c.partition), false, 4,
                                          ExactPropagator(c.partition.hamiltonian()), c.observable, c.initial_state);
  EXPECT_EQ(cal.basis.orders, (std::vector<int>{5, 6}));
  EXPECT_TRUE(cal.basis.include_antisymmetric);
  for (const auto& row : cal.coefficients) EXPECT_LT(std::abs(row[0]), 1e-8);
}

TEST(calibration, suzuki4_orders_within_window) {
  for (const auto& c : {tfim_config("suzuki4"), xxz_config("suzuki4")}) {
    const Calibration cal = calibrate_basis(TrotterStepper(c.formula, c.partition), true, 5,
                                            ExactPropagator(c.partition.hamiltonian()), c.observable, c.initial_state);
    for (int s : cal.basis.orders) {
      EXPECT_GE(s, 5);
      EXPECT_LE(s, 8);
    }
  }
}

TEST(calibration, exact_substitution_leaves_empty_basis) {
  const auto c = tfim("ruth3");
  const ExactPropagator ex(c.partition.hamiltonian());
  const Calibration cal = calibrate_basis(ExactStepper(c.partition.hamiltonian()), false, 4, ex, c.observable, c.initial_state);
  EXPECT_TRUE(cal.basis.orders.empty());
}

TEST(mitigation, exact_substitution_returns_exact_value) {
  const auto c = tfim("ruth3");
  const ExactStepper ex(c.partition.hamiltonian());
  for (const auto& grid : {default_a_grid(2), std::vector<double>{-0.3, 0.1, 0.45, 0.6, 1.2, 1.4, 0.9}}) {
    const auto est = mitigated_estimate(ex, false, 4, 0.5, BasisSpec{{5, 6}, false}, grid, c.observable, c.initial_state);
    EXPECT_NEAR(est.estimate, exact_value(c, 0.5), 1e-10);
  }
}

TEST(mitigation, ruth3_beats_plain_trotter) {
  const auto c = tfim("ruth3");
  ProfilingProblem p;
  p.partition = c.partition;
  p.formula = c.formula;
  p.observable = c.observable;
  p.psi = c.initial_state;
  const auto est = mitigated_estimate(0.3, p);
  const double exact = exact_value(c, 0.3);
  EXPECT_LT(std::abs(est.estimate - exact) * 10, std::abs(trotter_value(c, 0.3) - exact));
  EXPECT_EQ(est.samples.size(), 5u);
}

TEST(extraction, lie1_bracket_formulas) {
  const auto p = zx_pair();
  const auto f = builtin_formula("lie1", p);
  const ErrorSeries series = extract_error_operators(f, p, 3);
  const Eigen::MatrixXcd h1 = kron_sum(OperatorSum(1, {{"Z"}}));
  const Eigen::MatrixXcd h2 = kron_sum(OperatorSum(1, {{"X"}}));
  const Complex i{0.0, 1.0};
  const Eigen::MatrixXcd e2 = -0.5 * (h1 * h2 - h2 * h1);
  EXPECT_LT((e2 - (-i) * oracle::kron_word("Y")).norm(), 1e-15);
  EXPECT_LT((series.at(2).matrix - e2).cwiseAbs().maxCoeff(), 1e-8);

  auto br = [](const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) -> Eigen::MatrixXcd { return a * b - b * a; };
  const Eigen::MatrixXcd e3 =
      (-i / 6.0) * (h1 * br(h2, h1) + br(h2, h1 * h1) + br(h2, h1) * h2 + br(h2 * h2, h1));
  EXPECT_LT((series.at(3).matrix - e3).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(extraction, matches_power_series_oracle) {
  for (const char* name : {"lie1", "strang2", "ruth3", "suzuki4"}) {
    for (const auto& p : {zx_pair(), tfim_config("lie1").partition, xxz_config("lie1").partition}) {
      const auto f = builtin_formula(name, p);
      const int top = std::min(2 * f.alpha, f.alpha + 2);
      const ErrorSeries series = extract_error_operators(f, p, top);
      const Series oracle = error_series_oracle(f, p, top);
      for (int s = 0; s < f.alpha; ++s) EXPECT_LT(oracle[static_cast<std::size_t>(s)].norm(), 1e-12) << name << " s=" << s;
      for (int s = f.alpha; s <= top; ++s) {
        const double scale = std::max(1.0, oracle[static_cast<std::size_t>(s)].cwiseAbs().maxCoeff());
        const double tol = s == f.alpha ? 1e-8 : 1e-6;
        EXPECT_LT((series.at(s).matrix - oracle[static_cast<std::size_t>(s)]).cwiseAbs().maxCoeff(), tol * scale)
            << name << " n=" << p.n << " s=" << s;
      }
    }
  }
}

TEST(extraction, leading_operator_is_anti_hermitian) {
  for (const char* name : {"lie1", "strang2", "ruth3", "suzuki4"}) {
    for (const auto& p : {zx_pair(), tfim_config("lie1").partition, xxz_config("lie1").partition}) {
      const auto f = builtin_formula(name, p);
      EXPECT_LE(extract_error_operators(f, p, f.alpha).unitarity_defect(), 1e-8) << name;
    }
  }
}

TEST(extraction, rejects_bad_orders) {
  const auto p = zx_pair();
  const auto f = builtin_formula("ruth3", p);
  EXPECT_THROW(extract_error_operators(f, p, 3), InvalidArgumentError);
  EXPECT_THROW(extract_error_operators(f, p, 9), InvalidArgumentError);
}

TEST(matrix_element, even_alpha_vanishes) {
  for (const char* name : {"lie1", "ruth3"}) {
    const auto c = tfim(name);
    const ErrorSeries series = extract_error_operators(c.formula, c.partition, c.formula.alpha);
    EXPECT_NEAR(matrix_element_m(series, c.observable, c.initial_state, c.formula.alpha), 0.0, 1e-8) << name;
  }
}

TEST(matrix_element, single_qubit_dense_value) {
  const auto p = zx_pair();
  const auto f = builtin_formula("lie1", p);
  const ErrorSeries series = extract_error_operators(f, p, 3);
  const StateVector psi = basis_state("0");
  const Eigen::MatrixXcd e = series.at(2).matrix;
  const Eigen::MatrixXcd z = kron_sum(OperatorSum(1, {{"Z"}}));
  const Eigen::MatrixXcd k = (e.adjoint() + e) * z;
  const double expect = psi.amplitudes.dot((k + k.adjoint()) * psi.amplitudes).real();
  EXPECT_NEAR(matrix_element_m(series, OperatorSum(1, {{"Z"}}), psi, 2), expect, 1e-12);
}

TEST(matrix_element, matches_fitted_profile_coefficient) {
  for (const char* name : {"strang2", "suzuki4"}) {
    const auto c = tfim(name);
    const int alpha = c.formula.alpha;
    const double m = matrix_element_m(extract_error_operators(c.formula, c.partition, alpha), c.observable,
                                      c.initial_state, alpha);
    ASSERT_GT(std::abs(m), 1e-6) << name;
    CalibrationOptions opt;
    opt.a_probe = {0.2};
    const Calibration cal = calibrate_basis(TrotterStepper(c.formula, c.partition), true, alpha,
                                            ExactPropagator(c.partition.hamiltonian()), c.observable, c.initial_state,
                                            1, opt);
    for (std::size_t i = 0; i < cal.a_values.size(); ++i) {
      const double a = cal.a_values[i];
      const double shape = std::pow(a, alpha) + std::pow(1 - a, alpha);
      const double fitted = 2.0 * cal.coefficients[i][0] / shape;
      EXPECT_NEAR(fitted / m, 1.0, 0.05) << name << " a=" << a;
    }
  }
}
