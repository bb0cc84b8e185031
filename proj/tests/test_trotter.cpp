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

#include "trotterprof/trotter.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_util.hpp"
#include "trotterprof/experiments.hpp"

using namespace trotterprof;

namespace {

PartitionedHamiltonian tfim() { return tfim_config("lie1").partition; }
PartitionedHamiltonian xxz() { return xxz_config("lie1").partition; }

double fragment_sum(const ProductFormula& f, int k) {
  double s = 0.0;
  for (const auto& st : f.steps) s += st.fragment == k ? st.coefficient : 0.0;
  return s;
}

}  // namespace

TEST(trotter, fragment_validation) {
  EXPECT_THROW(Fragment(OperatorSum(1, {{"Z"}, {"X"}})), InvalidArgumentError);
  EXPECT_THROW(Fragment(OperatorSum(1, {{"Z", Complex{0.0, 1.0}}})), NotHermitianError);
  EXPECT_THROW(Fragment(OperatorSum(2, {{"II"}})), InvalidArgumentError);
  EXPECT_NO_THROW(Fragment(OperatorSum(2, {{"XX"}, {"YY"}, {"ZZ", 0.3}})));
}

TEST(trotter, partition_reconstructs_hamiltonian) {
  const auto p = xxz();
  OperatorSum h(4);
  for (int i = 1; i < 4; ++i) {
    h.add({two_site_word(4, i, i + 1, 'X'), 1.0});
    h.add({two_site_word(4, i, i + 1, 'Y'), 1.0});
    h.add({two_site_word(4, i, i + 1, 'Z'), 1.0 / 3});
  }
  EXPECT_LT(p.hamiltonian().distance(h), 1e-15);
}

TEST(trotter, builtin_lie1) {
  const auto f = builtin_formula("lie1", 2);
  EXPECT_EQ(f.steps, (std::vector<FormulaStep>{{0, 1.0}, {1, 1.0}}));
  EXPECT_EQ(f.alpha, 2);
  EXPECT_FALSE(f.symmetric);
}

TEST(trotter, builtin_strang2) {
  const auto f = builtin_formula("strang2", 2);
  EXPECT_EQ(f.steps, (std::vector<FormulaStep>{{0, 0.5}, {1, 1.0}, {0, 0.5}}));
  EXPECT_EQ(f.alpha, 3);
  EXPECT_TRUE(f.symmetric);
}

TEST(trotter, builtin_ruth3_coefficients) {
  const auto f = builtin_formula("ruth3", 2);
  const auto written = operator_product_order(f);
  const std::vector<FormulaStep> expect{{0, 7.0 / 24}, {1, 2.0 / 3}, {0, 3.0 / 4},
                                        {1, -2.0 / 3}, {0, -1.0 / 24}, {1, 1.0}};
  EXPECT_EQ(written, expect);
  EXPECT_EQ(f.alpha, 4);
  EXPECT_FALSE(f.symmetric);
  EXPECT_THROW(builtin_formula("ruth3", 3), InvalidArgumentError);
}

TEST(trotter, builtin_suzuki4) {
  EXPECT_NEAR(suzuki4_weight(), 0.41449077179437573, 1e-15);
  const auto f = builtin_formula("suzuki4", 2);
  EXPECT_EQ(f.alpha, 5);
  EXPECT_TRUE(f.symmetric);
  EXPECT_NEAR(fragment_sum(f, 0), 1.0, 1e-12);
  EXPECT_NEAR(fragment_sum(f, 1), 1.0, 1e-12);
  for (std::size_t k = 1; k < f.steps.size(); ++k) EXPECT_NE(f.steps[k].fragment, f.steps[k - 1].fragment);
}

TEST(trotter, unknown_formula_rejected) { EXPECT_THROW(builtin_formula("yoshida6", 2), InvalidArgumentError); }

TEST(trotter, validate_formula_checks_sums) {
  ProductFormula f{"custom", {{0, 0.5}, {1, 1.0}}, 2, false};
  EXPECT_THROW(validate_formula(f, 2), InvalidArgumentError);
  f.steps.push_back({0, 0.5 + 1e-9});
  EXPECT_THROW(validate_formula(f, 2), InvalidArgumentError);
  f.steps.back().coefficient = 0.5;
  EXPECT_NO_THROW(validate_formula(f, 2));
  f.steps.push_back({2, 1.0});
  EXPECT_THROW(validate_formula(f, 2), InvalidArgumentError);
}

TEST(trotter, compile_lie1_tfim) {
  const auto p = tfim();
  const auto f = builtin_formula("lie1", p);
  const double t = 0.37;
  const Circuit c = compile_circuit(f, p, t);
  ASSERT_EQ(c.size(), 7u);
  for (int k = 0; k < 3; ++k) {
    EXPECT_EQ(std::count(c.gates[k].word.begin(), c.gates[k].word.end(), 'Z'), 2);
    EXPECT_DOUBLE_EQ(c.gates[k].angle, t);
  }
  for (int k = 3; k < 7; ++k) {
    EXPECT_EQ(std::count(c.gates[k].word.begin(), c.gates[k].word.end(), 'X'), 1);
    EXPECT_DOUBLE_EQ(c.gates[k].angle, t / 3);
  }

  const Circuit c2 = compile_circuit(f, p, t, 2);
  ASSERT_EQ(c2.size(), 14u);
  for (std::size_t k = 0; k < 7; ++k) {
    EXPECT_DOUBLE_EQ(c2.gates[k].angle, c.gates[k].angle / 2);
    EXPECT_EQ(c2.gates[k + 7].word, c.gates[k].word);
  }
}

TEST(trotter, compile_at_zero_is_identity) {
  const auto p = tfim();
  const Circuit c = compile_circuit(builtin_formula("suzuki4", p), p, 0.0);
  for (const auto& g : c.gates) EXPECT_EQ(g.angle, 0.0);
  const StateVector psi = benchmark_initial_state();
  EXPECT_EQ(apply_circuit(psi, c).amplitudes, psi.amplitudes);
}

TEST(trotter, invert_examples) {
  const Circuit c{4, {{"ZZII", 0.2}, {"XIII", 0.1}}};
  const Circuit inv = invert_circuit(c);
  ASSERT_EQ(inv.size(), 2u);
  EXPECT_EQ(inv.gates[0].word, "XIII");
  EXPECT_EQ(inv.gates[0].angle, -0.1);
  EXPECT_EQ(inv.gates[1].word, "ZZII");
  EXPECT_EQ(inv.gates[1].angle, -0.2);
  EXPECT_EQ(invert_circuit(Circuit{2, {}}).size(), 0u);
}

TEST(trotter, symmetric_formulas_are_time_reversible) {
  for (const auto& p : {tfim(), xxz()}) {
    for (const char* name : {"strang2", "suzuki4"}) {
      const auto f = builtin_formula(name, p);
      for (double t : {0.3, 1.7}) {
        EXPECT_TRUE(circuits_equivalent(invert_circuit(compile_circuit(f, p, t)), compile_circuit(f, p, -t))) << name;
      }
    }
    for (const char* name : {"lie1", "ruth3"}) {
      const auto f = builtin_formula(name, p);
      EXPECT_FALSE(circuits_equivalent(invert_circuit(compile_circuit(f, p, 0.3)), compile_circuit(f, p, -0.3)))
          << name;
    }
  }
}

TEST(trotter, symmetric_formula_matrices_satisfy_time_reversal) {
  const auto p = tfim();
  const auto f = builtin_formula("suzuki4", p);
  const Eigen::MatrixXcd v = circuit_matrix(compile_circuit(f, p, 0.4));
  const Eigen::MatrixXcd vm = circuit_matrix(compile_circuit(f, p, -0.4));
  EXPECT_LT((vm - v.adjoint()).norm(), 1e-12);
}

TEST(trotter, compiled_formula_matches_product_of_exponentials) {
  const auto p = xxz();
  const auto f = builtin_formula("ruth3", p);
  const double t = 0.45;
  Eigen::MatrixXcd expect = Eigen::MatrixXcd::Identity(16, 16);
  for (const auto& s : f.steps) {
    const Eigen::MatrixXcd h = oracle::kron_sum(p.fragments[static_cast<std::size_t>(s.fragment)].terms());
    expect = oracle::expm_oracle(h, s.coefficient * t) * expect;
  }
  EXPECT_LT((circuit_matrix(compile_circuit(f, p, t)) - expect).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(trotter, empirical_orders) {
  const auto probe = log_spaced(1e-2, 1e-1, 8);
  const struct {
    const char* name;
    double order;
  } cases[] = {{"lie1", 2}, {"strang2", 3}, {"ruth3", 4}, {"suzuki4", 5}};
  for (const auto& c : cases) {
    const auto p = tfim();
    EXPECT_NEAR(empirical_order(builtin_formula(c.name, p), p, probe), c.order, 0.3) << c.name;
  }
  const auto px = xxz();
  EXPECT_NEAR(empirical_order(builtin_formula("suzuki4", px), px, probe), 5.0, 0.3);
}

TEST(trotter, empirical_order_input_checks) {
  const auto p = tfim();
  const auto f = builtin_formula("lie1", p);
  EXPECT_THROW(empirical_order(f, p, std::vector<double>{0.1, 0.2, 0.3}), InvalidArgumentError);
  EXPECT_THROW(empirical_order(f, p, std::vector<double>{0.0, 0.1, 0.2, 0.3}), InvalidArgumentError);
  const PartitionedHamiltonian commuting(2, {Fragment(OperatorSum(2, {{"ZI"}})), Fragment(OperatorSum(2, {{"IZ"}}))});
  EXPECT_THROW(empirical_order(builtin_formula("lie1", commuting), commuting, std::vector<double>{0.1, 0.2, 0.3, 0.4}),
               DegenerateInputError);
}

TEST(trotter, log_log_slope_of_power_law) {
  std::vector<double> x{0.1, 0.2, 0.3, 0.5}, y;
  for (double v : x) y.push_back(3.0 * std::pow(v, 7));
  EXPECT_NEAR(log_log_slope(x, y), 7.0, 1e-9);
}
