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
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "trotterprof/errors.hpp"
#include "trotterprof/profiling.hpp"
#include "trotterprof/simulator.hpp"
#include "trotterprof/trotter.hpp"

namespace trotterprof {

/// Richardson weights over Trotter step counts.
struct MPFWeights {
  std::vector<int> step_counts;
  std::vector<double> weights;
  bool symmetric = false;
  int alpha = 2;
  std::vector<int> cancelled_orders;
  double max_residual = 0.0;
  double condition_number = 1.0;
  bool ill_conditioned = false;  // condition number above 1e10
};

/// Error orders removed by N step counts: alpha, alpha+1, ... (regular) or
/// alpha, alpha+2, ... (symmetric), N - 1 of them.
inline std::vector<int> mpf_cancelled_orders(std::size_t count, int alpha, bool symmetric) {
  std::vector<int> k;
  for (std::size_t j = 0; j + 1 < count; ++j) k.push_back(alpha + static_cast<int>(j) * (symmetric ? 2 : 1));
  return k;
}

/// Residual of the weight system: max of |sum w - 1| and |sum w_j / s_j^(k-1)|.
inline double mpf_residual(std::span<const double> w, std::span<const int> counts, std::span<const int> orders) {
  long double sum = 0.0L;
  for (double x : w) sum += x;
  double r = static_cast<double>(std::fabs(sum - 1.0L));
  for (int k : orders) {
    long double acc = 0.0L;
    for (std::size_t j = 0; j < w.size(); ++j) acc += w[j] / std::pow(static_cast<long double>(counts[j]), k - 1);
    r = std::max(r, static_cast<double>(std::fabs(acc)));
  }
  return r;
}

/// Solves { sum w_j = 1 ; sum w_j / s_j^(k-1) = 0 for each cancelled k } in
/// extended precision. An s-step circuit carries leading error E_k t^k / s^(k-1).
inline MPFWeights mpf_weights(std::span<const int> step_counts, int alpha, bool symmetric) {
  if (step_counts.empty()) throw InvalidArgumentError("mpf_weights: no step counts");
  if (alpha < 2) throw InvalidArgumentError("mpf_weights: alpha must be >= 2");
  std::vector<int> sorted(step_counts.begin(), step_counts.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() < 1) throw InvalidArgumentError("mpf_weights: step counts must be >= 1");
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw SingularFitError("mpf_weights: duplicate step counts make the system singular", 0.0);
  }

  MPFWeights out;
  out.step_counts.assign(step_counts.begin(), step_counts.end());
  out.symmetric = symmetric;
  out.alpha = alpha;
  out.cancelled_orders = mpf_cancelled_orders(step_counts.size(), alpha, symmetric);

  using MatrixL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  using VectorL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  const auto n = static_cast<Eigen::Index>(step_counts.size());
  MatrixL a(n, n);
  VectorL b = VectorL::Zero(n);
  b(0) = 1.0L;
  for (Eigen::Index j = 0; j < n; ++j) {
    const long double s = step_counts[static_cast<std::size_t>(j)];
    a(0, j) = 1.0L;
    for (Eigen::Index r = 1; r < n; ++r) a(r, j) = 1.0L / std::pow(s, out.cancelled_orders[static_cast<std::size_t>(r - 1)] - 1);
  }
  Eigen::FullPivLU<MatrixL> lu(a);
  if (!lu.isInvertible()) throw SingularFitError("mpf_weights: singular weight system", 0.0);
  const VectorL w = lu.solve(b);
  for (Eigen::Index j = 0; j < n; ++j) out.weights.push_back(static_cast<double>(w(j)));

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a.cast<double>());
  const auto& sv = svd.singularValues();
  out.condition_number = sv(0) / sv(sv.size() - 1);
  out.ill_conditioned = out.condition_number > 1e10;
  out.max_residual = mpf_residual(out.weights, out.step_counts, out.cancelled_orders);
  return out;
}

/// Step counts (1, 2, ..., N).
inline std::vector<int> consecutive_counts(int n) {
  std::vector<int> c(static_cast<std::size_t>(n));
  std::iota(c.begin(), c.end(), 1);
  return c;
}

/// <O> after V_s(t) = (V(t/s))^s for each step count in `weights`.
template <TimeStepper S>
std::vector<double> mpf_constituents(const S& stepper, double t, const MPFWeights& weights, const OperatorSum& obs,
                                     const StateVector& psi) {
  std::vector<double> values;
  Eigen::VectorXcd scratch;
  for (int s : weights.step_counts) {
    StateVector state = psi;
    stepper.apply(t, s, state, scratch);
    values.push_back(expectation(state, obs));
  }
  return values;
}

inline double mpf_combine(const MPFWeights& weights, std::span<const double> values) {
  long double acc = 0.0L;
  for (std::size_t j = 0; j < values.size(); ++j) acc += static_cast<long double>(weights.weights[j]) * values[j];
  return static_cast<double>(acc);
}

template <TimeStepper S>
double mpf_estimate(const S& stepper, double t, const MPFWeights& weights, const OperatorSum& obs,
                    const StateVector& psi) {
  return mpf_combine(weights, mpf_constituents(stepper, t, weights, obs, psi));
}

inline double mpf_estimate(double t, const MPFWeights& weights, const ProductFormula& f,
                           const PartitionedHamiltonian& partition, const OperatorSum& obs, const StateVector& psi) {
  return mpf_estimate(TrotterStepper(f, partition), t, weights, obs, psi);
}

/// Exact non-negative rational p / q in lowest terms.
struct Rational {
  long num = 0;
  long den = 1;

  Rational() = default;
  Rational(long p, long q) : num(p), den(q) {
    const long g = std::gcd(num, den);
    if (g != 0) {
      num /= g;
      den /= g;
    }
    if (den < 0) {
      num = -num;
      den = -den;
    }
  }

  bool is_integer() const { return den == 1; }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const { return is_integer() ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

/// Step count where MPF's reach matches the profiling limit 2 alpha - 2:
/// alpha - 1 (regular) or (alpha - 1) / 2 (symmetric).
inline Rational critical_N(int alpha, bool symmetric) {
  if (alpha < 2) throw InvalidArgumentError("critical_N: alpha must be >= 2");
  return symmetric ? Rational(alpha - 1, 2) : Rational(alpha - 1, 1);
}

}  // namespace trotterprof
