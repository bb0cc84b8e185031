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
#include <cstdlib>
#include <limits>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

namespace trotterprof {

/// `count` Chebyshev-Gauss nodes on [lo, hi], ascending. A single node sits at
/// the midpoint.
inline std::vector<double> chebyshev_nodes(int count, double lo, double hi) {
  std::vector<double> x;
  x.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int k = count - 1; k >= 0; --k) {
    const double c = std::cos((2.0 * k + 1.0) * std::numbers::pi / (2.0 * count));
    x.push_back(0.5 * (lo + hi) + 0.5 * (hi - lo) * c);
  }
  // cos(pi/2) is not exactly zero; pin the midpoint of odd grids.
  if (count % 2 == 1) x[static_cast<std::size_t>(count / 2)] = 0.5 * (lo + hi);
  return x;
}

/// `count` log-spaced points on [lo, hi], both ends included.
inline std::vector<double> log_spaced(double lo, double hi, int count) {
  std::vector<double> x;
  if (count == 1) return {lo};
  for (int k = 0; k < count; ++k) {
    x.push_back(std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * k / (count - 1)));
  }
  x.front() = lo;
  x.back() = hi;
  return x;
}

inline std::vector<double> linear_spaced(double lo, double hi, int count) {
  std::vector<double> x;
  if (count == 1) return {lo};
  for (int k = 0; k < count; ++k) x.push_back(lo + (hi - lo) * k / (count - 1));
  x.back() = hi;
  return x;
}

/// 2-norm condition number; infinity for numerically rank-deficient or empty
/// matrices (smallest singular value within rounding of zero).
inline double condition_number(const Eigen::MatrixXd& a) {
  if (a.rows() == 0 || a.cols() == 0) return std::numeric_limits<double>::infinity();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  const double floor = std::numeric_limits<double>::epsilon() * static_cast<double>(std::max(a.rows(), a.cols())) * s(0);
  if (a.rows() < a.cols() || smin <= floor) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

struct LeastSquares {
  Eigen::MatrixXd solution;  // cols x rhs
  double residual_norm = 0.0;
  double condition_number = 1.0;
};

/// Ordinary least squares through column-pivoted Householder QR. Columns of
/// `rhs` are solved independently.
inline LeastSquares solve_least_squares(const Eigen::MatrixXd& design, const Eigen::MatrixXd& rhs) {
  LeastSquares out;
  out.condition_number = condition_number(design);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  out.solution = qr.solve(rhs);
  out.residual_norm = (design * out.solution - rhs).norm();
  return out;
}

/// Worker count: TROTTERPROF_THREADS when set to a positive integer, otherwise
/// the hardware concurrency.
inline unsigned worker_count() {
  if (const char* env = std::getenv("TROTTERPROF_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, count). Each index is handled exactly once; results
/// written to per-index slots stay deterministic regardless of scheduling.
/// The first exception thrown by any worker is rethrown.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn, unsigned workers = worker_count()) {
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < count; i += workers) fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace trotterprof
