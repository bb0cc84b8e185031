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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trotterprof/errors.hpp"
#include "trotterprof/pauli.hpp"
#include "trotterprof/simulator.hpp"

namespace trotterprof {

/// A group of mutually commuting Pauli terms; exp(-i theta F) factors exactly
/// into one rotation per term.
class Fragment {
 public:
  explicit Fragment(OperatorSum terms) : terms_(std::move(terms)) {
    if (!mutually_commuting(terms_)) throw InvalidArgumentError("fragment terms do not mutually commute");
    if (!terms_.hermitian()) throw NotHermitianError("fragment coefficients must be real");
    for (const auto& t : terms_.terms()) {
      if (t.is_identity()) throw InvalidArgumentError("fragments may not contain the identity word");
    }
  }

  const OperatorSum& terms() const { return terms_; }
  int num_qubits() const { return terms_.num_qubits(); }

 private:
  OperatorSum terms_;
};

struct PartitionedHamiltonian {
  std::vector<Fragment> fragments;
  int n = 0;

  PartitionedHamiltonian() = default;
  PartitionedHamiltonian(int num_qubits, std::vector<Fragment> frags) : fragments(std::move(frags)), n(num_qubits) {
    for (const auto& f : fragments) check_same_n(f.num_qubits(), n, "PartitionedHamiltonian");
  }

  std::size_t size() const { return fragments.size(); }

  /// Sum of all fragments.
  OperatorSum hamiltonian() const {
    OperatorSum h(n);
    for (const auto& f : fragments) h += f.terms();
    return h;
  }
};

struct FormulaStep {
  int fragment = 0;
  double coefficient = 0.0;

  friend bool operator==(const FormulaStep&, const FormulaStep&) = default;
};

/// Ordered list of fragment exponentials in application order: steps[0] acts first.
/// `alpha` is the lowest power of t in V(t) - U(t).
struct ProductFormula {
  std::string name;
  std::vector<FormulaStep> steps;
  int alpha = 2;
  bool symmetric = false;
};

inline constexpr double kConsistencyTolerance = 1e-12;

/// Throws unless every fragment index is valid and each fragment's step
/// coefficients sum to one.
inline void validate_formula(const ProductFormula& f, std::size_t num_fragments) {
  if (f.alpha < 2) throw InvalidArgumentError("formula alpha must be >= 2");
  std::vector<double> sums(num_fragments, 0.0);
  for (const auto& s : f.steps) {
    if (s.fragment < 0 || static_cast<std::size_t>(s.fragment) >= num_fragments) {
      throw InvalidArgumentError("formula step references fragment " + std::to_string(s.fragment) + " but only " +
                                 std::to_string(num_fragments) + " exist");
    }
    sums[static_cast<std::size_t>(s.fragment)] += s.coefficient;
  }
  for (std::size_t k = 0; k < num_fragments; ++k) {
    if (std::abs(sums[k] - 1.0) > kConsistencyTolerance) {
      throw InvalidArgumentError("formula coefficients for fragment " + std::to_string(k) + " sum to " +
                                 std::to_string(sums[k]) + ", expected 1");
    }
  }
}

namespace detail {

// Collapses neighbouring steps on the same fragment.
inline std::vector<FormulaStep> merge_adjacent(std::span<const FormulaStep> steps) {
  std::vector<FormulaStep> out;
  for (const auto& s : steps) {
    if (!out.empty() && out.back().fragment == s.fragment) {
      out.back().coefficient += s.coefficient;
    } else {
      out.push_back(s);
    }
  }
  return out;
}

inline std::vector<FormulaStep> strang_steps(int num_fragments) {
  std::vector<FormulaStep> steps;
  for (int k = 0; k + 1 < num_fragments; ++k) steps.push_back({k, 0.5});
  steps.push_back({num_fragments - 1, 1.0});
  for (int k = num_fragments - 2; k >= 0; --k) steps.push_back({k, 0.5});
  return steps;
}

}  // namespace detail

/// Suzuki fourth-order recursion weight 1 / (4 - 4^(1/3)).
inline double suzuki4_weight() { return 1.0 / (4.0 - std::cbrt(4.0)); }

/// Built-in formulas: lie1, strang2, ruth3, suzuki4.
inline ProductFormula builtin_formula(std::string_view name, std::size_t num_fragments) {
  if (name == "ruth3" && num_fragments != 2) {
    throw InvalidArgumentError("ruth3 needs exactly 2 fragments, got " + std::to_string(num_fragments));
  }
  if (num_fragments < 2) {
    throw InvalidArgumentError(std::string(name) + " needs at least 2 fragments, got " + std::to_string(num_fragments));
  }
  const int m = static_cast<int>(num_fragments);
  ProductFormula f;
  f.name = std::string(name);
  if (name == "lie1") {
    for (int k = 0; k < m; ++k) f.steps.push_back({k, 1.0});
    f.alpha = 2;
    f.symmetric = false;
  } else if (name == "strang2") {
    f.steps = detail::strang_steps(m);
    f.alpha = 3;
    f.symmetric = true;
  } else if (name == "ruth3") {
    // Operator product prod_i A(p_i t) B(q_i t) with
    // (p1, q1, p2, q2, p3, q3) = (7/24, 2/3, 3/4, -2/3, -1/24, 1).
    // The rightmost factor acts first, so the application order is reversed.
    const double p[3] = {7.0 / 24.0, 3.0 / 4.0, -1.0 / 24.0};
    const double q[3] = {2.0 / 3.0, -2.0 / 3.0, 1.0};
    for (int i = 2; i >= 0; --i) {
      f.steps.push_back({1, q[i]});
      f.steps.push_back({0, p[i]});
    }
    f.alpha = 4;
    f.symmetric = false;
  } else if (name == "suzuki4") {
    const double w = suzuki4_weight();
    const double scales[5] = {w, w, 1.0 - 4.0 * w, w, w};
    std::vector<FormulaStep> raw;
    for (double s : scales) {
      for (auto st : detail::strang_steps(m)) raw.push_back({st.fragment, st.coefficient * s});
    }
    f.steps = detail::merge_adjacent(raw);
    f.alpha = 5;
    f.symmetric = true;
  } else {
    throw InvalidArgumentError("unknown formula '" + std::string(name) + "' (expected lie1, strang2, ruth3, suzuki4)");
  }
  validate_formula(f, num_fragments);
  return f;
}

inline ProductFormula builtin_formula(std::string_view name, const PartitionedHamiltonian& partition) {
  return builtin_formula(name, partition.size());
}

/// Step coefficients in written operator-product order
/// (leftmost factor acts last), i.e. the reverse of the application order.
inline std::vector<FormulaStep> operator_product_order(const ProductFormula& f) {
  return {f.steps.rbegin(), f.steps.rend()};
}

/// V_N(t) = (V(t/N))^N as a gate list.
inline Circuit compile_circuit(const ProductFormula& f, const PartitionedHamiltonian& partition, double t,
                               int trotter_steps = 1) {
  if (trotter_steps < 1) throw InvalidArgumentError("trotter_steps must be >= 1");
  const double dt = t / trotter_steps;
  Circuit one{partition.n, {}};
  for (const auto& s : f.steps) {
    if (s.fragment < 0 || static_cast<std::size_t>(s.fragment) >= partition.size()) {
      throw InvalidArgumentError("formula step references missing fragment " + std::to_string(s.fragment));
    }
    for (const auto& term : partition.fragments[static_cast<std::size_t>(s.fragment)].terms().terms()) {
      one.gates.emplace_back(term.word, s.coefficient * dt * term.coeff.real());
    }
  }
  Circuit out{partition.n, {}};
  out.gates.reserve(one.size() * static_cast<std::size_t>(trotter_steps));
  for (int r = 0; r < trotter_steps; ++r) out.append(one);
  return out;
}

/// Reversed gate order with negated angles; same gate count.
inline Circuit invert_circuit(const Circuit& c) {
  Circuit out{c.n, {}};
  out.gates.reserve(c.size());
  for (auto it = c.gates.rbegin(); it != c.gates.rend(); ++it) out.gates.emplace_back(it->word, -it->angle);
  return out;
}

/// Gate-for-gate comparison that tolerates reordering inside runs of mutually
/// commuting gates. Runs are taken greedily from the left in both circuits.
inline bool circuits_equivalent(const Circuit& a, const Circuit& b, double tol = 1e-12) {
  if (a.n != b.n || a.size() != b.size()) return false;
  auto blocks = [](const Circuit& c) {
    std::vector<std::vector<PauliRotation>> out;
    for (const auto& g : c.gates) {
      bool fits = !out.empty();
      if (fits) {
        for (const auto& h : out.back()) {
          if (!words_commute(g.word, h.word)) {
            fits = false;
            break;
          }
        }
      }
      if (!fits) out.emplace_back();
      out.back().push_back(g);
    }
    for (auto& blk : out) {
      std::sort(blk.begin(), blk.end(), [](const auto& x, const auto& y) {
        return x.word != y.word ? x.word < y.word : x.angle < y.angle;
      });
    }
    return out;
  };
  const auto ba = blocks(a);
  const auto bb = blocks(b);
  if (ba.size() != bb.size()) return false;
  for (std::size_t i = 0; i < ba.size(); ++i) {
    if (ba[i].size() != bb[i].size()) return false;
    for (std::size_t j = 0; j < ba[i].size(); ++j) {
      if (ba[i][j].word != bb[i][j].word || std::abs(ba[i][j].angle - bb[i][j].angle) > tol) return false;
    }
  }
  return true;
}

/// Least-squares slope of log(y) against log(x).
inline double log_log_slope(std::span<const double> x, std::span<const double> y) {
  const auto m = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double md = static_cast<double>(m);
  return (md * sxy - sx * sy) / (md * sxx - sx * sx);
}

/// Spectral norm of V(t) - U(t) at each probe time.
inline std::vector<double> trotter_deviation(const ProductFormula& f, const PartitionedHamiltonian& partition,
                                             std::span<const double> probe) {
  const ExactPropagator exact(partition.hamiltonian());
  std::vector<double> dev;
  dev.reserve(probe.size());
  for (double t : probe) {
    const Eigen::MatrixXcd d = circuit_matrix(compile_circuit(f, partition, t)) - exact.matrix(t);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(d);
    dev.push_back(svd.singularValues()(0));
  }
  return dev;
}

/// Log-log slope of ||V(t) - U(t)|| over the probe times; approximately alpha.
inline double empirical_order(const ProductFormula& f, const PartitionedHamiltonian& partition,
                              std::span<const double> probe) {
  if (probe.size() < 4) throw InvalidArgumentError("empirical_order needs at least 4 probe times");
  for (double t : probe) {
    if (!(t > 0.0)) throw InvalidArgumentError("empirical_order probe times must be positive");
  }
  const auto dev = trotter_deviation(f, partition, probe);
  for (double d : dev) {
    if (d < 1e-14) throw DegenerateInputError("Trotter deviation underflows 1e-14; choose larger probe times");
  }
  return log_log_slope(probe, dev);
}

}  // namespace trotterprof
