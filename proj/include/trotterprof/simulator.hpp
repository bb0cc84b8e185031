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
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "trotterprof/errors.hpp"
#include "trotterprof/pauli.hpp"

namespace trotterprof {

inline constexpr double kNormTolerance = 1e-10;

/// Pure state on n qubits; amplitude index bit (n - q) belongs to qubit q.
struct StateVector {
  Eigen::VectorXcd amplitudes;
  int n = 0;

  std::size_t dim() const { return static_cast<std::size_t>(amplitudes.size()); }
  double norm() const { return amplitudes.norm(); }
};

/// Normalizes an arbitrary amplitude list of length 2^n.
inline StateVector state_from_amplitudes(std::span<const Complex> amps) {
  const auto dim = amps.size();
  if (dim < 2 || (dim & (dim - 1)) != 0) {
    throw DimensionError("amplitude count " + std::to_string(dim) + " is not a power of two >= 2");
  }
  StateVector s{Eigen::Map<const Eigen::VectorXcd>(amps.data(), static_cast<Eigen::Index>(dim)),
                std::countr_zero(dim)};
  const double nrm = s.amplitudes.norm();
  if (!(nrm > 0.0) || !std::isfinite(nrm)) throw DegenerateInputError("amplitude vector has zero norm");
  s.amplitudes /= nrm;
  return s;
}

/// Kronecker product of per-qubit (|0>, |1>) amplitude pairs, factor 1 leftmost,
/// normalized at the end.
inline StateVector init_product_state(std::span<const std::array<Complex, 2>> factors) {
  if (factors.empty()) throw DimensionError("init_product_state: no qubits");
  Eigen::VectorXcd v(1);
  v(0) = 1.0;
  for (std::size_t q = 0; q < factors.size(); ++q) {
    const auto& f = factors[q];
    if (std::abs(f[0]) == 0.0 && std::abs(f[1]) == 0.0) {
      throw DegenerateInputError("init_product_state: factor for qubit " + std::to_string(q + 1) + " is zero");
    }
    // v (x) f: earlier factors stay on the more significant bits.
    Eigen::VectorXcd ordered(2 * v.size());
    for (Eigen::Index k = 0; k < v.size(); ++k) {
      ordered(2 * k) = f[0] * v(k);
      ordered(2 * k + 1) = f[1] * v(k);
    }
    v = std::move(ordered);
  }
  StateVector s{std::move(v), static_cast<int>(factors.size())};
  s.amplitudes /= s.amplitudes.norm();
  return s;
}

inline StateVector init_product_state(std::initializer_list<std::array<Complex, 2>> factors) {
  return init_product_state(std::span<const std::array<Complex, 2>>(factors.begin(), factors.size()));
}

/// Computational basis state |bits> with bits given as a 0/1 string, qubit 1 first.
inline StateVector basis_state(const std::string& bits) {
  std::vector<std::array<Complex, 2>> f;
  for (char b : bits) f.push_back(b == '1' ? std::array<Complex, 2>{0.0, 1.0} : std::array<Complex, 2>{1.0, 0.0});
  return init_product_state(f);
}

/// The gate exp(-i * angle * P).
struct PauliRotation {
  std::string word;
  double angle = 0.0;

  PauliRotation() = default;
  PauliRotation(std::string w, double theta) : word(std::move(w)), angle(theta) {
    PauliTerm check(word);
    if (check.is_identity()) throw InvalidArgumentError("rotation word must contain a non-identity letter");
  }

  int num_qubits() const { return static_cast<int>(word.size()); }
};

/// Ordered gate list; gates[0] acts first.
struct Circuit {
  int n = 0;
  std::vector<PauliRotation> gates;

  std::size_t size() const { return gates.size(); }
  bool empty() const { return gates.empty(); }

  void append(const Circuit& other) {
    if (other.n != n) throw DimensionError("Circuit::append: qubit counts differ");
    gates.insert(gates.end(), other.gates.begin(), other.gates.end());
  }
};

inline void check_same_n(int a, int b, const char* where) {
  if (a != b) {
    throw DimensionError(std::string(where) + ": qubit counts " + std::to_string(a) + " and " + std::to_string(b) +
                         " differ");
  }
}

/// In-place exp(-i*angle*P)|psi> = cos(angle)|psi> - i sin(angle) P|psi>.
/// `scratch` is resized as needed.
inline void apply_pauli_rotation_in_place(StateVector& state, const PauliRotation& g, Eigen::VectorXcd& scratch) {
  check_same_n(state.n, g.num_qubits(), "apply_pauli_rotation");
  const auto m = PauliMasks::from_word(g.word);
  const double c = std::cos(g.angle);
  const Complex mis = Complex{0.0, -std::sin(g.angle)};
  const auto dim = static_cast<std::uint64_t>(state.dim());
  auto& psi = state.amplitudes;
  if (m.x_mask == 0) {
    for (std::uint64_t k = 0; k < dim; ++k) psi(static_cast<Eigen::Index>(k)) *= c + mis * m.phase(k);
    return;
  }
  scratch.resize(psi.size());
  for (std::uint64_t k = 0; k < dim; ++k) {
    scratch(static_cast<Eigen::Index>(k ^ m.x_mask)) = m.phase(k) * psi(static_cast<Eigen::Index>(k));
  }
  psi = c * psi + mis * scratch;
}

inline StateVector apply_pauli_rotation(StateVector state, const PauliRotation& g) {
  Eigen::VectorXcd scratch;
  apply_pauli_rotation_in_place(state, g, scratch);
  return state;
}

inline void apply_circuit_in_place(StateVector& state, const Circuit& c, Eigen::VectorXcd& scratch) {
  check_same_n(state.n, c.n, "apply_circuit");
  for (const auto& g : c.gates) apply_pauli_rotation_in_place(state, g, scratch);
}

inline StateVector apply_circuit(StateVector state, const Circuit& c) {
  Eigen::VectorXcd scratch;
  apply_circuit_in_place(state, c, scratch);
  return state;
}

/// Dense unitary of a circuit (the product with gates[0] rightmost).
inline Eigen::MatrixXcd circuit_matrix(const Circuit& c, int cap = kDenseQubitCap) {
  check_dense_cap(c.n, cap);
  const auto dim = Eigen::Index{1} << c.n;
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
  Eigen::VectorXcd scratch;
  for (Eigen::Index col = 0; col < dim; ++col) {
    StateVector s{u.col(col), c.n};
    apply_circuit_in_place(s, c, scratch);
    u.col(col) = s.amplitudes;
  }
  return u;
}

/// exp(-iHt) through a single Hermitian eigendecomposition of H, reusable for
/// any number of times t.
class ExactPropagator {
 public:
  explicit ExactPropagator(const OperatorSum& h, int cap = kDenseQubitCap) : n_(h.num_qubits()) {
    if (!h.hermitian()) throw NotHermitianError("exact evolution requires a Hermitian Hamiltonian");
    const DenseOperator dense = to_dense(h, cap);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(dense.matrix);
    if (solver.info() != Eigen::Success) throw NumericalError("Hermitian eigendecomposition failed");
    energies_ = solver.eigenvalues();
    vectors_ = solver.eigenvectors();
  }

  int num_qubits() const { return n_; }
  const Eigen::VectorXd& energies() const { return energies_; }

  Eigen::MatrixXcd matrix(double t) const {
    return vectors_ * phases(t).asDiagonal() * vectors_.adjoint();
  }

  StateVector evolve(double t, const StateVector& state) const {
    check_same_n(state.n, n_, "exact_evolve");
    Eigen::VectorXcd coeffs = vectors_.adjoint() * state.amplitudes;
    coeffs = coeffs.cwiseProduct(phases(t));
    return StateVector{vectors_ * coeffs, n_};
  }

  /// Spectral norm of H.
  double norm() const { return energies_.cwiseAbs().maxCoeff(); }

 private:
  Eigen::VectorXcd phases(double t) const {
    Eigen::VectorXcd p(energies_.size());
    for (Eigen::Index k = 0; k < energies_.size(); ++k) p(k) = std::polar(1.0, -energies_(k) * t);
    return p;
  }

  int n_;
  Eigen::VectorXd energies_;
  Eigen::MatrixXcd vectors_;
};

inline StateVector exact_evolve(const OperatorSum& h, double t, const StateVector& state) {
  return ExactPropagator(h).evolve(t, state);
}

/// <psi|O|psi> for Hermitian O, accumulated term by term without a dense matrix.
inline double expectation(const StateVector& state, const OperatorSum& obs) {
  check_same_n(state.n, obs.num_qubits(), "expectation");
  if (!obs.hermitian()) throw NotHermitianError("expectation requires a Hermitian observable");
  const auto& psi = state.amplitudes;
  const auto dim = static_cast<std::uint64_t>(state.dim());
  Complex total = 0.0;
  for (const auto& t : obs.terms()) {
    const auto m = PauliMasks::from_word(t.word);
    Complex acc = 0.0;
    for (std::uint64_t k = 0; k < dim; ++k) {
      acc += std::conj(psi(static_cast<Eigen::Index>(k ^ m.x_mask))) * m.phase(k) * psi(static_cast<Eigen::Index>(k));
    }
    total += t.coeff * acc;
  }
  double scale = 0.0;
  for (const auto& t : obs.terms()) scale += std::abs(t.coeff);
  if (std::abs(total.imag()) > 1e-10 * std::max(1.0, scale)) {
    throw NumericalError("expectation of a Hermitian observable has imaginary part " +
                         std::to_string(total.imag()));
  }
  return total.real();
}

}  // namespace trotterprof
