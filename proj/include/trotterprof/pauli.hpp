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
#include <bit>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "trotterprof/errors.hpp"

namespace trotterprof {

using Complex = std::complex<double>;

/// Default upper bound on the qubit count of any dense 2^n x 2^n realization.
inline constexpr int kDenseQubitCap = 12;

/// Terms with |coeff| below this are dropped during canonicalization.
inline constexpr double kDropTolerance = 1e-15;

/// Imaginary parts below this count as real when testing hermiticity.
inline constexpr double kHermitianTolerance = 1e-12;

namespace detail {

inline bool is_pauli_letter(char c) {
  return c == 'I' || c == 'X' || c == 'Y' || c == 'Z';
}

// Single-site product table: a*b = phase * letter, phase in {1, i, -1, -i}.
inline std::pair<char, Complex> multiply_letters(char a, char b) {
  constexpr Complex i{0.0, 1.0};
  if (a == 'I') return {b, 1.0};
  if (b == 'I') return {a, 1.0};
  if (a == b) return {'I', 1.0};
  switch (a) {
    case 'X': return b == 'Y' ? std::pair{'Z', i} : std::pair{'Y', -i};
    case 'Y': return b == 'Z' ? std::pair{'X', i} : std::pair{'Z', -i};
    default:  return b == 'X' ? std::pair{'Y', i} : std::pair{'X', -i};
  }
}

}  // namespace detail

/// Bit-mask form of a Pauli word acting on basis states:
///   P|k> = i^y_count * (-1)^popcount(k & z_mask) |k ^ x_mask>.
/// Qubit 1 (leftmost letter) is the most significant bit of k.
struct PauliMasks {
  std::uint64_t x_mask = 0;
  std::uint64_t z_mask = 0;
  int y_count = 0;

  static PauliMasks from_word(std::string_view word) {
    PauliMasks m;
    const auto n = word.size();
    for (std::size_t q = 0; q < n; ++q) {
      const std::uint64_t bit = std::uint64_t{1} << (n - 1 - q);
      switch (word[q]) {
        case 'X': m.x_mask |= bit; break;
        case 'Z': m.z_mask |= bit; break;
        case 'Y':
          m.x_mask |= bit;
          m.z_mask |= bit;
          ++m.y_count;
          break;
        default: break;
      }
    }
    return m;
  }

  /// Phase picked up by basis state k; the target index is k ^ x_mask.
  Complex phase(std::uint64_t k) const {
    static constexpr Complex kPowI[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const int sign = std::popcount(k & z_mask) & 1;
    return kPowI[(y_count + 2 * sign) & 3];
  }
};

/// A weighted Pauli word, e.g. 0.5 * "XZII".
struct PauliTerm {
  std::string word;
  Complex coeff{1.0, 0.0};

  PauliTerm() = default;
  PauliTerm(std::string w, Complex c = 1.0) : word(std::move(w)), coeff(c) {
    if (word.empty()) throw DimensionError("Pauli word must act on at least one qubit");
    for (char ch : word) {
      if (!detail::is_pauli_letter(ch)) {
        throw InvalidArgumentError("invalid Pauli letter '" + std::string(1, ch) + "' in word " + word);
      }
    }
  }

  int num_qubits() const { return static_cast<int>(word.size()); }
  bool is_identity() const { return word.find_first_not_of('I') == std::string::npos; }
};

/// Single-qubit Pauli on `qubit` (1-based, leftmost) in an n-qubit word.
inline std::string single_site_word(int n, int qubit, char letter) {
  std::string w(static_cast<std::size_t>(n), 'I');
  w.at(static_cast<std::size_t>(qubit - 1)) = letter;
  return w;
}

/// Two-site word with `letter` on qubits i and j (1-based).
inline std::string two_site_word(int n, int i, int j, char letter) {
  std::string w(static_cast<std::size_t>(n), 'I');
  w.at(static_cast<std::size_t>(i - 1)) = letter;
  w.at(static_cast<std::size_t>(j - 1)) = letter;
  return w;
}

inline PauliTerm pauli_product(const PauliTerm& p, const PauliTerm& q) {
  if (p.word.size() != q.word.size()) {
    throw DimensionError("pauli_product: word lengths " + std::to_string(p.word.size()) + " and " +
                         std::to_string(q.word.size()) + " differ");
  }
  std::string word(p.word.size(), 'I');
  Complex phase = 1.0;
  for (std::size_t k = 0; k < word.size(); ++k) {
    auto [letter, ph] = detail::multiply_letters(p.word[k], q.word[k]);
    word[k] = letter;
    phase *= ph;
  }
  PauliTerm r;
  r.word = std::move(word);
  r.coeff = phase * p.coeff * q.coeff;
  return r;
}

/// Two Pauli words commute iff they anticommute on an even number of sites.
inline bool words_commute(std::string_view a, std::string_view b) {
  int anti = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] != 'I' && b[k] != 'I' && a[k] != b[k]) ++anti;
  }
  return anti % 2 == 0;
}

/// Linear combination of Pauli words over a common qubit count.
///
/// Terms keep first-insertion order; adding an existing word merges into it.
/// That order is the "canonical term order" used when compiling fragments
/// into gates, so construction order is meaningful.
class OperatorSum {
 public:
  explicit OperatorSum(int num_qubits = 1) : n_(num_qubits) {
    if (n_ < 1) throw DimensionError("OperatorSum needs at least one qubit");
  }

  OperatorSum(int num_qubits, std::span<const PauliTerm> terms) : OperatorSum(num_qubits) {
    for (const auto& t : terms) add(t);
    canonicalize();
  }

  OperatorSum(int num_qubits, std::initializer_list<PauliTerm> terms)
      : OperatorSum(num_qubits, std::span<const PauliTerm>(terms.begin(), terms.size())) {}

  int num_qubits() const { return n_; }
  const std::vector<PauliTerm>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  /// Adds without dropping small coefficients; call canonicalize() afterwards.
  void add(const PauliTerm& t) {
    if (t.num_qubits() != n_) {
      throw DimensionError("term " + t.word + " does not act on " + std::to_string(n_) + " qubits");
    }
    auto [it, inserted] = index_.try_emplace(t.word, terms_.size());
    if (inserted) {
      terms_.push_back(t);
    } else {
      terms_[it->second].coeff += t.coeff;
    }
  }

  void canonicalize() {
    std::vector<PauliTerm> kept;
    kept.reserve(terms_.size());
    for (auto& t : terms_) {
      if (std::abs(t.coeff) >= kDropTolerance) kept.push_back(std::move(t));
    }
    terms_ = std::move(kept);
    index_.clear();
    for (std::size_t k = 0; k < terms_.size(); ++k) index_.emplace(terms_[k].word, k);
  }

  /// Coefficient of `word`, zero when absent.
  Complex coeff(const std::string& word) const {
    auto it = index_.find(word);
    return it == index_.end() ? Complex{} : terms_[it->second].coeff;
  }

  bool hermitian() const {
    for (const auto& t : terms_) {
      if (std::abs(t.coeff.imag()) > kHermitianTolerance) return false;
    }
    return true;
  }

  /// Maximum coefficient difference against another sum, order-insensitive.
  double distance(const OperatorSum& other) const {
    if (other.n_ != n_) throw DimensionError("distance: qubit counts differ");
    double d = 0.0;
    for (const auto& t : terms_) d = std::max(d, std::abs(t.coeff - other.coeff(t.word)));
    for (const auto& t : other.terms_) d = std::max(d, std::abs(t.coeff - coeff(t.word)));
    return d;
  }

  OperatorSum& operator+=(const OperatorSum& rhs) {
    check_same_n(rhs, "operator+");
    for (const auto& t : rhs.terms_) add(t);
    canonicalize();
    return *this;
  }

  OperatorSum& operator*=(Complex s) {
    for (auto& t : terms_) t.coeff *= s;
    canonicalize();
    return *this;
  }

  friend OperatorSum operator+(OperatorSum a, const OperatorSum& b) { return a += b; }
  friend OperatorSum operator-(OperatorSum a, const OperatorSum& b) {
    a.check_same_n(b, "operator-");
    for (const auto& t : b.terms_) a.add(PauliTerm{t.word, -t.coeff});
    a.canonicalize();
    return a;
  }
  friend OperatorSum operator*(Complex s, OperatorSum a) { return a *= s; }

  friend OperatorSum operator*(const OperatorSum& a, const OperatorSum& b) {
    a.check_same_n(b, "operator*");
    OperatorSum out(a.n_);
    for (const auto& p : a.terms_) {
      for (const auto& q : b.terms_) out.add(pauli_product(p, q));
    }
    out.canonicalize();
    return out;
  }

 private:
  void check_same_n(const OperatorSum& other, const char* op) const {
    if (other.n_ != n_) {
      throw DimensionError(std::string(op) + ": qubit counts " + std::to_string(n_) + " and " +
                           std::to_string(other.n_) + " differ");
    }
  }

  int n_;
  std::vector<PauliTerm> terms_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// [a, b] = ab - ba; empty when the operands commute.
inline OperatorSum commutator(const OperatorSum& a, const OperatorSum& b) {
  if (a.num_qubits() != b.num_qubits()) throw DimensionError("commutator: qubit counts differ");
  OperatorSum out(a.num_qubits());
  // Only anticommuting word pairs survive, each contributing 2*p*q.
  for (const auto& p : a.terms()) {
    for (const auto& q : b.terms()) {
      if (words_commute(p.word, q.word)) continue;
      PauliTerm r = pauli_product(p, q);
      r.coeff *= 2.0;
      out.add(r);
    }
  }
  out.canonicalize();
  return out;
}

inline bool mutually_commuting(std::span<const PauliTerm> terms) {
  for (std::size_t i = 0; i < terms.size(); ++i) {
    for (std::size_t j = i + 1; j < terms.size(); ++j) {
      if (terms[i].word.size() != terms[j].word.size()) {
        throw DimensionError("mutually_commuting: word lengths differ");
      }
      if (!words_commute(terms[i].word, terms[j].word)) return false;
    }
  }
  return true;
}

inline bool mutually_commuting(const OperatorSum& op) { return mutually_commuting(op.terms()); }

/// Explicit 2^n x 2^n matrix.
struct DenseOperator {
  Eigen::MatrixXcd matrix;
  int n = 0;

  std::size_t dim() const { return std::size_t{1} << n; }
};

inline void check_dense_cap(int n, int cap) {
  if (n > cap) {
    throw ResourceError("dense realization of " + std::to_string(n) + " qubits exceeds the cap of " +
                        std::to_string(cap));
  }
}

inline DenseOperator to_dense(const OperatorSum& op, int cap = kDenseQubitCap) {
  const int n = op.num_qubits();
  check_dense_cap(n, cap);
  const std::uint64_t dim = std::uint64_t{1} << n;
  DenseOperator out{Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)), n};
  for (const auto& t : op.terms()) {
    const auto m = PauliMasks::from_word(t.word);
    for (std::uint64_t k = 0; k < dim; ++k) {
      out.matrix(static_cast<Eigen::Index>(k ^ m.x_mask), static_cast<Eigen::Index>(k)) += t.coeff * m.phase(k);
    }
  }
  return out;
}

inline DenseOperator to_dense(const PauliTerm& t, int cap = kDenseQubitCap) {
  return to_dense(OperatorSum(t.num_qubits(), {t}), cap);
}

}  // namespace trotterprof
