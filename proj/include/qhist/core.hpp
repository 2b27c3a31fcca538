// Copyright 2026 The qhist Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qhist {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

/// Absolute tolerances used throughout the library. Unless stated otherwise
/// a matrix check bounds the elementwise max norm. The defaults leave ample
/// headroom in double precision at the dimensions this library targets
/// (dense matrices up to a few hundred rows).
struct Tolerances {
  double norm = 1e-10;         ///< | <psi|psi> - 1 | for normalized states
  double unitary = 1e-10;      ///< || U'U - I ||_max
  double hermitian = 1e-10;    ///< || A - A' ||_max
  double projector = 1e-10;    ///< idempotence, orthogonality, exhaustiveness
  double consistency = 1e-8;   ///< decoherence-matrix off-diagonal bound
  double probability = 1e-9;   ///< probability sums, clamping, conditioning

  /// One epsilon for every knob (what the CLI's --tol flag does).
  static Tolerances uniform(double eps) {
    return Tolerances{eps, eps, eps, eps, eps, eps};
  }
};

/// Largest entry magnitude of any dense matrix or vector expression.
template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.derived().cwiseAbs().maxCoeff();
}

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not line up (vector lengths, matrix dimensions).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An input fails one of its declared invariants (normalization, unitarity,
/// idempotence, branch completeness, out-of-range parameters, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A model file is not syntactically or structurally well formed.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Conditioning on an event whose probability is zero within tolerance.
class NullConditioningError : public Error {
 public:
  using Error::Error;
};

/// Two projectors (or whole frameworks) do not commute, so combining them
/// is meaningless. When the clash is tied to a family time grid, time()
/// reports the offending slot (1-based); otherwise it is 0.
class IncompatibilityError : public Error {
 public:
  explicit IncompatibilityError(const std::string& message)
      : Error(message), time_(0) {}

  IncompatibilityError(std::string first, std::string second, int time)
      : Error(describe(first, second, time)),
        first_(std::move(first)),
        second_(std::move(second)),
        time_(time) {}

  const std::string& first() const { return first_; }
  const std::string& second() const { return second_; }
  int time() const { return time_; }

 private:
  static std::string describe(const std::string& a, const std::string& b,
                              int time) {
    std::string s = "meaningless combination: projectors '" + a + "' and '" +
                    b + "' do not commute";
    if (time > 0) s += " at t" + std::to_string(time);
    return s;
  }

  std::string first_;
  std::string second_;
  int time_ = 0;
};

}  // namespace qhist
