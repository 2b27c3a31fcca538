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

#include <cmath>
#include <utility>

#include "qhist/core.hpp"

// Dense complex kernel: kets, operators, tensor products, adjoints and
// Hamiltonian-generated propagators. Values are immutable once constructed
// and every operation is a pure function, so concurrent reads are safe.

namespace qhist {

class Ket {
 public:
  explicit Ket(Vector amplitudes) : v_(std::move(amplitudes)) {
    if (v_.size() < 1) throw DimensionError("ket: dimension must be >= 1");
  }

  static Ket basis(Index dim, Index i) {
    if (dim < 1) throw DimensionError("ket: dimension must be >= 1");
    if (i < 0 || i >= dim) throw DimensionError("ket: basis index out of range");
    Vector v = Vector::Zero(dim);
    v(i) = Complex(1.0, 0.0);
    return Ket(std::move(v));
  }

  Index dim() const { return v_.size(); }
  const Vector& vec() const { return v_; }
  Complex amp(Index i) const { return v_(i); }

  double norm() const { return v_.norm(); }

  bool is_normalized(double eps = Tolerances{}.norm) const {
    return std::abs(v_.squaredNorm() - 1.0) <= eps;
  }

  Ket normalized(double eps = Tolerances{}.norm) const {
    const double n = v_.norm();
    if (n <= eps) throw ValidationError("ket: cannot normalize a zero vector");
    return Ket(v_ / n);
  }

 private:
  Vector v_;
};

inline Ket operator+(const Ket& a, const Ket& b) {
  if (a.dim() != b.dim()) throw DimensionError("ket: dimension mismatch in +");
  return Ket(a.vec() + b.vec());
}

inline Ket operator-(const Ket& a, const Ket& b) {
  if (a.dim() != b.dim()) throw DimensionError("ket: dimension mismatch in -");
  return Ket(a.vec() - b.vec());
}

inline Ket operator*(Complex c, const Ket& k) { return Ket(c * k.vec()); }

/// <a|b> with the first argument conjugated.
inline Complex inner(const Ket& a, const Ket& b) {
  if (a.dim() != b.dim()) throw DimensionError("inner: dimension mismatch");
  return a.vec().dot(b.vec());
}

class Operator {
 public:
  explicit Operator(Matrix entries) : m_(std::move(entries)) {
    if (m_.rows() < 1 || m_.rows() != m_.cols())
      throw DimensionError("operator: matrix must be square, dimension >= 1");
  }

  static Operator identity(Index dim) {
    return Operator(Matrix::Identity(dim, dim));
  }
  static Operator zero(Index dim) { return Operator(Matrix::Zero(dim, dim)); }

  Index dim() const { return m_.rows(); }
  const Matrix& mat() const { return m_; }
  Complex trace() const { return m_.trace(); }

  bool is_unitary(double eps = Tolerances{}.unitary) const {
    return max_abs(Matrix(m_.adjoint() * m_) -
                   Matrix::Identity(dim(), dim())) <= eps;
  }

  bool is_hermitian(double eps = Tolerances{}.hermitian) const {
    return max_abs(Matrix(m_ - m_.adjoint())) <= eps;
  }

 private:
  Matrix m_;
};

inline Operator operator*(const Operator& a, const Operator& b) {
  if (a.dim() != b.dim()) throw DimensionError("operator: dimension mismatch in *");
  return Operator(a.mat() * b.mat());
}

inline Operator operator+(const Operator& a, const Operator& b) {
  if (a.dim() != b.dim()) throw DimensionError("operator: dimension mismatch in +");
  return Operator(a.mat() + b.mat());
}

inline Operator operator-(const Operator& a, const Operator& b) {
  if (a.dim() != b.dim()) throw DimensionError("operator: dimension mismatch in -");
  return Operator(a.mat() - b.mat());
}

inline Operator operator*(Complex c, const Operator& a) {
  return Operator(c * a.mat());
}

inline Operator adjoint(const Operator& a) { return Operator(a.mat().adjoint()); }

/// |a><b|
inline Operator outer(const Ket& a, const Ket& b) {
  if (a.dim() != b.dim()) throw DimensionError("outer: dimension mismatch");
  return Operator(a.vec() * b.vec().adjoint());
}

/// a^exponent by repeated squaring, exponent >= 0.
inline Operator power(const Operator& a, int exponent) {
  if (exponent < 0) throw ValidationError("power: exponent must be >= 0");
  Matrix acc = Matrix::Identity(a.dim(), a.dim());
  Matrix base = a.mat();
  int n = exponent;
  while (n > 0) {
    if (n & 1) acc = Matrix(acc * base);
    n >>= 1;
    if (n > 0) base = Matrix(base * base);
  }
  return Operator(std::move(acc));
}

/// Kronecker product with the first factor slow: index (i, j) of the pair
/// maps to i * dim(b) + j.
inline Ket tensor_product(const Ket& a, const Ket& b) {
  Vector out(a.dim() * b.dim());
  for (Index i = 0; i < a.dim(); ++i)
    out.segment(i * b.dim(), b.dim()) = a.amp(i) * b.vec();
  return Ket(std::move(out));
}

inline Operator tensor_product(const Operator& a, const Operator& b) {
  const Index da = a.dim();
  const Index db = b.dim();
  Matrix out(da * db, da * db);
  for (Index i = 0; i < da; ++i)
    for (Index j = 0; j < da; ++j)
      out.block(i * db, j * db, db, db) = a.mat()(i, j) * b.mat();
  return Operator(std::move(out));
}

/// exp(-i dt h) for a Hermitian generator h, via eigendecomposition.
inline Operator propagator(const Operator& h, double dt,
                           const Tolerances& tol = {}) {
  if (!h.is_hermitian(tol.hermitian))
    throw ValidationError("propagator: generator is not Hermitian within tolerance");
  Eigen::SelfAdjointEigenSolver<Matrix> es(h.mat());
  if (es.info() != Eigen::Success)
    throw Error("propagator: eigendecomposition failed");
  Vector phases(h.dim());
  for (Index i = 0; i < h.dim(); ++i)
    phases(i) = std::exp(Complex(0.0, -dt * es.eigenvalues()(i)));
  return Operator(es.eigenvectors() * phases.asDiagonal() *
                  es.eigenvectors().adjoint());
}

inline Ket apply(const Operator& u, const Ket& k) {
  if (u.dim() != k.dim()) throw DimensionError("apply: dimension mismatch");
  return Ket(u.mat() * k.vec());
}

}  // namespace qhist
