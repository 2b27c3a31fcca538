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

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qhist/linalg.hpp"

// Physical properties as orthogonal projectors, exhaustive families of
// mutually exclusive alternatives (sample spaces), and the probability
// assignment for a single later time. Negation of a property P is I - P;
// two properties can only be combined when their projectors commute.

namespace qhist {

namespace detail {

/// True when ||P Q||_max <= eps for Hermitian projectors P, Q. Uses the
/// identity tr(PQ) = ||PQ||_F^2, so a cheap trace screen settles nearly
/// every pair before falling back to the full product.
inline bool orthogonal_projectors(const Matrix& p, const Matrix& q,
                                  double eps) {
  const double overlap = ((p.array() * q.transpose().array()).sum()).real();
  if (overlap <= eps * eps) return true;
  return max_abs(Matrix(p * q)) <= eps;
}

inline double clamp_probability(double p, double eps) {
  if (p < -eps || p > 1.0 + eps)
    throw ValidationError("probability " + std::to_string(p) +
                          " escapes [0, 1] beyond tolerance");
  return std::min(1.0, std::max(0.0, p));
}

}  // namespace detail

/// A quantum property: Hermitian, idempotent, with integer rank tr(P).
class Projector {
 public:
  explicit Projector(Operator op, const Tolerances& tol = {})
      : op_(std::move(op)) {
    if (!op_.is_hermitian(tol.hermitian))
      throw ValidationError("projector: matrix is not Hermitian within tolerance");
    if (max_abs(Matrix(op_.mat() * op_.mat() - op_.mat())) > tol.projector)
      throw ValidationError("projector: matrix is not idempotent within tolerance");
    const Complex tr = op_.trace();
    rank_ = static_cast<int>(std::lround(tr.real()));
    if (rank_ < 0 || std::abs(tr.real() - rank_) > tol.projector ||
        std::abs(tr.imag()) > tol.projector)
      throw ValidationError("projector: trace is not a nonnegative integer");
  }

  static Projector identity(Index dim) { return Projector(Operator::identity(dim)); }
  static Projector zero(Index dim) { return Projector(Operator::zero(dim)); }

  const Operator& op() const { return op_; }
  const Matrix& mat() const { return op_.mat(); }
  Index dim() const { return op_.dim(); }
  int rank() const { return rank_; }

 private:
  Operator op_;
  int rank_ = 0;
};

/// Rank-1 projector |k><k| / <k|k> onto the ray of k.
inline Projector from_ket(const Ket& k, const Tolerances& tol = {}) {
  const double n2 = k.vec().squaredNorm();
  if (std::sqrt(n2) <= tol.norm)
    throw ValidationError("from_ket: cannot project onto a zero vector");
  return Projector(Operator(Matrix(k.vec() * k.vec().adjoint() / n2)), tol);
}

/// Projector onto the span of an orthonormal set of kets.
inline Projector from_kets(const std::vector<Ket>& kets,
                           const Tolerances& tol = {}) {
  if (kets.empty()) throw ValidationError("from_kets: empty set");
  Matrix sum = Matrix::Zero(kets.front().dim(), kets.front().dim());
  for (const Ket& k : kets) {
    if (k.dim() != kets.front().dim())
      throw DimensionError("from_kets: dimension mismatch");
    sum += k.vec() * k.vec().adjoint();
  }
  return Projector(Operator(std::move(sum)), tol);
}

/// The negated property "not P", i.e. I - P.
inline Projector negation(const Projector& p) {
  return Projector(Operator(Matrix(Matrix::Identity(p.dim(), p.dim()) - p.mat())));
}

/// Two properties can be combined in a single description iff they commute.
inline bool compatible(const Projector& p, const Projector& q,
                       const Tolerances& tol = {}) {
  if (p.dim() != q.dim()) throw DimensionError("compatible: dimension mismatch");
  return max_abs(Matrix(p.mat() * q.mat() - q.mat() * p.mat())) <= tol.projector;
}

/// "P and Q" for commuting projectors; meaningless otherwise.
inline Projector conjunction(const Projector& p, const Projector& q,
                             const Tolerances& tol = {}) {
  if (p.dim() != q.dim()) throw DimensionError("conjunction: dimension mismatch");
  if (!compatible(p, q, tol))
    throw IncompatibilityError(
        "meaningless combination: conjunction of noncommuting projectors");
  return Projector(Operator(Matrix(p.mat() * q.mat())), tol);
}

/// A decomposition of the identity: mutually exclusive projectors that sum
/// to I, each carrying a distinct label.
class SampleSpace {
 public:
  SampleSpace(std::vector<Projector> projectors, std::vector<std::string> labels,
              const Tolerances& tol = {})
      : projectors_(std::move(projectors)), labels_(std::move(labels)) {
    if (projectors_.empty())
      throw ValidationError("sample space: needs at least one projector");
    if (labels_.size() != projectors_.size())
      throw ValidationError("sample space: one label per projector required");
    const Index d = projectors_.front().dim();
    for (const Projector& p : projectors_)
      if (p.dim() != d) throw DimensionError("sample space: dimension mismatch");
    std::set<std::string> seen;
    for (const std::string& l : labels_)
      if (l.empty() || !seen.insert(l).second)
        throw ValidationError("sample space: labels must be nonempty and distinct");
    for (std::size_t j = 0; j < projectors_.size(); ++j)
      for (std::size_t k = j + 1; k < projectors_.size(); ++k)
        if (!detail::orthogonal_projectors(projectors_[j].mat(),
                                           projectors_[k].mat(), tol.projector))
          throw ValidationError("sample space: '" + labels_[j] + "' and '" +
                                labels_[k] + "' are not mutually exclusive");
    Matrix sum = Matrix::Zero(d, d);
    for (const Projector& p : projectors_) sum += p.mat();
    if (max_abs(Matrix(sum - Matrix::Identity(d, d))) > tol.projector)
      throw ValidationError("sample space: projectors do not sum to the identity");
  }

  /// Rank-1 decomposition from an orthonormal basis.
  static SampleSpace from_kets(const std::vector<Ket>& basis,
                               const std::vector<std::string>& labels,
                               const Tolerances& tol = {}) {
    std::vector<Projector> ps;
    ps.reserve(basis.size());
    for (const Ket& k : basis) ps.push_back(from_ket(k, tol));
    return SampleSpace(std::move(ps), labels, tol);
  }

  Index dim() const { return projectors_.front().dim(); }
  std::size_t size() const { return projectors_.size(); }
  const Projector& projector(std::size_t j) const { return projectors_[j]; }
  const std::string& label(std::size_t j) const { return labels_[j]; }
  const std::vector<Projector>& projectors() const { return projectors_; }
  const std::vector<std::string>& labels() const { return labels_; }

 private:
  std::vector<Projector> projectors_;
  std::vector<std::string> labels_;
};

/// Common refinement of two compatible sample spaces: all nonzero products
/// P_j Q_k. Every projector of a must commute with every projector of b.
inline SampleSpace refine(const SampleSpace& a, const SampleSpace& b,
                          const Tolerances& tol = {}) {
  if (a.dim() != b.dim()) throw DimensionError("refine: dimension mismatch");
  for (std::size_t j = 0; j < a.size(); ++j)
    for (std::size_t k = 0; k < b.size(); ++k)
      if (!compatible(a.projector(j), b.projector(k), tol))
        throw IncompatibilityError(a.label(j), b.label(k), 0);
  std::vector<Projector> ps;
  std::vector<std::string> ls;
  for (std::size_t j = 0; j < a.size(); ++j) {
    for (std::size_t k = 0; k < b.size(); ++k) {
      if (detail::orthogonal_projectors(a.projector(j).mat(),
                                        b.projector(k).mat(), tol.projector))
        continue;  // impossible joint alternative, dropped
      ps.push_back(Projector(
          Operator(Matrix(a.projector(j).mat() * b.projector(k).mat())), tol));
      ls.push_back(a.label(j) == b.label(k) ? a.label(j)
                                            : a.label(j) + "*" + b.label(k));
    }
  }
  return SampleSpace(std::move(ps), std::move(ls), tol);
}

/// Single-time probability assignment: Pr(P_j) = <psi0| u' P_j u |psi0>.
/// Values are clamped to [0, 1]; escapes beyond tol.probability are errors.
inline std::vector<double> born(const Ket& psi0, const Operator& u,
                                const SampleSpace& space,
                                const Tolerances& tol = {}) {
  if (psi0.dim() != u.dim() || u.dim() != space.dim())
    throw DimensionError("born: dimension mismatch");
  if (!psi0.is_normalized(tol.norm))
    throw ValidationError("born: initial state is not normalized");
  if (!u.is_unitary(tol.unitary))
    throw ValidationError("born: time development operator is not unitary");
  const Vector evolved = u.mat() * psi0.vec();
  std::vector<double> out;
  out.reserve(space.size());
  for (std::size_t j = 0; j < space.size(); ++j) {
    const double pr = evolved.dot(space.projector(j).mat() * evolved).real();
    out.push_back(detail::clamp_probability(pr, tol.probability));
  }
  return out;
}

}  // namespace qhist
