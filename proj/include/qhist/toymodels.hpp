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

#include <string>
#include <utility>

#include "qhist/histories.hpp"

// Discrete hopping models on a ring of sites m = -M..M with one time step
// per clock tick. The plain shift moves every site one step to the right
// (wrapping at the edge); the decay variant replaces the two columns at
// m = 0 and m = -1 by a rotation, so an initial |m=0> leaks amplitude onto
// the outgoing track with amplitude beta per step while staying put with
// amplitude alpha. A second ring of pointer sites n = -N..N acts as a
// detector: its shift holds n = 0 fixed, and a trigger swap kicks the
// pointer from n = 0 to n = 1 whenever the particle passes the trigger
// site, after which the pointer free-runs.

namespace qhist {

struct ToyLattice {
  ToyLattice(int half_width_in, Complex alpha_in, Complex beta_in,
             const Tolerances& tol = {})
      : half_width(half_width_in), alpha(alpha_in), beta(beta_in) {
    if (half_width < 1)
      throw ValidationError("lattice: half-width must be >= 1");
    if (std::abs(std::norm(alpha) + std::norm(beta) - 1.0) > tol.norm)
      throw ValidationError(
          "lattice: |alpha|^2 + |beta|^2 must equal 1 within tolerance");
  }

  Index dim() const { return 2 * half_width + 1; }

  Index index_of(int m) const {
    if (m < -half_width || m > half_width)
      throw DimensionError("lattice: site out of range");
    return m + half_width;
  }

  int site_of(Index i) const { return static_cast<int>(i) - half_width; }

  static std::string label_of(int m) { return "m=" + std::to_string(m); }

  int half_width;
  Complex alpha;
  Complex beta;
};

struct ToyDetector {
  explicit ToyDetector(int half_width_in, int trigger_site_in = 2)
      : half_width(half_width_in), trigger_site(trigger_site_in) {
    if (half_width < 1)
      throw ValidationError("detector: half-width must be >= 1");
  }

  Index dim() const { return 2 * half_width + 1; }

  Index index_of(int n) const {
    if (n < -half_width || n > half_width)
      throw DimensionError("detector: pointer position out of range");
    return n + half_width;
  }

  int pointer_of(Index i) const { return static_cast<int>(i) - half_width; }

  static std::string label_of(int n) { return "n=" + std::to_string(n); }

  int half_width;
  int trigger_site;
};

/// Plain cyclic shift: |m> -> |m+1>, wrapping |M> -> |-M>.
inline Operator shift_operator(int half_width) {
  if (half_width < 1) throw ValidationError("shift: half-width must be >= 1");
  const Index d = 2 * half_width + 1;
  Matrix s = Matrix::Zero(d, d);
  for (Index i = 0; i < d; ++i) s((i + 1) % d, i) = Complex(1.0, 0.0);
  return Operator(std::move(s));
}

/// Shift with a decay rotation in the {|0>, |1>} block:
///   |0>  -> alpha |0> + beta |1>
///   |-1> -> -conj(beta) |0> + conj(alpha) |1>
/// and |m> -> |m+1> elsewhere (wrapping at the edge). Unitary for any
/// normalized (alpha, beta).
inline Operator decay_operator(const ToyLattice& lat) {
  Matrix s = shift_operator(lat.half_width).mat();
  const Index c0 = lat.index_of(0);
  const Index cm1 = lat.index_of(-1);
  const Index r0 = lat.index_of(0);
  const Index r1 = lat.index_of(1);
  s.col(c0).setZero();
  s.col(cm1).setZero();
  s(r0, c0) = lat.alpha;
  s(r1, c0) = lat.beta;
  s(r0, cm1) = -std::conj(lat.beta);
  s(r1, cm1) = std::conj(lat.alpha);
  return Operator(std::move(s));
}

/// Pointer shift: |n> -> |n+1> except |0> -> |0> and |-1> -> |1>, wrapping
/// |N> -> |-N>. A permutation, hence unitary.
inline Operator detector_shift(const ToyDetector& det) {
  const Index d = det.dim();
  Matrix s = Matrix::Zero(d, d);
  for (int n = -det.half_width; n <= det.half_width; ++n) {
    int target;
    if (n == 0)
      target = 0;
    else if (n == -1)
      target = 1;
    else if (n == det.half_width)
      target = -det.half_width;
    else
      target = n + 1;
    s(det.index_of(target), det.index_of(n)) = Complex(1.0, 0.0);
  }
  return Operator(std::move(s));
}

/// Flat index of |m> (x) |n| with the particle factor slow.
inline Index product_index(const ToyLattice& lat, const ToyDetector& det,
                           int m, int n) {
  return lat.index_of(m) * det.dim() + det.index_of(n);
}

inline std::string product_label(int m, int n) {
  return ToyLattice::label_of(m) + "," + ToyDetector::label_of(n);
}

inline Ket lattice_state(const ToyLattice& lat, int m) {
  return Ket::basis(lat.dim(), lat.index_of(m));
}

inline Ket coupled_state(const ToyLattice& lat, const ToyDetector& det, int m,
                         int n) {
  return Ket::basis(lat.dim() * det.dim(), product_index(lat, det, m, n));
}

/// One step of the coupled particle+pointer dynamics. Acting right to left:
/// first the pointer shift, then the trigger swap exchanging
/// |trigger_site> (x) |0>  <->  |trigger_site> (x) |1>, then the particle
/// decay shift.
inline Operator coupled_step(const ToyLattice& lat, const ToyDetector& det) {
  if (det.trigger_site < -lat.half_width || det.trigger_site > lat.half_width)
    throw ValidationError("coupled step: trigger site lies outside the lattice");
  const Index d = lat.dim() * det.dim();
  Matrix r = Matrix::Identity(d, d);
  const Index x = product_index(lat, det, det.trigger_site, 0);
  const Index y = product_index(lat, det, det.trigger_site, 1);
  r(x, x) = 0;
  r(y, y) = 0;
  r(x, y) = 1;
  r(y, x) = 1;
  const Operator s_particle =
      tensor_product(decay_operator(lat), Operator::identity(det.dim()));
  const Operator s_pointer =
      tensor_product(Operator::identity(lat.dim()), detector_shift(det));
  return Operator(Matrix(s_particle.mat() * r * s_pointer.mat()));
}

/// Probability table Pr(m, n) after t steps from |m=0> (x) |n=0|, defined
/// while the wavefront stays clear of both wrap-around boundaries.
class JointDistribution {
 public:
  JointDistribution(ToyLattice lat, ToyDetector det, int t,
                    Eigen::MatrixXd table, double prob_eps)
      : lat_(std::move(lat)),
        det_(std::move(det)),
        t_(t),
        table_(std::move(table)),
        prob_eps_(prob_eps) {}

  int time() const { return t_; }
  const ToyLattice& lattice() const { return lat_; }
  const ToyDetector& detector() const { return det_; }
  const Eigen::MatrixXd& table() const { return table_; }

  double pr(int m, int n) const {
    return table_(lat_.index_of(m), det_.index_of(n));
  }

  double pr_pointer(int n) const { return table_.col(det_.index_of(n)).sum(); }

  double pr_particle(int m) const { return table_.row(lat_.index_of(m)).sum(); }

  /// Pr(particle at m | pointer at n).
  double conditional_particle(int m, int n) const {
    const double pn = pr_pointer(n);
    if (pn <= prob_eps_)
      throw NullConditioningError(
          "pointer position " + ToyDetector::label_of(n) +
          " has probability zero within tolerance");
    return pr(m, n) / pn;
  }

  double total() const { return table_.sum(); }

 private:
  ToyLattice lat_;
  ToyDetector det_;
  int t_;
  Eigen::MatrixXd table_;
  double prob_eps_;
};

inline JointDistribution joint_distribution(const ToyLattice& lat,
                                            const ToyDetector& det, int t,
                                            const Tolerances& tol = {}) {
  if (t < 3 || t >= lat.half_width - 1 || t - 2 >= det.half_width)
    throw ValidationError(
        "joint distribution: requires 3 <= t < M-1 and t-2 < N so that "
        "neither ring wraps");
  const Operator step = coupled_step(lat, det);
  Vector v = coupled_state(lat, det, 0, 0).vec();
  for (int i = 0; i < t; ++i) v = step.mat() * v;
  Eigen::MatrixXd table(lat.dim(), det.dim());
  for (Index i = 0; i < v.size(); ++i)
    table(i / det.dim(), i % det.dim()) = std::norm(v(i));
  return JointDistribution(lat, det, t, std::move(table), tol.probability);
}

}  // namespace qhist
