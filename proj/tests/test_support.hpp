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

#include <random>
#include <set>
#include <vector>

#include <qhist/properties.hpp>

// Deterministic random generators shared by the test suites. Seeds are
// fixed at each use site so failures reproduce.

namespace qtest {

inline qhist::Matrix random_matrix(std::mt19937& rng, qhist::Index dim) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  qhist::Matrix m(dim, dim);
  for (qhist::Index r = 0; r < dim; ++r)
    for (qhist::Index c = 0; c < dim; ++c)
      m(r, c) = qhist::Complex(dist(rng), dist(rng));
  return m;
}

inline qhist::Operator random_hermitian(std::mt19937& rng, qhist::Index dim) {
  const qhist::Matrix a = random_matrix(rng, dim);
  return qhist::Operator(qhist::Matrix(0.5 * (a + a.adjoint())));
}

inline qhist::Operator random_unitary(std::mt19937& rng, qhist::Index dim) {
  std::uniform_real_distribution<double> dt(0.2, 2.0);
  return qhist::propagator(random_hermitian(rng, dim), dt(rng));
}

inline qhist::Ket random_ket(std::mt19937& rng, qhist::Index dim) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  qhist::Vector v(dim);
  for (qhist::Index i = 0; i < dim; ++i)
    v(i) = qhist::Complex(dist(rng), dist(rng));
  return qhist::Ket(std::move(v)).normalized();
}

/// Columns of the eigenbasis of a random Hermitian matrix.
inline std::vector<qhist::Ket> random_orthonormal_basis(std::mt19937& rng,
                                                        qhist::Index dim) {
  Eigen::SelfAdjointEigenSolver<qhist::Matrix> es(
      random_hermitian(rng, dim).mat());
  std::vector<qhist::Ket> basis;
  basis.reserve(static_cast<std::size_t>(dim));
  for (qhist::Index i = 0; i < dim; ++i)
    basis.emplace_back(qhist::Vector(es.eigenvectors().col(i)));
  return basis;
}

/// Random decomposition of the identity: a random orthonormal basis grouped
/// into 2..max_blocks consecutive blocks.
inline qhist::SampleSpace random_partition_space(std::mt19937& rng,
                                                 qhist::Index dim,
                                                 int max_blocks = 5) {
  const std::vector<qhist::Ket> basis = random_orthonormal_basis(rng, dim);
  const int cap = static_cast<int>(std::min<qhist::Index>(dim, max_blocks));
  std::uniform_int_distribution<int> nblocks(cap >= 2 ? 2 : 1, cap);
  const int blocks = nblocks(rng);

  std::vector<qhist::Index> cut = {0};
  if (blocks > 1) {
    std::uniform_int_distribution<qhist::Index> pick(1, dim - 1);
    std::set<qhist::Index> cuts;
    while (static_cast<int>(cuts.size()) < blocks - 1) cuts.insert(pick(rng));
    cut.insert(cut.end(), cuts.begin(), cuts.end());
  }
  cut.push_back(dim);

  std::vector<qhist::Projector> ps;
  std::vector<std::string> labels;
  for (std::size_t b = 0; b + 1 < cut.size(); ++b) {
    std::vector<qhist::Ket> block(basis.begin() + cut[b],
                                  basis.begin() + cut[b + 1]);
    ps.push_back(qhist::from_kets(block));
    labels.push_back("B" + std::to_string(b));
  }
  return qhist::SampleSpace(std::move(ps), std::move(labels));
}

inline qhist::Ket spin_ket(double a_re, double b_re) {
  qhist::Vector v(2);
  v << qhist::Complex(a_re, 0.0), qhist::Complex(b_re, 0.0);
  return qhist::Ket(std::move(v)).normalized();
}

}  // namespace qtest
