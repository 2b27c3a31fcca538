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
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "qhist/histories.hpp"

// A beam-splitting magnet followed by a pair of detectors, on a small
// discrete Hilbert space: spin-1/2 (z+, z-), four beam locations (the
// source p0, the magnet entrance p1, the upper exit u, the lower exit l)
// and a three-state detector pair (ready, U fired, L fired). Three unitary
// steps: step1 transports the packet from p0 to p1; step2 splits it,
// sending z+ up and z- down; step3 fires the detector that sits on the
// occupied exit beam. Each step is completed to a full permutation by the
// inverse moves on otherwise unreachable basis states, which keeps it
// unitary without touching the physical sector.

namespace qhist {

struct SGModel {
  static constexpr int kSpinDim = 2;
  static constexpr int kPathDim = 4;
  static constexpr int kDetectorDim = 3;
  static constexpr Index kDim = kSpinDim * kPathDim * kDetectorDim;

  // path: 0 = p0, 1 = p1, 2 = u, 3 = l; detector: 0 = ready, 1 = U, 2 = L
  static Index flat(int spin, int path, int detector) {
    return (static_cast<Index>(spin) * kPathDim + path) * kDetectorDim +
           detector;
  }

  static std::string basis_label(Index i) {
    static const char* kSpin[] = {"z+", "z-"};
    static const char* kPath[] = {"p0", "p1", "u", "l"};
    static const char* kDet[] = {"ready", "U", "L"};
    const int det = static_cast<int>(i % kDetectorDim);
    const int path = static_cast<int>((i / kDetectorDim) % kPathDim);
    const int spin = static_cast<int>(i / (kDetectorDim * kPathDim));
    return std::string(kSpin[spin]) + "|" + kPath[path] + "|" + kDet[det];
  }

  const Projector& projector(const std::string& name) const {
    auto it = projectors.find(name);
    if (it == projectors.end())
      throw ValidationError("no projector named '" + name + "'");
    return it->second;
  }

  Operator step1 = Operator::identity(kDim);
  Operator step2 = Operator::identity(kDim);
  Operator step3 = Operator::identity(kDim);
  Ket initial = Ket::basis(kDim, 0);
  std::map<std::string, Projector> projectors;
};

namespace detail {

inline Operator sg_permutation(
    const std::function<void(int, int&, int&)>& move_for_spin) {
  Matrix m = Matrix::Zero(SGModel::kDim, SGModel::kDim);
  for (int s = 0; s < SGModel::kSpinDim; ++s) {
    for (int p = 0; p < SGModel::kPathDim; ++p) {
      for (int d = 0; d < SGModel::kDetectorDim; ++d) {
        int tp = p;
        int td = d;
        move_for_spin(s, tp, td);
        m(SGModel::flat(s, tp, td), SGModel::flat(s, p, d)) = Complex(1.0, 0.0);
      }
    }
  }
  return Operator(std::move(m));
}

}  // namespace detail

inline SGModel build_sg_model(const Tolerances& tol = {}) {
  SGModel m;

  // step1: p0 <-> p1, spin and detector untouched
  m.step1 = detail::sg_permutation([](int, int& p, int&) {
    if (p == 0)
      p = 1;
    else if (p == 1)
      p = 0;
  });

  // step2: the split; z+ swaps p1 <-> u, z- swaps p1 <-> l
  m.step2 = detail::sg_permutation([](int s, int& p, int&) {
    const int exit = s == 0 ? 2 : 3;
    if (p == 1)
      p = exit;
    else if (p == exit)
      p = 1;
  });

  // step3: detectors fire; on beam u swap ready <-> U, on beam l ready <-> L
  m.step3 = detail::sg_permutation([](int, int& p, int& d) {
    if (p == 2) {
      if (d == 0)
        d = 1;
      else if (d == 1)
        d = 0;
    } else if (p == 3) {
      if (d == 0)
        d = 2;
      else if (d == 2)
        d = 0;
    }
  });

  const double r = 1.0 / std::sqrt(2.0);
  const Ket zplus = Ket::basis(2, 0);
  const Ket zminus = Ket::basis(2, 1);
  const Ket xplus = Ket(Vector{{Complex(r, 0), Complex(r, 0)}});
  const Ket xminus = Ket(Vector{{Complex(r, 0), Complex(-r, 0)}});

  m.initial = tensor_product(tensor_product(xplus, Ket::basis(4, 0)),
                             Ket::basis(3, 0));

  const Operator ipath = Operator::identity(SGModel::kPathDim);
  const Operator idet = Operator::identity(SGModel::kDetectorDim);
  const Operator ispin = Operator::identity(SGModel::kSpinDim);

  auto spin_projector = [&](const Ket& s) {
    return Projector(tensor_product(tensor_product(outer(s, s), ipath), idet),
                     tol);
  };
  auto path_projector = [&](int p) {
    const Ket kp = Ket::basis(SGModel::kPathDim, p);
    return Projector(tensor_product(tensor_product(ispin, outer(kp, kp)), idet),
                     tol);
  };
  auto det_projector = [&](int d) {
    const Ket kd = Ket::basis(SGModel::kDetectorDim, d);
    return Projector(tensor_product(tensor_product(ispin, ipath), outer(kd, kd)),
                     tol);
  };

  m.projectors.insert({"x+", spin_projector(xplus)});
  m.projectors.insert({"x-", spin_projector(xminus)});
  m.projectors.insert({"z+", spin_projector(zplus)});
  m.projectors.insert({"z-", spin_projector(zminus)});
  m.projectors.insert({"u", path_projector(2)});
  m.projectors.insert({"l", path_projector(3)});
  m.projectors.insert({"U", det_projector(1)});
  m.projectors.insert({"L", det_projector(2)});
  // the coherent superposition the split actually produces at t2
  m.projectors.insert(
      {"c", from_ket(apply(m.step2, apply(m.step1, m.initial)), tol)});
  m.projectors.insert({"I", Projector::identity(SGModel::kDim)});

  return m;
}

namespace detail {

inline HistoryFamily sg_build_family(
    const SGModel& m,
    const std::vector<std::vector<std::pair<int, std::string>>>& histories,
    const Tolerances& tol) {
  std::vector<History> hs;
  hs.reserve(histories.size());
  for (const auto& events : histories) {
    std::vector<HistoryEvent> evs;
    evs.reserve(events.size());
    for (const auto& [t, name] : events)
      evs.push_back({t, name, m.projector(name)});
    hs.emplace_back(m.initial, std::move(evs));
  }
  HistoryFamily f(m.initial, {m.step1, m.step2, m.step3}, std::move(hs), tol);
  ConsistencyReport r = check_consistency(f, DecoherenceCondition::medium, tol);
  if (!r.consistent) throw ConsistencyError(std::move(r));
  return f;
}

}  // namespace detail

/// The four standard families over the grid t1, t2, t3:
///   Fa: beam location at t2, detector outcome at t3
///   Fb: the coherent superposition c at t2, detector outcome at t3
///   Fc: spin z at t1, beam location at t2, detector outcome at t3
///   Fd: spin x+ at t1, detector outcome at t3
inline HistoryFamily sg_family(const SGModel& m, const std::string& name,
                               const Tolerances& tol = {}) {
  if (name == "Fa")
    return detail::sg_build_family(
        m, {{{2, "u"}, {3, "U"}}, {{2, "l"}, {3, "L"}}}, tol);
  if (name == "Fb")
    return detail::sg_build_family(
        m, {{{2, "c"}, {3, "U"}}, {{2, "c"}, {3, "L"}}}, tol);
  if (name == "Fc")
    return detail::sg_build_family(
        m, {{{1, "z+"}, {2, "u"}, {3, "U"}}, {{1, "z-"}, {2, "l"}, {3, "L"}}},
        tol);
  if (name == "Fd")
    return detail::sg_build_family(
        m, {{{1, "x+"}, {3, "U"}}, {{1, "x+"}, {3, "L"}}}, tol);
  throw ValidationError("unknown family '" + name +
                        "' (expected Fa, Fb, Fc or Fd)");
}

/// Variants that tighten or loosen the t2 slot:
///   Fd_prime: Fd with the beam location pinned at t2
///   Fc_prime: Fc with the t2 slot left unconstrained
inline HistoryFamily sg_family_variant(const SGModel& m,
                                       const std::string& name,
                                       const Tolerances& tol = {}) {
  if (name == "Fd_prime")
    return detail::sg_build_family(
        m,
        {{{1, "x+"}, {2, "u"}, {3, "U"}}, {{1, "x+"}, {2, "l"}, {3, "L"}}},
        tol);
  if (name == "Fc_prime")
    return detail::sg_build_family(
        m, {{{1, "z+"}, {3, "U"}}, {{1, "z-"}, {3, "L"}}}, tol);
  throw ValidationError("unknown family variant '" + name +
                        "' (expected Fd_prime or Fc_prime)");
}

inline const std::vector<std::string>& sg_family_names() {
  static const std::vector<std::string> names = {"Fa", "Fb", "Fc",
                                                 "Fd", "Fc_prime", "Fd_prime"};
  return names;
}

/// Dispatch across sg_family and sg_family_variant by name.
inline HistoryFamily sg_family_by_name(const SGModel& m, const std::string& name,
                                       const Tolerances& tol = {}) {
  if (name == "Fc_prime" || name == "Fd_prime")
    return sg_family_variant(m, name, tol);
  return sg_family(m, name, tol);
}

}  // namespace qhist
