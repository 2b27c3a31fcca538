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

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qhist/properties.hpp"

// Families of histories over a shared time grid. A history asserts one
// projector per constrained time slot; unconstrained slots count as the
// identity. The family is stored branch-style: histories that agree on
// their first k events share a branch, and at every branch point the
// alternatives must be mutually exclusive and exhaustive on the unitarily
// evolved branch state. Probabilities only make sense once the family's
// decoherence matrix is diagonal within tolerance.

namespace qhist {

/// One asserted alternative: at grid slot `time` (1-based) the property
/// named `label` with projector `projector` holds.
struct HistoryEvent {
  int time;
  std::string label;
  Projector projector;
};

class History {
 public:
  History(Ket initial, std::vector<HistoryEvent> events, std::string label = "")
      : initial_(std::move(initial)),
        events_(std::move(events)),
        label_(std::move(label)) {
    int prev = 0;
    for (const HistoryEvent& e : events_) {
      if (e.time <= prev)
        throw ValidationError("history: event times must be strictly increasing, >= 1");
      if (e.projector.dim() != initial_.dim())
        throw DimensionError("history: projector dimension differs from the state");
      if (e.label.empty()) throw ValidationError("history: events need a label");
      prev = e.time;
    }
    if (label_.empty()) label_ = default_label(events_);
  }

  const Ket& initial() const { return initial_; }
  const std::vector<HistoryEvent>& events() const { return events_; }
  const std::string& label() const { return label_; }

  static std::string default_label(const std::vector<HistoryEvent>& events) {
    if (events.empty()) return "I";
    std::string s;
    for (const HistoryEvent& e : events) {
      if (!s.empty()) s += ",";
      s += e.label + "@t" + std::to_string(e.time);
    }
    return s;
  }

 private:
  Ket initial_;
  std::vector<HistoryEvent> events_;
  std::string label_;
};

enum class DecoherenceCondition {
  medium,  ///< off-diagonal |D(a,b)| must vanish (the default)
  weak     ///< only Re D(a,b) must vanish (opt-in)
};

inline std::string to_string(DecoherenceCondition c) {
  return c == DecoherenceCondition::medium ? "medium" : "weak";
}

struct ConsistencyReport {
  bool consistent = true;
  DecoherenceCondition condition = DecoherenceCondition::medium;
  double tolerance = 0.0;
  double worst = 0.0;  ///< largest off-diagonal magnitude (or |real part|)
  std::size_t row = 0;
  std::size_t col = 0;
  std::string row_label;
  std::string col_label;
};

class ConsistencyError : public Error {
 public:
  explicit ConsistencyError(ConsistencyReport report)
      : Error(describe(report)), report_(std::move(report)) {}

  const ConsistencyReport& report() const { return report_; }

 private:
  static std::string describe(const ConsistencyReport& r) {
    return "family is not consistent: worst off-diagonal " +
           std::to_string(r.worst) + " between '" + r.row_label + "' and '" +
           r.col_label + "' exceeds " + std::to_string(r.tolerance) + " (" +
           to_string(r.condition) + " condition)";
  }

  ConsistencyReport report_;
};

/// Gram matrix of chain operators: entries(a, b) = tr(K(a)' K(b)).
struct DecoherenceMatrix {
  Matrix entries;
  std::vector<std::string> labels;
};

class HistoryFamily {
 public:
  HistoryFamily(Ket initial, std::vector<Operator> propagators,
                std::vector<History> histories, const Tolerances& tol = {})
      : initial_(std::move(initial)),
        propagators_(std::move(propagators)),
        histories_(std::move(histories)),
        tol_(tol) {
    validate_inputs();
    validate_branches_and_chain();
  }

  Index dim() const { return initial_.dim(); }
  int steps() const { return static_cast<int>(propagators_.size()); }
  std::size_t size() const { return histories_.size(); }
  const Ket& initial() const { return initial_; }
  const std::vector<Operator>& propagators() const { return propagators_; }
  const std::vector<History>& histories() const { return histories_; }
  const History& history(std::size_t h) const { return histories_[h]; }
  const Tolerances& tolerances() const { return tol_; }

  /// Label of history h at grid slot `time`; "I" for unconstrained slots.
  const std::string& label_at(std::size_t h, int time) const {
    static const std::string kIdentity = "I";
    const int e = slot_[h][static_cast<std::size_t>(time - 1)];
    return e < 0 ? kIdentity : histories_[h].events()[e].label;
  }

  /// Projector of history h at `time`, nullptr for unconstrained slots.
  const Projector* projector_at(std::size_t h, int time) const {
    const int e = slot_[h][static_cast<std::size_t>(time - 1)];
    return e < 0 ? nullptr : &histories_[h].events()[e].projector;
  }

  /// The chain operator K(h) equals |chain_state(h)><initial|.
  const Vector& chain_state(std::size_t h) const { return chain_[h]; }

 private:
  void validate_inputs() {
    if (propagators_.empty())
      throw ValidationError("family: needs at least one time step");
    if (histories_.empty())
      throw ValidationError("family: needs at least one history");
    if (!initial_.is_normalized(tol_.norm))
      throw ValidationError("family: initial state is not normalized");
    for (const Operator& u : propagators_) {
      if (u.dim() != dim())
        throw DimensionError("family: propagator dimension differs from the state");
      if (!u.is_unitary(tol_.unitary))
        throw ValidationError("family: propagator is not unitary within tolerance");
    }

    const int k_steps = steps();
    slot_.assign(size(), std::vector<int>(static_cast<std::size_t>(k_steps), -1));
    std::map<std::pair<int, std::string>, const Projector*> named;
    std::set<std::vector<std::string>> sequences;
    for (std::size_t h = 0; h < size(); ++h) {
      const History& hist = histories_[h];
      if (max_abs(Vector(hist.initial().vec() - initial_.vec())) > tol_.norm)
        throw ValidationError("family: history '" + hist.label() +
                              "' starts from a different initial state");
      for (std::size_t e = 0; e < hist.events().size(); ++e) {
        const HistoryEvent& ev = hist.events()[e];
        if (ev.time > k_steps)
          throw ValidationError("family: event at t" + std::to_string(ev.time) +
                                " lies beyond the time grid");
        slot_[h][static_cast<std::size_t>(ev.time - 1)] = static_cast<int>(e);
        auto [it, inserted] =
            named.insert({{ev.time, ev.label}, &ev.projector});
        if (!inserted &&
            max_abs(Matrix(it->second->mat() - ev.projector.mat())) > tol_.projector)
          throw ValidationError("family: label '" + ev.label + "' at t" +
                                std::to_string(ev.time) +
                                " names two different projectors");
      }
      std::vector<std::string> seq;
      seq.reserve(static_cast<std::size_t>(k_steps));
      for (int t = 1; t <= k_steps; ++t) seq.push_back(label_at(h, t));
      if (!sequences.insert(std::move(seq)).second)
        throw ValidationError("family: duplicate history '" + hist.label() + "'");
    }
  }

  // Walks the branch tree once: checks that sibling alternatives are
  // mutually exclusive and exhaustive on their own evolved branch state,
  // and collects the chain state of every leaf along the way. Branch-level
  // exhaustiveness is what admits families that pin a single non-identity
  // projector at some time (the sum of siblings need not be I globally,
  // it only has to preserve the state the branch actually carries).
  void validate_branches_and_chain() {
    struct Node {
      std::vector<std::size_t> members;
      Vector state;
    };
    std::vector<Node> level;
    {
      Node root;
      root.members.resize(size());
      for (std::size_t h = 0; h < size(); ++h) root.members[h] = h;
      root.state = initial_.vec();
      level.push_back(std::move(root));
    }

    for (int t = 1; t <= steps(); ++t) {
      std::vector<Node> next;
      for (const Node& node : level) {
        const Vector evolved =
            propagators_[static_cast<std::size_t>(t - 1)].mat() * node.state;

        std::vector<std::string> order;
        std::map<std::string, std::vector<std::size_t>> groups;
        for (std::size_t h : node.members) {
          const std::string& l = label_at(h, t);
          if (groups.find(l) == groups.end()) order.push_back(l);
          groups[l].push_back(h);
        }

        auto matrix_of = [&](const std::string& l) -> Matrix {
          if (l == "I") return Matrix::Identity(dim(), dim());
          return projector_at(groups.at(l).front(), t)->mat();
        };

        for (std::size_t i = 0; i < order.size(); ++i)
          for (std::size_t j = i + 1; j < order.size(); ++j)
            if (!detail::orthogonal_projectors(matrix_of(order[i]),
                                               matrix_of(order[j]),
                                               tol_.projector))
              throw ValidationError("family: alternatives '" + order[i] +
                                    "' and '" + order[j] + "' at t" +
                                    std::to_string(t) +
                                    " are not mutually exclusive");

        Vector covered = Vector::Zero(dim());
        for (const std::string& l : order) {
          Node child;
          child.members = groups.at(l);
          child.state = (l == "I")
                            ? evolved
                            : Vector(projector_at(child.members.front(), t)->mat() *
                                     evolved);
          covered += child.state;
          next.push_back(std::move(child));
        }
        if (max_abs(Vector(covered - evolved)) > tol_.projector)
          throw ValidationError(
              "family: alternatives at t" + std::to_string(t) +
              " are not exhaustive on their branch");
      }
      level = std::move(next);
    }

    chain_.resize(size());
    for (Node& leaf : level) {
      if (leaf.members.size() != 1)
        throw Error("family: internal error, unseparated leaf");
      chain_[leaf.members.front()] = std::move(leaf.state);
    }
  }

  Ket initial_;
  std::vector<Operator> propagators_;
  std::vector<History> histories_;
  Tolerances tol_;
  std::vector<std::vector<int>> slot_;
  std::vector<Vector> chain_;
};

/// K(h): final projector, propagator, ..., first projector, propagator,
/// applied to |initial><initial|.
inline Operator chain_operator(const HistoryFamily& f, std::size_t h) {
  if (h >= f.size()) throw ValidationError("chain_operator: no such history");
  return Operator(Matrix(f.chain_state(h) * f.initial().vec().adjoint()));
}

inline Operator chain_operator(const HistoryFamily& f, const History& h) {
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f.history(i).label() == h.label()) return chain_operator(f, i);
  throw ValidationError("chain_operator: history '" + h.label() +
                        "' is not part of this family");
}

inline DecoherenceMatrix decoherence_matrix(const HistoryFamily& f) {
  const std::size_t n = f.size();
  DecoherenceMatrix d;
  d.entries.resize(static_cast<Index>(n), static_cast<Index>(n));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      d.entries(static_cast<Index>(a), static_cast<Index>(b)) =
          f.chain_state(a).dot(f.chain_state(b));
  d.labels.reserve(n);
  for (std::size_t h = 0; h < n; ++h) d.labels.push_back(f.history(h).label());

  const Tolerances& tol = f.tolerances();
  if (max_abs(Matrix(d.entries - d.entries.adjoint())) > tol.hermitian)
    throw ValidationError("decoherence matrix: lost hermiticity");
  double diag = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    const Complex v = d.entries(static_cast<Index>(a), static_cast<Index>(a));
    if (v.real() < -tol.probability)
      throw ValidationError("decoherence matrix: negative diagonal entry");
    diag += v.real();
  }
  if (std::abs(diag - 1.0) > tol.probability)
    throw ValidationError("decoherence matrix: diagonal does not sum to 1");
  return d;
}

inline ConsistencyReport check_consistency(
    const HistoryFamily& f,
    DecoherenceCondition condition = DecoherenceCondition::medium,
    const Tolerances& tol = {}) {
  const DecoherenceMatrix d = decoherence_matrix(f);
  ConsistencyReport r;
  r.condition = condition;
  r.tolerance = tol.consistency;
  for (std::size_t a = 0; a < f.size(); ++a) {
    for (std::size_t b = a + 1; b < f.size(); ++b) {
      const Complex e = d.entries(static_cast<Index>(a), static_cast<Index>(b));
      const double v = condition == DecoherenceCondition::medium
                           ? std::abs(e)
                           : std::abs(e.real());
      if (v > r.worst) {
        r.worst = v;
        r.row = a;
        r.col = b;
        r.row_label = d.labels[a];
        r.col_label = d.labels[b];
      }
    }
  }
  r.consistent = r.worst <= tol.consistency;
  return r;
}

struct LabeledProbability {
  std::string label;
  double value;
};

/// Probabilities of all histories; only defined for consistent families.
inline std::vector<LabeledProbability> probabilities(
    const HistoryFamily& f,
    DecoherenceCondition condition = DecoherenceCondition::medium,
    const Tolerances& tol = {}) {
  ConsistencyReport r = check_consistency(f, condition, tol);
  if (!r.consistent) throw ConsistencyError(std::move(r));
  std::vector<LabeledProbability> out;
  out.reserve(f.size());
  for (std::size_t h = 0; h < f.size(); ++h)
    out.push_back({f.history(h).label(),
                   detail::clamp_probability(f.chain_state(h).squaredNorm(),
                                             tol.probability)});
  return out;
}

/// An event reference: (grid slot, alternative label). "I" matches the
/// unconstrained slots a history leaves implicit.
using Event = std::pair<int, std::string>;

namespace detail {

inline bool matches(const HistoryFamily& f, std::size_t h,
                    const std::vector<Event>& events) {
  for (const Event& e : events)
    if (f.label_at(h, e.first) != e.second) return false;
  return true;
}

inline void require_resolvable(const HistoryFamily& f,
                               const std::vector<Event>& events,
                               const char* role) {
  for (const Event& e : events) {
    if (e.first < 1 || e.first > f.steps())
      throw ValidationError(std::string(role) + " event '" + e.second + "@t" +
                            std::to_string(e.first) + "' lies outside the time grid");
    bool found = false;
    for (std::size_t h = 0; h < f.size() && !found; ++h)
      found = f.label_at(h, e.first) == e.second;
    if (!found)
      throw ValidationError(std::string(role) + " event '" + e.second + "@t" +
                            std::to_string(e.first) +
                            "' does not name an alternative of this family");
  }
}

}  // namespace detail

/// Pr(query | given) within one family. An empty `given` conditions on the
/// whole space, so the result is the plain marginal of `query`.
inline double conditional(const HistoryFamily& f,
                          const std::vector<Event>& given,
                          const std::vector<Event>& query,
                          DecoherenceCondition condition = DecoherenceCondition::medium,
                          const Tolerances& tol = {}) {
  detail::require_resolvable(f, given, "given");
  detail::require_resolvable(f, query, "query");
  const std::vector<LabeledProbability> probs = probabilities(f, condition, tol);
  double pr_given = 0.0;
  double pr_both = 0.0;
  for (std::size_t h = 0; h < f.size(); ++h) {
    if (!detail::matches(f, h, given)) continue;
    pr_given += probs[h].value;
    if (detail::matches(f, h, query)) pr_both += probs[h].value;
  }
  if (pr_given <= tol.probability)
    throw NullConditioningError(
        "conditioning event has probability zero within tolerance");
  return pr_both / pr_given;
}

/// Common refinement of two families over the same grid and initial state.
/// Demands every projector of a commute with every projector of b at each
/// time; the result is revalidated and rechecked for consistency.
inline HistoryFamily combine_families(
    const HistoryFamily& a, const HistoryFamily& b,
    DecoherenceCondition condition = DecoherenceCondition::medium,
    const Tolerances& tol = {}) {
  if (a.dim() != b.dim()) throw DimensionError("combine: dimension mismatch");
  if (a.steps() != b.steps())
    throw ValidationError("combine: families use different time grids");
  if (max_abs(Vector(a.initial().vec() - b.initial().vec())) > tol.norm)
    throw ValidationError("combine: families have different initial states");
  for (int t = 1; t <= a.steps(); ++t)
    if (max_abs(Matrix(a.propagators()[static_cast<std::size_t>(t - 1)].mat() -
                       b.propagators()[static_cast<std::size_t>(t - 1)].mat())) >
        tol.norm)
      throw ValidationError("combine: propagators differ at t" + std::to_string(t));

  auto distinct_at = [](const HistoryFamily& f, int t) {
    std::vector<std::pair<std::string, const Projector*>> out;
    std::set<std::string> seen;
    for (std::size_t h = 0; h < f.size(); ++h)
      if (const Projector* p = f.projector_at(h, t))
        if (seen.insert(f.label_at(h, t)).second)
          out.emplace_back(f.label_at(h, t), p);
    return out;
  };

  for (int t = 1; t <= a.steps(); ++t)
    for (const auto& [la, pa] : distinct_at(a, t))
      for (const auto& [lb, pb] : distinct_at(b, t))
        if (!compatible(*pa, *pb, tol)) throw IncompatibilityError(la, lb, t);

  std::vector<History> combined;
  for (std::size_t ha = 0; ha < a.size(); ++ha) {
    for (std::size_t hb = 0; hb < b.size(); ++hb) {
      bool dead = false;
      std::vector<HistoryEvent> events;
      for (int t = 1; t <= a.steps() && !dead; ++t) {
        const Projector* pa = a.projector_at(ha, t);
        const Projector* pb = b.projector_at(hb, t);
        if (!pa && !pb) continue;
        if (pa && !pb) {
          events.push_back({t, a.label_at(ha, t), *pa});
        } else if (!pa && pb) {
          events.push_back({t, b.label_at(hb, t), *pb});
        } else {
          if (detail::orthogonal_projectors(pa->mat(), pb->mat(), tol.projector)) {
            dead = true;  // contradictory events, this pairing cannot occur
            break;
          }
          const std::string& la = a.label_at(ha, t);
          const std::string& lb = b.label_at(hb, t);
          Projector joint =
              max_abs(Matrix(pa->mat() - pb->mat())) <= tol.projector
                  ? *pa
                  : Projector(Operator(Matrix(pa->mat() * pb->mat())), tol);
          events.push_back(
              {t, la == lb ? la : la + "*" + lb, std::move(joint)});
        }
      }
      if (!dead) combined.emplace_back(a.initial(), std::move(events));
    }
  }
  if (combined.empty())
    throw ValidationError("combine: no surviving histories");

  HistoryFamily out(a.initial(), a.propagators(), std::move(combined), tol);
  ConsistencyReport r = check_consistency(out, condition, tol);
  if (!r.consistent) throw ConsistencyError(std::move(r));
  return out;
}

}  // namespace qhist
