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

#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "qhist/sterngerlach.hpp"
#include "qhist/toymodels.hpp"

// JSON model files. Complex numbers are [re, im] pairs and matrices are
// row-major arrays of rows, so doubles survive a save/load cycle bit for
// bit. Four kinds: the built-in lattices ("toy_decay",
// "toy_decay_detector"), the built-in beam experiment ("stern_gerlach"),
// and fully explicit "custom" models. Built-in kinds are materialized on
// load into the same named-object form a custom model uses, which is also
// what export writes back out.
//
// Structural problems (wrong JSON types, missing fields) raise ParseError;
// value-level problems (normalization, unitarity, unresolved names) raise
// ValidationError with the JSON path of the offending entry.

namespace qhist {

enum class ModelKind { toy_decay, toy_decay_detector, stern_gerlach, custom };

inline std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::toy_decay: return "toy_decay";
    case ModelKind::toy_decay_detector: return "toy_decay_detector";
    case ModelKind::stern_gerlach: return "stern_gerlach";
    default: return "custom";
  }
}

struct FamilyDef {
  struct HistoryDef {
    std::string label;  // optional, derived from events when empty
    std::vector<std::pair<int, std::string>> events;  // (t, projector name)
  };
  std::string initial;
  std::vector<std::string> propagators;
  std::vector<HistoryDef> histories;
};

struct Model {
  ModelKind kind = ModelKind::custom;

  // lattice parameters, meaningful for the toy kinds
  int lattice_half_width = 0;
  int pointer_half_width = 0;
  int trigger_site = 2;
  Complex alpha{1.0, 0.0};
  Complex beta{0.0, 0.0};

  Index dim = 0;
  std::vector<std::string> basis_labels;
  std::map<std::string, Ket> kets;
  std::map<std::string, Operator> unitaries;
  std::map<std::string, Projector> projectors;
  std::map<std::string, FamilyDef> families;

  std::string evolve_initial;             // ket name, empty when undefined
  std::vector<std::string> evolve_steps;  // unitary names, in order
  bool evolve_repeats = false;  // single step applied t times vs staged list
};

namespace detail {

using nlohmann::json;

inline const json& require_field(const json& j, const char* key,
                                 const std::string& path) {
  if (!j.is_object() || !j.contains(key))
    throw ParseError("model: missing required field " + path + "/" + key);
  return j.at(key);
}

inline int require_int(const json& j, const char* key,
                       const std::string& path) {
  const json& v = require_field(j, key, path);
  if (!v.is_number_integer())
    throw ParseError("model: " + path + "/" + key + " must be an integer");
  return v.get<int>();
}

inline Complex parse_complex(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw ParseError("model: " + path + " must be a [re, im] pair");
  return Complex(v[0].get<double>(), v[1].get<double>());
}

inline Vector parse_vector(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty())
    throw ParseError("model: " + path + " must be a nonempty array of [re, im] pairs");
  Vector out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i)
    out(static_cast<Index>(i)) =
        parse_complex(v[i], path + "/" + std::to_string(i));
  return out;
}

inline Matrix parse_matrix(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty())
    throw ParseError("model: " + path + " must be a nonempty array of rows");
  const std::size_t rows = v.size();
  Matrix out;
  for (std::size_t r = 0; r < rows; ++r) {
    const json& row = v[r];
    const std::string rpath = path + "/" + std::to_string(r);
    if (!row.is_array() || row.empty())
      throw ParseError("model: " + rpath + " must be a nonempty row");
    if (r == 0)
      out.resize(static_cast<Index>(rows), static_cast<Index>(row.size()));
    if (row.size() != static_cast<std::size_t>(out.cols()))
      throw ParseError("model: " + rpath + " has a different length than row 0");
    for (std::size_t c = 0; c < row.size(); ++c)
      out(static_cast<Index>(r), static_cast<Index>(c)) =
          parse_complex(row[c], rpath + "/" + std::to_string(c));
  }
  return out;
}

inline json complex_to_json(const Complex& c) {
  return json::array({c.real(), c.imag()});
}

inline json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v(i)));
  return out;
}

inline json matrix_to_json(const Matrix& m) {
  json out = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
    out.push_back(std::move(row));
  }
  return out;
}

inline FamilyDef family_def_from(const HistoryFamily& f,
                                 const std::string& initial_name,
                                 std::vector<std::string> propagator_names) {
  FamilyDef def;
  def.initial = initial_name;
  def.propagators = std::move(propagator_names);
  for (const History& h : f.histories()) {
    FamilyDef::HistoryDef hd;
    hd.label = h.label();
    for (const HistoryEvent& e : h.events()) hd.events.push_back({e.time, e.label});
    def.histories.push_back(std::move(hd));
  }
  return def;
}

}  // namespace detail

/// Instantiate a named family of the model as a validated HistoryFamily.
inline HistoryFamily realize_family(const Model& m, const std::string& name,
                                    const Tolerances& tol = {}) {
  auto it = m.families.find(name);
  if (it == m.families.end())
    throw ValidationError("model defines no family named '" + name + "'");
  const FamilyDef& def = it->second;

  auto ket_it = m.kets.find(def.initial);
  if (ket_it == m.kets.end())
    throw ValidationError("/families/" + name + "/initial: unknown ket '" +
                          def.initial + "'");
  std::vector<Operator> props;
  props.reserve(def.propagators.size());
  for (const std::string& u : def.propagators) {
    auto u_it = m.unitaries.find(u);
    if (u_it == m.unitaries.end())
      throw ValidationError("/families/" + name +
                            "/propagators: unknown unitary '" + u + "'");
    props.push_back(u_it->second);
  }
  std::vector<History> hists;
  hists.reserve(def.histories.size());
  for (const FamilyDef::HistoryDef& hd : def.histories) {
    std::vector<HistoryEvent> events;
    events.reserve(hd.events.size());
    for (const auto& [t, pname] : hd.events) {
      auto p_it = m.projectors.find(pname);
      if (p_it == m.projectors.end())
        throw ValidationError("/families/" + name +
                              "/histories: unknown projector '" + pname + "'");
      events.push_back({t, pname, p_it->second});
    }
    hists.emplace_back(ket_it->second, std::move(events), hd.label);
  }
  return HistoryFamily(ket_it->second, std::move(props), std::move(hists), tol);
}

inline Model build_model(const nlohmann::json& j, const Tolerances& tol = {}) {
  using detail::json;
  if (!j.is_object()) throw ParseError("model: top level must be a JSON object");
  const json& kind_v = detail::require_field(j, "kind", "");
  if (!kind_v.is_string()) throw ParseError("model: /kind must be a string");
  const std::string kind = kind_v.get<std::string>();

  Model m;
  if (kind == "toy_decay" || kind == "toy_decay_detector") {
    m.kind = kind == "toy_decay" ? ModelKind::toy_decay
                                 : ModelKind::toy_decay_detector;
    m.lattice_half_width = detail::require_int(j, "M", "");
    m.alpha = detail::parse_complex(detail::require_field(j, "alpha", ""), "/alpha");
    m.beta = detail::parse_complex(detail::require_field(j, "beta", ""), "/beta");
    if (m.lattice_half_width < 1)
      throw ValidationError("/M: lattice half-width must be >= 1");
    if (std::abs(std::norm(m.alpha) + std::norm(m.beta) - 1.0) > tol.norm)
      throw ValidationError(
          "/alpha, /beta: |alpha|^2 + |beta|^2 must equal 1 within tolerance");
    const ToyLattice lat(m.lattice_half_width, m.alpha, m.beta, tol);

    if (m.kind == ModelKind::toy_decay) {
      m.dim = lat.dim();
      m.kets.insert({"psi0", lattice_state(lat, 0)});
      m.unitaries.insert({"T", decay_operator(lat)});
      for (Index i = 0; i < m.dim; ++i)
        m.basis_labels.push_back(ToyLattice::label_of(lat.site_of(i)));
    } else {
      m.pointer_half_width = detail::require_int(j, "N", "");
      if (m.pointer_half_width < 1)
        throw ValidationError("/N: pointer half-width must be >= 1");
      if (j.contains("trigger_site"))
        m.trigger_site = detail::require_int(j, "trigger_site", "");
      if (m.trigger_site < -m.lattice_half_width ||
          m.trigger_site > m.lattice_half_width)
        throw ValidationError("/trigger_site: lies outside the lattice");
      const ToyDetector det(m.pointer_half_width, m.trigger_site);
      m.dim = lat.dim() * det.dim();
      m.kets.insert({"psi0", coupled_state(lat, det, 0, 0)});
      m.unitaries.insert({"T", coupled_step(lat, det)});
      for (Index i = 0; i < lat.dim(); ++i)
        for (Index k = 0; k < det.dim(); ++k)
          m.basis_labels.push_back(
              product_label(lat.site_of(i), det.pointer_of(k)));
    }
    m.evolve_initial = "psi0";
    m.evolve_steps = {"T"};
    m.evolve_repeats = true;
    return m;
  }

  if (kind == "stern_gerlach") {
    m.kind = ModelKind::stern_gerlach;
    const SGModel sg = build_sg_model(tol);
    m.dim = SGModel::kDim;
    m.kets.insert({"psi0", sg.initial});
    m.unitaries.insert({"T1", sg.step1});
    m.unitaries.insert({"T2", sg.step2});
    m.unitaries.insert({"T3", sg.step3});
    m.projectors = sg.projectors;
    for (Index i = 0; i < m.dim; ++i)
      m.basis_labels.push_back(SGModel::basis_label(i));
    for (const std::string& name : sg_family_names())
      m.families.insert(
          {name, detail::family_def_from(sg_family_by_name(sg, name, tol),
                                         "psi0", {"T1", "T2", "T3"})});
    m.evolve_initial = "psi0";
    m.evolve_steps = {"T1", "T2", "T3"};
    m.evolve_repeats = false;
    return m;
  }

  if (kind != "custom")
    throw ParseError("model: unknown kind '" + kind + "'");

  m.kind = ModelKind::custom;
  const int dim = detail::require_int(j, "dim", "");
  if (dim < 1) throw ValidationError("/dim: must be >= 1");
  m.dim = dim;

  if (j.contains("kets")) {
    const json& kets = j.at("kets");
    if (!kets.is_object()) throw ParseError("model: /kets must be an object");
    for (const auto& [name, val] : kets.items()) {
      const std::string path = "/kets/" + name;
      Vector v = detail::parse_vector(val, path);
      if (v.size() != m.dim)
        throw ValidationError("model: " + path + " has the wrong dimension");
      m.kets.insert({name, Ket(std::move(v))});
    }
  }
  if (j.contains("unitaries")) {
    const json& us = j.at("unitaries");
    if (!us.is_object()) throw ParseError("model: /unitaries must be an object");
    for (const auto& [name, val] : us.items()) {
      const std::string path = "/unitaries/" + name;
      Matrix u = detail::parse_matrix(val, path);
      if (u.rows() != m.dim || u.cols() != m.dim)
        throw ValidationError("model: " + path + " has the wrong dimension");
      Operator op(std::move(u));
      if (!op.is_unitary(tol.unitary))
        throw ValidationError("model: " + path + " is not unitary within tolerance");
      m.unitaries.insert({name, std::move(op)});
    }
  }
  if (j.contains("projectors")) {
    const json& ps = j.at("projectors");
    if (!ps.is_object()) throw ParseError("model: /projectors must be an object");
    for (const auto& [name, val] : ps.items()) {
      const std::string path = "/projectors/" + name;
      Matrix p = detail::parse_matrix(val, path);
      if (p.rows() != m.dim || p.cols() != m.dim)
        throw ValidationError("model: " + path + " has the wrong dimension");
      try {
        m.projectors.insert({name, Projector(Operator(std::move(p)), tol)});
      } catch (const ValidationError& e) {
        throw ValidationError("model: " + path + ": " + e.what());
      }
    }
  }
  if (j.contains("families")) {
    const json& fs = j.at("families");
    if (!fs.is_object()) throw ParseError("model: /families must be an object");
    for (const auto& [name, val] : fs.items()) {
      const std::string path = "/families/" + name;
      FamilyDef def;
      const json& initial = detail::require_field(val, "initial", path);
      if (!initial.is_string())
        throw ParseError("model: " + path + "/initial must be a ket name");
      def.initial = initial.get<std::string>();
      const json& props = detail::require_field(val, "propagators", path);
      if (!props.is_array() || props.empty())
        throw ParseError("model: " + path + "/propagators must be a nonempty array");
      for (const json& p : props) {
        if (!p.is_string())
          throw ParseError("model: " + path + "/propagators must hold unitary names");
        def.propagators.push_back(p.get<std::string>());
      }
      const json& hists = detail::require_field(val, "histories", path);
      if (!hists.is_array() || hists.empty())
        throw ParseError("model: " + path + "/histories must be a nonempty array");
      for (std::size_t i = 0; i < hists.size(); ++i) {
        const std::string hpath = path + "/histories/" + std::to_string(i);
        const json& hj = hists[i];
        FamilyDef::HistoryDef hd;
        if (hj.contains("label")) {
          if (!hj.at("label").is_string())
            throw ParseError("model: " + hpath + "/label must be a string");
          hd.label = hj.at("label").get<std::string>();
        }
        const json& events = detail::require_field(hj, "events", hpath);
        if (!events.is_array())
          throw ParseError("model: " + hpath + "/events must be an array");
        for (std::size_t e = 0; e < events.size(); ++e) {
          const std::string epath = hpath + "/events/" + std::to_string(e);
          const json& ej = events[e];
          const int t = detail::require_int(ej, "t", epath);
          const json& pn = detail::require_field(ej, "projector", epath);
          if (!pn.is_string())
            throw ParseError("model: " + epath + "/projector must be a name");
          hd.events.push_back({t, pn.get<std::string>()});
        }
        def.histories.push_back(std::move(hd));
      }
      m.families.insert({name, std::move(def)});
    }
  }
  if (j.contains("basis_labels")) {
    const json& ls = j.at("basis_labels");
    if (!ls.is_array() || ls.size() != static_cast<std::size_t>(m.dim))
      throw ParseError("model: /basis_labels must be an array of dim strings");
    for (const json& l : ls) {
      if (!l.is_string())
        throw ParseError("model: /basis_labels must be an array of strings");
      m.basis_labels.push_back(l.get<std::string>());
    }
  } else {
    for (Index i = 0; i < m.dim; ++i)
      m.basis_labels.push_back(std::to_string(i));
  }
  if (j.contains("evolve")) {
    const json& ev = j.at("evolve");
    if (!ev.is_object()) throw ParseError("model: /evolve must be an object");
    const json& initial = detail::require_field(ev, "initial", "/evolve");
    if (!initial.is_string())
      throw ParseError("model: /evolve/initial must be a ket name");
    m.evolve_initial = initial.get<std::string>();
    if (m.kets.find(m.evolve_initial) == m.kets.end())
      throw ValidationError("/evolve/initial: unknown ket '" + m.evolve_initial + "'");
    if (ev.contains("step")) {
      if (!ev.at("step").is_string())
        throw ParseError("model: /evolve/step must be a unitary name");
      m.evolve_steps = {ev.at("step").get<std::string>()};
      m.evolve_repeats = true;
    } else {
      const json& steps = detail::require_field(ev, "steps", "/evolve");
      if (!steps.is_array() || steps.empty())
        throw ParseError("model: /evolve/steps must be a nonempty array");
      for (const json& s : steps) {
        if (!s.is_string())
          throw ParseError("model: /evolve/steps must hold unitary names");
        m.evolve_steps.push_back(s.get<std::string>());
      }
      m.evolve_repeats = false;
    }
    for (const std::string& s : m.evolve_steps)
      if (m.unitaries.find(s) == m.unitaries.end())
        throw ValidationError("/evolve: unknown unitary '" + s + "'");
  }

  // surface family invariant violations at load time
  for (const auto& [name, def] : m.families) {
    (void)def;
    realize_family(m, name, tol);
  }
  return m;
}

inline Model load_model(const std::string& path, const Tolerances& tol = {}) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("model file is not valid JSON: " + std::string(e.what()));
  }
  return build_model(j, tol);
}

/// Write the fully materialized model back out as a "custom" kind. Matrix
/// entries survive the round trip bit for bit.
inline nlohmann::json export_model(const Model& m) {
  using detail::json;
  json out;
  out["kind"] = "custom";
  out["dim"] = static_cast<int>(m.dim);
  json kets = json::object();
  for (const auto& [name, k] : m.kets) kets[name] = detail::vector_to_json(k.vec());
  out["kets"] = std::move(kets);
  json unitaries = json::object();
  for (const auto& [name, u] : m.unitaries)
    unitaries[name] = detail::matrix_to_json(u.mat());
  out["unitaries"] = std::move(unitaries);
  json projectors = json::object();
  for (const auto& [name, p] : m.projectors)
    projectors[name] = detail::matrix_to_json(p.mat());
  out["projectors"] = std::move(projectors);
  json families = json::object();
  for (const auto& [name, def] : m.families) {
    json fj;
    fj["initial"] = def.initial;
    fj["propagators"] = def.propagators;
    json hists = json::array();
    for (const FamilyDef::HistoryDef& hd : def.histories) {
      json hj;
      if (!hd.label.empty()) hj["label"] = hd.label;
      json events = json::array();
      for (const auto& [t, pname] : hd.events)
        events.push_back({{"t", t}, {"projector", pname}});
      hj["events"] = std::move(events);
      hists.push_back(std::move(hj));
    }
    fj["histories"] = std::move(hists);
    families[name] = std::move(fj);
  }
  out["families"] = std::move(families);
  out["basis_labels"] = m.basis_labels;
  if (!m.evolve_initial.empty()) {
    json ev;
    ev["initial"] = m.evolve_initial;
    if (m.evolve_repeats && m.evolve_steps.size() == 1)
      ev["step"] = m.evolve_steps.front();
    else
      ev["steps"] = m.evolve_steps;
    out["evolve"] = std::move(ev);
  }
  return out;
}

}  // namespace qhist
