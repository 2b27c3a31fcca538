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

// qhist: evolve model states, evaluate single-time probabilities, check and
// interrogate history families, and export models as explicit JSON.
//
// Exit codes: 0 success (including "inconsistent" verdicts from `family
// check`), 1 unexpected failure, 2 model parse error, 3 validation error
// (bad invariants, unknown names, inconsistent family asked for
// probabilities), 4 incompatible projectors or frameworks, 5 conditioning
// on a zero-probability event.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <qhist/qhist.hpp>

namespace {

using nlohmann::json;

enum class Format { text, json_fmt, csv };

Format parse_format(const std::string& s) {
  if (s == "text") return Format::text;
  if (s == "json") return Format::json_fmt;
  if (s == "csv") return Format::csv;
  throw qhist::ValidationError("unknown output format '" + s +
                               "' (expected text, json or csv)");
}

qhist::DecoherenceCondition parse_condition(const std::string& s) {
  if (s == "medium") return qhist::DecoherenceCondition::medium;
  if (s == "weak") return qhist::DecoherenceCondition::weak;
  throw qhist::ValidationError("unknown consistency condition '" + s +
                               "' (expected medium or weak)");
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Quote a csv field when it holds a comma, quote or newline (labels of
/// multi-event histories do), doubling embedded quotes.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

std::string num_short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::vector<qhist::Event> parse_events(const std::string& spec) {
  std::vector<qhist::Event> events;
  std::size_t start = 0;
  while (start <= spec.size()) {
    std::size_t end = spec.find(',', start);
    if (end == std::string::npos) end = spec.size();
    const std::string tok = spec.substr(start, end - start);
    if (!tok.empty()) {
      const std::size_t at = tok.rfind('@');
      if (at == std::string::npos || at == 0 || at + 2 > tok.size() ||
          tok[at + 1] != 't')
        throw qhist::ValidationError("cannot parse event '" + tok +
                                     "': expected label@tK");
      int t = 0;
      try {
        std::size_t used = 0;
        t = std::stoi(tok.substr(at + 2), &used);
        if (used != tok.size() - at - 2) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw qhist::ValidationError("cannot parse event '" + tok +
                                     "': expected label@tK");
      }
      if (t < 1)
        throw qhist::ValidationError("cannot parse event '" + tok +
                                     "': time must be >= 1");
      events.push_back({t, tok.substr(0, at)});
    }
    start = end + 1;
  }
  return events;
}

std::string event_list(const std::vector<qhist::Event>& events) {
  std::string s;
  for (const qhist::Event& e : events) {
    if (!s.empty()) s += ",";
    s += e.second + "@t" + std::to_string(e.first);
  }
  return s.empty() ? "(all)" : s;
}

// Evolve the model's declared initial state by t steps. Staged models walk
// their step list once; repeating models apply their single step t times.
qhist::Vector evolve_state(const qhist::Model& m, int t,
                           std::vector<std::string>& warnings) {
  if (m.evolve_initial.empty())
    throw qhist::ValidationError(
        "model does not declare an initial state to evolve (add an \"evolve\" "
        "section)");
  qhist::Vector v = m.kets.at(m.evolve_initial).vec();
  if (m.evolve_repeats) {
    const qhist::Operator& u = m.unitaries.at(m.evolve_steps.front());
    for (int i = 0; i < t; ++i) v = u.mat() * v;
  } else {
    const int staged = static_cast<int>(m.evolve_steps.size());
    if (t > staged)
      warnings.push_back("time grid ends at t=" + std::to_string(staged) +
                         "; later steps act as the identity");
    for (int i = 0; i < std::min(t, staged); ++i)
      v = m.unitaries.at(m.evolve_steps[static_cast<std::size_t>(i)]).mat() * v;
  }
  if (m.kind == qhist::ModelKind::toy_decay && t >= m.lattice_half_width)
    warnings.push_back(
        "t >= M: the wavefront reaches the periodic boundary, closed-form "
        "amplitudes no longer apply");
  if (m.kind == qhist::ModelKind::toy_decay_detector &&
      (t >= m.lattice_half_width - 1 || t - 2 >= m.pointer_half_width))
    warnings.push_back(
        "t outside the validated window (3 <= t < M-1, t-2 < N): a ring "
        "wrapped, closed-form amplitudes no longer apply");
  return v;
}

struct StateRow {
  std::string label;
  qhist::Complex amp;
};

void print_state(const qhist::Model& m, int t, const qhist::Vector& v,
                 const std::vector<std::string>& warnings, Format fmt) {
  std::vector<StateRow> rows;
  for (qhist::Index i = 0; i < v.size(); ++i)
    if (v(i) != qhist::Complex(0.0, 0.0))
      rows.push_back({m.basis_labels[static_cast<std::size_t>(i)], v(i)});

  if (fmt == Format::json_fmt) {
    json out;
    out["command"] = "evolve";
    out["kind"] = qhist::to_string(m.kind);
    out["t"] = t;
    out["dim"] = static_cast<int>(m.dim);
    out["warnings"] = warnings;
    json jrows = json::array();
    for (const StateRow& r : rows)
      jrows.push_back({{"basis_label", r.label},
                       {"re", r.amp.real()},
                       {"im", r.amp.imag()},
                       {"prob", std::norm(r.amp)}});
    out["rows"] = std::move(jrows);
    std::cout << out.dump(2) << "\n";
    return;
  }
  for (const std::string& w : warnings) std::cerr << "qhist: warning: " << w << "\n";
  if (fmt == Format::csv) {
    std::cout << "basis_label,re,im,prob\n";
    for (const StateRow& r : rows)
      std::cout << csv_field(r.label) << "," << num(r.amp.real()) << ","
                << num(r.amp.imag()) << "," << num(std::norm(r.amp)) << "\n";
    return;
  }
  std::printf("# state after t=%d (dim %d), %zu nonzero amplitudes\n", t,
              static_cast<int>(m.dim), rows.size());
  std::printf("%-18s %-22s %-22s %s\n", "basis_label", "re", "im", "prob");
  for (const StateRow& r : rows)
    std::printf("%-18s %-22s %-22s %s\n", r.label.c_str(),
                num_short(r.amp.real()).c_str(), num_short(r.amp.imag()).c_str(),
                num_short(std::norm(r.amp)).c_str());
}

void print_table(const std::string& command,
                 const std::vector<qhist::LabeledProbability>& rows,
                 const std::vector<std::string>& warnings, Format fmt) {
  if (fmt == Format::json_fmt) {
    json out;
    out["command"] = command;
    out["warnings"] = warnings;
    json jrows = json::array();
    for (const auto& r : rows)
      jrows.push_back({{"label", r.label}, {"value", r.value}});
    out["probabilities"] = std::move(jrows);
    std::cout << out.dump(2) << "\n";
    return;
  }
  for (const std::string& w : warnings) std::cerr << "qhist: warning: " << w << "\n";
  if (fmt == Format::csv) {
    std::cout << "label,probability\n";
    for (const auto& r : rows)
      std::cout << csv_field(r.label) << "," << num(r.value) << "\n";
    return;
  }
  std::size_t width = 0;
  for (const auto& r : rows) width = std::max(width, r.label.size());
  for (const auto& r : rows)
    std::printf("%-*s  %s\n", static_cast<int>(width), r.label.c_str(),
                num_short(r.value).c_str());
}

int cmd_evolve(const qhist::Model& m, int t, Format fmt) {
  std::vector<std::string> warnings;
  const qhist::Vector v = evolve_state(m, t, warnings);
  print_state(m, t, v, warnings, fmt);
  return 0;
}

int cmd_born(const qhist::Model& m, int t, const std::string& space_spec,
             Format fmt, const qhist::Tolerances& tol) {
  std::vector<std::string> warnings;
  std::vector<qhist::LabeledProbability> rows;

  if (!space_spec.empty()) {
    // named projectors forming a sample space; evaluate through born()
    std::vector<qhist::Projector> ps;
    std::vector<std::string> labels;
    std::size_t start = 0;
    while (start <= space_spec.size()) {
      std::size_t end = space_spec.find(',', start);
      if (end == std::string::npos) end = space_spec.size();
      const std::string name = space_spec.substr(start, end - start);
      if (!name.empty()) {
        auto it = m.projectors.find(name);
        if (it == m.projectors.end())
          throw qhist::ValidationError("no projector named '" + name + "'");
        ps.push_back(it->second);
        labels.push_back(name);
      }
      start = end + 1;
    }
    qhist::SampleSpace space(std::move(ps), std::move(labels), tol);
    if (m.evolve_initial.empty())
      throw qhist::ValidationError(
          "model does not declare an initial state (add an \"evolve\" section)");
    qhist::Matrix u = qhist::Matrix::Identity(m.dim, m.dim);
    if (m.evolve_repeats) {
      u = qhist::power(m.unitaries.at(m.evolve_steps.front()), t).mat();
    } else {
      const int staged = static_cast<int>(m.evolve_steps.size());
      if (t > staged)
        warnings.push_back("time grid ends at t=" + std::to_string(staged) +
                           "; later steps act as the identity");
      for (int i = 0; i < std::min(t, staged); ++i)
        u = m.unitaries.at(m.evolve_steps[static_cast<std::size_t>(i)]).mat() * u;
    }
    const std::vector<double> pr = qhist::born(
        m.kets.at(m.evolve_initial), qhist::Operator(std::move(u)), space, tol);
    for (std::size_t i = 0; i < pr.size(); ++i)
      rows.push_back({space.label(i), pr[i]});
  } else {
    // basis probabilities: squared amplitudes of the evolved state
    const qhist::Vector v = evolve_state(m, t, warnings);
    for (qhist::Index i = 0; i < v.size(); ++i) {
      const double p = std::norm(v(i));
      if (p > 0.0)
        rows.push_back({m.basis_labels[static_cast<std::size_t>(i)], p});
    }
  }
  print_table("born", rows, warnings, fmt);
  return 0;
}

qhist::HistoryFamily resolve_family(const qhist::Model& m,
                                    const std::string& name,
                                    qhist::DecoherenceCondition condition,
                                    const qhist::Tolerances& tol) {
  const std::size_t plus = name.find('+');
  if (plus == std::string::npos) return realize_family(m, name, tol);
  const std::string a = name.substr(0, plus);
  const std::string b = name.substr(plus + 1);
  return qhist::combine_families(realize_family(m, a, tol),
                                 realize_family(m, b, tol), condition, tol);
}

int cmd_family_check(const qhist::HistoryFamily& f,
                     qhist::DecoherenceCondition condition,
                     const qhist::Tolerances& tol, Format fmt,
                     const std::string& name) {
  const qhist::ConsistencyReport r = qhist::check_consistency(f, condition, tol);
  const std::string status = r.consistent ? "consistent" : "inconsistent";
  if (fmt == Format::json_fmt) {
    json out;
    out["command"] = "check";
    out["family"] = name;
    out["status"] = status;
    out["worst_offdiagonal"] = r.worst;
    out["pair"] = json::array({r.row_label, r.col_label});
    out["condition"] = qhist::to_string(r.condition);
    out["tolerance"] = r.tolerance;
    std::cout << out.dump(2) << "\n";
  } else if (fmt == Format::csv) {
    std::cout << "family,status,worst_offdiagonal,row,col,condition,tolerance\n"
              << csv_field(name) << "," << status << "," << num(r.worst) << ","
              << csv_field(r.row_label) << "," << csv_field(r.col_label) << ","
              << qhist::to_string(r.condition) << "," << num(r.tolerance)
              << "\n";
  } else {
    std::printf("%s: %s (worst off-diagonal %s vs tolerance %s, %s condition",
                name.c_str(), status.c_str(), num_short(r.worst).c_str(),
                num_short(r.tolerance).c_str(),
                qhist::to_string(r.condition).c_str());
    if (!r.row_label.empty())
      std::printf(", pair '%s' / '%s'", r.row_label.c_str(), r.col_label.c_str());
    std::printf(")\n");
  }
  return 0;
}

int cmd_family_cond(const qhist::HistoryFamily& f, const std::string& given,
                    const std::string& query,
                    qhist::DecoherenceCondition condition,
                    const qhist::Tolerances& tol, Format fmt) {
  const std::vector<qhist::Event> g = parse_events(given);
  const std::vector<qhist::Event> q = parse_events(query);
  if (q.empty())
    throw qhist::ValidationError("cond: --query must name at least one event");
  const double value = qhist::conditional(f, g, q, condition, tol);
  if (fmt == Format::json_fmt) {
    json out;
    out["command"] = "cond";
    out["given"] = event_list(g);
    out["query"] = event_list(q);
    out["value"] = value;
    std::cout << out.dump(2) << "\n";
  } else if (fmt == Format::csv) {
    std::cout << "query,given,value\n"
              << csv_field(event_list(q)) << "," << csv_field(event_list(g))
              << "," << num(value) << "\n";
  } else {
    std::printf("Pr(%s | %s) = %s\n", event_list(q).c_str(),
                event_list(g).c_str(), num_short(value).c_str());
  }
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{
      "qhist: projectors, history families and probabilities for small "
      "quantum models"};
  app.require_subcommand(1);

  std::string model_path;
  std::string out_fmt = "text";
  double tol_flag = 0.0;
  bool tol_set = false;
  std::string consistency = "medium";

  app.add_option("--model", model_path, "model file (JSON)")->required();
  app.add_option("--out", out_fmt, "output format: text, json or csv")
      ->capture_default_str();
  app.add_option("--tol", tol_flag,
                 "override every tolerance with one epsilon (beats QHIST_TOL)")
      ->check(CLI::PositiveNumber)
      ->each([&](const std::string&) { tol_set = true; });
  app.add_option("--consistency", consistency,
                 "decoherence condition for family commands: medium or weak")
      ->capture_default_str();

  int t_evolve = 0;
  CLI::App* evolve = app.add_subcommand(
      "evolve", "apply the model's dynamics and print the state");
  evolve->fallthrough();
  evolve->add_option("-t,--time", t_evolve, "number of time steps")
      ->required()
      ->check(CLI::NonNegativeNumber);

  int t_born = 0;
  std::string space_spec;
  CLI::App* born_cmd = app.add_subcommand(
      "born", "single-time probabilities of the evolved state");
  born_cmd->fallthrough();
  born_cmd->add_option("-t,--time", t_born, "number of time steps")
      ->required()
      ->check(CLI::NonNegativeNumber);
  born_cmd->add_option(
      "--space", space_spec,
      "comma-separated projector names forming a sample space (default: the "
      "full basis)");

  std::string family_name;
  std::string action;
  std::string given_spec;
  std::string query_spec;
  CLI::App* family = app.add_subcommand(
      "family", "check, weigh or condition a history family");
  family->fallthrough();
  family->add_option("--name", family_name,
                     "family name, or A+B for the combination of two")
      ->required();
  family->add_option("action", action, "one of: check, prob, cond")
      ->required()
      ->check(CLI::IsMember({"check", "prob", "cond"}));
  family->add_option("--given", given_spec,
                     "conditioning events label@tK, comma separated");
  family->add_option("--query", query_spec,
                     "queried events label@tK, comma separated");

  std::string export_path;
  CLI::App* export_cmd = app.add_subcommand(
      "export", "write the materialized model as explicit custom JSON");
  export_cmd->fallthrough();
  export_cmd->add_option("-o,--output", export_path,
                         "output file (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  qhist::Tolerances tol;
  if (const char* env = std::getenv("QHIST_TOL")) {
    try {
      std::size_t used = 0;
      const std::string s(env);
      const double eps = std::stod(s, &used);
      if (used != s.size() || eps <= 0.0) throw std::invalid_argument("");
      tol = qhist::Tolerances::uniform(eps);
    } catch (const std::exception&) {
      throw qhist::ValidationError("QHIST_TOL is not a positive number");
    }
  }
  if (tol_set) tol = qhist::Tolerances::uniform(tol_flag);

  const Format fmt = parse_format(out_fmt);
  const qhist::DecoherenceCondition condition = parse_condition(consistency);
  const qhist::Model model = qhist::load_model(model_path, tol);

  if (evolve->parsed()) return cmd_evolve(model, t_evolve, fmt);
  if (born_cmd->parsed()) return cmd_born(model, t_born, space_spec, fmt, tol);
  if (family->parsed()) {
    const qhist::HistoryFamily f =
        resolve_family(model, family_name, condition, tol);
    if (action == "check")
      return cmd_family_check(f, condition, tol, fmt, family_name);
    if (action == "prob") {
      print_table("prob", qhist::probabilities(f, condition, tol), {}, fmt);
      return 0;
    }
    return cmd_family_cond(f, given_spec, query_spec, condition, tol, fmt);
  }
  if (export_cmd->parsed()) {
    const json out = qhist::export_model(model);
    if (export_path.empty()) {
      std::cout << out.dump(2) << "\n";
    } else {
      std::ofstream file(export_path);
      if (!file)
        throw qhist::Error("cannot open output file: " + export_path);
      file << out.dump(2) << "\n";
    }
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const qhist::ParseError& e) {
    std::cerr << "qhist: parse error: " << e.what() << "\n";
    return 2;
  } catch (const qhist::IncompatibilityError& e) {
    std::cerr << "qhist: incompatibility: " << e.what() << "\n";
    return 4;
  } catch (const qhist::NullConditioningError& e) {
    std::cerr << "qhist: null conditioning: " << e.what() << "\n";
    return 5;
  } catch (const qhist::ConsistencyError& e) {
    std::cerr << "qhist: " << e.what() << "\n";
    return 3;
  } catch (const qhist::ValidationError& e) {
    std::cerr << "qhist: validation error: " << e.what() << "\n";
    return 3;
  } catch (const qhist::DimensionError& e) {
    std::cerr << "qhist: validation error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "qhist: error: " << e.what() << "\n";
    return 1;
  }
}
