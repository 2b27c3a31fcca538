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

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <string>

#include <qhist/model_io.hpp>

using namespace qhist;
using nlohmann::json;

namespace {

const char* kAlpha = "0.9486832980505138";
const char* kBeta = "0.31622776601683794";

json decay_json(int half_width) {
  json j;
  j["kind"] = "toy_decay";
  j["M"] = half_width;
  j["alpha"] = json::parse(std::string("[") + kAlpha + ", 0.0]");
  j["beta"] = json::parse(std::string("[") + kBeta + ", 0.0]");
  return j;
}

json detector_json(int m_half, int n_half) {
  json j = decay_json(m_half);
  j["kind"] = "toy_decay_detector";
  j["N"] = n_half;
  return j;
}

json custom_json() {
  return json::parse(R"({
    "kind": "custom",
    "dim": 2,
    "kets": {
      "psi0": [[0.7071067811865476, 0.0], [0.7071067811865476, 0.0]]
    },
    "unitaries": {
      "U": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]
    },
    "projectors": {
      "up":   [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]],
      "down": [[[0.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]
    },
    "families": {
      "F": {
        "initial": "psi0",
        "propagators": ["U"],
        "histories": [
          {"events": [{"t": 1, "projector": "up"}]},
          {"events": [{"t": 1, "projector": "down"}]}
        ]
      }
    },
    "evolve": {"initial": "psi0", "steps": ["U"]}
  })");
}

bool throws_mentioning(const json& j, const std::string& needle) {
  try {
    build_model(j);
  } catch (const Error& e) {
    return std::string(e.what()).find(needle) != std::string::npos;
  }
  return false;
}

}  // namespace

TEST_CASE("toy decay models materialize the lattice") {
  const Model m = build_model(decay_json(4));
  CHECK(m.kind == ModelKind::toy_decay);
  CHECK(m.dim == 9);
  REQUIRE(m.basis_labels.size() == 9);
  CHECK(m.basis_labels.front() == "m=-4");
  CHECK(m.basis_labels.back() == "m=4");
  REQUIRE(m.kets.count("psi0") == 1);
  CHECK(std::abs(m.kets.at("psi0").amp(4) - Complex(1, 0)) < 1e-15);
  REQUIRE(m.unitaries.count("T") == 1);
  CHECK(m.unitaries.at("T").is_unitary());
  CHECK(m.evolve_initial == "psi0");
  CHECK(m.evolve_repeats);
  CHECK(m.families.empty());
}

TEST_CASE("toy model parsing reports structural and value errors") {
  json j = decay_json(4);
  j.erase("M");
  CHECK_THROWS_AS(build_model(j), ParseError);

  j = decay_json(4);
  j["alpha"] = 0.9;
  CHECK_THROWS_AS(build_model(j), ParseError);

  j = decay_json(0);
  CHECK_THROWS_AS(build_model(j), ValidationError);

  j = decay_json(4);
  j["alpha"] = json::array({0.94868, 0.0});
  j["beta"] = json::array({0.31623, 0.0});
  CHECK(throws_mentioning(j, "alpha"));
}

TEST_CASE("detector models couple the two rings") {
  const Model m = build_model(detector_json(4, 2));
  CHECK(m.kind == ModelKind::toy_decay_detector);
  CHECK(m.dim == 9 * 5);
  CHECK(m.trigger_site == 2);
  CHECK(m.basis_labels.front() == "m=-4,n=-2");
  REQUIRE(m.unitaries.count("T") == 1);
  CHECK(m.unitaries.at("T").is_unitary());

  // psi0 sits at the origin of both rings
  const ToyLattice lat(4, Complex(std::sqrt(0.9), 0), Complex(std::sqrt(0.1), 0));
  const ToyDetector det(2);
  CHECK(std::abs(m.kets.at("psi0").amp(product_index(lat, det, 0, 0)) -
                 Complex(1, 0)) < 1e-15);

  json j = detector_json(4, 2);
  j.erase("N");
  CHECK_THROWS_AS(build_model(j), ParseError);

  j = detector_json(4, 2);
  j["trigger_site"] = 9;
  CHECK(throws_mentioning(j, "trigger_site"));

  j = detector_json(4, 2);
  j["trigger_site"] = -1;
  CHECK_NOTHROW(build_model(j));
}

TEST_CASE("the beam experiment loads with its stock families") {
  json j;
  j["kind"] = "stern_gerlach";
  const Model m = build_model(j);
  CHECK(m.kind == ModelKind::stern_gerlach);
  CHECK(m.dim == 24);
  CHECK(m.basis_labels.front() == "z+|p0|ready");
  CHECK(m.unitaries.size() == 3);
  CHECK(m.projectors.count("c") == 1);
  REQUIRE(m.families.size() == 6);
  CHECK(m.evolve_repeats == false);
  REQUIRE(m.evolve_steps.size() == 3);

  const HistoryFamily fa = realize_family(m, "Fa");
  const auto probs = probabilities(fa);
  REQUIRE(probs.size() == 2);
  CHECK(std::abs(probs[0].value - 0.5) < 1e-9);
  CHECK(probs[0].label == "u@t2,U@t3");

  CHECK_THROWS_AS(realize_family(m, "Fz"), ValidationError);
}

TEST_CASE("custom models resolve names into validated objects") {
  const Model m = build_model(custom_json());
  CHECK(m.kind == ModelKind::custom);
  CHECK(m.dim == 2);
  CHECK(m.basis_labels == std::vector<std::string>{"0", "1"});
  const HistoryFamily f = realize_family(m, "F");
  const auto probs = probabilities(f);
  CHECK(std::abs(probs[0].value - 0.5) < 1e-12);
  CHECK(probs[0].label == "up@t1");
}

TEST_CASE("custom model errors carry the JSON path") {
  json j = custom_json();
  j["unitaries"]["U"][0][0] = json::array({0.5, 0.0});
  CHECK(throws_mentioning(j, "/unitaries/U"));

  j = custom_json();
  j["projectors"]["up"][0][0] = json::array({0.5, 0.0});
  CHECK(throws_mentioning(j, "/projectors/up"));

  j = custom_json();
  j["kets"]["psi0"] = json::parse("[[1.0, 0.0]]");
  CHECK(throws_mentioning(j, "/kets/psi0"));

  j = custom_json();
  j["families"]["F"]["histories"][0]["events"][0]["projector"] = "sideways";
  CHECK(throws_mentioning(j, "sideways"));

  j = custom_json();
  j["families"]["F"]["initial"] = "phi";
  CHECK(throws_mentioning(j, "/families/F/initial"));

  j = custom_json();
  j["families"]["F"]["propagators"] = json::array({"V"});
  CHECK(throws_mentioning(j, "unknown unitary"));

  j = custom_json();
  j["evolve"]["initial"] = "phi";
  CHECK(throws_mentioning(j, "/evolve/initial"));

  j = custom_json();
  j["evolve"] = json::parse(R"({"initial": "psi0", "steps": ["V"]})");
  CHECK(throws_mentioning(j, "unknown unitary"));
}

TEST_CASE("structural JSON problems raise parse errors") {
  CHECK_THROWS_AS(build_model(json::parse("[]")), ParseError);
  CHECK_THROWS_AS(build_model(json::parse(R"({"kind": "quantum"})")),
                  ParseError);
  CHECK_THROWS_AS(build_model(json::parse(R"({"kind": "custom"})")),
                  ParseError);

  json j = custom_json();
  j["dim"] = "two";
  CHECK_THROWS_AS(build_model(j), ParseError);

  j = custom_json();
  j["kets"] = json::array();
  CHECK_THROWS_AS(build_model(j), ParseError);

  j = custom_json();
  j["families"]["F"].erase("histories");
  CHECK_THROWS_AS(build_model(j), ParseError);

  j = custom_json();
  j["basis_labels"] = json::array({"only one"});
  CHECK_THROWS_AS(build_model(j), ParseError);
}

TEST_CASE("families violating the calculus are rejected at load time") {
  // up at t1 alone is not exhaustive on the superposed initial state
  json j = custom_json();
  j["families"]["F"]["histories"].erase(1);
  CHECK_THROWS_AS(build_model(j), ValidationError);
}

TEST_CASE("model files load from disk with clear failure modes") {
  const std::string path = "model_io_test_tmp.json";
  {
    std::ofstream out(path);
    out << custom_json().dump(2);
  }
  const Model m = load_model(path);
  CHECK(m.dim == 2);
  std::remove(path.c_str());

  CHECK_THROWS_AS(load_model("no_such_file_here.json"), ParseError);

  {
    std::ofstream out(path);
    out << "{ not json";
  }
  CHECK_THROWS_AS(load_model(path), ParseError);
  std::remove(path.c_str());
}

TEST_CASE("export writes a custom model that reloads identically") {
  const Model m = build_model(custom_json());
  const json out = export_model(m);
  CHECK(out.at("kind") == "custom");

  const Model back = build_model(out);
  CHECK(back.dim == m.dim);
  CHECK(back.kets.size() == m.kets.size());
  CHECK(back.unitaries.size() == m.unitaries.size());
  CHECK(back.projectors.size() == m.projectors.size());
  CHECK(back.families.size() == m.families.size());
  CHECK(back.evolve_initial == m.evolve_initial);
  CHECK(back.evolve_repeats == m.evolve_repeats);

  // entries survive bit for bit
  for (const auto& [name, k] : m.kets) {
    const Vector& a = k.vec();
    const Vector& b = back.kets.at(name).vec();
    REQUIRE(a.size() == b.size());
    for (Index i = 0; i < a.size(); ++i) CHECK(a(i) == b(i));
  }
  for (const auto& [name, u] : m.unitaries) {
    const Matrix& a = u.mat();
    const Matrix& b = back.unitaries.at(name).mat();
    for (Index r = 0; r < a.rows(); ++r)
      for (Index c = 0; c < a.cols(); ++c) CHECK(a(r, c) == b(r, c));
  }

  // a second export of the reloaded model prints the same bytes
  CHECK(export_model(back).dump() == out.dump());
}

TEST_CASE("built-in models export to equivalent custom models") {
  const Model m = build_model(decay_json(3));
  const json out = export_model(m);
  const Model back = build_model(out);
  CHECK(back.kind == ModelKind::custom);
  CHECK(back.dim == m.dim);
  CHECK(back.basis_labels == m.basis_labels);
  CHECK(back.evolve_repeats);
  REQUIRE(back.evolve_steps == std::vector<std::string>{"T"});
  const Matrix& a = m.unitaries.at("T").mat();
  const Matrix& b = back.unitaries.at("T").mat();
  for (Index r = 0; r < a.rows(); ++r)
    for (Index c = 0; c < a.cols(); ++c) CHECK(a(r, c) == b(r, c));

  // the beam model's families survive the trip
  json sg;
  sg["kind"] = "stern_gerlach";
  const Model beam = build_model(sg);
  const Model beam_back = build_model(export_model(beam));
  REQUIRE(beam_back.families.size() == 6);
  const auto probs = probabilities(realize_family(beam_back, "Fc"));
  CHECK(std::abs(probs[0].value - 0.5) < 1e-9);
}
