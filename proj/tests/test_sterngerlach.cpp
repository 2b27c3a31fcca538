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

#include <cmath>

#include <qhist/sterngerlach.hpp>

using namespace qhist;

namespace {

const SGModel& model() {
  static const SGModel m = build_sg_model();
  return m;
}

double amp_at(const Ket& k, int spin, int path, int det) {
  return std::abs(k.amp(SGModel::flat(spin, path, det)));
}

}  // namespace

TEST_CASE("the model lives on a 24-dimensional product space") {
  const SGModel& m = model();
  CHECK(SGModel::kDim == 24);
  CHECK(m.step1.is_unitary());
  CHECK(m.step2.is_unitary());
  CHECK(m.step3.is_unitary());
  CHECK(m.initial.is_normalized());
  CHECK(SGModel::basis_label(SGModel::flat(0, 0, 0)) == "z+|p0|ready");
  CHECK(SGModel::basis_label(SGModel::flat(1, 3, 2)) == "z-|l|L");
  CHECK(SGModel::basis_label(SGModel::flat(0, 2, 1)) == "z+|u|U");
}

TEST_CASE("each step is a permutation of the basis") {
  const SGModel& m = model();
  for (const Operator* s : {&m.step1, &m.step2, &m.step3}) {
    for (Index c = 0; c < SGModel::kDim; ++c) {
      int nonzero = 0;
      for (Index r = 0; r < SGModel::kDim; ++r) {
        const Complex e = s->mat()(r, c);
        if (std::abs(e) > 0.5) {
          ++nonzero;
          CHECK(std::abs(e - Complex(1, 0)) < 1e-15);
        } else {
          CHECK(std::abs(e) < 1e-15);
        }
      }
      CHECK(nonzero == 1);
    }
  }
}

TEST_CASE("step one transports the packet into the magnet") {
  const SGModel& m = model();
  const Ket in = Ket::basis(SGModel::kDim, SGModel::flat(1, 0, 0));
  const Ket out = apply(m.step1, in);
  CHECK(std::abs(amp_at(out, 1, 1, 0) - 1.0) < 1e-15);
}

TEST_CASE("step two routes the spin components to their exits") {
  const SGModel& m = model();
  const Ket up = apply(m.step2, Ket::basis(SGModel::kDim, SGModel::flat(0, 1, 0)));
  CHECK(std::abs(amp_at(up, 0, 2, 0) - 1.0) < 1e-15);
  const Ket down =
      apply(m.step2, Ket::basis(SGModel::kDim, SGModel::flat(1, 1, 0)));
  CHECK(std::abs(amp_at(down, 1, 3, 0) - 1.0) < 1e-15);
  // a packet away from the magnet entrance is left alone
  const Ket idle =
      apply(m.step2, Ket::basis(SGModel::kDim, SGModel::flat(0, 0, 2)));
  CHECK(std::abs(amp_at(idle, 0, 0, 2) - 1.0) < 1e-15);
}

TEST_CASE("step three fires the detector on the occupied beam") {
  const SGModel& m = model();
  const Ket upper =
      apply(m.step3, Ket::basis(SGModel::kDim, SGModel::flat(0, 2, 0)));
  CHECK(std::abs(amp_at(upper, 0, 2, 1) - 1.0) < 1e-15);
  const Ket lower =
      apply(m.step3, Ket::basis(SGModel::kDim, SGModel::flat(1, 3, 0)));
  CHECK(std::abs(amp_at(lower, 1, 3, 2) - 1.0) < 1e-15);
  // no beam at a detector: nothing fires
  const Ket idle =
      apply(m.step3, Ket::basis(SGModel::kDim, SGModel::flat(0, 1, 0)));
  CHECK(std::abs(amp_at(idle, 0, 1, 0) - 1.0) < 1e-15);
}

TEST_CASE("the full run ends in the correlated detector state") {
  const SGModel& m = model();
  const Ket final_state =
      apply(m.step3, apply(m.step2, apply(m.step1, m.initial)));
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(amp_at(final_state, 0, 2, 1) - r) < 1e-12);
  CHECK(std::abs(amp_at(final_state, 1, 3, 2) - r) < 1e-12);
  CHECK(std::abs(final_state.norm() - 1.0) < 1e-12);
}

TEST_CASE("the named projectors form the expected algebra") {
  const SGModel& m = model();
  CHECK(m.projector("z+").rank() == 12);
  CHECK(m.projector("u").rank() == 6);
  CHECK(m.projector("U").rank() == 8);
  CHECK(m.projector("c").rank() == 1);
  CHECK(m.projector("I").rank() == 24);
  CHECK_THROWS_AS(m.projector("w"), ValidationError);

  CHECK(compatible(m.projector("z+"), m.projector("u")));
  CHECK(compatible(m.projector("u"), m.projector("U")));
  CHECK_FALSE(compatible(m.projector("z+"), m.projector("x+")));
  CHECK_FALSE(compatible(m.projector("c"), m.projector("u")));

  // c is exactly the split packet
  const Ket split = apply(m.step2, apply(m.step1, m.initial));
  CHECK(max_abs(Matrix(m.projector("c").mat() -
                       (split.vec() * split.vec().adjoint()))) < 1e-12);
}

TEST_CASE("all stock families are consistent and split the weight evenly") {
  const SGModel& m = model();
  for (const std::string& name : sg_family_names()) {
    const HistoryFamily f = sg_family_by_name(m, name);
    const ConsistencyReport r = check_consistency(f);
    INFO("family " << name);
    CHECK(r.consistent);
    CHECK(r.worst <= 1e-8);
    const auto probs = probabilities(f);
    REQUIRE(probs.size() == 2);
    CHECK(std::abs(probs[0].value - 0.5) < 1e-9);
    CHECK(std::abs(probs[1].value - 0.5) < 1e-9);
    // every stock family resolves the detector, with an even split
    CHECK(std::abs(conditional(f, {}, {{3, "U"}}) - 0.5) < 1e-9);
    CHECK(std::abs(conditional(f, {}, {{3, "L"}}) - 0.5) < 1e-9);
  }
  CHECK_THROWS_AS(sg_family(m, "Fe"), ValidationError);
  CHECK_THROWS_AS(sg_family_variant(m, "Fa"), ValidationError);
}

TEST_CASE("the beam location determines the detector outcome") {
  const SGModel& m = model();
  const HistoryFamily fa = sg_family(m, "Fa");
  CHECK(std::abs(conditional(fa, {{3, "U"}}, {{2, "u"}}) - 1.0) < 1e-9);
  CHECK(std::abs(conditional(fa, {{3, "U"}}, {{2, "l"}}) - 0.0) < 1e-9);
  CHECK(std::abs(conditional(fa, {{3, "L"}}, {{2, "l"}}) - 1.0) < 1e-9);
}

TEST_CASE("the detector outcome reveals the earlier spin within Fc") {
  const SGModel& m = model();
  const HistoryFamily fc = sg_family(m, "Fc");
  CHECK(std::abs(conditional(fc, {{3, "U"}}, {{1, "z+"}}) - 1.0) < 1e-9);
  CHECK(std::abs(conditional(fc, {{3, "L"}}, {{1, "z-"}}) - 1.0) < 1e-9);

  // dropping the beam events changes nothing about the t1 retrodiction
  const HistoryFamily fc_prime = sg_family_variant(m, "Fc_prime");
  CHECK(std::abs(conditional(fc_prime, {{3, "U"}}, {{1, "z+"}}) - 1.0) < 1e-9);
}

TEST_CASE("within Fd the x+ property holds on both branches") {
  const SGModel& m = model();
  const HistoryFamily fd = sg_family(m, "Fd");
  CHECK(std::abs(conditional(fd, {}, {{1, "x+"}}) - 1.0) < 1e-9);
  CHECK(std::abs(conditional(fd, {{3, "U"}}, {{1, "x+"}}) - 1.0) < 1e-9);

  // pinning the beam location leaves the x+ conclusion intact
  const HistoryFamily fd_prime = sg_family_variant(m, "Fd_prime");
  CHECK(std::abs(conditional(fd_prime, {{3, "U"}}, {{1, "x+"}}) - 1.0) < 1e-9);
}

TEST_CASE("beam samples and the coherent packet cannot be combined") {
  const SGModel& m = model();
  const HistoryFamily fa = sg_family(m, "Fa");
  const HistoryFamily fb = sg_family(m, "Fb");
  CHECK_THROWS_AS(combine_families(fa, fb), IncompatibilityError);
  try {
    combine_families(fa, fb);
  } catch (const IncompatibilityError& e) {
    CHECK(e.time() == 2);
    const bool names_c = e.first() == "c" || e.second() == "c";
    CHECK(names_c);
  }
}

TEST_CASE("the z and x spin families cannot be combined") {
  const SGModel& m = model();
  const HistoryFamily fc = sg_family(m, "Fc");
  const HistoryFamily fd = sg_family(m, "Fd");
  try {
    combine_families(fc, fd);
    FAIL("expected an incompatibility");
  } catch (const IncompatibilityError& e) {
    CHECK(e.time() == 1);
  }

  // pinning the beam location in Fd does not cure the spin clash
  const HistoryFamily fd_prime = sg_family_variant(m, "Fd_prime");
  try {
    combine_families(fd_prime, fc);
    FAIL("expected an incompatibility");
  } catch (const IncompatibilityError& e) {
    CHECK(e.time() == 1);
  }
}

TEST_CASE("combining comparable families keeps the finer one") {
  const SGModel& m = model();
  const HistoryFamily fa = sg_family(m, "Fa");
  const HistoryFamily fc = sg_family(m, "Fc");

  const HistoryFamily same = combine_families(fa, fa);
  REQUIRE(same.size() == 2);
  CHECK(same.history(0).label() == fa.history(0).label());

  const HistoryFamily finer = combine_families(fa, fc);
  REQUIRE(finer.size() == 2);
  CHECK(finer.history(0).label() == "z+@t1,u@t2,U@t3");
  CHECK(finer.history(1).label() == "z-@t1,l@t2,L@t3");

  const HistoryFamily fc_prime = sg_family_variant(m, "Fc_prime");
  const HistoryFamily merged = combine_families(fc, fc_prime);
  REQUIRE(merged.size() == 2);
  CHECK(merged.history(0).label() == "z+@t1,u@t2,U@t3");
}

TEST_CASE("combining Fb with Fd interpolates both constraints") {
  const SGModel& m = model();
  const HistoryFamily fb = sg_family(m, "Fb");
  const HistoryFamily fd = sg_family(m, "Fd");
  const HistoryFamily g = combine_families(fb, fd);
  REQUIRE(g.size() == 2);
  CHECK(g.history(0).label() == "x+@t1,c@t2,U@t3");
  CHECK(g.history(1).label() == "x+@t1,c@t2,L@t3");
  const auto probs = probabilities(g);
  CHECK(std::abs(probs[0].value - 0.5) < 1e-9);
  CHECK(std::abs(probs[1].value - 0.5) < 1e-9);

  // marginals of the refinement agree with each parent's
  CHECK(std::abs(conditional(g, {}, {{1, "x+"}}) -
                 conditional(fd, {}, {{1, "x+"}})) < 1e-9);
  CHECK(std::abs(conditional(g, {}, {{2, "c"}}) -
                 conditional(fb, {}, {{2, "c"}})) < 1e-9);
  CHECK(std::abs(conditional(g, {}, {{3, "U"}}) -
                 conditional(fd, {}, {{3, "U"}})) < 1e-9);
  CHECK(std::abs(conditional(g, {}, {{3, "L"}}) -
                 conditional(fb, {}, {{3, "L"}})) < 1e-9);
}
