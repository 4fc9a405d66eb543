// Copyright 2026 The qsde-elim Authors
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

#include <gtest/gtest.h>

#include "support/random_model.hpp"

namespace qsde {
namespace {

using testing::Rng;

double coeff_distance(const CoefficientSet& a, const CoefficientSet& b) {
  double d = (a.K - b.K).norm();
  for (std::size_t i = 0; i < a.channels; ++i) d = std::max(d, (a.L[i] - b.L[i]).norm());
  for (std::size_t i = 0; i < a.channels; ++i)
    for (std::size_t j = 0; j < a.channels; ++j) d = std::max(d, (a.S(i, j) - b.S(i, j)).norm());
  return d;
}

TEST(Decompose, TwoLevel) {
  const catalog::TwoLevelParams p{1.0, 1.0, 0.5};
  const Decomposition dec = decompose(catalog::two_level_atom(p));
  const catalog::PauliOps s = catalog::pauli_ops();
  EXPECT_LE((dec.P0.op() - s.pg).norm(), 1e-14);
  EXPECT_LE((dec.P1.op() - s.pe).norm(), 1e-14);
  const cplx expected = 1.0 / cplx(-p.gamma / 2.0, -p.delta);
  EXPECT_NEAR(std::abs(dec.Y1inv(0, 0) - expected), 0.0, 1e-14);
  EXPECT_LE((dec.Y1inv - dec.Y1inv(0, 0) * s.pe).norm(), 1e-14);
}

TEST(Decompose, OverrideShapeChecked) {
  const ScaledModel m = catalog::two_level_atom({});
  EXPECT_THROW(decompose(m, 1e-9, Operator(zero(3))), DimensionMismatch);
}

TEST(Decompose, SingularRestrictionOnNilpotentY) {
  ScaledModel m = catalog::two_level_atom({});
  m.Y = zero(2);
  m.Y(0, 1) = 1.0;
  EXPECT_THROW(decompose(m), SingularRestriction);
}

TEST(Assumption3, CatalogPasses) {
  for (const catalog::ExampleSpec& s :
       {catalog::ExampleSpec{catalog::TwoLevelParams{}}, catalog::ExampleSpec{catalog::AlkaliParams{}},
        catalog::ExampleSpec{catalog::CavityParams::default_instance()},
        catalog::ExampleSpec{catalog::LambdaParams{}}}) {
    const EliminationResult e = eliminate(catalog::build(s));
    EXPECT_TRUE(e.assumption3.passed) << catalog::name_of(s);
    EXPECT_TRUE(e.assumption4.passed) << catalog::name_of(s);
    EXPECT_TRUE(e.lemma.passed) << catalog::name_of(s);
  }
}

TEST(Assumption3, FLeakingIntoGroundIsNamed) {
  ScaledModel m = catalog::two_level_atom({});
  m.F[0](1, 1) = 0.3;  // F P0 != 0
  const EliminationResult e = eliminate(m);
  EXPECT_FALSE(e.assumption3.passed);
  const Residual* r = e.assumption3.find("F_i P0 = 0 [i=1]");
  ASSERT_NE(r, nullptr);
  EXPECT_NEAR(r->value, 0.3, 1e-14);
}

TEST(Assumption3, GroundDiagonalAIsNamed) {
  ScaledModel m = catalog::two_level_atom({});
  m.A(1, 1) = cplx(0, 0.7);
  const EliminationResult e = eliminate(m);
  EXPECT_FALSE(e.assumption3.passed);
  EXPECT_NEAR(e.assumption3.find("P0 A P0 = 0")->value, 0.7, 1e-14);
}

TEST(Assumption3, WrongOverrideFailsIdentities) {
  const ScaledModel m = catalog::two_level_atom({1.0, 1.0, 0.5});
  const Decomposition good = decompose(m);
  const EliminationResult e = eliminate(m, 1e-9, 1e-9, Operator(2.0 * good.Y1inv));
  EXPECT_FALSE(e.assumption3.passed);
  EXPECT_GT(e.assumption3.find("Y Y1inv P1 Z P0 = P1 Z P0 [Z=A]")->value, 0.1);
  // the exact inverse supplied by hand passes
  EXPECT_TRUE(eliminate(m, 1e-9, 1e-9, good.Y1inv).assumption3.passed);
}

TEST(Assumption4, DetectsExcitedLeak) {
  const ScaledModel m = catalog::two_level_atom({});
  const Decomposition dec = decompose(m);
  CoefficientSet lim = limit_coefficients(m, dec);
  EXPECT_TRUE(check_assumption4(lim, dec).passed);
  lim.L[0](0, 1) = 0.25;
  const CheckReport r = check_assumption4(lim, dec);
  EXPECT_FALSE(r.passed);
  EXPECT_NEAR(r.find("P1 L_i = 0 [i=1]")->value, 0.25, 1e-14);
}

TEST(Eliminate, ZeroYKeepsEverythingAsGround) {
  testing::Rng rng(3);
  const testing::RandomModel rm = testing::random_model(rng, 3, 1, 1);
  ScaledModel m = rm.model;
  m.Y = zero(3);
  m.A = zero(3);
  m.F = {zero(3)};
  const EliminationResult e = eliminate(m);
  EXPECT_EQ(e.decomposition.P0.rank(), 3);
  EXPECT_LE(e.decomposition.Y1inv.norm(), 0.0);
  EXPECT_LE((e.limit.K - m.B).norm(), 1e-14);
  EXPECT_LE((e.limit.L[0] - m.G[0]).norm(), 1e-14);
}

TEST(Eliminate, TrivialKernelGivesEmptyLimitWithNote) {
  ScaledModel m = catalog::two_level_atom({});
  m.Y = -identity(2);
  m.A = zero(2);
  m.F = {zero(2)};
  const EliminationResult e = eliminate(m);
  EXPECT_EQ(e.decomposition.P0.rank(), 0);
  EXPECT_LE(e.limit.K.norm(), 0.0);
  ASSERT_FALSE(e.notes.empty());
}

TEST(Eliminate, IllConditionedSplitIsNoted) {
  ScaledModel m = catalog::two_level_atom({1.0, 1.0, 0.5});
  m.Y = zero(2);
  m.Y(0, 0) = 1.0;
  m.Y(1, 1) = 5e-9;
  const EliminationResult e = eliminate(m);
  bool found = false;
  for (const auto& n : e.notes) found = found || n.find("ill-conditioned") != std::string::npos;
  EXPECT_TRUE(found);
}

TEST(Displace, ZeroAmplitudeIsIdentity) {
  const ScaledModel m = catalog::two_level_atom({1.0, 1.0, 0.5});
  const ScaledModel d = displace_scaled(m, Amplitude::zero(1));
  EXPECT_LE((d.A - m.A).norm() + (d.B - m.B).norm() + (d.G[0] - m.G[0]).norm(), 0.0);
  const CoefficientSet lim = eliminate(m).limit;
  EXPECT_LE(coeff_distance(displace_limit(lim, Amplitude::zero(1)), lim), 0.0);
}

TEST(Displace, AmplitudeLengthChecked) {
  const ScaledModel m = catalog::two_level_atom({});
  EXPECT_THROW(displace_scaled(m, Amplitude::zero(2)), DimensionMismatch);
  EXPECT_THROW(displace_limit(eliminate(m).limit, Amplitude({cplx(std::nan(""), 0)})),
               InvalidArgument);
}

// Coefficient-level formula for the two-level atom written out by hand:
// G = a W = a I, A gains conj(a) F - a F^dag.
TEST(Displace, TwoLevelByHand) {
  const cplx a(0.3, -0.2);
  const ScaledModel m = catalog::two_level_atom({1.0, 1.0, 0.5});
  const ScaledModel d = displace_scaled(m, Amplitude({a}));
  EXPECT_LE((d.G[0] - a * identity(2)).norm(), 1e-15);
  EXPECT_LE((d.A - (m.A + std::conj(a) * m.F[0] - a * m.F[0].adjoint())).norm(), 1e-15);
  // B gains conj(a)(W - 1)a + conj(a) G - a G^dag W, all zero here
  EXPECT_LE(d.B.norm(), 1e-15);
}

TEST(Displace, CommutesWithEliminationOnRandomModels) {
  Rng rng(21);
  for (int rep = 0; rep < 20; ++rep) {
    const testing::RandomModel rm = testing::random_model(rng);
    const Amplitude a = testing::random_amplitude(rng, rm.model.channels);
    const EliminationResult e = eliminate(rm.model);
    const EliminationResult ed = eliminate(displace_scaled(rm.model, a));
    EXPECT_LE(coeff_distance(ed.limit, displace_limit(e.limit, a)), 1e-9);
    EXPECT_LE((ed.decomposition.P0.op() - e.decomposition.P0.op()).norm(), 1e-9);
  }
}

TEST(WeylConjugate, PreservesUnitarityWhereDisplaceLimitDoesNot) {
  Rng rng(22);
  for (int rep = 0; rep < 20; ++rep) {
    const testing::RandomModel rm = testing::random_model(rng);
    const Amplitude a = testing::random_amplitude(rng, rm.model.channels);
    const CoefficientSet ck = instantiate(rm.model, rng.uniform(0.5, 5.0));
    EXPECT_TRUE(check_hp_unitarity(weyl_conjugate(ck, a)).passed);
    const EliminationResult e = eliminate(rm.model);
    EXPECT_TRUE(check_limit_unitarity(weyl_conjugate(e.limit, a)).passed);
  }
  // scalar counterexample: L = 1, S = 1, K = -1/2, a = 1 gives K + K^dag = -1
  // but |L + S a|^2 = 4
  CoefficientSet c;
  c.dim = 1;
  c.channels = 1;
  c.K = Operator::Constant(1, 1, -0.5);
  c.L = {Operator::Constant(1, 1, 1.0)};
  c.S = OperatorGrid::identity(1, 1);
  EXPECT_TRUE(check_hp_unitarity(c).passed);
  EXPECT_FALSE(check_hp_unitarity(displace_limit(c, Amplitude({1.0}))).passed);
  EXPECT_TRUE(check_hp_unitarity(weyl_conjugate(c, Amplitude({1.0}))).passed);
}

TEST(WeylConjugate, OnlyShiftsLByClosure) {
  const CoefficientSet lim = eliminate(catalog::two_level_atom({1.0, 1.0, 0.5})).limit;
  const Amplitude a({cplx(0.3, 0.1)});
  const CoefficientSet w = weyl_conjugate(lim, a);
  const CoefficientSet d = displace_limit(lim, a);
  EXPECT_LE((w.K - d.K).norm(), 0.0);
  EXPECT_LE((w.L[0] - (d.L[0] - a[0] * lim.ground->op())).norm(), 1e-15);
}

}  // namespace
}  // namespace qsde
