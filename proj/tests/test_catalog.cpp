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

using namespace catalog;

double max_entry(const Operator& a) { return a.cwiseAbs().maxCoeff(); }

double entrywise(const CoefficientSet& a, const CoefficientSet& b) {
  double d = max_entry(a.K - b.K);
  for (std::size_t i = 0; i < a.channels; ++i) d = std::max(d, max_entry(a.L[i] - b.L[i]));
  for (std::size_t i = 0; i < a.channels; ++i)
    for (std::size_t j = 0; j < a.channels; ++j) d = std::max(d, max_entry(a.S(i, j) - b.S(i, j)));
  return d;
}

TEST(Operators, PauliAlgebra) {
  const PauliOps s = pauli_ops();
  EXPECT_EQ(s.sp(0, 1), cplx(1.0));
  EXPECT_LE((s.sx * s.sy - cplx(0, 1) * s.sz).norm(), 1e-15);
  EXPECT_LE((s.pe + s.pg - identity(2)).norm(), 0.0);
}

TEST(Operators, OscillatorLadder) {
  const OscillatorOps o = oscillator_ops(5);
  EXPECT_NEAR(o.b(2, 3).real(), std::sqrt(3.0), 1e-15);
  for (int n = 0; n < 5; ++n) EXPECT_NEAR(o.number()(n, n).real(), n, 1e-14);
  EXPECT_THROW(oscillator_ops(1), InvalidParameters);
}

TEST(TwoLevelLimit, ClosedFormGrid) {
  const std::vector<TwoLevelParams> grid{{1.0, 1.0, 0.5}, {2.0, 0.5, 1.0}, {-1.0, 2.0, cplx(0, 0.3)}};
  for (const auto& p : grid) {
    const EliminationResult e = eliminate(two_level_atom(p));
    EXPECT_LE(entrywise(e.limit, two_level_limit(p)), 1e-10) << p.delta;
  }
}

TEST(TwoLevelLimit, GroundEntryOfK) {
  // K = -|a|^2/(i + 1/2) Pg = -0.25 (0.5 - i)/1.25 = -0.1 + 0.2 i
  const EliminationResult e = eliminate(two_level_atom({1.0, 1.0, 0.5}));
  EXPECT_NEAR(std::abs(e.limit.K(1, 1) - cplx(-0.1, 0.2)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(e.limit.K(0, 0)), 0.0, 1e-15);
}

TEST(AlkaliLimit, ClosedForm) {
  for (const AlkaliParams& p : {AlkaliParams{1.0, 1.0, 0.2, 0.0, 0.4}, AlkaliParams{-2.0, 0.5, 0.0, 1.0, 0.0},
                                AlkaliParams{0.5, 3.0, 0.3, -0.7, 0.1}}) {
    const EliminationResult e = eliminate(alkali_atom(p));
    EXPECT_LE(entrywise(e.limit, alkali_limit(p)), 1e-10);
  }
  const EliminationResult zero_field = eliminate(alkali_atom({1.0, 1.0, 0.0, 0.0, 0.0}));
  EXPECT_LE(zero_field.limit.K.norm(), 1e-14);
  for (const auto& l : zero_field.limit.L) EXPECT_LE(l.norm(), 1e-14);
}

TEST(CavityLimit, ClosedForm) {
  const PauliOps s = pauli_ops();
  std::vector<CavityParams> pts{CavityParams::default_instance()};
  CavityParams b = CavityParams::default_instance();
  b.gamma = 2.0;
  b.e11 = 0.7 * s.sx;
  b.e10 = cplx(0.2, 0.4) * s.sp + 0.1 * s.sz;
  b.e01 = b.e10.adjoint();
  b.e00 = 0.3 * s.sy;
  pts.push_back(b);
  CavityParams c = b;
  c.gamma = 0.6;
  c.e11 = 0.1 * s.sz - 0.05 * s.sy;
  c.N = 3;
  pts.push_back(c);
  for (const auto& p : pts) {
    const EliminationResult e = eliminate(cavity_system(p));
    EXPECT_TRUE(e.assumptions_hold());
    EXPECT_LE(entrywise(e.limit, cavity_limit(p)), 1e-10);
  }
}

TEST(CavityLimit, ParameterValidation) {
  CavityParams p = CavityParams::default_instance();
  p.e11 = 0.6 * pauli_ops().sz;  // |E11| >= gamma / 2
  EXPECT_THROW(cavity_system(p), InvalidParameters);
  p = CavityParams::default_instance();
  p.e01 = zero(2);  // E01 != E10^dag
  EXPECT_THROW(cavity_system(p), InvalidParameters);
  p = CavityParams::default_instance();
  p.e00 = zero(3);
  EXPECT_THROW(cavity_system(p), InvalidParameters);
}

TEST(LambdaLimit, ClosedFormAndGroundEntryOfK) {
  for (const LambdaParams& p : {LambdaParams{1.0, 2.0, 0.4, 4}, LambdaParams{2.0, 1.0, cplx(0.1, 0.3), 4},
                                LambdaParams{0.5, 3.0, -0.8, 4}}) {
    const EliminationResult e = eliminate(lambda_system(p));
    EXPECT_TRUE(e.assumptions_hold());
    EXPECT_LE(entrywise(e.limit, lambda_limit(p)), 1e-10);
  }
  const EliminationResult e = eliminate(lambda_system({1.0, 2.0, 0.4, 4}));
  const Eigen::Index minus_vac = 2 * 4 + 0;
  EXPECT_NEAR(std::abs(e.limit.K(minus_vac, minus_vac) - cplx(-0.02)), 0.0, 1e-14);
}

// An L linear in gamma instead of sqrt(gamma) agrees only at
// gamma = 1 and only the sqrt form closes the unitarity relation.
TEST(LambdaLimit, LinearGammaFormMatchesAtUnitGammaOnly) {
  const LambdaOps l = lambda_ops();
  const OscillatorOps o = oscillator_ops(4);
  for (double gamma : {1.0, 2.0}) {
    const LambdaParams p{gamma, 2.0, 0.4, 4};
    CoefficientSet linear_form = lambda_limit(p);
    linear_form.L[0] = (-gamma * p.alpha / p.g) * kron(l.sm_plus * l.sp_minus, o.fock_projector(0));
    const EliminationResult e = eliminate(lambda_system(p));
    if (gamma == 1.0) {
      EXPECT_LE(max_entry(e.limit.L[0] - linear_form.L[0]), 1e-12);
      EXPECT_TRUE(check_limit_unitarity(linear_form).passed);
    } else {
      EXPECT_GT(max_entry(e.limit.L[0] - linear_form.L[0]), 1e-3);
      EXPECT_FALSE(check_limit_unitarity(linear_form).passed);
    }
  }
}

TEST(LambdaLimit, BlockwiseY1inv) {
  for (const LambdaParams& p : {LambdaParams{1.0, 2.0, 0.4, 4}, LambdaParams{2.0, 1.0, 0.1, 5}}) {
    const ScaledModel m = lambda_system(p);
    const Decomposition dec = decompose(m);
    for (Eigen::Index n = 1; n < p.N; ++n) {
      const auto idx = lambda_block_indices(p.N, n);
      const Operator blk = lambda_block_inverse(p.gamma, p.g, static_cast<int>(n));
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          EXPECT_NEAR(std::abs(dec.Y1inv(idx[a], idx[b]) - blk(a, b)), 0.0, 1e-12) << n;
    }
    // H_N = span{|e, N-1>}: inverse -2/(gamma (N-1))
    const Eigen::Index top = p.N - 1;
    EXPECT_NEAR(std::abs(dec.Y1inv(top, top) - cplx(-2.0 / (p.gamma * (p.N - 1)))), 0.0, 1e-12);
  }
}

TEST(Build, NamesAndDispatch) {
  EXPECT_EQ(name_of(ExampleSpec{TwoLevelParams{}}), "two_level");
  EXPECT_EQ(name_of(ExampleSpec{AlkaliParams{}}), "alkali");
  EXPECT_EQ(name_of(ExampleSpec{CavityParams::default_instance()}), "cavity_system");
  EXPECT_EQ(name_of(ExampleSpec{LambdaParams{}}), "lambda_system");
  EXPECT_EQ(build(ExampleSpec{LambdaParams{}}).dim, 12);
  EXPECT_EQ(build(ExampleSpec{AlkaliParams{}}).channels, 3u);
}

TEST(Builders, RejectBadParameters) {
  EXPECT_THROW(two_level_atom({1.0, -1.0, 0.5}), InvalidParameters);
  EXPECT_THROW(lambda_system({1.0, 0.0, 0.4, 4}), InvalidParameters);
  EXPECT_THROW(lambda_system({0.0, 1.0, 0.4, 4}), InvalidParameters);
}

// Undamped atom: exp(-i t k^2 D Pe - i t k (a sp + conj(a) sm)) restricted to
// the ground state tends to exp(i |a|^2 t / D).
TEST(DecoupledOracle, ApproachesIntegratedLimit) {
  const cplx target = std::exp(cplx(0, 0.25));
  // the error oscillates in k; only its envelope shrinks
  for (double k : {20.0, 50.0, 200.0}) {
    const double err = std::abs(decoupled_propagator_oracle(1.0, 0.5, k, 1.0) - target);
    EXPECT_LT(err, 1.0 / k) << k;
  }
  EXPECT_LT(std::abs(decoupled_propagator_oracle(1.0, 0.5, 200.0, 1.0) - target), 0.05);
  // the two-level scaled model with gamma = 0 generates the same propagator
  const ScaledModel m = two_level_atom({1.0, 0.0, 0.5});
  const Operator u = expm(instantiate(m, 200.0).K);
  EXPECT_NEAR(std::abs(u(1, 1) - decoupled_propagator_oracle(1.0, 0.5, 200.0, 1.0)), 0.0, 1e-9);
}

}  // namespace
}  // namespace qsde
