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

// Random scaled models that satisfy every structural assumption by
// construction, plus small random-matrix helpers shared by the tests.

#pragma once

#include <random>

#include <Eigen/QR>

#include "qsde_elim/qsde_elim.hpp"

namespace qsde::testing {

class Rng {
 public:
  explicit Rng(unsigned seed) : gen_(seed) {}

  double normal() { return norm_(gen_); }
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(gen_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }
  cplx complex() { return {normal(), normal()}; }

  Operator matrix(Eigen::Index r, Eigen::Index c, double scale = 1.0) {
    Operator m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
      for (Eigen::Index i = 0; i < r; ++i) m(i, j) = scale * complex();
    return m;
  }
  Operator square(Eigen::Index d, double scale = 1.0) { return matrix(d, d, scale); }

  Operator hermitian(Eigen::Index d, double scale = 1.0) {
    const Operator m = square(d, scale);
    return 0.5 * (m + m.adjoint());
  }

  Operator unitary(Eigen::Index d) {
    Eigen::HouseholderQR<Operator> qr(square(d));
    Operator q = qr.householderQ() * Operator::Identity(d, d);
    // fix the phase ambiguity of QR so the draw is Haar
    const Operator r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < d; ++i) {
      const cplx ph = r(i, i) / std::abs(r(i, i));
      q.col(i) *= ph;
    }
    return q;
  }

 private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> norm_{0.0, 1.0};
};

struct RandomModel {
  ScaledModel model;
  Operator P0;
};

/// Valid scaled model on C^d with an r-dimensional ground space and n
/// channels. With Q = [Q0 | Q1] a random unitary:
///   F_i = P0 F~ P1,  Y = P1 (-1/2 F_i^dag F_i - i H1) P1,
///   A = -i H_A - F_i^dag G_i with P0 H_A P0 = 0,  B = -1/2 G_i^dag G_i - i H_B,
///   G_i with P1 G_i P0 = 0,  W_ij = u_ij P0 + w_ij P1 for unitaries u, w.
inline RandomModel random_model(Rng& rng, Eigen::Index d, Eigen::Index r, std::size_t n,
                                double scale = 0.5) {
  const Operator q = rng.unitary(d);
  const Operator q0 = q.leftCols(r);
  const Operator q1 = q.rightCols(d - r);
  const Operator p0 = q0 * q0.adjoint();
  const Operator p1 = q1 * q1.adjoint();
  const cplx i(0.0, 1.0);

  ScaledModel m;
  m.dim = d;
  m.channels = n;
  Operator ff = zero(d);
  for (std::size_t c = 0; c < n; ++c) {
    const Operator f = p0 * rng.square(d, scale) * p1;
    m.F.push_back(f);
    ff += f.adjoint() * f;
  }
  m.Y = p1 * (-0.5 * ff - i * rng.hermitian(d, scale)) * p1;
  for (std::size_t c = 0; c < n; ++c) {
    const Operator g = rng.square(d, scale);
    m.G.push_back(g - p1 * g * p0);
  }
  Operator ha = rng.hermitian(d, scale);
  ha -= p0 * ha * p0;
  m.A = -i * ha;
  Operator gg = zero(d);
  for (std::size_t c = 0; c < n; ++c) {
    m.A -= m.F[c].adjoint() * m.G[c];
    gg += m.G[c].adjoint() * m.G[c];
  }
  m.B = -0.5 * gg - i * rng.hermitian(d, scale);
  const Operator u = rng.unitary(static_cast<Eigen::Index>(n));
  const Operator w = rng.unitary(static_cast<Eigen::Index>(n));
  m.W = OperatorGrid(n, d);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      m.W(a, b) = u(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) * p0 +
                  w(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) * p1;
  return {m, p0};
}

/// Random valid model with dimensions drawn from small ranges.
inline RandomModel random_model(Rng& rng) {
  const Eigen::Index d = rng.integer(2, 6);
  const Eigen::Index r = rng.integer(1, static_cast<int>(d) - 1);
  const std::size_t n = static_cast<std::size_t>(rng.integer(1, 3));
  return random_model(rng, d, r, n);
}

inline Amplitude random_amplitude(Rng& rng, std::size_t n) {
  std::vector<cplx> v;
  for (std::size_t c = 0; c < n; ++c) v.push_back(rng.complex());
  return Amplitude(std::move(v));
}

}  // namespace qsde::testing
