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

// Model catalog: a driven two-level atom, an alkali atom in a magnetic field,
// a system in a strongly damped cavity and a cavity-coupled lambda system,
// together with closed forms of their eliminated coefficients.
//
// Basis conventions:
//   two-level      (|e>, |g>)
//   lambda         (|e>, |+>, |->)
//   oscillator     Fock |0> ... |N-1>
//   composite      system (x) oscillator, system index outermost
//   alkali         atom (x) spin, channels (x, y, z) -> (0, 1, 2)

#pragma once

#include <cmath>
#include <string>
#include <variant>

#include "qsde_elim/eliminate.hpp"
#include "qsde_elim/linalg.hpp"
#include "qsde_elim/model.hpp"

namespace qsde::catalog {

struct PauliOps {
  Operator sp, sm, sx, sy, sz, pe, pg;
};

inline PauliOps pauli_ops() {
  const cplx i(0.0, 1.0);
  PauliOps p;
  p.sp = Operator::Zero(2, 2);
  p.sp(0, 1) = 1.0;
  p.sm = p.sp.adjoint();
  p.sx = p.sp + p.sm;
  p.sy = -i * p.sp + i * p.sm;
  p.sz = p.sp * p.sm - p.sm * p.sp;
  p.pe = p.sp * p.sm;
  p.pg = p.sm * p.sp;
  return p;
}

/// Three-level lambda system: sp_plus = |e><+|, sp_minus = |e><-|.
struct LambdaOps {
  Operator sp_plus, sp_minus, sm_plus, sm_minus, p_plus, p_minus, p_e;
};

inline LambdaOps lambda_ops() {
  LambdaOps l;
  l.sp_plus = Operator::Zero(3, 3);
  l.sp_plus(0, 1) = 1.0;
  l.sp_minus = Operator::Zero(3, 3);
  l.sp_minus(0, 2) = 1.0;
  l.sm_plus = l.sp_plus.adjoint();
  l.sm_minus = l.sp_minus.adjoint();
  l.p_plus = l.sm_plus * l.sp_plus;
  l.p_minus = l.sm_minus * l.sp_minus;
  l.p_e = l.sp_plus * l.sm_plus;
  return l;
}

/// Truncated oscillator: b|n> = sqrt(n)|n-1>.
struct OscillatorOps {
  Eigen::Index N = 0;
  Operator b, bdag;

  Operator number() const { return bdag * b; }
  /// |n><n|
  Operator fock_projector(Eigen::Index n) const {
    Operator p = Operator::Zero(N, N);
    p(n, n) = 1.0;
    return p;
  }
};

inline OscillatorOps oscillator_ops(Eigen::Index n_levels) {
  if (n_levels < 2) throw InvalidParameters("oscillator truncation N must be >= 2");
  OscillatorOps o;
  o.N = n_levels;
  o.b = Operator::Zero(n_levels, n_levels);
  for (Eigen::Index n = 1; n < n_levels; ++n) o.b(n - 1, n) = std::sqrt(static_cast<double>(n));
  o.bdag = o.b.adjoint();
  return o;
}

// ---------------------------------------------------------------------------
// Parameter sets

struct TwoLevelParams {
  double delta = 1.0;
  double gamma = 1.0;
  cplx alpha = 0.5;
};

struct AlkaliParams {
  double delta = 1.0;
  double gamma = 1.0;
  double bx = 0.0, by = 0.0, bz = 0.0;
};

/// E_ij are operators on the intracavity system with E_ij^dag = E_ji and
/// |E11| < gamma / 2.
struct CavityParams {
  double gamma = 1.0;
  Operator e00, e01, e10, e11;
  Eigen::Index N = 4;

  /// Two-level instance: E11 = 0.2 sz, E10 = 0.3 sm, E01 = E10^dag, E00 = 0.1 sx.
  static CavityParams default_instance() {
    const PauliOps p = pauli_ops();
    CavityParams c;
    c.gamma = 1.0;
    c.e11 = 0.2 * p.sz;
    c.e10 = 0.3 * p.sm;
    c.e01 = c.e10.adjoint();
    c.e00 = 0.1 * p.sx;
    c.N = 4;
    return c;
  }
};

struct LambdaParams {
  double gamma = 1.0;
  double g = 2.0;
  cplx alpha = 0.4;
  Eigen::Index N = 4;
};

using ExampleSpec = std::variant<TwoLevelParams, AlkaliParams, CavityParams, LambdaParams>;

// ---------------------------------------------------------------------------
// Model builders

namespace detail {
inline ScaledModel single_channel(Eigen::Index d) {
  ScaledModel m;
  m.dim = d;
  m.channels = 1;
  m.Y = m.A = m.B = zero(d);
  m.F = {zero(d)};
  m.G = {zero(d)};
  m.W = OperatorGrid::identity(1, d);
  return m;
}
}  // namespace detail

inline ScaledModel two_level_atom(const TwoLevelParams& p) {
  if (!(p.gamma >= 0)) throw InvalidParameters("two_level: gamma must be >= 0");
  const cplx i(0.0, 1.0);
  const PauliOps s = pauli_ops();
  ScaledModel m = detail::single_channel(2);
  m.Y = (-i * p.delta - p.gamma / 2.0) * s.pe;
  m.A = -i * p.alpha * s.sp - i * std::conj(p.alpha) * s.sm;
  m.F[0] = std::sqrt(p.gamma) * s.sm;
  return m;
}

inline ScaledModel alkali_atom(const AlkaliParams& p) {
  if (!(p.gamma >= 0)) throw InvalidParameters("alkali: gamma must be >= 0");
  const cplx i(0.0, 1.0);
  const PauliOps s = pauli_ops();
  const Operator id2 = identity(2);
  ScaledModel m;
  m.dim = 4;
  m.channels = 3;
  m.Y = kron((-i * p.delta - 1.5 * p.gamma) * s.pe, id2);
  m.A = zero(4);
  m.B = kron(id2, -i * (p.bx * s.sx + p.by * s.sy + p.bz * s.sz));
  const Operator* sigma[3] = {&s.sx, &s.sy, &s.sz};
  for (const Operator* sig : sigma) {
    m.F.push_back(std::sqrt(p.gamma) * kron(s.sm, *sig));
    m.G.push_back(zero(4));
  }
  m.W = OperatorGrid::identity(3, 4);
  return m;
}

inline void validate(const CavityParams& p) {
  const Eigen::Index h = p.e00.rows();
  for (const Operator* e : {&p.e00, &p.e01, &p.e10, &p.e11}) {
    if (e->rows() != h || e->cols() != h || h == 0) {
      throw InvalidParameters("cavity_system: E_ij must be square and equally sized");
    }
    if (!e->allFinite()) throw InvalidParameters("cavity_system: non-finite E_ij");
  }
  const double herm_tol = 1e-12 * std::max(1.0, p.e00.norm() + p.e01.norm() + p.e11.norm());
  if ((p.e00 - p.e00.adjoint()).norm() > herm_tol || (p.e11 - p.e11.adjoint()).norm() > herm_tol ||
      (p.e01 - p.e10.adjoint()).norm() > herm_tol) {
    throw InvalidParameters("cavity_system: require E_ij^dag = E_ji");
  }
  if (!(spectral_norm(p.e11) < p.gamma / 2.0)) {
    throw InvalidParameters("cavity_system: require |E11| < gamma/2");
  }
  if (p.N < 2) throw InvalidParameters("cavity_system: N must be >= 2");
}

inline ScaledModel cavity_system(const CavityParams& p) {
  validate(p);
  const cplx i(0.0, 1.0);
  const OscillatorOps o = oscillator_ops(p.N);
  const Eigen::Index h = p.e00.rows();
  const Operator ih = identity(h);
  ScaledModel m = detail::single_channel(h * p.N);
  m.Y = kron(-i * p.e11 - (p.gamma / 2.0) * ih, o.number());
  m.A = -i * (kron(p.e10, o.bdag) + kron(p.e01, o.b));
  m.B = kron(-i * p.e00, identity(p.N));
  m.F[0] = std::sqrt(p.gamma) * kron(ih, o.b);
  return m;
}

inline ScaledModel lambda_system(const LambdaParams& p) {
  if (!(p.gamma > 0)) throw InvalidParameters("lambda_system: gamma must be > 0");
  if (p.g == 0.0) throw InvalidParameters("lambda_system: g must be nonzero");
  const LambdaOps l = lambda_ops();
  const OscillatorOps o = oscillator_ops(p.N);
  const Operator i3 = identity(3);
  const Operator iN = identity(p.N);
  ScaledModel m = detail::single_channel(3 * p.N);
  m.Y = -(p.gamma / 2.0) * kron(i3, o.number()) +
        p.g * (kron(l.sp_plus, o.b) - kron(l.sm_plus, o.bdag));
  m.A = kron(p.alpha * l.sp_minus - std::conj(p.alpha) * l.sm_minus, iN);
  m.F[0] = std::sqrt(p.gamma) * kron(i3, o.b);
  return m;
}

inline ScaledModel build(const ExampleSpec& spec) {
  return std::visit(
      [](const auto& p) -> ScaledModel {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, TwoLevelParams>) return two_level_atom(p);
        else if constexpr (std::is_same_v<T, AlkaliParams>) return alkali_atom(p);
        else if constexpr (std::is_same_v<T, CavityParams>) return cavity_system(p);
        else return lambda_system(p);
      },
      spec);
}

inline std::string name_of(const ExampleSpec& spec) {
  switch (spec.index()) {
    case 0: return "two_level";
    case 1: return "alkali";
    case 2: return "cavity_system";
    default: return "lambda_system";
  }
}

// ---------------------------------------------------------------------------
// Closed forms of the eliminated coefficients

/// K = -|a|^2/(i D + g/2) Pg, L = -i a sqrt(g)/(i D + g/2) Pg,
/// S = (i D - g/2)/(i D + g/2) Pg.
inline CoefficientSet two_level_limit(const TwoLevelParams& p) {
  const cplx i(0.0, 1.0);
  const PauliOps s = pauli_ops();
  const cplx den = i * p.delta + p.gamma / 2.0;
  CoefficientSet c;
  c.dim = 2;
  c.channels = 1;
  c.K = (-std::norm(p.alpha) / den) * s.pg;
  c.L = {(-i * p.alpha * std::sqrt(p.gamma) / den) * s.pg};
  c.S = OperatorGrid(1, 2);
  c.S(0, 0) = ((i * p.delta - p.gamma / 2.0) / den) * s.pg;
  c.ground = Projector::checked(s.pg);
  return c;
}

/// K = -i Pg (x) B.sigma, L_i = 0,
/// S_ij = Pg (x) (delta_ij - g/(i D + 3g/2) sigma_i sigma_j).
inline CoefficientSet alkali_limit(const AlkaliParams& p) {
  const cplx i(0.0, 1.0);
  const PauliOps s = pauli_ops();
  const Operator* sigma[3] = {&s.sx, &s.sy, &s.sz};
  const cplx frac = p.gamma / (i * p.delta + 1.5 * p.gamma);
  CoefficientSet c;
  c.dim = 4;
  c.channels = 3;
  c.K = kron(s.pg, -i * (p.bx * s.sx + p.by * s.sy + p.bz * s.sz));
  c.L = {zero(4), zero(4), zero(4)};
  c.S = OperatorGrid(3, 4);
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = 0; b < 3; ++b) {
      Operator inner = -frac * (*sigma[a]) * (*sigma[b]);
      if (a == b) inner += identity(2);
      c.S(a, b) = kron(s.pg, inner);
    }
  }
  c.ground = Projector::checked(kron(s.pg, identity(2)));
  return c;
}

/// With M = i E11 + g/2 and P0 = I (x) |0><0|:
/// K = -i E00 P0 - E01 M^-1 E10 P0, L = -i sqrt(g) M^-1 E10 P0,
/// S = (i E11 - g/2) M^-1 P0.
inline CoefficientSet cavity_limit(const CavityParams& p) {
  validate(p);
  const cplx i(0.0, 1.0);
  const OscillatorOps o = oscillator_ops(p.N);
  const Eigen::Index h = p.e00.rows();
  const Operator ih = identity(h);
  const Operator minv = (i * p.e11 + (p.gamma / 2.0) * ih).inverse();
  const Operator vac = o.fock_projector(0);
  CoefficientSet c;
  c.dim = h * p.N;
  c.channels = 1;
  c.K = kron(-i * p.e00 - p.e01 * minv * p.e10, vac);
  c.L = {kron(-i * std::sqrt(p.gamma) * minv * p.e10, vac)};
  c.S = OperatorGrid(1, c.dim);
  c.S(0, 0) = kron((i * p.e11 - (p.gamma / 2.0) * ih) * minv, vac);
  c.ground = Projector::checked(kron(ih, vac));
  return c;
}

/// K = -|a|^2 g_/(2 g^2) P- (x) |0><0|, L = -(sqrt(gamma) a / g) |+><-| (x) |0><0|,
/// S = P0 - 2 P- (x) |0><0|. The sqrt(gamma) in L is the value consistent
/// with K + K^dag = -L^dag L.
inline CoefficientSet lambda_limit(const LambdaParams& p) {
  const LambdaOps l = lambda_ops();
  const OscillatorOps o = oscillator_ops(p.N);
  const Operator vac = o.fock_projector(0);
  const Operator p0 = kron(l.p_plus + l.p_minus, vac);
  CoefficientSet c;
  c.dim = 3 * p.N;
  c.channels = 1;
  c.K = (-std::norm(p.alpha) * p.gamma / (2.0 * p.g * p.g)) * kron(l.p_minus, vac);
  c.L = {(-std::sqrt(p.gamma) * p.alpha / p.g) * kron(l.sm_plus * l.sp_minus, vac)};
  c.S = OperatorGrid(1, c.dim);
  c.S(0, 0) = p0 - 2.0 * kron(l.p_minus, vac);
  c.ground = Projector::checked(p0);
  return c;
}

inline CoefficientSet closed_form_limit(const ExampleSpec& spec) {
  return std::visit(
      [](const auto& p) -> CoefficientSet {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, TwoLevelParams>) return two_level_limit(p);
        else if constexpr (std::is_same_v<T, AlkaliParams>) return alkali_limit(p);
        else if constexpr (std::is_same_v<T, CavityParams>) return cavity_limit(p);
        else return lambda_limit(p);
      },
      spec);
}

/// Inverse of Y on the invariant block H_n = span{|+,n>, |-,n>, |e,n-1>},
/// 1 <= n <= N-1, in that basis:
///   -(1/d) [[g_(n-1)/2, 0, -g sqrt(n)], [0, 2d/(g_ n), 0], [g sqrt(n), 0, g_ n/2]]
/// with d = g_^2 n (n-1)/4 + g^2 n (g_ = gamma).
inline Operator lambda_block_inverse(double gamma, double g, int n) {
  const double dn = static_cast<double>(n);
  const double d = gamma * gamma * dn * (dn - 1.0) / 4.0 + g * g * dn;
  Operator m = Operator::Zero(3, 3);
  m(0, 0) = gamma * (dn - 1.0) / 2.0;
  m(0, 2) = -g * std::sqrt(dn);
  m(1, 1) = 2.0 * d / (gamma * dn);
  m(2, 0) = g * std::sqrt(dn);
  m(2, 2) = gamma * dn / 2.0;
  return (-1.0 / d) * m;
}

/// Indices of the H_n basis (|+,n>, |-,n>, |e,n-1>) in the composite space.
inline std::array<Eigen::Index, 3> lambda_block_indices(Eigen::Index N, Eigen::Index n) {
  // composite index = atom * N + fock, atom order (e, +, -)
  return {1 * N + n, 2 * N + n, 0 * N + (n - 1)};
}

/// Ground amplitude <g| exp(-i (k a sp + k conj(a) sm + k^2 D Pe) t) |g> of the
/// undamped atom, by direct 2x2 exponentiation.
inline cplx decoupled_propagator_oracle(double delta, cplx alpha, double k, double t) {
  const cplx i(0.0, 1.0);
  const PauliOps s = pauli_ops();
  const Operator h = k * alpha * s.sp + k * std::conj(alpha) * s.sm + k * k * delta * s.pe;
  const Operator u = expm(-i * t * h);
  return u(1, 1);
}

}  // namespace qsde::catalog
