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

// Vacuum-expectation semigroups of the scaled and limit evolutions and the
// distances that quantify convergence of the former to the latter.
//
// The skew generator pairs the limit coefficients (dagger side) with the
// k-instantiated ones (right side):
//   Lk(X) = K^dag X + X K(k) + L_i^dag X L_i(k).
// For v in the ground space,
//   |(U(k)_t - U_t) v (x) vacuum|^2 = <v, (2I - T(P0) - T(P0)^dag) v>,
// with T = exp(t Lk). Coherent inputs are handled through the displaced
// coefficients, one generator per segment of a step drive.

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <vector>

#include "qsde_elim/eliminate.hpp"
#include "qsde_elim/linalg.hpp"
#include "qsde_elim/model.hpp"

namespace qsde {

/// Abort threshold for negative values of the distance quadratic form.
inline constexpr double kMaxDistanceClamp = 1e-6;

struct GeneratorPair {
  Eigen::Index dim = 0;
  Superoperator skew{0};
  Superoperator limit{0};
  double k = 0.0;
};

/// X -> Kl^dag X + X Kr + Ll_i^dag X Lr_i.
inline Superoperator semigroup_generator(const CoefficientSet& left, const CoefficientSet& right) {
  if (left.dim != right.dim || left.channels != right.channels) {
    throw DimensionMismatch("semigroup_generator: coefficient sets differ in shape");
  }
  const Operator id = identity(left.dim);
  Superoperator g = assemble_superoperator(left.K.adjoint(), id);
  g += assemble_superoperator(id, right.K);
  for (std::size_t i = 0; i < left.channels; ++i) {
    g += assemble_superoperator(left.L[i].adjoint(), right.L[i]);
  }
  return g;
}

/// Same map as semigroup_generator, applied directly to one operator.
inline Operator apply_generator(const CoefficientSet& left, const CoefficientSet& right,
                                const Operator& x) {
  Operator out = left.K.adjoint() * x + x * right.K;
  for (std::size_t i = 0; i < left.channels; ++i) out += left.L[i].adjoint() * x * right.L[i];
  return out;
}

inline GeneratorPair build_generators(const ScaledModel& m, const EliminationResult& e, double k) {
  if (m.dim != e.limit.dim || m.channels != e.limit.channels) {
    throw DimensionMismatch("build_generators: model and elimination result differ in shape");
  }
  const CoefficientSet ck = instantiate(m, k);
  return {m.dim, semigroup_generator(e.limit, ck), semigroup_generator(e.limit, e.limit), k};
}

/// unvec(exp(t g) vec(X0)).
inline Operator evolve(const Superoperator& g, const Operator& x0, double t) {
  if (!(t >= 0)) throw InvalidArgument("evolve: t must be >= 0");
  if (t == 0.0) return x0;
  const Operator e = expm(t * g.matrix());
  return unvec(e * vec(x0), g.dim());
}

// ---------------------------------------------------------------------------
// Step drives

/// Piecewise-constant coherent amplitude: amplitudes[j] on
/// [breakpoints[j], breakpoints[j+1]).
struct StepDrive {
  std::vector<double> breakpoints;
  std::vector<Amplitude> amplitudes;

  static StepDrive constant(const Amplitude& a, double until) {
    return {{0.0, until}, {a}};
  }

  /// The same constant amplitude split into `pieces` equal segments.
  static StepDrive constant(const Amplitude& a, double until, int pieces) {
    StepDrive d;
    for (int j = 0; j <= pieces; ++j) d.breakpoints.push_back(until * j / pieces);
    d.breakpoints.back() = until;
    d.amplitudes.assign(static_cast<std::size_t>(pieces), a);
    return d;
  }

  void validate(std::size_t channels) const {
    if (breakpoints.size() < 2 || amplitudes.size() + 1 != breakpoints.size()) {
      throw InvalidArgument("StepDrive: need m+1 breakpoints for m amplitudes, m >= 1");
    }
    if (breakpoints.front() != 0.0) throw InvalidArgument("StepDrive: first breakpoint must be 0");
    for (std::size_t j = 1; j < breakpoints.size(); ++j) {
      if (!(breakpoints[j] > breakpoints[j - 1]) || !std::isfinite(breakpoints[j])) {
        throw InvalidArgument("StepDrive: breakpoints must be finite and strictly increasing");
      }
    }
    for (const auto& a : amplitudes) detail::require_amplitude(channels, a);
  }

  double end() const { return breakpoints.back(); }
};

// ---------------------------------------------------------------------------
// Distances

struct DistanceSeries {
  std::vector<double> t;
  std::vector<double> distance;
  /// Largest magnitude of a negative quadratic-form value that was clamped to 0.
  double max_clamp = 0.0;

  double sup() const {
    double s = 0.0;
    for (double d : distance) s = std::max(s, d);
    return s;
  }
};

/// Normalized projection of (1, ..., 1) onto the ground space; falls back to
/// the first basis vector of the range if that projection vanishes.
inline StateVector default_ground_vector(const Projector& p0) {
  if (p0.rank() == 0) throw InvalidGroundVector("ground space is empty");
  StateVector v = p0.op() * StateVector::Ones(p0.dim());
  if (v.norm() < 1e-8) v = p0.range_basis().col(0);
  return v / v.norm();
}

namespace detail {

inline void require_ground_vector(const Decomposition& dec, const StateVector& v) {
  if (v.size() != dec.P0.dim()) throw InvalidGroundVector("ground vector has the wrong length");
  if (std::abs(v.norm() - 1.0) > 1e-9) throw InvalidGroundVector("ground vector is not normalized");
  const double leak = (dec.P1.op() * v).norm();
  if (leak > 1e-9) {
    std::ostringstream os;
    os << "vector leaves the ground space: |P1 v| = " << leak;
    throw InvalidGroundVector(os.str());
  }
}

struct Segment {
  double start = 0.0;
  double end = 0.0;
  Operator generator;  // d^2 x d^2
};

/// Evaluates sqrt(<v,(2I - T_t - T_t^dag) v>) on an ascending grid, where
/// T_t is the composition of segment semigroups applied to P0 with earlier
/// segments outermost. Uses the covector form <v, T v> = vec(v v^dag)^dag T vec(P0):
/// completed segments fold into the covector, the current one propagates P0.
/// Propagation runs in long double: the generators are stiff at large k and
/// the quadratic form is a difference of O(1) numbers.
inline DistanceSeries distance_series(const std::vector<Segment>& segments, const Projector& p0,
                                      const StateVector& v, const std::vector<double>& t_grid) {
  DistanceSeries out;
  out.t = t_grid;
  out.distance.reserve(t_grid.size());
  const Operator vv = v * v.adjoint();
  StateVectorX covector = vec(vv).cast<std::complex<long double>>();
  const StateVectorX start = vec(p0.op()).cast<std::complex<long double>>();
  // <v, P0 v> equals |v|^2 for ground vectors and cancels exactly at t = 0
  const long double vnorm2 = covector.dot(start).real();

  std::size_t seg = 0;
  double tau_prev = 0.0;
  StateVectorX p = start;
  double cached_step = -1.0;
  OperatorX step_map;
  std::vector<OperatorX> generators;
  generators.reserve(segments.size());
  for (const auto& sg : segments) generators.push_back(sg.generator.cast<std::complex<long double>>());

  for (std::size_t idx = 0; idx < t_grid.size(); ++idx) {
    const double t = t_grid[idx];
    if (!(t >= 0)) throw InvalidArgument("distance: times must be >= 0");
    if (idx > 0 && t < t_grid[idx - 1]) throw InvalidArgument("distance: t grid must be ascending");
    if (t > segments.back().end * (1.0 + 1e-14)) {
      throw InvalidArgument("distance: t beyond the end of the drive");
    }
    while (seg + 1 < segments.size() && t >= segments[seg].end) {
      // fold the completed segment into the covector
      const double len = segments[seg].end - segments[seg].start;
      const OperatorX full = expm_extended(static_cast<long double>(len) * generators[seg]);
      covector = full.adjoint() * covector;
      ++seg;
      tau_prev = 0.0;
      p = start;
      cached_step = -1.0;
    }
    const double tau = t - segments[seg].start;
    const double delta = tau - tau_prev;
    if (delta > 0.0) {
      if (std::abs(delta - cached_step) > 1e-12 * std::max(1.0, delta)) {
        step_map = expm_extended(static_cast<long double>(delta) * generators[seg]);
        cached_step = delta;
      }
      p = step_map * p;
      tau_prev = tau;
    }
    const std::complex<long double> overlap = covector.dot(p);  // conjugates the covector
    const double q = static_cast<double>(2.0L * vnorm2 - 2.0L * overlap.real());
    if (q < 0.0) {
      out.max_clamp = std::max(out.max_clamp, -q);
      if (-q > kMaxDistanceClamp) {
        std::ostringstream os;
        os << "distance quadratic form is negative beyond roundoff (" << q << ")";
        throw Error(os.str());
      }
    }
    out.distance.push_back(std::sqrt(std::max(0.0, q)));
  }
  return out;
}

}  // namespace detail

/// Vacuum distance |(U(k)_t - U_t) v (x) vacuum| at each time of `t_grid`.
inline DistanceSeries vacuum_distance(const ScaledModel& m, const EliminationResult& e, double k,
                                      const StateVector& v, const std::vector<double>& t_grid) {
  detail::require_ground_vector(e.decomposition, v);
  if (t_grid.empty()) return {};
  const GeneratorPair g = build_generators(m, e, k);
  const double horizon = *std::max_element(t_grid.begin(), t_grid.end());
  std::vector<detail::Segment> segs{{0.0, std::max(horizon, 1e-300), g.skew.matrix()}};
  return detail::distance_series(segs, e.decomposition.P0, v, t_grid);
}

/// Skew generator for a constant coherent amplitude: both coefficient sets
/// Weyl-conjugated, P0 and Y1inv unchanged.
inline Superoperator displaced_skew_generator(const ScaledModel& m, const EliminationResult& e,
                                              double k, const Amplitude& a) {
  const CoefficientSet lim = weyl_conjugate(e.limit, a);
  const CoefficientSet ck = weyl_conjugate(instantiate(m, k), a);
  return semigroup_generator(lim, ck);
}

/// Distance on v (x) coherent(f) for a step drive f, over an ascending grid
/// with every time <= drive.end().
inline DistanceSeries coherent_distance_series(const ScaledModel& m, const EliminationResult& e,
                                               double k, const StateVector& v,
                                               const StepDrive& drive,
                                               const std::vector<double>& t_grid) {
  detail::require_ground_vector(e.decomposition, v);
  drive.validate(m.channels);
  std::vector<detail::Segment> segs;
  for (std::size_t j = 0; j < drive.amplitudes.size(); ++j) {
    segs.push_back({drive.breakpoints[j], drive.breakpoints[j + 1],
                    displaced_skew_generator(m, e, k, drive.amplitudes[j]).matrix()});
  }
  return detail::distance_series(segs, e.decomposition.P0, v, t_grid);
}

/// Single-time coherent distance, composing full segment propagators.
inline double coherent_distance(const ScaledModel& m, const EliminationResult& e, double k,
                                const StateVector& v, const StepDrive& drive, double t) {
  return coherent_distance_series(m, e, k, v, drive, {t}).distance.front();
}

// ---------------------------------------------------------------------------
// Generator convergence with the perturbative corrector X(k) = X + X1/k + X2/k^2

struct KurtzCorrector {
  Operator X1;
  Operator X2;
};

namespace detail {

inline void require_ground_supported(const Decomposition& dec, const Operator& x) {
  if (x.rows() != dec.P0.dim() || x.cols() != dec.P0.dim()) {
    throw DimensionMismatch("corrector: operator has the wrong dimension");
  }
  const Operator& p0 = dec.P0.op();
  const double off = (x - p0 * x * p0).norm();
  if (off > 1e-10 * std::max(1.0, x.norm())) {
    throw InvalidArgument("corrector: X must satisfy X = P0 X P0");
  }
}

/// L0(X) = K^dag X + X B + L_i^dag X G_i
inline Operator order0(const ScaledModel& m, const CoefficientSet& lim, const Operator& x) {
  Operator out = lim.K.adjoint() * x + x * m.B;
  for (std::size_t i = 0; i < m.channels; ++i) out += lim.L[i].adjoint() * x * m.G[i];
  return out;
}

/// L1(X) = X A + L_i^dag X F_i
inline Operator order1(const ScaledModel& m, const CoefficientSet& lim, const Operator& x) {
  Operator out = x * m.A;
  for (std::size_t i = 0; i < m.channels; ++i) out += lim.L[i].adjoint() * x * m.F[i];
  return out;
}

}  // namespace detail

/// X1 = -L1(X) Y1inv P1,  X2 = -(L0(X) + L1(X1)) Y1inv P1.
inline KurtzCorrector kurtz_corrector(const EliminationResult& e, const ScaledModel& m,
                                      const Operator& x) {
  detail::require_ground_supported(e.decomposition, x);
  const Operator yp = e.decomposition.Y1inv * e.decomposition.P1.op();
  const Operator x1 = -detail::order1(m, e.limit, x) * yp;
  const Operator x2 = -(detail::order0(m, e.limit, x) + detail::order1(m, e.limit, x1)) * yp;
  return {x1, x2};
}

struct GeneratorResidual {
  double k = 0.0;
  double corrected = 0.0;    // |Lk(X + X1/k + X2/k^2) - L(X)|_F
  double uncorrected = 0.0;  // |Lk(X) - L(X)|_F
};

inline std::vector<GeneratorResidual> generator_convergence_check(
    const ScaledModel& m, const EliminationResult& e, const Operator& x,
    const std::vector<double>& ks) {
  const KurtzCorrector corr = kurtz_corrector(e, m, x);
  const Operator target = apply_generator(e.limit, e.limit, x);
  std::vector<GeneratorResidual> out;
  out.reserve(ks.size());
  for (double k : ks) {
    if (!(k > 0)) throw InvalidArgument("generator_convergence_check: k must be > 0");
    const CoefficientSet ck = instantiate(m, k);
    const Operator xk = x + corr.X1 / k + corr.X2 / (k * k);
    out.push_back({k, (apply_generator(e.limit, ck, xk) - target).norm(),
                   (apply_generator(e.limit, ck, x) - target).norm()});
  }
  return out;
}

/// Least-squares slope of log(values) against log(ks); NaN if any value is
/// not strictly positive or fewer than two points are given.
inline double loglog_slope(const std::vector<double>& ks, const std::vector<double>& values) {
  if (ks.size() != values.size() || ks.size() < 2) return std::nan("");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(ks.size());
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (!(ks[i] > 0) || !(values[i] > 0)) return std::nan("");
    const double lx = std::log(ks[i]);
    const double ly = std::log(values[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) return std::nan("");
  return (n * sxy - sx * sy) / den;
}

// ---------------------------------------------------------------------------
// Sweeps

struct ConvergenceReport {
  std::vector<double> ks;
  std::vector<double> t_grid;
  std::vector<std::vector<double>> distances;  // [k index][t index]
  std::vector<double> sup_distance;
  double max_clamp = 0.0;
};

inline std::vector<double> uniform_grid(double horizon, int steps) {
  if (!(horizon > 0)) throw InvalidArgument("time grid: horizon must be > 0");
  if (steps < 2) throw InvalidArgument("time grid: need at least 2 points");
  std::vector<double> t(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) t[static_cast<std::size_t>(i)] = horizon * i / (steps - 1);
  t.back() = horizon;
  return t;
}

/// Distance table over ks x uniform grid of `steps` points in [0, horizon];
/// coherent when a drive is given.
inline ConvergenceReport k_sweep(const ScaledModel& m, const EliminationResult& e,
                                 const StateVector& v, const std::vector<double>& ks,
                                 double horizon, int steps,
                                 const std::optional<StepDrive>& drive = std::nullopt) {
  if (ks.empty()) throw InvalidArgument("k_sweep: ks must be non-empty");
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (!(ks[i] >= 0)) throw InvalidArgument("k_sweep: ks must be >= 0");
    if (i > 0 && !(ks[i] > ks[i - 1])) throw InvalidArgument("k_sweep: ks must be increasing");
  }
  if (drive && horizon > drive->end()) {
    throw InvalidArgument("k_sweep: horizon exceeds the end of the drive");
  }
  ConvergenceReport rep;
  rep.ks = ks;
  rep.t_grid = uniform_grid(horizon, steps);
  for (double k : ks) {
    const DistanceSeries s = drive ? coherent_distance_series(m, e, k, v, *drive, rep.t_grid)
                                   : vacuum_distance(m, e, k, v, rep.t_grid);
    rep.distances.push_back(s.distance);
    rep.sup_distance.push_back(s.sup());
    rep.max_clamp = std::max(rep.max_clamp, s.max_clamp);
  }
  return rep;
}

}  // namespace qsde
