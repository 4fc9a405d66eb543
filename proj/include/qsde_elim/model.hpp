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

// Scaled QSDE families K(k) = k^2 Y + k A + B, L_i(k) = k F_i + G_i,
// S_ij(k) = W_ij, instantiated coefficient sets and the unitarity checkers.
// Repeated channel indices are summed throughout.

#pragma once

#include <algorithm>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qsde_elim/linalg.hpp"

namespace qsde {

/// n x n grid of d x d operators, indexed (i, j).
class OperatorGrid {
 public:
  OperatorGrid() = default;
  OperatorGrid(std::size_t n, Eigen::Index d)
      : n_(n), cells_(n * n, Operator::Zero(d, d)) {}

  /// W_ij = delta_ij * I.
  static OperatorGrid identity(std::size_t n, Eigen::Index d) {
    OperatorGrid g(n, d);
    for (std::size_t i = 0; i < n; ++i) g(i, i) = Operator::Identity(d, d);
    return g;
  }

  std::size_t size() const noexcept { return n_; }
  Operator& operator()(std::size_t i, std::size_t j) { return cells_.at(i * n_ + j); }
  const Operator& operator()(std::size_t i, std::size_t j) const {
    return cells_.at(i * n_ + j);
  }
  auto begin() const { return cells_.begin(); }
  auto end() const { return cells_.end(); }

  /// The grid as one (n d) x (n d) block matrix.
  Operator block() const {
    if (n_ == 0) return Operator(0, 0);
    const Eigen::Index d = cells_.front().rows();
    const auto n = static_cast<Eigen::Index>(n_);
    Operator out(n * d, n * d);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        out.block(static_cast<Eigen::Index>(i) * d, static_cast<Eigen::Index>(j) * d, d, d) =
            (*this)(i, j);
      }
    }
    return out;
  }

 private:
  std::size_t n_ = 0;
  std::vector<Operator> cells_;
};

struct ScaledModel {
  Eigen::Index dim = 0;
  std::size_t channels = 0;
  Operator Y, A, B;
  std::vector<Operator> F, G;
  OperatorGrid W;

  /// Shape and finiteness; throws DimensionMismatch / InvalidOperator.
  void validate() const {
    auto check = [this](const Operator& op, const char* name) {
      if (op.rows() != dim || op.cols() != dim) {
        std::ostringstream os;
        os << "ScaledModel: " << name << " is " << op.rows() << "x" << op.cols()
           << ", expected " << dim << "x" << dim;
        throw DimensionMismatch(os.str());
      }
      require_finite(op, name);
    };
    if (dim <= 0) throw DimensionMismatch("ScaledModel: dim must be positive");
    check(Y, "Y");
    check(A, "A");
    check(B, "B");
    if (F.size() != channels || G.size() != channels || W.size() != channels) {
      throw DimensionMismatch("ScaledModel: F, G, W must have `channels` entries");
    }
    for (const auto& f : F) check(f, "F_i");
    for (const auto& g : G) check(g, "G_i");
    for (const auto& w : W) check(w, "W_ij");
  }
};

/// QSDE coefficient triple (K, L_i, S_ij). `ground` is set for limit models,
/// whose unitarity relations close on P0 instead of I.
struct CoefficientSet {
  Eigen::Index dim = 0;
  std::size_t channels = 0;
  Operator K;
  std::vector<Operator> L;
  OperatorGrid S;
  std::optional<Projector> ground;

  /// The operator that plays the role of delta_ij in the relations.
  Operator closure() const { return ground ? ground->op() : identity(dim); }
};

struct Residual {
  std::string name;
  double value = 0.0;
};

struct CheckReport {
  bool passed = true;
  double tolerance = 0.0;
  std::vector<Residual> residuals;
  std::vector<std::string> notes;

  void add(std::string name, double value) {
    residuals.push_back({std::move(name), value});
    if (!(value <= tolerance)) passed = false;
  }
  double max_residual() const {
    double m = 0.0;
    for (const auto& r : residuals) m = std::max(m, r.value);
    return m;
  }
  const Residual* find(const std::string& name) const {
    for (const auto& r : residuals) {
      if (r.name == name) return &r;
    }
    return nullptr;
  }
};

namespace detail {

inline double max_norm(std::initializer_list<const Operator*> ops) {
  double m = 0.0;
  for (const auto* op : ops) m = std::max(m, op->norm());
  return m;
}

inline double effective_tol(double tol, double scale) {
  return tol * std::max(1.0, scale);
}

/// Frobenius residuals of sum_l S_il S_jl^dag = delta_ij C and
/// sum_l S_li^dag S_lj = delta_ij C, as block matrices.
inline std::pair<double, double> grid_unitarity(const OperatorGrid& s,
                                                const Operator& c) {
  const std::size_t n = s.size();
  if (n == 0) return {0.0, 0.0};
  const Operator blk = s.block();
  OperatorGrid diag(n, c.rows());
  for (std::size_t i = 0; i < n; ++i) diag(i, i) = c;
  const Operator target = diag.block();
  return {(blk * blk.adjoint() - target).norm(),
          (blk.adjoint() * blk - target).norm()};
}

}  // namespace detail

/// K = k^2 Y + k A + B, L_i = k F_i + G_i, S_ij = W_ij.
inline CoefficientSet instantiate(const ScaledModel& m, double k) {
  if (!(k >= 0)) throw InvalidArgument("instantiate: k must be >= 0");
  CoefficientSet c;
  c.dim = m.dim;
  c.channels = m.channels;
  c.K = k * k * m.Y + k * m.A + m.B;
  c.L.reserve(m.channels);
  for (std::size_t i = 0; i < m.channels; ++i) c.L.push_back(k * m.F[i] + m.G[i]);
  c.S = m.W;
  return c;
}

namespace detail {

inline CheckReport unitarity_report(const CoefficientSet& c, const Operator& closure,
                                    double tol, const std::string& closure_name) {
  double scale = c.K.norm();
  for (const auto& l : c.L) scale = std::max(scale, l.squaredNorm());
  for (const auto& s : c.S) scale = std::max(scale, s.norm());
  CheckReport rep;
  rep.tolerance = effective_tol(tol, scale);

  Operator lhs = c.K + c.K.adjoint();
  for (const auto& l : c.L) lhs += l.adjoint() * l;
  rep.add("K+K^dag = -L_i^dag L_i", lhs.norm());
  const auto [row, col] = grid_unitarity(c.S, closure);
  rep.add("S_il S_jl^dag = delta_ij " + closure_name, row);
  rep.add("S_li^dag S_lj = delta_ij " + closure_name, col);
  return rep;
}

}  // namespace detail

/// The three Hudson-Parthasarathy relations with closure I.
inline CheckReport check_hp_unitarity(const CoefficientSet& c,
                                      double tol = kDefaultCheckTol) {
  if (c.ground) throw InvalidArgument("check_hp_unitarity: coefficient set has a ground projector");
  return detail::unitarity_report(c, identity(c.dim), tol, "I");
}

/// The same relations closed on the ground projector of a limit model.
inline CheckReport check_limit_unitarity(const CoefficientSet& c,
                                         double tol = kDefaultCheckTol) {
  if (!c.ground) throw InvalidArgument("check_limit_unitarity: ground projector missing");
  // revalidate: a projector may have been assembled by hand
  const Projector p = Projector::checked(c.ground->op());
  if (p.dim() != c.dim) throw InvalidProjector("check_limit_unitarity: projector dimension");
  return detail::unitarity_report(c, p.op(), tol, "P0");
}

/// Unitarity of the k-independent scattering grid W.
inline CheckReport check_channel_unitarity(const ScaledModel& m,
                                           double tol = kDefaultCheckTol) {
  CheckReport rep;
  double scale = 0.0;
  for (const auto& w : m.W) scale = std::max(scale, w.norm());
  rep.tolerance = detail::effective_tol(tol, scale);
  const auto [row, col] = detail::grid_unitarity(m.W, identity(m.dim));
  rep.add("W_il W_jl^dag = delta_ij I", row);
  rep.add("W_li^dag W_lj = delta_ij I", col);
  return rep;
}

/// Order-by-order dissipativity identities. Since K+K^dag+L^dag L is a
/// polynomial in k, these three hold iff the first Hudson-Parthasarathy
/// relation holds for every k >= 0.
inline CheckReport check_scaling_consistency(const ScaledModel& m,
                                             double tol = kDefaultCheckTol) {
  double scale = std::max({m.Y.norm(), m.A.norm(), m.B.norm()});
  for (const auto& f : m.F) scale = std::max(scale, f.squaredNorm());
  for (const auto& g : m.G) scale = std::max(scale, g.squaredNorm());
  CheckReport rep;
  rep.tolerance = detail::effective_tol(tol, scale);

  Operator order2 = m.Y + m.Y.adjoint();
  Operator order1 = m.A + m.A.adjoint();
  Operator order0 = m.B + m.B.adjoint();
  for (std::size_t i = 0; i < m.channels; ++i) {
    order2 += m.F[i].adjoint() * m.F[i];
    order1 += m.F[i].adjoint() * m.G[i] + m.G[i].adjoint() * m.F[i];
    order0 += m.G[i].adjoint() * m.G[i];
  }
  rep.add("Y+Y^dag = -F_i^dag F_i", order2.norm());
  rep.add("A+A^dag = -(F_i^dag G_i + G_i^dag F_i)", order1.norm());
  rep.add("B+B^dag = -G_i^dag G_i", order0.norm());

  if (!rep.passed) {
    // The projected forms P1(.)P0 and P0(.)P0 are what the limit actually
    // uses; tell the user when only those survive.
    const Projector p0 = kernel_projector(m.Y);
    const Operator& q0 = p0.op();
    const Operator q1 = identity(m.dim) - q0;
    const double proj1 = (q1 * order1 * q0).norm();
    const double proj0 = (q0 * order0 * q0).norm();
    if (order2.norm() <= rep.tolerance && proj1 <= rep.tolerance &&
        proj0 <= rep.tolerance) {
      rep.notes.push_back(
          "full-space identities fail but the ground-projected forms hold");
    }
  }
  return rep;
}

}  // namespace qsde
