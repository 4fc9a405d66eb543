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

// Dense complex kernel: numerical kernels, restricted inverses, the matrix
// exponential and superoperator assembly.
//
// Vectorization convention: vec(X) stacks the COLUMNS of X. It coincides
// with the memory layout of a column-major Eigen matrix, so
//   vec(L X R) = (R^T kron L) vec(X).
// Every superoperator in this library uses that convention.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "qsde_elim/errors.hpp"

namespace qsde {

using cplx = std::complex<double>;
using Operator = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;

inline constexpr double kDefaultRankTol = 1e-9;
inline constexpr double kDefaultCheckTol = 1e-9;

inline Operator identity(Eigen::Index d) { return Operator::Identity(d, d); }
inline Operator zero(Eigen::Index d) { return Operator::Zero(d, d); }
inline Operator dagger(const Operator& a) { return a.adjoint(); }

inline bool all_finite(const Operator& a) { return a.allFinite(); }

/// Tensor product a (x) b, with a acting on the left (outer) factor.
inline Operator kron(const Operator& a, const Operator& b) {
  Operator out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline void require_finite(const Operator& a, const char* what) {
  if (!a.allFinite()) {
    throw InvalidOperator(std::string(what) + ": non-finite entries");
  }
}

inline void require_square(const Operator& a, const char* what) {
  if (a.rows() != a.cols()) {
    std::ostringstream os;
    os << what << ": expected a square matrix, got " << a.rows() << "x"
       << a.cols();
    throw DimensionMismatch(os.str());
  }
}

inline void require_same_dim(const Operator& a, const Operator& b,
                             const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream os;
    os << what << ": dimension mismatch (" << a.rows() << "x" << a.cols()
       << " vs " << b.rows() << "x" << b.cols() << ")";
    throw DimensionMismatch(os.str());
  }
}

/// Frobenius norm of A - B; the residual metric used by every checker.
/// It bounds the spectral norm from above.
inline double op_distance(const Operator& a, const Operator& b) {
  require_same_dim(a, b, "op_distance");
  return (a - b).norm();
}

inline double spectral_norm(const Operator& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Operator> svd(a);
  return svd.singularValues()(0);
}

// ---------------------------------------------------------------------------
// Projector

/// Orthogonal projector with a recorded rank.
class Projector {
 public:
  /// Validates P = P^dag, P^2 = P and trace(P) = rank within `tol`
  /// (scaled by the dimension). Throws InvalidProjector otherwise.
  static Projector checked(Operator op, double tol = 1e-9) {
    require_square(op, "Projector");
    if (!op.allFinite()) throw InvalidProjector("projector: non-finite entries");
    const double d = static_cast<double>(std::max<Eigen::Index>(1, op.rows()));
    const double scaled = tol * d;
    const double herm = (op - op.adjoint()).norm();
    const double idem = (op * op - op).norm();
    const cplx tr = op.trace();
    const double rank_d = std::round(tr.real());
    if (herm > scaled || idem > scaled ||
        std::abs(tr - cplx(rank_d, 0.0)) > scaled || rank_d < 0) {
      std::ostringstream os;
      os << "projector invalid: |P-P^dag|=" << herm << ", |P^2-P|=" << idem
         << ", trace=" << tr;
      throw InvalidProjector(os.str());
    }
    return Projector(std::move(op), static_cast<Eigen::Index>(rank_d));
  }

  static Projector identity(Eigen::Index d) {
    return Projector(Operator::Identity(d, d), d);
  }
  static Projector zero(Eigen::Index d) {
    return Projector(Operator::Zero(d, d), 0);
  }

  /// P_perp = I - P, rank d - r.
  Projector complement() const {
    return Projector(Operator::Identity(dim(), dim()) - op_, dim() - rank_);
  }

  const Operator& op() const noexcept { return op_; }
  Eigen::Index rank() const noexcept { return rank_; }
  Eigen::Index dim() const noexcept { return op_.rows(); }

  /// Orthonormal basis of the range as the columns of a dim x rank matrix.
  Operator range_basis() const {
    if (rank_ == 0) return Operator(dim(), 0);
    Eigen::SelfAdjointEigenSolver<Operator> es(op_);
    // eigenvalues ascending; the range is the top `rank_` eigenvectors
    return es.eigenvectors().rightCols(rank_);
  }

 private:
  Projector(Operator op, Eigen::Index rank) : op_(std::move(op)), rank_(rank) {}

  Operator op_;
  Eigen::Index rank_;
};

// ---------------------------------------------------------------------------
// Kernel and restricted inverse

/// Numerical null space of a square matrix together with the SVD data used
/// to decide it.
struct KernelAnalysis {
  Projector projector;
  Eigen::VectorXd singular_values;  // descending
  double sigma_max = 0.0;
  /// Count of singular values in (rank_tol*sigma_max, 10*rank_tol*sigma_max].
  Eigen::Index near_threshold = 0;
};

inline KernelAnalysis analyze_kernel(const Operator& m, double rank_tol) {
  require_square(m, "kernel_projector");
  require_finite(m, "kernel_projector");
  if (!(rank_tol > 0)) throw InvalidArgument("kernel_projector: rank_tol must be > 0");
  const Eigen::Index d = m.rows();
  if (d == 0) return {Projector::identity(0), Eigen::VectorXd(), 0.0, 0};

  Eigen::JacobiSVD<Operator> svd(m, Eigen::ComputeFullV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double smax = s(0);
  if (smax == 0.0) return {Projector::identity(d), s, 0.0, 0};

  const double cut = rank_tol * smax;
  Eigen::Index null_count = 0;
  Eigen::Index near = 0;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (s(i) <= cut) {
      ++null_count;
    } else if (s(i) <= 10.0 * cut) {
      ++near;
    }
  }
  if (null_count == 0) return {Projector::zero(d), s, smax, near};
  // singular values are sorted descending, so the null directions are the
  // trailing columns of V
  const Operator v0 = svd.matrixV().rightCols(null_count);
  Operator p = v0 * v0.adjoint();
  p = 0.5 * (p + p.adjoint());
  return {Projector::checked(std::move(p)), s, smax, near};
}

/// Orthogonal projector onto the numerical null space of `m`: right singular
/// vectors with sigma <= rank_tol * sigma_max. A zero matrix yields I.
inline Projector kernel_projector(const Operator& m,
                                  double rank_tol = kDefaultRankTol) {
  return analyze_kernel(m, rank_tol).projector;
}

/// Inverse of the block of `m` on range(p1), embedded back into the full
/// space: R = P1 R P1 and P1 m R = P1. Solved by least squares on the block.
/// Throws SingularRestriction when the smallest singular value of the block
/// is <= tol * sigma_max(m).
inline Operator restricted_inverse(const Operator& m, const Projector& p1,
                                   double tol = kDefaultRankTol) {
  require_square(m, "restricted_inverse");
  require_finite(m, "restricted_inverse");
  if (p1.dim() != m.rows()) {
    throw DimensionMismatch("restricted_inverse: projector dimension mismatch");
  }
  const Eigen::Index d = m.rows();
  if (p1.rank() == 0) return zero(d);

  const Operator q = p1.range_basis();
  const Operator block = q.adjoint() * m * q;
  Eigen::JacobiSVD<Operator> svd(block, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  const double mmax = spectral_norm(m);
  if (mmax == 0.0 || smin <= tol * mmax) {
    std::ostringstream os;
    os << "restricted block is numerically singular (sigma_min=" << smin
       << ", sigma_max=" << mmax << ")";
    throw SingularRestriction(os.str(), smin);
  }
  Eigen::VectorXd inv_s = s.cwiseInverse();
  const Operator block_inv =
      svd.matrixV() * inv_s.cast<cplx>().asDiagonal() * svd.matrixU().adjoint();
  Operator r = q * block_inv * q.adjoint();

  const double residual = (p1.op() * m * r - p1.op()).norm();
  const double bound = tol * std::max(1.0, m.norm() * r.norm());
  if (!(residual <= bound)) {
    std::ostringstream os;
    os << "restricted inverse failed certification: |P1 M R - P1|=" << residual;
    throw SingularRestriction(os.str(), smin);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Matrix exponential: scaling and squaring with diagonal Pade approximants
// (degrees 3, 5, 7, 9, 13; thresholds on the 1-norm).

namespace detail {

inline double norm1(const Operator& a) {
  if (a.size() == 0) return 0.0;
  return a.cwiseAbs().colwise().sum().maxCoeff();
}

template <class M>
M pade_solve(const M& u, const M& v) {
  return (v - u).partialPivLu().solve(v + u);
}

template <std::size_t N>
Operator pade_low(const Operator& a, const std::array<double, N>& b) {
  // degree N-1, odd terms in U, even terms in V
  const Eigen::Index d = a.rows();
  const Operator a2 = a * a;
  Operator pow = Operator::Identity(d, d);
  Operator uo = Operator::Zero(d, d);
  Operator v = Operator::Zero(d, d);
  for (std::size_t j = 0; j < N; j += 2) {
    v += b[j] * pow;
    uo += b[j + 1] * pow;
    pow = pow * a2;
  }
  return pade_solve<Operator>(a * uo, v);
}

template <class M>
M pade13(const M& a) {
  using Real = typename M::RealScalar;
  static constexpr std::array<double, 14> b = {
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
      1187353796428800.0,  129060195264000.0,   10559470521600.0,
      670442572800.0,      33522128640.0,       1323241920.0,
      40840800.0,          960960.0,            16380.0,
      182.0,               1.0};
  auto c = [](std::size_t j) { return static_cast<Real>(b[j]); };
  const Eigen::Index d = a.rows();
  const M id = M::Identity(d, d);
  const M a2 = a * a;
  const M a4 = a2 * a2;
  const M a6 = a4 * a2;
  const M u_inner = a6 * (c(13) * a6 + c(11) * a4 + c(9) * a2) +
                    c(7) * a6 + c(5) * a4 + c(3) * a2 + c(1) * id;
  const M u = a * u_inner;
  const M v = a6 * (c(12) * a6 + c(10) * a4 + c(8) * a2) + c(6) * a6 +
              c(4) * a4 + c(2) * a2 + c(0) * id;
  return pade_solve(u, v);
}

}  // namespace detail

/// e^M by scaling and squaring.
inline Operator expm(const Operator& m) {
  require_square(m, "expm");
  require_finite(m, "expm");
  const Eigen::Index d = m.rows();
  if (d == 0) return m;

  static constexpr std::array<double, 4> b3 = {120.0, 60.0, 12.0, 1.0};
  static constexpr std::array<double, 6> b5 = {30240.0, 15120.0, 3360.0,
                                               420.0,   30.0,    1.0};
  static constexpr std::array<double, 8> b7 = {17297280.0, 8648640.0, 1995840.0,
                                               277200.0,   25200.0,   1512.0,
                                               56.0,       1.0};
  static constexpr std::array<double, 10> b9 = {
      17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
      2162160.0,     110880.0,     3960.0,       90.0,        1.0};
  constexpr double theta3 = 1.495585217958292e-2;
  constexpr double theta5 = 2.539398330063230e-1;
  constexpr double theta7 = 9.504178996162932e-1;
  constexpr double theta9 = 2.097847961257068e0;
  constexpr double theta13 = 5.371920351148152e0;

  const double n1 = detail::norm1(m);
  if (n1 <= theta3) return detail::pade_low(m, b3);
  if (n1 <= theta5) return detail::pade_low(m, b5);
  if (n1 <= theta7) return detail::pade_low(m, b7);
  if (n1 <= theta9) return detail::pade_low(m, b9);

  int s = 0;
  if (n1 > theta13) s = static_cast<int>(std::ceil(std::log2(n1 / theta13)));
  const Operator scaled = m / std::ldexp(1.0, s);
  Operator r = detail::pade13(scaled);
  for (int i = 0; i < s; ++i) r = r * r;
  return r;
}

/// Extended-precision operators, for stiff propagation where double
/// roundoff times |tM| swamps small distances.
using OperatorX = Eigen::Matrix<std::complex<long double>, Eigen::Dynamic, Eigen::Dynamic>;
using StateVectorX = Eigen::Matrix<std::complex<long double>, Eigen::Dynamic, 1>;

/// e^M in long double. Scales to 1-norm <= 1, where the [13/13] Pade
/// truncation error sits far below the long double unit roundoff.
inline OperatorX expm_extended(const OperatorX& m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("expm_extended: matrix must be square");
  if (m.size() == 0) return m;
  const long double n1 = m.cwiseAbs().colwise().sum().maxCoeff();
  if (!std::isfinite(n1)) throw InvalidArgument("expm_extended: non-finite entries");
  int s = 0;
  if (n1 > 1.0L) s = static_cast<int>(std::ceil(std::log2(n1)));
  const OperatorX scaled = m / std::ldexp(1.0L, s);
  OperatorX r = detail::pade13(scaled);
  for (int i = 0; i < s; ++i) r = r * r;
  return r;
}

// ---------------------------------------------------------------------------
// Superoperators

inline StateVector vec(const Operator& x) {
  return Eigen::Map<const StateVector>(x.data(), x.size());
}

inline Operator unvec(const StateVector& v, Eigen::Index d) {
  if (v.size() != d * d) throw DimensionMismatch("unvec: length is not d^2");
  return Eigen::Map<const Operator>(v.data(), d, d);
}

/// Linear map on B(C^d) stored as a d^2 x d^2 matrix acting on vec(X).
class Superoperator {
 public:
  explicit Superoperator(Eigen::Index d)
      : dim_(d), mat_(Operator::Zero(d * d, d * d)) {}
  Superoperator(Eigen::Index d, Operator mat) : dim_(d), mat_(std::move(mat)) {
    if (mat_.rows() != d * d || mat_.cols() != d * d) {
      throw DimensionMismatch("Superoperator: matrix is not d^2 x d^2");
    }
  }

  static Superoperator identity(Eigen::Index d) {
    return Superoperator(d, Operator::Identity(d * d, d * d));
  }

  Eigen::Index dim() const noexcept { return dim_; }
  const Operator& matrix() const noexcept { return mat_; }

  Operator apply(const Operator& x) const {
    if (x.rows() != dim_ || x.cols() != dim_) {
      throw DimensionMismatch("Superoperator::apply: operator dimension");
    }
    return unvec(mat_ * vec(x), dim_);
  }

  Superoperator& operator+=(const Superoperator& o) {
    if (o.dim_ != dim_) throw DimensionMismatch("Superoperator +=");
    mat_ += o.mat_;
    return *this;
  }
  Superoperator& operator-=(const Superoperator& o) {
    if (o.dim_ != dim_) throw DimensionMismatch("Superoperator -=");
    mat_ -= o.mat_;
    return *this;
  }
  friend Superoperator operator+(Superoperator a, const Superoperator& b) {
    a += b;
    return a;
  }
  friend Superoperator operator-(Superoperator a, const Superoperator& b) {
    a -= b;
    return a;
  }
  friend Superoperator operator*(cplx s, Superoperator a) {
    a.mat_ *= s;
    return a;
  }

 private:
  Eigen::Index dim_;
  Operator mat_;
};

/// Matrix of X -> left * X * right under column stacking: right^T kron left.
inline Superoperator assemble_superoperator(const Operator& left,
                                            const Operator& right) {
  require_square(left, "assemble_superoperator");
  require_same_dim(left, right, "assemble_superoperator");
  const Eigen::Index d = left.rows();
  Operator s(d * d, d * d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      // block (i, j) of right^T kron left is right(j, i) * left
      s.block(i * d, j * d, d, d) = right(j, i) * left;
    }
  }
  return Superoperator(d, std::move(s));
}

}  // namespace qsde
