// SPDX-License-Identifier: Apache-2.0

#ifndef PLHR_DENSE_HPP
#define PLHR_DENSE_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <numeric>
#include <utility>
#include <vector>

#include "plhr/common.hpp"
#include "plhr/operators.hpp"

namespace plhr {

inline double real_part(double x) { return x; }
inline double real_part(const Complex& x) { return x.real(); }

// Columns of Yprime holding real and imaginary parts of one conjugate pair.
using Pairing = std::vector<std::pair<Index, Index>>;

template <typename Scalar>
struct BOrthoResult {
  Matrix<Scalar> Q;
  std::vector<Index> kept;
};

// Column-wise Gram-Schmidt in the B inner product with one unconditional
// reorthogonalization pass. Columns whose post-projection B-norm falls below
// drop_tol times their initial B-norm are dropped; kept lists surviving
// input column indices in order.
template <typename Scalar>
BOrthoResult<Scalar> b_orthonormalize(const Eigen::Ref<const Matrix<Scalar>>& Z,
                                      const LinearOperator<Scalar>& B,
                                      double drop_tol = 1e-8) {
  ensure_finite(Z, "b_orthonormalize");
  if (Z.rows() != B.rows()) {
    throw Error("b_orthonormalize: dimension mismatch");
  }
  const Index n = Z.rows();
  const Index m = Z.cols();
  const bool bid = B.is_identity();
  Matrix<Scalar> Q(n, m);
  Matrix<Scalar> BQ;
  if (!bid) {
    BQ.resize(n, m);
  }
  std::vector<Index> kept;
  kept.reserve(m);
  Index r = 0;
  Vector<Scalar> z(n), bz(n), c;
  for (Index j = 0; j < m; ++j) {
    z = Z.col(j);
    double norm0;
    if (bid) {
      norm0 = z.norm();
    } else {
      B.apply_into(z, bz);
      norm0 = std::sqrt(std::max(0.0, real_part(z.dot(bz))));
    }
    if (!(norm0 > 0.0)) {
      continue;
    }
    for (int pass = 0; pass < 2; ++pass) {
      if (r == 0) {
        break;
      }
      if (bid) {
        c.noalias() = Q.leftCols(r).adjoint() * z;
      } else {
        c.noalias() = BQ.leftCols(r).adjoint() * z;
      }
      z.noalias() -= Q.leftCols(r) * c;
    }
    double nrm;
    if (bid) {
      nrm = z.norm();
    } else {
      B.apply_into(z, bz);
      nrm = std::sqrt(std::max(0.0, real_part(z.dot(bz))));
    }
    if (nrm < drop_tol * norm0) {
      continue;
    }
    Q.col(r) = z / nrm;
    if (!bid) {
      BQ.col(r) = bz / nrm;
    }
    kept.push_back(j);
    ++r;
  }
  BOrthoResult<Scalar> out;
  out.Q = Q.leftCols(r);
  out.kept = std::move(kept);
  return out;
}

struct SmallEigenSolution {
  ComplexVector values;
  ComplexMatrix vectors;
};

// True when xi is treated as real under the conjugate-detection tolerance.
inline bool effectively_real(const Complex& xi, double tol = 1e-12) {
  return std::abs(xi.imag()) <= tol * (1.0 + std::abs(xi));
}

// Solves L y = xi M y by pivoted LU of M and a dense eigensolve of M^-1 L.
// Eigenvalues ascend in |xi| (ties broken by ascending real part); for real
// input, conjugate pairs are adjacent with the positive-imaginary member
// first and exactly conjugate eigenvector columns. Columns have unit 2-norm.
// Throws DegenerateProjectedProblem when estimated cond(M) exceeds
// cond_limit.
SmallEigenSolution solve_projected_pencil(const RealMatrix& L,
                                          const RealMatrix& M,
                                          double cond_limit = 1e12);
// Complex overload; exactly-real inputs are routed through the real path so
// real pencils stay on it regardless of storage type.
SmallEigenSolution solve_projected_pencil(const ComplexMatrix& L,
                                          const ComplexMatrix& M,
                                          double cond_limit = 1e12);

struct SplitBasis {
  RealMatrix Yprime;
  Pairing pairing;
  bool tail_flag = false;
};

// Splits conjugate-adjacent complex columns into the real column layout
// [Y0 | Re pairs | unpaired tail Re | Im pairs]. Yprime has exactly as many
// columns as Y; tail_flag marks a trailing complex column whose conjugate
// fell outside the selection. Throws on non-adjacent conjugate ordering.
SplitBasis split_conjugate_basis(const ComplexMatrix& Y, double tol = 1e-12);

template <typename Scalar>
struct RitzSolution {
  RealVector values;
  Matrix<Scalar> vectors;
};

// Standard Rayleigh-Ritz for the Hermitian pencil restricted to span(V).
// Ritz values are ordered by distance to sigma (ties by ascending value);
// vectors are B-orthonormal.
template <typename Scalar>
RitzSolution<Scalar> rayleigh_ritz_hermitian(
    const Eigen::Ref<const Matrix<Scalar>>& V, const Pencil<Scalar>& pencil,
    double sigma, double drop_tol = 1e-8) {
  auto ortho = b_orthonormalize<Scalar>(V, pencil.B, drop_tol);
  const Matrix<Scalar>& Q = ortho.Q;
  if (Q.cols() == 0) {
    throw Error("rayleigh_ritz_hermitian: basis is empty after deflation");
  }
  Matrix<Scalar> AQ = pencil.A.apply(Q);
  Matrix<Scalar> H = Q.adjoint() * AQ;
  H = Scalar(0.5) * (H + H.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(H);
  if (es.info() != Eigen::Success) {
    throw Error("rayleigh_ritz_hermitian: dense eigensolve failed");
  }
  const Index r = Q.cols();
  std::vector<Index> idx(static_cast<std::size_t>(r));
  std::iota(idx.begin(), idx.end(), Index(0));
  const RealVector& ev = es.eigenvalues();
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) {
    double da = std::abs(ev(a) - sigma), db = std::abs(ev(b) - sigma);
    if (da != db) {
      return da < db;
    }
    return ev(a) < ev(b);
  });
  RitzSolution<Scalar> out;
  out.values.resize(r);
  out.vectors.resize(Q.rows(), r);
  for (Index t = 0; t < r; ++t) {
    out.values(t) = ev(idx[static_cast<std::size_t>(t)]);
    out.vectors.col(t).noalias() =
        Q * es.eigenvectors().col(idx[static_cast<std::size_t>(t)]);
  }
  return out;
}

// Rayleigh quotients per column; columns listed in pairing share the joint
// quotient (vr,A vr + vi,A vi)/(vr,B vr + vi,B vi) of their conjugate pair.
template <typename Scalar>
RealVector rayleigh_quotient_block(const Eigen::Ref<const Matrix<Scalar>>& V,
                                   const Pencil<Scalar>& pencil,
                                   const Pairing& pairing = {}) {
  ensure_finite(V, "rayleigh_quotient_block");
  const Index k = V.cols();
  Matrix<Scalar> AV = pencil.A.apply(V);
  Matrix<Scalar> BV = pencil.B.apply(V);
  RealVector num(k), den(k);
  for (Index j = 0; j < k; ++j) {
    num(j) = real_part(V.col(j).dot(AV.col(j)));
    den(j) = real_part(V.col(j).dot(BV.col(j)));
  }
  RealVector lam(k);
  std::vector<bool> paired(static_cast<std::size_t>(k), false);
  for (const auto& [jr, ji] : pairing) {
    if (jr < 0 || jr >= k || ji < 0 || ji >= k) {
      throw Error("rayleigh_quotient_block: pairing index out of range");
    }
    double d = den(jr) + den(ji);
    if (!(d > 0.0)) {
      throw Error("rayleigh_quotient_block: nonpositive B inner product");
    }
    double v = (num(jr) + num(ji)) / d;
    lam(jr) = v;
    lam(ji) = v;
    paired[static_cast<std::size_t>(jr)] = true;
    paired[static_cast<std::size_t>(ji)] = true;
  }
  for (Index j = 0; j < k; ++j) {
    if (paired[static_cast<std::size_t>(j)]) {
      continue;
    }
    if (!(den(j) > 0.0)) {
      throw Error("rayleigh_quotient_block: nonpositive B inner product");
    }
    lam(j) = num(j) / den(j);
  }
  return lam;
}

// Largest algebraic eigenvalue of a symmetric operator by Lanczos with full
// reorthogonalization; exact termination once the Krylov space is invariant.
double hermitian_largest_eigenvalue(const RealOperator& op,
                                    std::uint64_t seed = 777,
                                    int max_steps = 400, double tol = 1e-13);

}  // namespace plhr

#endif  // PLHR_DENSE_HPP
