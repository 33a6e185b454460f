// SPDX-License-Identifier: Apache-2.0

#ifndef PLHR_EXTRACTION_HPP
#define PLHR_EXTRACTION_HPP

#include <Eigen/Eigenvalues>

#include "plhr/common.hpp"
#include "plhr/dense.hpp"
#include "plhr/operators.hpp"

namespace plhr {

struct THarmonicResult {
  ComplexVector xi;     // projected eigenvalues, ascending |xi|
  ComplexVector theta;  // sigma + xi
  ComplexMatrix Y;      // coefficient columns in the Zhat basis
};

// Projection of the pencil onto span(Zhat) in the T inner product of the
// shifted residual space: (R^H T R) y = xi (R^H T B Zhat) y with
// R = (A - sigma B) Zhat. T = nullptr means the identity (standard harmonic
// extraction); otherwise T must be Hermitian positive definite.
template <typename Scalar>
THarmonicResult t_harmonic_extract(const Eigen::Ref<const Matrix<Scalar>>& Zhat,
                                   const Pencil<Scalar>& pencil,
                                   const LinearOperator<Scalar>* T,
                                   double sigma, double cond_limit = 1e12) {
  ensure_finite(Zhat, "t_harmonic_extract");
  if (Zhat.rows() != pencil.n || Zhat.cols() == 0) {
    throw Error("t_harmonic_extract: basis shape mismatch");
  }
  Matrix<Scalar> AZ = pencil.A.apply(Zhat);
  Matrix<Scalar> BZ = pencil.B.apply(Zhat);
  Matrix<Scalar> R = AZ - Scalar(sigma) * BZ;
  Matrix<Scalar> G = (T != nullptr) ? T->apply(R) : R;
  Matrix<Scalar> L = R.adjoint() * G;
  L = Scalar(0.5) * (L + L.adjoint()).eval();
  Matrix<Scalar> M = G.adjoint() * BZ;
  SmallEigenSolution sol = solve_projected_pencil(L, M, cond_limit);
  THarmonicResult out;
  out.xi = sol.values;
  out.theta = sol.values.array() + Complex(sigma, 0.0);
  out.Y = std::move(sol.vectors);
  return out;
}

template <typename Scalar>
struct RefinedResult {
  double theta_sq = 0.0;
  Vector<Scalar> y;  // coefficients in the Zhat basis, scaled so v = Zhat y
  Vector<Scalar> v;  // B-normalized refined vector
};

// Minimizes the T-norm of (A - lambda_tilde B) v over B-normalized
// v in span(Zhat): smallest eigenpair of
// (W^H T W) y = theta^2 (Zhat^H B Zhat) y with W = (A - lambda_tilde B) Zhat.
template <typename Scalar>
RefinedResult<Scalar> refined_extract(const Eigen::Ref<const Matrix<Scalar>>& Zhat,
                                      const Pencil<Scalar>& pencil,
                                      const LinearOperator<Scalar>* T,
                                      double lambda_tilde) {
  ensure_finite(Zhat, "refined_extract");
  if (Zhat.rows() != pencil.n || Zhat.cols() == 0) {
    throw Error("refined_extract: basis shape mismatch");
  }
  Matrix<Scalar> W = pencil.A.apply(Zhat) - Scalar(lambda_tilde) * pencil.B.apply(Zhat);
  Matrix<Scalar> BZ = pencil.B.apply(Zhat);
  Matrix<Scalar> G = (T != nullptr) ? T->apply(W) : W;
  Matrix<Scalar> L = W.adjoint() * G;
  L = Scalar(0.5) * (L + L.adjoint()).eval();
  Matrix<Scalar> Mb = Zhat.adjoint() * BZ;
  Mb = Scalar(0.5) * (Mb + Mb.adjoint()).eval();
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix<Scalar>> es(
      L, Mb, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success) {
    throw DegenerateProjectedProblem(
        "refined_extract: projected metric is not positive definite");
  }
  RefinedResult<Scalar> out;
  out.theta_sq = es.eigenvalues()(0);
  out.y = es.eigenvectors().col(0);
  out.v.noalias() = Zhat * out.y;
  Vector<Scalar> bv = pencil.B.apply(out.v);
  double nb = std::sqrt(std::max(0.0, real_part(out.v.dot(bv))));
  if (!(nb > 0.0)) {
    throw Error("refined_extract: refined vector has zero B-norm");
  }
  out.y /= nb;
  out.v /= nb;
  return out;
}

}  // namespace plhr

#endif  // PLHR_EXTRACTION_HPP
