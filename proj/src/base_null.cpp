// SPDX-License-Identifier: Apache-2.0

#include "plhr/base_null.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace plhr {

std::string to_string(BaseNullMode mode) {
  return mode == BaseNullMode::two_term ? "two_term" : "three_term";
}

BaseNullMode base_null_mode_from_string(const std::string& name) {
  if (name == "two_term") return BaseNullMode::two_term;
  if (name == "three_term") return BaseNullMode::three_term;
  throw Error("unknown null-space iteration mode: " + name);
}

namespace {

// Pseudo-solve of the small symmetric normal-equations Gram system; tiny
// eigenvalues are truncated so near-dependent directions contribute nothing.
RealVector gram_solve(const RealMatrix& G, const RealVector& rhs) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(0.5 * (G + G.transpose()));
  const RealVector& d = es.eigenvalues();
  const double cutoff = 1e-14 * std::max(d.cwiseAbs().maxCoeff(), 0.0);
  RealVector t = es.eigenvectors().transpose() * rhs;
  for (Index i = 0; i < t.size(); ++i) {
    t(i) = std::abs(d(i)) > cutoff && cutoff > 0.0 ? t(i) / d(i) : 0.0;
  }
  return es.eigenvectors() * t;
}

}  // namespace

BaseNullResult base_null_solve(const RealPencil& pencil, const RealOperator& T,
                               double lambda_q, BaseNullMode mode, double tol,
                               Index maxit, std::uint64_t seed,
                               const RealVector* initial) {
  if (!(tol > 0.0)) throw Error("tolerance must be positive");
  if (maxit < 0) throw Error("maxit must be nonnegative");
  if (!std::isfinite(lambda_q)) throw Error("lambda_q must be finite");
  const Index n = pencil.n;

  RealVector v;
  if (initial != nullptr) {
    if (initial->size() != n) throw Error("initial vector has the wrong size");
    v = *initial;
  } else {
    v = gaussian_block(n, 1, seed);
  }
  ensure_finite(v, "initial vector");
  RealVector v_prev = RealVector::Zero(n);  // v^(-1) = 0 in the recurrence

  BaseNullResult res;
  double comp = 1.0;  // accumulated rescale factor keeping T-norms comparable
  constexpr double kStagnationLevel = 1.0 - 1e-12;
  constexpr int kStagnationSteps = 10;
  int flat_steps = 0;

  Index it = 0;
  for (;; ++it) {
    RealVector Av = pencil.A.apply(v);
    RealVector Bv = pencil.B.apply(v);
    RealVector r = lambda_q * Bv - Av;
    RealVector d1 = T.apply(r);
    const double tsq = r.dot(d1);
    if (tsq < 0.0) throw Error("preconditioner is not positive definite");
    const double tnorm = std::sqrt(tsq) / comp;

    const double vbv = v.dot(Bv);
    if (!(vbv > 0.0)) throw Error("iterate has zero B-norm");
    const double bn = std::sqrt(vbv);
    const double rho = v.dot(Av) / vbv;
    const double eigres = (Av - rho * Bv).norm() / bn;

    res.tnorm_history.push_back(tnorm);
    res.residual_history.push_back(eigres);
    res.value_history.push_back(rho);
    if (res.tnorm_history.size() >= 2) {
      const double prev = res.tnorm_history[res.tnorm_history.size() - 2];
      const double ratio = prev > 0.0 ? tnorm / prev : 0.0;
      res.ratio_history.push_back(ratio);
      flat_steps = ratio >= kStagnationLevel ? flat_steps + 1 : 0;
    }

    if (eigres <= tol) {
      res.converged = true;
      break;
    }
    if (it >= maxit) break;
    if (flat_steps >= kStagnationSteps) {
      res.stagnated = true;
      res.warnings.push_back(
          "T-norm stagnation: the iterate has no detectable null-space component");
      break;
    }

    // Local subspace: d1 = T r, d2 = T (A - lambda_q B) d1 (, d3 = v - v_prev).
    RealVector c1 = pencil.A.apply(d1) - lambda_q * pencil.B.apply(d1);
    RealVector d2 = T.apply(c1);
    const Index nd = mode == BaseNullMode::three_term ? 3 : 2;
    RealMatrix D(n, nd), C(n, nd), TC(n, nd);
    D.col(0) = d1;
    D.col(1) = d2;
    C.col(0) = c1;
    C.col(1) = pencil.A.apply(d2) - lambda_q * pencil.B.apply(d2);
    TC.col(0) = d2;
    TC.col(1) = T.apply(C.col(1));
    if (nd == 3) {
      D.col(2) = v - v_prev;
      C.col(2) = pencil.A.apply(D.col(2)) - lambda_q * pencil.B.apply(D.col(2));
      TC.col(2) = T.apply(C.col(2));
    }
    // Normal equations of min_x ||r - C x||_T: (C' T C) x = C' T r, T r = d1.
    RealMatrix G = C.transpose() * TC;
    RealVector rhs = C.transpose() * d1;
    RealVector x = gram_solve(G, rhs);
    if (!x.allFinite()) throw Error("normal-equations solve produced non-finite step");

    v_prev = v;
    v += D * x;

    // Joint rescale keeps the affine recurrence well-scaled on long runs.
    const double nv = v.norm();
    if (nv > 1e8 || (nv > 0.0 && nv < 1e-8)) {
      const double s = 1.0 / nv;
      v *= s;
      v_prev *= s;
      comp *= s;
    }
  }
  res.iterations = it;

  RealVector Bv = pencil.B.apply(v);
  const double bn = std::sqrt(v.dot(Bv));
  if (!(bn > 0.0)) throw Error("final iterate has zero B-norm");
  res.vector = v / bn;
  RealVector Av = pencil.A.apply(res.vector);
  RealVector Bvn = pencil.B.apply(res.vector);
  res.value = res.vector.dot(Av) / res.vector.dot(Bvn);
  res.residual = (Av - res.value * Bvn).norm();
  return res;
}

}  // namespace plhr
