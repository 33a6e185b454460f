// SPDX-License-Identifier: Apache-2.0

#include "plhr/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <type_traits>
#include <utility>

#include "plhr/dense.hpp"
#include "plhr/extraction.hpp"

namespace plhr {

std::string to_string(ExtractionKind kind) {
  switch (kind) {
    case ExtractionKind::t_harmonic: return "t_harmonic";
    case ExtractionKind::harmonic: return "harmonic";
    case ExtractionKind::refined: return "refined";
  }
  throw Error("unknown extraction kind");
}

ExtractionKind extraction_from_string(const std::string& name) {
  if (name == "t_harmonic") return ExtractionKind::t_harmonic;
  if (name == "harmonic") return ExtractionKind::harmonic;
  if (name == "refined") return ExtractionKind::refined;
  throw Error("unknown extraction kind: " + name);
}

namespace {

constexpr std::size_t kMaxWarnings = 50;

template <typename Scalar>
void push_warning(EigenResult<Scalar>& res, std::string msg) {
  if (res.warnings.size() < kMaxWarnings) res.warnings.push_back(std::move(msg));
}

// Euclidean residual norm ||A v - lam B v|| per column (columns B-normalized).
// The relative option divides by |lam|, the residual's natural magnitude scale
// for B-unit vectors.
template <typename Scalar>
RealVector residual_norms(const Matrix<Scalar>& AV, const Matrix<Scalar>& BV,
                          const RealVector& lam, bool relative) {
  RealVector out(lam.size());
  for (Index j = 0; j < lam.size(); ++j) {
    const double num = (AV.col(j) - Scalar(lam(j)) * BV.col(j)).norm();
    out(j) = (relative && std::abs(lam(j)) > 0.0) ? num / std::abs(lam(j)) : num;
  }
  return out;
}

// Indices of the `tracked` pairs closest to the shift, ties toward smaller value.
std::vector<Index> tracked_indices(const RealVector& lam, double sigma, Index tracked) {
  std::vector<Index> idx(static_cast<std::size_t>(lam.size()));
  std::iota(idx.begin(), idx.end(), Index(0));
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) {
    const double da = std::abs(lam(a) - sigma);
    const double db = std::abs(lam(b) - sigma);
    if (da != db) return da < db;
    return lam(a) < lam(b);
  });
  idx.resize(static_cast<std::size_t>(std::min<Index>(tracked, lam.size())));
  return idx;
}

template <typename Scalar>
Matrix<Scalar> select_columns(const Matrix<Scalar>& M, const std::vector<Index>& cols) {
  Matrix<Scalar> out(M.rows(), static_cast<Index>(cols.size()));
  for (std::size_t t = 0; t < cols.size(); ++t) out.col(static_cast<Index>(t)) = M.col(cols[t]);
  return out;
}

template <typename Scalar>
Matrix<Scalar> concat_blocks(const std::vector<const Matrix<Scalar>*>& blocks, Index rows) {
  Index total = 0;
  for (const auto* b : blocks) total += b->cols();
  Matrix<Scalar> Z(rows, total);
  Index off = 0;
  for (const auto* b : blocks) {
    if (b->cols() == 0) continue;
    Z.middleCols(off, b->cols()) = *b;
    off += b->cols();
  }
  return Z;
}

// Petrov-Galerkin self-check: for every selected projected pair (theta, y),
// the residual of v = Q y in the pencil must be T-orthogonal to the columns of
// (A - sigma B) Q. Measured relative to the natural residual magnitude.
template <typename Scalar>
double pg_check(const Matrix<Scalar>& Q, const ComplexVector& theta,
                const ComplexMatrix& Y, const Pencil<Scalar>& pencil,
                const LinearOperator<Scalar>* T, double sigma) {
  Matrix<Scalar> R2 = pencil.A.apply(Q) - Scalar(sigma) * pencil.B.apply(Q);
  Matrix<Scalar> G2 = (T != nullptr) ? T->apply(R2) : R2;
  const double gnorm = G2.norm();
  double worst = 0.0;
  for (Index j = 0; j < Y.cols(); ++j) {
    ComplexMatrix yr(Q.cols(), 2);
    yr.col(0) = Y.col(j).real().template cast<Complex>();
    yr.col(1) = Y.col(j).imag().template cast<Complex>();
    // v = Q Re(y) + i Q Im(y); all operator applies stay in the native field.
    Matrix<Scalar> Vparts(Q.rows(), 2);
    if constexpr (std::is_same_v<Scalar, double>) {
      Vparts.col(0) = Q * Y.col(j).real();
      Vparts.col(1) = Q * Y.col(j).imag();
    } else {
      Vparts.col(0) = Q * yr.col(0);
      Vparts.col(1) = Q * yr.col(1);
    }
    Matrix<Scalar> Ap = pencil.A.apply(Vparts);
    Matrix<Scalar> Bp = pencil.B.apply(Vparts);
    const Complex th = theta(j);
    // r = (A - theta B)(vR + i vI) split into real and imaginary parts.
    ComplexVector r_re = Ap.col(0).template cast<Complex>() -
                         th.real() * Bp.col(0).template cast<Complex>() +
                         th.imag() * Bp.col(1).template cast<Complex>();
    ComplexVector r_im = Ap.col(1).template cast<Complex>() -
                         th.real() * Bp.col(1).template cast<Complex>() -
                         th.imag() * Bp.col(0).template cast<Complex>();
    ComplexVector proj = G2.adjoint() * (r_re + Complex(0.0, 1.0) * r_im);
    const double rnorm = std::sqrt(r_re.squaredNorm() + r_im.squaredNorm());
    const double anorm = std::sqrt(Ap.col(0).squaredNorm() + Ap.col(1).squaredNorm());
    const double bnorm = std::sqrt(Bp.col(0).squaredNorm() + Bp.col(1).squaredNorm());
    const double den = gnorm * (anorm + std::abs(th) * bnorm);
    const double val = den > 0.0 ? proj.norm() / den : proj.norm();
    (void)rnorm;
    worst = std::max(worst, val);
  }
  return worst;
}

// Joint B-normalization of an updated block: paired columns carry the real and
// imaginary parts of one vector and share a single scale factor.
template <typename Scalar>
void b_normalize_block(Matrix<Scalar>& V, const LinearOperator<Scalar>& B,
                       const Pairing& pairing) {
  Matrix<Scalar> BV = B.apply(V);
  std::vector<bool> in_pair(static_cast<std::size_t>(V.cols()), false);
  for (const auto& pr : pairing) {
    in_pair[static_cast<std::size_t>(pr.first)] = true;
    in_pair[static_cast<std::size_t>(pr.second)] = true;
    const double s2 = real_part(V.col(pr.first).dot(BV.col(pr.first))) +
                      real_part(V.col(pr.second).dot(BV.col(pr.second)));
    if (!(s2 > 0.0)) throw Error("update produced a B-degenerate paired column");
    const double s = std::sqrt(s2);
    V.col(pr.first) /= Scalar(s);
    V.col(pr.second) /= Scalar(s);
  }
  for (Index j = 0; j < V.cols(); ++j) {
    if (in_pair[static_cast<std::size_t>(j)]) continue;
    const double s2 = real_part(V.col(j).dot(BV.col(j)));
    if (!(s2 > 0.0)) throw Error("update produced a B-degenerate column");
    V.col(j) /= Scalar(std::sqrt(s2));
  }
}

template <typename Scalar>
Matrix<Scalar> default_guess(Index n, Index k, std::uint64_t seed) {
  if constexpr (std::is_same_v<Scalar, double>) {
    return gaussian_block(n, k, seed);
  } else {
    return complex_gaussian_block(n, k, seed);
  }
}

struct UpdateOutcome {
  bool ok = false;
  Index basis_width = 0;
};

// One extraction-and-update step shared by the real and complex lanes.
// Shrinks the trial basis ([V W S P] -> [V W S] -> [V W]) when the projected
// problem is degenerate. On success replaces V, P, lam, pairing in place.
template <typename Scalar>
UpdateOutcome lhr_update(const Pencil<Scalar>& pencil, const LinearOperator<Scalar>& T,
                         const SolverConfig& cfg, const LinearOperator<Scalar>* Tproj,
                         Matrix<Scalar>& V, Matrix<Scalar>& P, std::vector<Index>& p_owner,
                         RealVector& lam, Pairing& pairing, const std::vector<bool>& locked,
                         EigenResult<Scalar>& res, Index it) {
  const Index n = pencil.n;
  const Index k = V.cols();

  std::vector<Index> unlocked;
  for (Index j = 0; j < k; ++j) {
    if (!locked[static_cast<std::size_t>(j)]) unlocked.push_back(j);
  }

  // Preconditioned residual directions for the unlocked pairs.
  Matrix<Scalar> Vu = select_columns(V, unlocked);
  RealVector lam_u(static_cast<Index>(unlocked.size()));
  for (std::size_t t = 0; t < unlocked.size(); ++t) {
    lam_u(static_cast<Index>(t)) = lam(unlocked[t]);
  }
  Matrix<Scalar> Ru = pencil.A.apply(Vu) - pencil.B.apply(Vu) * lam_u.template cast<Scalar>().asDiagonal();
  Matrix<Scalar> W = T.apply(Ru);

  Matrix<Scalar> S(n, 0);
  if (cfg.include_s && W.cols() > 0) {
    Matrix<Scalar> Sraw =
        pencil.A.apply(W) - pencil.B.apply(W) * lam_u.template cast<Scalar>().asDiagonal();
    S = T.apply(Sraw);
  }

  // P columns whose owner is locked are excluded from the trial basis.
  std::vector<Index> p_cols;
  for (Index j = 0; j < P.cols(); ++j) {
    if (!locked[static_cast<std::size_t>(p_owner[static_cast<std::size_t>(j)])]) {
      p_cols.push_back(j);
    }
  }
  Matrix<Scalar> Pu = select_columns(P, p_cols);

  // Shrink ladder: drop P first, then S.
  std::vector<std::vector<const Matrix<Scalar>*>> ladder;
  if (Pu.cols() > 0 && S.cols() > 0) ladder.push_back({&V, &W, &S, &Pu});
  if (Pu.cols() > 0 && S.cols() == 0) ladder.push_back({&V, &W, &Pu});
  if (S.cols() > 0) ladder.push_back({&V, &W, &S});
  ladder.push_back({&V, &W});

  for (std::size_t lvl = 0; lvl < ladder.size(); ++lvl) {
    Matrix<Scalar> Z = concat_blocks<Scalar>(ladder[lvl], n);
    BOrthoResult<Scalar> ortho = b_orthonormalize<Scalar>(Z, pencil.B, cfg.drop_tol);
    if (ortho.Q.cols() < k) continue;
    Index v_kept = 0;
    for (Index idx : ortho.kept) {
      if (idx < k) ++v_kept;
    }
    const Matrix<Scalar>& Q = ortho.Q;
    const Index m = Q.cols();

    try {
      if (cfg.extraction == ExtractionKind::refined) {
        RefinedResult<Scalar> rf = refined_extract<Scalar>(Q, pencil, Tproj, lam(0));
        Matrix<Scalar> newV = rf.v;
        Matrix<Scalar> newP(n, 0);
        std::vector<Index> new_owner;
        if (m > v_kept) {
          Vector<Scalar> ptail = Q.rightCols(m - v_kept) * rf.y.tail(m - v_kept);
          if (ptail.norm() > 0.0 && ptail.allFinite()) {
            newP = ptail;
            new_owner.push_back(0);
          }
        }
        pairing.clear();
        lam = rayleigh_quotient_block<Scalar>(newV, pencil, pairing);
        b_normalize_block(newV, pencil.B, pairing);
        if (newP.cols() > 0) b_normalize_block(newP, pencil.B, Pairing{});
        V = std::move(newV);
        P = std::move(newP);
        p_owner = std::move(new_owner);
        return {true, m};
      }

      THarmonicResult er = t_harmonic_extract<Scalar>(Q, pencil, Tproj, cfg.sigma,
                                                      cfg.cond_limit);
      if (er.Y.cols() < k) continue;

      if (cfg.check_extraction) {
        const double worst = pg_check<Scalar>(Q, er.theta.head(k), er.Y.leftCols(k),
                                              pencil, Tproj, cfg.sigma);
        res.max_pg_residual = std::max(res.max_pg_residual, worst);
        if (worst > cfg.check_tol) {
          push_warning(res, "extraction self-check exceeded tolerance at iteration " +
                                std::to_string(it));
        }
      }

      Matrix<Scalar> Ysel;
      Pairing new_pairing;
      if constexpr (std::is_same_v<Scalar, double>) {
        SplitBasis sb = split_conjugate_basis(er.Y.leftCols(k));
        if (sb.tail_flag) {
          push_warning(res, "conjugate pair split at the selection boundary at iteration " +
                                std::to_string(it));
        }
        if (!sb.pairing.empty() || sb.tail_flag) ++res.conjugate_events;
        Ysel = sb.Yprime;
        new_pairing = sb.pairing;
      } else {
        for (Index j = 0; j < k; ++j) {
          if (!effectively_real(er.xi(j))) {
            ++res.conjugate_events;
            break;
          }
        }
        Ysel = er.Y.leftCols(k);
      }

      Matrix<Scalar> newV = Q * Ysel;
      ensure_finite(newV, "block update");
      Matrix<Scalar> newP(n, 0);
      std::vector<Index> new_owner;
      if (m > v_kept) {
        Matrix<Scalar> Pfull = Q.rightCols(m - v_kept) * Ysel.bottomRows(m - v_kept);
        std::vector<Index> keep;
        for (Index j = 0; j < Pfull.cols(); ++j) {
          if (Pfull.col(j).norm() > 0.0 && Pfull.col(j).allFinite()) keep.push_back(j);
        }
        newP = select_columns(Pfull, keep);
        new_owner = keep;
      }
      pairing = std::move(new_pairing);
      lam = rayleigh_quotient_block<Scalar>(newV, pencil, pairing);
      b_normalize_block(newV, pencil.B, pairing);
      if (newP.cols() > 0) b_normalize_block(newP, pencil.B, Pairing{});
      V = std::move(newV);
      P = std::move(newP);
      p_owner = std::move(new_owner);
      return {true, m};
    } catch (const DegenerateProjectedProblem&) {
      if (lvl + 1 == ladder.size()) {
        push_warning(res, "projected problem degenerate on the smallest trial basis at iteration " +
                              std::to_string(it));
        return {false, m};
      }
      continue;
    }
  }
  push_warning(res, "trial basis lost rank at iteration " + std::to_string(it));
  return {false, 0};
}

template <typename Scalar>
EigenResult<Scalar> lhr_block_core(const Pencil<Scalar>& pencil,
                                   const LinearOperator<Scalar>& T, bool t_hpd,
                                   const SolverConfig& cfg, const Matrix<Scalar>* initial) {
  if (cfg.k < 1) throw Error("block size must be at least 1");
  if (cfg.extraction == ExtractionKind::refined && cfg.k != 1) {
    throw Error("refined extraction is restricted to block size 1");
  }
  if (cfg.extraction != ExtractionKind::harmonic && !t_hpd) {
    throw Error(to_string(cfg.extraction) +
                " extraction requires a positive definite preconditioner");
  }
  if (!(cfg.tol > 0.0)) throw Error("tolerance must be positive");
  if (cfg.maxit < 0) throw Error("maxit must be nonnegative");
  if (!std::isfinite(cfg.sigma)) throw Error("shift must be finite");
  const Index n = pencil.n;
  const Index k = cfg.k;
  if (4 * k > n) throw Error("block size too large for the problem dimension");
  const Index tracked = cfg.tracked > 0 ? std::min(cfg.tracked, k) : k;
  const LinearOperator<Scalar>* Tproj =
      cfg.extraction == ExtractionKind::harmonic ? nullptr : &T;

  Matrix<Scalar> V;
  if (initial != nullptr) {
    if (initial->rows() != n || initial->cols() != k) {
      throw Error("initial block has the wrong shape");
    }
    V = *initial;
  } else {
    V = default_guess<Scalar>(n, k, cfg.seed);
  }
  ensure_finite(V, "initial block");
  BOrthoResult<Scalar> ov = b_orthonormalize<Scalar>(V, pencil.B, cfg.drop_tol);
  if (ov.Q.cols() < k) throw Error("initial block is B-rank deficient");
  V = std::move(ov.Q);

  EigenResult<Scalar> res;
  Matrix<Scalar> P(n, 0);
  std::vector<Index> p_owner;
  Pairing pairing;
  RealVector lam = rayleigh_quotient_block<Scalar>(V, pencil, pairing);
  std::vector<bool> locked(static_cast<std::size_t>(k), false);

  Index it = 0;
  for (;; ++it) {
    Matrix<Scalar> AV = pencil.A.apply(V);
    Matrix<Scalar> BV = pencil.B.apply(V);
    RealVector resid = residual_norms(AV, BV, lam, cfg.relative_residual);
    if (cfg.record_history) {
      res.value_history.push_back(lam);
      res.residual_history.push_back(resid);
    }

    bool all_tracked = true;
    for (Index idx : tracked_indices(lam, cfg.sigma, tracked)) {
      if (!(resid(idx) <= cfg.tol)) {
        all_tracked = false;
        break;
      }
    }
    if (all_tracked) {
      res.converged = true;
      break;
    }
    if (it >= cfg.maxit) break;

    if (cfg.locking) {
      for (Index j = 0; j < k; ++j) locked[static_cast<std::size_t>(j)] = resid(j) <= cfg.tol;
    }

    UpdateOutcome step = lhr_update<Scalar>(pencil, T, cfg, Tproj, V, P, p_owner, lam,
                                            pairing, locked, res, it);
    if (!step.ok) break;
    res.subspace_dims.push_back(step.basis_width);
  }
  res.iterations = it;

  // Standard Rayleigh-Ritz post-processing on the final block.
  RitzSolution<Scalar> rr = rayleigh_ritz_hermitian<Scalar>(V, pencil, cfg.sigma, cfg.drop_tol);
  res.values = rr.values;
  res.vectors = std::move(rr.vectors);
  {
    Matrix<Scalar> AV = pencil.A.apply(res.vectors);
    Matrix<Scalar> BV = pencil.B.apply(res.vectors);
    res.residuals = residual_norms(AV, BV, res.values, cfg.relative_residual);
  }
  if (res.vectors.cols() < k) {
    push_warning(res, "final block lost rank in the Rayleigh-Ritz pass");
  }
  return res;
}

}  // namespace

EigenResult<Complex> plhr_solve(const ComplexPencil& pencil, const ComplexOperator& T,
                                bool t_hpd, const SolverConfig& config,
                                const ComplexMatrix* initial) {
  if (config.k != 1) throw Error("plhr_solve requires block size 1");
  return lhr_block_core<Complex>(pencil, T, t_hpd, config, initial);
}

EigenResult<Complex> bplhr_solve(const ComplexPencil& pencil, const ComplexOperator& T,
                                 bool t_hpd, const SolverConfig& config,
                                 const ComplexMatrix* initial) {
  return lhr_block_core<Complex>(pencil, T, t_hpd, config, initial);
}

EigenResult<double> bplhr_real_solve(const RealPencil& pencil, const RealOperator& T,
                                     bool t_hpd, const SolverConfig& config,
                                     const RealMatrix* initial) {
  return lhr_block_core<double>(pencil, T, t_hpd, config, initial);
}

EigenResult<double> bgd_solve(const RealPencil& pencil, const RealOperator& T,
                              const SolverConfig& config, const RealMatrix* initial) {
  if (config.k < 1) throw Error("block size must be at least 1");
  if (!(config.tol > 0.0)) throw Error("tolerance must be positive");
  const Index n = pencil.n;
  const Index k = config.k;
  const Index m_max = config.m_max > 0 ? config.m_max : 6 * k;
  if (m_max < 2 * k) throw Error("subspace cap must be at least twice the block size");
  if (m_max > n) throw Error("subspace cap exceeds the problem dimension");
  const Index tracked = config.tracked > 0 ? std::min(config.tracked, k) : k;

  RealMatrix X;
  if (initial != nullptr) {
    if (initial->rows() != n || initial->cols() != k) {
      throw Error("initial block has the wrong shape");
    }
    X = *initial;
  } else {
    X = gaussian_block(n, k, config.seed);
  }
  ensure_finite(X, "initial block");

  EigenResult<double> res;
  BOrthoResult<double> oq = b_orthonormalize<double>(X, pencil.B, config.drop_tol);
  if (oq.Q.cols() < k) throw Error("initial block is B-rank deficient");
  RealMatrix Q = std::move(oq.Q);
  std::vector<bool> locked(static_cast<std::size_t>(k), false);
  RealVector lam;
  Pairing pairing;

  Index it = 0;
  for (;; ++it) {
    res.subspace_dims.push_back(Q.cols());
    THarmonicResult er;
    try {
      er = t_harmonic_extract<double>(Q, pencil, nullptr, config.sigma, config.cond_limit);
    } catch (const DegenerateProjectedProblem&) {
      push_warning(res, "projected problem degenerate at iteration " + std::to_string(it));
      break;
    }
    if (er.Y.cols() < k) {
      push_warning(res, "trial subspace lost rank at iteration " + std::to_string(it));
      break;
    }
    SplitBasis sb = split_conjugate_basis(er.Y.leftCols(k));
    if (sb.tail_flag) {
      push_warning(res, "conjugate pair split at the selection boundary at iteration " +
                            std::to_string(it));
    }
    if (!sb.pairing.empty() || sb.tail_flag) ++res.conjugate_events;
    X = Q * sb.Yprime;
    pairing = sb.pairing;
    lam = rayleigh_quotient_block<double>(X, pencil, pairing);
    b_normalize_block(X, pencil.B, pairing);

    RealMatrix AX = pencil.A.apply(X);
    RealMatrix BX = pencil.B.apply(X);
    RealVector resid = residual_norms(AX, BX, lam, config.relative_residual);
    if (config.record_history) {
      res.value_history.push_back(lam);
      res.residual_history.push_back(resid);
    }

    bool all_tracked = true;
    for (Index idx : tracked_indices(lam, config.sigma, tracked)) {
      if (!(resid(idx) <= config.tol)) {
        all_tracked = false;
        break;
      }
    }
    if (all_tracked) {
      res.converged = true;
      break;
    }
    if (it >= config.maxit) break;

    if (config.locking) {
      for (Index j = 0; j < k; ++j) {
        locked[static_cast<std::size_t>(j)] = resid(j) <= config.tol;
      }
    }
    std::vector<Index> unlocked;
    for (Index j = 0; j < k; ++j) {
      if (!locked[static_cast<std::size_t>(j)]) unlocked.push_back(j);
    }
    RealMatrix Ru(n, static_cast<Index>(unlocked.size()));
    for (std::size_t t = 0; t < unlocked.size(); ++t) {
      const Index j = unlocked[t];
      Ru.col(static_cast<Index>(t)) = AX.col(j) - lam(j) * BX.col(j);
    }
    RealMatrix D = T.apply(Ru);

    // Collapse to the current Ritz block once the cap would be exceeded.
    if (Q.cols() + D.cols() > m_max) {
      BOrthoResult<double> ox = b_orthonormalize<double>(X, pencil.B, config.drop_tol);
      Q = std::move(ox.Q);
      if (Q.cols() < k) {
        push_warning(res, "Ritz block lost rank at collapse at iteration " + std::to_string(it));
        break;
      }
    }
    RealMatrix Znew(n, Q.cols() + D.cols());
    Znew.leftCols(Q.cols()) = Q;
    Znew.rightCols(D.cols()) = D;
    BOrthoResult<double> oz = b_orthonormalize<double>(Znew, pencil.B, config.drop_tol);
    if (oz.Q.cols() < k) {
      push_warning(res, "trial subspace lost rank at iteration " + std::to_string(it));
      break;
    }
    Q = std::move(oz.Q);
  }
  res.iterations = it;

  RitzSolution<double> rr = rayleigh_ritz_hermitian<double>(X.cols() > 0 ? X : Q, pencil,
                                                            config.sigma, config.drop_tol);
  res.values = rr.values;
  res.vectors = std::move(rr.vectors);
  {
    RealMatrix AV = pencil.A.apply(res.vectors);
    RealMatrix BV = pencil.B.apply(res.vectors);
    res.residuals = residual_norms(AV, BV, res.values, config.relative_residual);
  }
  return res;
}

Thm21Bound convergence_bound_thm21(const RealVector& mu, Index q) {
  const Index n = mu.size();
  if (n < 3) throw Error("spectrum must contain at least three values");
  if (q < 1 || q > n - 2) throw Error("zero index must be interior");
  for (Index j = 1; j < n; ++j) {
    if (!(mu(j) >= mu(j - 1))) throw Error("spectrum must be ascending");
  }
  const double scale = std::max(std::abs(mu(0)), std::abs(mu(n - 1)));
  if (std::abs(mu(q)) > 1e-13 * scale) throw Error("mu(q) must be zero");
  if (!(mu(q - 1) < 0.0) || !(mu(q + 1) > 0.0)) {
    throw Error("mu(q) must be the only zero of the spectrum");
  }
  const double abs1 = std::abs(mu(0));
  const double absqm = std::abs(mu(q - 1));
  const double mun = mu(n - 1);
  const double muq1 = mu(q + 1);
  Thm21Bound out;
  if (abs1 - absqm <= mun - muq1) {
    out.branch = 1;
    out.kappa = (mun / muq1) * (1.0 + (mun - muq1) / absqm);
  } else {
    out.branch = 2;
    out.kappa = (mu(0) / mu(q - 1)) * (1.0 + (abs1 - absqm) / muq1);
  }
  out.bound = (out.kappa - 1.0) / (out.kappa + 1.0);
  return out;
}

}  // namespace plhr
