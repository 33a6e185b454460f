// SPDX-License-Identifier: Apache-2.0

#ifndef PLHR_SOLVERS_HPP
#define PLHR_SOLVERS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "plhr/common.hpp"
#include "plhr/operators.hpp"

namespace plhr {

enum class ExtractionKind { t_harmonic, harmonic, refined };

std::string to_string(ExtractionKind kind);
ExtractionKind extraction_from_string(const std::string& name);

struct SolverConfig {
  double sigma = 0.0;
  Index k = 1;        // block size
  Index tracked = 0;  // pairs that must converge; 0 means all k
  double tol = 1e-6;  // tolerance on the Euclidean residual norm ||Av - lam Bv||
  bool relative_residual = false;  // divide each norm by |lam| (B-unit vectors)
  Index maxit = 1000;
  std::uint64_t seed = 1;  // initial-guess seed when no guess is supplied
  // Soft locking freezes converged pairs inside V and stops generating their
  // W/S/P directions. Off by default: freezing one copy of a multiplicity-2
  // eigenvalue starves its unconverged twin of search directions, and pairs
  // hovering at the tolerance churn the trial basis as they latch and
  // unlatch. Enable it to trade iterations for cheaper late-stage steps.
  bool locking = false;
  bool include_s = true;  // second preconditioned direction in the trial basis
  ExtractionKind extraction = ExtractionKind::t_harmonic;
  bool record_history = true;
  double drop_tol = 1e-8;     // B-orthonormalization rank cutoff
  double cond_limit = 1e12;   // projected-solve conditioning guard
  bool check_extraction = false;  // per-iteration Petrov-Galerkin self-check
  double check_tol = 1e-8;
  Index m_max = 0;  // generalized Davidson subspace cap; 0 means 6k
};

template <typename Scalar>
struct EigenResult {
  bool converged = false;
  Index iterations = 0;  // update steps performed before the convergence check passed
  RealVector values;     // Rayleigh quotients after the final Rayleigh-Ritz pass
  Matrix<Scalar> vectors;   // B-normalized eigenvector approximations
  RealVector residuals;     // relative residual norms of the reported pairs
  std::vector<RealVector> value_history;     // per-iteration Rayleigh quotients
  std::vector<RealVector> residual_history;  // per-iteration residual norms
  std::vector<Index> subspace_dims;          // trial-basis width per update step
  std::vector<std::string> warnings;
  Index conjugate_events = 0;    // iterations where a conjugate pair was selected
  double max_pg_residual = 0.0;  // largest self-check value seen (when enabled)
};

// Single-vector preconditioned locally harmonic residual iteration:
// literally the block method with k = 1.
EigenResult<Complex> plhr_solve(const ComplexPencil& pencil,
                                const ComplexOperator& T, bool t_hpd,
                                const SolverConfig& config,
                                const ComplexMatrix* initial = nullptr);

// Block method in complex arithmetic.
EigenResult<Complex> bplhr_solve(const ComplexPencil& pencil,
                                 const ComplexOperator& T, bool t_hpd,
                                 const SolverConfig& config,
                                 const ComplexMatrix* initial = nullptr);

// Block method kept in real arithmetic; complex projected pairs are carried
// as adjacent real/imaginary column pairs of the trial basis.
EigenResult<double> bplhr_real_solve(const RealPencil& pencil,
                                     const RealOperator& T, bool t_hpd,
                                     const SolverConfig& config,
                                     const RealMatrix* initial = nullptr);

// Block generalized Davidson with harmonic extraction: the trial subspace
// accumulates preconditioned residuals until m_max and then collapses to the
// current Ritz block.
EigenResult<double> bgd_solve(const RealPencil& pencil, const RealOperator& T,
                              const SolverConfig& config,
                              const RealMatrix* initial = nullptr);

struct Thm21Bound {
  double kappa = 0.0;  // effective condition number of the absolute-value pencil
  double bound = 0.0;  // (kappa - 1) / (kappa + 1)
  int branch = 0;      // 1 when the negative tail is the short side
};

// Convergence-rate bound for the preconditioned null-space iteration on an
// indefinite diagonal pencil: mu must be ascending with mu(q) == 0,
// mu(q - 1) < 0 < mu(q + 1); q is a zero-based index.
Thm21Bound convergence_bound_thm21(const RealVector& mu, Index q);

}  // namespace plhr

#endif  // PLHR_SOLVERS_HPP
