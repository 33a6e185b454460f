// SPDX-License-Identifier: Apache-2.0

#ifndef PLHR_BASE_NULL_HPP
#define PLHR_BASE_NULL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "plhr/common.hpp"
#include "plhr/operators.hpp"

namespace plhr {

enum class BaseNullMode { two_term, three_term };

std::string to_string(BaseNullMode mode);
BaseNullMode base_null_mode_from_string(const std::string& name);

struct BaseNullResult {
  bool converged = false;
  bool stagnated = false;  // no detectable null-space component in the iterate
  Index iterations = 0;
  double value = 0.0;  // Rayleigh quotient of the final iterate
  RealVector vector;   // B-normalized final iterate
  double residual = 0.0;               // ||A v - value B v|| of the final iterate
  std::vector<double> residual_history;  // eigenresidual norm per iteration
  std::vector<double> value_history;     // Rayleigh quotient per iteration
  std::vector<double> tnorm_history;     // ||r||_T per iteration, r = (lambda_q B - A) v
  std::vector<double> ratio_history;     // consecutive T-norm ratios, one per update
  std::vector<std::string> warnings;
};

// Idealized null-space solver for (A - lambda_q B) v = 0 with a known
// eigenvalue lambda_q: each step adds the correction from
// span{T r, T (A - lambda_q B) T r (, v - v_prev)} that minimizes the T-norm
// of the next residual, via the normal equations in the T-inner product.
// Convergence is declared on the eigenresidual against the Rayleigh quotient.
BaseNullResult base_null_solve(const RealPencil& pencil, const RealOperator& T,
                               double lambda_q, BaseNullMode mode, double tol,
                               Index maxit, std::uint64_t seed = 1,
                               const RealVector* initial = nullptr);

}  // namespace plhr

#endif  // PLHR_BASE_NULL_HPP
