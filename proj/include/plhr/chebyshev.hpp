// SPDX-License-Identifier: Apache-2.0

#ifndef PLHR_CHEBYSHEV_HPP
#define PLHR_CHEBYSHEV_HPP

#include "plhr/common.hpp"

namespace plhr {

// Truncated Chebyshev series of |x| on [a,b], shifted so the polynomial is
// strictly positive over the interval. Evaluation uses the Clenshaw
// recurrence; the same recurrence drives matrix-argument application.
struct ChebAbsPoly {
  double a = 0.0;
  double b = 0.0;
  int degree = 0;
  RealVector coeff;       // series coefficients, shift folded into coeff(0)
  double shift = 0.0;     // positivity shift added to the raw series
  double raw_min = 0.0;   // sampled minimum of the raw series
  double max_value = 0.0; // sampled maximum of the shifted series

  // Maps x to [-1,1] and evaluates the shifted series.
  double evaluate(double x) const;
  // Raw series without the positivity shift.
  double evaluate_raw(double x) const;
};

// Coefficients come from Gauss-Chebyshev quadrature; for intervals centered
// at zero the odd coefficients are identically zero and are set exactly.
// The positivity shift is max(0, -min p) plus margin_rel times the interval
// scale, sampled at 10001 points including the endpoints.
ChebAbsPoly chebyshev_abs_poly(double a, double b, int degree,
                               double margin_rel = 1e-10);

}  // namespace plhr

#endif  // PLHR_CHEBYSHEV_HPP
