// SPDX-License-Identifier: Apache-2.0

#include "plhr/chebyshev.hpp"

#include <cmath>
#include <limits>

namespace plhr {

namespace {

double clenshaw(const RealVector& c, double t) {
  const Index m = c.size() - 1;
  double b1 = 0.0, b2 = 0.0;
  for (Index k = m; k >= 1; --k) {
    double bk = c(k) + 2.0 * t * b1 - b2;
    b2 = b1;
    b1 = bk;
  }
  return c(0) + t * b1 - b2;
}

}  // namespace

double ChebAbsPoly::evaluate(double x) const {
  double t = (2.0 * x - (a + b)) / (b - a);
  return clenshaw(coeff, t);
}

double ChebAbsPoly::evaluate_raw(double x) const {
  return evaluate(x) - shift;
}

ChebAbsPoly chebyshev_abs_poly(double a, double b, int degree,
                               double margin_rel) {
  if (!(a < b)) {
    throw Error("chebyshev_abs_poly: interval must satisfy a < b");
  }
  if (degree < 1 || degree > 64) {
    throw Error("chebyshev_abs_poly: degree out of range [1,64]");
  }
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const bool symmetric = center == 0.0;
  const int quad = 4096;
  ChebAbsPoly p;
  p.a = a;
  p.b = b;
  p.degree = degree;
  p.coeff = RealVector::Zero(degree + 1);
  for (int j = 0; j <= degree; ++j) {
    if (symmetric && (j % 2 == 1)) {
      continue;  // |x| is even on a symmetric interval
    }
    double s = 0.0;
    for (int i = 0; i < quad; ++i) {
      double theta = M_PI * (i + 0.5) / quad;
      double t = std::cos(theta);
      s += std::abs(center + half * t) * std::cos(j * theta);
    }
    p.coeff(j) = (j == 0 ? 1.0 : 2.0) * s / quad;
  }
  const int sample = 10001;
  double raw_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i < sample; ++i) {
    double x = a + (b - a) * static_cast<double>(i) / (sample - 1);
    double t = (2.0 * x - (a + b)) / (b - a);
    raw_min = std::min(raw_min, clenshaw(p.coeff, t));
  }
  p.raw_min = raw_min;
  const double scale = std::max(std::abs(a), std::abs(b));
  p.shift = std::max(0.0, -raw_min) + margin_rel * scale;
  p.coeff(0) += p.shift;
  double max_value = 0.0;
  for (int i = 0; i < sample; ++i) {
    double x = a + (b - a) * static_cast<double>(i) / (sample - 1);
    max_value = std::max(max_value, p.evaluate(x));
  }
  p.max_value = max_value;
  return p;
}

}  // namespace plhr
