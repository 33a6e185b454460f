// SPDX-License-Identifier: Apache-2.0

#ifndef PLHR_COMMON_HPP
#define PLHR_COMMON_HPP

#include <Eigen/Dense>

#include <complex>
#include <random>
#include <stdexcept>
#include <string>

namespace plhr {

using Index = Eigen::Index;
using Real = double;
using Complex = std::complex<double>;

using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Signals cond(M) beyond the acceptance threshold in a projected pencil
// solve; solvers catch it to shrink the trial basis before giving up.
class DegenerateProjectedProblem : public Error {
 public:
  explicit DegenerateProjectedProblem(const std::string& what) : Error(what) {}
};

template <typename Derived>
void ensure_finite(const Eigen::MatrixBase<Derived>& m, const char* context) {
  if (!m.allFinite()) {
    throw Error(std::string(context) + ": non-finite entries");
  }
}

// Deterministic N(0,1) block, filled column-major. All seeded randomness in
// the library flows through this one generator.
inline RealMatrix gaussian_block(Index n, Index m, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  RealMatrix g(n, m);
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < n; ++i) {
      g(i, j) = dist(gen);
    }
  }
  return g;
}

inline ComplexMatrix complex_gaussian_block(Index n, Index m,
                                            std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  ComplexMatrix g(n, m);
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < n; ++i) {
      double re = dist(gen);
      double im = dist(gen);
      g(i, j) = Complex(re, im);
    }
  }
  return g;
}

}  // namespace plhr

#endif  // PLHR_COMMON_HPP
