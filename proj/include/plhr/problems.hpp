// SPDX-License-Identifier: Apache-2.0

#ifndef PLHR_PROBLEMS_HPP
#define PLHR_PROBLEMS_HPP

#include <Eigen/Sparse>

#include <string>
#include <utility>

#include "plhr/common.hpp"
#include "plhr/operators.hpp"

namespace plhr {

// Interior grid size per side for mesh exponent omega: h = 2^-omega and
// (2^omega - 1)^2 unknowns under homogeneous Dirichlet conditions.
inline Index fd_side(int omega) {
  if (omega < 1 || omega > 14) {
    throw Error("fd_side: omega out of range [1,14]");
  }
  return (Index(1) << omega) - 1;
}

inline Index fd_size(int omega) { return fd_side(omega) * fd_side(omega); }

// Matrix-free 5-point Laplacian on the unit square, scaled by 1/h^2.
RealOperator fd_laplacian_operator(int omega);

// Analytic Dirichlet Laplacian eigenvalues (4/h^2)(sin^2(p pi h/2) +
// sin^2(q pi h/2)), ascending.
struct SpectrumOracle {
  RealVector eigenvalues;
  std::string source;
};

SpectrumOracle fd_laplacian_spectrum(int omega);

struct FeMatrices {
  Eigen::SparseMatrix<double> stiffness;
  Eigen::SparseMatrix<double> mass;
  Index n;
};

// Bilinear Q1 elements on a uniform ne x ne mesh of the unit square with
// homogeneous Dirichlet conditions; n = (ne-1)^2.
FeMatrices fe_laplacian(int ne);

// Dense generalized spectrum of an assembled pencil, ascending.
SpectrumOracle dense_spectrum(const RealMatrix& A, const RealMatrix& B);

// Eigendecomposition of the Hermitian matrix A - sigma B, reused by the
// dense preconditioner constructors.
struct HermitianEig {
  RealVector lam;
  RealMatrix Q;
};

HermitianEig hermitian_eig(const RealMatrix& M);

enum class AvMode { abs, plain };

struct DenseAvInverse {
  RealMatrix T;
  bool pseudo_inverted = false;
  double min_abs_eig = 0.0;
};

// T = f(A - sigma B) with f(x) = 1/|x| (abs) or 1/x (plain) through the
// eigendecomposition; eigenvalues within 1e-12 of the largest magnitude
// times machine-scale are treated as zero (pseudo-inversion).
DenseAvInverse dense_av_inverse_from(const HermitianEig& eig, AvMode mode,
                                     double pseudo_tol = 1e-12);
DenseAvInverse dense_av_inverse(const RealMatrix& A, const RealMatrix& B,
                                double sigma, AvMode mode,
                                double pseudo_tol = 1e-12);

struct PerturbedPreconditioner {
  RealMatrix T;
  double perturbation_norm = 0.0;  // equals eps * ||(A - sigma B)^{-1}||
};

// T = f(A - sigma B) + E with E = eps ||(A-sigma B)^{-1}|| G^T G / ||G^T G||
// for a seeded Gaussian G. E depends only on (n, sigma spectrum, eps, seed),
// so both flavors built with the same seed share the same perturbation.
PerturbedPreconditioner perturbed_preconditioner_from(const HermitianEig& eig,
                                                      double eps,
                                                      std::uint64_t seed,
                                                      AvMode mode);
PerturbedPreconditioner perturbed_preconditioner(const RealMatrix& A,
                                                 const RealMatrix& B,
                                                 double sigma, double eps,
                                                 std::uint64_t seed,
                                                 AvMode mode);

}  // namespace plhr

#endif  // PLHR_PROBLEMS_HPP
