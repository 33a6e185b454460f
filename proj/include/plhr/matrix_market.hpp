// SPDX-License-Identifier: Apache-2.0

#ifndef PLHR_MATRIX_MARKET_HPP
#define PLHR_MATRIX_MARKET_HPP

#include <Eigen/Sparse>

#include <string>

#include "plhr/common.hpp"

namespace plhr {

// Square Hermitian matrix read from a Matrix Market file. Exactly one of
// real/cplx is populated, selected by complex_field.
struct MatrixMarketData {
  bool complex_field = false;
  Eigen::SparseMatrix<double> real;
  Eigen::SparseMatrix<Complex> cplx;
  Index n = 0;
};

// Accepts coordinate and array formats with real, integer, or complex
// fields. Symmetry must be symmetric or hermitian; general files are
// accepted only when numerically Hermitian to 1e-10 relative and are never
// symmetrized silently. Rectangular, pattern, and skew-symmetric inputs are
// rejected.
MatrixMarketData read_matrix_market(const std::string& path);

// Writes the lower triangle in coordinate format with symmetric (real) or
// hermitian (complex) qualifier and round-trip value precision. The input
// must be Hermitian to 1e-10 relative.
void write_matrix_market(const std::string& path,
                         const Eigen::SparseMatrix<double>& A);
void write_matrix_market(const std::string& path,
                         const Eigen::SparseMatrix<Complex>& A);

}  // namespace plhr

#endif  // PLHR_MATRIX_MARKET_HPP
