// SPDX-License-Identifier: Apache-2.0

#ifndef PLHR_OPERATORS_HPP
#define PLHR_OPERATORS_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <functional>
#include <memory>
#include <utility>

#include "plhr/common.hpp"

namespace plhr {

// Square linear map applied to column blocks. Operators are immutable after
// construction; apply is safe to call concurrently.
template <typename Scalar>
class LinearOperator {
 public:
  using Block = Matrix<Scalar>;
  using ApplyFn = std::function<void(const Eigen::Ref<const Block>&,
                                     Eigen::Ref<Block>)>;

  LinearOperator() = default;
  LinearOperator(Index n, ApplyFn apply, bool identity = false)
      : n_(n), apply_(std::move(apply)), identity_(identity) {}

  Index rows() const { return n_; }
  bool valid() const { return static_cast<bool>(apply_); }
  bool is_identity() const { return identity_; }

  Block apply(const Eigen::Ref<const Block>& x) const {
    if (x.rows() != n_) {
      throw Error("LinearOperator::apply: dimension mismatch");
    }
    if (identity_) {
      return x;
    }
    Block y(n_, x.cols());
    apply_(x, y);
    return y;
  }

  void apply_into(const Eigen::Ref<const Block>& x,
                  Eigen::Ref<Block> y) const {
    if (x.rows() != n_ || y.rows() != n_ || x.cols() != y.cols()) {
      throw Error("LinearOperator::apply_into: dimension mismatch");
    }
    if (identity_) {
      y = x;
      return;
    }
    apply_(x, y);
  }

 private:
  Index n_ = 0;
  ApplyFn apply_;
  bool identity_ = false;
};

using RealOperator = LinearOperator<Real>;
using ComplexOperator = LinearOperator<Complex>;

template <typename Scalar>
LinearOperator<Scalar> identity_operator(Index n) {
  return LinearOperator<Scalar>(
      n,
      [](const Eigen::Ref<const Matrix<Scalar>>& x,
         Eigen::Ref<Matrix<Scalar>> y) { y = x; },
      /*identity=*/true);
}

template <typename Scalar>
LinearOperator<Scalar> dense_operator(Matrix<Scalar> m) {
  if (m.rows() != m.cols()) {
    throw Error("dense_operator: matrix must be square");
  }
  auto held = std::make_shared<Matrix<Scalar>>(std::move(m));
  return LinearOperator<Scalar>(
      held->rows(),
      [held](const Eigen::Ref<const Matrix<Scalar>>& x,
             Eigen::Ref<Matrix<Scalar>> y) { y.noalias() = (*held) * x; });
}

template <typename Scalar>
LinearOperator<Scalar> sparse_operator(Eigen::SparseMatrix<Scalar> m) {
  if (m.rows() != m.cols()) {
    throw Error("sparse_operator: matrix must be square");
  }
  auto held = std::make_shared<Eigen::SparseMatrix<Scalar>>(std::move(m));
  held->makeCompressed();
  return LinearOperator<Scalar>(
      held->rows(),
      [held](const Eigen::Ref<const Matrix<Scalar>>& x,
             Eigen::Ref<Matrix<Scalar>> y) { y = (*held) * x; });
}

// Lifts a real operator to complex vectors by acting on real and imaginary
// parts in a single block apply. Exactly real inputs stay exactly real.
inline ComplexOperator complexify(RealOperator op) {
  if (op.is_identity()) {
    return identity_operator<Complex>(op.rows());
  }
  Index n = op.rows();
  auto held = std::make_shared<RealOperator>(std::move(op));
  return ComplexOperator(
      n, [held, n](const Eigen::Ref<const ComplexMatrix>& x,
                   Eigen::Ref<ComplexMatrix> y) {
        Index m = x.cols();
        RealMatrix packed(n, 2 * m);
        packed.leftCols(m) = x.real();
        packed.rightCols(m) = x.imag();
        RealMatrix out(n, 2 * m);
        held->apply_into(packed, out);
        y.real() = out.leftCols(m);
        y.imag() = out.rightCols(m);
      });
}

// Hermitian pencil A v = lambda B v with B Hermitian positive definite.
template <typename Scalar>
struct Pencil {
  LinearOperator<Scalar> A;
  LinearOperator<Scalar> B;
  Index n = 0;

  bool b_is_identity() const { return B.is_identity(); }

  static Pencil standard(LinearOperator<Scalar> a) {
    Index n = a.rows();
    return Pencil{std::move(a), identity_operator<Scalar>(n), n};
  }

  static Pencil generalized(LinearOperator<Scalar> a, LinearOperator<Scalar> b) {
    if (a.rows() != b.rows()) {
      throw Error("Pencil: A and B dimensions differ");
    }
    Index n = a.rows();
    return Pencil{std::move(a), std::move(b), n};
  }
};

using RealPencil = Pencil<Real>;
using ComplexPencil = Pencil<Complex>;

inline ComplexPencil complexify(const RealPencil& p) {
  return ComplexPencil{complexify(p.A), complexify(p.B), p.n};
}

// Randomized symmetry probe: max over samples of |(x,Ay) - (Ax,y)| relative
// to the sampled operator scale.
template <typename Scalar>
double hermitian_defect(const LinearOperator<Scalar>& op, int samples = 5,
                        std::uint64_t seed = 9001) {
  Index n = op.rows();
  double defect = 0.0;
  double scale = 0.0;
  for (int s = 0; s < samples; ++s) {
    Matrix<Scalar> xy;
    if constexpr (std::is_same_v<Scalar, Complex>) {
      xy = complex_gaussian_block(n, 2, seed + static_cast<std::uint64_t>(s));
    } else {
      xy = gaussian_block(n, 2, seed + static_cast<std::uint64_t>(s));
    }
    Matrix<Scalar> axy = op.apply(xy);
    Complex x_ay = xy.col(0).dot(axy.col(1));
    Complex ax_y = axy.col(0).dot(xy.col(1));
    defect = std::max(defect, std::abs(x_ay - ax_y));
    scale = std::max(scale, axy.col(1).norm() * xy.col(0).norm());
  }
  return defect / std::max(scale, 1e-300);
}

}  // namespace plhr

#endif  // PLHR_OPERATORS_HPP
