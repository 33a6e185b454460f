// SPDX-License-Identifier: Apache-2.0

#include "plhr/problems.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <vector>

#include "plhr/dense.hpp"

namespace plhr {

RealOperator fd_laplacian_operator(int omega) {
  const Index N = fd_side(omega);
  const Index n = N * N;
  const double h = 1.0 / static_cast<double>(Index(1) << omega);
  const double inv_h2 = 1.0 / (h * h);
  return RealOperator(
      n, [N, inv_h2](const Eigen::Ref<const RealMatrix>& x,
                     Eigen::Ref<RealMatrix> y) {
        for (Index col = 0; col < x.cols(); ++col) {
          const double* xv = x.col(col).data();
          double* yv = y.col(col).data();
          for (Index j = 0; j < N; ++j) {
            const Index row0 = j * N;
            for (Index i = 0; i < N; ++i) {
              const Index p = row0 + i;
              double v = 4.0 * xv[p];
              if (i > 0) v -= xv[p - 1];
              if (i + 1 < N) v -= xv[p + 1];
              if (j > 0) v -= xv[p - N];
              if (j + 1 < N) v -= xv[p + N];
              yv[p] = inv_h2 * v;
            }
          }
        }
      });
}

SpectrumOracle fd_laplacian_spectrum(int omega) {
  const Index N = fd_side(omega);
  const double h = 1.0 / static_cast<double>(Index(1) << omega);
  const double scale = 4.0 / (h * h);
  RealVector vals(N * N);
  Index t = 0;
  for (Index p = 1; p <= N; ++p) {
    double sp = std::sin(0.5 * M_PI * static_cast<double>(p) * h);
    for (Index q = 1; q <= N; ++q) {
      double sq = std::sin(0.5 * M_PI * static_cast<double>(q) * h);
      vals(t++) = scale * (sp * sp + sq * sq);
    }
  }
  std::sort(vals.data(), vals.data() + vals.size());
  return SpectrumOracle{std::move(vals), "analytic"};
}

FeMatrices fe_laplacian(int ne) {
  if (ne < 2 || ne > 4096) {
    throw Error("fe_laplacian: ne out of range [2,4096]");
  }
  const Index side = ne - 1;
  const Index n = side * side;
  const double h = 1.0 / static_cast<double>(ne);
  // Local Q1 matrices, nodes ordered counterclockwise from the lower-left
  // corner of each element.
  const double ke[4][4] = {{4, -1, -2, -1},
                           {-1, 4, -1, -2},
                           {-2, -1, 4, -1},
                           {-1, -2, -1, 4}};
  const double me[4][4] = {
      {4, 2, 1, 2}, {2, 4, 2, 1}, {1, 2, 4, 2}, {2, 1, 2, 4}};
  const double ks = 1.0 / 6.0;
  const double ms = h * h / 36.0;
  std::vector<Eigen::Triplet<double>> tk, tm;
  tk.reserve(static_cast<std::size_t>(16) * ne * ne);
  tm.reserve(static_cast<std::size_t>(16) * ne * ne);
  auto interior = [&](Index gx, Index gy) -> Index {
    if (gx < 1 || gx > side || gy < 1 || gy > side) {
      return -1;
    }
    return (gx - 1) + side * (gy - 1);
  };
  for (Index ey = 0; ey < ne; ++ey) {
    for (Index ex = 0; ex < ne; ++ex) {
      const Index gx[4] = {ex, ex + 1, ex + 1, ex};
      const Index gy[4] = {ey, ey, ey + 1, ey + 1};
      Index dof[4];
      for (int a = 0; a < 4; ++a) {
        dof[a] = interior(gx[a], gy[a]);
      }
      for (int a = 0; a < 4; ++a) {
        if (dof[a] < 0) continue;
        for (int b = 0; b < 4; ++b) {
          if (dof[b] < 0) continue;
          tk.emplace_back(dof[a], dof[b], ks * ke[a][b]);
          tm.emplace_back(dof[a], dof[b], ms * me[a][b]);
        }
      }
    }
  }
  FeMatrices out;
  out.n = n;
  out.stiffness.resize(n, n);
  out.mass.resize(n, n);
  out.stiffness.setFromTriplets(tk.begin(), tk.end());
  out.mass.setFromTriplets(tm.begin(), tm.end());
  out.stiffness.makeCompressed();
  out.mass.makeCompressed();
  return out;
}

SpectrumOracle dense_spectrum(const RealMatrix& A, const RealMatrix& B) {
  if (A.rows() != A.cols() || B.rows() != B.cols() || A.rows() != B.rows()) {
    throw Error("dense_spectrum: dimension mismatch");
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<RealMatrix> es(
      A, B, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success) {
    throw Error("dense_spectrum: generalized eigensolve failed");
  }
  return SpectrumOracle{es.eigenvalues(), "dense"};
}

HermitianEig hermitian_eig(const RealMatrix& M) {
  if (M.rows() != M.cols()) {
    throw Error("hermitian_eig: matrix must be square");
  }
  RealMatrix S = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(S);
  if (es.info() != Eigen::Success) {
    throw Error("hermitian_eig: eigensolve failed");
  }
  return HermitianEig{es.eigenvalues(), es.eigenvectors()};
}

DenseAvInverse dense_av_inverse_from(const HermitianEig& eig, AvMode mode,
                                     double pseudo_tol) {
  const Index n = eig.lam.size();
  const double scale = eig.lam.cwiseAbs().maxCoeff();
  DenseAvInverse out;
  out.min_abs_eig = eig.lam.cwiseAbs().minCoeff();
  RealVector f(n);
  for (Index i = 0; i < n; ++i) {
    double x = eig.lam(i);
    if (std::abs(x) <= pseudo_tol * scale) {
      f(i) = 0.0;
      out.pseudo_inverted = true;
    } else {
      f(i) = (mode == AvMode::abs) ? 1.0 / std::abs(x) : 1.0 / x;
    }
  }
  out.T.noalias() = eig.Q * f.asDiagonal() * eig.Q.transpose();
  out.T = 0.5 * (out.T + out.T.transpose()).eval();
  return out;
}

DenseAvInverse dense_av_inverse(const RealMatrix& A, const RealMatrix& B,
                                double sigma, AvMode mode, double pseudo_tol) {
  return dense_av_inverse_from(hermitian_eig(A - sigma * B), mode, pseudo_tol);
}

PerturbedPreconditioner perturbed_preconditioner_from(const HermitianEig& eig,
                                                      double eps,
                                                      std::uint64_t seed,
                                                      AvMode mode) {
  if (!(eps >= 0.0)) {
    throw Error("perturbed_preconditioner: eps must be nonnegative");
  }
  const Index n = eig.lam.size();
  const double min_abs = eig.lam.cwiseAbs().minCoeff();
  if (!(min_abs > 0.0)) {
    throw Error("perturbed_preconditioner: A - sigma B is singular");
  }
  DenseAvInverse base = dense_av_inverse_from(eig, mode);
  PerturbedPreconditioner out;
  out.perturbation_norm = eps / min_abs;
  out.T = base.T;
  if (eps > 0.0) {
    RealMatrix G = gaussian_block(n, n, seed);
    RealMatrix GtG = G.transpose() * G;
    GtG = 0.5 * (GtG + GtG.transpose()).eval();
    double gn = hermitian_largest_eigenvalue(dense_operator(RealMatrix(GtG)));
    if (!(gn > 0.0)) {
      throw Error("perturbed_preconditioner: degenerate Gaussian factor");
    }
    out.T += (out.perturbation_norm / gn) * GtG;
  }
  return out;
}

PerturbedPreconditioner perturbed_preconditioner(const RealMatrix& A,
                                                 const RealMatrix& B,
                                                 double sigma, double eps,
                                                 std::uint64_t seed,
                                                 AvMode mode) {
  return perturbed_preconditioner_from(hermitian_eig(A - sigma * B), eps, seed,
                                       mode);
}

}  // namespace plhr
