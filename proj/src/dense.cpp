// SPDX-License-Identifier: Apache-2.0

#include "plhr/dense.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace plhr {

namespace {

constexpr double kConjTol = 1e-12;

void check_square_pair(Index lr, Index lc, Index mr, Index mc) {
  if (lr != lc || mr != mc || lr != mr) {
    throw Error("solve_projected_pencil: L and M must be square and equal");
  }
}

// Group layout of the raw eigensolver output: singletons for real values,
// adjacent index pairs for conjugate values.
struct Group {
  Index first;
  Index second;  // -1 for singletons
  double mod;
  double re;
};

SmallEigenSolution sort_and_pack_real(const ComplexVector& xi,
                                      const ComplexMatrix& Y) {
  const Index m = xi.size();
  std::vector<Group> groups;
  groups.reserve(static_cast<std::size_t>(m));
  for (Index j = 0; j < m;) {
    if (effectively_real(xi(j), kConjTol)) {
      groups.push_back({j, -1, std::abs(xi(j)), xi(j).real()});
      ++j;
      continue;
    }
    if (j + 1 >= m ||
        std::abs(xi(j + 1) - std::conj(xi(j))) >
            kConjTol * (1.0 + std::abs(xi(j)))) {
      throw Error(
          "solve_projected_pencil: conjugate pair not adjacent in "
          "eigensolver output");
    }
    groups.push_back({j, j + 1, std::abs(xi(j)), xi(j).real()});
    j += 2;
  }
  std::stable_sort(groups.begin(), groups.end(),
                   [](const Group& a, const Group& b) {
                     if (a.mod != b.mod) {
                       return a.mod < b.mod;
                     }
                     return a.re < b.re;
                   });
  SmallEigenSolution out;
  out.values.resize(m);
  out.vectors.resize(Y.rows(), m);
  Index t = 0;
  for (const Group& g : groups) {
    if (g.second < 0) {
      out.values(t) = Complex(xi(g.first).real(), 0.0);
      ComplexVector y = Y.col(g.first);
      double nrm = y.norm();
      out.vectors.col(t) = (nrm > 0.0) ? ComplexVector(y / nrm) : y;
      ++t;
      continue;
    }
    Index pos = (xi(g.first).imag() > 0.0) ? g.first : g.second;
    ComplexVector y = Y.col(pos);
    double nrm = y.norm();
    if (nrm > 0.0) {
      y /= nrm;
    }
    Complex v = (pos == g.first) ? xi(g.first) : xi(g.second);
    out.values(t) = v;
    out.vectors.col(t) = y;
    out.values(t + 1) = std::conj(v);
    out.vectors.col(t + 1) = y.conjugate();
    t += 2;
  }
  return out;
}

SmallEigenSolution solve_real_core(const RealMatrix& L, const RealMatrix& M,
                                   double cond_limit) {
  Eigen::PartialPivLU<RealMatrix> lu(M);
  double rc = lu.rcond();
  if (!(rc > 0.0) || 1.0 / rc > cond_limit) {
    throw DegenerateProjectedProblem(
        "solve_projected_pencil: projected mass matrix is numerically "
        "singular");
  }
  RealMatrix C = lu.solve(L);
  if (!C.allFinite()) {
    throw DegenerateProjectedProblem(
        "solve_projected_pencil: non-finite reduction");
  }
  Eigen::EigenSolver<RealMatrix> es(C);
  if (es.info() != Eigen::Success) {
    throw DegenerateProjectedProblem(
        "solve_projected_pencil: dense eigensolve did not converge");
  }
  return sort_and_pack_real(es.eigenvalues(), es.eigenvectors());
}

}  // namespace

SmallEigenSolution solve_projected_pencil(const RealMatrix& L,
                                          const RealMatrix& M,
                                          double cond_limit) {
  check_square_pair(L.rows(), L.cols(), M.rows(), M.cols());
  ensure_finite(L, "solve_projected_pencil L");
  ensure_finite(M, "solve_projected_pencil M");
  return solve_real_core(L, M, cond_limit);
}

SmallEigenSolution solve_projected_pencil(const ComplexMatrix& L,
                                          const ComplexMatrix& M,
                                          double cond_limit) {
  check_square_pair(L.rows(), L.cols(), M.rows(), M.cols());
  ensure_finite(L, "solve_projected_pencil L");
  ensure_finite(M, "solve_projected_pencil M");
  bool real_data = (L.imag().array() == 0.0).all() &&
                   (M.imag().array() == 0.0).all();
  if (real_data) {
    return solve_real_core(L.real(), M.real(), cond_limit);
  }
  Eigen::PartialPivLU<ComplexMatrix> lu(M);
  double rc = lu.rcond();
  if (!(rc > 0.0) || 1.0 / rc > cond_limit) {
    throw DegenerateProjectedProblem(
        "solve_projected_pencil: projected mass matrix is numerically "
        "singular");
  }
  ComplexMatrix C = lu.solve(L);
  if (!C.allFinite()) {
    throw DegenerateProjectedProblem(
        "solve_projected_pencil: non-finite reduction");
  }
  Eigen::ComplexEigenSolver<ComplexMatrix> es(C);
  if (es.info() != Eigen::Success) {
    throw DegenerateProjectedProblem(
        "solve_projected_pencil: dense eigensolve did not converge");
  }
  const Index m = L.rows();
  std::vector<Index> idx(static_cast<std::size_t>(m));
  std::iota(idx.begin(), idx.end(), Index(0));
  const ComplexVector& xi = es.eigenvalues();
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) {
    double ma = std::abs(xi(a)), mb = std::abs(xi(b));
    if (ma != mb) {
      return ma < mb;
    }
    if (xi(a).real() != xi(b).real()) {
      return xi(a).real() < xi(b).real();
    }
    return xi(a).imag() < xi(b).imag();
  });
  SmallEigenSolution out;
  out.values.resize(m);
  out.vectors.resize(m, m);
  for (Index t = 0; t < m; ++t) {
    Index s = idx[static_cast<std::size_t>(t)];
    out.values(t) = xi(s);
    ComplexVector y = es.eigenvectors().col(s);
    double nrm = y.norm();
    out.vectors.col(t) = (nrm > 0.0) ? ComplexVector(y / nrm) : y;
  }
  return out;
}

SplitBasis split_conjugate_basis(const ComplexMatrix& Y, double tol) {
  ensure_finite(Y, "split_conjugate_basis");
  const Index k = Y.cols();
  std::vector<Index> real_cols;
  std::vector<Index> pair_cols;
  Index tail = -1;
  for (Index j = 0; j < k;) {
    double scale = Y.col(j).cwiseAbs().maxCoeff();
    double im = Y.col(j).imag().cwiseAbs().maxCoeff();
    if (im <= tol * (scale + 1e-300)) {
      real_cols.push_back(j);
      ++j;
      continue;
    }
    if (j + 1 < k) {
      double mismatch =
          (Y.col(j + 1) - Y.col(j).conjugate()).cwiseAbs().maxCoeff();
      if (mismatch <= tol * (scale + 1e-300)) {
        pair_cols.push_back(j);
        j += 2;
        continue;
      }
      throw Error(
          "split_conjugate_basis: complex column without adjacent conjugate");
    }
    tail = j;
    ++j;
  }
  const Index nr = static_cast<Index>(real_cols.size());
  const Index np = static_cast<Index>(pair_cols.size());
  const bool has_tail = tail >= 0;
  SplitBasis out;
  out.tail_flag = has_tail;
  out.Yprime.resize(Y.rows(), k);
  Index t = 0;
  for (Index j : real_cols) {
    out.Yprime.col(t++) = Y.col(j).real();
  }
  for (Index j : pair_cols) {
    out.Yprime.col(t++) = Y.col(j).real();
  }
  if (has_tail) {
    out.Yprime.col(t++) = Y.col(tail).real();
  }
  const Index im_offset = t;
  for (Index j : pair_cols) {
    out.Yprime.col(t++) = Y.col(j).imag();
  }
  out.pairing.reserve(static_cast<std::size_t>(np));
  for (Index p = 0; p < np; ++p) {
    out.pairing.emplace_back(nr + p, im_offset + p);
  }
  return out;
}

double hermitian_largest_eigenvalue(const RealOperator& op, std::uint64_t seed,
                                    int max_steps, double tol) {
  const Index n = op.rows();
  if (n == 0) {
    throw Error("hermitian_largest_eigenvalue: empty operator");
  }
  int steps = std::min<int>(max_steps, static_cast<int>(n));
  RealMatrix V(n, steps + 1);
  RealVector diag(steps), sub(steps);
  RealVector v = gaussian_block(n, 1, seed);
  v.normalize();
  V.col(0) = v;
  RealVector w(n), c;
  double theta = 0.0;
  for (int j = 0; j < steps; ++j) {
    op.apply_into(V.col(j), w);
    diag(j) = V.col(j).dot(w);
    for (int pass = 0; pass < 2; ++pass) {
      c.noalias() = V.leftCols(j + 1).transpose() * w;
      w.noalias() -= V.leftCols(j + 1) * c;
    }
    double b = w.norm();
    Eigen::SelfAdjointEigenSolver<RealMatrix> es;
    es.computeFromTridiagonal(diag.head(j + 1), sub.head(j));
    if (es.info() != Eigen::Success) {
      throw Error("hermitian_largest_eigenvalue: tridiagonal solve failed");
    }
    theta = es.eigenvalues()(j);
    double resid = b * std::abs(es.eigenvectors()(j, j));
    if (resid <= tol * std::max(std::abs(theta), 1e-300) || b == 0.0) {
      return theta;
    }
    sub(j) = b;
    V.col(j + 1) = w / b;
  }
  return theta;
}

}  // namespace plhr
