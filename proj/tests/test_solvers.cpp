// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <vector>

#include "plhr/base_null.hpp"
#include "plhr/common.hpp"
#include "plhr/dense.hpp"
#include "plhr/operators.hpp"
#include "plhr/problems.hpp"
#include "plhr/solvers.hpp"

using namespace plhr;

namespace {

RealMatrix random_spd(Index n, std::uint64_t seed, double shift = 0.5) {
  RealMatrix G = gaussian_block(n, n, seed);
  RealMatrix S = G * G.transpose() / double(n);
  S.diagonal().array() += shift;
  return S;
}

RealMatrix random_symmetric(Index n, std::uint64_t seed) {
  RealMatrix G = gaussian_block(n, n, seed);
  return 0.5 * (G + G.transpose());
}

struct Setup {
  RealMatrix A, B, T;
  RealPencil pencil{identity_operator<double>(1), identity_operator<double>(1), 1};
  RealOperator Top = identity_operator<double>(1);
  RealVector spectrum;
};

// Random symmetric pencil with the absolute-value inverse at sigma as the
// preconditioner, plus the exact spectrum for oracles.
Setup make_setup(Index n, double sigma, std::uint64_t seed) {
  Setup s;
  s.A = random_symmetric(n, seed);
  s.B = random_spd(n, seed + 1, 1.0);
  s.pencil = RealPencil::generalized(dense_operator<double>(s.A),
                                     dense_operator<double>(s.B));
  Eigen::GeneralizedSelfAdjointEigenSolver<RealMatrix> es(s.A, s.B);
  s.spectrum = es.eigenvalues();
  // T = B^{-1/2} |B^{-1/2} (A - sigma B) B^{-1/2}|^{-1} B^{-1/2}: assemble
  // through the pencil eigenbasis, which diagonalizes both A and B.
  RealMatrix V = es.eigenvectors();  // B-orthonormal columns
  RealVector d = (s.spectrum.array() - sigma).abs().inverse();
  s.T = V * d.asDiagonal() * V.transpose();
  s.Top = dense_operator<double>(s.T);
  return s;
}

std::vector<double> nearest_values(const RealVector& spectrum, double sigma,
                                   Index count) {
  std::vector<double> all(spectrum.data(), spectrum.data() + spectrum.size());
  std::sort(all.begin(), all.end(), [&](double a, double b) {
    double da = std::abs(a - sigma), db = std::abs(b - sigma);
    if (da != db) return da < db;
    return a < b;
  });
  all.resize(static_cast<std::size_t>(count));
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace

TEST_CASE("bplhr_real converges to the eigenpairs nearest the shift") {
  const Index n = 80, k = 4;
  const double sigma = 0.1;
  Setup s = make_setup(n, sigma, 201);
  SolverConfig cfg;
  cfg.sigma = sigma;
  cfg.k = k;
  cfg.tol = 1e-9;
  cfg.maxit = 200;
  cfg.seed = 5;
  auto res = bplhr_real_solve(s.pencil, s.Top, true, cfg);
  REQUIRE(res.converged);
  std::vector<double> want = nearest_values(s.spectrum, sigma, k);
  std::vector<double> got(res.values.data(), res.values.data() + k);
  std::sort(got.begin(), got.end());
  for (Index j = 0; j < k; ++j) {
    CHECK(got[static_cast<std::size_t>(j)] ==
          doctest::Approx(want[static_cast<std::size_t>(j)]).epsilon(1e-8));
  }
  for (Index j = 0; j < k; ++j) CHECK(res.residuals(j) <= 10 * cfg.tol);
  // History sizes: one record per performed iteration plus the initial state.
  CHECK(res.residual_history.size() == std::size_t(res.iterations) + 1);
  CHECK(res.value_history.size() == res.residual_history.size());
}

TEST_CASE("plhr_solve equals bplhr_solve at block size one") {
  const Index n = 50;
  const double sigma = -0.2;
  Setup s = make_setup(n, sigma, 211);
  ComplexPencil cp = complexify(s.pencil);
  ComplexOperator cT = complexify(s.Top);
  SolverConfig cfg;
  cfg.sigma = sigma;
  cfg.k = 1;
  cfg.tol = 1e-9;
  cfg.maxit = 100;
  cfg.seed = 7;
  auto a = plhr_solve(cp, cT, true, cfg);
  auto b = bplhr_solve(cp, cT, true, cfg);
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  CHECK(a.iterations == b.iterations);
  REQUIRE(a.value_history.size() == b.value_history.size());
  for (std::size_t i = 0; i < a.value_history.size(); ++i) {
    CHECK((a.value_history[i] - b.value_history[i]).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK_THROWS_AS(plhr_solve(cp, cT, true, [&] {
                    SolverConfig c = cfg;
                    c.k = 2;
                    return c;
                  }()),
                  Error);
}

TEST_CASE("real and complex lanes produce identical histories on real data") {
  const Index n = 70, k = 3;
  const double sigma = 0.05;
  Setup s = make_setup(n, sigma, 221);
  SolverConfig cfg;
  cfg.sigma = sigma;
  cfg.k = k;
  cfg.tol = 1e-8;
  cfg.maxit = 150;
  RealMatrix guess = gaussian_block(n, k, 9);
  auto real_res = bplhr_real_solve(s.pencil, s.Top, true, cfg, &guess);
  ComplexPencil cp = complexify(s.pencil);
  ComplexOperator cT = complexify(s.Top);
  ComplexMatrix cguess = guess.cast<Complex>();
  auto cplx_res = bplhr_solve(cp, cT, true, cfg, &cguess);

  REQUIRE(real_res.converged);
  REQUIRE(cplx_res.converged);
  CHECK(real_res.conjugate_events == 0);
  CHECK(cplx_res.conjugate_events == 0);
  CHECK(real_res.iterations == cplx_res.iterations);
  REQUIRE(real_res.value_history.size() == cplx_res.value_history.size());
  for (std::size_t i = 0; i < real_res.value_history.size(); ++i) {
    CHECK((real_res.value_history[i] - cplx_res.value_history[i])
              .cwiseAbs()
              .maxCoeff() <= 1e-12);
  }
}

TEST_CASE("soft locking drops the locked pair's directions from the trial basis") {
  const Index n = 60, k = 3;
  const double sigma = 0.0;
  Setup s = make_setup(n, sigma, 231);
  // Plant the exact eigenvector nearest sigma as the first column: it locks
  // at iteration 0 and stops contributing W/S/P columns.
  Eigen::GeneralizedSelfAdjointEigenSolver<RealMatrix> es(s.A, s.B);
  Index nearest = 0;
  for (Index j = 1; j < n; ++j) {
    if (std::abs(es.eigenvalues()(j) - sigma) <
        std::abs(es.eigenvalues()(nearest) - sigma)) {
      nearest = j;
    }
  }
  RealMatrix guess(n, k);
  guess.col(0) = es.eigenvectors().col(nearest);
  guess.rightCols(k - 1) = gaussian_block(n, k - 1, 11);

  SolverConfig cfg;
  cfg.sigma = sigma;
  cfg.k = k;
  cfg.tol = 1e-8;
  cfg.maxit = 2;
  cfg.locking = true;
  auto res = bplhr_real_solve(s.pencil, s.Top, true, cfg, &guess);
  REQUIRE(res.subspace_dims.size() >= 2);
  // Iteration 0 has no P yet: V (k) + W (k-1) + S (k-1) = 3k-2 columns.
  CHECK(res.subspace_dims[0] == 3 * k - 2);
  // Iteration 1 adds P for unlocked pairs only: 4k-3 columns.
  CHECK(res.subspace_dims[1] == 4 * k - 3);

  // Without locking the full basis is generated: 3k then 4k.
  cfg.locking = false;
  auto res2 = bplhr_real_solve(s.pencil, s.Top, true, cfg, &guess);
  REQUIRE(res2.subspace_dims.size() >= 2);
  CHECK(res2.subspace_dims[0] == 3 * k);
  CHECK(res2.subspace_dims[1] == 4 * k);
}

TEST_CASE("omitting the s directions shrinks the basis accordingly") {
  const Index n = 50, k = 2;
  Setup s = make_setup(n, 0.1, 241);
  SolverConfig cfg;
  cfg.sigma = 0.1;
  cfg.k = k;
  cfg.tol = 1e-12;
  cfg.maxit = 2;
  cfg.include_s = false;
  auto res = bplhr_real_solve(s.pencil, s.Top, true, cfg);
  REQUIRE(res.subspace_dims.size() >= 2);
  CHECK(res.subspace_dims[0] == 2 * k);
  CHECK(res.subspace_dims[1] == 3 * k);
}

TEST_CASE("tracked subset convergence ignores the buffer pair") {
  const Index n = 60, k = 3;
  const double sigma = 0.02;
  Setup s = make_setup(n, sigma, 251);
  SolverConfig cfg;
  cfg.sigma = sigma;
  cfg.k = k;
  cfg.tracked = 2;
  cfg.tol = 1e-10;
  cfg.maxit = 300;
  auto res = bplhr_real_solve(s.pencil, s.Top, true, cfg);
  REQUIRE(res.converged);
  // Values are ordered by distance to sigma after the final RR pass: the
  // tracked pairs are the first two and must be converged.
  CHECK(res.residuals(0) <= cfg.tol * 10);
  CHECK(res.residuals(1) <= cfg.tol * 10);
  std::vector<double> want = nearest_values(s.spectrum, sigma, 2);
  std::vector<double> got{res.values(0), res.values(1)};
  std::sort(got.begin(), got.end());
  CHECK(got[0] == doctest::Approx(want[0]).epsilon(1e-8));
  CHECK(got[1] == doctest::Approx(want[1]).epsilon(1e-8));
}

TEST_CASE("zero iteration cap reports the initial state only") {
  const Index n = 40;
  Setup s = make_setup(n, 0.1, 261);
  SolverConfig cfg;
  cfg.sigma = 0.1;
  cfg.k = 2;
  cfg.maxit = 0;
  auto res = bplhr_real_solve(s.pencil, s.Top, true, cfg);
  CHECK_FALSE(res.converged);
  CHECK(res.iterations == 0);
  CHECK(res.residual_history.size() == 1);
  CHECK(res.values.size() == 2);
}

TEST_CASE("identical configuration and seed reproduce bitwise-equal histories") {
  const Index n = 50;
  Setup s = make_setup(n, -0.1, 271);
  SolverConfig cfg;
  cfg.sigma = -0.1;
  cfg.k = 2;
  cfg.tol = 1e-9;
  cfg.maxit = 100;
  cfg.seed = 3;
  auto a = bplhr_real_solve(s.pencil, s.Top, true, cfg);
  auto b = bplhr_real_solve(s.pencil, s.Top, true, cfg);
  REQUIRE(a.residual_history.size() == b.residual_history.size());
  for (std::size_t i = 0; i < a.residual_history.size(); ++i) {
    CHECK((a.residual_history[i] - b.residual_history[i]).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK((a.values - b.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("refined extraction drives the single-vector iteration") {
  const Index n = 60;
  const double sigma = 0.12;
  Setup s = make_setup(n, sigma, 281);
  SolverConfig cfg;
  cfg.sigma = sigma;
  cfg.k = 1;
  cfg.tol = 1e-9;
  cfg.maxit = 200;
  cfg.extraction = ExtractionKind::refined;
  auto res = bplhr_real_solve(s.pencil, s.Top, true, cfg);
  REQUIRE(res.converged);
  std::vector<double> want = nearest_values(s.spectrum, sigma, 1);
  CHECK(res.values(0) == doctest::Approx(want[0]).epsilon(1e-8));
  // Refined extraction rejects block sizes above one.
  cfg.k = 2;
  CHECK_THROWS_AS(bplhr_real_solve(s.pencil, s.Top, true, cfg), Error);
}

TEST_CASE("non-harmonic extraction refuses an indefinite preconditioner") {
  const Index n = 30;
  Setup s = make_setup(n, 0.1, 291);
  SolverConfig cfg;
  cfg.sigma = 0.1;
  cfg.k = 1;
  cfg.extraction = ExtractionKind::t_harmonic;
  CHECK_THROWS_AS(bplhr_real_solve(s.pencil, s.Top, /*t_hpd=*/false, cfg), Error);
  cfg.extraction = ExtractionKind::harmonic;
  CHECK_NOTHROW(bplhr_real_solve(s.pencil, s.Top, false, cfg));
}

TEST_CASE("bgd subspace grows by one block per step and collapses at the cap") {
  const Index n = 60, k = 2;
  const double sigma = 0.1;
  Setup s = make_setup(n, sigma, 301);
  SolverConfig cfg;
  cfg.sigma = sigma;
  cfg.k = k;
  cfg.tol = 1e-14;  // force a long run so the cap is hit
  cfg.maxit = 12;
  auto res = bgd_solve(s.pencil, s.Top, cfg);
  REQUIRE(res.subspace_dims.size() >= 8);
  const Index m_max = 6 * k;
  Index expected = k;
  for (std::size_t i = 0; i < res.subspace_dims.size(); ++i) {
    CHECK(res.subspace_dims[i] == expected);
    expected = (expected + k > m_max) ? 2 * k : expected + k;
  }
}

TEST_CASE("bgd converges to the nearest pairs with harmonic extraction") {
  const Index n = 60, k = 2;
  const double sigma = 0.07;
  Setup s = make_setup(n, sigma, 311);
  SolverConfig cfg;
  cfg.sigma = sigma;
  cfg.k = k;
  cfg.tol = 1e-9;
  cfg.maxit = 400;
  auto res = bgd_solve(s.pencil, s.Top, cfg);
  REQUIRE(res.converged);
  std::vector<double> want = nearest_values(s.spectrum, sigma, k);
  std::vector<double> got(res.values.data(), res.values.data() + k);
  std::sort(got.begin(), got.end());
  CHECK(got[0] == doctest::Approx(want[0]).epsilon(1e-8));
  CHECK(got[1] == doctest::Approx(want[1]).epsilon(1e-8));
  // The cap must be respected throughout.
  for (Index d : res.subspace_dims) CHECK(d <= 6 * k);
}

TEST_CASE("theorem bound evaluates the worked spectra") {
  RealVector mu1(5);
  mu1 << -2, -1, 0, 1, 2;
  Thm21Bound b1 = convergence_bound_thm21(mu1, 2);
  CHECK(b1.branch == 1);
  CHECK(b1.kappa == doctest::Approx(4.0));
  CHECK(b1.bound == doctest::Approx(0.6));

  RealVector mu2(5);
  mu2 << -4, -1, 0, 2, 3;
  Thm21Bound b2 = convergence_bound_thm21(mu2, 2);
  CHECK(b2.branch == 2);
  CHECK(b2.kappa == doctest::Approx(10.0));
  CHECK(b2.bound == doctest::Approx(9.0 / 11.0));

  RealVector mu3(3);
  mu3 << -1, 0, 1;
  Thm21Bound b3 = convergence_bound_thm21(mu3, 1);
  CHECK(b3.kappa == doctest::Approx(1.0));
  CHECK(b3.bound == doctest::Approx(0.0));

  RealVector bad(4);
  bad << -1, 0, 2, 1;  // not ascending
  CHECK_THROWS_AS(convergence_bound_thm21(bad, 1), Error);
  RealVector nozero(3);
  nozero << -1, 0.5, 1;
  CHECK_THROWS_AS(convergence_bound_thm21(nozero, 1), Error);
  CHECK_THROWS_AS(convergence_bound_thm21(mu1, 0), Error);
  CHECK_THROWS_AS(convergence_bound_thm21(mu1, 4), Error);
}

TEST_CASE("base_null converges and respects the two-term bound on a known pencil") {
  const Index n = 30;
  RealVector a(n);
  for (Index i = 0; i < n; ++i) a(i) = -2.0 + 5.0 * double(i) / double(n - 1);
  const Index q = 12;
  a(q) = 0.0;  // exact interior zero: lambda_q = 0 for A = diag(a), B = I
  std::sort(a.data(), a.data() + n);
  Index qpos = 0;
  for (Index i = 0; i < n; ++i) {
    if (a(i) == 0.0) qpos = i;
  }
  RealMatrix A = a.asDiagonal();
  RealPencil pencil = RealPencil::standard(dense_operator<double>(A));
  RealOperator T = identity_operator<double>(n);

  // The even ladder puts the zero's neighbors at +-5/29 against endpoints of
  // magnitude 2 and 3, so kappa is a few hundred and the per-step factor is
  // close to one; give the iteration the budget that implies.
  BaseNullResult res = base_null_solve(pencil, T, 0.0, BaseNullMode::two_term,
                                       1e-10, 8000, 17);
  REQUIRE(res.converged);
  CHECK(std::abs(res.value) <= 1e-9);
  CHECK(res.residual <= 1e-9);

  // Every recorded T-norm reduction obeys the theorem bound.
  Thm21Bound bound = convergence_bound_thm21(a, qpos);
  for (double ratio : res.ratio_history) {
    CHECK(ratio <= bound.bound + 1e-10);
  }
  CHECK(res.tnorm_history.size() == res.ratio_history.size() + 1);
  CHECK(res.value_history.size() == res.residual_history.size());
}

TEST_CASE("base_null three-term variant also converges") {
  const Index n = 24;
  RealVector a(n);
  for (Index i = 0; i < n; ++i) a(i) = double(i) - 7.0;
  RealMatrix A = a.asDiagonal();
  RealPencil pencil = RealPencil::standard(dense_operator<double>(A));
  RealOperator T = identity_operator<double>(n);
  BaseNullResult res = base_null_solve(pencil, T, 0.0, BaseNullMode::three_term,
                                       1e-10, 400, 19);
  CHECK(res.converged);
}

TEST_CASE("base_null starts from an exact null vector as a fixed point") {
  const Index n = 20;
  RealVector a(n);
  for (Index i = 0; i < n; ++i) a(i) = double(i) - 9.0;
  RealMatrix A = a.asDiagonal();
  RealPencil pencil = RealPencil::standard(dense_operator<double>(A));
  RealOperator T = identity_operator<double>(n);
  RealVector v0 = RealVector::Zero(n);
  v0(9) = 1.0;  // a(9) == 0
  BaseNullResult res = base_null_solve(pencil, T, 0.0, BaseNullMode::two_term,
                                       1e-10, 50, 1, &v0);
  CHECK(res.converged);
  CHECK(res.iterations == 0);
  CHECK(std::abs(std::abs(res.vector(9)) - 1.0) <= 1e-12);
}

TEST_CASE("base_null cannot reach lambda_q without a null-space component") {
  // With a diagonal operator and an exactly zero null coordinate, every
  // correction direction keeps that coordinate zero: the iterate can never
  // acquire the target eigenvector. The T-norm still shrinks geometrically
  // (the residual only sees the complement), so the run must either exhaust
  // maxit or settle on some other eigenpair, never on lambda_q.
  const Index n = 16;
  RealVector a(n);
  for (Index i = 0; i < n; ++i) a(i) = double(i) - 5.0;
  RealMatrix A = a.asDiagonal();
  RealPencil pencil = RealPencil::standard(dense_operator<double>(A));
  RealOperator T = identity_operator<double>(n);
  RealVector v0 = RealVector::Ones(n);
  v0(5) = 0.0;  // no component along the null vector e_5
  BaseNullResult res = base_null_solve(pencil, T, 0.0, BaseNullMode::two_term,
                                       1e-12, 200, 1, &v0);
  const bool reached_target = res.converged && std::abs(res.value) < 0.5;
  CHECK_FALSE(reached_target);
  CHECK(res.vector(5) == 0.0);
  // The reductions never flatline, so the stagnation valve stays closed.
  CHECK_FALSE(res.stagnated);

  // A near-singular complement coordinate attracts the iterate instead: the
  // eigenresidual stop accepts that nearby pair, still never lambda_q.
  RealVector b(5);
  b << -1.0, 0.0, 1e-9, 1.0, 2.0;
  RealMatrix Ab = b.asDiagonal();
  RealPencil pb = RealPencil::standard(dense_operator<double>(Ab));
  RealOperator Tb = identity_operator<double>(5);
  RealVector w0 = RealVector::Ones(5);
  w0(1) = 0.0;
  BaseNullResult near = base_null_solve(pb, Tb, 0.0, BaseNullMode::two_term,
                                        1e-12, 500, 1, &w0);
  REQUIRE(near.converged);
  CHECK(near.value == doctest::Approx(1e-9).epsilon(1e-3));
  CHECK(near.vector(1) == 0.0);
}
