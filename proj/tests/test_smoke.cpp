// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "plhr/harness.hpp"
#include "plhr/problems.hpp"
#include "plhr/solvers.hpp"

using namespace plhr;

TEST_CASE("small fd solve through the harness") {
  ExperimentConfig cfg;
  cfg.problem = "fd";
  cfg.omega = 4;
  cfg.sigma = 120.0;
  cfg.solver = "bplhr_real";
  cfg.extraction = "t_harmonic";
  cfg.prec = "dense_abs";
  cfg.k = 2;
  cfg.tol = 1e-8;
  cfg.maxit = 200;
  cfg.seeds = {1};

  RunReport report = run_experiment(cfg);
  REQUIRE(report.runs.size() == 1);
  const RunRecord& run = report.runs.front();
  CHECK(!run.failed);
  CHECK(run.converged);

  SpectrumOracle oracle = fd_laplacian_spectrum(4);
  for (Index j = 0; j < run.values.size(); ++j) {
    double best = 1e300;
    for (Index i = 0; i < oracle.eigenvalues.size(); ++i) {
      best = std::min(best, std::abs(run.values(j) - oracle.eigenvalues(i)));
    }
    CHECK(best <= 1e-6 * std::abs(run.values(j)));
  }
}
