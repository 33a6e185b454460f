// SPDX-License-Identifier: Apache-2.0

#ifndef PLHR_HARNESS_HPP
#define PLHR_HARNESS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "plhr/common.hpp"

namespace plhr {

// Declarative experiment description. Parsed from JSON or assembled in code;
// validate() rejects inconsistent combinations before any heavy work starts.
struct ExperimentConfig {
  // Problem selection.
  std::string problem = "fd";  // fd | fe | matrix-market
  int omega = 5;               // fd mesh exponent, h = 2^-omega
  int ne = 50;                 // fe elements per side, n = (ne-1)^2
  std::string matrix_a;        // matrix-market file for A
  std::string matrix_b;        // matrix-market file for B; empty -> B = I

  // Shift sweep; `sigma` is used when `sigmas` is empty.
  double sigma = 0.0;
  std::vector<double> sigmas;

  // Solver selection. plhr is the single-vector scheme (k must be 1);
  // bplhr runs in complex arithmetic, bplhr_real entirely in real
  // arithmetic; bgd is the block generalized Davidson reference; base_null
  // is the idealized known-eigenvalue null-space solver.
  std::string solver = "bplhr_real";
  std::string extraction = "t_harmonic";  // t_harmonic | harmonic | refined
  std::string base_null_mode = "two_term";
  // base_null target eigenvalue; NaN means "use sigma".
  double lambda_q = nan_value();

  // Preconditioner: av_mg | inv_mg | dense_abs | dense_plain |
  // perturbed_abs | perturbed_plain | identity.
  std::string prec = "identity";
  double eps = 0.0;      // perturbation size for the perturbed flavors
  int omega_coarse = 4;  // multigrid coarse level
  int cheb_degree = 6;   // multigrid smoother polynomial degree
  int nu = 1;            // multigrid smoothing sweeps per side

  // Solver parameters.
  Index k = 1;
  Index tracked = 0;  // 0 -> k
  double tol = 1e-6;
  Index maxit = 1000;
  bool locking = false;  // soft locking; see SolverConfig for the trade-off
  bool include_s = true;
  bool relative_residual = false;
  Index m_max = 0;  // bgd basis cap; 0 -> 6k
  double drop_tol = 1e-8;
  double cond_limit = 1e12;
  bool check_extraction = false;

  std::vector<std::uint64_t> seeds{1};

  // Artifacts; empty out_dir skips file output.
  std::string out_dir;
  std::string label;
  int jobs = 1;

  static double nan_value();
};

ExperimentConfig config_from_json_text(const std::string& text);
ExperimentConfig config_from_json_file(const std::string& path);
std::string config_to_json(const ExperimentConfig& config);

// Throws Error with a precise message when the combination is invalid
// (unknown names, preconditioner/problem mismatch, extraction that needs an
// HPD preconditioner paired with an indefinite one, bad sizes).
void validate(const ExperimentConfig& config);

// One (scheme, sigma, seed) execution. `failed` marks a thrown solver or
// construction error, recorded in `message`; a clean non-converged run has
// failed = false, converged = false.
struct RunRecord {
  std::string scheme;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  bool converged = false;
  bool failed = false;
  std::string message;
  Index iterations = 0;
  RealVector values;
  RealVector residuals;
  std::vector<RealVector> value_history;
  std::vector<RealVector> residual_history;
  std::vector<Index> subspace_dims;
  Index conjugate_events = 0;
  double max_pg_residual = 0.0;
  std::vector<std::string> warnings;
  double wall_seconds = 0.0;
};

// Aggregate over seeds at fixed (scheme, sigma). Non-converged runs count as
// +infinity; `dash` is set when the lower median is +infinity, mirroring the
// "-" table entries. min/max iterations are taken over converged runs.
struct SweepCell {
  std::string scheme;
  double sigma = 0.0;
  Index min_iterations = 0;
  Index median_iterations = 0;
  Index max_iterations = 0;
  int converged_count = 0;
  int run_count = 0;
  bool dash = true;
};

struct RunReport {
  ExperimentConfig config;
  std::string environment;  // compiler and library stamp
  std::vector<RunRecord> runs;
  std::vector<SweepCell> cells;
};

// Builds the problem and preconditioner, executes every (sigma, seed) pair
// (in parallel when config.jobs > 1), aggregates cells, and writes artifacts
// when config.out_dir is set. Per-run solver failures are recorded, not
// fatal; configuration errors throw.
RunReport run_experiment(const ExperimentConfig& config);

// Reproduces a published study: table1/table2 run the five scheme rows on
// the fd problem (omega 7, tol 1e-6, block 11 tracking 10 at shifts
// 400..700, and block 21 tracking 20 at shifts 800..1400 respectively);
// table3 runs the mesh-independence sweep omega 6..9 (block 5 tracking 4,
// sigma 400, tol 1e-4). Three seeds per cell; rows sharing a shift share
// the initial guess.
RunReport reproduce_table(const std::string& which, int jobs = 1,
                          const std::string& out_dir = std::string());

// CSV history: header `iter,pair_index,residual_norm,rayleigh_quotient`,
// one row per tracked pair per performed iteration (the pre-iteration state
// of a 0-iteration run emits no rows), shortest round-trip number format.
void emit_history(const RunRecord& record, const std::string& path);
// Concatenates the histories of all runs in report order.
void emit_history(const RunReport& report, const std::string& path);

std::string report_to_json(const RunReport& report);
// Writes summary.json plus history_run<idx>.csv per run into dir.
void write_report(const RunReport& report, const std::string& dir);

}  // namespace plhr

#endif  // PLHR_HARNESS_HPP
