// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "plhr/common.hpp"
#include "plhr/harness.hpp"
#include "plhr/problems.hpp"

namespace {

std::string fmt(double x) {
  char buf[40];
  auto out = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, out.ptr);
}

void print_cells(const plhr::RunReport& report) {
  for (const plhr::SweepCell& c : report.cells) {
    std::cout << "cell scheme=" << c.scheme << " sigma=" << fmt(c.sigma)
              << " median=" << (c.dash ? "-" : std::to_string(c.median_iterations))
              << " converged=" << c.converged_count << "/" << c.run_count
              << "\n";
  }
}

int report_exit_code(const plhr::RunReport& report) {
  const bool all = std::all_of(report.runs.begin(), report.runs.end(),
                               [](const plhr::RunRecord& r) { return r.converged; });
  return all ? 0 : 2;
}

struct SolveFlags {
  std::string config_path;
  std::string problem;
  int omega = 0;
  int ne = 0;
  std::string matrix_a;
  std::string matrix_b;
  double sigma = 0.0;
  long long k = 0;
  double tol = 0.0;
  long long maxit = 0;
  std::string solver;
  std::string extraction;
  std::string prec;
  double eps = 0.0;
  std::vector<std::uint64_t> seeds;
  std::string out_dir;
  int jobs = 0;
};

int do_solve(const SolveFlags& f, const std::vector<bool>& provided) {
  plhr::ExperimentConfig cfg;
  if (!f.config_path.empty()) cfg = plhr::config_from_json_file(f.config_path);
  // provided[] order matches the registration order below.
  std::size_t i = 0;
  auto take = [&]() { return provided[i++]; };
  if (take()) cfg.problem = f.problem;
  if (take()) cfg.omega = f.omega;
  if (take()) cfg.ne = f.ne;
  if (take()) cfg.matrix_a = f.matrix_a;
  if (take()) cfg.matrix_b = f.matrix_b;
  if (take()) cfg.sigma = f.sigma;
  if (take()) cfg.k = static_cast<plhr::Index>(f.k);
  if (take()) cfg.tol = f.tol;
  if (take()) cfg.maxit = static_cast<plhr::Index>(f.maxit);
  if (take()) cfg.solver = f.solver;
  if (take()) cfg.extraction = f.extraction;
  if (take()) cfg.prec = f.prec;
  if (take()) cfg.eps = f.eps;
  if (take()) cfg.seeds = f.seeds;
  if (take()) cfg.out_dir = f.out_dir;
  if (take()) cfg.jobs = f.jobs;

  plhr::RunReport report = plhr::run_experiment(cfg);
  print_cells(report);
  for (const plhr::RunRecord& r : report.runs) {
    if (r.failed) {
      std::cout << "failed scheme=" << r.scheme << " sigma=" << fmt(r.sigma)
                << " seed=" << r.seed << " message=" << r.message << "\n";
    }
  }
  if (!cfg.out_dir.empty()) {
    std::cout << "report " << cfg.out_dir << "/summary.json\n";
  }
  return report_exit_code(report);
}

int do_bench(const std::string& which, const std::string& out_dir, int jobs) {
  plhr::RunReport report = plhr::reproduce_table(which, jobs, out_dir);
  print_cells(report);
  std::cout << "report " << out_dir << "/summary.json\n";
  return report_exit_code(report);
}

int do_spectrum(const std::string& problem, int omega, int ne,
                const std::string& matrix_a, double near, int count) {
  plhr::SpectrumOracle oracle;
  if (problem == "fd") {
    oracle = plhr::fd_laplacian_spectrum(omega);
  } else if (problem == "fe") {
    plhr::FeMatrices fe = plhr::fe_laplacian(ne);
    if (fe.n > 4000) {
      throw plhr::Error("fe spectrum uses a dense solve; limited to n <= 4000");
    }
    oracle = plhr::dense_spectrum(plhr::RealMatrix(fe.stiffness),
                                  plhr::RealMatrix(fe.mass));
  } else {
    throw plhr::Error("spectrum supports fd and fe problems; got '" + problem +
                      "'" + (matrix_a.empty() ? "" : " (matrix-market input has no oracle)"));
  }
  const plhr::Index n = oracle.eigenvalues.size();
  std::vector<plhr::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), plhr::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](plhr::Index a, plhr::Index b) {
    const double da = std::abs(oracle.eigenvalues(a) - near);
    const double db = std::abs(oracle.eigenvalues(b) - near);
    if (da != db) return da < db;
    return oracle.eigenvalues(a) < oracle.eigenvalues(b);
  });
  const plhr::Index m = std::min<plhr::Index>(count, n);
  for (plhr::Index i = 0; i < m; ++i) {
    std::cout << fmt(oracle.eigenvalues(order[static_cast<std::size_t>(i)]))
              << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Interior eigenpairs of Hermitian pencils via preconditioned locally "
      "harmonic residual solvers"};
  app.require_subcommand(1);

  // solve
  auto* solve = app.add_subcommand(
      "solve", "Run one experiment described by a JSON config and/or flags");
  SolveFlags sf;
  solve->add_option("--config", sf.config_path, "JSON configuration file");
  std::vector<CLI::Option*> solve_opts;
  solve_opts.push_back(solve->add_option("--problem", sf.problem,
                                         "Problem family: fd|fe|matrix-market"));
  solve_opts.push_back(
      solve->add_option("--omega", sf.omega, "fd mesh exponent, h = 2^-omega"));
  solve_opts.push_back(solve->add_option("--ne", sf.ne, "fe elements per side"));
  solve_opts.push_back(
      solve->add_option("--matrix-a", sf.matrix_a, "Matrix Market file for A"));
  solve_opts.push_back(
      solve->add_option("--matrix-b", sf.matrix_b, "Matrix Market file for B"));
  solve_opts.push_back(solve->add_option("--sigma", sf.sigma, "Target shift"));
  solve_opts.push_back(solve->add_option("--k", sf.k, "Block size"));
  solve_opts.push_back(
      solve->add_option("--tol", sf.tol, "Residual norm tolerance"));
  solve_opts.push_back(solve->add_option("--maxit", sf.maxit, "Iteration cap"));
  solve_opts.push_back(solve->add_option(
      "--solver", sf.solver, "plhr|bplhr|bplhr_real|bgd|base_null"));
  solve_opts.push_back(solve->add_option("--extraction", sf.extraction,
                                         "t_harmonic|harmonic|refined"));
  solve_opts.push_back(solve->add_option(
      "--prec", sf.prec,
      "identity|av_mg|inv_mg|dense_abs|dense_plain|perturbed_abs|perturbed_plain"));
  solve_opts.push_back(
      solve->add_option("--eps", sf.eps, "Perturbation size for perturbed_*"));
  solve_opts.push_back(solve->add_option(
      "--seed", sf.seeds, "Random seed; repeat the flag for a seed sweep"));
  solve_opts.push_back(
      solve->add_option("--out", sf.out_dir, "Output directory for artifacts"));
  solve_opts.push_back(
      solve->add_option("--jobs", sf.jobs, "Parallel runs (default 1)"));

  // bench
  auto* bench = app.add_subcommand(
      "bench", "Reproduce a published study: table1|table2|table3");
  std::string which;
  bench->add_option("table", which, "table1|table2|table3")->required();
  std::string bench_out;
  bench->add_option("--out", bench_out,
                    "Output directory (default <table>_report)");
  int bench_jobs = 1;
  bench->add_option("--jobs", bench_jobs, "Parallel runs (default 1)");

  // spectrum
  auto* spectrum = app.add_subcommand(
      "spectrum", "Print oracle eigenvalues nearest a shift");
  std::string sp_problem = "fd";
  int sp_omega = 5;
  int sp_ne = 50;
  std::string sp_matrix_a;
  double sp_near = 0.0;
  int sp_count = 10;
  spectrum->add_option("--problem", sp_problem, "fd|fe");
  spectrum->add_option("--omega", sp_omega, "fd mesh exponent");
  spectrum->add_option("--ne", sp_ne, "fe elements per side");
  spectrum->add_option("--matrix-a", sp_matrix_a, "unsupported; reported");
  spectrum->add_option("--near", sp_near, "Shift the values are sorted around");
  spectrum->add_option("--count", sp_count, "How many values to print");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*solve) {
      std::vector<bool> provided;
      provided.reserve(solve_opts.size());
      for (const CLI::Option* opt : solve_opts) {
        provided.push_back(opt->count() > 0);
      }
      return do_solve(sf, provided);
    }
    if (*bench) {
      if (bench_out.empty()) bench_out = which + "_report";
      return do_bench(which, bench_out, bench_jobs);
    }
    if (*spectrum) {
      return do_spectrum(sp_problem, sp_omega, sp_ne, sp_matrix_a, sp_near,
                         sp_count);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
