// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#ifdef PLHR_CLI_PATH
#include <sys/wait.h>
#include <unistd.h>
#endif

#include <json.hpp>

#include "plhr/common.hpp"
#include "plhr/harness.hpp"
#include "plhr/problems.hpp"

using namespace plhr;
namespace fs = std::filesystem;

namespace {

std::string temp_dir(const char* tag) {
  fs::path dir = fs::temp_directory_path() /
                 (std::string("plhr_test_") + tag + "_" +
                  std::to_string(std::rand()) + std::to_string(std::rand()));
  fs::create_directories(dir);
  return dir.string();
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(bool(in));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

// Small fd experiment that converges in a handful of iterations.
ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.problem = "fd";
  cfg.omega = 3;
  cfg.sigma = 120.0;
  cfg.solver = "bplhr_real";
  cfg.prec = "dense_abs";
  cfg.k = 2;
  cfg.tol = 1e-8;
  cfg.maxit = 200;
  cfg.seeds = {1};
  return cfg;
}

std::string expect_error(const ExperimentConfig& cfg) {
  try {
    validate(cfg);
  } catch (const Error& e) {
    return e.what();
  }
  FAIL("expected validation to reject the configuration");
  return {};
}

}  // namespace

TEST_CASE("configuration survives a JSON round trip") {
  ExperimentConfig cfg;
  cfg.problem = "fe";
  cfg.ne = 24;
  cfg.sigma = 497.0;
  cfg.sigmas = {400.0, 500.0};
  cfg.solver = "bgd";
  cfg.extraction = "harmonic";
  cfg.prec = "perturbed_abs";
  cfg.eps = 1e-5;
  cfg.omega_coarse = 3;
  cfg.cheb_degree = 8;
  cfg.nu = 2;
  cfg.k = 4;
  cfg.tracked = 3;
  cfg.tol = 1e-7;
  cfg.maxit = 321;
  cfg.locking = true;
  cfg.include_s = false;
  cfg.relative_residual = true;
  cfg.m_max = 20;
  cfg.drop_tol = 1e-9;
  cfg.cond_limit = 1e11;
  cfg.check_extraction = true;
  cfg.seeds = {4, 5, 6};
  cfg.out_dir = "somewhere";
  cfg.label = "roundtrip";
  cfg.jobs = 3;
  cfg.lambda_q = 2.5;

  const std::string text = config_to_json(cfg);
  ExperimentConfig back = config_from_json_text(text);
  CHECK(config_to_json(back) == text);
  CHECK(back.problem == cfg.problem);
  CHECK(back.ne == cfg.ne);
  CHECK(back.sigmas == cfg.sigmas);
  CHECK(back.solver == cfg.solver);
  CHECK(back.prec == cfg.prec);
  CHECK(back.eps == cfg.eps);
  CHECK(back.k == cfg.k);
  CHECK(back.tracked == cfg.tracked);
  CHECK(back.locking == cfg.locking);
  CHECK(back.include_s == cfg.include_s);
  CHECK(back.m_max == cfg.m_max);
  CHECK(back.seeds == cfg.seeds);
  CHECK(back.lambda_q == cfg.lambda_q);

  // lambda_q defaults to NaN and must round-trip as "use sigma".
  ExperimentConfig plain;
  ExperimentConfig plain_back = config_from_json_text(config_to_json(plain));
  CHECK(std::isnan(plain_back.lambda_q));
}

TEST_CASE("configuration parsing rejects malformed input precisely") {
  CHECK_THROWS_AS(config_from_json_text("{ nope"), Error);
  CHECK_THROWS_AS(config_from_json_text("[1, 2]"), Error);
  try {
    config_from_json_text(R"({"problemo": "fd"})");
    FAIL("unknown key accepted");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("problemo") != std::string::npos);
  }
  try {
    config_from_json_text(R"({"omega": "five"})");
    FAIL("wrong type accepted");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("omega") != std::string::npos);
  }
  CHECK_THROWS_AS(config_from_json_file("/nonexistent/config.json"), Error);
}

TEST_CASE("validation rejects inconsistent combinations") {
  ExperimentConfig cfg = small_config();
  CHECK_NOTHROW(validate(cfg));

  auto mutate = [&](auto&& f) {
    ExperimentConfig c = small_config();
    f(c);
    return c;
  };

  CHECK(expect_error(mutate([](auto& c) { c.problem = "spectral"; }))
            .find("unknown problem") != std::string::npos);
  CHECK(expect_error(mutate([](auto& c) { c.omega = 0; }))
            .find("omega") != std::string::npos);
  CHECK(expect_error(mutate([](auto& c) {
          c.problem = "fe";
          c.ne = 1;
        })).find("ne") != std::string::npos);
  CHECK(expect_error(mutate([](auto& c) { c.problem = "matrix-market"; }))
            .find("matrix_a") != std::string::npos);
  CHECK(expect_error(mutate([](auto& c) {
          c.problem = "fe";
          c.prec = "av_mg";
        })).find("fd") != std::string::npos);
  CHECK(expect_error(mutate([](auto& c) {
          c.prec = "av_mg";
          c.omega_coarse = 5;  // above omega = 3
        })).find("omega_coarse") != std::string::npos);
  CHECK(expect_error(mutate([](auto& c) {
          c.prec = "av_mg";
          c.omega_coarse = 2;
          c.cheb_degree = 0;
        })).find("cheb_degree") != std::string::npos);
  CHECK(expect_error(mutate([](auto& c) {
          c.prec = "av_mg";
          c.omega_coarse = 2;
          c.nu = 0;
        })).find("nu") != std::string::npos);
  CHECK(expect_error(mutate([](auto& c) { c.prec = "perturbed_abs"; }))
            .find("eps") != std::string::npos);
  CHECK(expect_error(mutate([](auto& c) { c.k = 0; }))
            .find("k") != std::string::npos);
  CHECK(expect_error(mutate([](auto& c) { c.tracked = 3; }))
            .find("tracked") != std::string::npos);
  CHECK(expect_error(mutate([](auto& c) {
          c.solver = "plhr";
          c.k = 2;
        })).find("single pair") != std::string::npos);
  CHECK(expect_error(mutate([](auto& c) { c.tol = 0.0; }))
            .find("tol") != std::string::npos);
  CHECK(expect_error(mutate([](auto& c) { c.maxit = -1; }))
            .find("maxit") != std::string::npos);
  CHECK(expect_error(mutate([](auto& c) {
          c.solver = "bgd";
          c.extraction = "harmonic";
          c.m_max = 2;  // below 2k
        })).find("m_max") != std::string::npos);
  CHECK(expect_error(mutate([](auto& c) {
          c.solver = "bgd";
          c.extraction = "t_harmonic";
        })).find("harmonic") != std::string::npos);
  CHECK(expect_error(mutate([](auto& c) {
          c.extraction = "refined";
          c.k = 2;
        })).find("refined") != std::string::npos);
  // T-harmonic extraction requires an HPD preconditioner.
  CHECK(expect_error(mutate([](auto& c) { c.prec = "dense_plain"; }))
            .find("HPD") != std::string::npos);
  CHECK(expect_error(mutate([](auto& c) {
          c.solver = "base_null";
          c.k = 1;
          c.prec = "dense_plain";
        })).find("HPD") != std::string::npos);
  CHECK(expect_error(mutate([](auto& c) { c.solver = "gmres"; }))
            .find("unknown solver") != std::string::npos);
  CHECK(expect_error(mutate([](auto& c) { c.prec = "ilu"; }))
            .find("unknown preconditioner") != std::string::npos);
  CHECK(expect_error(mutate([](auto& c) { c.extraction = "ritz"; }))
            .find("extraction") != std::string::npos);
}

TEST_CASE("run_experiment executes a sweep deterministically") {
  ExperimentConfig cfg = small_config();
  cfg.sigmas = {120.0, 180.0};
  cfg.seeds = {1, 2, 3};

  RunReport a = run_experiment(cfg);
  RunReport b = run_experiment(cfg);

  REQUIRE(a.runs.size() == 6);  // 2 shifts x 3 seeds
  REQUIRE(a.cells.size() == 2);
  CHECK_FALSE(a.environment.empty());

  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    const RunRecord& r = a.runs[i];
    CHECK(r.scheme == "bplhr_real/dense_abs/t_harmonic");
    CHECK_FALSE(r.failed);
    REQUIRE(r.converged);
    CHECK(r.iterations > 0);
    CHECK(r.values.size() == 2);
    CHECK(r.residual_history.size() == std::size_t(r.iterations) + 1);
    // Bitwise reproducibility of the whole run.
    const RunRecord& s = b.runs[i];
    CHECK(r.iterations == s.iterations);
    CHECK((r.values - s.values).cwiseAbs().maxCoeff() == 0.0);
    for (std::size_t j = 0; j < r.residual_history.size(); ++j) {
      CHECK((r.residual_history[j] - s.residual_history[j]).cwiseAbs().maxCoeff() ==
            0.0);
    }
  }

  // Cell aggregation: median over the three converged runs per shift.
  for (const SweepCell& cell : a.cells) {
    CHECK(cell.run_count == 3);
    CHECK(cell.converged_count == 3);
    CHECK_FALSE(cell.dash);
    std::vector<Index> its;
    for (const RunRecord& r : a.runs) {
      if (r.sigma == cell.sigma) its.push_back(r.iterations);
    }
    std::sort(its.begin(), its.end());
    CHECK(cell.median_iterations == its[1]);
    CHECK(cell.min_iterations == its.front());
    CHECK(cell.max_iterations == its.back());
  }

  // Parallel execution returns the same records in the same order.
  cfg.jobs = 3;
  RunReport c = run_experiment(cfg);
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    CHECK(a.runs[i].iterations == c.runs[i].iterations);
    CHECK(a.runs[i].seed == c.runs[i].seed);
    CHECK(a.runs[i].sigma == c.runs[i].sigma);
  }
}

TEST_CASE("cells dash when no seed converges") {
  ExperimentConfig cfg = small_config();
  cfg.maxit = 1;
  cfg.tol = 1e-15;
  cfg.seeds = {1, 2};
  RunReport rep = run_experiment(cfg);
  REQUIRE(rep.cells.size() == 1);
  CHECK(rep.cells[0].dash);
  CHECK(rep.cells[0].converged_count == 0);
  CHECK(rep.cells[0].run_count == 2);
  for (const RunRecord& r : rep.runs) {
    CHECK_FALSE(r.converged);
    CHECK_FALSE(r.failed);  // clean non-convergence is not a failure
  }
}

TEST_CASE("solver exceptions are recorded as per-run failures") {
  ExperimentConfig cfg = small_config();
  cfg.drop_tol = 10.0;  // drops every basis column: the solver throws
  RunReport rep = run_experiment(cfg);
  REQUIRE(rep.runs.size() == 1);
  CHECK(rep.runs[0].failed);
  CHECK_FALSE(rep.runs[0].converged);
  CHECK_FALSE(rep.runs[0].message.empty());
  REQUIRE(rep.cells.size() == 1);
  CHECK(rep.cells[0].dash);
}

TEST_CASE("base_null runs through the harness against a known eigenvalue") {
  ExperimentConfig cfg;
  cfg.problem = "fd";
  cfg.omega = 2;  // n = 9, analytic spectrum
  cfg.solver = "base_null";
  cfg.prec = "dense_abs";
  cfg.base_null_mode = "two_term";
  cfg.tol = 1e-9;
  cfg.maxit = 200;
  // Smallest eigenvalue of the 2D Laplacian at h = 1/4.
  const double h = 0.25;
  const double sh = std::sin(std::numbers::pi * h / 2.0);
  const double lam = 8.0 * sh * sh / (h * h);
  cfg.sigma = lam + 0.3;  // shift nearby; lambda_q pins the exact value
  cfg.lambda_q = lam;
  RunReport rep = run_experiment(cfg);
  REQUIRE(rep.runs.size() == 1);
  const RunRecord& r = rep.runs[0];
  CHECK(r.scheme == "base_null/dense_abs/two_term");
  REQUIRE(r.converged);
  CHECK(r.values.size() == 1);
  CHECK(r.values(0) == doctest::Approx(lam).epsilon(1e-8));
}

TEST_CASE("history files carry one row per pair per performed iteration") {
  const std::string dir = temp_dir("hist");
  ExperimentConfig cfg = small_config();
  RunReport rep = run_experiment(cfg);
  REQUIRE(rep.runs.size() == 1);
  const RunRecord& r = rep.runs[0];

  const std::string path = dir + "/history.csv";
  emit_history(r, path);
  std::vector<std::string> lines = read_lines(path);
  REQUIRE(!lines.empty());
  CHECK(lines[0] == "iter,pair_index,residual_norm,rayleigh_quotient");
  CHECK(lines.size() == 1 + std::size_t(r.iterations) * 2);

  // Parsed numbers round-trip exactly: the writer uses shortest-exact format.
  std::istringstream row(lines[1]);
  std::string iter_s, pair_s, res_s, val_s;
  std::getline(row, iter_s, ',');
  std::getline(row, pair_s, ',');
  std::getline(row, res_s, ',');
  std::getline(row, val_s, ',');
  CHECK(iter_s == "1");
  CHECK(pair_s == "0");
  CHECK(std::stod(res_s) == r.residual_history[1](0));
  CHECK(std::stod(val_s) == r.value_history[1](0));
  const std::string& last = lines.back();
  CHECK(last.substr(0, last.find(',')) == std::to_string(r.iterations));

  // A zero-iteration run emits the header only.
  ExperimentConfig zero = small_config();
  zero.maxit = 0;
  RunReport zrep = run_experiment(zero);
  const std::string zpath = dir + "/zero.csv";
  emit_history(zrep.runs[0], zpath);
  std::vector<std::string> zlines = read_lines(zpath);
  CHECK(zlines.size() == 1);

  fs::remove_all(dir);
}

TEST_CASE("reports serialize to json and to a directory of artifacts") {
  const std::string dir = temp_dir("report");
  ExperimentConfig cfg = small_config();
  cfg.seeds = {1, 2};
  RunReport rep = run_experiment(cfg);

  const std::string text = report_to_json(rep);
  nlohmann::json j = nlohmann::json::parse(text);
  CHECK(j["config"]["problem"] == "fd");
  CHECK(j["config"]["sigma"] == 120.0);
  REQUIRE(j["runs"].size() == 2);
  CHECK(j["runs"][0]["converged"] == true);
  CHECK(j["runs"][0]["scheme"] == "bplhr_real/dense_abs/t_harmonic");
  CHECK(j["cells"].size() == 1);
  CHECK(j["environment"].is_string());

  write_report(rep, dir);
  CHECK(fs::exists(dir + "/summary.json"));
  CHECK(fs::exists(dir + "/history_run0.csv"));
  CHECK(fs::exists(dir + "/history_run1.csv"));
  nlohmann::json disk =
      nlohmann::json::parse(std::ifstream(dir + "/summary.json"));
  CHECK(disk["runs"].size() == 2);

  // out_dir on the config makes run_experiment write the same artifacts.
  const std::string dir2 = temp_dir("autoreport");
  cfg.out_dir = dir2;
  run_experiment(cfg);
  CHECK(fs::exists(dir2 + "/summary.json"));

  fs::remove_all(dir);
  fs::remove_all(dir2);
}

TEST_CASE("unknown study names are rejected") {
  CHECK_THROWS_AS(reproduce_table("table9"), Error);
  CHECK_THROWS_AS(reproduce_table("bogus"), Error);
}

#ifdef PLHR_CLI_PATH
namespace {

int run_cli(const std::string& args, std::string* output = nullptr) {
  const std::string path = temp_dir("cli") + "/out.txt";
  const std::string cmd = std::string(PLHR_CLI_PATH) + " " + args + " > " +
                          path + " 2>&1";
  const int status = std::system(cmd.c_str());
  if (output != nullptr) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    *output = ss.str();
  }
  fs::remove_all(fs::path(path).parent_path());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("cli exit codes distinguish success, non-convergence, and errors") {
  std::string out;
  int rc = run_cli(
      "solve --problem fd --omega 3 --sigma 120 --k 2 --tol 1e-8 "
      "--solver bplhr_real --prec dense_abs",
      &out);
  CHECK(rc == 0);
  CHECK(out.find("cell scheme=bplhr_real/dense_abs/t_harmonic") !=
        std::string::npos);
  CHECK(out.find("converged=1/1") != std::string::npos);

  rc = run_cli(
      "solve --problem fd --omega 3 --sigma 120 --k 2 --tol 1e-15 "
      "--maxit 1 --solver bplhr_real --prec dense_abs",
      &out);
  CHECK(rc == 2);
  CHECK(out.find("median=-") != std::string::npos);

  rc = run_cli("solve --problem fd --omega 99 --sigma 120", &out);
  CHECK(rc == 1);
  CHECK(out.find("error:") != std::string::npos);

  rc = run_cli("bench table9", &out);
  CHECK(rc == 1);

  rc = run_cli("nonsense", &out);
  CHECK(rc == 1);

  // Spectrum lists oracle values nearest the shift, one per line.
  rc = run_cli("spectrum --problem fd --omega 3 --near 120 --count 3", &out);
  CHECK(rc == 0);
  std::istringstream lines(out);
  std::string first;
  REQUIRE(std::getline(lines, first));
  const double nearest = std::stod(first);
  // fd omega 3 oracle value nearest 120.
  SpectrumOracle oracle = fd_laplacian_spectrum(3);
  double best = oracle.eigenvalues(0);
  for (Index i = 1; i < oracle.eigenvalues.size(); ++i) {
    if (std::abs(oracle.eigenvalues(i) - 120.0) < std::abs(best - 120.0)) {
      best = oracle.eigenvalues(i);
    }
  }
  CHECK(nearest == doctest::Approx(best).epsilon(1e-12));
}
#endif  // PLHR_CLI_PATH
