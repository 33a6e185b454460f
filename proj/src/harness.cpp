// SPDX-License-Identifier: Apache-2.0

#include "plhr/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "plhr/base_null.hpp"
#include "plhr/matrix_market.hpp"
#include "plhr/multigrid.hpp"
#include "plhr/operators.hpp"
#include "plhr/problems.hpp"
#include "plhr/solvers.hpp"

namespace plhr {

namespace {

using nlohmann::json;

// Seed mixing: runs at sweep position i reuse seed + 1009 i so that scheme
// rows sharing a shift share the initial guess, while shifts stay
// decorrelated. Perturbed preconditioners draw from a disjoint stream.
constexpr std::uint64_t kSigmaSeedStride = 1009;
constexpr std::uint64_t kPerturbSeedOffset = 777713;

enum class SolverKind { plhr, bplhr, bplhr_real, bgd, base_null };
enum class PrecKind {
  identity,
  av_mg,
  inv_mg,
  dense_abs,
  dense_plain,
  perturbed_abs,
  perturbed_plain
};

SolverKind solver_from_string(const std::string& name) {
  if (name == "plhr") return SolverKind::plhr;
  if (name == "bplhr") return SolverKind::bplhr;
  if (name == "bplhr_real") return SolverKind::bplhr_real;
  if (name == "bgd") return SolverKind::bgd;
  if (name == "base_null") return SolverKind::base_null;
  throw Error("unknown solver '" + name + "'");
}

PrecKind prec_from_string(const std::string& name) {
  if (name == "identity") return PrecKind::identity;
  if (name == "av_mg") return PrecKind::av_mg;
  if (name == "inv_mg") return PrecKind::inv_mg;
  if (name == "dense_abs") return PrecKind::dense_abs;
  if (name == "dense_plain") return PrecKind::dense_plain;
  if (name == "perturbed_abs") return PrecKind::perturbed_abs;
  if (name == "perturbed_plain") return PrecKind::perturbed_plain;
  throw Error("unknown preconditioner '" + name + "'");
}

bool prec_is_hpd(PrecKind kind) {
  return kind == PrecKind::identity || kind == PrecKind::av_mg ||
         kind == PrecKind::dense_abs || kind == PrecKind::perturbed_abs;
}

bool prec_is_perturbed(PrecKind kind) {
  return kind == PrecKind::perturbed_abs || kind == PrecKind::perturbed_plain;
}

bool prec_is_dense(PrecKind kind) {
  return kind == PrecKind::dense_abs || kind == PrecKind::dense_plain ||
         prec_is_perturbed(kind);
}

bool prec_is_mg(PrecKind kind) {
  return kind == PrecKind::av_mg || kind == PrecKind::inv_mg;
}

std::string environment_stamp() {
  std::ostringstream os;
  os << "cxx " << __VERSION__ << "; eigen " << EIGEN_WORLD_VERSION << "."
     << EIGEN_MAJOR_VERSION << "." << EIGEN_MINOR_VERSION;
  return os.str();
}

// Shortest round-trip decimal rendering.
std::string format_double(double x) {
  char buf[40];
  auto out = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, out.ptr);
}

// ---------------------------------------------------------------------------
// Problem construction.

struct ProblemBundle {
  bool complex_field = false;
  RealPencil real;
  ComplexPencil cplx;
  Index n = 0;
};

Eigen::SparseMatrix<Complex> to_complex_sparse(
    const Eigen::SparseMatrix<double>& m) {
  return m.cast<Complex>();
}

ProblemBundle build_problem(const ExperimentConfig& cfg) {
  ProblemBundle prob;
  if (cfg.problem == "fd") {
    prob.real = RealPencil::standard(fd_laplacian_operator(cfg.omega));
    prob.n = prob.real.n;
    return prob;
  }
  if (cfg.problem == "fe") {
    FeMatrices fe = fe_laplacian(cfg.ne);
    prob.real = RealPencil::generalized(sparse_operator(std::move(fe.stiffness)),
                                        sparse_operator(std::move(fe.mass)));
    prob.n = prob.real.n;
    return prob;
  }
  if (cfg.problem == "matrix-market") {
    MatrixMarketData a = read_matrix_market(cfg.matrix_a);
    bool has_b = !cfg.matrix_b.empty();
    MatrixMarketData b;
    if (has_b) {
      b = read_matrix_market(cfg.matrix_b);
      if (b.n != a.n) {
        throw Error("matrix-market pencil: A is " + std::to_string(a.n) +
                    "-dimensional but B is " + std::to_string(b.n));
      }
    }
    prob.complex_field = a.complex_field || (has_b && b.complex_field);
    if (!prob.complex_field) {
      if (has_b) {
        prob.real = RealPencil::generalized(sparse_operator(std::move(a.real)),
                                            sparse_operator(std::move(b.real)));
      } else {
        prob.real = RealPencil::standard(sparse_operator(std::move(a.real)));
      }
      prob.n = prob.real.n;
    } else {
      Eigen::SparseMatrix<Complex> ac =
          a.complex_field ? std::move(a.cplx) : to_complex_sparse(a.real);
      if (has_b) {
        Eigen::SparseMatrix<Complex> bc =
            b.complex_field ? std::move(b.cplx) : to_complex_sparse(b.real);
        prob.cplx = ComplexPencil::generalized(sparse_operator(std::move(ac)),
                                               sparse_operator(std::move(bc)));
      } else {
        prob.cplx = ComplexPencil::standard(sparse_operator(std::move(ac)));
      }
      prob.n = prob.cplx.n;
    }
    return prob;
  }
  throw Error("unknown problem '" + cfg.problem + "'");
}

// Applies the operator to the identity; used to assemble the dense matrices
// the dense preconditioner constructors need.
RealMatrix materialize(const RealOperator& op) {
  const Index n = op.rows();
  if (op.is_identity()) return RealMatrix::Identity(n, n);
  return op.apply(RealMatrix::Identity(n, n));
}

// Per-shift shared preconditioner state. For the perturbed flavors only the
// eigendecomposition is shared; the perturbation itself is drawn per run.
struct SigmaContext {
  double sigma = 0.0;
  PrecKind kind = PrecKind::identity;
  bool hpd = true;
  RealOperator T;  // valid unless the kind is perturbed
  std::shared_ptr<const HermitianEig> eig;
  std::vector<std::string> notes;
};

SigmaContext build_sigma_context(const ExperimentConfig& cfg,
                                 const ProblemBundle& prob, double sigma,
                                 const RealMatrix* Ad, const RealMatrix* Bd) {
  SigmaContext ctx;
  ctx.sigma = sigma;
  ctx.kind = prec_from_string(cfg.prec);
  ctx.hpd = prec_is_hpd(ctx.kind);
  switch (ctx.kind) {
    case PrecKind::identity:
      ctx.T = identity_operator<Real>(prob.n);
      break;
    case PrecKind::av_mg:
    case PrecKind::inv_mg: {
      auto h = std::make_shared<const GridHierarchy>(
          build_hierarchy(cfg.omega, cfg.omega_coarse, sigma, cfg.cheb_degree,
                          cfg.nu));
      ctx.T = ctx.kind == PrecKind::av_mg ? av_mg_operator(std::move(h))
                                          : inv_mg_operator(std::move(h));
      break;
    }
    case PrecKind::dense_abs:
    case PrecKind::dense_plain: {
      auto eig =
          std::make_shared<HermitianEig>(hermitian_eig(*Ad - sigma * (*Bd)));
      AvMode mode =
          ctx.kind == PrecKind::dense_abs ? AvMode::abs : AvMode::plain;
      DenseAvInverse inv = dense_av_inverse_from(*eig, mode);
      if (inv.pseudo_inverted) {
        ctx.notes.push_back("shift " + format_double(sigma) +
                            " is numerically an eigenvalue; the dense "
                            "preconditioner was pseudo-inverted");
      }
      ctx.T = dense_operator(std::move(inv.T));
      break;
    }
    case PrecKind::perturbed_abs:
    case PrecKind::perturbed_plain:
      ctx.eig =
          std::make_shared<const HermitianEig>(hermitian_eig(*Ad - sigma * (*Bd)));
      break;
  }
  return ctx;
}

RealOperator run_preconditioner(const ExperimentConfig& cfg,
                                const SigmaContext& ctx,
                                std::uint64_t eff_seed) {
  if (!prec_is_perturbed(ctx.kind)) return ctx.T;
  AvMode mode =
      ctx.kind == PrecKind::perturbed_abs ? AvMode::abs : AvMode::plain;
  PerturbedPreconditioner pp = perturbed_preconditioner_from(
      *ctx.eig, cfg.eps, eff_seed + kPerturbSeedOffset, mode);
  return dense_operator(std::move(pp.T));
}

// ---------------------------------------------------------------------------
// Single run execution.

template <typename Scalar>
void fill_record(RunRecord& rec, const EigenResult<Scalar>& r) {
  rec.converged = r.converged;
  rec.iterations = r.iterations;
  rec.values = r.values;
  rec.residuals = r.residuals;
  rec.value_history = r.value_history;
  rec.residual_history = r.residual_history;
  rec.subspace_dims = r.subspace_dims;
  rec.conjugate_events = r.conjugate_events;
  rec.max_pg_residual = r.max_pg_residual;
  rec.warnings = r.warnings;
}

SolverConfig make_solver_config(const ExperimentConfig& cfg, double sigma,
                                std::uint64_t eff_seed) {
  SolverConfig scfg;
  scfg.sigma = sigma;
  scfg.k = cfg.k;
  scfg.tracked = cfg.tracked;
  scfg.tol = cfg.tol;
  scfg.relative_residual = cfg.relative_residual;
  scfg.maxit = cfg.maxit;
  scfg.seed = eff_seed;
  scfg.locking = cfg.locking;
  scfg.include_s = cfg.include_s;
  scfg.extraction = extraction_from_string(cfg.extraction);
  scfg.record_history = true;
  scfg.drop_tol = cfg.drop_tol;
  scfg.cond_limit = cfg.cond_limit;
  scfg.check_extraction = cfg.check_extraction;
  scfg.m_max = cfg.m_max;
  return scfg;
}

RunRecord run_one(const ExperimentConfig& cfg, const ProblemBundle& prob,
                  const SigmaContext& ctx, const std::string& scheme,
                  double sigma, std::uint64_t seed, std::uint64_t eff_seed) {
  RunRecord rec;
  rec.scheme = scheme;
  rec.sigma = sigma;
  rec.seed = seed;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const SolverKind solver = solver_from_string(cfg.solver);
    for (const std::string& note : ctx.notes) rec.warnings.push_back(note);

    if (solver == SolverKind::base_null) {
      const double lambda_q = std::isnan(cfg.lambda_q) ? sigma : cfg.lambda_q;
      RealOperator T = run_preconditioner(cfg, ctx, eff_seed);
      RealVector guess = gaussian_block(prob.n, 1, eff_seed).col(0);
      BaseNullResult r =
          base_null_solve(prob.real, T, lambda_q,
                          base_null_mode_from_string(cfg.base_null_mode),
                          cfg.tol, cfg.maxit, eff_seed, &guess);
      rec.converged = r.converged;
      rec.iterations = r.iterations;
      rec.values = RealVector::Constant(1, r.value);
      rec.residuals = RealVector::Constant(1, r.residual);
      for (std::size_t j = 0; j < r.residual_history.size(); ++j) {
        rec.residual_history.push_back(
            RealVector::Constant(1, r.residual_history[j]));
        rec.value_history.push_back(RealVector::Constant(1, r.value_history[j]));
      }
      for (auto& w : r.warnings) rec.warnings.push_back(std::move(w));
    } else if (prob.complex_field) {
      // Complex pencils run with the identity preconditioner (validated).
      SolverConfig scfg = make_solver_config(cfg, sigma, eff_seed);
      ComplexOperator T = identity_operator<Complex>(prob.n);
      ComplexMatrix guess = complex_gaussian_block(prob.n, cfg.k, eff_seed);
      EigenResult<Complex> r =
          solver == SolverKind::plhr
              ? plhr_solve(prob.cplx, T, true, scfg, &guess)
              : bplhr_solve(prob.cplx, T, true, scfg, &guess);
      fill_record(rec, r);
    } else {
      SolverConfig scfg = make_solver_config(cfg, sigma, eff_seed);
      RealOperator T = run_preconditioner(cfg, ctx, eff_seed);
      RealMatrix guess = gaussian_block(prob.n, cfg.k, eff_seed);
      if (solver == SolverKind::bplhr) {
        // The complex lane on a real pencil lifts the shared real guess so
        // that the two arithmetic lanes start identically.
        ComplexPencil cp = complexify(prob.real);
        ComplexOperator cT = complexify(T);
        ComplexMatrix cguess = guess.cast<Complex>();
        EigenResult<Complex> r = bplhr_solve(cp, cT, ctx.hpd, scfg, &cguess);
        fill_record(rec, r);
      } else if (solver == SolverKind::bgd) {
        EigenResult<Real> r = bgd_solve(prob.real, T, scfg, &guess);
        fill_record(rec, r);
      } else {
        // plhr and bplhr_real both run the real lane; plhr pins k = 1.
        EigenResult<Real> r =
            bplhr_real_solve(prob.real, T, ctx.hpd, scfg, &guess);
        fill_record(rec, r);
      }
    }
  } catch (const std::exception& e) {
    rec.failed = true;
    rec.converged = false;
    rec.message = e.what();
  }
  const auto t1 = std::chrono::steady_clock::now();
  rec.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  return rec;
}

void run_pool(std::size_t count, int jobs,
              const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) fn(i);
  };
  const std::size_t width =
      std::min<std::size_t>(static_cast<std::size_t>(jobs), count);
  std::vector<std::thread> threads;
  threads.reserve(width);
  for (std::size_t w = 0; w < width; ++w) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
}

// Lower median with non-converged runs at +infinity.
SweepCell aggregate_cell(const std::string& scheme, double sigma,
                         const std::vector<const RunRecord*>& runs) {
  constexpr Index kInf = std::numeric_limits<Index>::max();
  SweepCell cell;
  cell.scheme = scheme;
  cell.sigma = sigma;
  cell.run_count = static_cast<int>(runs.size());
  std::vector<Index> counts;
  counts.reserve(runs.size());
  for (const RunRecord* r : runs) {
    counts.push_back(r->converged ? r->iterations : kInf);
    if (r->converged) {
      ++cell.converged_count;
      cell.min_iterations = cell.converged_count == 1
                                ? r->iterations
                                : std::min(cell.min_iterations, r->iterations);
      cell.max_iterations = std::max(cell.max_iterations, r->iterations);
    }
  }
  std::sort(counts.begin(), counts.end());
  const Index median = counts.empty() ? kInf : counts[(counts.size() - 1) / 2];
  cell.dash = median == kInf;
  cell.median_iterations = cell.dash ? 0 : median;
  return cell;
}

std::string scheme_label(const ExperimentConfig& cfg) {
  const SolverKind solver = solver_from_string(cfg.solver);
  std::string extr = cfg.extraction;
  if (solver == SolverKind::bgd) extr = "harmonic";
  if (solver == SolverKind::base_null) extr = cfg.base_null_mode;
  return cfg.solver + "/" + cfg.prec + "/" + extr;
}

// Validation that needs the problem dimension and field, shared between the
// upfront path (fd/fe, sizes known from parameters) and the post-load path
// (matrix-market).
void validate_sized(const ExperimentConfig& cfg, Index n, bool complex_field) {
  const SolverKind solver = solver_from_string(cfg.solver);
  const PrecKind prec = prec_from_string(cfg.prec);
  if (complex_field) {
    if (solver != SolverKind::plhr && solver != SolverKind::bplhr) {
      throw Error("solver '" + cfg.solver +
                  "' requires a real pencil; complex matrix-market problems "
                  "support plhr and bplhr");
    }
    if (prec != PrecKind::identity) {
      throw Error(
          "complex matrix-market problems support only the identity "
          "preconditioner");
    }
  }
  if (prec_is_dense(prec) && n > 4000) {
    throw Error("dense preconditioners are limited to n <= 4000, got n = " +
                std::to_string(n));
  }
  if (solver == SolverKind::base_null) {
    if (n < 2) throw Error("base_null needs n >= 2");
  } else if (solver == SolverKind::bgd) {
    const Index m_max = cfg.m_max > 0 ? cfg.m_max : 6 * cfg.k;
    if (m_max > n) {
      throw Error("bgd basis cap m_max = " + std::to_string(m_max) +
                  " exceeds the problem dimension " + std::to_string(n));
    }
  } else if (4 * cfg.k > n) {
    throw Error("block size " + std::to_string(cfg.k) +
                " needs 4k <= n, got n = " + std::to_string(n));
  }
}

json config_json(const ExperimentConfig& c) {
  json j;
  j["problem"] = c.problem;
  j["omega"] = c.omega;
  j["ne"] = c.ne;
  j["matrix_a"] = c.matrix_a;
  j["matrix_b"] = c.matrix_b;
  j["sigma"] = c.sigma;
  j["sigmas"] = c.sigmas;
  j["solver"] = c.solver;
  j["extraction"] = c.extraction;
  j["base_null_mode"] = c.base_null_mode;
  if (std::isnan(c.lambda_q)) {
    j["lambda_q"] = nullptr;
  } else {
    j["lambda_q"] = c.lambda_q;
  }
  j["prec"] = c.prec;
  j["eps"] = c.eps;
  j["omega_coarse"] = c.omega_coarse;
  j["cheb_degree"] = c.cheb_degree;
  j["nu"] = c.nu;
  j["k"] = c.k;
  j["tracked"] = c.tracked;
  j["tol"] = c.tol;
  j["maxit"] = c.maxit;
  j["locking"] = c.locking;
  j["include_s"] = c.include_s;
  j["relative_residual"] = c.relative_residual;
  j["m_max"] = c.m_max;
  j["drop_tol"] = c.drop_tol;
  j["cond_limit"] = c.cond_limit;
  j["check_extraction"] = c.check_extraction;
  j["seeds"] = c.seeds;
  j["out_dir"] = c.out_dir;
  j["label"] = c.label;
  j["jobs"] = c.jobs;
  return j;
}

template <typename T>
T get_as(const json& value, const char* key) {
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    throw Error(std::string("configuration key '") + key +
                "' has the wrong type");
  }
}

void apply_key(ExperimentConfig& c, const std::string& key, const json& v) {
  if (key == "problem") {
    c.problem = get_as<std::string>(v, "problem");
  } else if (key == "omega") {
    c.omega = get_as<int>(v, "omega");
  } else if (key == "ne") {
    c.ne = get_as<int>(v, "ne");
  } else if (key == "matrix_a") {
    c.matrix_a = get_as<std::string>(v, "matrix_a");
  } else if (key == "matrix_b") {
    c.matrix_b = get_as<std::string>(v, "matrix_b");
  } else if (key == "sigma") {
    c.sigma = get_as<double>(v, "sigma");
  } else if (key == "sigmas") {
    c.sigmas = get_as<std::vector<double>>(v, "sigmas");
  } else if (key == "solver") {
    c.solver = get_as<std::string>(v, "solver");
  } else if (key == "extraction") {
    c.extraction = get_as<std::string>(v, "extraction");
  } else if (key == "base_null_mode") {
    c.base_null_mode = get_as<std::string>(v, "base_null_mode");
  } else if (key == "lambda_q") {
    c.lambda_q = v.is_null() ? ExperimentConfig::nan_value()
                             : get_as<double>(v, "lambda_q");
  } else if (key == "prec") {
    c.prec = get_as<std::string>(v, "prec");
  } else if (key == "eps") {
    c.eps = get_as<double>(v, "eps");
  } else if (key == "omega_coarse") {
    c.omega_coarse = get_as<int>(v, "omega_coarse");
  } else if (key == "cheb_degree") {
    c.cheb_degree = get_as<int>(v, "cheb_degree");
  } else if (key == "nu") {
    c.nu = get_as<int>(v, "nu");
  } else if (key == "k") {
    c.k = get_as<Index>(v, "k");
  } else if (key == "tracked") {
    c.tracked = get_as<Index>(v, "tracked");
  } else if (key == "tol") {
    c.tol = get_as<double>(v, "tol");
  } else if (key == "maxit") {
    c.maxit = get_as<Index>(v, "maxit");
  } else if (key == "locking") {
    c.locking = get_as<bool>(v, "locking");
  } else if (key == "include_s") {
    c.include_s = get_as<bool>(v, "include_s");
  } else if (key == "relative_residual") {
    c.relative_residual = get_as<bool>(v, "relative_residual");
  } else if (key == "m_max") {
    c.m_max = get_as<Index>(v, "m_max");
  } else if (key == "drop_tol") {
    c.drop_tol = get_as<double>(v, "drop_tol");
  } else if (key == "cond_limit") {
    c.cond_limit = get_as<double>(v, "cond_limit");
  } else if (key == "check_extraction") {
    c.check_extraction = get_as<bool>(v, "check_extraction");
  } else if (key == "seeds") {
    c.seeds = get_as<std::vector<std::uint64_t>>(v, "seeds");
  } else if (key == "out_dir") {
    c.out_dir = get_as<std::string>(v, "out_dir");
  } else if (key == "label") {
    c.label = get_as<std::string>(v, "label");
  } else if (key == "jobs") {
    c.jobs = get_as<int>(v, "jobs");
  } else {
    throw Error("unknown configuration key '" + key + "'");
  }
}

void emit_history_rows(std::ofstream& out, const RunRecord& rec) {
  const std::size_t entries = rec.residual_history.size();
  for (std::size_t j = 1; j < entries; ++j) {
    const RealVector& res = rec.residual_history[j];
    const RealVector& val = rec.value_history[j];
    for (Index p = 0; p < res.size(); ++p) {
      out << j << ',' << p << ',' << format_double(res(p)) << ','
          << format_double(val(p)) << '\n';
    }
  }
}

}  // namespace

double ExperimentConfig::nan_value() {
  return std::numeric_limits<double>::quiet_NaN();
}

ExperimentConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("configuration is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error("configuration must be a JSON object");
  ExperimentConfig c;
  for (const auto& item : j.items()) apply_key(c, item.key(), item.value());
  return c;
}

ExperimentConfig config_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open configuration file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_from_json_text(buf.str());
}

std::string config_to_json(const ExperimentConfig& config) {
  return config_json(config).dump(2);
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.problem != "fd" && cfg.problem != "fe" &&
      cfg.problem != "matrix-market") {
    throw Error("unknown problem '" + cfg.problem + "'");
  }
  const SolverKind solver = solver_from_string(cfg.solver);
  const PrecKind prec = prec_from_string(cfg.prec);

  if (cfg.problem == "fd") {
    if (cfg.omega < 1 || cfg.omega > 14) {
      throw Error("fd problem needs 1 <= omega <= 14");
    }
  }
  if (cfg.problem == "fe") {
    if (cfg.ne < 2 || cfg.ne > 2048) {
      throw Error("fe problem needs 2 <= ne <= 2048");
    }
  }
  if (cfg.problem == "matrix-market" && cfg.matrix_a.empty()) {
    throw Error("matrix-market problem needs matrix_a");
  }

  if (prec_is_mg(prec)) {
    if (cfg.problem != "fd") {
      throw Error("preconditioner '" + cfg.prec +
                  "' is defined on fd problems only");
    }
    if (cfg.omega_coarse < 1 || cfg.omega_coarse > cfg.omega) {
      throw Error("multigrid needs 1 <= omega_coarse <= omega");
    }
    if (cfg.cheb_degree < 1) throw Error("multigrid needs cheb_degree >= 1");
    if (cfg.nu < 1) throw Error("multigrid needs nu >= 1");
  }
  if (prec_is_perturbed(prec)) {
    if (!(cfg.eps > 0.0) || !std::isfinite(cfg.eps)) {
      throw Error("perturbed preconditioners need eps > 0");
    }
  }

  if (cfg.k < 1) throw Error("k must be at least 1");
  if (cfg.tracked < 0 || cfg.tracked > cfg.k) {
    throw Error("tracked must lie in [0, k]");
  }
  if (solver == SolverKind::plhr && cfg.k != 1) {
    throw Error("plhr computes a single pair; set k = 1 or use bplhr");
  }
  if (solver == SolverKind::base_null && cfg.k != 1) {
    throw Error("base_null computes a single pair; set k = 1");
  }
  if (!(cfg.tol > 0.0) || !std::isfinite(cfg.tol)) {
    throw Error("tol must be positive");
  }
  if (cfg.maxit < 0) throw Error("maxit must be nonnegative");
  if (cfg.m_max < 0) throw Error("m_max must be nonnegative");
  if (solver == SolverKind::bgd && cfg.m_max > 0 && cfg.m_max < 2 * cfg.k) {
    throw Error("bgd needs m_max >= 2k");
  }

  if (!std::isfinite(cfg.sigma)) throw Error("sigma must be finite");
  for (double s : cfg.sigmas) {
    if (!std::isfinite(s)) throw Error("sigma sweep values must be finite");
  }
  if (solver == SolverKind::base_null && !std::isnan(cfg.lambda_q) &&
      !std::isfinite(cfg.lambda_q)) {
    throw Error("lambda_q must be finite");
  }

  if (solver == SolverKind::bgd) {
    if (cfg.extraction != "harmonic") {
      throw Error("bgd uses the harmonic extraction; set extraction to "
                  "'harmonic'");
    }
  } else if (solver != SolverKind::base_null) {
    const ExtractionKind extr = extraction_from_string(cfg.extraction);
    if (extr != ExtractionKind::harmonic && !prec_is_hpd(prec)) {
      throw Error("extraction '" + cfg.extraction +
                  "' requires an HPD preconditioner; '" + cfg.prec +
                  "' is indefinite");
    }
    if (extr == ExtractionKind::refined && cfg.k != 1) {
      throw Error("refined extraction is defined for k = 1");
    }
  } else {
    base_null_mode_from_string(cfg.base_null_mode);
    if (!prec_is_hpd(prec)) {
      throw Error("base_null minimizes in the T-norm and needs an HPD "
                  "preconditioner; '" + cfg.prec + "' is indefinite");
    }
  }

  if (!(cfg.drop_tol > 0.0)) throw Error("drop_tol must be positive");
  if (!(cfg.cond_limit > 1.0)) throw Error("cond_limit must exceed 1");
  if (cfg.seeds.empty()) throw Error("at least one seed is required");
  if (cfg.jobs < 1) throw Error("jobs must be at least 1");

  // Size checks that need no file I/O.
  if (cfg.problem == "fd") {
    validate_sized(cfg, fd_size(cfg.omega), false);
  } else if (cfg.problem == "fe") {
    const Index side = cfg.ne - 1;
    validate_sized(cfg, side * side, false);
  }
}

RunReport run_experiment(const ExperimentConfig& config) {
  validate(config);
  RunReport report;
  report.config = config;
  report.environment = environment_stamp();

  ProblemBundle prob = build_problem(config);
  validate_sized(config, prob.n, prob.complex_field);

  const std::vector<double> sigmas =
      config.sigmas.empty() ? std::vector<double>{config.sigma} : config.sigmas;
  const PrecKind prec = prec_from_string(config.prec);

  // Dense assemblies are shared across the whole sweep.
  RealMatrix Ad, Bd;
  if (prec_is_dense(prec) && !prob.complex_field) {
    Ad = materialize(prob.real.A);
    Bd = materialize(prob.real.B);
  }

  std::vector<SigmaContext> contexts;
  contexts.reserve(sigmas.size());
  for (double sigma : sigmas) {
    contexts.push_back(build_sigma_context(config, prob, sigma, &Ad, &Bd));
  }

  const std::string scheme = scheme_label(config);
  struct Task {
    std::size_t sigma_index;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (std::size_t si = 0; si < sigmas.size(); ++si) {
    for (std::uint64_t seed : config.seeds) tasks.push_back({si, seed});
  }
  report.runs.resize(tasks.size());
  run_pool(tasks.size(), config.jobs, [&](std::size_t i) {
    const Task& t = tasks[i];
    const std::uint64_t eff_seed =
        t.seed + kSigmaSeedStride * static_cast<std::uint64_t>(t.sigma_index);
    report.runs[i] = run_one(config, prob, contexts[t.sigma_index], scheme,
                             sigmas[t.sigma_index], t.seed, eff_seed);
  });

  for (std::size_t si = 0; si < sigmas.size(); ++si) {
    std::vector<const RunRecord*> cell_runs;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      if (tasks[i].sigma_index == si) cell_runs.push_back(&report.runs[i]);
    }
    report.cells.push_back(aggregate_cell(scheme, sigmas[si], cell_runs));
  }

  if (!config.out_dir.empty()) write_report(report, config.out_dir);
  return report;
}

RunReport reproduce_table(const std::string& which, int jobs,
                          const std::string& out_dir) {
  struct Row {
    const char* solver;
    const char* prec;
    const char* extraction;
  };
  static const std::vector<Row> rows = {
      {"bplhr_real", "av_mg", "t_harmonic"},
      {"bplhr_real", "av_mg", "harmonic"},
      {"bplhr_real", "inv_mg", "harmonic"},
      {"bgd", "av_mg", "harmonic"},
      {"bgd", "inv_mg", "harmonic"},
  };

  ExperimentConfig base;
  base.problem = "fd";
  base.omega = 7;
  base.omega_coarse = 4;
  base.tol = 1e-6;
  base.maxit = 1000;
  base.seeds = {1, 2, 3};
  base.jobs = jobs;
  base.label = which;

  RunReport merged;
  merged.environment = environment_stamp();

  if (which == "table1" || which == "table2") {
    if (which == "table1") {
      base.k = 11;
      base.tracked = 10;
      base.sigmas = {400, 450, 500, 550, 600, 650, 700};
    } else {
      base.k = 21;
      base.tracked = 20;
      base.sigmas = {800, 900, 1000, 1100, 1200, 1300, 1400};
    }
    for (const Row& row : rows) {
      ExperimentConfig cfg = base;
      cfg.solver = row.solver;
      cfg.prec = row.prec;
      cfg.extraction = row.extraction;
      if (cfg.solver == std::string("bgd")) cfg.m_max = 6 * cfg.k;
      RunReport part = run_experiment(cfg);
      for (auto& r : part.runs) merged.runs.push_back(std::move(r));
      for (auto& c : part.cells) merged.cells.push_back(std::move(c));
    }
    merged.config = base;
    merged.config.solver = rows.front().solver;
    merged.config.prec = rows.front().prec;
    merged.config.extraction = rows.front().extraction;
  } else if (which == "table3") {
    base.k = 5;
    base.tracked = 4;
    base.tol = 1e-4;
    base.sigma = 400;
    base.solver = "bplhr_real";
    base.prec = "av_mg";
    base.extraction = "t_harmonic";
    for (int omega : {6, 7, 8, 9}) {
      ExperimentConfig cfg = base;
      cfg.omega = omega;
      RunReport part = run_experiment(cfg);
      const std::string suffix = "@omega=" + std::to_string(omega);
      for (auto& r : part.runs) {
        r.scheme += suffix;
        merged.runs.push_back(std::move(r));
      }
      for (auto& c : part.cells) {
        c.scheme += suffix;
        merged.cells.push_back(std::move(c));
      }
    }
    merged.config = base;
  } else {
    throw Error("unknown table '" + which + "'; expected table1|table2|table3");
  }

  merged.config.out_dir = out_dir;
  if (!out_dir.empty()) write_report(merged, out_dir);
  return merged;
}

void emit_history(const RunRecord& record, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << "iter,pair_index,residual_norm,rayleigh_quotient\n";
  emit_history_rows(out, record);
  if (!out) throw Error("write failure on '" + path + "'");
}

void emit_history(const RunReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << "iter,pair_index,residual_norm,rayleigh_quotient\n";
  for (const RunRecord& rec : report.runs) emit_history_rows(out, rec);
  if (!out) throw Error("write failure on '" + path + "'");
}

std::string report_to_json(const RunReport& report) {
  json j;
  j["config"] = config_json(report.config);
  j["environment"] = report.environment;
  json runs = json::array();
  for (const RunRecord& r : report.runs) {
    json jr;
    jr["scheme"] = r.scheme;
    jr["sigma"] = r.sigma;
    jr["seed"] = r.seed;
    jr["converged"] = r.converged;
    jr["failed"] = r.failed;
    jr["message"] = r.message;
    jr["iterations"] = r.iterations;
    jr["values"] = std::vector<double>(r.values.data(),
                                       r.values.data() + r.values.size());
    jr["residuals"] = std::vector<double>(
        r.residuals.data(), r.residuals.data() + r.residuals.size());
    jr["conjugate_events"] = r.conjugate_events;
    jr["max_pg_residual"] = r.max_pg_residual;
    jr["warnings"] = r.warnings;
    jr["wall_seconds"] = r.wall_seconds;
    runs.push_back(std::move(jr));
  }
  j["runs"] = std::move(runs);
  json cells = json::array();
  for (const SweepCell& c : report.cells) {
    json jc;
    jc["scheme"] = c.scheme;
    jc["sigma"] = c.sigma;
    jc["dash"] = c.dash;
    jc["min_iterations"] = c.min_iterations;
    jc["median_iterations"] = c.median_iterations;
    jc["max_iterations"] = c.max_iterations;
    jc["converged_count"] = c.converged_count;
    jc["run_count"] = c.run_count;
    cells.push_back(std::move(jc));
  }
  j["cells"] = std::move(cells);
  return j.dump(2);
}

void write_report(const RunReport& report, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir + "'");
  {
    const fs::path summary = fs::path(dir) / "summary.json";
    std::ofstream out(summary);
    if (!out) throw Error("cannot open '" + summary.string() + "'");
    out << report_to_json(report) << '\n';
  }
  for (std::size_t i = 0; i < report.runs.size(); ++i) {
    std::string name = "history_run" + std::to_string(i) + ".csv";
    emit_history(report.runs[i], (fs::path(dir) / name).string());
  }
}

}  // namespace plhr
