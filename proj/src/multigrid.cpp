// SPDX-License-Identifier: Apache-2.0

#include "plhr/multigrid.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

#include "plhr/problems.hpp"

namespace plhr {

namespace {

void lap_apply(Index N, double inv_h2, const double* xv, double* yv) {
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

void level_laplacian(const GridLevel& g, const RealVector& x, RealVector& y) {
  y.resize(g.n);
  lap_apply(g.side, 1.0 / (g.h * g.h), x.data(), y.data());
}

// Clenshaw recurrence for p(L - sigma I) r with the series argument mapped
// onto [-1,1]; one Laplacian apply per series term.
void cheb_apply(const GridLevel& g, double sigma, const RealVector& r,
                RealVector& out) {
  const RealVector& c = g.poly.coeff;
  const Index m = c.size() - 1;
  const double ctr = 0.5 * (g.poly.a + g.poly.b);
  const double half = 0.5 * (g.poly.b - g.poly.a);
  const double off = sigma + ctr;
  RealVector b1 = RealVector::Zero(g.n);
  RealVector b2 = RealVector::Zero(g.n);
  RealVector t(g.n), bk(g.n);
  for (Index k = m; k >= 1; --k) {
    level_laplacian(g, b1, t);
    t = (t - off * b1) / half;
    bk = c(k) * r + 2.0 * t - b2;
    b2.swap(b1);
    b1.swap(bk);
  }
  level_laplacian(g, b1, t);
  t = (t - off * b1) / half;
  out = c(0) * r + t - b2;
}

// Level operator of the cycle: B_l (abs flavor) or L_l - sigma I (plain).
void level_apply(const GridHierarchy& h, const GridLevel& g, bool abs_mode,
                 const RealVector& x, RealVector& y) {
  if (abs_mode) {
    if (g.poly_smoothed) {
      cheb_apply(g, h.sigma, x, y);
    } else {
      level_laplacian(g, x, y);
    }
    return;
  }
  level_laplacian(g, x, y);
  if (h.sigma != 0.0) {
    y -= h.sigma * x;
  }
}

void coarse_solve(const GridHierarchy& h, bool abs_mode, const RealVector& r,
                  RealVector& w) {
  const Index n0 = h.coarse_lam.size();
  RealVector t = h.coarse_Q.transpose() * r;
  double scale = (h.coarse_lam.array() - h.sigma).abs().maxCoeff();
  for (Index i = 0; i < n0; ++i) {
    double d = h.coarse_lam(i) - h.sigma;
    if (std::abs(d) <= 1e-12 * scale) {
      t(i) = 0.0;
    } else {
      t(i) /= abs_mode ? std::abs(d) : d;
    }
  }
  w.noalias() = h.coarse_Q * t;
}

void v_cycle(const GridHierarchy& h, int level, bool abs_mode,
             const RealVector& r, RealVector& w) {
  if (level == 0) {
    coarse_solve(h, abs_mode, r, w);
    return;
  }
  const GridLevel& g = h.levels[static_cast<std::size_t>(level)];
  const double tau = abs_mode ? g.tau_av : g.tau_inv;
  w = tau * r;
  RealVector Bw(g.n);
  for (int s = 1; s < h.nu; ++s) {
    level_apply(h, g, abs_mode, w, Bw);
    w += tau * (r - Bw);
  }
  level_apply(h, g, abs_mode, w, Bw);
  RealVector resid = r - Bw;
  RealVector rc, wc, pw;
  restrict_full_weighting(g.omega, resid, rc);
  v_cycle(h, level - 1, abs_mode, rc, wc);
  prolong_bilinear(g.omega, wc, pw);
  w += pw;
  for (int s = 0; s < h.nu; ++s) {
    level_apply(h, g, abs_mode, w, Bw);
    w += tau * (r - Bw);
  }
}

RealVector cycle_entry(const GridHierarchy& h, const Eigen::Ref<const RealVector>& r,
                       int level, bool abs_mode) {
  if (h.levels.empty()) {
    throw Error("mg apply: empty hierarchy");
  }
  int top = static_cast<int>(h.levels.size()) - 1;
  if (level < 0) {
    level = top;
  }
  if (level > top) {
    throw Error("mg apply: level out of range");
  }
  if (r.size() != h.levels[static_cast<std::size_t>(level)].n) {
    throw Error("mg apply: residual size does not match level");
  }
  ensure_finite(r, "mg apply");
  RealVector w;
  RealVector rr = r;
  v_cycle(h, level, abs_mode, rr, w);
  return w;
}

}  // namespace

void restrict_full_weighting(int omega_fine,
                             const Eigen::Ref<const RealVector>& fine,
                             RealVector& coarse) {
  const Index Nf = fd_side(omega_fine);
  const Index Nc = fd_side(omega_fine - 1);
  if (fine.size() != Nf * Nf) {
    throw Error("restrict_full_weighting: size mismatch");
  }
  coarse.resize(Nc * Nc);
  const double* fv = fine.data();
  for (Index j = 0; j < Nc; ++j) {
    const Index fy = 2 * j + 1;
    for (Index i = 0; i < Nc; ++i) {
      const Index fx = 2 * i + 1;
      const Index p = fy * Nf + fx;
      double v = 0.25 * fv[p] +
                 0.125 * (fv[p - 1] + fv[p + 1] + fv[p - Nf] + fv[p + Nf]) +
                 0.0625 * (fv[p - Nf - 1] + fv[p - Nf + 1] + fv[p + Nf - 1] +
                           fv[p + Nf + 1]);
      coarse(j * Nc + i) = v;
    }
  }
}

void prolong_bilinear(int omega_fine, const Eigen::Ref<const RealVector>& coarse,
                      RealVector& fine) {
  const Index Nf = fd_side(omega_fine);
  const Index Nc = fd_side(omega_fine - 1);
  if (coarse.size() != Nc * Nc) {
    throw Error("prolong_bilinear: size mismatch");
  }
  fine.resize(Nf * Nf);
  const double* cv = coarse.data();
  auto cval = [&](Index ci, Index cj) -> double {
    if (ci < 0 || ci >= Nc || cj < 0 || cj >= Nc) {
      return 0.0;
    }
    return cv[cj * Nc + ci];
  };
  for (Index fy = 0; fy < Nf; ++fy) {
    const bool oy = (fy % 2) == 1;
    const Index cy = oy ? (fy - 1) / 2 : fy / 2;
    for (Index fx = 0; fx < Nf; ++fx) {
      const bool ox = (fx % 2) == 1;
      const Index cx = ox ? (fx - 1) / 2 : fx / 2;
      double v;
      if (ox && oy) {
        v = cval(cx, cy);
      } else if (!ox && oy) {
        v = 0.5 * (cval(cx - 1, cy) + cval(cx, cy));
      } else if (ox && !oy) {
        v = 0.5 * (cval(cx, cy - 1) + cval(cx, cy));
      } else {
        v = 0.25 * (cval(cx - 1, cy - 1) + cval(cx, cy - 1) +
                    cval(cx - 1, cy) + cval(cx, cy));
      }
      fine(fy * Nf + fx) = v;
    }
  }
}

GridHierarchy build_hierarchy(int omega_fine, int omega_coarse, double sigma,
                              int degree, int nu, double delta) {
  if (omega_coarse < 2 || omega_coarse > omega_fine || omega_fine > 12) {
    throw Error("build_hierarchy: require 2 <= omega_coarse <= omega_fine <= 12");
  }
  if (nu < 1 || nu > 8) {
    throw Error("build_hierarchy: nu out of range [1,8]");
  }
  if (!(delta > 0.0)) {
    throw Error("build_hierarchy: delta must be positive");
  }
  GridHierarchy h;
  h.sigma = sigma;
  h.delta = delta;
  h.nu = nu;
  h.degree = degree;
  const double sq = std::sqrt(std::max(0.0, sigma));
  for (int omega = omega_coarse; omega <= omega_fine; ++omega) {
    GridLevel g;
    g.omega = omega;
    g.side = fd_side(omega);
    g.n = g.side * g.side;
    g.h = 1.0 / static_cast<double>(Index(1) << omega);
    const double s = std::sin(0.5 * M_PI * g.h);
    const double c = std::cos(0.5 * M_PI * g.h);
    const double inv_h2 = 1.0 / (g.h * g.h);
    g.lambda_min = 8.0 * inv_h2 * s * s;
    g.lambda_max = 8.0 * inv_h2 * c * c;
    g.poly_smoothed = !(sq * g.h < delta);
    const double rho_gersh = 8.0 * inv_h2;
    // Minimax Richardson step for the smoothing band [rho/4, rho] left to
    // the smoother under 2:1 coarsening: tau = 2/(rho + rho/4) = 1.6/rho.
    constexpr double kSmoothFactor = 1.6;
    if (g.poly_smoothed) {
      g.poly = chebyshev_abs_poly(g.lambda_min - sigma, g.lambda_max - sigma,
                                  degree);
      g.tau_av = kSmoothFactor / g.poly.max_value;
    } else {
      g.tau_av = kSmoothFactor / rho_gersh;
    }
    g.tau_inv = kSmoothFactor /
                std::max(std::abs(rho_gersh - sigma), std::abs(sigma));
    h.levels.push_back(std::move(g));
  }
  // Dense coarse-grid eigendecomposition shared by both cycle flavors.
  const GridLevel& g0 = h.levels.front();
  RealMatrix L0 = RealMatrix::Zero(g0.n, g0.n);
  {
    RealVector e = RealVector::Zero(g0.n);
    RealVector col(g0.n);
    for (Index p = 0; p < g0.n; ++p) {
      e(p) = 1.0;
      lap_apply(g0.side, 1.0 / (g0.h * g0.h), e.data(), col.data());
      L0.col(p) = col;
      e(p) = 0.0;
    }
  }
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(L0);
  if (es.info() != Eigen::Success) {
    throw Error("build_hierarchy: coarse eigendecomposition failed");
  }
  h.coarse_Q = es.eigenvectors();
  h.coarse_lam = es.eigenvalues();
  double scale = (h.coarse_lam.array() - sigma).abs().maxCoeff();
  double least = (h.coarse_lam.array() - sigma).abs().minCoeff();
  if (least <= 1e-12 * scale) {
    h.warnings.push_back(
        "sigma is within 1e-12 of a coarse-grid eigenvalue; coarse solves "
        "use a pseudo-inverse");
  }
  return h;
}

RealVector av_mg_apply(const GridHierarchy& h, const Eigen::Ref<const RealVector>& r,
                       int level) {
  return cycle_entry(h, r, level, /*abs_mode=*/true);
}

RealVector inv_mg_apply(const GridHierarchy& h, const Eigen::Ref<const RealVector>& r,
                        int level) {
  return cycle_entry(h, r, level, /*abs_mode=*/false);
}

namespace {

RealOperator mg_operator(std::shared_ptr<const GridHierarchy> h, bool abs_mode) {
  if (!h || h->levels.empty()) {
    throw Error("mg_operator: empty hierarchy");
  }
  Index n = h->n();
  return RealOperator(
      n, [h, abs_mode](const Eigen::Ref<const RealMatrix>& x,
                       Eigen::Ref<RealMatrix> y) {
        for (Index col = 0; col < x.cols(); ++col) {
          y.col(col) = cycle_entry(*h, x.col(col), -1, abs_mode);
        }
      });
}

}  // namespace

RealOperator av_mg_operator(std::shared_ptr<const GridHierarchy> h) {
  return mg_operator(std::move(h), true);
}

RealOperator inv_mg_operator(std::shared_ptr<const GridHierarchy> h) {
  return mg_operator(std::move(h), false);
}

}  // namespace plhr
