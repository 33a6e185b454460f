// SPDX-License-Identifier: Apache-2.0

#ifndef PLHR_MULTIGRID_HPP
#define PLHR_MULTIGRID_HPP

#include <memory>
#include <string>
#include <vector>

#include "plhr/chebyshev.hpp"
#include "plhr/common.hpp"
#include "plhr/operators.hpp"

namespace plhr {

// Full-weighting restriction, the transpose of bilinear interpolation scaled
// by 1/4. Grids are interior Dirichlet nodes, x fastest.
void restrict_full_weighting(int omega_fine,
                             const Eigen::Ref<const RealVector>& fine,
                             RealVector& coarse);
void prolong_bilinear(int omega_fine, const Eigen::Ref<const RealVector>& coarse,
                      RealVector& fine);

struct GridLevel {
  int omega = 0;
  Index side = 0;
  Index n = 0;
  double h = 0.0;
  double lambda_min = 0.0;   // analytic extreme eigenvalues of the level
  double lambda_max = 0.0;   // Laplacian
  bool poly_smoothed = false;  // B_l = p_m(L_l - sigma I) instead of L_l
  ChebAbsPoly poly;
  double tau_av = 0.0;   // Richardson damping for the AV cycle smoother
  double tau_inv = 0.0;  // Richardson damping for the indefinite cycle
};

// Geometric hierarchy for the 5-point Laplacian at shift sigma. Level 0 is
// the coarsest grid; its dense eigendecomposition provides the exact coarse
// solves of both cycle flavors.
struct GridHierarchy {
  double sigma = 0.0;
  double delta = 0.5;
  int nu = 1;
  int degree = 6;
  std::vector<GridLevel> levels;
  RealMatrix coarse_Q;
  RealVector coarse_lam;
  std::vector<std::string> warnings;

  Index n() const { return levels.back().n; }
};

GridHierarchy build_hierarchy(int omega_fine, int omega_coarse, double sigma,
                              int degree = 6, int nu = 1, double delta = 0.5);

// One V-cycle of the absolute-value flavor applied to r at the given level
// (defaults to the finest). The result is a fixed symmetric positive
// definite linear function of r.
RealVector av_mg_apply(const GridHierarchy& h, const Eigen::Ref<const RealVector>& r,
                       int level = -1);
// Same cycle with L_l - sigma I_l in place of the definite level operators
// and the plain inverse on the coarsest grid; indefinite in general. With
// sigma = 0 both cycles follow identical code paths.
RealVector inv_mg_apply(const GridHierarchy& h, const Eigen::Ref<const RealVector>& r,
                        int level = -1);

RealOperator av_mg_operator(std::shared_ptr<const GridHierarchy> h);
RealOperator inv_mg_operator(std::shared_ptr<const GridHierarchy> h);

}  // namespace plhr

#endif  // PLHR_MULTIGRID_HPP
