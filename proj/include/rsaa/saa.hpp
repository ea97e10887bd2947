// Copyright 2026-present the rsaa authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Sample average approximation: joint minimization of
//   (theta, x) -> (1/n) sum_j Phi*(G(theta, Z_j) + x) - x
// over box x [a_n, b_n], and quadrature optimal values for analytic laws.

#include <cstddef>
#include <vector>

#include "rsaa/distribution.hpp"
#include "rsaa/divergence.hpp"
#include "rsaa/goal.hpp"
#include "rsaa/risk.hpp"

namespace rsaa {

struct SaaProblem {
  GoalFunction goal;
  ParameterBox box;
  Divergence pair;
  ZSample z;

  /// Throws InvalidParameter on empty samples or dimension mismatches.
  void validate() const;
};

/// Coarse grid with shrink-around-best refinement.
struct GridConfig {
  int coarse_per_dim = 33;
  int refine_rounds = 4;
  double shrink = 0.25;

  void validate() const;
};

struct LocalizationBounds {
  double x_l = 0.0;
  double x_u = 0.0;
};

struct SaaResult {
  double value = 0.0;
  std::vector<double> theta_star;
  double x_star = 0.0;
  LocalizationBounds x_interval_used;
  std::size_t coarse_points = 0;
  int refinement_rounds = 0;
  std::size_t objective_evals = 0;
};

/// x_l = -Phi(0) - 1 - E xi2 and x_u = (Phi(x0) + 1 + x0 + E xi2 + x0 E xi1)/(x0 - 1).
LocalizationBounds population_x_bounds(const Divergence& pair, double e_xi1, double e_xi2);

/// a_n = -Phi(0) - mean xi2 and b_n = (Phi(x0) + mean xi2 + x0 mean xi1)/(x0 - 1)
/// with xi1 the goal's absolute envelope and xi2 = Phi*(xi1).
/// Throws RangeError when Phi*(xi1) overflows.
LocalizationBounds empirical_x_bounds(const SaaProblem& problem);

/// The SAA risk of G(theta, .) under the sample, searched inside the
/// per-theta localization clipped to `bounds`.
RiskValue saa_objective(const SaaProblem& problem, std::span<const double> theta, const LocalizationBounds& bounds);

/// Grid search over the box; every theta's inner problem is solved to
/// tolerance. Ties resolve to the smallest value, then the lexicographically
/// smallest theta, then the smallest x. Throws LocalizationError if the
/// returned x lies outside empirical_x_bounds.
SaaResult solve_saa(const SaaProblem& problem, const GridConfig& grid = {});

struct Minimizer {
  std::vector<double> theta;
  double x = 0.0;
  double value = 0.0;
  double sigma2 = 0.0;
};

struct TrueValue {
  double v_star = 0.0;
  std::vector<double> theta_star;
  double x_star = 0.0;
  /// Inner minimizer interval at theta_star.
  double x_lo = 0.0;
  double x_hi = 0.0;
  /// Var[h] and E[h^2], h = Phi*(G(theta*, Z) + x*).
  double sigma2 = 0.0;
  double sigma2_uncentered = 0.0;
  double mean_h = 0.0;
  bool unique = true;
  /// Separated grid minima (one entry when unique).
  std::vector<Minimizer> minimizers;
  bool quadrature_converged = true;
  std::size_t quad_nodes = 0;
};

/// Tensor-product quadrature of a product law: per-marginal nodes from
/// quadrature_nodes(marginal, nodes), rows in lexicographic order.
struct ZQuadrature {
  ZSample z;
  std::vector<double> weights;
};
ZQuadrature tensor_quadrature(const ZDistribution& dist, std::size_t nodes);

/// theta scan with the same grid strategy as solve_saa, the inner problem
/// solved against quadrature nodes. The value at the optimum is rechecked
/// with doubled nodes (quadrature_converged: change <= 1e-6). Grid minima
/// within 1e-9 of the best and more than one grid index apart are reported
/// as non-unique unless G(theta, .) agrees bitwise on the nodes.
TrueValue true_value(const GoalFunction& goal, const ParameterBox& box, const Divergence& pair,
                     const ZDistribution& z_dist, std::size_t quad_nodes, const GridConfig& grid = {});

}  // namespace rsaa
