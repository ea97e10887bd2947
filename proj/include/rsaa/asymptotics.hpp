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

// Finite-sample bound constants and Monte Carlo harnesses for the limit
// behaviour of SAA optimal values.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "rsaa/distribution.hpp"
#include "rsaa/divergence.hpp"
#include "rsaa/goal.hpp"
#include "rsaa/saa.hpp"

namespace rsaa {

struct BoundConstants {
  double x_bar = 0.0;
  double eta = 0.0;
  double delta_bar = 0.0;
  double eta_bar = 0.0;
  double V = 2.0;
  double K = 2.0;
  double D = 1.0;
  double K_k = 0.0;
  double beta = 1.0;
  int m = 1;
  double phi_at_0 = 0.0;
};

/// (Phi(x0) + 1 + x0 + E Phi*(xi) + x0 E xi)/(x0 - 1) with x0 = pair.x0().
double xbar_constant(const Divergence& pair, double e_xi, double e_phistar_xi);

/// Phi(0) + max(Phi*(L + xbar), 1) with xbar = xbar_constant(pair, L, Phi*(L)).
/// Throws RangeError when Phi* overflows.
double eta_bounded(const Divergence& pair, double L);

/// min(1, (D sqrt(n) eps/(sqrt(V) eta))^V exp(-2 n eps^2/eta^2), D^V exp(-n eps^2/eta^2)),
/// and 1 for eps <= 0.
double tail_bound_bounded(std::size_t n, double eps, const BoundConstants& c);

struct VarianceTerms {
  double v1 = 0.0;
  double v2 = 0.0;
  double v3 = 0.0;
};

/// min(1, (D e/(sqrt(V) H))^V n^(-V/2) exp(-e^2/(n H^2)) + P), e = eps - delta_bar,
/// H = eta_bar + Phi(0), P = (v1 + v2 + v3)/sqrt(n) or 1 without variance terms.
/// Throws InvalidParameter when eps <= delta_bar.
double tail_bound_envelope(std::size_t n, double eps, const BoundConstants& c,
                   const std::optional<VarianceTerms>& var_terms = std::nullopt);

/// E[(Phi*(xi1 + xbar) - n eta_bar - (n - 1) Phi(0))^+] over weighted values
/// of xi1 (empty weights mean equal weights).
double delta_bar(const Divergence& pair, std::span<const double> xi1, std::span<const double> weights, double x_bar,
                 double eta_bar, std::size_t n);

struct BracketingConstant {
  double K_k = 0.0;
  double delta = 0.0;  // diameter of box x [-k, k]
  int m = 1;
  double beta = 1.0;

  /// max(1, (K_k/eps)^((m+1)/beta)).
  double bound(double eps) const;
};

/// K_k = (2 |C_k| + 1)(4 Delta + 1)^beta.
BracketingConstant bracketing_constant(double ck_l2_norm, const ParameterBox& box, int k, double beta);

/// L2 norm of z -> ck(z) under weighted nodes.
double weighted_l2_norm(const Envelope& ck, const ZSample& z, std::span<const double> weights);

struct BracketReport {
  double eps = 0.0;
  double ck_l2_norm = 0.0;
  double spacing = 0.0;
  double half_diagonal = 0.0;
  std::size_t count = 0;
  double bound = 0.0;
  /// Largest L2 bracket width (2 r^beta |C_k|); at most eps by construction.
  double max_width = 0.0;
  std::size_t cells_checked = 0;
  std::size_t containment_violations = 0;
  bool within_bound = false;
};

/// Grids box x [-k, k] into cubes of side s = 2 r/sqrt(m + 1) with
/// r = (eps/(2 |C_k|))^(1/beta); each cube of centre c yields the bracket
/// Phi*(G(c, .)) -/+ C_k r^beta. Containment is spot-checked on up to
/// `check_cells` cubes at their corners and centre against every node.
BracketReport construct_brackets(const HolderGoal& goal, const ParameterBox& box, const Divergence& pair, int k,
                                 double eps, const ZSample& z_nodes, std::span<const double> weights,
                                 std::size_t check_cells = 2000);

/// sup_x |F_R(x) - N(mean, sigma2)(x)|.
double ks_statistic(std::span<const double> sample, double sigma2, double mean = 0.0);

struct WilsonInterval {
  double p_hat = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double radius = 0.0;
};

/// 95% Wilson score interval for k successes out of r.
WilsonInterval wilson_interval(std::size_t k, std::size_t r);

/// Least-squares slope of log p against n over entries with p > min_p.
/// -inf when no entry qualifies, NaN when exactly one does.
double fit_log_slope(std::span<const std::size_t> n_grid, std::span<const double> p, double min_p);

/// Smallest D for which tail_bound_bounded (with c.V, c.eta) is >= p at every n.
double minimal_D(std::span<const std::size_t> n_grid, std::span<const double> p, double eps, const BoundConstants& c);

struct ProblemTemplate {
  GoalFunction goal;
  ParameterBox box;
  Divergence pair;
  GridConfig grid;
};

struct CltOptions {
  /// KS against N(mean, var) estimated from the errors instead of N(0, sigma2).
  bool estimated_variance = false;
};

struct CltReport {
  std::size_t n = 0;
  std::size_t R = 0;
  std::uint64_t master_seed = 0;
  std::vector<double> errors;
  double v_star = 0.0;
  double sigma2_theory = 0.0;
  double sigma2_uncentered = 0.0;
  double ks_stat = 0.0;
  double ks_uncentered = 0.0;
  bool estimated_variance = false;
  /// sigma2_theory == 0: errors are compared with 0, no KS test.
  bool degenerate = false;
  double mean_err = 0.0;
  double var_err = 0.0;
  double var_ratio = 0.0;
  double var_ratio_uncentered = 0.0;
};

/// Replication r = 1..R draws n observations with seed derive_seed(master, r),
/// solves the SAA problem and records sqrt(n)(v_hat - v*). Throws Refusal
/// when `truth` is not unique and InvalidParameter for R < 100.
CltReport run_clt(const ProblemTemplate& problem, const ZDistribution& z_dist, std::size_t n, std::size_t R,
                  std::uint64_t master_seed, const TrueValue& truth, const CltOptions& options = {});

struct DeviationReport {
  double epsilon = 0.0;
  std::size_t R = 0;
  std::uint64_t master_seed = 0;
  double v_star = 0.0;
  std::vector<std::size_t> n_grid;
  std::vector<std::size_t> exceedances;
  std::vector<WilsonInterval> p_hat;
  /// v_hat - v* per n (outer) and replication (inner).
  std::vector<std::vector<double>> errors;
  double fitted_slope = 0.0;
  /// Every later lower edge sits below every earlier upper edge.
  bool nonincreasing_within_noise = true;
  std::optional<BoundConstants> constants;
  double minimal_D = 0.0;
  std::vector<double> bound_curve;
  std::vector<double> bound_curve_minimal_D;
  bool dominance = false;
  bool dominance_minimal_D = false;
};

/// For each n, R replications with seeds derive_seed(derive_seed(master, n), r)
/// estimate P(|v_hat_n - v*| >= eps). With constants the bound curve and
/// dominance verdict (bound >= Wilson lower edge) are filled in; the minimal
/// consistent D is always computed from c.V and c.eta when c is given.
DeviationReport run_deviation(const ProblemTemplate& problem, const ZDistribution& z_dist, double eps,
                              std::vector<std::size_t> n_grid, std::size_t R, std::uint64_t master_seed,
                              double v_star, const std::optional<BoundConstants>& constants = std::nullopt);

}  // namespace rsaa
