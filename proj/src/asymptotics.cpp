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

#include "rsaa/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>
#include <tbb/parallel_for.h>

#include "rsaa/error.hpp"
#include "rsaa/rng.hpp"

namespace rsaa {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kZ95 = 1.959963984540054;

double normal_cdf(double x, double mean, double sigma) {
  return 0.5 * std::erfc(-(x - mean) / (sigma * std::sqrt(2.0)));
}

double sample_mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_var(std::span<const double> v, double mean) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / static_cast<double>(v.size() - 1);
}

// One SAA replication at size n; returns v_hat - v*.
double replicate(const ProblemTemplate& p, const ZDistribution& z_dist, std::size_t n, std::uint64_t seed,
                 double v_star) {
  Rng rng(seed);
  SaaProblem prob{p.goal, p.box, p.pair, draw_sample(z_dist, n, rng)};
  return solve_saa(prob, p.grid).value - v_star;
}

}  // namespace

double xbar_constant(const Divergence& pair, double e_xi, double e_phistar_xi) {
  const double x0 = pair.x0();
  return (pair.phi_at_x0() + 1.0 + x0 + e_phistar_xi + x0 * e_xi) / (x0 - 1.0);
}

double eta_bounded(const Divergence& pair, double L) {
  const double cl = pair.conj(L);
  if (!std::isfinite(cl)) throw RangeError(fmt::format("eta_bounded: Phi*({}) overflows", L));
  const double xb = xbar_constant(pair, L, cl);
  const double c = pair.conj(L + xb);
  if (!std::isfinite(c)) throw RangeError(fmt::format("eta_bounded: Phi*({}) overflows", L + xb));
  return pair.phi_at_0() + std::max(c, 1.0);
}

double tail_bound_bounded(std::size_t n, double eps, const BoundConstants& c) {
  if (!(eps > 0.0)) return 1.0;
  if (n == 0) throw InvalidParameter("tail_bound_bounded: n must be >= 1");
  if (!(c.D > 0.0)) return 0.0;
  const double nn = static_cast<double>(n);
  const double q = nn * eps * eps / (c.eta * c.eta);
  const double l1 = c.V * (std::log(c.D) + 0.5 * std::log(nn) + std::log(eps) - 0.5 * std::log(c.V) - std::log(c.eta)) -
                    2.0 * q;
  const double l2 = c.V * std::log(c.D) - q;
  return std::min(1.0, std::exp(std::min(l1, l2)));
}

double tail_bound_envelope(std::size_t n, double eps, const BoundConstants& c, const std::optional<VarianceTerms>& var_terms) {
  if (!(eps > c.delta_bar)) {
    throw InvalidParameter(fmt::format("tail_bound_envelope: eps = {} must exceed delta_bar = {}", eps, c.delta_bar));
  }
  if (n == 0) throw InvalidParameter("tail_bound_envelope: n must be >= 1");
  const double nn = static_cast<double>(n);
  const double e = eps - c.delta_bar;
  const double h = c.eta_bar + c.phi_at_0;
  const double lead = std::pow(c.D * e / (std::sqrt(c.V) * h), c.V) * std::pow(nn, -0.5 * c.V) *
                      std::exp(-e * e / (nn * h * h));
  const double tail = var_terms ? (var_terms->v1 + var_terms->v2 + var_terms->v3) / std::sqrt(nn) : 1.0;
  return std::min(1.0, lead + tail);
}

double delta_bar(const Divergence& pair, std::span<const double> xi1, std::span<const double> weights, double x_bar,
                 double eta_bar, std::size_t n) {
  if (xi1.empty()) throw InvalidParameter("delta_bar: no envelope values");
  if (!weights.empty() && weights.size() != xi1.size()) throw InvalidParameter("delta_bar: weight length mismatch");
  const double shift = static_cast<double>(n) * eta_bar + static_cast<double>(n - 1) * pair.phi_at_0();
  double s = 0.0;
  double w = 0.0;
  for (std::size_t j = 0; j < xi1.size(); ++j) {
    const double wj = weights.empty() ? 1.0 : weights[j];
    s += wj * std::max(pair.conj(xi1[j] + x_bar) - shift, 0.0);
    w += wj;
  }
  if (!std::isfinite(s)) throw RangeError("delta_bar: conjugate overflow");
  return s / w;
}

double BracketingConstant::bound(double eps) const {
  if (!(eps > 0.0)) return kInfinity;
  return std::max(1.0, std::pow(K_k / eps, (m + 1) / beta));
}

BracketingConstant bracketing_constant(double ck_l2_norm, const ParameterBox& box, int k, double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) throw InvalidParameter("bracketing_constant: beta must lie in (0,1]");
  if (!(ck_l2_norm >= 0.0)) throw InvalidParameter("bracketing_constant: negative norm");
  if (k < 1) throw InvalidParameter("bracketing_constant: k must be >= 1");
  BracketingConstant out;
  const double dk = 2.0 * k;
  out.delta = std::sqrt(box.diameter() * box.diameter() + dk * dk);
  out.K_k = (2.0 * ck_l2_norm + 1.0) * std::pow(4.0 * out.delta + 1.0, beta);
  out.m = static_cast<int>(box.dim());
  out.beta = beta;
  return out;
}

double weighted_l2_norm(const Envelope& ck, const ZSample& z, std::span<const double> weights) {
  if (z.size() == 0) throw InvalidParameter("weighted_l2_norm: no nodes");
  double s = 0.0;
  double w = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    const double wj = weights.empty() ? 1.0 : weights[j];
    const double v = ck(z.row(j));
    s += wj * v * v;
    w += wj;
  }
  return std::sqrt(s / w);
}

BracketReport construct_brackets(const HolderGoal& goal, const ParameterBox& box, const Divergence& pair, int k,
                                 double eps, const ZSample& z_nodes, std::span<const double> weights,
                                 std::size_t check_cells) {
  if (!(eps > 0.0)) throw InvalidParameter("construct_brackets: eps must be positive");
  if (k < 1) throw InvalidParameter("construct_brackets: k must be >= 1");
  const double kk = static_cast<double>(k);
  const Envelope ck = [&](std::span<const double> z) { return (goal.D(z) + 1.0) * pair.conj_dplus(goal.Dbar(z) + kk); };

  BracketReport out;
  out.eps = eps;
  out.ck_l2_norm = weighted_l2_norm(ck, z_nodes, weights);
  const std::size_t m = box.dim();
  const std::size_t dims = m + 1;
  out.half_diagonal = std::pow(eps / (2.0 * out.ck_l2_norm), 1.0 / goal.beta);
  out.spacing = 2.0 * out.half_diagonal / std::sqrt(static_cast<double>(dims));

  std::vector<double> lo = box.lo();
  std::vector<double> hi = box.hi();
  lo.push_back(-kk);
  hi.push_back(kk);
  std::vector<std::size_t> cells(dims);
  std::vector<double> side(dims);
  double total = 1.0;
  double r2 = 0.0;
  for (std::size_t i = 0; i < dims; ++i) {
    const double len = hi[i] - lo[i];
    cells[i] = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / out.spacing)));
    side[i] = len / static_cast<double>(cells[i]);
    total *= static_cast<double>(cells[i]);
    r2 += 0.25 * side[i] * side[i];
  }
  const double r = std::sqrt(r2);
  out.max_width = 2.0 * std::pow(r, goal.beta) * out.ck_l2_norm;
  out.count = total > 1e18 ? std::numeric_limits<std::size_t>::max() : static_cast<std::size_t>(total);
  const BracketingConstant bc = bracketing_constant(out.ck_l2_norm, box, k, goal.beta);
  out.bound = bc.bound(eps);
  out.within_bound = static_cast<double>(out.count) <= out.bound;

  const std::size_t checks = std::min<std::size_t>(check_cells, out.count);
  if (checks == 0) return out;
  const std::size_t stride = std::max<std::size_t>(1, out.count / checks);
  const std::size_t corners = dims <= 10 ? (std::size_t{1} << dims) : 0;
  std::vector<double> centre(dims), pt(dims);
  for (std::size_t c = 0; c < checks; ++c) {
    std::size_t rest = c * stride;
    for (std::size_t i = dims; i-- > 0;) {
      const std::size_t idx = rest % cells[i];
      rest /= cells[i];
      centre[i] = lo[i] + (static_cast<double>(idx) + 0.5) * side[i];
    }
    ++out.cells_checked;
    const std::span<const double> tc(centre.data(), m);
    for (std::size_t corner = 0; corner <= corners; ++corner) {
      // corner == corners stands for the centre itself.
      for (std::size_t i = 0; i < dims; ++i) {
        pt[i] = corner == corners ? centre[i] : centre[i] + ((corner >> i) & 1U ? 0.5 : -0.5) * side[i];
      }
      const std::span<const double> tp(pt.data(), m);
      for (std::size_t j = 0; j < z_nodes.size(); ++j) {
        const auto z = z_nodes.row(j);
        const double fc = pair.conj(goal.eval(tc, z) + centre[m]);
        const double fp = pair.conj(goal.eval(tp, z) + pt[m]);
        const double width = ck(z) * std::pow(r, goal.beta);
        if (std::abs(fp - fc) > width * (1.0 + 1e-9) + 1e-12) ++out.containment_violations;
      }
    }
  }
  return out;
}

double ks_statistic(std::span<const double> sample, double sigma2, double mean) {
  if (sample.empty()) throw InvalidParameter("ks_statistic: empty sample");
  if (!(sigma2 > 0.0)) throw InvalidParameter("ks_statistic: variance must be positive");
  std::vector<double> s(sample.begin(), sample.end());
  std::sort(s.begin(), s.end());
  const double sigma = std::sqrt(sigma2);
  const auto r = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = normal_cdf(s[i], mean, sigma);
    d = std::max({d, static_cast<double>(i + 1) / r - f, f - static_cast<double>(i) / r});
  }
  return d;
}

WilsonInterval wilson_interval(std::size_t k, std::size_t r) {
  if (r == 0) throw InvalidParameter("wilson_interval: no trials");
  if (k > r) throw InvalidParameter("wilson_interval: more successes than trials");
  const double n = static_cast<double>(r);
  const double p = static_cast<double>(k) / n;
  const double z2 = kZ95 * kZ95;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = kZ95 * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  const double lo = k == 0 ? 0.0 : std::max(0.0, centre - half);
  const double hi = k == r ? 1.0 : std::min(1.0, centre + half);
  return {p, lo, hi, half};
}

double fit_log_slope(std::span<const std::size_t> n_grid, std::span<const double> p, double min_p) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (p[i] > min_p) {
      xs.push_back(static_cast<double>(n_grid[i]));
      ys.push_back(std::log(p[i]));
    }
  }
  if (xs.empty()) return -kInfinity;
  if (xs.size() == 1) return kNaN;
  const double mx = sample_mean(xs);
  const double my = sample_mean(ys);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : kNaN;
}

double minimal_D(std::span<const std::size_t> n_grid, std::span<const double> p, double eps, const BoundConstants& c) {
  if (!(eps > 0.0)) throw InvalidParameter("minimal_D: eps must be positive");
  double log_d = -kInfinity;
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (!(p[i] > 0.0)) continue;
    const double nn = static_cast<double>(n_grid[i]);
    const double q = nn * eps * eps / (c.eta * c.eta);
    const double lp = std::log(p[i]) / c.V;
    const double first = lp - 0.5 * std::log(nn) - std::log(eps) + 0.5 * std::log(c.V) + std::log(c.eta) + 2.0 * q / c.V;
    const double second = lp + q / c.V;
    log_d = std::max({log_d, first, second});
  }
  return std::exp(log_d);
}

CltReport run_clt(const ProblemTemplate& problem, const ZDistribution& z_dist, std::size_t n, std::size_t R,
                  std::uint64_t master_seed, const TrueValue& truth, const CltOptions& options) {
  if (!truth.unique) {
    throw Refusal(fmt::format("clt: the true problem has {} separated minimizers; normality needs a unique one",
                              truth.minimizers.size()));
  }
  if (R < 100) throw InvalidParameter(fmt::format("clt: R must be >= 100 (got {})", R));
  if (n == 0) throw InvalidParameter("clt: n must be >= 1");

  CltReport out;
  out.n = n;
  out.R = R;
  out.master_seed = master_seed;
  out.v_star = truth.v_star;
  out.sigma2_theory = truth.sigma2;
  out.sigma2_uncentered = truth.sigma2_uncentered;
  out.estimated_variance = options.estimated_variance;
  out.errors.resize(R);
  const double root_n = std::sqrt(static_cast<double>(n));
  tbb::parallel_for(std::size_t{0}, R, [&](std::size_t r) {
    out.errors[r] = root_n * replicate(problem, z_dist, n, derive_seed(master_seed, r + 1), truth.v_star);
  });
  out.mean_err = sample_mean(out.errors);
  out.var_err = sample_var(out.errors, out.mean_err);
  out.degenerate = !(truth.sigma2 > 0.0);
  if (out.degenerate) {
    out.var_ratio = kNaN;
  } else {
    out.ks_stat = options.estimated_variance && out.var_err > 0.0 ? ks_statistic(out.errors, out.var_err, out.mean_err)
                                                                  : ks_statistic(out.errors, truth.sigma2);
    out.var_ratio = out.var_err / truth.sigma2;
  }
  if (truth.sigma2_uncentered > 0.0) {
    out.ks_uncentered = ks_statistic(out.errors, truth.sigma2_uncentered);
    out.var_ratio_uncentered = out.var_err / truth.sigma2_uncentered;
  } else {
    out.var_ratio_uncentered = kNaN;
  }
  return out;
}

DeviationReport run_deviation(const ProblemTemplate& problem, const ZDistribution& z_dist, double eps,
                              std::vector<std::size_t> n_grid, std::size_t R, std::uint64_t master_seed,
                              double v_star, const std::optional<BoundConstants>& constants) {
  if (!(eps > 0.0)) throw InvalidParameter("deviation: eps must be positive");
  if (R == 0) throw InvalidParameter("deviation: R must be >= 1");
  if (n_grid.empty()) throw InvalidParameter("deviation: empty n grid");
  for (std::size_t n : n_grid) {
    if (n == 0) throw InvalidParameter("deviation: sample sizes must be >= 1");
  }

  DeviationReport out;
  out.epsilon = eps;
  out.R = R;
  out.master_seed = master_seed;
  out.v_star = v_star;
  out.n_grid = std::move(n_grid);
  std::vector<double> p;
  for (std::size_t n : out.n_grid) {
    std::vector<double> err(R);
    const std::uint64_t stream = derive_seed(master_seed, n);
    tbb::parallel_for(std::size_t{0}, R,
                      [&](std::size_t r) { err[r] = replicate(problem, z_dist, n, derive_seed(stream, r + 1), v_star); });
    const auto k = static_cast<std::size_t>(std::count_if(err.begin(), err.end(), [&](double e) { return std::abs(e) >= eps; }));
    out.exceedances.push_back(k);
    out.p_hat.push_back(wilson_interval(k, R));
    p.push_back(out.p_hat.back().p_hat);
    out.errors.push_back(std::move(err));
  }
  out.fitted_slope = fit_log_slope(out.n_grid, p, 5.0 / static_cast<double>(R));
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = i + 1; j < p.size(); ++j) {
      if (out.p_hat[j].lo > out.p_hat[i].hi) out.nonincreasing_within_noise = false;
    }
  }
  if (constants) {
    out.constants = constants;
    out.minimal_D = minimal_D(out.n_grid, p, eps, *constants);
    BoundConstants cmin = *constants;
    cmin.D = out.minimal_D;
    out.dominance = true;
    out.dominance_minimal_D = true;
    for (std::size_t i = 0; i < p.size(); ++i) {
      out.bound_curve.push_back(tail_bound_bounded(out.n_grid[i], eps, *constants));
      out.bound_curve_minimal_D.push_back(tail_bound_bounded(out.n_grid[i], eps, cmin));
      if (out.bound_curve.back() < out.p_hat[i].lo) out.dominance = false;
      if (out.bound_curve_minimal_D.back() < out.p_hat[i].lo) out.dominance_minimal_D = false;
    }
  }
  return out;
}

}  // namespace rsaa
