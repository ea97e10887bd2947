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

#include "rsaa/saa.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>

#include "rsaa/error.hpp"

namespace rsaa {
namespace {

struct Cell {
  std::vector<double> theta;
  double value = kInfinity;
  double x = 0.0;
  std::size_t evals = 0;
};

bool cell_better(const Cell& a, const Cell& b) {
  if (a.value != b.value) return a.value < b.value;
  if (a.theta != b.theta) return std::lexicographical_compare(a.theta.begin(), a.theta.end(), b.theta.begin(), b.theta.end());
  return a.x < b.x;
}

// Points of a per-dim grid over [lo, hi], first coordinate slowest.
// Degenerate coordinates (lo == hi) contribute one point.
struct Grid {
  std::vector<std::vector<double>> axes;

  std::size_t size() const {
    std::size_t s = 1;
    for (const auto& a : axes) s *= a.size();
    return s;
  }
  std::vector<std::size_t> index(std::size_t flat) const {
    std::vector<std::size_t> idx(axes.size());
    for (std::size_t k = axes.size(); k-- > 0;) {
      idx[k] = flat % axes[k].size();
      flat /= axes[k].size();
    }
    return idx;
  }
  std::vector<double> point(std::size_t flat) const {
    const auto idx = index(flat);
    std::vector<double> t(axes.size());
    for (std::size_t k = 0; k < axes.size(); ++k) t[k] = axes[k][idx[k]];
    return t;
  }
};

Grid make_grid(const std::vector<double>& lo, const std::vector<double>& hi, int per_dim) {
  Grid g;
  for (std::size_t k = 0; k < lo.size(); ++k) {
    std::vector<double> axis;
    if (lo[k] == hi[k]) {
      axis.push_back(lo[k]);
    } else {
      for (int i = 0; i < per_dim; ++i) {
        axis.push_back(i == per_dim - 1 ? hi[k] : lo[k] + (hi[k] - lo[k]) * i / (per_dim - 1));
      }
    }
    g.axes.push_back(std::move(axis));
  }
  return g;
}

using CellEval = std::function<Cell(std::vector<double> theta)>;

std::vector<Cell> eval_grid(const Grid& grid, const CellEval& eval) {
  std::vector<Cell> cells(grid.size());
  tbb::parallel_for(tbb::blocked_range<std::size_t>(0, cells.size()), [&](const tbb::blocked_range<std::size_t>& r) {
    for (std::size_t i = r.begin(); i != r.end(); ++i) cells[i] = eval(grid.point(i));
  });
  return cells;
}

struct SearchOutcome {
  Cell best;
  Grid coarse;
  std::vector<Cell> coarse_cells;
  std::size_t evals = 0;
};

SearchOutcome grid_search(const ParameterBox& box, const GridConfig& cfg, const CellEval& eval) {
  SearchOutcome out;
  out.coarse = make_grid(box.lo(), box.hi(), cfg.coarse_per_dim);
  out.coarse_cells = eval_grid(out.coarse, eval);
  auto absorb = [&](const std::vector<Cell>& cells) {
    for (const auto& c : cells) {
      out.evals += c.evals;
      if (out.best.theta.empty() || cell_better(c, out.best)) out.best = c;
    }
  };
  absorb(out.coarse_cells);

  std::vector<double> lo = box.lo();
  std::vector<double> hi = box.hi();
  for (int round = 0; round < cfg.refine_rounds; ++round) {
    for (std::size_t k = 0; k < lo.size(); ++k) {
      const double half = 0.5 * cfg.shrink * (hi[k] - lo[k]);
      lo[k] = std::max(box.lo()[k], out.best.theta[k] - half);
      hi[k] = std::min(box.hi()[k], out.best.theta[k] + half);
    }
    absorb(eval_grid(make_grid(lo, hi, cfg.coarse_per_dim), eval));
  }
  return out;
}

[[noreturn]] void rethrow_at(std::span<const double> theta) {
  const std::string at = fmt::format(" [theta = ({})]", fmt::join(theta, ", "));
  try {
    throw;
  } catch (const PartitionViolation& e) {
    throw PartitionViolation(e.what() + at);
  } catch (const LocalizationError& e) {
    throw LocalizationError(e.what() + at);
  } catch (const RangeError& e) {
    throw RangeError(e.what() + at);
  } catch (const NumericalError& e) {
    throw NumericalError(e.what() + at);
  } catch (const InvalidParameter& e) {
    throw InvalidParameter(e.what() + at);
  }
}

// Chebyshev distance between two multi-indices.
std::size_t index_distance(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  std::size_t d = 0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, a[k] > b[k] ? a[k] - b[k] : b[k] - a[k]);
  return d;
}

}  // namespace

void SaaProblem::validate() const {
  if (z.size() == 0) throw InvalidParameter("saa problem: empty sample");
  if (z.d != goal.z_dim()) {
    throw InvalidParameter(fmt::format("saa problem: sample dimension {} differs from goal z dimension {}", z.d, goal.z_dim()));
  }
  if (box.dim() != goal.param_dim()) {
    throw InvalidParameter(fmt::format("saa problem: box dimension {} differs from goal theta dimension {}", box.dim(),
                                       goal.param_dim()));
  }
}

void GridConfig::validate() const {
  if (coarse_per_dim < 3) throw InvalidParameter(fmt::format("grid: coarse_per_dim must be >= 3 (got {})", coarse_per_dim));
  if (refine_rounds < 0) throw InvalidParameter("grid: refine_rounds must be >= 0");
  if (!(shrink > 0.0 && shrink < 1.0)) throw InvalidParameter(fmt::format("grid: shrink must lie in (0,1) (got {})", shrink));
}

LocalizationBounds population_x_bounds(const Divergence& pair, double e_xi1, double e_xi2) {
  if (!std::isfinite(e_xi1) || !std::isfinite(e_xi2)) throw InvalidParameter("population_x_bounds: non-finite moments");
  const double x0 = pair.x0();
  if (!(x0 > 1.0)) throw InvalidParameter("population_x_bounds: x0 must exceed 1");
  return {-pair.phi_at_0() - 1.0 - e_xi2, (pair.phi_at_x0() + 1.0 + x0 + e_xi2 + x0 * e_xi1) / (x0 - 1.0)};
}

LocalizationBounds empirical_x_bounds(const SaaProblem& problem) {
  problem.validate();
  const Envelope xi1 = absolute_envelope(problem.goal, problem.box);
  const std::size_t n = problem.z.size();
  double s1 = 0.0;
  double s2 = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double e = xi1(problem.z.row(j));
    const double c = problem.pair.conj(e);
    if (!std::isfinite(c)) {
      throw RangeError(fmt::format("conjugate overflow on envelope value {} ({})", e, problem.pair.name()));
    }
    s1 += e;
    s2 += c;
  }
  s1 /= static_cast<double>(n);
  s2 /= static_cast<double>(n);
  if (!std::isfinite(s2)) throw RangeError("conjugate overflow in the envelope mean");
  const double x0 = problem.pair.x0();
  return {-problem.pair.phi_at_0() - s2, (problem.pair.phi_at_x0() + s2 + x0 * s1) / (x0 - 1.0)};
}

RiskValue saa_objective(const SaaProblem& problem, std::span<const double> theta, const LocalizationBounds& bounds) {
  std::vector<double> y(problem.z.size());
  try {
    problem.goal.eval_batch(theta, problem.z, y);
    const InnerObjective f(y, {}, problem.pair);
    auto [a, b] = f.localization();
    a = std::max(a, bounds.x_l);
    b = std::min(b, bounds.x_u);
    if (a > b) {
      throw LocalizationError(fmt::format("per-theta interval [{}, {}] misses [{}, {}]", f.localization().first,
                                          f.localization().second, bounds.x_l, bounds.x_u));
    }
    OceOptions opt;
    opt.minimizer_interval = false;
    opt.search = std::pair{a, b};
    return oce_values(y, {}, problem.pair, opt);
  } catch (const Error&) {
    rethrow_at(theta);
  }
}

SaaResult solve_saa(const SaaProblem& problem, const GridConfig& grid) {
  grid.validate();
  const LocalizationBounds bounds = empirical_x_bounds(problem);

  const CellEval eval = [&](std::vector<double> theta) {
    const RiskValue r = saa_objective(problem, theta, bounds);
    return Cell{std::move(theta), r.value, r.x_star, static_cast<std::size_t>(r.iterations) + 4};
  };
  const SearchOutcome s = grid_search(problem.box, grid, eval);

  SaaResult out;
  out.value = s.best.value;
  out.theta_star = s.best.theta;
  out.x_star = s.best.x;
  out.x_interval_used = bounds;
  out.coarse_points = s.coarse.size();
  out.refinement_rounds = grid.refine_rounds;
  out.objective_evals = s.evals;
  if (!(out.x_star >= bounds.x_l && out.x_star <= bounds.x_u)) {
    throw LocalizationError(fmt::format("inner minimizer {} outside [{}, {}] at theta = ({})", out.x_star, bounds.x_l,
                                        bounds.x_u, fmt::join(out.theta_star, ", ")));
  }
  return out;
}

ZQuadrature tensor_quadrature(const ZDistribution& dist, std::size_t nodes) {
  if (dist.dim() == 0) throw InvalidParameter("tensor_quadrature: no marginals");
  std::vector<WeightedNodes> parts;
  double total = 1.0;
  for (const auto& m : dist.marginals) {
    parts.push_back(quadrature_nodes(m, nodes));
    total *= static_cast<double>(parts.back().values.size());
  }
  if (total > 5e6) throw InvalidParameter(fmt::format("tensor_quadrature: {} nodes exceed the 5e6 limit", total));
  const std::size_t d = dist.dim();
  const auto count = static_cast<std::size_t>(total);
  ZQuadrature q;
  q.z.d = d;
  q.z.data.resize(count * d);
  q.weights.resize(count);
  for (std::size_t flat = 0; flat < count; ++flat) {
    std::size_t rest = flat;
    double w = 1.0;
    for (std::size_t k = d; k-- > 0;) {
      const std::size_t i = rest % parts[k].values.size();
      rest /= parts[k].values.size();
      q.z.data[flat * d + k] = parts[k].values[i];
      w *= parts[k].weights[i];
    }
    q.weights[flat] = w;
  }
  return q;
}

TrueValue true_value(const GoalFunction& goal, const ParameterBox& box, const Divergence& pair,
                     const ZDistribution& z_dist, std::size_t quad_nodes, const GridConfig& grid) {
  grid.validate();
  if (z_dist.dim() != goal.z_dim()) throw InvalidParameter("true_value: distribution dimension differs from goal");
  if (box.dim() != goal.param_dim()) throw InvalidParameter("true_value: box dimension differs from goal");
  if (quad_nodes < 16) throw InvalidParameter("true_value: quad_nodes must be >= 16");
  const ZQuadrature q = tensor_quadrature(z_dist, quad_nodes);

  auto values_at = [&](const ZQuadrature& quad, std::span<const double> theta) {
    std::vector<double> y(quad.z.size());
    goal.eval_batch(theta, quad.z, y);
    return y;
  };
  auto risk_at = [&](const ZQuadrature& quad, std::span<const double> theta, bool interval) {
    try {
      const std::vector<double> y = values_at(quad, theta);
      OceOptions opt;
      opt.minimizer_interval = interval;
      return oce_values(y, quad.weights, pair, opt);
    } catch (const Error&) {
      rethrow_at(theta);
    }
  };
  auto moments = [&](std::span<const double> theta, double x) {
    const std::vector<double> y = values_at(q, theta);
    std::vector<double> h(y.size());
    for (std::size_t j = 0; j < y.size(); ++j) h[j] = pair.conj(y[j] + x);
    // Centred on h[0] so that a degenerate law gives exactly zero variance.
    double w = 0.0;
    double m1 = 0.0;
    double m2 = 0.0;
    double md = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) {
      w += q.weights[j];
      m1 += q.weights[j] * h[j];
      m2 += q.weights[j] * h[j] * h[j];
      md += q.weights[j] * (h[j] - h[0]);
    }
    md /= w;
    double var = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) {
      const double e = h[j] - h[0] - md;
      var += q.weights[j] * e * e;
    }
    return std::array<double, 3>{m1 / w, m2 / w, var / w};
  };

  const CellEval eval = [&](std::vector<double> theta) {
    const RiskValue r = risk_at(q, theta, false);
    return Cell{std::move(theta), r.value, r.x_star, static_cast<std::size_t>(r.iterations) + 4};
  };
  const SearchOutcome s = grid_search(box, grid, eval);

  TrueValue out;
  out.theta_star = s.best.theta;
  const RiskValue at = risk_at(q, out.theta_star, true);
  out.v_star = at.value;
  out.x_star = at.x_star;
  out.x_lo = at.x_lo;
  out.x_hi = at.x_hi;
  out.quad_nodes = q.z.size();
  const auto mo = moments(out.theta_star, out.x_star);
  out.mean_h = mo[0];
  out.sigma2_uncentered = mo[1];
  out.sigma2 = mo[2];

  const ZQuadrature q2 = tensor_quadrature(z_dist, 2 * quad_nodes);
  if (q2.z.size() != q.z.size()) {
    out.quadrature_converged = std::abs(risk_at(q2, out.theta_star, false).value - out.v_star) <= 1e-6;
  }

  // Separated near-minimal coarse cells.
  std::size_t best_i = 0;
  for (std::size_t i = 1; i < s.coarse_cells.size(); ++i) {
    if (cell_better(s.coarse_cells[i], s.coarse_cells[best_i])) best_i = i;
  }
  const double vmin = s.coarse_cells[best_i].value;
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < s.coarse_cells.size(); ++i) {
    if (s.coarse_cells[i].value <= vmin + 1e-9) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return cell_better(s.coarse_cells[a], s.coarse_cells[b]);
  });
  std::vector<std::size_t> reps;
  std::vector<std::vector<double>> rep_values;
  for (std::size_t i : order) {
    const auto idx = s.coarse.index(i);
    bool separate = true;
    for (std::size_t r : reps) {
      if (index_distance(idx, s.coarse.index(r)) <= 1) separate = false;
    }
    if (!separate) continue;
    std::vector<double> y = values_at(q, s.coarse_cells[i].theta);
    if (std::find(rep_values.begin(), rep_values.end(), y) != rep_values.end()) continue;
    reps.push_back(i);
    rep_values.push_back(std::move(y));
  }
  out.unique = reps.size() <= 1;
  if (out.unique) {
    out.minimizers.push_back({out.theta_star, out.x_star, out.v_star, out.sigma2});
  } else {
    for (std::size_t i : reps) {
      const Cell& c = s.coarse_cells[i];
      out.minimizers.push_back({c.theta, c.x, c.value, moments(c.theta, c.x)[2]});
    }
  }
  return out;
}

}  // namespace rsaa
