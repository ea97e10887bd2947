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

#include "rsaa/risk.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "rsaa/error.hpp"

namespace rsaa {
namespace {

constexpr double kInvPhi = 0.6180339887498949;
constexpr double kRelXTol = 1e-10;
constexpr double kRelFlat = 1e-9;
constexpr double kSubgradTol = 1e-11;

double xtol(double l, double r) { return kRelXTol * std::max({1.0, std::abs(l), std::abs(r)}); }

double sanitize(double v) { return std::isnan(v) ? kInfinity : v; }

[[noreturn]] void throw_overflow(std::span<const double> y, const Divergence& pair, double shift) {
  for (double v : y) {
    if (!std::isfinite(pair.conj(v + shift))) {
      throw RangeError(fmt::format("conjugate overflow: {} at y = {} (shift {})", pair.name(), v, shift));
    }
  }
  throw RangeError(fmt::format("conjugate sum overflow for {} at shift {}", pair.name(), shift));
}

struct Probe {
  double x;
  double f;
};

// Piecewise-linear objectives have their kinks at x = -y_j; a bisected edge
// that straddles one is moved onto it when the kink satisfies the
// optimality test.
template <class Optimal>
double snap_to_kink(std::span<const double> y, double lo, double hi, double fallback, Optimal optimal) {
  if (optimal(fallback)) return fallback;
  double best = fallback;
  double dist = kInfinity;
  for (double v : y) {
    const double k = -v;
    if (k >= lo && k <= hi && std::abs(k - fallback) < dist && optimal(k)) {
      best = k;
      dist = std::abs(k - fallback);
    }
  }
  return best;
}

bool better(const Probe& a, const Probe& b) { return a.f < b.f || (a.f == b.f && a.x < b.x); }

}  // namespace

EmpiricalSample::EmpiricalSample(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw InvalidParameter("empirical sample: no observations");
  for (double v : values_) {
    if (!std::isfinite(v)) throw InvalidParameter("empirical sample: non-finite observation");
  }
  std::sort(values_.begin(), values_.end());
}

double quantile_left(const EmpiricalSample& sample, double u) {
  if (!(u > 0.0 && u < 1.0)) throw InvalidParameter(fmt::format("quantile_left: u = {} outside (0,1)", u));
  const auto n = static_cast<double>(sample.size());
  auto idx = static_cast<std::size_t>(std::ceil(u * n));
  idx = std::clamp<std::size_t>(idx, 1, sample.size());
  return sample.values()[idx - 1];
}

double quantile_right(const EmpiricalSample& sample, double u) {
  if (!(u > 0.0 && u < 1.0)) throw InvalidParameter(fmt::format("quantile_right: u = {} outside (0,1)", u));
  const auto n = static_cast<double>(sample.size());
  auto idx = static_cast<std::size_t>(std::floor(u * n)) + 1;
  idx = std::clamp<std::size_t>(idx, 1, sample.size());
  return sample.values()[idx - 1];
}

InnerObjective::InnerObjective(std::span<const double> y, std::span<const double> w, const Divergence& pair)
    : y_(y), w_(w), pair_(&pair) {
  if (y_.empty()) throw InvalidParameter("inner objective: empty sample");
  if (!w_.empty() && w_.size() != y_.size()) throw InvalidParameter("inner objective: weight length mismatch");
  total_weight_ = w_.empty() ? static_cast<double>(y_.size()) : std::accumulate(w_.begin(), w_.end(), 0.0);
}

double InnerObjective::weighted_mean_conj(double shift) const {
  double sum = 0.0;
  if (const auto& c = pair_->closed_form()) {
    sum = w_.empty() ? kernels::conj_sum(*c, y_, shift) : kernels::conj_wsum(*c, y_, w_, shift);
  } else {
    for (std::size_t j = 0; j < y_.size(); ++j) {
      const double v = pair_->conj(y_[j] + shift);
      sum += w_.empty() ? v : w_[j] * v;
    }
  }
  return sum / total_weight_;
}

double InnerObjective::operator()(double x) const { return sanitize(weighted_mean_conj(x) - x); }

OneSided InnerObjective::subgradient(double x) const {
  double dm = 0.0;
  double dp = 0.0;
  if (const auto& c = pair_->closed_form()) {
    const auto s = w_.empty() ? kernels::deriv_sum(*c, y_, x) : kernels::deriv_wsum(*c, y_, w_, x);
    dm = s.minus;
    dp = s.plus;
  } else {
    for (std::size_t j = 0; j < y_.size(); ++j) {
      const auto d = conjugate_derivatives(*pair_, y_[j] + x);
      const double wj = w_.empty() ? 1.0 : w_[j];
      dm += wj * d.minus;
      dp += wj * d.plus;
    }
  }
  return {dm / total_weight_ - 1.0, dp / total_weight_ - 1.0};
}

std::pair<double, double> InnerObjective::localization() const {
  double s1 = 0.0;
  double s2 = 0.0;
  for (std::size_t j = 0; j < y_.size(); ++j) {
    const double wj = w_.empty() ? 1.0 : w_[j];
    const double a = std::abs(y_[j]);
    const double c = pair_->conj(a);
    if (!std::isfinite(c)) {
      throw RangeError(fmt::format("conjugate overflow: {} at y = {}", pair_->name(), y_[j]));
    }
    s1 += wj * a;
    s2 += wj * c;
  }
  s1 /= total_weight_;
  s2 /= total_weight_;
  if (!std::isfinite(s2)) throw RangeError(fmt::format("conjugate overflow: {} (mean of Phi*(|y|))", pair_->name()));
  const double x0 = pair_->x0();
  const double a = -pair_->phi_at_0() - s2;
  const double b = (pair_->phi_at_x0() + s2 + x0 * s1) / (x0 - 1.0);
  return {a, b};
}

RiskValue oce_values(std::span<const double> y, std::span<const double> w, const Divergence& pair,
                     const OceOptions& options) {
  const InnerObjective f(y, w, pair);
  const auto [a, b] = options.search ? *options.search : f.localization();
  if (!(a <= b)) throw InvalidParameter(fmt::format("oce: empty search interval [{}, {}]", a, b));

  RiskValue out;
  out.search_lo = a;
  out.search_hi = b;

  Probe best{a, f(a)};
  auto consider = [&](double x, double fx) {
    const Probe p{x, fx};
    if (better(p, best)) best = p;
  };
  consider(b, f(b));

  double l = a;
  double r = b;
  double c = r - kInvPhi * (r - l);
  double d = l + kInvPhi * (r - l);
  double fc = f(c);
  double fd = f(d);
  consider(c, fc);
  consider(d, fd);
  int it = 0;
  for (; it < 500 && r - l > xtol(l, r); ++it) {
    if (fc < fd) {
      r = d;
      d = c;
      fd = fc;
      c = r - kInvPhi * (r - l);
      fc = f(c);
      consider(c, fc);
    } else {
      l = c;
      c = d;
      fc = fd;
      d = l + kInvPhi * (r - l);
      fd = f(d);
      consider(d, fd);
    }
  }
  out.iterations = it;
  out.x_star = best.x;
  out.value = best.f;
  if (!std::isfinite(out.value)) throw_overflow(y, pair, best.x);
  out.x_lo = out.x_star;
  out.x_hi = out.x_star;
  if (!options.minimizer_interval) return out;

  const double level = out.value + kRelFlat * std::max(1.0, std::abs(out.value));
  const double xs = out.x_star;
  const double tol = xtol(a, b);

  // Left edge: smallest x with right derivative >= 0.
  {
    double step = tol;
    double outer = xs;
    for (int k = 0; k < 400; ++k) {
      outer = std::max(a, xs - step);
      if (outer == a || f(outer) > level) break;
      step *= 2.0;
    }
    if (outer < xs) {
      if (f.subgradient(outer).plus >= -kSubgradTol) {
        out.x_lo = outer;
      } else {
        double lo = outer;
        double hi = xs;
        for (int k = 0; k < 200 && hi - lo > xtol(lo, hi) * 1e-2; ++k) {
          const double mid = lo + 0.5 * (hi - lo);
          if (f.subgradient(mid).plus >= -kSubgradTol) {
            hi = mid;
          } else {
            lo = mid;
          }
        }
        out.x_lo = snap_to_kink(y, lo, hi, hi, [&](double x) {
          const auto g = f.subgradient(x);
          return g.plus >= -kSubgradTol && g.minus <= kSubgradTol;
        });
      }
    }
  }
  // Right edge: largest x with left derivative <= 0.
  {
    double step = tol;
    double outer = xs;
    for (int k = 0; k < 400; ++k) {
      outer = std::min(b, xs + step);
      if (outer == b || f(outer) > level) break;
      step *= 2.0;
    }
    if (outer > xs) {
      if (f.subgradient(outer).minus <= kSubgradTol) {
        out.x_hi = outer;
      } else {
        double lo = xs;
        double hi = outer;
        for (int k = 0; k < 200 && hi - lo > xtol(lo, hi) * 1e-2; ++k) {
          const double mid = lo + 0.5 * (hi - lo);
          if (f.subgradient(mid).minus <= kSubgradTol) {
            lo = mid;
          } else {
            hi = mid;
          }
        }
        out.x_hi = snap_to_kink(y, lo, hi, lo, [&](double x) {
          const auto g = f.subgradient(x);
          return g.plus >= -kSubgradTol && g.minus <= kSubgradTol;
        });
      }
    }
  }
  out.x_lo = std::min(out.x_lo, xs);
  out.x_hi = std::max(out.x_hi, xs);
  return out;
}

RiskValue oce_empirical(const EmpiricalSample& sample, const Divergence& pair) {
  return oce_values(sample.values(), {}, pair);
}

RiskValue oce_analytic(const AnalyticDistribution& dist, const Divergence& pair, std::size_t quad_nodes) {
  if (quad_nodes < 16) throw InvalidParameter(fmt::format("oce_analytic: quad_nodes must be >= 16 (got {})", quad_nodes));
  if (dist.is_discrete()) {
    const WeightedNodes nodes = quadrature_nodes(dist, quad_nodes);
    RiskValue r = oce_values(nodes.values, nodes.weights, pair);
    r.quad_nodes = nodes.values.size();
    return r;
  }
  std::size_t n = (quad_nodes + 15) / 16 * 16;
  const std::size_t cap = std::max<std::size_t>(4096, n);
  WeightedNodes nodes = quadrature_nodes(dist, n);
  RiskValue r = oce_values(nodes.values, nodes.weights, pair);
  r.quad_nodes = n;
  r.quadrature_converged = false;
  while (true) {
    const std::size_t n2 = 2 * n;
    WeightedNodes nodes2 = quadrature_nodes(dist, n2);
    RiskValue r2 = oce_values(nodes2.values, nodes2.weights, pair);
    r2.quad_nodes = n2;
    const bool settled = std::abs(r2.value - r.value) <= 1e-6;
    r = r2;
    n = n2;
    if (settled) {
      r.quadrature_converged = true;
      break;
    }
    if (n >= cap) break;
  }
  return r;
}

OneSided inner_subgradient(const EmpiricalSample& sample, const Divergence& pair, double x) {
  return InnerObjective(sample.values(), {}, pair).subgradient(x);
}

OneSided inner_subgradient(const AnalyticDistribution& dist, const Divergence& pair, double x,
                           std::size_t quad_nodes) {
  const WeightedNodes nodes = quadrature_nodes(dist, quad_nodes);
  return InnerObjective(nodes.values, nodes.weights, pair).subgradient(x);
}

}  // namespace rsaa
