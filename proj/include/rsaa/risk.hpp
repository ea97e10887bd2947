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

// Law-invariant divergence risk R(F) = inf_x ( int Phi*(F^<-(u) + x) du - x ),
// evaluated on empirical samples and on analytic laws.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "rsaa/distribution.hpp"
#include "rsaa/divergence.hpp"

namespace rsaa {

/// Sorted observations; carrier of the empirical distribution function.
class EmpiricalSample {
 public:
  /// Sorts the values. Throws InvalidParameter when empty or non-finite.
  explicit EmpiricalSample(std::vector<double> values);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

 private:
  std::vector<double> values_;
};

/// inf{t : F_n(t) >= u} = values[ceil(u n) - 1].
double quantile_left(const EmpiricalSample& sample, double u);

/// inf{t : F_n(t) > u}.
double quantile_right(const EmpiricalSample& sample, double u);

struct RiskValue {
  double value = 0.0;
  double x_star = 0.0;
  /// The minimizer set M_F (only filled when requested; otherwise [x*, x*]).
  double x_lo = 0.0;
  double x_hi = 0.0;
  /// Interval the search was confined to.
  double search_lo = 0.0;
  double search_hi = 0.0;
  int iterations = 0;
  /// Analytic laws only: whether node doubling settled within 1e-6.
  bool quadrature_converged = true;
  std::size_t quad_nodes = 0;
};

/// The convex inner objective x -> sum_j w_j Phi*(y_j + x) / sum_j w_j - x.
/// Non-finite evaluations are reported as +inf.
class InnerObjective {
 public:
  /// Empty weights mean equal weights.
  InnerObjective(std::span<const double> y, std::span<const double> w, const Divergence& pair);

  double operator()(double x) const;
  OneSided subgradient(double x) const;

  /// Data-driven localization [a, b]: a = -Phi(0) - s2 and
  /// b = (Phi(x0) + s2 + x0 s1)/(x0 - 1), s1 = mean |y|, s2 = mean Phi*(|y|).
  /// Every minimizer lies inside. Throws RangeError when s2 overflows.
  std::pair<double, double> localization() const;

  std::size_t size() const noexcept { return y_.size(); }

 private:
  double weighted_mean_conj(double shift) const;

  std::span<const double> y_;
  std::span<const double> w_;
  const Divergence* pair_;
  double total_weight_;
};

struct OceOptions {
  /// Compute the full minimizer interval (costs extra subgradient sweeps).
  bool minimizer_interval = true;
  /// Override the data-driven localization.
  std::optional<std::pair<double, double>> search;
};

/// Golden-section minimization of the inner objective over its
/// localization, to relative x-tolerance 1e-10; the minimizer interval is
/// bracketed by level-set expansion (threshold 1e-9 relative) and its edges
/// refined on the sign of the one-sided subgradients.
RiskValue oce_values(std::span<const double> y, std::span<const double> w, const Divergence& pair,
                     const OceOptions& options = {});

RiskValue oce_empirical(const EmpiricalSample& sample, const Divergence& pair);

/// Gauss-Legendre in u against the quantile (exact sum for discrete laws).
/// Nodes double from quad_nodes (>= 16) until the value moves by <= 1e-6 or
/// max(4096, quad_nodes) is passed; quadrature_converged records which.
RiskValue oce_analytic(const AnalyticDistribution& dist, const Divergence& pair, std::size_t quad_nodes);

/// One-sided derivatives of the inner objective at x.
OneSided inner_subgradient(const EmpiricalSample& sample, const Divergence& pair, double x);
OneSided inner_subgradient(const AnalyticDistribution& dist, const Divergence& pair, double x,
                           std::size_t quad_nodes = 4096);

}  // namespace rsaa
