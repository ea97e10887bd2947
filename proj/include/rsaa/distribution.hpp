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

#include <cstddef>
#include <span>
#include <utility>
#include <variant>
#include <vector>

namespace rsaa {

struct UniformDist {
  double a = 0.0;
  double b = 1.0;
};

struct TruncNormalDist {
  double mu = 0.0;
  double sigma = 1.0;
  double lo = -1.0;
  double hi = 1.0;
};

/// Finite law given by (value, probability) atoms.
struct DiscreteDist {
  std::vector<std::pair<double, double>> atoms;
};

/// Univariate law with a left-continuous quantile function.
class AnalyticDistribution {
 public:
  using Kind = std::variant<UniformDist, TruncNormalDist, DiscreteDist>;

  /// Validates parameters (lo < hi, sigma > 0, probabilities summing to 1);
  /// discrete atoms are sorted and merged. Throws InvalidParameter.
  static AnalyticDistribution make(Kind kind);

  const Kind& kind() const noexcept { return kind_; }
  bool is_discrete() const noexcept { return std::holds_alternative<DiscreteDist>(kind_); }

  /// inf{t : F(t) >= u} for u in (0,1).
  double quantile(double u) const;

 private:
  explicit AnalyticDistribution(Kind kind) : kind_(std::move(kind)) {}

  Kind kind_;
  double cdf_lo_ = 0.0;  // truncated normal: Phi((lo-mu)/sigma)
  double cdf_hi_ = 1.0;
};

/// Nodes and positive weights summing to one.
struct WeightedNodes {
  std::vector<double> values;
  std::vector<double> weights;
};

/// Composite 16-point Gauss-Legendre rule on (0,1); the node count is
/// rounded up to a multiple of 16.
WeightedNodes gauss_legendre_unit(std::size_t nodes);

/// Quadrature representation of a law: exact atoms for discrete laws,
/// quantile-transformed Gauss-Legendre nodes otherwise.
WeightedNodes quadrature_nodes(const AnalyticDistribution& dist, std::size_t nodes);

/// Product of independent univariate marginals; the law of a d-vector Z.
struct ZDistribution {
  std::vector<AnalyticDistribution> marginals;

  std::size_t dim() const noexcept { return marginals.size(); }
};

/// n observations of a d-vector, row-major.
struct ZSample {
  std::size_t d = 1;
  std::vector<double> data;

  std::size_t size() const noexcept { return d == 0 ? 0 : data.size() / d; }
  std::span<const double> row(std::size_t j) const noexcept { return {data.data() + j * d, d}; }
};

}  // namespace rsaa
