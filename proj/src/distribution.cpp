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

#include "rsaa/distribution.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <fmt/format.h>

#include "rsaa/error.hpp"

namespace rsaa {

AnalyticDistribution AnalyticDistribution::make(Kind kind) {
  AnalyticDistribution d(std::move(kind));
  if (auto* u = std::get_if<UniformDist>(&d.kind_)) {
    if (!(u->a < u->b)) throw InvalidParameter(fmt::format("uniform: need a < b (got {}, {})", u->a, u->b));
  } else if (auto* t = std::get_if<TruncNormalDist>(&d.kind_)) {
    if (!(t->sigma > 0.0)) throw InvalidParameter("truncnormal: sigma must be > 0");
    if (!(t->lo < t->hi)) throw InvalidParameter("truncnormal: need lo < hi");
    const boost::math::normal_distribution<double> nd(t->mu, t->sigma);
    d.cdf_lo_ = boost::math::cdf(nd, t->lo);
    d.cdf_hi_ = boost::math::cdf(nd, t->hi);
    if (!(d.cdf_hi_ > d.cdf_lo_)) throw InvalidParameter("truncnormal: truncation window carries no mass");
  } else {
    auto& atoms = std::get<DiscreteDist>(d.kind_).atoms;
    if (atoms.empty()) throw InvalidParameter("discrete: no atoms");
    double total = 0.0;
    for (const auto& [v, p] : atoms) {
      if (!std::isfinite(v) || !(p >= 0.0)) throw InvalidParameter("discrete: atoms need finite values and p >= 0");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) {
      throw InvalidParameter(fmt::format("discrete: probabilities sum to {} instead of 1", total));
    }
    std::sort(atoms.begin(), atoms.end());
    std::vector<std::pair<double, double>> merged;
    for (const auto& a : atoms) {
      if (a.second == 0.0) continue;
      if (!merged.empty() && merged.back().first == a.first) {
        merged.back().second += a.second;
      } else {
        merged.push_back(a);
      }
    }
    atoms = std::move(merged);
  }
  return d;
}

double AnalyticDistribution::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw InvalidParameter(fmt::format("quantile: u = {} outside (0,1)", u));
  if (const auto* un = std::get_if<UniformDist>(&kind_)) return un->a + u * (un->b - un->a);
  if (const auto* t = std::get_if<TruncNormalDist>(&kind_)) {
    const boost::math::normal_distribution<double> nd(t->mu, t->sigma);
    const double v = boost::math::quantile(nd, cdf_lo_ + u * (cdf_hi_ - cdf_lo_));
    return std::clamp(v, t->lo, t->hi);
  }
  const auto& atoms = std::get<DiscreteDist>(kind_).atoms;
  double cum = 0.0;
  for (const auto& [v, p] : atoms) {
    cum += p;
    if (cum >= u) return v;
  }
  return atoms.back().first;
}

WeightedNodes gauss_legendre_unit(std::size_t nodes) {
  using Rule = boost::math::quadrature::gauss<double, 16>;
  const auto& absc = Rule::abscissa();
  const auto& wts = Rule::weights();
  const std::size_t panels = std::max<std::size_t>(1, (nodes + 15) / 16);
  WeightedNodes out;
  out.values.reserve(panels * 16);
  out.weights.reserve(panels * 16);
  const double h = 1.0 / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const double mid = (static_cast<double>(p) + 0.5) * h;
    // Boost stores the non-negative half of the symmetric rule.
    for (std::size_t i = absc.size(); i-- > 0;) {
      out.values.push_back(mid - 0.5 * h * absc[i]);
      out.weights.push_back(0.5 * h * wts[i]);
    }
    for (std::size_t i = 0; i < absc.size(); ++i) {
      out.values.push_back(mid + 0.5 * h * absc[i]);
      out.weights.push_back(0.5 * h * wts[i]);
    }
  }
  return out;
}

WeightedNodes quadrature_nodes(const AnalyticDistribution& dist, std::size_t nodes) {
  if (const auto* d = std::get_if<DiscreteDist>(&dist.kind())) {
    WeightedNodes out;
    for (const auto& [v, p] : d->atoms) {
      out.values.push_back(v);
      out.weights.push_back(p);
    }
    return out;
  }
  WeightedNodes out = gauss_legendre_unit(nodes);
  for (double& u : out.values) u = dist.quantile(u);
  return out;
}

}  // namespace rsaa
