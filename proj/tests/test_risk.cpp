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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "rsaa/error.hpp"
#include "rsaa/risk.hpp"

namespace rsaa {
namespace {

// (1/(1-alpha)) int_alpha^1 F^<-(u) du for the step quantile of a sample.
double avar_by_quantile_integration(std::vector<double> y, double alpha) {
  std::sort(y.begin(), y.end());
  const double n = static_cast<double>(y.size());
  double s = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j) {
    const double lo = std::max(alpha, static_cast<double>(j) / n);
    const double hi = static_cast<double>(j + 1) / n;
    if (hi > lo) s += (hi - lo) * y[j];
  }
  return s / (1.0 - alpha);
}

TEST(Quantile, Examples) {
  const EmpiricalSample s({4.0, 2.0, 3.0, 1.0});
  EXPECT_EQ(quantile_left(s, 0.5), 2.0);
  EXPECT_EQ(quantile_left(s, 0.5 + 1e-9), 3.0);
  EXPECT_EQ(quantile_right(s, 0.5), 3.0);
  EXPECT_EQ(quantile_left(EmpiricalSample({7.0}), 0.3), 7.0);
  EXPECT_THROW(quantile_left(s, 0.0), InvalidParameter);
  EXPECT_THROW(quantile_left(s, 1.0), InvalidParameter);
  EXPECT_THROW(EmpiricalSample({}), InvalidParameter);
  EXPECT_THROW(EmpiricalSample({1.0, std::nan("")}), InvalidParameter);
}

TEST(Oce, EmpiricalExamples) {
  const auto r = oce_empirical(EmpiricalSample({1, 2, 3, 4}), make_pair(AVaRSpec{0.5}));
  EXPECT_NEAR(r.value, 3.5, 1e-10);
  const auto e = oce_empirical(EmpiricalSample({0.0, std::log(3.0)}), make_pair(EntropicSpec{1.0}));
  EXPECT_NEAR(e.value, std::log(2.0), 1e-10);
  EXPECT_NEAR(e.x_star, -std::log(2.0), 1e-8);
  for (const Divergence d : {make_pair(AVaRSpec{0.3}), make_pair(EntropicSpec{2.0}), make_pair(PolynomialSpec{2.5})}) {
    for (double c : {-2.0, 0.0, 1.7}) {
      EXPECT_NEAR(oce_empirical(EmpiricalSample({c, c, c}), d).value, c - d.phi_at_1(), 1e-9) << d.name();
    }
  }
}

TEST(Oce, AnalyticExamples) {
  EXPECT_NEAR(oce_analytic(AnalyticDistribution::make(UniformDist{0, 1}), make_pair(EntropicSpec{1.0}), 64).value,
              oracle::kEntropicUniform, 1e-9);
  EXPECT_NEAR(oce_analytic(AnalyticDistribution::make(DiscreteDist{{{0.0, 0.5}, {1.0, 0.5}}}), make_pair(AVaRSpec{0.5}), 16)
                  .value,
              1.0, 1e-10);
  EXPECT_NEAR(oce_analytic(AnalyticDistribution::make(DiscreteDist{{{2.5, 1.0}}}), make_pair(PolynomialSpec{2.0}), 16).value,
              2.0, 1e-10);
  EXPECT_THROW(oce_analytic(AnalyticDistribution::make(UniformDist{0, 1}), make_pair(EntropicSpec{1.0}), 8),
               InvalidParameter);
  const auto r = oce_analytic(AnalyticDistribution::make(UniformDist{0, 1}), make_pair(AVaRSpec{0.5}), 64);
  EXPECT_TRUE(r.quadrature_converged);
  EXPECT_NEAR(r.value, 0.75, 1e-9);
}

TEST(Oce, SubgradientExamples) {
  const EmpiricalSample s({1, 2, 3, 4});
  const auto lo = inner_subgradient(s, make_pair(AVaRSpec{0.5}), -10.0);
  EXPECT_DOUBLE_EQ(lo.minus, -1.0);
  EXPECT_DOUBLE_EQ(lo.plus, -1.0);
  const auto hi = inner_subgradient(s, make_pair(AVaRSpec{0.5}), 10.0);
  EXPECT_DOUBLE_EQ(hi.minus, 1.0);
  EXPECT_DOUBLE_EQ(hi.plus, 1.0);
  const auto z = inner_subgradient(EmpiricalSample({0.0}), make_pair(EntropicSpec{1.0}), 0.0);
  EXPECT_DOUBLE_EQ(z.minus, 0.0);
  EXPECT_DOUBLE_EQ(z.plus, 0.0);
}

TEST(Oce, OverflowNamesOffendingValue) {
  try {
    oce_empirical(EmpiricalSample({0.0, 1000.0}), make_pair(EntropicSpec{5.0}));
    FAIL() << "expected RangeError";
  } catch (const RangeError& e) {
    EXPECT_NE(std::string(e.what()).find("1000"), std::string::npos) << e.what();
  }
}

class Randomized : public ::testing::Test {
 protected:
  std::vector<double> sample(std::size_t n) {
    std::normal_distribution<double> N(0.0, 1.5);
    std::vector<double> y(n);
    for (auto& v : y) v = N(rng_);
    return y;
  }
  std::size_t size() { return std::uniform_int_distribution<std::size_t>(1, 1000)(rng_); }
  std::mt19937_64 rng_{2024};
  std::vector<Divergence> pairs_ = {make_pair(AVaRSpec{0.5}), make_pair(AVaRSpec{0.9}), make_pair(EntropicSpec{1.0}),
                                    make_pair(EntropicSpec{0.3}), make_pair(PolynomialSpec{2.0}),
                                    make_pair(PolynomialSpec{3.0})};
};

TEST_F(Randomized, AVaRMatchesQuantileIntegrationAndMinimizerSet) {
  for (int i = 0; i < 100; ++i) {
    const auto y = sample(size());
    for (double alpha : {0.5, 0.9}) {
      const EmpiricalSample s(y);
      const auto r = oce_empirical(s, make_pair(AVaRSpec{alpha}));
      EXPECT_NEAR(r.value, avar_by_quantile_integration(y, alpha), 1e-8);
      EXPECT_NEAR(r.x_lo, -quantile_right(s, alpha), 1e-6);
      EXPECT_NEAR(r.x_hi, -quantile_left(s, alpha), 1e-6);
    }
  }
}

TEST_F(Randomized, EntropicClosedForm) {
  for (int i = 0; i < 100; ++i) {
    const auto y = sample(size());
    for (double g : {0.3, 1.0}) {
      double m = 0.0;
      for (double v : y) m += std::exp(g * v);
      m /= static_cast<double>(y.size());
      const auto r = oce_empirical(EmpiricalSample(y), make_pair(EntropicSpec{g}));
      EXPECT_NEAR(r.value, std::log(m) / g, 1e-8);
      EXPECT_NEAR(r.x_star, -std::log(m) / g, 1e-6);
      EXPECT_LE(r.x_hi - r.x_lo, 1e-6);
    }
  }
}

TEST_F(Randomized, CashInvarianceMonotonicityConstants) {
  for (int i = 0; i < 100; ++i) {
    const auto y = sample(size());
    auto bumped = y;
    std::uniform_real_distribution<double> U(0.0, 0.5);
    for (auto& v : bumped) v += U(rng_);
    for (const auto& d : pairs_) {
      const double base = oce_empirical(EmpiricalSample(y), d).value;
      for (double c : {-3.0, 0.7, 12.0}) {
        auto shifted = y;
        for (auto& v : shifted) v += c;
        EXPECT_NEAR(oce_empirical(EmpiricalSample(shifted), d).value, base + c, 1e-8) << d.name();
      }
      EXPECT_LE(base, oce_empirical(EmpiricalSample(bumped), d).value + 1e-10) << d.name();
    }
  }
}

TEST_F(Randomized, SubgradientBracketsMinimizerInterval) {
  for (int i = 0; i < 30; ++i) {
    const auto y = sample(size());
    for (const auto& d : pairs_) {
      const EmpiricalSample s(y);
      const auto r = oce_empirical(s, d);
      EXPECT_LE(r.x_lo, r.x_hi);
      EXPECT_GE(inner_subgradient(s, d, r.x_hi).plus, -1e-9) << d.name();
      EXPECT_LE(inner_subgradient(s, d, r.x_lo).minus, 1e-9) << d.name();
      EXPECT_GE(r.x_lo, r.search_lo);
      EXPECT_LE(r.x_hi, r.search_hi);
    }
  }
}

TEST_F(Randomized, InnerObjectiveIsConvex) {
  for (int i = 0; i < 10; ++i) {
    const auto y = sample(200);
    for (const auto& d : pairs_) {
      const InnerObjective f(y, {}, d);
      const auto [a, b] = f.localization();
      const int k = 1000;
      std::vector<double> v(k + 1);
      for (int j = 0; j <= k; ++j) v[j] = f(a + (b - a) * j / k);
      for (int j = 1; j < k; ++j) {
        EXPECT_LE(v[j], 0.5 * (v[j - 1] + v[j + 1]) + 1e-12 * std::max(1.0, std::abs(v[j]))) << d.name();
      }
    }
  }
}

}  // namespace
}  // namespace rsaa
