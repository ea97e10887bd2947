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

#include <cmath>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "oracles.hpp"
#include "rsaa/asymptotics.hpp"
#include "rsaa/error.hpp"
#include "rsaa/rng.hpp"

namespace rsaa {
namespace {

const ParameterBox kUnit({0.0}, {1.0});

TEST(Constants, XbarAndEta) {
  const Divergence avar = make_pair(AVaRSpec{0.5});
  EXPECT_DOUBLE_EQ(xbar_constant(avar, 1.0, 2.0), 7.0);
  EXPECT_DOUBLE_EQ(eta_bounded(avar, 1.0), 16.0);
  const Divergence ent = make_pair(EntropicSpec{1.0});
  EXPECT_NEAR(xbar_constant(ent, 0.0, 0.0), oracle::kEntropicXbarZero, 1e-12);
  EXPECT_NEAR(eta_bounded(ent, 0.0), oracle::kEntropicEtaZero, 1e-12);
  const Divergence poly = make_pair(PolynomialSpec{2.0});
  EXPECT_DOUBLE_EQ(xbar_constant(poly, 0.0, 0.0), 5.0);
  EXPECT_DOUBLE_EQ(eta_bounded(poly, 0.0), 12.5);
  for (double x0 : {1.5, 2.0, 4.0, 100.0}) {
    CustomSpec c;
    c.phi = [](double x) { return x * x / 2.0; };
    c.x0 = x0;
    EXPECT_TRUE(std::isfinite(xbar_constant(make_pair(c), 0.0, 0.0)));
  }
  EXPECT_THROW(eta_bounded(make_pair(EntropicSpec{1.0}), 800.0), RangeError);
}

TEST(TailBounds, BoundedExamples) {
  BoundConstants c;
  c.V = 2.0;
  c.D = 1.0;
  c.eta = 16.0;
  EXPECT_NEAR(tail_bound_bounded(1024, 1.0, c), 2.0 * std::exp(-8.0), 1e-15);
  EXPECT_NEAR(tail_bound_bounded(1024, 1.0, c), oracle::kBoundedTailExample, 1e-12);
  EXPECT_EQ(tail_bound_bounded(10, 0.0, c), 1.0);
  // Nonincreasing beyond V eta^2 / (2 eps^2).
  const double eps = 1.0;
  const auto start = static_cast<std::size_t>(c.V * c.eta * c.eta / (2.0 * eps * eps)) + 1;
  double prev = tail_bound_bounded(start, eps, c);
  for (std::size_t n = start + 1; n < start + 5000; n += 7) {
    const double b = tail_bound_bounded(n, eps, c);
    EXPECT_LE(b, prev);
    prev = b;
  }
  EXPECT_LT(prev, 1e-10);
}

TEST(TailBounds, EnvelopeExamples) {
  BoundConstants c;
  c.V = 2.0;
  c.D = 1.0;
  c.eta_bar = 4.0;
  c.phi_at_0 = 0.0;
  c.delta_bar = 0.0;
  EXPECT_NEAR(tail_bound_envelope(100, 1.0, c, VarianceTerms{1, 1, 1}), oracle::kEnvelopeTailExample, 1e-15);
  EXPECT_NEAR(tail_bound_envelope(100, 1.0, c, VarianceTerms{0, 0, 0}), 0.03125 * 0.01 * std::exp(-1.0 / 1600.0), 1e-16);
  EXPECT_EQ(tail_bound_envelope(100, 1.0, c), 1.0);
  c.delta_bar = 1.0;
  EXPECT_THROW(tail_bound_envelope(100, 1.0, c), InvalidParameter);
}

TEST(TailBounds, DeltaBar) {
  const Divergence avar = make_pair(AVaRSpec{0.5});
  const std::vector<double> xi = {1.0, 3.0};
  // Phi*(1 + 2) = 6, Phi*(3 + 2) = 10; shift n eta_bar = 7.
  EXPECT_DOUBLE_EQ(delta_bar(avar, xi, {}, 2.0, 7.0, 1), 1.5);
  EXPECT_DOUBLE_EQ(delta_bar(avar, xi, {}, 2.0, 7.0, 2), 0.0);
}

TEST(Bracketing, ConstantExamples) {
  const auto bc = bracketing_constant(1.0, kUnit, 1, 1.0);
  EXPECT_NEAR(bc.delta, std::sqrt(5.0), 1e-15);
  EXPECT_NEAR(bc.K_k, oracle::kBracketK, 1e-12);
  EXPECT_NEAR(bc.bound(1.0), oracle::kBracketBoundAt1, 1e-9);
  EXPECT_EQ(bc.bound(bc.K_k), 1.0);
  EXPECT_EQ(bc.bound(2.0 * bc.K_k), 1.0);
  EXPECT_NEAR(bc.bound(0.5) / bc.bound(1.0), 4.0, 1e-12);
  EXPECT_THROW(bracketing_constant(1.0, kUnit, 1, 0.0), InvalidParameter);
}

TEST(Bracketing, ConstructionForProductGoal) {
  const HolderGoal g = make_holder_preset("product", kUnit, 1);
  const ZQuadrature q = tensor_quadrature(ZDistribution{{AnalyticDistribution::make(UniformDist{0.0, 1.0})}}, 64);
  for (double eps : {0.5, 0.2, 0.1}) {
    const auto r = construct_brackets(g, kUnit, make_pair(AVaRSpec{0.5}), 1, eps, q.z, q.weights);
    EXPECT_NEAR(r.ck_l2_norm, oracle::kProductCkNorm, 1e-12);
    EXPECT_NEAR(r.bound, std::pow(oracle::kProductK / eps, 2.0), 1e-6 * r.bound);
    EXPECT_LE(r.max_width, eps * (1 + 1e-12));
    EXPECT_TRUE(r.within_bound);
    EXPECT_EQ(r.containment_violations, 0u);
    EXPECT_GT(r.cells_checked, 0u);
  }
}

TEST(Statistics, KsOnSyntheticNormals) {
  boost::math::normal_distribution<double> N(0.0, 1.5);
  int below = 0;
  const std::size_t R = 2000;
  for (std::uint64_t rep = 0; rep < 100; ++rep) {
    Rng rng(derive_seed(77, rep));
    std::vector<double> x(R);
    for (auto& v : x) v = boost::math::quantile(N, rng.uniform());
    if (ks_statistic(x, 2.25) < 1.63 / std::sqrt(static_cast<double>(R))) ++below;
  }
  EXPECT_GE(below, 95);
  EXPECT_THROW(ks_statistic(std::vector<double>{1.0}, 0.0), InvalidParameter);
  EXPECT_NEAR(ks_statistic(std::vector<double>{0.0}, 1.0), 0.5, 1e-15);
}

TEST(Statistics, WilsonAndSlope) {
  const auto w = wilson_interval(30, 100);
  EXPECT_DOUBLE_EQ(w.p_hat, 0.3);
  EXPECT_NEAR(w.lo, 0.2189, 1e-4);
  EXPECT_NEAR(w.hi, 0.3958, 1e-4);
  const auto z = wilson_interval(0, 100);
  EXPECT_EQ(z.lo, 0.0);
  EXPECT_GT(z.hi, 0.0);
  const std::vector<std::size_t> n = {50, 100, 200};
  const std::vector<double> p = {std::exp(-0.01 * 50), std::exp(-0.01 * 100), std::exp(-0.01 * 200)};
  EXPECT_NEAR(fit_log_slope(n, p, 0.0), -0.01, 1e-14);
  EXPECT_EQ(fit_log_slope(n, std::vector<double>{0, 0, 0}, 0.001), -kInfinity);
  EXPECT_TRUE(std::isnan(fit_log_slope(n, std::vector<double>{0.5, 0, 0}, 0.001)));
}

TEST(Statistics, MinimalDMakesTheBoundTight) {
  BoundConstants c;
  c.V = 2.0;
  c.eta = 3.0;
  const std::vector<std::size_t> n = {50, 100, 200, 400};
  const std::vector<double> p = {0.3, 0.2, 0.05, 0.004};
  const double eps = 0.1;
  c.D = minimal_D(n, p, eps, c);
  bool tight = false;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double b = tail_bound_bounded(n[i], eps, c);
    EXPECT_GE(b, p[i] * (1 - 1e-12));
    if (std::abs(b - p[i]) < 1e-12) tight = true;
  }
  EXPECT_TRUE(tight);
}

ProblemTemplate reference_template(const Divergence& pair, int coarse) {
  GridConfig g;
  g.coarse_per_dim = coarse;
  g.refine_rounds = 2;
  return {GoalFunction(make_holder_preset("squared_distance", kUnit, 1)), kUnit, pair, g};
}

TEST(Clt, SeedDeterminismAndShape) {
  const ZDistribution u{{AnalyticDistribution::make(UniformDist{0.0, 1.0})}};
  const auto pt = reference_template(make_pair(EntropicSpec{1.0}), 9);
  const TrueValue t = true_value(pt.goal, pt.box, pt.pair, u, 1024, pt.grid);
  const auto a = run_clt(pt, u, 200, 100, 42, t);
  const auto b = run_clt(pt, u, 200, 100, 42, t);
  EXPECT_EQ(a.errors, b.errors);
  EXPECT_EQ(a.errors.size(), 100u);
  EXPECT_GE(a.ks_stat, 0.0);
  EXPECT_LE(a.ks_stat, 1.0);
  EXPECT_FALSE(a.degenerate);
  const auto c = run_clt(pt, u, 200, 100, 43, t);
  EXPECT_NE(a.errors, c.errors);
  EXPECT_THROW(run_clt(pt, u, 200, 99, 42, t), InvalidParameter);
}

TEST(Clt, ConstantGoalIsDegenerate) {
  const ZDistribution u{{AnalyticDistribution::make(UniformDist{0.0, 1.0})}};
  GridConfig g;
  g.coarse_per_dim = 5;
  g.refine_rounds = 1;
  const ProblemTemplate pt{GoalFunction(ConstantGoal{1.0}), kUnit, make_pair(EntropicSpec{1.0}), g};
  const TrueValue t = true_value(pt.goal, pt.box, pt.pair, u, 64, g);
  const auto r = run_clt(pt, u, 50, 100, 1, t);
  EXPECT_TRUE(r.degenerate);
  for (double e : r.errors) EXPECT_NEAR(e, 0.0, 1e-12);
}

TEST(Clt, RefusesNonUniqueMinimizers) {
  const ZDistribution u{{AnalyticDistribution::make(UniformDist{0.0, 1.0})}};
  TrueValue t;
  t.unique = false;
  t.minimizers.resize(2);
  EXPECT_THROW(run_clt(reference_template(make_pair(EntropicSpec{1.0}), 5), u, 50, 100, 1, t), Refusal);
}

TEST(Deviation, ConstantGoalNeverExceeds) {
  const ZDistribution u{{AnalyticDistribution::make(UniformDist{0.0, 1.0})}};
  GridConfig g;
  g.coarse_per_dim = 5;
  g.refine_rounds = 0;
  const ProblemTemplate pt{GoalFunction(ConstantGoal{1.0}), kUnit, make_pair(AVaRSpec{0.5}), g};
  const auto r = run_deviation(pt, u, 1e-6, {10, 20}, 200, 3, 1.0);
  for (const auto& w : r.p_hat) EXPECT_EQ(w.p_hat, 0.0);
  EXPECT_EQ(r.fitted_slope, -kInfinity);
  EXPECT_THROW(run_deviation(pt, u, 0.0, {10}, 10, 3, 1.0), InvalidParameter);
}

TEST(Deviation, DeterministicWithBoundCurve) {
  const ZDistribution u{{AnalyticDistribution::make(UniformDist{0.0, 1.0})}};
  const auto pt = reference_template(make_pair(PolynomialSpec{2.0}), 5);
  BoundConstants c;
  c.V = 2.0;
  c.D = 1.0;
  c.eta = eta_bounded(pt.pair, 1.0);
  const auto a = run_deviation(pt, u, 0.01, {20, 40}, 300, 11, oracle::kPolyVStar, c);
  const auto b = run_deviation(pt, u, 0.01, {20, 40}, 300, 11, oracle::kPolyVStar, c);
  EXPECT_EQ(a.errors, b.errors);
  ASSERT_EQ(a.bound_curve.size(), 2u);
  EXPECT_TRUE(a.dominance_minimal_D);
  EXPECT_GT(a.p_hat[0].p_hat, 0.0);
}

}  // namespace
}  // namespace rsaa
