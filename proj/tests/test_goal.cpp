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
#include <random>
#include <vector>

#include "rsaa/error.hpp"
#include "rsaa/goal.hpp"
#include "rsaa/rng.hpp"

namespace rsaa {
namespace {

PLGoal identity_goal() {
  PLGoal g;
  g.T = {1.0};
  g.regions = {PLRegion{{1.0}, 0.0, {PLCondition{{0.0}, 1.0, true}}}};
  return g;
}

PLGoal step_goal() {
  PLGoal g;
  g.T = {1.0};
  g.regions = {PLRegion{{0.0}, 1.0, {PLCondition{{1.0}, 0.0, false}}},
               PLRegion{{0.0}, 0.0, {PLCondition{{-1.0}, 0.0, true}}}};
  return g;
}

TEST(Box, Validation) {
  EXPECT_THROW(ParameterBox({}, {}), InvalidParameter);
  EXPECT_THROW(ParameterBox({1.0}, {0.0}), InvalidParameter);
  EXPECT_THROW(ParameterBox({0.0}, {1.0, 2.0}), InvalidParameter);
  const ParameterBox b({0.0, 0.0}, {3.0, 4.0});
  EXPECT_DOUBLE_EQ(b.diameter(), 5.0);
  EXPECT_TRUE(b.contains(std::vector<double>{1.0, 4.0}));
  EXPECT_FALSE(b.contains(std::vector<double>{1.0, 4.1}));
}

TEST(PL, EvaluationExamples) {
  const GoalFunction id(identity_goal());
  EXPECT_DOUBLE_EQ(id.eval(std::vector<double>{0.3}, std::vector<double>{0.4}), 0.7);
  const GoalFunction step(step_goal());
  EXPECT_DOUBLE_EQ(step.eval(std::vector<double>{0.5}, std::vector<double>{-0.2}), 1.0);
  EXPECT_DOUBLE_EQ(step.eval(std::vector<double>{0.5}, std::vector<double>{-0.5}), 0.0);
}

TEST(PL, PartitionViolationNamesPoint) {
  PLGoal g = step_goal();
  g.regions[1].conditions[0].closed = false;  // boundary now uncovered
  const GoalFunction bad(g);
  try {
    bad.eval(std::vector<double>{0.5}, std::vector<double>{-0.5});
    FAIL() << "expected PartitionViolation";
  } catch (const PartitionViolation& e) {
    EXPECT_NE(std::string(e.what()).find("0.5"), std::string::npos);
  }
  PLGoal overlap = step_goal();
  overlap.regions[0].conditions[0].closed = true;
  EXPECT_THROW(GoalFunction(overlap).eval(std::vector<double>{0.5}, std::vector<double>{-0.5}), PartitionViolation);
}

TEST(PL, DimensionValidation) {
  PLGoal g = step_goal();
  g.T = {1.0, 2.0};
  EXPECT_THROW(GoalFunction{g}, InvalidParameter);
  PLGoal h = step_goal();
  h.regions[0].Lambda = {1.0, 1.0};
  EXPECT_THROW(GoalFunction{h}, InvalidParameter);
}

TEST(PL, EnvelopeExamples) {
  const ParameterBox unit({0.0}, {1.0});
  const PLEnvelope step = pl_envelope(step_goal(), unit);
  EXPECT_DOUBLE_EQ(step(std::vector<double>{0.3}), 1.0);
  EXPECT_DOUBLE_EQ(step(std::vector<double>{-7.0}), 1.0);
  const PLEnvelope id = pl_envelope(identity_goal(), ParameterBox({-1.0}, {1.0}));
  EXPECT_DOUBLE_EQ(id(std::vector<double>{0.25}), 1.25);
  EXPECT_DOUBLE_EQ(id(std::vector<double>{-2.0}), 3.0);
  PLGoal zero_t = step_goal();
  zero_t.T = {0.0};
  zero_t.regions[0].b = 2.5;
  EXPECT_DOUBLE_EQ(pl_envelope(zero_t, unit)(std::vector<double>{0.0}), 2.5);
  EXPECT_FALSE(step.fallback);
}

TEST(PL, EnvelopeFallbackAboveTwentyDims) {
  PLGoal g;
  g.m = 21;
  g.d = 1;
  g.T.assign(21, 1.0);
  g.regions = {PLRegion{{1.0}, 0.0, {PLCondition{{0.0}, 1.0, true}}}};
  const std::vector<double> lo(21, -1.0);
  const std::vector<double> hi(21, 2.0);
  const PLEnvelope env = pl_envelope(g, ParameterBox(lo, hi));
  EXPECT_TRUE(env.fallback);
  EXPECT_DOUBLE_EQ(env.eta, 42.0);
}

TEST(PL, EnvelopeDominatesAndPartitionHoldsOnRandomDraws) {
  // Two-dimensional instance with several regions: |w1| + max(w2, 0).
  PLGoal g;
  g.m = 2;
  g.d = 2;
  g.T = {1.0, 0.5, -0.25, 1.0};
  auto region = [](double l1, double l2, bool c1, double k1, double k2, bool c2) {
    return PLRegion{{l1, l2}, 0.0, {PLCondition{{k1, 0.0}, 0.0, c1}, PLCondition{{0.0, k2}, 0.0, c2}}};
  };
  g.regions = {region(1, 1, true, 1, 1, false), region(1, 0, true, 1, -1, true), region(-1, 1, false, -1, 1, false),
               region(-1, 0, false, -1, -1, true)};
  const ParameterBox box({-1.0, 0.0}, {1.0, 2.0});
  const GoalFunction goal(g);
  const PLEnvelope env = pl_envelope(g, box);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::normal_distribution<double> N(0.0, 2.0);
  for (int i = 0; i < 100000; ++i) {
    const std::vector<double> t = {-1.0 + 2.0 * U(rng), 2.0 * U(rng)};
    std::vector<double> z = {N(rng), N(rng)};
    if (i % 10 == 0) z[0] = -(t[0] + 0.5 * t[1]);  // exactly on a boundary
    std::vector<double> w(2);
    g.apply_T(t, w);
    w[0] += z[0];
    w[1] += z[1];
    ASSERT_EQ(g.active_regions(w).size(), 1u);
    if (i < 10000) EXPECT_LE(std::abs(goal.eval(t, z)), env(z) + 1e-12);
  }
}

TEST(PL, LowerSemicontinuityAlongSequences) {
  const GoalFunction step(step_goal());
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double theta = U(rng);
    const std::vector<double> z = {i % 2 == 0 ? -theta : -U(rng)};
    const double at = step.eval(std::vector<double>{theta}, z);
    double liminf = kInfinity;
    for (int k = 20; k < 40; ++k) {
      const double h = std::ldexp(1.0, -k) * (k % 2 == 0 ? 1.0 : -1.0);
      liminf = std::min(liminf, step.eval(std::vector<double>{theta + h}, z));
    }
    EXPECT_GE(liminf, at - 1e-9);
  }
}

TEST(PL, NullBoundaryCheck) {
  const ParameterBox unit({0.0}, {1.0});
  Rng rng(5);
  ZDistribution u01{{AnalyticDistribution::make(UniformDist{0.0, 1.0})}};
  EXPECT_TRUE(check_a6prime(step_goal(), unit, draw_sample(u01, 10000, rng)));
  ZSample atom{1, {-0.5, 0.3, 0.7}};
  EXPECT_FALSE(check_a6prime(step_goal(), unit, atom));
  PLGoal open_only = step_goal();
  open_only.regions[1].conditions[0].closed = false;
  EXPECT_TRUE(check_a6prime(open_only, unit, atom));
}

TEST(Holder, PresetsSatisfyTheirEnvelopes) {
  const ParameterBox box({0.0, -1.0}, {1.0, 2.0});
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::normal_distribution<double> N(0.0, 1.5);
  for (const char* preset : {"product", "sum", "squared_distance", "abs_distance"}) {
    for (double beta : {1.0, 0.5}) {
      const HolderGoal g = make_holder_preset(preset, box, 2, beta);
      for (int i = 0; i < 10000; ++i) {
        const std::vector<double> t = {U(rng), -1.0 + 3.0 * U(rng)};
        const std::vector<double> s = {U(rng), -1.0 + 3.0 * U(rng)};
        const std::vector<double> z = {N(rng), N(rng)};
        const double gt = g.eval(t, z);
        const double dist = std::hypot(t[0] - s[0], t[1] - s[1]);
        EXPECT_LE(std::abs(gt - g.eval(s, z)), g.D(z) * std::pow(dist, beta) * (1 + 1e-9) + 1e-12) << preset;
        EXPECT_LE(gt, g.Dbar(z) + 1e-12) << preset;
        EXPECT_LE(std::abs(gt), g.xi1(z) + 1e-12) << preset;
      }
    }
  }
  EXPECT_THROW(make_holder_preset("product", ParameterBox({0.0}, {1.0}), 2), InvalidParameter);
  EXPECT_THROW(make_holder_preset("nope", box, 2), InvalidParameter);
  EXPECT_THROW(make_holder_preset("sum", box, 2, 1.5), InvalidParameter);
}

TEST(Holder, ConjugateConditionExamples) {
  const ParameterBox unit({0.0}, {1.0});
  Rng rng(1);
  const ZDistribution u01{{AnalyticDistribution::make(UniformDist{0.0, 1.0})}};
  const ZSample z = draw_sample(u01, 200, rng);

  const HolderGoal product = make_holder_preset("product", unit, 1);
  const auto a = check_holder_on_conjugate(product, unit, make_pair(AVaRSpec{0.5}), 1, z);
  EXPECT_TRUE(a.passes) << a.worst_ratio;
  EXPECT_DOUBLE_EQ(a.Ck(std::vector<double>{1.0}), 4.0);

  HolderGoal zero;
  zero.eval = [](std::span<const double>, std::span<const double>) { return 0.0; };
  zero.D = [](std::span<const double>) { return 0.0; };
  zero.Dbar = zero.D;
  zero.xi1 = zero.D;
  for (const Divergence d : {make_pair(AVaRSpec{0.5}), make_pair(EntropicSpec{1.0}), make_pair(PolynomialSpec{2.0})}) {
    const auto c = check_holder_on_conjugate(zero, unit, d, 1, z);
    EXPECT_TRUE(c.passes) << d.name();
    EXPECT_DOUBLE_EQ(c.Ck(std::vector<double>{0.3}), d.conj_dplus(1.0));
  }

  const HolderGoal sum = make_holder_preset("sum", unit, 1);
  const auto e = check_holder_on_conjugate(sum, unit, make_pair(EntropicSpec{1.0}), 2, z);
  EXPECT_TRUE(e.passes) << e.worst_ratio;
  EXPECT_NEAR(e.Ck(std::vector<double>{0.5}), 2.0 * std::exp(0.5 + 3.0), 1e-12);
}

TEST(Holder, CheckDetectsAnUnderstatedModulus) {
  const ParameterBox unit({0.0}, {1.0});
  HolderGoal g = make_holder_preset("product", unit, 1);
  g.D = [](std::span<const double>) { return 0.0; };
  g.eval = [](std::span<const double> t, std::span<const double> z) { return 50.0 * t[0] * z[0]; };
  const ZSample z{1, {0.5, 0.9}};
  const auto c = check_holder_on_conjugate(g, unit, make_pair(AVaRSpec{0.5}), 1, z);
  EXPECT_FALSE(c.passes);
  EXPECT_GT(c.worst_ratio, 1.0);
  EXPECT_EQ(c.worst_theta.size(), 1u);
}

TEST(Constant, EvaluatesEverywhere) {
  const GoalFunction g(ConstantGoal{2.5, 2, 3});
  EXPECT_EQ(g.param_dim(), 2u);
  EXPECT_EQ(g.z_dim(), 3u);
  EXPECT_DOUBLE_EQ(g.eval(std::vector<double>{0.0, 1.0}, std::vector<double>{1.0, 2.0, 3.0}), 2.5);
  const Envelope e = absolute_envelope(g, ParameterBox({0.0, 0.0}, {1.0, 1.0}));
  EXPECT_DOUBLE_EQ(e(std::vector<double>{1.0, 2.0, 3.0}), 2.5);
}

}  // namespace
}  // namespace rsaa
