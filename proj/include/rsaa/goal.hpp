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

// Goal functions G(theta, z) over a compact parameter box.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rsaa/distribution.hpp"
#include "rsaa/divergence.hpp"

namespace rsaa {

/// Theta = prod_i [lo_i, hi_i].
class ParameterBox {
 public:
  /// Throws InvalidParameter unless lo <= hi componentwise, m >= 1, finite.
  ParameterBox(std::vector<double> lo, std::vector<double> hi);

  std::size_t dim() const noexcept { return lo_.size(); }
  const std::vector<double>& lo() const noexcept { return lo_; }
  const std::vector<double>& hi() const noexcept { return hi_; }
  bool contains(std::span<const double> theta, double slack = 0.0) const noexcept;
  /// Euclidean diameter.
  double diameter() const noexcept;

 private:
  std::vector<double> lo_;
  std::vector<double> hi_;
};

using Envelope = std::function<double(std::span<const double> z)>;

struct ConstantGoal {
  double c = 0.0;
  std::size_t m = 1;
  std::size_t d = 1;
};

/// Black-box goal with Hoelder data: |G(t,z) - G(s,z)| <= D(z) |t - s|^beta,
/// G(t,z) <= Dbar(z), |G(t,z)| <= xi1(z).
struct HolderGoal {
  std::string preset;
  double beta = 1.0;
  std::size_t m = 1;
  std::size_t d = 1;
  std::function<double(std::span<const double> theta, std::span<const double> z)> eval;
  Envelope D;
  Envelope Dbar;
  Envelope xi1;
};

/// Preset Hoelder goals with envelopes derived for `box`:
///   "product"          G = <theta, z>                (m = d)
///   "sum"              G = sum(theta) + sum(z)
///   "squared_distance" G = |theta - z|^2             (m = d)
///   "abs_distance"     G = |theta - z|               (m = d)
/// All are Lipschitz on the box; beta < 1 scales D by diam^(1 - beta).
HolderGoal make_holder_preset(const std::string& preset, const ParameterBox& box, std::size_t d, double beta = 1.0);

/// One linear inequality L(w) + a in I, with I = (0, inf) or [0, inf).
struct PLCondition {
  std::vector<double> L;
  double a = 0.0;
  bool closed = false;
};

/// Region indicator min_l 1_I(L_l(w) + a_l) with affine value Lambda(w) + b.
struct PLRegion {
  std::vector<double> Lambda;
  double b = 0.0;
  std::vector<PLCondition> conditions;
};

/// G(theta, z) = sum_i f_i(theta, z) (Lambda_i(w) + b_i),  w = T theta + z,
/// where the indicators f_i partition (theta, z)-space.
struct PLGoal {
  std::size_t m = 1;
  std::size_t d = 1;
  std::vector<double> T;  // d x m, row-major
  std::vector<PLRegion> regions;

  /// Throws InvalidParameter on dimension mismatches.
  void validate() const;
  void apply_T(std::span<const double> theta, std::span<double> out) const;
  /// Indices of the regions whose conditions all hold at w.
  std::vector<std::size_t> active_regions(std::span<const double> w) const;
};

class GoalFunction {
 public:
  using Kind = std::variant<ConstantGoal, HolderGoal, PLGoal>;

  GoalFunction(Kind kind);  // NOLINT(google-explicit-constructor)

  const Kind& kind() const noexcept { return kind_; }
  std::size_t param_dim() const noexcept;
  std::size_t z_dim() const noexcept;

  /// Throws PartitionViolation for PL goals with zero or several active regions.
  double eval(std::span<const double> theta, std::span<const double> z) const;
  void eval_batch(std::span<const double> theta, const ZSample& z, std::span<double> out) const;
  /// Same on a univariate node set (d = 1).
  void eval_nodes(std::span<const double> theta, std::span<const double> z, std::span<double> out) const;

 private:
  Kind kind_;
};

inline double eval_goal(const GoalFunction& goal, std::span<const double> theta, std::span<const double> z) {
  return goal.eval(theta, z);
}

/// z -> sum_i |Lambda_i(z)| + eta + sum_i |b_i| with eta = max over the box
/// of sum_i |Lambda_i(T theta)| (vertex enumeration, m <= 20; otherwise a
/// coordinatewise bound and `fallback` is set).
struct PLEnvelope {
  double eta = 0.0;
  double sum_abs_b = 0.0;
  std::vector<std::vector<double>> lambdas;
  bool fallback = false;

  double operator()(std::span<const double> z) const;
};

PLEnvelope pl_envelope(const PLGoal& goal, const ParameterBox& box);

/// xi1 for any goal: |c|, the Hoelder envelope, or the PL envelope.
Envelope absolute_envelope(const GoalFunction& goal, const ParameterBox& box);

struct HolderCheck {
  bool passes = true;
  double worst_ratio = 0.0;  // max lhs / rhs over the sampled pairs
  std::vector<double> worst_theta, worst_vartheta, worst_z;
  double worst_x = 0.0;
  double worst_y = 0.0;
  std::function<double(std::span<const double>)> Ck;
};

/// C_k(z) = (D(z) + 1) Phi*'_+(Dbar(z) + k), then samples pairs
/// ((theta, x), (vartheta, y)) with |x|, |y| <= k over the given z and checks
/// |Phi*(G(theta,z)+x) - Phi*(G(vartheta,z)+y)| <= C_k(z) |(theta,x) - (vartheta,y)|^beta
/// within a factor 1 + 1e-9.
HolderCheck check_holder_on_conjugate(const HolderGoal& goal, const ParameterBox& box, const Divergence& pair,
                                      int k, const ZSample& z_samples, std::size_t pairs = 10000,
                                      std::uint64_t seed = 1);

/// Necessary-evidence check of the null-boundary condition: for every closed
/// condition, no sampled z has L(z) within 1e-12 of the range of
/// -L(T theta) - a over the box.
bool check_a6prime(const PLGoal& goal, const ParameterBox& box, const ZSample& z_samples);

}  // namespace rsaa
