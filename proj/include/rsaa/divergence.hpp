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

// Divergence functions Phi: [0, inf) -> [0, inf] and their Fenchel-Legendre
// conjugates Phi*(y) = sup_{x >= 0} (x y - Phi(x)).

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <variant>

#include "rsaa/kernels.hpp"

namespace rsaa {

/// Value a divergence takes outside its effective domain.
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct AVaRSpec {
  double alpha = 0.5;
};

struct EntropicSpec {
  double gamma = 1.0;
};

struct PolynomialSpec {
  double p = 2.0;
};

/// User-supplied divergence. phi must return kInfinity outside its
/// effective domain; x0 > 1 must lie inside it.
struct CustomSpec {
  std::function<double(double)> phi;
  double x0 = 2.0;
  double phi_at_0 = 0.0;
  double x_max_hint = 4.0;
  std::string name = "custom";
};

using DivergenceSpec = std::variant<AVaRSpec, EntropicSpec, PolynomialSpec, CustomSpec>;

struct OneSided {
  double minus = 0.0;
  double plus = 0.0;
};

/// sup_{x >= 0} (x y - phi(x)) to absolute accuracy tol.
///
/// The bracket [0, X] starts at X = x0 and doubles until the concave
/// objective stops increasing or phi leaves its effective domain (whose
/// right end is then located by bisection); golden-section search finishes.
/// Throws NumericalError if 64 doublings do not close the bracket.
double conjugate_numeric(const std::function<double(double)>& phi, double x0, double y, double tol);

/// A divergence together with its conjugate and the conjugate's one-sided
/// derivatives. Immutable after construction.
class Divergence {
 public:
  /// Validates spec and builds the pair. Throws InvalidParameter naming the
  /// violated bound; Custom specs are spot-checked for convexity, finiteness
  /// at 0 and x0, vanishing infimum, and superlinear growth.
  static Divergence make(DivergenceSpec spec);

  const DivergenceSpec& spec() const noexcept { return spec_; }

  double phi(double x) const;
  double conj(double y) const;
  double conj_dminus(double y) const;
  double conj_dplus(double y) const;

  double phi_at_0() const noexcept { return phi_at_0_; }
  double phi_at_x0() const noexcept { return phi_at_x0_; }
  double phi_at_1() const noexcept { return phi_at_1_; }
  double x0() const noexcept { return x0_; }

  /// Kernel parameters for the closed-form families; empty for Custom.
  const std::optional<kernels::ConjParams>& closed_form() const noexcept { return closed_; }

  std::string name() const;

 private:
  explicit Divergence(DivergenceSpec spec);

  DivergenceSpec spec_;
  std::optional<kernels::ConjParams> closed_;
  double x0_ = 2.0;
  double phi_at_0_ = 0.0;
  double phi_at_x0_ = 0.0;
  double phi_at_1_ = 0.0;
};

inline Divergence make_pair(DivergenceSpec spec) { return Divergence::make(std::move(spec)); }

/// (Phi*'_-(y), Phi*'_+(y)). Closed forms for the named families; forward and
/// backward difference quotients with step max(1e-6, 1e-6 |y|) for Custom.
OneSided conjugate_derivatives(const Divergence& pair, double y);

/// Whether the OCE infimum is attained at a single x for every law.
/// True for polynomial and entropic, false for AVaR; for Custom, Phi(0) = 0
/// and strict convexity of Phi* on (0, inf) are checked numerically.
bool has_unique_inner_minimizer(const DivergenceSpec& spec);

}  // namespace rsaa
