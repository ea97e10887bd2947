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

// Data-parallel sums behind the optimized-certainty-equivalent objective.
//
// For a closed-form conjugate family the inner objective and its one-sided
// derivatives reduce to sums over the sample of conj(y_j + shift) and of
// conj'_-(y_j + shift), conj'_+(y_j + shift), optionally weighted. The scalar
// table is the reference; vector tables must agree with it to rounding.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace rsaa::kernels {

enum class Family : std::uint8_t { avar, entropic, polynomial };

/// Parameters of a closed-form conjugate, pre-digested for the kernels.
///   avar:       conj(y) = scale * y+                       (scale = 1/(1-alpha))
///   entropic:   conj(y) = (exp(rate*y) - 1) / rate        (rate = gamma)
///   polynomial: conj(y) = coef * (y+)^power               (power = p/(p-1), coef = 1/power)
struct ConjParams {
  Family family = Family::avar;
  double scale = 1.0;
  double rate = 1.0;
  double power = 2.0;
  double coef = 0.5;

  static ConjParams avar(double alpha) noexcept {
    ConjParams c;
    c.family = Family::avar;
    c.scale = 1.0 / (1.0 - alpha);
    return c;
  }
  static ConjParams entropic(double gamma) noexcept {
    ConjParams c;
    c.family = Family::entropic;
    c.rate = gamma;
    return c;
  }
  static ConjParams polynomial(double p) noexcept {
    ConjParams c;
    c.family = Family::polynomial;
    c.power = p / (p - 1.0);
    c.coef = (p - 1.0) / p;
    return c;
  }
};

inline double conj(const ConjParams& c, double y) noexcept {
  switch (c.family) {
    case Family::avar:
      return y > 0.0 ? c.scale * y : 0.0;
    case Family::entropic:
      return std::expm1(c.rate * y) / c.rate;
    case Family::polynomial:
      if (y <= 0.0) return 0.0;
      return c.power == 2.0 ? c.coef * y * y : c.coef * std::pow(y, c.power);
  }
  return 0.0;
}

inline double conj_dminus(const ConjParams& c, double y) noexcept {
  switch (c.family) {
    case Family::avar:
      return y > 0.0 ? c.scale : 0.0;
    case Family::entropic:
      return std::exp(c.rate * y);
    case Family::polynomial:
      if (y <= 0.0) return 0.0;
      return c.power == 2.0 ? y : std::pow(y, c.power - 1.0);
  }
  return 0.0;
}

inline double conj_dplus(const ConjParams& c, double y) noexcept {
  if (c.family == Family::avar) return y >= 0.0 ? c.scale : 0.0;
  return conj_dminus(c, y);
}

struct DerivSums {
  double minus = 0.0;
  double plus = 0.0;
};

/// Function table for one instruction-set variant. Weighted entry points
/// take w with the same length as y.
struct KernelTable {
  std::string_view name;
  double (*conj_sum)(const ConjParams& c, const double* y, std::size_t n, double shift);
  double (*conj_wsum)(const ConjParams& c, const double* y, const double* w, std::size_t n,
                      double shift);
  DerivSums (*deriv_sum)(const ConjParams& c, const double* y, std::size_t n, double shift);
  DerivSums (*deriv_wsum)(const ConjParams& c, const double* y, const double* w, std::size_t n,
                          double shift);
};

const KernelTable& scalar_kernels() noexcept;

/// AVX2+FMA table, or nullptr when not compiled in or unsupported by the CPU.
const KernelTable* avx2_kernels() noexcept;

/// Table used by the library: the widest supported variant, unless the
/// environment variable RSAA_KERNELS=scalar forces the reference path.
/// Resolved once per process.
const KernelTable& active_kernels() noexcept;

// Convenience wrappers over active_kernels().
double conj_sum(const ConjParams& c, std::span<const double> y, double shift) noexcept;
double conj_wsum(const ConjParams& c, std::span<const double> y, std::span<const double> w,
                 double shift) noexcept;
DerivSums deriv_sum(const ConjParams& c, std::span<const double> y, double shift) noexcept;
DerivSums deriv_wsum(const ConjParams& c, std::span<const double> y, std::span<const double> w,
                     double shift) noexcept;

}  // namespace rsaa::kernels
