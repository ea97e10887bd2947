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

#include "rsaa/divergence.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/format.h>

#include "rsaa/error.hpp"

namespace rsaa {
namespace {

constexpr double kInvPhi = 0.6180339887498949;  // (sqrt(5) - 1) / 2
constexpr double kCustomConjTol = 1e-11;

bool is_finite_value(double v) { return std::isfinite(v); }

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

// Largest x in [lo, hi] with finite phi, given phi(lo) finite, phi(hi) infinite.
double domain_edge(const std::function<double(double)>& phi, double lo, double hi) {
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (is_finite_value(phi(mid))) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

void check_custom(const CustomSpec& c) {
  if (!c.phi) throw InvalidParameter("custom divergence: phi is empty");
  if (!(c.x0 > 1.0)) throw InvalidParameter(fmt::format("custom divergence: x0 must be > 1 (got {})", c.x0));
  const double p0 = c.phi(0.0);
  if (!is_finite_value(p0)) throw InvalidParameter("custom divergence: phi(0) must be finite");
  if (std::abs(p0 - c.phi_at_0) > 1e-9 * (1.0 + std::abs(p0))) {
    throw InvalidParameter(fmt::format("custom divergence: phi_at_0 = {} disagrees with phi(0) = {}", c.phi_at_0, p0));
  }
  if (!is_finite_value(c.phi(c.x0))) throw InvalidParameter("custom divergence: phi(x0) must be finite");
  if (!(c.x_max_hint > 0.0)) throw InvalidParameter("custom divergence: x_max_hint must be > 0");

  const double span = 2.0 * std::max(c.x0, c.x_max_hint);
  constexpr int kGrid = 401;
  std::array<double, kGrid> xs{};
  std::array<double, kGrid> vs{};
  double vmin = kInfinity;
  for (int i = 0; i < kGrid; ++i) {
    xs[i] = span * i / (kGrid - 1);
    vs[i] = c.phi(xs[i]);
    if (vs[i] < -1e-12) {
      throw InvalidParameter(fmt::format("custom divergence: phi({}) = {} is negative", xs[i], vs[i]));
    }
    vmin = std::min(vmin, vs[i]);
  }
  if (vmin > 1e-9) {
    throw InvalidParameter(fmt::format("custom divergence: inf phi over the grid is {} > 0", vmin));
  }

  // 200 midpoint triples over the grid, deterministic stride pattern.
  for (int t = 0; t < 200; ++t) {
    const int i = (t * 37) % (kGrid - 1);
    const int j = std::min(kGrid - 1, i + 2 + 2 * ((t * 13) % 50));
    if ((i + j) % 2 != 0) continue;
    const int m = (i + j) / 2;
    if (!is_finite_value(vs[i]) || !is_finite_value(vs[j])) continue;
    const double avg = 0.5 * (vs[i] + vs[j]);
    if (!(vs[m] <= avg + 1e-10 * (1.0 + std::abs(avg)))) {
      throw InvalidParameter(
          fmt::format("custom divergence: midpoint convexity fails at x = {}, {}, {}", xs[i], xs[m], xs[j]));
    }
  }

  // phi(x)/x increasing beyond the hint (or phi leaves its domain).
  double prev = c.phi(c.x_max_hint) / c.x_max_hint;
  for (double x = 2.0 * c.x_max_hint; x <= 64.0 * c.x_max_hint; x *= 2.0) {
    const double v = c.phi(x);
    if (!is_finite_value(v)) break;
    const double ratio = v / x;
    if (!(ratio > prev)) {
      throw InvalidParameter(fmt::format("custom divergence: phi(x)/x not increasing beyond x_max_hint (x = {})", x));
    }
    prev = ratio;
  }
}

}  // namespace

double conjugate_numeric(const std::function<double(double)>& phi, double x0, double y, double tol) {
  if (!(tol > 0.0)) throw InvalidParameter("conjugate_numeric: tol must be > 0");
  if (!(x0 > 1.0)) throw InvalidParameter("conjugate_numeric: x0 must be > 1");
  auto g = [&](double x) { return x * y - phi(x); };

  // Bracket the maximizer of the concave objective.
  double lo_val = g(0.0);
  double hi = x0;
  double hi_val = g(hi);
  bool closed = false;
  for (int it = 0; it < 64; ++it) {
    const double next = 2.0 * hi;
    const double pv = phi(next);
    if (!is_finite_value(pv)) {
      hi = domain_edge(phi, hi, next);
      hi_val = g(hi);
      closed = true;
      break;
    }
    const double next_val = next * y - pv;
    if (next_val <= hi_val) {
      hi = next;
      hi_val = next_val;
      closed = true;
      break;
    }
    hi = next;
    hi_val = next_val;
  }
  if (!closed) {
    throw NumericalError(fmt::format(
        "conjugate_numeric: bracket expansion budget exceeded at y = {} (growth condition violated?)", y));
  }

  double best = std::max(lo_val, hi_val);
  double l = 0.0;
  double r = hi;
  const double slope = std::abs(y) + std::abs(phi(hi) - phi(0.0)) / hi + 1.0;
  const double xtol = std::max(tol / slope, 1e-15 * (1.0 + hi));
  double c = r - kInvPhi * (r - l);
  double d = l + kInvPhi * (r - l);
  double gc = g(c);
  double gd = g(d);
  for (int it = 0; it < 400 && r - l > xtol; ++it) {
    if (gc < gd) {
      l = c;
      c = d;
      gc = gd;
      d = l + kInvPhi * (r - l);
      gd = g(d);
    } else {
      r = d;
      d = c;
      gd = gc;
      c = r - kInvPhi * (r - l);
      gc = g(c);
    }
    best = std::max({best, gc, gd});
  }
  return best;
}

Divergence::Divergence(DivergenceSpec spec) : spec_(std::move(spec)) {}

Divergence Divergence::make(DivergenceSpec spec) {
  Divergence d(std::move(spec));
  std::visit(overloaded{
                 [&](const AVaRSpec& s) {
                   if (!(s.alpha > 0.0 && s.alpha < 1.0)) {
                     throw InvalidParameter(fmt::format("avar: alpha must lie in (0,1) (got {})", s.alpha));
                   }
                   d.closed_ = kernels::ConjParams::avar(s.alpha);
                   d.x0_ = 1.0 / (1.0 - s.alpha);
                 },
                 [&](const EntropicSpec& s) {
                   if (!(s.gamma > 0.0) || !std::isfinite(s.gamma)) {
                     throw InvalidParameter(fmt::format("entropic: gamma must be > 0 (got {})", s.gamma));
                   }
                   d.closed_ = kernels::ConjParams::entropic(s.gamma);
                   d.x0_ = 2.0;
                 },
                 [&](const PolynomialSpec& s) {
                   if (!(s.p > 1.0) || !std::isfinite(s.p)) {
                     throw InvalidParameter(fmt::format("polynomial: p must be > 1 (got {})", s.p));
                   }
                   d.closed_ = kernels::ConjParams::polynomial(s.p);
                   d.x0_ = 2.0;
                 },
                 [&](const CustomSpec& s) {
                   check_custom(s);
                   d.x0_ = s.x0;
                 },
             },
             d.spec_);
  d.phi_at_0_ = d.phi(0.0);
  d.phi_at_x0_ = d.phi(d.x0_);
  d.phi_at_1_ = d.phi(1.0);
  return d;
}

double Divergence::phi(double x) const {
  if (x < 0.0) return kInfinity;
  return std::visit(overloaded{
                        [&](const AVaRSpec& s) { return x <= 1.0 / (1.0 - s.alpha) ? 0.0 : kInfinity; },
                        [&](const EntropicSpec& s) { return x == 0.0 ? 1.0 / s.gamma : (x * std::log(x) - x + 1.0) / s.gamma; },
                        [&](const PolynomialSpec& s) { return std::pow(x, s.p) / s.p; },
                        [&](const CustomSpec& s) { return s.phi(x); },
                    },
                    spec_);
}

double Divergence::conj(double y) const {
  if (closed_) return kernels::conj(*closed_, y);
  const auto& c = std::get<CustomSpec>(spec_);
  return conjugate_numeric(c.phi, c.x0, y, kCustomConjTol);
}

double Divergence::conj_dminus(double y) const { return conjugate_derivatives(*this, y).minus; }

double Divergence::conj_dplus(double y) const { return conjugate_derivatives(*this, y).plus; }

std::string Divergence::name() const {
  return std::visit(overloaded{
                        [](const AVaRSpec& s) { return fmt::format("avar(alpha={})", s.alpha); },
                        [](const EntropicSpec& s) { return fmt::format("entropic(gamma={})", s.gamma); },
                        [](const PolynomialSpec& s) { return fmt::format("polynomial(p={})", s.p); },
                        [](const CustomSpec& s) { return s.name; },
                    },
                    spec_);
}

OneSided conjugate_derivatives(const Divergence& pair, double y) {
  if (const auto& c = pair.closed_form()) {
    return {kernels::conj_dminus(*c, y), kernels::conj_dplus(*c, y)};
  }
  const double h = std::max(1e-6, 1e-6 * std::abs(y));
  const double mid = pair.conj(y);
  const double dm = (mid - pair.conj(y - h)) / h;
  const double dp = (pair.conj(y + h) - mid) / h;
  return {std::max(0.0, dm), std::max(0.0, dp)};
}

bool has_unique_inner_minimizer(const DivergenceSpec& spec) {
  return std::visit(overloaded{
                        [](const AVaRSpec&) { return false; },
                        // Phi(0) = 1/gamma breaks the generic criterion, but the
                        // minimizer -ln E[exp(gamma X)]/gamma is explicit and unique.
                        [](const EntropicSpec&) { return true; },
                        [](const PolynomialSpec&) { return true; },
                        [](const CustomSpec& s) {
                          if (std::abs(s.phi(0.0)) > 1e-12) return false;
                          auto conj = [&](double y) { return conjugate_numeric(s.phi, s.x0, y, 1e-12); };
                          for (int i = 1; i <= 40; ++i) {
                            const double a = 0.25 * i;
                            const double b = a + 0.5;
                            const double avg = 0.5 * (conj(a) + conj(b));
                            if (!(conj(a + 0.25) < avg - 1e-9 * (1.0 + std::abs(avg)))) return false;
                          }
                          return true;
                        },
                    },
                    spec);
}

}  // namespace rsaa
