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

#include "rsaa/goal.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "rsaa/error.hpp"
#include "rsaa/rng.hpp"

namespace rsaa {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

bool condition_holds(const PLCondition& c, std::span<const double> w) {
  const double v = dot(c.L, w) + c.a;
  return c.closed ? v >= 0.0 : v > 0.0;
}

// c = L^T T as an m-vector (the theta-coefficients of L(T theta)).
std::vector<double> pull_back(const PLGoal& g, std::span<const double> L) {
  std::vector<double> c(g.m, 0.0);
  for (std::size_t r = 0; r < g.d; ++r) {
    for (std::size_t k = 0; k < g.m; ++k) c[k] += L[r] * g.T[r * g.m + k];
  }
  return c;
}

}  // namespace

ParameterBox::ParameterBox(std::vector<double> lo, std::vector<double> hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.empty()) throw InvalidParameter("parameter box: dimension must be >= 1");
  if (lo_.size() != hi_.size()) throw InvalidParameter("parameter box: lo/hi length mismatch");
  for (std::size_t i = 0; i < lo_.size(); ++i) {
    if (!std::isfinite(lo_[i]) || !std::isfinite(hi_[i]) || !(lo_[i] <= hi_[i])) {
      throw InvalidParameter(fmt::format("parameter box: need finite lo <= hi in coordinate {}", i));
    }
  }
}

bool ParameterBox::contains(std::span<const double> theta, double slack) const noexcept {
  if (theta.size() != lo_.size()) return false;
  for (std::size_t i = 0; i < lo_.size(); ++i) {
    if (theta[i] < lo_[i] - slack || theta[i] > hi_[i] + slack) return false;
  }
  return true;
}

double ParameterBox::diameter() const noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < lo_.size(); ++i) s += (hi_[i] - lo_[i]) * (hi_[i] - lo_[i]);
  return std::sqrt(s);
}

HolderGoal make_holder_preset(const std::string& preset, const ParameterBox& box, std::size_t d, double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) throw InvalidParameter(fmt::format("holder goal: beta must lie in (0,1] (got {})", beta));
  const std::vector<double> lo = box.lo();
  const std::vector<double> hi = box.hi();
  const std::size_t m = box.dim();
  // Lipschitz constant L(z) turns into a Hoelder modulus L(z) diam^(1-beta).
  const double scale = beta == 1.0 ? 1.0 : std::pow(std::max(box.diameter(), 1e-300), 1.0 - beta);

  HolderGoal g;
  g.preset = preset;
  g.beta = beta;
  g.m = m;
  g.d = d;

  auto need_square = [&] {
    if (d != m) throw InvalidParameter(fmt::format("holder preset '{}' needs m == d (m = {}, d = {})", preset, m, d));
  };

  if (preset == "product") {
    need_square();
    g.eval = [](std::span<const double> t, std::span<const double> z) { return dot(t, z); };
    auto sup = [lo, hi](std::span<const double> z) {
      double s = 0.0;
      for (std::size_t k = 0; k < lo.size(); ++k) s += std::max(lo[k] * z[k], hi[k] * z[k]);
      return s;
    };
    auto inf = [lo, hi](std::span<const double> z) {
      double s = 0.0;
      for (std::size_t k = 0; k < lo.size(); ++k) s += std::min(lo[k] * z[k], hi[k] * z[k]);
      return s;
    };
    g.D = [scale](std::span<const double> z) { return scale * std::sqrt(dot(z, z)); };
    g.Dbar = sup;
    g.xi1 = [sup, inf](std::span<const double> z) { return std::max(std::abs(sup(z)), std::abs(inf(z))); };
  } else if (preset == "sum") {
    g.eval = [](std::span<const double> t, std::span<const double> z) {
      double s = 0.0;
      for (double v : t) s += v;
      for (double v : z) s += v;
      return s;
    };
    double slo = 0.0;
    double shi = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      slo += lo[k];
      shi += hi[k];
    }
    auto zsum = [](std::span<const double> z) {
      double s = 0.0;
      for (double v : z) s += v;
      return s;
    };
    const double lip = std::sqrt(static_cast<double>(m)) * scale;
    g.D = [lip](std::span<const double>) { return lip; };
    g.Dbar = [shi, zsum](std::span<const double> z) { return shi + zsum(z); };
    g.xi1 = [slo, shi, zsum](std::span<const double> z) {
      return std::max(std::abs(slo + zsum(z)), std::abs(shi + zsum(z)));
    };
  } else if (preset == "squared_distance" || preset == "abs_distance") {
    need_square();
    auto far2 = [lo, hi](std::span<const double> z) {
      double s = 0.0;
      for (std::size_t k = 0; k < lo.size(); ++k) {
        s += std::max((lo[k] - z[k]) * (lo[k] - z[k]), (hi[k] - z[k]) * (hi[k] - z[k]));
      }
      return s;
    };
    if (preset == "squared_distance") {
      g.eval = [](std::span<const double> t, std::span<const double> z) {
        double s = 0.0;
        for (std::size_t k = 0; k < t.size(); ++k) s += (t[k] - z[k]) * (t[k] - z[k]);
        return s;
      };
      // |<t - s, t + s - 2z>| <= |t - s| (|t - z| + |s - z|)
      g.D = [far2, scale](std::span<const double> z) { return 2.0 * std::sqrt(far2(z)) * scale; };
      g.Dbar = far2;
      g.xi1 = far2;
    } else {
      g.eval = [](std::span<const double> t, std::span<const double> z) {
        double s = 0.0;
        for (std::size_t k = 0; k < t.size(); ++k) s += (t[k] - z[k]) * (t[k] - z[k]);
        return std::sqrt(s);
      };
      g.D = [scale](std::span<const double>) { return scale; };
      g.Dbar = [far2](std::span<const double> z) { return std::sqrt(far2(z)); };
      g.xi1 = g.Dbar;
    }
  } else {
    throw InvalidParameter(fmt::format("unknown holder preset '{}'", preset));
  }
  return g;
}

void PLGoal::validate() const {
  if (m == 0 || d == 0) throw InvalidParameter("pl goal: m and d must be >= 1");
  if (T.size() != m * d) throw InvalidParameter(fmt::format("pl goal: T has {} entries, expected d*m = {}", T.size(), m * d));
  if (regions.empty()) throw InvalidParameter("pl goal: no regions");
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const auto& r = regions[i];
    if (r.Lambda.size() != d) throw InvalidParameter(fmt::format("pl goal: region {} Lambda has wrong length", i));
    if (r.conditions.empty()) throw InvalidParameter(fmt::format("pl goal: region {} has no conditions", i));
    for (const auto& c : r.conditions) {
      if (c.L.size() != d) throw InvalidParameter(fmt::format("pl goal: region {} condition L has wrong length", i));
    }
  }
}

void PLGoal::apply_T(std::span<const double> theta, std::span<double> out) const {
  for (std::size_t r = 0; r < d; ++r) {
    double s = 0.0;
    for (std::size_t k = 0; k < m; ++k) s += T[r * m + k] * theta[k];
    out[r] = s;
  }
}

std::vector<std::size_t> PLGoal::active_regions(std::span<const double> w) const {
  std::vector<std::size_t> act;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const auto& conds = regions[i].conditions;
    if (std::all_of(conds.begin(), conds.end(), [&](const PLCondition& c) { return condition_holds(c, w); })) {
      act.push_back(i);
    }
  }
  return act;
}

GoalFunction::GoalFunction(Kind kind) : kind_(std::move(kind)) {
  if (const auto* pl = std::get_if<PLGoal>(&kind_)) pl->validate();
  if (const auto* h = std::get_if<HolderGoal>(&kind_)) {
    if (!h->eval || !h->D || !h->Dbar || !h->xi1) throw InvalidParameter("holder goal: missing evaluator or envelope");
  }
}

std::size_t GoalFunction::param_dim() const noexcept {
  return std::visit([](const auto& g) { return g.m; }, kind_);
}

std::size_t GoalFunction::z_dim() const noexcept {
  return std::visit([](const auto& g) { return g.d; }, kind_);
}

namespace {

double pl_eval(const PLGoal& g, std::span<const double> theta, std::span<const double> z, std::span<double> w) {
  g.apply_T(theta, w);
  for (std::size_t r = 0; r < g.d; ++r) w[r] += z[r];
  std::size_t active = 0;
  std::size_t which = 0;
  for (std::size_t i = 0; i < g.regions.size(); ++i) {
    const auto& conds = g.regions[i].conditions;
    bool on = true;
    for (const auto& c : conds) {
      if (!condition_holds(c, w)) {
        on = false;
        break;
      }
    }
    if (on) {
      ++active;
      which = i;
    }
  }
  if (active != 1) {
    throw PartitionViolation(fmt::format("pl goal: {} active regions at theta = [{}], z = [{}]", active,
                                         fmt::join(theta, ", "), fmt::join(z, ", ")));
  }
  const auto& reg = g.regions[which];
  return dot(reg.Lambda, w) + reg.b;
}

}  // namespace

double GoalFunction::eval(std::span<const double> theta, std::span<const double> z) const {
  return std::visit(overloaded{
                        [&](const ConstantGoal& g) { return g.c; },
                        [&](const HolderGoal& g) { return g.eval(theta, z); },
                        [&](const PLGoal& g) {
                          std::vector<double> w(g.d);
                          return pl_eval(g, theta, z, w);
                        },
                    },
                    kind_);
}

void GoalFunction::eval_batch(std::span<const double> theta, const ZSample& z, std::span<double> out) const {
  const std::size_t n = z.size();
  std::visit(overloaded{
                 [&](const ConstantGoal& g) { std::fill(out.begin(), out.begin() + n, g.c); },
                 [&](const HolderGoal& g) {
                   for (std::size_t j = 0; j < n; ++j) out[j] = g.eval(theta, z.row(j));
                 },
                 [&](const PLGoal& g) {
                   std::vector<double> w(g.d);
                   for (std::size_t j = 0; j < n; ++j) out[j] = pl_eval(g, theta, z.row(j), w);
                 },
             },
             kind_);
}

void GoalFunction::eval_nodes(std::span<const double> theta, std::span<const double> z, std::span<double> out) const {
  for (std::size_t j = 0; j < z.size(); ++j) out[j] = eval(theta, z.subspan(j, 1));
}

double PLEnvelope::operator()(std::span<const double> z) const {
  double s = eta + sum_abs_b;
  for (const auto& lam : lambdas) s += std::abs(dot(lam, z));
  return s;
}

PLEnvelope pl_envelope(const PLGoal& goal, const ParameterBox& box) {
  goal.validate();
  if (box.dim() != goal.m) throw InvalidParameter("pl_envelope: box dimension differs from m");
  PLEnvelope env;
  std::vector<std::vector<double>> coef;
  for (const auto& r : goal.regions) {
    env.lambdas.push_back(r.Lambda);
    env.sum_abs_b += std::abs(r.b);
    coef.push_back(pull_back(goal, r.Lambda));
  }
  const auto& lo = box.lo();
  const auto& hi = box.hi();
  const std::size_t m = goal.m;
  if (m > 20) {
    env.fallback = true;
    for (const auto& c : coef) {
      for (std::size_t k = 0; k < m; ++k) env.eta += std::abs(c[k]) * std::max(std::abs(lo[k]), std::abs(hi[k]));
    }
    return env;
  }
  // sum_i |c_i . theta| is convex, so its maximum sits at a vertex.
  std::vector<double> v(m);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    for (std::size_t k = 0; k < m; ++k) v[k] = (mask >> k) & 1U ? hi[k] : lo[k];
    double s = 0.0;
    for (const auto& c : coef) s += std::abs(dot(c, v));
    env.eta = std::max(env.eta, s);
  }
  return env;
}

Envelope absolute_envelope(const GoalFunction& goal, const ParameterBox& box) {
  return std::visit(overloaded{
                        [](const ConstantGoal& g) -> Envelope {
                          const double c = std::abs(g.c);
                          return [c](std::span<const double>) { return c; };
                        },
                        [](const HolderGoal& g) -> Envelope { return g.xi1; },
                        [&](const PLGoal& g) -> Envelope {
                          PLEnvelope env = pl_envelope(g, box);
                          return [env = std::move(env)](std::span<const double> z) { return env(z); };
                        },
                    },
                    goal.kind());
}

HolderCheck check_holder_on_conjugate(const HolderGoal& goal, const ParameterBox& box, const Divergence& pair,
                                      int k, const ZSample& z_samples, std::size_t pairs, std::uint64_t seed) {
  if (k < 1) throw InvalidParameter("check_holder_on_conjugate: k must be >= 1");
  if (z_samples.size() == 0) throw InvalidParameter("check_holder_on_conjugate: no z samples");
  HolderCheck out;
  const double kk = static_cast<double>(k);
  const Envelope D = goal.D;
  const Envelope Dbar = goal.Dbar;
  const Divergence* p = &pair;
  out.Ck = [D, Dbar, p, kk](std::span<const double> z) { return (D(z) + 1.0) * p->conj_dplus(Dbar(z) + kk); };

  Rng rng(seed);
  const std::size_t m = box.dim();
  std::vector<double> t(m), s(m);
  for (std::size_t it = 0; it < pairs; ++it) {
    const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(z_samples.size()));
    const auto z = z_samples.row(std::min(j, z_samples.size() - 1));
    double dist2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      t[i] = box.lo()[i] + rng.uniform() * (box.hi()[i] - box.lo()[i]);
      s[i] = box.lo()[i] + rng.uniform() * (box.hi()[i] - box.lo()[i]);
      dist2 += (t[i] - s[i]) * (t[i] - s[i]);
    }
    const double x = kk * (2.0 * rng.uniform() - 1.0);
    const double y = kk * (2.0 * rng.uniform() - 1.0);
    dist2 += (x - y) * (x - y);
    const double a = pair.conj(goal.eval(t, z) + x);
    const double b = pair.conj(goal.eval(s, z) + y);
    const double lhs = std::abs(a - b);
    const double rhs = out.Ck(z) * std::pow(std::sqrt(dist2), goal.beta);
    const double slack = 1e-14 * (1.0 + std::abs(a) + std::abs(b));
    const double ratio = rhs > 0.0 ? lhs / rhs : (lhs > slack ? kInfinity : 0.0);
    if (ratio > out.worst_ratio) {
      out.worst_ratio = ratio;
      out.worst_theta = t;
      out.worst_vartheta = s;
      out.worst_z.assign(z.begin(), z.end());
      out.worst_x = x;
      out.worst_y = y;
    }
    if (lhs > rhs * (1.0 + 1e-9) + slack) out.passes = false;
  }
  return out;
}

bool check_a6prime(const PLGoal& goal, const ParameterBox& box, const ZSample& z_samples) {
  goal.validate();
  for (const auto& reg : goal.regions) {
    for (const auto& c : reg.conditions) {
      if (!c.closed) continue;
      const auto coef = pull_back(goal, c.L);
      double lo = -c.a;
      double hi = -c.a;
      for (std::size_t k = 0; k < goal.m; ++k) {
        lo -= std::max(coef[k] * box.lo()[k], coef[k] * box.hi()[k]);
        hi -= std::min(coef[k] * box.lo()[k], coef[k] * box.hi()[k]);
      }
      for (std::size_t j = 0; j < z_samples.size(); ++j) {
        const double v = dot(c.L, z_samples.row(j));
        if (v >= lo - 1e-12 && v <= hi + 1e-12) return false;
      }
    }
  }
  return true;
}

}  // namespace rsaa
