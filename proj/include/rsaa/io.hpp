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

// JSON / CSV loading of problems and serialization helpers.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "rsaa/distribution.hpp"
#include "rsaa/divergence.hpp"
#include "rsaa/goal.hpp"
#include "rsaa/saa.hpp"

namespace rsaa::io {

using nlohmann::json;

/// {"kind": "avar", "alpha": a} | {"kind": "entropic", "gamma": g} | {"kind": "polynomial", "p": p}
DivergenceSpec parse_divergence(const json& j);

/// {"kind": "uniform", "a", "b"} | {"kind": "truncated_normal", "mu", "sigma", "lo", "hi"}
/// | {"kind": "discrete", "atoms": [[value, prob], ...]}
AnalyticDistribution parse_marginal(const json& j);

/// A single marginal, an array of marginals, or {"marginals": [...]}.
ZDistribution parse_distribution(const json& j);

/// {"lo": [...], "hi": [...]}
ParameterBox parse_box(const json& j);

/// {"coarse_per_dim", "refine_rounds", "shrink"}; missing keys keep defaults.
GridConfig parse_grid(const json& j);

/// {"type": "constant", "c", "m"?, "d"?}
/// | {"type": "holder", "preset", "beta"?, "d"?}
/// | {"type": "pl", "m", "d", "T": [[...]], "regions": [{"Lambda", "b", "conditions": [{"L", "a", "closed"}]}]}
GoalFunction parse_goal(const json& j, const ParameterBox& box);

/// A d = 1 array of numbers or an array of rows.
ZSample parse_sample(const json& j);

/// Numeric CSV, one observation per line; '#' lines and a non-numeric first
/// line are skipped. All rows must have the same width.
ZSample read_csv_sample(const std::filesystem::path& path);

/// Replaces "*_file" / "sample_csv" references (relative to base) by their
/// contents so the returned object is self-contained.
json resolve_problem(const json& j, const std::filesystem::path& base);

/// Reads and resolves a JSON file.
json load_json_file(const std::filesystem::path& path);

/// Typed view of a resolved problem object; absent parts stay empty.
struct Problem {
  std::optional<ParameterBox> box;
  std::optional<GoalFunction> goal;
  std::optional<Divergence> pair;
  std::optional<ZSample> sample;
  std::optional<ZDistribution> distribution;
  GridConfig grid;

  const ParameterBox& need_box() const;
  const GoalFunction& need_goal() const;
  const Divergence& need_pair() const;
  const ZSample& need_sample() const;
  const ZDistribution& need_distribution() const;
};

Problem parse_problem(const json& resolved);

/// 17 significant digits.
std::string format_double(double v);

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

/// 64-bit FNV-1a of the bytes, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace rsaa::io
