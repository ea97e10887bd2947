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

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

#include "rsaa/distribution.hpp"

namespace rsaa {

/// Recorded in every report so results can be matched to the generator.
inline constexpr std::string_view kRngVersion =
    "rsaa-rng-1: splitmix64(master, index) -> mt19937_64, 53-bit open uniforms, inverse transform";

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Independent stream seed for replication `index` under `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0,1).
  double uniform() noexcept {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  std::uint64_t next() noexcept { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// n i.i.d. draws of Z by inverse transform, one uniform per coordinate.
ZSample draw_sample(const ZDistribution& dist, std::size_t n, Rng& rng);

}  // namespace rsaa
