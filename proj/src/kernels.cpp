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

#include <cstdlib>
#include <string_view>

#include "rsaa/kernels.hpp"

namespace rsaa::kernels {

#ifdef RSAA_HAVE_AVX2
extern const KernelTable kAvx2Table;
#endif

const KernelTable* avx2_kernels() noexcept {
#ifdef RSAA_HAVE_AVX2
  static const bool supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  return supported ? &kAvx2Table : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active_kernels() noexcept {
  static const KernelTable* table = [] {
    const char* env = std::getenv("RSAA_KERNELS");
    if (env != nullptr && std::string_view(env) == "scalar") return &scalar_kernels();
    if (const KernelTable* t = avx2_kernels()) return t;
    return &scalar_kernels();
  }();
  return *table;
}

double conj_sum(const ConjParams& c, std::span<const double> y, double shift) noexcept {
  return active_kernels().conj_sum(c, y.data(), y.size(), shift);
}

double conj_wsum(const ConjParams& c, std::span<const double> y, std::span<const double> w,
                 double shift) noexcept {
  return active_kernels().conj_wsum(c, y.data(), w.data(), y.size(), shift);
}

DerivSums deriv_sum(const ConjParams& c, std::span<const double> y, double shift) noexcept {
  return active_kernels().deriv_sum(c, y.data(), y.size(), shift);
}

DerivSums deriv_wsum(const ConjParams& c, std::span<const double> y, std::span<const double> w,
                     double shift) noexcept {
  return active_kernels().deriv_wsum(c, y.data(), w.data(), y.size(), shift);
}

}  // namespace rsaa::kernels
