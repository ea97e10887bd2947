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

#include "rsaa/kernels.hpp"

namespace rsaa::kernels {
namespace {

double conj_sum_scalar(const ConjParams& c, const double* y, std::size_t n, double shift) {
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) acc += conj(c, y[j] + shift);
  return acc;
}

double conj_wsum_scalar(const ConjParams& c, const double* y, const double* w, std::size_t n,
                        double shift) {
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) acc += w[j] * conj(c, y[j] + shift);
  return acc;
}

DerivSums deriv_sum_scalar(const ConjParams& c, const double* y, std::size_t n, double shift) {
  DerivSums s;
  for (std::size_t j = 0; j < n; ++j) {
    const double t = y[j] + shift;
    s.minus += conj_dminus(c, t);
    s.plus += conj_dplus(c, t);
  }
  return s;
}

DerivSums deriv_wsum_scalar(const ConjParams& c, const double* y, const double* w, std::size_t n,
                            double shift) {
  DerivSums s;
  for (std::size_t j = 0; j < n; ++j) {
    const double t = y[j] + shift;
    s.minus += w[j] * conj_dminus(c, t);
    s.plus += w[j] * conj_dplus(c, t);
  }
  return s;
}

constexpr KernelTable kScalar{"scalar", conj_sum_scalar, conj_wsum_scalar, deriv_sum_scalar,
                              deriv_wsum_scalar};

}  // namespace

const KernelTable& scalar_kernels() noexcept { return kScalar; }

}  // namespace rsaa::kernels
