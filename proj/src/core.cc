// Copyright 2026 The poolsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "poolsim/core.h"

#include <cmath>

namespace poolsim {

double AllocationRatio(std::uint64_t allocated_count, std::uint64_t pool_size) {
  if (pool_size == 0) throw ContractViolation("allocation ratio of empty pool");
  if (allocated_count > pool_size) {
    throw ContractViolation("more IPs allocated than the pool holds");
  }
  return static_cast<double>(allocated_count) / static_cast<double>(pool_size);
}

std::uint64_t DerivePoolSize(std::uint64_t peak_demand, double ar_max) {
  if (!(ar_max > 0.0 && ar_max <= 1.0)) {
    throw std::invalid_argument("ar_max must be in (0, 1]");
  }
  if (peak_demand == 0) return 1;
  auto size = static_cast<std::uint64_t>(
      std::ceil(static_cast<double>(peak_demand) / ar_max));
  // Correct for rounding in the division either way.
  auto ratio = [&](std::uint64_t n) {
    return static_cast<double>(peak_demand) / static_cast<double>(n);
  };
  while (size > peak_demand && ratio(size - 1) <= ar_max) --size;
  while (ratio(size) > ar_max) ++size;
  return size;
}

}  // namespace poolsim
