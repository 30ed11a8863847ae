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

#ifndef POOLSIM_RNG_H_
#define POOLSIM_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace poolsim {

// Seedable, splittable generator. Each consumer (an agent, the policy, a
// sweep point) takes its own stream derived from the run seed, so adding a
// consumer never perturbs the draws another one sees.
class Rng {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit Rng(std::uint64_t seed) : engine_(Mix(seed)), seed_(Mix(seed)) {}

  // Independent stream keyed by name.
  Rng Split(std::string_view stream) const {
    return Rng(Mix(base_seed() ^ HashName(stream)));
  }
  // Independent stream keyed by an integer, e.g. a sweep point index.
  Rng Split(std::uint64_t stream) const {
    return Rng(Mix(base_seed() + 0x9e3779b97f4a7c15ULL * (stream + 1)));
  }

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  // Uniform on [0, 1).
  double Uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
  }
  // Uniform on (0, 1]; safe to take the log of.
  double UniformOpenClosed() { return 1.0 - Uniform(); }
  // Uniform on [lo, hi).
  double Uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  // Uniform integer on [0, n). n must be positive.
  std::uint64_t Below(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
  }
  bool Bernoulli(double p) { return Uniform() < p; }

  static std::uint64_t Mix(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

 private:
  std::uint64_t base_seed() const { return seed_; }

  static std::uint64_t HashName(std::string_view name) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : name) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    return h;
  }

  std::mt19937_64 engine_;
  std::uint64_t seed_ = 0;
};

}  // namespace poolsim

#endif  // POOLSIM_RNG_H_
