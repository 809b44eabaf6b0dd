/*
 * Copyright 2026 The absa-annotator Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ABSA_RANDOM_H_
#define ABSA_RANDOM_H_

#include <cstdint>

namespace absa {

// SplitMix64, used only to expand seeds into xoshiro state.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}
  std::uint64_t Next();

 private:
  std::uint64_t state_;
};

// xoshiro256** 1.0. Every random draw in the toolkit goes through this
// generator so that seeded runs match across platforms and compilers
// (std::uniform_int_distribution is implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  // Independent stream for (seed, stream), e.g. one per example.
  Rng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t Next();

  // Uniform integer in [0, bound). Unbiased: rejects the low
  // (2^64 mod bound) outputs. bound must be > 0.
  std::uint64_t Below(std::uint64_t bound);

 private:
  std::uint64_t s_[4];
};

}  // namespace absa

#endif  // ABSA_RANDOM_H_
