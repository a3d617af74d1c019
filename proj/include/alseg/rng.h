// Copyright 2026 The Authors.
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

#ifndef ALSEG_RNG_H_
#define ALSEG_RNG_H_

#include <cstdint>
#include <string_view>

namespace alseg {

// SplitMix64 (Steele, Lea & Flood 2014). Every random draw in the library
// goes through this generator so that output is bit-reproducible across
// compilers and standard libraries; std::*_distribution is not.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t NextU64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double Uniform() { return static_cast<double>(NextU64() >> 11) * 0x1.0p-53; }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Uniform integer in [0, n). Rejection sampling, no modulo bias.
  uint64_t Below(uint64_t n);

  // Standard normal via Box-Muller; the spare value is cached.
  double Normal();

  // Independent child stream. The same (parent seed, tag) always yields the
  // same child, regardless of how many draws the parent has made.
  Rng Split(std::string_view tag) const;

  uint64_t seed() const { return seed_; }

 private:
  Rng(uint64_t seed, uint64_t origin) : state_(seed), seed_(origin) {}

  uint64_t state_;
  uint64_t seed_ = state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Mixes a seed with a stream tag. Used to derive the documented per-run
// streams ("train", "acquire", "init", ...) from one run seed.
uint64_t DeriveSeed(uint64_t seed, std::string_view tag);

}  // namespace alseg

#endif  // ALSEG_RNG_H_
