// Copyright 2026 The socdil Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SOCDIL_RNG_H_
#define SOCDIL_RNG_H_

#include <cstdint>
#include <random>

namespace socdil {

// Bijective 64-bit finalizer from SplitMix64.
std::uint64_t MixBits(std::uint64_t x);

// Stream tags keep seeds derived for different purposes apart.
enum class SeedTag : std::uint64_t {
  kEnvironment = 0x656e76,
  kAction = 0x616374,
  kRound = 0x726e64,
  kStep = 0x737470,
  kOpponent = 0x6f7070,
  kEvaluation = 0x6576616c,
  kPair = 0x70616972,
};

// Seed number `index` of the stream (base, tag). For a fixed (base, tag)
// distinct indices give distinct seeds: the index is folded in with an odd
// multiplier before a bijective mix.
std::uint64_t DeriveSeed(std::uint64_t base, SeedTag tag, std::uint64_t index);

// Thin wrapper over mt19937_64 with platform-independent conversions
// (std::uniform_*_distribution output differs across standard libraries).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t NextU64() { return engine_(); }
  // Uniform in [0, 1) with 53 bits of precision.
  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // Uniform integer in [0, n).
  int UniformInt(int n);
  bool Bernoulli(double p) { return Uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace socdil

#endif  // SOCDIL_RNG_H_
