/*
 * Copyright 2026 The qchannel Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef QCHANNEL_RNG_H_
#define QCHANNEL_RNG_H_

#include <cstdint>
#include <random>

namespace qchannel {

using Seed = std::uint64_t;

// Sub-stream tags. A random quantity is addressed by a path of tags and
// indices below a master seed, e.g. trial i's mask draw lives at
// derive_seed(derive_seed(master, i), kMasks). Since every consumer re-derives
// its own stream, the values never depend on evaluation order or on how work
// is split across threads.
enum class Stream : std::uint64_t {
  kExplanation = 1,
  kMasks = 2,
  kNoise = 3,
  kInner = 4,
  kInteraction = 5,
  kCalibration = 6,
  kBlocklength = 7,
  kSweepPoint = 8,
};

// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Child seed `index` of `parent`. Distinct (parent, index) pairs give
// statistically independent children.
constexpr Seed derive_seed(Seed parent, std::uint64_t index) {
  return splitmix64(splitmix64(parent) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

constexpr Seed derive_seed(Seed parent, Stream stream) {
  return derive_seed(parent, static_cast<std::uint64_t>(stream) << 56);
}

// Portable generator: std::mt19937_64 is fully specified by the standard, and
// the variate transforms below are written out so outputs are bit-identical
// across standard library implementations (std:: distributions are not).
class Rng {
 public:
  explicit Rng(Seed seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Standard normal by the Marsaglia polar method.
  double normal();

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [0, n), n >= 1, without modulo bias.
  std::uint64_t below(std::uint64_t n);

  double sign() { return (engine_() >> 63) ? 1.0 : -1.0; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace qchannel

#endif  // QCHANNEL_RNG_H_
