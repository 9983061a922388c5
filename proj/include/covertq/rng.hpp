// Copyright 2026 The covertq Authors
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

#ifndef COVERTQ__RNG_HPP_
#define COVERTQ__RNG_HPP_

#include <cstdint>
#include <initializer_list>

namespace covertq
{

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based generator: every draw is a pure function of the seed and a
/// tuple of counters, h <- splitmix64(h ^ c) folded over the tuple. Draws are
/// independent of evaluation order, so sampling can be split across threads
/// without changing results.
class CounterRng
{
public:
  explicit constexpr CounterRng(std::uint64_t seed)
  : key_(splitmix64(seed)) {}

  constexpr std::uint64_t bits(std::initializer_list<std::uint64_t> counters) const
  {
    std::uint64_t h = key_;
    for (std::uint64_t c : counters) {
      h = splitmix64(h ^ c);
    }
    return h;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform(std::initializer_list<std::uint64_t> counters) const
  {
    return static_cast<double>(bits(counters) >> 11) * 0x1.0p-53;
  }

private:
  std::uint64_t key_;
};

}  // namespace covertq

#endif  // COVERTQ__RNG_HPP_
