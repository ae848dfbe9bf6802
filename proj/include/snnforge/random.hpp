// Copyright 2026 The snnforge Authors
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

#ifndef SNNFORGE_RANDOM_HPP_
#define SNNFORGE_RANDOM_HPP_

#include <cstdint>
#include <initializer_list>
#include <string_view>

#include "snnforge/tensor.hpp"

namespace snnforge {

// Keyed counter-based generator. Draw n of stream (seed, stream_key) is a pure
// function of (seed, stream_key, n), so per-sample or per-layer streams can be
// consumed in any order, on any thread, with identical results.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed, std::uint64_t stream_key = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_key() const { return stream_key_; }
  std::uint64_t position() const { return counter_; }

  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n);
  // Standard normal via Box-Muller.
  double gaussian();

  Tensor gaussian(const Shape& shape);
  Tensor uniform(const Shape& shape, float lo, float hi);

  // Independent stream under the same seed.
  RandomSource substream(std::uint64_t key) const {
    return RandomSource(seed_, key);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_key_;
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t mix64(std::uint64_t x);
// Stable 64-bit key for a textual label (FNV-1a).
std::uint64_t label_key(std::string_view label);
// Combines key parts in order.
std::uint64_t derive_key(std::initializer_list<std::uint64_t> parts);

}  // namespace snnforge

#endif  // SNNFORGE_RANDOM_HPP_
