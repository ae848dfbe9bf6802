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

#include "snnforge/random.hpp"

#include <cmath>
#include <numbers>

namespace snnforge {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t label_key(std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t derive_key(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x243F6A8885A308D3ull;
  for (std::uint64_t p : parts) h = mix64(h ^ mix64(p));
  return h;
}

RandomSource::RandomSource(std::uint64_t seed, std::uint64_t stream_key)
    : seed_(seed),
      stream_key_(stream_key),
      base_(mix64(mix64(seed) ^ mix64(stream_key ^ 0xD1B54A32D192ED03ull))) {}

std::uint64_t RandomSource::next_u64() {
  return mix64(base_ + 0x9E3779B97F4A7C15ull * counter_++);
}

double RandomSource::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RandomSource::uniform_index(std::uint64_t n) {
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t limit = (~0ull) - (~0ull) % n;
  std::uint64_t r;
  do {
    r = next_u64();
  } while (r >= limit);
  return r % n;
}

double RandomSource::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(angle);
  has_spare_ = true;
  return r * std::cos(angle);
}

Tensor RandomSource::gaussian(const Shape& shape) {
  Tensor t(shape);
  for (float& v : t.data()) v = static_cast<float>(gaussian());
  return t;
}

Tensor RandomSource::uniform(const Shape& shape, float lo, float hi) {
  Tensor t(shape);
  for (float& v : t.data()) v = static_cast<float>(uniform(lo, hi));
  return t;
}

}  // namespace snnforge
