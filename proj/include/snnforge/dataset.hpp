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

#ifndef SNNFORGE_DATASET_HPP_
#define SNNFORGE_DATASET_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "snnforge/tensor.hpp"

namespace snnforge {

struct Sample {
  Tensor x;
  std::size_t label = 0;
};

// In-memory labelled dataset. `provenance` is one of "idx", "csv" or
// "synthetic:<name>:<seed>", possibly with a split suffix.
struct Dataset {
  std::vector<Sample> samples;
  std::size_t class_count = 0;
  Shape input_shape;
  std::string provenance;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  // Throws FormatError if a label is out of range or a sample has the wrong
  // shape.
  void validate() const;
  std::vector<std::size_t> class_histogram() const;
};

// Deterministic stratified split keyed by seed: within every class, a
// seeded shuffle puts round(fraction * class_size) samples (at least one) in
// the second part. Throws EmptyClass when a class has fewer than 2 samples.
std::pair<Dataset, Dataset> stratified_split(const Dataset& data,
                                             double fraction,
                                             std::uint64_t seed);

}  // namespace snnforge

#endif  // SNNFORGE_DATASET_HPP_
