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

#include "snnforge/dataset.hpp"

#include <cmath>

#include "snnforge/error.hpp"
#include "snnforge/random.hpp"

namespace snnforge {

void Dataset::validate() const {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].label >= class_count) {
      throw FormatError("sample " + std::to_string(i) + " label " +
                        std::to_string(samples[i].label) + " outside [0, " +
                        std::to_string(class_count) + ")");
    }
    if (samples[i].x.shape() != input_shape) {
      throw FormatError("sample " + std::to_string(i) + " has shape " +
                        shape_string(samples[i].x.shape()) + ", expected " +
                        shape_string(input_shape));
    }
  }
}

std::vector<std::size_t> Dataset::class_histogram() const {
  std::vector<std::size_t> counts(class_count, 0);
  for (const Sample& s : samples) ++counts.at(s.label);
  return counts;
}

std::pair<Dataset, Dataset> stratified_split(const Dataset& data,
                                             double fraction,
                                             std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw InvalidArgument("split fraction must lie in (0, 1)");
  }
  std::vector<std::vector<std::size_t>> by_class(data.class_count);
  for (std::size_t i = 0; i < data.size(); ++i) {
    by_class.at(data.samples[i].label).push_back(i);
  }
  std::vector<bool> held_out(data.size(), false);
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& idx = by_class[c];
    if (idx.empty()) continue;
    if (idx.size() < 2) {
      throw EmptyClass("class " + std::to_string(c) + " has " +
                       std::to_string(idx.size()) + " sample(s); need >= 2");
    }
    RandomSource rs(seed, derive_key({label_key("stratified-split"), c}));
    for (std::size_t i = idx.size() - 1; i > 0; --i) {
      std::swap(idx[i], idx[rs.uniform_index(i + 1)]);
    }
    std::size_t take = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(idx.size())));
    take = std::clamp<std::size_t>(take, 1, idx.size() - 1);
    for (std::size_t k = 0; k < take; ++k) held_out[idx[k]] = true;
  }
  Dataset kept{{}, data.class_count, data.input_shape, data.provenance};
  Dataset split{{}, data.class_count, data.input_shape, data.provenance};
  for (std::size_t i = 0; i < data.size(); ++i) {
    (held_out[i] ? split : kept).samples.push_back(data.samples[i]);
  }
  return {std::move(kept), std::move(split)};
}

}  // namespace snnforge
