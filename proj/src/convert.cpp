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

#include "snnforge/convert.hpp"

#include <cmath>

#include "snnforge/error.hpp"

namespace snnforge {

SpikingNetwork convert(const NetworkDef& ann) {
  for (std::size_t i = 0; i < ann.layers.size(); ++i) {
    const LayerSpec& l = ann.layers[i];
    if (l.kind == LayerKind::activation &&
        !(l.act.lambda > 0.0f && std::isfinite(l.act.lambda))) {
      throw UnfinalizedParams("activation layer " + std::to_string(i) +
                              " has lambda " + std::to_string(l.act.lambda));
    }
  }
  ann.validate();

  SpikingNetwork snn;
  snn.meta = ann.meta;
  for (const LayerSpec& l : ann.layers) {
    SnnLayer s;
    if (l.kind == LayerKind::activation) {
      s.kind = SnnLayer::Kind::integrate_fire;
      s.theta = l.act.lambda;
    } else {
      s.kind = SnnLayer::Kind::linear;
      s.linear = l;
    }
    snn.layers.push_back(std::move(s));
  }
  snn.reset();
  return snn;
}

}  // namespace snnforge
