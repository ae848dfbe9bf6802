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

#ifndef SNNFORGE_CONVERT_HPP_
#define SNNFORGE_CONVERT_HPP_

#include "snnforge/network.hpp"
#include "snnforge/snn.hpp"

namespace snnforge {

// Copies weights and biases unchanged, sets theta^l = lambda^l, discards
// delta and L, and resets the result so v(0) = theta / 2. Throws
// UnfinalizedParams if any lambda is not positive.
SpikingNetwork convert(const NetworkDef& ann);

}  // namespace snnforge

#endif  // SNNFORGE_CONVERT_HPP_
