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

#include "snnforge/activation.hpp"

#include <algorithm>
#include <cmath>

#include "snnforge/error.hpp"

namespace snnforge {

void QuantActParams::validate() const {
  if (!(lambda > 0.0f) || !std::isfinite(lambda)) {
    throw InvalidArgument("activation lambda must be positive and finite");
  }
  if (levels < 1) throw InvalidArgument("activation L must be >= 1");
  if (!(delta >= 0.0f) || !std::isfinite(delta)) {
    throw InvalidArgument("activation delta must be nonnegative and finite");
  }
}

Tensor relu(const Tensor& z) {
  check_finite(z, "relu input");
  Tensor a = z;
  for (float& v : a.data()) v = std::max(v, 0.0f);
  return a;
}

float qcfs(float z, const QuantActParams& p) {
  const float levels = static_cast<float>(p.levels);
  const float step = std::floor(z * levels / p.lambda + 0.5f) / levels;
  return p.lambda * std::clamp(step, 0.0f, 1.0f);
}

Tensor qcfs_forward(const Tensor& z, const QuantActParams& p) {
  p.validate();
  check_finite(z, "qcfs input");
  Tensor a = z;
  for (float& v : a.data()) v = qcfs(v, p);
  return a;
}

Tensor nq_forward(const Tensor& z, const QuantActParams& p, RandomSource& rs) {
  Tensor a = qcfs_forward(z, p);
  if (p.delta == 0.0f) return a;
  for (float& v : a.data()) {
    v += p.delta * static_cast<float>(rs.gaussian());
  }
  return a;
}

ActGrad act_backward(const Tensor& z, const QuantActParams& p,
                     const Tensor& grad_out) {
  if (z.shape() != grad_out.shape()) {
    throw ShapeMismatch("act_backward " + shape_string(z.shape()) + " vs " +
                        shape_string(grad_out.shape()));
  }
  ActGrad g{Tensor(z.shape()), 0.0};
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i] > 0.0f && z[i] < p.lambda) {
      g.grad_z[i] = grad_out[i];
    } else if (z[i] >= p.lambda) {
      g.grad_lambda += grad_out[i];
    }
  }
  return g;
}

}  // namespace snnforge
