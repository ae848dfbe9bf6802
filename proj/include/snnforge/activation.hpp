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

#ifndef SNNFORGE_ACTIVATION_HPP_
#define SNNFORGE_ACTIVATION_HPP_

#include "snnforge/random.hpp"
#include "snnforge/tensor.hpp"

namespace snnforge {

inline constexpr float kDefaultLambdaInit = 8.0f;
inline constexpr float kMinLambda = 1e-3f;

// Per-layer parameters of the quantized activation: trainable upper bound
// `lambda`, number of quantization levels `levels`, and the standard
// deviation `delta` of the additive Gaussian noise used during training.
struct QuantActParams {
  float lambda = kDefaultLambdaInit;
  int levels = 4;
  float delta = 0.0f;

  void validate() const;
  bool operator==(const QuantActParams&) const = default;
};

Tensor relu(const Tensor& z);

// lambda * clip(floor(z * L / lambda + 0.5) / L, 0, 1), elementwise.
float qcfs(float z, const QuantActParams& p);
Tensor qcfs_forward(const Tensor& z, const QuantActParams& p);

// qcfs_forward(z) + delta * G with a fresh standard normal G per element.
// No draws are consumed when delta == 0.
Tensor nq_forward(const Tensor& z, const QuantActParams& p, RandomSource& rs);

struct ActGrad {
  Tensor grad_z;
  double grad_lambda = 0.0;
};

// Straight-through estimator: the quantizer is treated as clip(z, 0, lambda).
// d a / d z = 1 on 0 < z < lambda; d a / d lambda = 1 on z >= lambda.
ActGrad act_backward(const Tensor& z, const QuantActParams& p,
                     const Tensor& grad_out);

}  // namespace snnforge

#endif  // SNNFORGE_ACTIVATION_HPP_
