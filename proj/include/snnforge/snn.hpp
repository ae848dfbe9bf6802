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

#ifndef SNNFORGE_SNN_HPP_
#define SNNFORGE_SNN_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "snnforge/network.hpp"
#include "snnforge/tensor.hpp"

namespace snnforge {

// Membrane state of one integrate-and-fire layer.
struct IFLayerState {
  Tensor v;
  float theta = 1.0f;
  std::vector<std::uint32_t> spike_count;

  IFLayerState() = default;
  IFLayerState(const Shape& shape, float theta, float v0);
};

// Charge, fire, reset by subtraction:
//   u = v + I;  s = [u >= theta];  v <- u - s * theta;  count += s.
// Returns s as a 0/1 tensor.
Tensor if_step(IFLayerState& state, const Tensor& input_current);

// Running sum of x(t) = s(t) * theta for one layer.
class PhiRecord {
 public:
  PhiRecord() = default;
  explicit PhiRecord(const Shape& shape) : sum_(shape) {}

  void record(const Tensor& spikes, float theta);
  int steps() const { return steps_; }
  // phi(T) = sum / T.
  Tensor phi() const;

 private:
  Tensor sum_;
  int steps_ = 0;
};

struct SnnLayer {
  enum class Kind { linear, integrate_fire };
  Kind kind = Kind::linear;
  // dense / conv2d / avgpool / flatten when kind == linear.
  LayerSpec linear;
  // Firing threshold when kind == integrate_fire.
  float theta = 0.0f;

  bool operator==(const SnnLayer&) const = default;
};

// Converted network. Layers after the last integrate-and-fire layer form a
// non-spiking readout whose time-averaged output is the logit vector. Biases
// enter as a constant current every step.
class SpikingNetwork {
 public:
  std::vector<SnnLayer> layers;
  NetworkMeta meta;

  // Allocates state and sets v(0) = theta / 2 and zero spike counts.
  void reset();
  std::vector<std::size_t> if_indices() const;
  std::size_t if_count() const { return if_indices().size(); }
  float theta(std::size_t if_layer) const;
  std::vector<IFLayerState>& states() { return states_; }
  const std::vector<IFLayerState>& states() const { return states_; }

  // Runs the linear layers feeding integrate-and-fire layer `if_layer`
  // (or the readout when if_layer == if_count()) on `input`.
  Tensor apply_segment(std::size_t if_layer, const Tensor& input) const;

  // Structural equality; membrane state is ignored.
  bool same_definition(const SpikingNetwork& other) const {
    return layers == other.layers && meta == other.meta;
  }

 private:
  std::vector<IFLayerState> states_;
};

struct SnnTrace {
  Tensor mean_logits;
  // phi^l(T), v^l(T) and v^l(0) per integrate-and-fire layer.
  std::vector<Tensor> phi;
  std::vector<Tensor> v_final;
  std::vector<Tensor> v_initial;
  std::vector<std::vector<std::uint32_t>> spike_counts;
  int steps = 0;
};

// Resets `net`, then simulates T layer-synchronous steps with `x` injected
// as a constant current into the first layer every step.
SnnTrace snn_forward(SpikingNetwork& net, const Tensor& x, int T);

// W^l phi^{l-1}(T) - (v^l(T) - v^l(0)) / T - phi^l(T) per integrate-and-fire
// layer, with W^l phi^{l-1} recomputed from the recorded phi of the previous
// layer (or the input). Zero up to float rounding.
std::vector<Tensor> eq5_audit(const SpikingNetwork& net, const Tensor& x,
                              const SnnTrace& trace);
std::vector<Tensor> eq5_audit(SpikingNetwork& net, const Tensor& x, int T);

// theta * clip(floor((z_hat * T + v0) / theta) / T, 0, 1), elementwise.
Tensor theoretical_phi(const Tensor& z_hat, float theta, float v0, int T);

// SNN classification accuracy at T steps, argmax over mean logits.
double evaluate_snn(const SpikingNetwork& net, const Dataset& data, int T);

}  // namespace snnforge

#endif  // SNNFORGE_SNN_HPP_
