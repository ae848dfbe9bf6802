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

#include "snnforge/snn.hpp"

#include <algorithm>
#include <cmath>

#include "snnforge/error.hpp"
#include "snnforge/parallel.hpp"

namespace snnforge {

IFLayerState::IFLayerState(const Shape& shape, float theta_, float v0)
    : v(shape, v0), theta(theta_), spike_count(shape_size(shape), 0) {}

Tensor if_step(IFLayerState& state, const Tensor& input_current) {
  if (input_current.shape() != state.v.shape()) {
    throw ShapeMismatch("if_step current " + shape_string(input_current.shape()) +
                        " vs state " + shape_string(state.v.shape()));
  }
  check_finite(input_current, "if_step input");
  Tensor spikes(state.v.shape());
  for (std::size_t i = 0; i < spikes.size(); ++i) {
    const float u = state.v[i] + input_current[i];
    if (u >= state.theta) {
      spikes[i] = 1.0f;
      state.v[i] = u - state.theta;
      ++state.spike_count[i];
    } else {
      state.v[i] = u;
    }
  }
  check_finite(state.v, "if_step membrane");
  return spikes;
}

void PhiRecord::record(const Tensor& spikes, float theta) {
  for (std::size_t i = 0; i < sum_.size(); ++i) sum_[i] += spikes[i] * theta;
  ++steps_;
}

Tensor PhiRecord::phi() const {
  if (steps_ == 0) return sum_;
  Tensor p = sum_;
  const float t = static_cast<float>(steps_);
  for (float& v : p.data()) v /= t;
  return p;
}

std::vector<std::size_t> SpikingNetwork::if_indices() const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].kind == SnnLayer::Kind::integrate_fire) idx.push_back(i);
  }
  return idx;
}

float SpikingNetwork::theta(std::size_t if_layer) const {
  return layers.at(if_indices().at(if_layer)).theta;
}

void SpikingNetwork::reset() {
  states_.clear();
  Shape cur = meta.input_shape;
  for (const SnnLayer& l : layers) {
    if (l.kind == SnnLayer::Kind::integrate_fire) {
      states_.emplace_back(cur, l.theta, l.theta / 2.0f);
    } else {
      // Shape propagation only; values are irrelevant.
      cur = apply_linear(l.linear, Tensor(cur)).shape();
    }
  }
}

Tensor SpikingNetwork::apply_segment(std::size_t if_layer, const Tensor& input) const {
  const std::vector<std::size_t> ifs = if_indices();
  if (if_layer > ifs.size()) throw MissingLayer("segment " + std::to_string(if_layer));
  const std::size_t begin = if_layer == 0 ? 0 : ifs[if_layer - 1] + 1;
  const std::size_t end = if_layer == ifs.size() ? layers.size() : ifs[if_layer];
  Tensor cur = input;
  for (std::size_t i = begin; i < end; ++i) cur = apply_linear(layers[i].linear, cur);
  return cur;
}

SnnTrace snn_forward(SpikingNetwork& net, const Tensor& x, int T) {
  if (T < 1) throw InvalidArgument("T must be >= 1");
  if (x.shape() != net.meta.input_shape) {
    throw ShapeMismatch("input " + shape_string(x.shape()) + " vs network input " +
                        shape_string(net.meta.input_shape));
  }
  net.reset();
  std::vector<IFLayerState>& states = net.states();
  SnnTrace trace;
  trace.steps = T;
  std::vector<PhiRecord> records;
  for (const IFLayerState& s : states) {
    trace.v_initial.push_back(s.v);
    records.emplace_back(s.v.shape());
  }
  Tensor out_sum;
  for (int t = 0; t < T; ++t) {
    Tensor signal = x;
    std::size_t k = 0;
    for (const SnnLayer& layer : net.layers) {
      if (layer.kind == SnnLayer::Kind::linear) {
        signal = apply_linear(layer.linear, signal);
      } else {
        Tensor spikes = if_step(states[k], signal);
        records[k].record(spikes, layer.theta);
        signal = scale(spikes, layer.theta);
        ++k;
      }
    }
    add_inplace(out_sum, signal);
  }
  trace.mean_logits = scale(out_sum, 1.0f / static_cast<float>(T));
  for (std::size_t k = 0; k < states.size(); ++k) {
    trace.phi.push_back(records[k].phi());
    trace.v_final.push_back(states[k].v);
    trace.spike_counts.push_back(states[k].spike_count);
  }
  return trace;
}

std::vector<Tensor> eq5_audit(const SpikingNetwork& net, const Tensor& x,
                              const SnnTrace& trace) {
  std::vector<Tensor> residuals;
  const float T = static_cast<float>(trace.steps);
  for (std::size_t k = 0; k < trace.phi.size(); ++k) {
    const Tensor& prev = k == 0 ? x : trace.phi[k - 1];
    const Tensor drive = net.apply_segment(k, prev);
    Tensor r(drive.shape());
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double dv = (static_cast<double>(trace.v_final[k][i]) - trace.v_initial[k][i]) / T;
      r[i] = static_cast<float>(static_cast<double>(drive[i]) - dv - trace.phi[k][i]);
    }
    residuals.push_back(std::move(r));
  }
  return residuals;
}

std::vector<Tensor> eq5_audit(SpikingNetwork& net, const Tensor& x, int T) {
  const SnnTrace trace = snn_forward(net, x, T);
  return eq5_audit(net, x, trace);
}

Tensor theoretical_phi(const Tensor& z_hat, float theta, float v0, int T) {
  if (T < 1) throw InvalidArgument("T must be >= 1");
  Tensor out = z_hat;
  const float t = static_cast<float>(T);
  for (float& v : out.data()) {
    const float k = std::floor((v * t + v0) / theta) / t;
    v = theta * std::clamp(k, 0.0f, 1.0f);
  }
  return out;
}

double evaluate_snn(const SpikingNetwork& net, const Dataset& data, int T) {
  if (data.empty()) return 0.0;
  std::vector<char> hit(data.size(), 0);
  parallel_chunks(data.size(), [&](std::size_t, std::size_t begin, std::size_t end) {
    SpikingNetwork local = net;
    for (std::size_t i = begin; i < end; ++i) {
      hit[i] = argmax(snn_forward(local, data.samples[i].x, T).mean_logits) ==
               data.samples[i].label;
    }
  });
  std::size_t correct = 0;
  for (char h : hit) correct += h;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace snnforge
