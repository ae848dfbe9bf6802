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

#ifndef SNNFORGE_NETWORK_HPP_
#define SNNFORGE_NETWORK_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "snnforge/activation.hpp"
#include "snnforge/dataset.hpp"
#include "snnforge/random.hpp"
#include "snnforge/tensor.hpp"

namespace snnforge {

enum class LayerKind { dense, conv2d, avgpool, flatten, activation };

std::string_view to_string(LayerKind kind);
LayerKind parse_layer_kind(std::string_view name);

struct LayerSpec {
  LayerKind kind = LayerKind::dense;
  // dense: weight [out x in], bias [out]. conv2d: weight [F x C x Kh x Kw],
  // bias [F].
  Tensor weight;
  Tensor bias;
  std::size_t stride = 1;
  std::size_t pad = 0;
  // avgpool window (== stride).
  std::size_t window = 2;
  QuantActParams act;

  bool parameterized() const {
    return kind == LayerKind::dense || kind == LayerKind::conv2d;
  }
  bool operator==(const LayerSpec&) const = default;

  static LayerSpec dense(Tensor weight, Tensor bias);
  static LayerSpec conv(Tensor weight, Tensor bias, std::size_t stride,
                        std::size_t pad);
  static LayerSpec avgpool(std::size_t window);
  static LayerSpec flatten();
  static LayerSpec activation(QuantActParams params);
};

struct NetworkMeta {
  std::string dataset;
  Shape input_shape;
  std::size_t class_count = 0;
  bool operator==(const NetworkMeta&) const = default;
};

// Source ANN: an ordered layer list. Between two parameterized layers sits
// exactly one activation layer; the last parameterized layer has none and
// emits raw logits.
struct NetworkDef {
  std::vector<LayerSpec> layers;
  NetworkMeta meta;

  std::vector<std::size_t> activation_indices() const;
  std::size_t activation_count() const { return activation_indices().size(); }
  // Output shape of every layer. Throws ShapeMismatch if shapes do not
  // compose.
  std::vector<Shape> infer_shapes() const;
  // Shape composition plus the activation placement rule.
  void validate() const;
  std::size_t parameter_count() const;

  bool operator==(const NetworkDef&) const = default;
};

// Applies a non-activation layer.
Tensor apply_linear(const LayerSpec& layer, const Tensor& x);

enum class Mode { train, eval };

struct ForwardTrace {
  Tensor logits;
  // Post-activation a^l and pre-activation z^l, one entry per activation
  // layer in network order.
  std::vector<Tensor> activations;
  std::vector<Tensor> preactivations;
  // Input of every layer, kept for the backward pass.
  std::vector<Tensor> layer_inputs;
};

// Train mode draws NQ noise from `rs` with each layer's delta; eval mode runs
// plain QCFS and never touches `rs`.
ForwardTrace ann_forward(const NetworkDef& net, const Tensor& x, Mode mode,
                         RandomSource& rs);
ForwardTrace ann_forward(const NetworkDef& net, const Tensor& x);

struct LayerGrad {
  Tensor weight;
  Tensor bias;
  double lambda = 0.0;
};

struct Gradients {
  std::vector<LayerGrad> layers;

  static Gradients zeros_like(const NetworkDef& net);
  void accumulate(const Gradients& other);
  void scale(float s);
};

Gradients ann_backward(const NetworkDef& net, const ForwardTrace& trace,
                       const Tensor& grad_logits);

struct LossResult {
  double loss = 0.0;
  Tensor grad_logits;
};

// Softmax cross-entropy; grad = softmax(logits) - onehot(label).
LossResult cross_entropy_loss(const Tensor& logits, std::size_t label);

// SGD with classical momentum:
//   buf <- momentum * buf + (g + wd * w);  w <- w - lr * buf
// Lambdas get no weight decay and are clamped to >= kMinLambda.
class SgdOptimizer {
 public:
  explicit SgdOptimizer(const NetworkDef& net);
  void step(NetworkDef& net, const Gradients& grads, float lr, float momentum,
            float weight_decay);

 private:
  Gradients velocity_;
};

struct TrainConfig {
  float lr0 = 0.1f;
  int epochs = 30;
  float weight_decay = 5e-4f;
  float momentum = 0.9f;
  std::size_t batch_size = 64;
  int levels = 4;
  int tau = 4;
  std::uint64_t seed = 1;
  double val_fraction = 0.05;
  float lambda_init = kDefaultLambdaInit;

  void validate() const;
};

// lr0 * 0.5 * (1 + cos(pi * epoch / epochs)) for 0 <= epoch < epochs.
double cosine_lr(int epoch, const TrainConfig& cfg);

struct EpochStats {
  double loss = 0.0;
  double accuracy = 0.0;
};

// One shuffled pass over `data` (shuffle keyed by (seed, epoch)), mini-batch
// SGD at cosine_lr(epoch). Per-sample noise streams are keyed by
// (seed, epoch, sample index).
EpochStats train_epoch(NetworkDef& net, SgdOptimizer& opt, const Dataset& data,
                       const TrainConfig& cfg, int epoch);

// Eval-mode classification accuracy in [0, 1].
double evaluate_ann(const NetworkDef& net, const Dataset& data);

// Builds and Kaiming-uniform initializes an architecture:
//   "mlp-H1-H2-..."      dense hidden layers (no hidden layer: "mlp")
//   "cnn-C1-C2-...[-dH]" 3x3 same-padded conv + activation + 2x2 avgpool per
//                         stage, optional dense hidden layer H, dense output
NetworkDef build_network(std::string_view arch, const Shape& input_shape,
                         std::size_t class_count, const QuantActParams& act,
                         std::uint64_t seed);

}  // namespace snnforge

#endif  // SNNFORGE_NETWORK_HPP_
