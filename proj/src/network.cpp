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

#include "snnforge/network.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

#include "snnforge/error.hpp"
#include "snnforge/parallel.hpp"

namespace snnforge {

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::dense: return "dense";
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::avgpool: return "avgpool";
    case LayerKind::flatten: return "flatten";
    case LayerKind::activation: return "activation";
  }
  return "unknown";
}

LayerKind parse_layer_kind(std::string_view name) {
  for (LayerKind k : {LayerKind::dense, LayerKind::conv2d, LayerKind::avgpool,
                      LayerKind::flatten, LayerKind::activation}) {
    if (to_string(k) == name) return k;
  }
  throw FormatError("unknown layer kind '" + std::string(name) + "'");
}

LayerSpec LayerSpec::dense(Tensor weight, Tensor bias) {
  LayerSpec l;
  l.kind = LayerKind::dense;
  l.weight = std::move(weight);
  l.bias = std::move(bias);
  return l;
}

LayerSpec LayerSpec::conv(Tensor weight, Tensor bias, std::size_t stride,
                          std::size_t pad) {
  LayerSpec l;
  l.kind = LayerKind::conv2d;
  l.weight = std::move(weight);
  l.bias = std::move(bias);
  l.stride = stride;
  l.pad = pad;
  return l;
}

LayerSpec LayerSpec::avgpool(std::size_t window) {
  LayerSpec l;
  l.kind = LayerKind::avgpool;
  l.window = window;
  return l;
}

LayerSpec LayerSpec::flatten() {
  LayerSpec l;
  l.kind = LayerKind::flatten;
  return l;
}

LayerSpec LayerSpec::activation(QuantActParams params) {
  LayerSpec l;
  l.kind = LayerKind::activation;
  l.act = params;
  return l;
}

std::vector<std::size_t> NetworkDef::activation_indices() const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].kind == LayerKind::activation) idx.push_back(i);
  }
  return idx;
}

std::vector<Shape> NetworkDef::infer_shapes() const {
  std::vector<Shape> shapes;
  Shape cur = meta.input_shape;
  if (cur.empty()) throw ShapeMismatch("network has no input shape");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& l = layers[i];
    const std::string where = "layer " + std::to_string(i) + " (" +
                              std::string(to_string(l.kind)) + ")";
    switch (l.kind) {
      case LayerKind::dense:
        if (l.weight.rank() != 2 || l.weight.dim(1) != shape_size(cur) ||
            (!l.bias.empty() && l.bias.size() != l.weight.dim(0))) {
          throw ShapeMismatch(where + ": weight " + shape_string(l.weight.shape()) +
                              " does not accept input " + shape_string(cur));
        }
        cur = {l.weight.dim(0)};
        break;
      case LayerKind::conv2d: {
        if (cur.size() != 3 || l.weight.rank() != 4 || l.weight.dim(1) != cur[0] ||
            (!l.bias.empty() && l.bias.size() != l.weight.dim(0))) {
          throw ShapeMismatch(where + ": kernel " + shape_string(l.weight.shape()) +
                              " does not accept input " + shape_string(cur));
        }
        const std::size_t oh = conv_out_extent(cur[1], l.weight.dim(2), l.stride, l.pad);
        const std::size_t ow = conv_out_extent(cur[2], l.weight.dim(3), l.stride, l.pad);
        cur = {l.weight.dim(0), oh, ow};
        break;
      }
      case LayerKind::avgpool:
        if (cur.size() != 3 || l.window < 1 || cur[1] % l.window || cur[2] % l.window) {
          throw ShapeMismatch(where + ": window " + std::to_string(l.window) +
                              " does not tile " + shape_string(cur));
        }
        cur = {cur[0], cur[1] / l.window, cur[2] / l.window};
        break;
      case LayerKind::flatten:
        cur = {shape_size(cur)};
        break;
      case LayerKind::activation:
        l.act.validate();
        break;
    }
    shapes.push_back(cur);
  }
  return shapes;
}

void NetworkDef::validate() const {
  const std::vector<Shape> shapes = infer_shapes();
  std::size_t last_param = layers.size();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].parameterized()) last_param = i;
  }
  if (last_param == layers.size()) {
    throw InvalidArgument("network has no parameterized layer");
  }
  bool seen_param = false;
  std::size_t acts_since_param = 0;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& l = layers[i];
    if (l.parameterized()) {
      if (seen_param && acts_since_param != 1) {
        throw InvalidArgument("layer " + std::to_string(i) +
                              ": expected exactly one activation before it");
      }
      seen_param = true;
      acts_since_param = 0;
    } else if (l.kind == LayerKind::activation) {
      if (!seen_param || i > last_param) {
        throw InvalidArgument("layer " + std::to_string(i) +
                              ": activation must sit between parameterized layers");
      }
      ++acts_since_param;
    }
  }
  if (meta.class_count && shape_size(shapes.back()) != meta.class_count) {
    throw ShapeMismatch("network emits " + shape_string(shapes.back()) +
                        " logits for " + std::to_string(meta.class_count) +
                        " classes");
  }
}

std::size_t NetworkDef::parameter_count() const {
  std::size_t n = 0;
  for (const LayerSpec& l : layers) {
    n += l.weight.size() + l.bias.size();
    if (l.kind == LayerKind::activation) ++n;
  }
  return n;
}

Tensor apply_linear(const LayerSpec& layer, const Tensor& x) {
  switch (layer.kind) {
    case LayerKind::dense:
      return affine(layer.weight, x, layer.bias);
    case LayerKind::conv2d:
      return conv2d(x, layer.weight, layer.stride, layer.pad, layer.bias);
    case LayerKind::avgpool:
      return avgpool2d(x, layer.window);
    case LayerKind::flatten:
      return x.reshaped({x.size()});
    case LayerKind::activation:
      break;
  }
  throw InvalidArgument("apply_linear called on an activation layer");
}

ForwardTrace ann_forward(const NetworkDef& net, const Tensor& x, Mode mode,
                         RandomSource& rs) {
  if (x.shape() != net.meta.input_shape) {
    throw ShapeMismatch("input " + shape_string(x.shape()) + " vs network input " +
                        shape_string(net.meta.input_shape));
  }
  ForwardTrace trace;
  trace.layer_inputs.reserve(net.layers.size());
  Tensor cur = x;
  for (const LayerSpec& layer : net.layers) {
    trace.layer_inputs.push_back(cur);
    if (layer.kind == LayerKind::activation) {
      trace.preactivations.push_back(cur);
      cur = mode == Mode::train ? nq_forward(cur, layer.act, rs)
                                : qcfs_forward(cur, layer.act);
      trace.activations.push_back(cur);
    } else {
      cur = apply_linear(layer, cur);
    }
  }
  trace.logits = std::move(cur);
  return trace;
}

ForwardTrace ann_forward(const NetworkDef& net, const Tensor& x) {
  RandomSource unused(0);
  return ann_forward(net, x, Mode::eval, unused);
}

Gradients Gradients::zeros_like(const NetworkDef& net) {
  Gradients g;
  g.layers.resize(net.layers.size());
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const LayerSpec& l = net.layers[i];
    if (!l.weight.empty()) g.layers[i].weight = Tensor(l.weight.shape());
    if (!l.bias.empty()) g.layers[i].bias = Tensor(l.bias.shape());
  }
  return g;
}

void Gradients::accumulate(const Gradients& other) {
  if (layers.empty()) {
    *this = other;
    return;
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (!other.layers[i].weight.empty()) add_inplace(layers[i].weight, other.layers[i].weight);
    if (!other.layers[i].bias.empty()) add_inplace(layers[i].bias, other.layers[i].bias);
    layers[i].lambda += other.layers[i].lambda;
  }
}

void Gradients::scale(float s) {
  for (LayerGrad& g : layers) {
    for (float& v : g.weight.data()) v *= s;
    for (float& v : g.bias.data()) v *= s;
    g.lambda *= s;
  }
}

Gradients ann_backward(const NetworkDef& net, const ForwardTrace& trace,
                       const Tensor& grad_logits) {
  Gradients grads;
  grads.layers.resize(net.layers.size());
  Tensor grad = grad_logits;
  for (std::size_t li = net.layers.size(); li-- > 0;) {
    const LayerSpec& layer = net.layers[li];
    const Tensor& input = trace.layer_inputs.at(li);
    LayerGrad& lg = grads.layers[li];
    switch (layer.kind) {
      case LayerKind::dense: {
        const std::size_t out = layer.weight.dim(0), in = layer.weight.dim(1);
        lg.weight = Tensor(layer.weight.shape());
        for (std::size_t i = 0; i < out; ++i) {
          const float g = grad[i];
          if (g == 0.0f) continue;
          for (std::size_t j = 0; j < in; ++j) lg.weight[i * in + j] = g * input[j];
        }
        if (!layer.bias.empty()) lg.bias = grad.reshaped(layer.bias.shape());
        if (li > 0) {
          std::vector<double> gx(in, 0.0);
          for (std::size_t i = 0; i < out; ++i) {
            const double g = grad[i];
            if (g == 0.0) continue;
            for (std::size_t j = 0; j < in; ++j) gx[j] += g * layer.weight[i * in + j];
          }
          grad = Tensor(input.shape(), std::vector<float>(gx.begin(), gx.end()));
        }
        break;
      }
      case LayerKind::conv2d: {
        lg.weight = conv2d_kernel_grad(grad, input, layer.weight.shape(),
                                       layer.stride, layer.pad);
        if (!layer.bias.empty()) {
          lg.bias = Tensor(layer.bias.shape());
          const std::size_t plane = grad.dim(1) * grad.dim(2);
          for (std::size_t f = 0; f < lg.bias.size(); ++f) {
            double acc = 0.0;
            for (std::size_t p = 0; p < plane; ++p) acc += grad[f * plane + p];
            lg.bias[f] = static_cast<float>(acc);
          }
        }
        if (li > 0) {
          grad = conv2d_input_grad(grad, layer.weight, input.shape(), layer.stride,
                                   layer.pad);
        }
        break;
      }
      case LayerKind::avgpool:
        grad = avgpool2d_grad(grad, input.shape(), layer.window);
        break;
      case LayerKind::flatten:
        grad = grad.reshaped(input.shape());
        break;
      case LayerKind::activation: {
        ActGrad ag = act_backward(input, layer.act, grad);
        lg.lambda = ag.grad_lambda;
        grad = std::move(ag.grad_z);
        break;
      }
    }
  }
  return grads;
}

LossResult cross_entropy_loss(const Tensor& logits, std::size_t label) {
  if (label >= logits.size()) {
    throw InvalidArgument("label " + std::to_string(label) + " >= class count " +
                          std::to_string(logits.size()));
  }
  double max_logit = logits[0];
  for (float v : logits.data()) max_logit = std::max(max_logit, static_cast<double>(v));
  std::vector<double> e(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    e[i] = std::exp(static_cast<double>(logits[i]) - max_logit);
    z += e[i];
  }
  LossResult r;
  r.loss = std::log(z) - (static_cast<double>(logits[label]) - max_logit);
  r.grad_logits = Tensor(logits.shape());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    r.grad_logits[i] = static_cast<float>(e[i] / z - (i == label ? 1.0 : 0.0));
  }
  return r;
}

SgdOptimizer::SgdOptimizer(const NetworkDef& net)
    : velocity_(Gradients::zeros_like(net)) {}

void SgdOptimizer::step(NetworkDef& net, const Gradients& grads, float lr,
                        float momentum, float weight_decay) {
  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    LayerSpec& layer = net.layers[li];
    const LayerGrad& g = grads.layers.at(li);
    LayerGrad& v = velocity_.layers.at(li);
    auto update = [&](Tensor& w, const Tensor& gw, Tensor& vw) {
      if (w.empty() || gw.empty()) return;
      for (std::size_t i = 0; i < w.size(); ++i) {
        vw[i] = momentum * vw[i] + (gw[i] + weight_decay * w[i]);
        w[i] -= lr * vw[i];
      }
    };
    update(layer.weight, g.weight, v.weight);
    update(layer.bias, g.bias, v.bias);
    if (layer.kind == LayerKind::activation) {
      v.lambda = momentum * v.lambda + g.lambda;
      const double next = layer.act.lambda - static_cast<double>(lr) * v.lambda;
      layer.act.lambda = std::max(static_cast<float>(next), kMinLambda);
    }
  }
}

void TrainConfig::validate() const {
  if (!(lr0 > 0.0f)) throw InvalidArgument("lr0 must be > 0");
  if (epochs < 1) throw InvalidArgument("epochs must be >= 1");
  if (!(val_fraction > 0.0 && val_fraction < 0.5)) {
    throw InvalidArgument("val_fraction must lie in (0, 0.5)");
  }
  if (batch_size < 1) throw InvalidArgument("batch size must be >= 1");
  if (levels < 1) throw InvalidArgument("L must be >= 1");
  if (tau < 1) throw InvalidArgument("tau must be >= 1");
  if (weight_decay < 0.0f || momentum < 0.0f) {
    throw InvalidArgument("weight decay and momentum must be >= 0");
  }
  if (!(lambda_init > 0.0f)) throw InvalidArgument("lambda init must be > 0");
}

double cosine_lr(int epoch, const TrainConfig& cfg) {
  if (epoch < 0 || epoch >= cfg.epochs) {
    throw InvalidArgument("epoch " + std::to_string(epoch) + " outside [0, " +
                          std::to_string(cfg.epochs) + ")");
  }
  return cfg.lr0 * 0.5 *
         (1.0 + std::cos(std::numbers::pi * epoch / static_cast<double>(cfg.epochs)));
}

EpochStats train_epoch(NetworkDef& net, SgdOptimizer& opt, const Dataset& data,
                       const TrainConfig& cfg, int epoch) {
  if (data.empty()) throw InvalidArgument("train_epoch on an empty dataset");
  const std::uint64_t e = static_cast<std::uint64_t>(epoch);
  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  RandomSource shuffle(cfg.seed, derive_key({label_key("shuffle"), e}));
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    std::swap(order[i], order[shuffle.uniform_index(i + 1)]);
  }

  const float lr = static_cast<float>(cosine_lr(epoch, cfg));
  double loss_sum = 0.0;
  std::size_t correct = 0;
  struct PerSample {
    Gradients grads;
    double loss = 0.0;
    bool correct = false;
  };
  std::vector<PerSample> results;
  for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
    const std::size_t count = std::min(cfg.batch_size, order.size() - start);
    results.assign(count, {});
    parallel_chunks(count, [&](std::size_t, std::size_t begin, std::size_t end) {
      for (std::size_t k = begin; k < end; ++k) {
        const std::size_t idx = order[start + k];
        const Sample& s = data.samples[idx];
        RandomSource noise(cfg.seed, derive_key({label_key("nq-noise"), e, idx}));
        ForwardTrace trace = ann_forward(net, s.x, Mode::train, noise);
        LossResult loss = cross_entropy_loss(trace.logits, s.label);
        results[k].loss = loss.loss;
        results[k].correct = argmax(trace.logits) == s.label;
        results[k].grads = ann_backward(net, trace, loss.grad_logits);
      }
    });
    Gradients batch;
    for (PerSample& r : results) {
      batch.accumulate(r.grads);
      loss_sum += r.loss;
      correct += r.correct;
    }
    batch.scale(1.0f / static_cast<float>(count));
    opt.step(net, batch, lr, cfg.momentum, cfg.weight_decay);
  }
  const double n = static_cast<double>(data.size());
  return {loss_sum / n, static_cast<double>(correct) / n};
}

double evaluate_ann(const NetworkDef& net, const Dataset& data) {
  if (data.empty()) return 0.0;
  std::vector<char> hit(data.size(), 0);
  parallel_chunks(data.size(), [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      hit[i] = argmax(ann_forward(net, data.samples[i].x).logits) ==
               data.samples[i].label;
    }
  });
  std::size_t correct = 0;
  for (char h : hit) correct += h;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

namespace {

std::vector<std::string_view> split_dash(std::string_view s) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = s.find('-', pos);
    parts.push_back(s.substr(pos, next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return parts;
}

std::size_t parse_extent(std::string_view s, std::string_view arch) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v == 0) {
    throw InvalidArgument("bad extent '" + std::string(s) + "' in arch '" +
                          std::string(arch) + "'");
  }
  return v;
}

Tensor kaiming_uniform(const Shape& shape, std::size_t fan_in, RandomSource& rs) {
  const float bound = std::sqrt(6.0f / static_cast<float>(fan_in));
  return rs.uniform(shape, -bound, bound);
}

}  // namespace

NetworkDef build_network(std::string_view arch, const Shape& input_shape,
                         std::size_t class_count, const QuantActParams& act,
                         std::uint64_t seed) {
  act.validate();
  if (class_count < 2) throw InvalidArgument("need at least 2 classes");
  const std::vector<std::string_view> parts = split_dash(arch);
  NetworkDef net;
  net.meta.input_shape = input_shape;
  net.meta.class_count = class_count;

  std::uint64_t layer_no = 0;
  Shape cur = input_shape;
  auto add_dense = [&](std::size_t out, bool with_act) {
    if (cur.size() != 1) {
      net.layers.push_back(LayerSpec::flatten());
      cur = {shape_size(cur)};
    }
    RandomSource rs(seed, derive_key({label_key("init"), layer_no++}));
    net.layers.push_back(LayerSpec::dense(kaiming_uniform({out, cur[0]}, cur[0], rs),
                                          Tensor({out})));
    if (with_act) net.layers.push_back(LayerSpec::activation(act));
    cur = {out};
  };

  if (parts[0] == "mlp") {
    for (std::size_t i = 1; i < parts.size(); ++i) add_dense(parse_extent(parts[i], arch), true);
  } else if (parts[0] == "cnn") {
    if (input_shape.size() != 3) {
      throw InvalidArgument("cnn architectures need a [C x H x W] input");
    }
    for (std::size_t i = 1; i < parts.size(); ++i) {
      if (!parts[i].empty() && parts[i][0] == 'd') {
        add_dense(parse_extent(parts[i].substr(1), arch), true);
        continue;
      }
      if (cur.size() != 3) {
        throw InvalidArgument("conv stage after dense layer in '" + std::string(arch) + "'");
      }
      const std::size_t filters = parse_extent(parts[i], arch);
      const std::size_t fan_in = cur[0] * 9;
      RandomSource rs(seed, derive_key({label_key("init"), layer_no++}));
      net.layers.push_back(LayerSpec::conv(
          kaiming_uniform({filters, cur[0], 3, 3}, fan_in, rs), Tensor({filters}), 1, 1));
      net.layers.push_back(LayerSpec::activation(act));
      cur = {filters, cur[1], cur[2]};
      if (cur[1] % 2 == 0 && cur[2] % 2 == 0) {
        net.layers.push_back(LayerSpec::avgpool(2));
        cur = {filters, cur[1] / 2, cur[2] / 2};
      }
    }
  } else {
    throw InvalidArgument("unknown architecture '" + std::string(arch) +
                          "' (expected mlp-... or cnn-...)");
  }
  add_dense(class_count, false);
  net.validate();
  return net;
}

}  // namespace snnforge
