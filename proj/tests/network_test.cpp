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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <numbers>

#include "snnforge/error.hpp"
#include "snnforge/io.hpp"
#include "snnforge/network.hpp"

using namespace snnforge;

namespace {

NetworkDef identity_net(QuantActParams act) {
  NetworkDef net;
  net.meta.input_shape = {1};
  net.meta.class_count = 0;
  net.layers.push_back(LayerSpec::dense(Tensor::matrix({{1}}), Tensor({1})));
  net.layers.push_back(LayerSpec::activation(act));
  net.layers.push_back(LayerSpec::dense(Tensor::matrix({{1}}), Tensor({1})));
  return net;
}

// Independent double-precision forward of a dense-act-dense network with the
// quantizer replaced by clip(z, 0, lambda).
double surrogate_loss(const std::vector<double>& w1, const std::vector<double>& b1,
                      const std::vector<double>& w2, const std::vector<double>& b2,
                      double lambda, const std::vector<double>& x, std::size_t in,
                      std::size_t hidden, std::size_t out, std::size_t label) {
  std::vector<double> a(hidden);
  for (std::size_t i = 0; i < hidden; ++i) {
    double z = b1[i];
    for (std::size_t j = 0; j < in; ++j) z += w1[i * in + j] * x[j];
    a[i] = std::clamp(z, 0.0, lambda);
  }
  std::vector<double> logits(out);
  double mx = -1e300;
  for (std::size_t i = 0; i < out; ++i) {
    double z = b2[i];
    for (std::size_t j = 0; j < hidden; ++j) z += w2[i * hidden + j] * a[j];
    logits[i] = z;
    mx = std::max(mx, z);
  }
  double norm = 0.0;
  for (double l : logits) norm += std::exp(l - mx);
  return std::log(norm) - (logits[label] - mx);
}

std::vector<double> to_double(const Tensor& t) {
  return std::vector<double>(t.data().begin(), t.data().end());
}

}  // namespace

TEST_CASE("forward through identity dense + QCFS") {
  const NetworkDef net = identity_net({1.0f, 4, 0.0f});
  const ForwardTrace t = ann_forward(net, Tensor({1}, {0.3f}));
  REQUIRE(t.activations.size() == 1);
  CHECK(t.activations[0] == Tensor({1}, {0.25f}));
  CHECK(t.logits == Tensor({1}, {0.25f}));
  CHECK(t.preactivations[0] == Tensor({1}, {0.3f}));
}

TEST_CASE("zero weights give zero activations") {
  NetworkDef net = build_network("mlp-8-8", {3}, 2, {1.0f, 4, 0.0f}, 1);
  for (LayerSpec& l : net.layers) {
    l.weight.fill(0.0f);
    l.bias.fill(0.0f);
  }
  const ForwardTrace t = ann_forward(net, Tensor({3}, {0.5f, -1.0f, 2.0f}));
  for (const Tensor& a : t.activations) CHECK(max_abs(a) == 0.0);
}

TEST_CASE("eval mode is deterministic and noise-free; train mode is noisy") {
  NetworkDef net = build_network("mlp-16", {2}, 2, {1.0f, 4, 0.3f}, 2);
  const Tensor x({2}, {0.4f, -0.2f});
  RandomSource a(1), b(2);
  CHECK(ann_forward(net, x, Mode::eval, a).logits == ann_forward(net, x, Mode::eval, b).logits);
  CHECK(a.position() == 0);
  const ForwardTrace noisy = ann_forward(net, x, Mode::train, a);
  CHECK_FALSE(noisy.logits == ann_forward(net, x).logits);
}

TEST_CASE("eval activations lie on the lambda/L grid") {
  const NetworkDef net = build_network("cnn-4-d8", {1, 6, 6}, 3, {0.7f, 5, 0.2f}, 3);
  RandomSource rs(8);
  for (int trial = 0; trial < 10; ++trial) {
    const ForwardTrace t = ann_forward(net, rs.uniform({1, 6, 6}, 0.0f, 1.0f));
    for (const Tensor& a : t.activations) {
      for (float v : a.data()) {
        const double k = v * 5 / 0.7f;
        CHECK(std::fabs(k - std::round(k)) < 1e-5);
      }
    }
  }
}

TEST_CASE("cross entropy") {
  const LossResult u = cross_entropy_loss(Tensor({4}, 1.5f), 2);
  CHECK(u.loss == doctest::Approx(std::log(4.0)));
  CHECK(cross_entropy_loss(Tensor({2}, {10.0f, -10.0f}), 0).loss < 1e-4);
  RandomSource rs(3);
  for (int i = 0; i < 10; ++i) {
    const LossResult r = cross_entropy_loss(rs.gaussian({5}), rs.uniform_index(5));
    CHECK(std::fabs(sum(r.grad_logits)) < 1e-6);
  }
  CHECK_THROWS_AS(cross_entropy_loss(Tensor({3}), 3), InvalidArgument);
}

TEST_CASE("sgd step") {
  NetworkDef net = identity_net({1.0f, 4, 0.0f});
  const NetworkDef before = net;
  SgdOptimizer opt(net);
  opt.step(net, Gradients::zeros_like(net), 0.1f, 0.0f, 0.0f);
  CHECK(net == before);

  Gradients g = Gradients::zeros_like(net);
  g.layers[0].weight[0] = 1.0f;
  opt.step(net, g, 0.1f, 0.0f, 0.0f);
  CHECK(net.layers[0].weight[0] == doctest::Approx(0.9f));

  Gradients lam = Gradients::zeros_like(net);
  lam.layers[1].lambda = 100.0;
  opt.step(net, lam, 0.1f, 0.0f, 0.0f);
  CHECK(net.layers[1].act.lambda == kMinLambda);
}

TEST_CASE("sgd momentum and weight decay") {
  NetworkDef net = identity_net({1.0f, 4, 0.0f});
  net.layers[0].weight[0] = 2.0f;
  SgdOptimizer opt(net);
  Gradients g = Gradients::zeros_like(net);
  g.layers[0].weight[0] = 1.0f;
  g.layers[1].lambda = 0.5;
  opt.step(net, g, 0.1f, 0.9f, 0.01f);
  // buf = 1 + 0.01 * 2 = 1.02; w = 2 - 0.102
  CHECK(net.layers[0].weight[0] == doctest::Approx(1.898));
  // lambda: no decay, buf = 0.5
  CHECK(net.layers[1].act.lambda == doctest::Approx(0.95));
  opt.step(net, g, 0.1f, 0.9f, 0.01f);
  // buf = 0.9 * 1.02 + 1 + 0.01 * 1.898
  CHECK(net.layers[0].weight[0] == doctest::Approx(1.898 - 0.1 * (0.918 + 1.01898)));
}

TEST_CASE("cosine schedule") {
  TrainConfig cfg;
  cfg.lr0 = 0.1f;
  cfg.epochs = 40;
  CHECK(cosine_lr(0, cfg) == doctest::Approx(0.1));
  CHECK(cosine_lr(20, cfg) == doctest::Approx(0.05));
  CHECK(cosine_lr(39, cfg) ==
        doctest::Approx(0.1 * 0.5 * (1 + std::cos(std::numbers::pi * 39 / 40))));
  CHECK(cosine_lr(39, cfg) < 0.001);
  CHECK_THROWS_AS(cosine_lr(40, cfg), InvalidArgument);
}

TEST_CASE("STE gradient matches finite differences of the clipped-identity surrogate") {
  // With L large the quantizer is within lambda / (2L) of clip(z, 0, lambda),
  // so the STE gradient and the surrogate gradient agree closely.
  const std::size_t in = 3, hidden = 5, out = 3, label = 1;
  const float lambda = 4.0f;
  NetworkDef net;
  net.meta.input_shape = {in};
  net.meta.class_count = out;
  RandomSource rs(77);
  Tensor w1 = rs.uniform({hidden, in}, 0.1f, 0.6f);
  Tensor b1 = rs.uniform({hidden}, 0.5f, 1.0f);
  net.layers.push_back(LayerSpec::dense(w1, b1));
  net.layers.push_back(LayerSpec::activation({lambda, 1 << 14, 0.0f}));
  net.layers.push_back(LayerSpec::dense(rs.gaussian({out, hidden}), rs.gaussian({out})));
  const Tensor x = rs.uniform({in}, 0.2f, 1.0f);

  const ForwardTrace trace = ann_forward(net, x);
  for (float z : trace.preactivations[0].data()) {
    REQUIRE(z > lambda / 8);
    REQUIRE(z < lambda - lambda / 8);
  }
  const LossResult loss = cross_entropy_loss(trace.logits, label);
  const Gradients g = ann_backward(net, trace, loss.grad_logits);

  auto W1 = to_double(net.layers[0].weight), B1 = to_double(net.layers[0].bias);
  auto W2 = to_double(net.layers[2].weight), B2 = to_double(net.layers[2].bias);
  const auto X = to_double(x);
  const double h = 1e-4;
  auto check_param = [&](std::vector<double>& p, const Tensor& grad) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double saved = p[i];
      p[i] = saved + h;
      const double up = surrogate_loss(W1, B1, W2, B2, lambda, X, in, hidden, out, label);
      p[i] = saved - h;
      const double down = surrogate_loss(W1, B1, W2, B2, lambda, X, in, hidden, out, label);
      p[i] = saved;
      const double fd = (up - down) / (2 * h);
      CHECK(std::fabs(grad[i] - fd) <= 1e-2 * std::max(std::fabs(fd), 1e-2));
    }
  };
  check_param(W1, g.layers[0].weight);
  check_param(B1, g.layers[0].bias);
  check_param(W2, g.layers[2].weight);
  check_param(B2, g.layers[2].bias);
}

TEST_CASE("conv network gradient matches finite differences with a fine quantizer") {
  NetworkDef net = build_network("cnn-3-d6", {1, 4, 4}, 3, {8.0f, 1 << 16, 0.0f}, 5);
  RandomSource rs(12);
  for (LayerSpec& l : net.layers) {
    if (l.weight.size() == 0) continue;
    l.weight = rs.uniform(l.weight.shape(), 0.0f, 0.3f);
    l.bias.fill(0.5f);
  }
  const Tensor x = rs.uniform({1, 4, 4}, 0.0f, 1.0f);
  const std::size_t label = 2;
  auto loss_of = [&](const NetworkDef& n) {
    return cross_entropy_loss(ann_forward(n, x).logits, label).loss;
  };
  const ForwardTrace trace = ann_forward(net, x);
  for (const Tensor& z : trace.preactivations) {
    for (float v : z.data()) REQUIRE((v > 0.05f && v < 7.95f));
  }
  const Gradients g = ann_backward(net, trace, cross_entropy_loss(trace.logits, label).grad_logits);
  const float h = 2e-2f;
  for (std::size_t li : {std::size_t{0}, net.layers.size() - 1}) {
    for (std::size_t i = 0; i < net.layers[li].weight.size(); i += 4) {
      NetworkDef up = net, down = net;
      up.layers[li].weight[i] += h;
      down.layers[li].weight[i] -= h;
      const double fd = (loss_of(up) - loss_of(down)) / (2 * h);
      CHECK(std::fabs(g.layers[li].weight[i] - fd) <= 2e-2 * std::max(std::fabs(fd), 2e-2));
    }
  }
}

TEST_CASE("training learns separable blobs") {
  const Dataset blobs = synth("blobs", 200, 7);
  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.batch_size = 16;
  cfg.seed = 3;
  NetworkDef net = build_network("mlp-16", blobs.input_shape, 2, {cfg.lambda_init, 4, 0.0f}, 3);
  SgdOptimizer opt(net);
  double best = 0.0;
  for (int e = 0; e < cfg.epochs; ++e) best = std::max(best, train_epoch(net, opt, blobs, cfg, e).accuracy);
  CHECK(best >= 0.95);
  CHECK(evaluate_ann(net, blobs) >= 0.95);
}

TEST_CASE("loss decreases on a separable set for most seeds") {
  const Dataset blobs = synth("blobs", 200, 11);
  int decreasing = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    TrainConfig cfg;
    cfg.epochs = 10;
    cfg.batch_size = 32;
    cfg.seed = seed;
    NetworkDef net = build_network("mlp-16", blobs.input_shape, 2, {cfg.lambda_init, 4, 0.0f}, seed);
    SgdOptimizer opt(net);
    const double first = train_epoch(net, opt, blobs, cfg, 0).loss;
    double last = first;
    for (int e = 1; e < cfg.epochs; ++e) last = train_epoch(net, opt, blobs, cfg, e).loss;
    decreasing += last < first;
  }
  CHECK(decreasing >= 4);
}

TEST_CASE("zero learning rate leaves parameters unchanged") {
  const Dataset data = synth("spirals", 64, 1);
  TrainConfig cfg;
  cfg.lr0 = 0.0f;
  cfg.epochs = 2;
  NetworkDef net = build_network("mlp-8", data.input_shape, 2, {1.0f, 4, 0.1f}, 1);
  const NetworkDef before = net;
  SgdOptimizer opt(net);
  train_epoch(net, opt, data, cfg, 0);
  CHECK(net == before);
}

TEST_CASE("training is independent of the worker count") {
  const Dataset data = synth("xor_grid", 96, 4);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 32;
  auto run = [&](const char* threads) {
    setenv("SNNFORGE_THREADS", threads, 1);
    NetworkDef net = build_network("mlp-8-8", data.input_shape, 2, {2.0f, 4, 0.2f}, 9);
    SgdOptimizer opt(net);
    for (int e = 0; e < cfg.epochs; ++e) train_epoch(net, opt, data, cfg, e);
    return net;
  };
  const NetworkDef a = run("1");
  const NetworkDef b = run("3");
  unsetenv("SNNFORGE_THREADS");
  CHECK(a == b);
}

TEST_CASE("architecture builder and structure validation") {
  const NetworkDef mlp = build_network("mlp-4-3", {2}, 2, {1.0f, 4, 0.0f}, 1);
  CHECK(mlp.activation_count() == 2);
  CHECK(mlp.layers.size() == 5);
  const NetworkDef cnn = build_network("cnn-8-16-d32", {1, 8, 8}, 10, {1.0f, 4, 0.0f}, 1);
  CHECK(cnn.activation_count() == 3);
  CHECK(cnn.infer_shapes().back() == Shape{10});
  CHECK_THROWS_AS(build_network("resnet", {2}, 2, {}, 1), InvalidArgument);
  CHECK_THROWS_AS(build_network("mlp-0", {2}, 2, {}, 1), InvalidArgument);
  CHECK_THROWS_AS(build_network("cnn-4", {2}, 2, {}, 1), InvalidArgument);

  NetworkDef bad = mlp;
  bad.layers.erase(bad.layers.begin() + 1);  // drop the first activation
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  NetworkDef trailing = mlp;
  trailing.layers.push_back(LayerSpec::activation({}));
  CHECK_THROWS_AS(trailing.validate(), InvalidArgument);
  NetworkDef wrong_shape = mlp;
  wrong_shape.meta.input_shape = {3};
  CHECK_THROWS_AS(wrong_shape.validate(), ShapeMismatch);
  CHECK_THROWS_AS(ann_forward(mlp, Tensor({3})), ShapeMismatch);
}
