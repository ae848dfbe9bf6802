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
#include <limits>

#include "snnforge/convert.hpp"
#include "snnforge/error.hpp"
#include "snnforge/random.hpp"
#include "snnforge/snn.hpp"

using namespace snnforge;

namespace {

// dense(1x1, w=1) -> IF(theta) -> dense(1x1, w=1)
SpikingNetwork single_neuron(float theta) {
  NetworkDef ann;
  ann.meta.input_shape = {1};
  ann.layers.push_back(LayerSpec::dense(Tensor::matrix({{1}}), Tensor({1})));
  ann.layers.push_back(LayerSpec::activation({theta, 4, 0.0f}));
  ann.layers.push_back(LayerSpec::dense(Tensor::matrix({{1}}), Tensor({1})));
  return convert(ann);
}

SpikingNetwork random_snn(const std::string& arch, const Shape& in, std::uint64_t seed) {
  RandomSource rs(seed, label_key("lambda"));
  NetworkDef ann = build_network(arch, in, 3, {1.0f, 4, 0.0f}, seed);
  for (LayerSpec& l : ann.layers) {
    if (l.kind == LayerKind::activation) l.act.lambda = static_cast<float>(rs.uniform(0.2, 2.0));
    for (float& b : l.bias.data()) b = static_cast<float>(rs.uniform(-0.2, 0.2));
  }
  return convert(ann);
}

bool on_grid(const Tensor& phi, float theta, int T) {
  for (float p : phi.data()) {
    const double k = static_cast<double>(p) * T / theta;
    if (std::fabs(k - std::round(k)) > 1e-5 || k < -1e-5 || k > T + 1e-5) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("if_step charge fire reset") {
  IFLayerState s({1}, 1.0f, 0.5f);
  Tensor spikes = if_step(s, Tensor({1}, {0.3f}));
  CHECK(spikes[0] == 0.0f);
  CHECK(s.v[0] == doctest::Approx(0.8f));
  spikes = if_step(s, Tensor({1}, {0.3f}));
  CHECK(spikes[0] == 1.0f);
  CHECK(s.v[0] == doctest::Approx(0.1f));
  CHECK(s.spike_count[0] == 1);

  IFLayerState eq({1}, 1.0f, 0.5f);
  if_step(eq, Tensor({1}, {0.5f}));  // u == theta fires
  CHECK(eq.spike_count[0] == 1);
  CHECK(eq.v[0] == 0.0f);

  IFLayerState idle({3}, 2.0f, 1.0f);
  for (int t = 0; t < 100; ++t) if_step(idle, Tensor({3}));
  CHECK(idle.v == Tensor({3}, 1.0f));
  CHECK(idle.spike_count == std::vector<std::uint32_t>{0, 0, 0});

  CHECK_THROWS_AS(if_step(idle, Tensor({2})), ShapeMismatch);
  CHECK_THROWS_AS(if_step(idle, Tensor({3}, std::numeric_limits<float>::infinity())),
                  NonFinite);
}

TEST_CASE("single neuron trace") {
  SpikingNetwork net = single_neuron(1.0f);
  const SnnTrace t = snn_forward(net, Tensor({1}, {0.3f}), 4);
  CHECK(t.phi[0][0] == 0.25f);
  CHECK(t.spike_counts[0][0] == 1);
  CHECK(t.v_final[0][0] == doctest::Approx(0.7f));
  CHECK(t.mean_logits[0] == 0.25f);

  // spike only at t = 2: run step by step
  IFLayerState s({1}, 1.0f, 0.5f);
  std::vector<float> fired;
  for (int k = 0; k < 4; ++k) fired.push_back(if_step(s, Tensor({1}, {0.3f}))[0]);
  CHECK(fired == std::vector<float>{0, 1, 0, 0});
}

TEST_CASE("saturation and silence") {
  SpikingNetwork net = single_neuron(1.5f);
  for (int T : {1, 3, 16}) {
    SnnTrace sat = snn_forward(net, Tensor({1}, {1.5f}), T);
    CHECK(sat.phi[0][0] == 1.5f);
    SnnTrace over = snn_forward(net, Tensor({1}, {7.0f}), T);
    CHECK(over.phi[0][0] == 1.5f);
    SnnTrace zero = snn_forward(net, Tensor({1}), T);
    CHECK(zero.phi[0][0] == 0.0f);
    CHECK(zero.v_final[0][0] == 0.75f);
  }
  CHECK_THROWS_AS(snn_forward(net, Tensor({1}), 0), InvalidArgument);
  CHECK_THROWS_AS(snn_forward(net, Tensor({2}), 4), ShapeMismatch);
}

TEST_CASE("theoretical phi") {
  CHECK(theoretical_phi(Tensor({1}, {0.3f}), 1.0f, 0.5f, 4)[0] == 0.25f);
  CHECK(theoretical_phi(Tensor({1}, {1.0f}), 1.0f, 0.5f, 4)[0] == 1.0f);
  CHECK(theoretical_phi(Tensor({1}, {5.0f}), 1.0f, 0.5f, 4)[0] == 1.0f);
  CHECK(theoretical_phi(Tensor({1}, {-0.2f}), 1.0f, 0.5f, 4)[0] == 0.0f);
}

TEST_CASE("simulated phi equals the closed form over an exhaustive dyadic sweep") {
  // Dyadic z and power-of-two theta keep every float operation exact, so the
  // comparison is equality, not tolerance.
  for (float theta : {1.0f, 0.5f, 2.0f}) {
    SpikingNetwork net = single_neuron(theta);
    for (int T = 1; T <= 64; ++T) {
      for (int k = 0; k <= 1024; ++k) {
        const float z = theta * static_cast<float>(k) / 1024.0f;
        const Tensor zt({1}, z);
        const SnnTrace tr = snn_forward(net, zt, T);
        const float expect = theoretical_phi(zt, theta, theta / 2, T)[0];
        if (tr.phi[0][0] != expect) {
          FAIL("mismatch theta=" << theta << " T=" << T << " k=" << k);
        }
        // boundedness for z in [0, theta]
        if (tr.v_final[0][0] < 0.0f || tr.v_final[0][0] > theta) {
          FAIL("v out of range theta=" << theta << " T=" << T << " k=" << k);
        }
      }
    }
  }
}

TEST_CASE("eq5 audit on random networks") {
  int net_no = 0;
  for (const auto& [arch, in] : std::vector<std::pair<std::string, Shape>>{
           {"mlp-12-8", {5}}, {"mlp-6", {4}}, {"cnn-4-d6", {2, 6, 6}}, {"cnn-3-5", {1, 8, 8}}}) {
    SpikingNetwork net = random_snn(arch, in, 100 + net_no++);
    RandomSource rs(5);
    for (int T : {1, 2, 4, 8}) {
      const Tensor x = rs.uniform(in, -1.0f, 2.0f);
      const SnnTrace tr = snn_forward(net, x, T);
      const std::vector<Tensor> res = eq5_audit(net, x, tr);
      REQUIRE(res.size() == net.if_count());
      for (const Tensor& r : res) CHECK(max_abs(r) <= 1e-5);
      for (std::size_t k = 0; k < tr.phi.size(); ++k) CHECK(on_grid(tr.phi[k], net.theta(k), T));
    }
  }
}

TEST_CASE("eq5 audit is exactly zero on a zero input with zero biases") {
  NetworkDef ann = build_network("mlp-5-5", {3}, 2, {1.0f, 4, 0.0f}, 3);
  SpikingNetwork net = convert(ann);
  for (int T : {1, 7}) {
    for (const Tensor& r : eq5_audit(net, Tensor({3}), T)) CHECK(max_abs(r) == 0.0);
  }
}

TEST_CASE("spike counts are bounded by T and state resets between runs") {
  SpikingNetwork net = random_snn("mlp-10-10", {4}, 21);
  RandomSource rs(2);
  const Tensor x = rs.uniform({4}, 0.0f, 3.0f);
  const SnnTrace a = snn_forward(net, x, 9);
  for (const auto& counts : a.spike_counts) {
    for (std::uint32_t c : counts) CHECK(c <= 9);
  }
  snn_forward(net, rs.uniform({4}, 0.0f, 3.0f), 5);
  const SnnTrace b = snn_forward(net, x, 9);
  CHECK(a.mean_logits == b.mean_logits);
  for (std::size_t k = 0; k < net.if_count(); ++k) {
    CHECK(a.v_initial[k] == Tensor(a.v_initial[k].shape(), net.theta(k) / 2));
  }
}

TEST_CASE("evaluate_snn is independent of the worker count") {
  SpikingNetwork net = random_snn("mlp-8", {2}, 4);
  Dataset data;
  data.class_count = 3;
  data.input_shape = {2};
  RandomSource rs(1);
  for (std::size_t i = 0; i < 60; ++i) data.samples.push_back({rs.uniform({2}, -1.0f, 1.0f), i % 3});
  setenv("SNNFORGE_THREADS", "1", 1);
  const double a = evaluate_snn(net, data, 6);
  setenv("SNNFORGE_THREADS", "4", 1);
  const double b = evaluate_snn(net, data, 6);
  unsetenv("SNNFORGE_THREADS");
  CHECK(a == b);
}
