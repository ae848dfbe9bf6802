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
#include <vector>

#include "snnforge/error.hpp"
#include "snnforge/random.hpp"
#include "snnforge/tensor.hpp"

using namespace snnforge;

TEST_CASE("matmul hand cases") {
  const Tensor eye = Tensor::matrix({{1, 0}, {0, 1}});
  const Tensor m = Tensor::matrix({{3, 4}, {5, 6}});
  CHECK(matmul(eye, m) == m);
  CHECK(matmul(m, eye) == m);
  CHECK(matmul(Tensor::matrix({{1, 2}}), Tensor::matrix({{3}, {4}})) == Tensor::matrix({{11}}));

  RandomSource rs(3);
  const Tensor any = rs.uniform({3, 2}, -5, 5);
  CHECK(matmul(Tensor::zeros({2, 3}), any) == Tensor::zeros({2, 2}));
}

TEST_CASE("matmul rejects mismatched inner extents") {
  CHECK_THROWS_AS(matmul(Tensor::zeros({2, 3}), Tensor::zeros({2, 2})), ShapeMismatch);
  CHECK_THROWS_AS(matmul(Tensor::zeros({6}), Tensor::zeros({6, 1})), ShapeMismatch);
}

TEST_CASE("matmul by identity is exact on random matrices") {
  RandomSource rs(11);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = 1 + rs.uniform_index(7), n = 1 + rs.uniform_index(7);
    const Tensor a = rs.gaussian({m, n});
    Tensor eye({n, n});
    for (std::size_t i = 0; i < n; ++i) eye.at(i, i) = 1.0f;
    CHECK(matmul(a, eye) == a);
  }
}

TEST_CASE("conv2d hand cases") {
  const Tensor x({1, 2, 2}, {1, 2, 3, 4});
  CHECK(conv2d(x, Tensor({1, 1, 2, 2}, 1.0f), 1, 0) == Tensor({1, 1, 1}, {10}));
  CHECK(conv2d(x, Tensor({1, 1, 1, 1}, 1.0f), 1, 0) == x);
  CHECK(conv2d(x, Tensor({3, 1, 2, 2}, 0.0f), 1, 1) == Tensor({3, 3, 3}));
}

TEST_CASE("conv2d identity kernel is the identity map on random inputs") {
  RandomSource rs(5);
  const Tensor x = rs.gaussian({3, 5, 4});
  Tensor k({3, 3, 3, 3});
  for (std::size_t c = 0; c < 3; ++c) k[((c * 3 + c) * 3 + 1) * 3 + 1] = 1.0f;
  CHECK(conv2d(x, k, 1, 1) == x);
}

TEST_CASE("conv2d matches a naive reference with stride and padding") {
  RandomSource rs(8);
  const Tensor x = rs.gaussian({2, 7, 6});
  const Tensor k = rs.gaussian({3, 2, 3, 2});
  const std::size_t stride = 2, pad = 1;
  const Tensor y = conv2d(x, k, stride, pad);
  const std::size_t oh = (7 + 2 - 3) / 2 + 1, ow = (6 + 2 - 2) / 2 + 1;
  REQUIRE(y.shape() == Shape{3, oh, ow});
  for (std::size_t f = 0; f < 3; ++f) {
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j) {
        double ref = 0.0;
        for (std::size_t c = 0; c < 2; ++c) {
          for (std::size_t a = 0; a < 3; ++a) {
            for (std::size_t b = 0; b < 2; ++b) {
              const long r = static_cast<long>(i * stride + a) - 1;
              const long s = static_cast<long>(j * stride + b) - 1;
              if (r < 0 || r >= 7 || s < 0 || s >= 6) continue;
              ref += k[((f * 2 + c) * 3 + a) * 2 + b] * x[(c * 7 + r) * 6 + s];
            }
          }
        }
        CHECK(y[(f * oh + i) * ow + j] == doctest::Approx(ref).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("conv2d errors") {
  const Tensor x({1, 2, 2});
  CHECK_THROWS_AS(conv2d(x, Tensor({1, 1, 3, 3}), 1, 0), ShapeMismatch);
  CHECK_THROWS_AS(conv2d(x, Tensor({1, 2, 1, 1}), 1, 0), ShapeMismatch);
  CHECK_THROWS_AS(conv2d(x, Tensor({1, 1, 1, 1}), 0, 0), InvalidStride);
}

TEST_CASE("conv2d gradients match finite differences") {
  RandomSource rs(21);
  const Tensor x = rs.gaussian({2, 4, 4});
  const Tensor k = rs.gaussian({2, 2, 3, 3});
  const Tensor g = rs.gaussian({2, 4, 4});
  auto objective = [&](const Tensor& xx, const Tensor& kk) {
    const Tensor y = conv2d(xx, kk, 1, 1);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += static_cast<double>(y[i]) * g[i];
    return s;
  };
  const Tensor gx = conv2d_input_grad(g, k, x.shape(), 1, 1);
  const Tensor gk = conv2d_kernel_grad(g, x, k.shape(), 1, 1);
  const float h = 1e-2f;
  for (std::size_t i = 0; i < x.size(); i += 5) {
    Tensor xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    CHECK(gx[i] == doctest::Approx((objective(xp, k) - objective(xm, k)) / (2 * h)).epsilon(1e-3));
  }
  for (std::size_t i = 0; i < k.size(); i += 3) {
    Tensor kp = k, km = k;
    kp[i] += h;
    km[i] -= h;
    CHECK(gk[i] == doctest::Approx((objective(x, kp) - objective(x, km)) / (2 * h)).epsilon(1e-3));
  }
}

TEST_CASE("avgpool and its gradient") {
  const Tensor x({1, 2, 4}, {1, 2, 3, 4, 5, 6, 7, 8});
  CHECK(avgpool2d(x, 2) == Tensor({1, 1, 2}, {3.5f, 5.5f}));
  const Tensor g = avgpool2d_grad(Tensor({1, 1, 2}, {4, 8}), x.shape(), 2);
  CHECK(g == Tensor({1, 2, 4}, {1, 1, 2, 2, 1, 1, 2, 2}));
  CHECK_THROWS_AS(avgpool2d(Tensor({1, 3, 4}), 2), ShapeMismatch);
}

TEST_CASE("reductions agree with a naive sequential reference") {
  RandomSource rs(99);
  for (int trial = 0; trial < 10; ++trial) {
    const Tensor t = rs.uniform({1 + rs.uniform_index(5000)}, -3.0f, 7.0f);
    double s = 0.0;
    for (float v : t.data()) s += v;
    const double mu = s / static_cast<double>(t.size());
    double ss = 0.0;
    for (float v : t.data()) ss += (v - mu) * (v - mu);
    const double sd = std::sqrt(ss / static_cast<double>(t.size()));
    CHECK(sum(t) == doctest::Approx(s).epsilon(1e-6));
    CHECK(mean(t) == doctest::Approx(mu).epsilon(1e-6));
    CHECK(stddev(t) == doctest::Approx(sd).epsilon(1e-6));
  }
}

TEST_CASE("tensor invariants") {
  CHECK_THROWS_AS(Tensor({2, 3}, std::vector<float>(5)), ShapeMismatch);
  CHECK_THROWS_AS(Tensor(Shape{2, 0}), ShapeMismatch);
  CHECK_THROWS_AS(add(Tensor({2}, {3e38f, 3e38f}), Tensor({2}, {3e38f, 3e38f})), NonFinite);
  CHECK(Tensor({2, 3}).reshaped({6}).shape() == Shape{6});
  CHECK_THROWS_AS(Tensor({2, 3}).reshaped({5}), ShapeMismatch);
}

TEST_CASE("gaussian moments over 10^6 draws") {
  RandomSource rs(2024, 7);
  const Tensor g = rs.gaussian({1000000});
  CHECK(std::fabs(mean(g)) < 0.005);
  CHECK(std::fabs(stddev(g) * stddev(g) - 1.0) < 0.01);
}

TEST_CASE("random streams are deterministic and keyed") {
  RandomSource a(42, 3), b(42, 3), c(42, 4), d(43, 3);
  const Tensor ta = a.gaussian({64});
  CHECK(ta == b.gaussian({64}));
  CHECK_FALSE(ta == c.gaussian({64}));
  CHECK_FALSE(ta == d.gaussian({64}));

  // Draw n depends only on (seed, key, n): interleaving other streams changes
  // nothing.
  RandomSource x(7, 1), y(7, 1), other(7, 2);
  std::vector<std::uint64_t> xs, ys;
  for (int i = 0; i < 10; ++i) xs.push_back(x.next_u64());
  for (int i = 0; i < 10; ++i) {
    other.next_u64();
    ys.push_back(y.next_u64());
  }
  CHECK(xs == ys);
}

TEST_CASE("uniform_index stays in range and covers it") {
  RandomSource rs(1);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) ++hits[rs.uniform_index(7)];
  for (int h : hits) CHECK(h > 800);
}
