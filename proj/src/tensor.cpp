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

#include "snnforge/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "snnforge/error.hpp"

namespace snnforge {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

namespace {

void check_shape(const Shape& shape) {
  if (shape.empty()) throw ShapeMismatch("tensor shape must have rank >= 1");
  for (std::size_t e : shape) {
    if (e == 0) throw ShapeMismatch("zero extent in " + shape_string(shape));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeMismatch(std::string(op) + ": " + shape_string(a.shape()) +
                        " vs " + shape_string(b.shape()));
  }
}

}  // namespace

Tensor::Tensor(Shape shape, float fill) : shape_(std::move(shape)) {
  check_shape(shape_);
  data_.assign(shape_size(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<float> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  check_shape(shape_);
  if (shape_size(shape_) != data_.size()) {
    throw ShapeMismatch("shape " + shape_string(shape_) + " holds " +
                        std::to_string(shape_size(shape_)) + " values, got " +
                        std::to_string(data_.size()));
  }
}

Tensor Tensor::vector(std::initializer_list<float> values) {
  return Tensor({values.size()}, std::vector<float>(values));
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<float>> rows) {
  const std::size_t m = rows.size();
  const std::size_t n = m ? rows.begin()->size() : 0;
  std::vector<float> values;
  values.reserve(m * n);
  for (const auto& row : rows) {
    if (row.size() != n) throw ShapeMismatch("ragged matrix literal");
    values.insert(values.end(), row.begin(), row.end());
  }
  return Tensor({m, n}, std::move(values));
}

float& Tensor::at(std::size_t row, std::size_t col) {
  return data_[row * shape_.at(1) + col];
}

float Tensor::at(std::size_t row, std::size_t col) const {
  return data_[row * shape_.at(1) + col];
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_size(shape) != data_.size()) {
    throw ShapeMismatch("cannot reshape " + shape_string(shape_) + " to " +
                        shape_string(shape));
  }
  return Tensor(std::move(shape), data_);
}

void Tensor::fill(float value) { std::fill(data_.begin(), data_.end(), value); }

void check_finite(const Tensor& t, const char* where) {
  for (float v : t.data()) {
    if (!std::isfinite(v)) throw NonFinite(where);
  }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw ShapeMismatch("matmul " + shape_string(a.shape()) + " x " +
                        shape_string(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor c({m, n});
  std::vector<double> row(n);
  for (std::size_t i = 0; i < m; ++i) {
    std::fill(row.begin(), row.end(), 0.0);
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      if (aip == 0.0) continue;
      const float* brow = b.data().data() + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += aip * brow[j];
    }
    for (std::size_t j = 0; j < n; ++j) c[i * n + j] = static_cast<float>(row[j]);
  }
  check_finite(c, "matmul");
  return c;
}

Tensor affine(const Tensor& weight, const Tensor& x, const Tensor& bias) {
  if (weight.rank() != 2 || weight.dim(1) != x.size()) {
    throw ShapeMismatch("affine weight " + shape_string(weight.shape()) +
                        " with input " + shape_string(x.shape()));
  }
  const std::size_t out = weight.dim(0), in = weight.dim(1);
  if (!bias.empty() && bias.size() != out) {
    throw ShapeMismatch("affine bias " + shape_string(bias.shape()));
  }
  Tensor y({out});
  const float* w = weight.data().data();
  const float* xv = x.data().data();
  for (std::size_t i = 0; i < out; ++i) {
    double acc = bias.empty() ? 0.0 : bias[i];
    const float* wrow = w + i * in;
    for (std::size_t j = 0; j < in; ++j) acc += static_cast<double>(wrow[j]) * xv[j];
    y[i] = static_cast<float>(acc);
  }
  check_finite(y, "affine");
  return y;
}

std::size_t conv_out_extent(std::size_t in, std::size_t k, std::size_t stride,
                            std::size_t pad) {
  if (stride < 1) throw InvalidStride("stride must be >= 1");
  if (k > in + 2 * pad) {
    throw ShapeMismatch("kernel extent " + std::to_string(k) +
                        " exceeds padded input " + std::to_string(in + 2 * pad));
  }
  return (in + 2 * pad - k) / stride + 1;
}

Tensor conv2d(const Tensor& x, const Tensor& kernel, std::size_t stride,
              std::size_t pad, const Tensor& bias) {
  if (x.rank() != 3 || kernel.rank() != 4 || kernel.dim(1) != x.dim(0)) {
    throw ShapeMismatch("conv2d input " + shape_string(x.shape()) +
                        " kernel " + shape_string(kernel.shape()));
  }
  const std::size_t C = x.dim(0), H = x.dim(1), W = x.dim(2);
  const std::size_t F = kernel.dim(0), KH = kernel.dim(2), KW = kernel.dim(3);
  const std::size_t OH = conv_out_extent(H, KH, stride, pad);
  const std::size_t OW = conv_out_extent(W, KW, stride, pad);
  if (!bias.empty() && bias.size() != F) {
    throw ShapeMismatch("conv2d bias " + shape_string(bias.shape()));
  }
  Tensor y({F, OH, OW});
  for (std::size_t f = 0; f < F; ++f) {
    for (std::size_t oy = 0; oy < OH; ++oy) {
      for (std::size_t ox = 0; ox < OW; ++ox) {
        double acc = bias.empty() ? 0.0 : bias[f];
        for (std::size_t c = 0; c < C; ++c) {
          for (std::size_t ky = 0; ky < KH; ++ky) {
            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride + ky) -
                                      static_cast<std::ptrdiff_t>(pad);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(H)) continue;
            for (std::size_t kx = 0; kx < KW; ++kx) {
              const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * stride + kx) -
                                        static_cast<std::ptrdiff_t>(pad);
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(W)) continue;
              acc += static_cast<double>(kernel[((f * C + c) * KH + ky) * KW + kx]) *
                     x[(c * H + iy) * W + ix];
            }
          }
        }
        y[(f * OH + oy) * OW + ox] = static_cast<float>(acc);
      }
    }
  }
  check_finite(y, "conv2d");
  return y;
}

Tensor conv2d_input_grad(const Tensor& grad_out, const Tensor& kernel,
                         const Shape& input_shape, std::size_t stride,
                         std::size_t pad) {
  const std::size_t C = input_shape.at(0), H = input_shape.at(1), W = input_shape.at(2);
  const std::size_t F = kernel.dim(0), KH = kernel.dim(2), KW = kernel.dim(3);
  const std::size_t OH = grad_out.dim(1), OW = grad_out.dim(2);
  std::vector<double> acc(C * H * W, 0.0);
  for (std::size_t f = 0; f < F; ++f) {
    for (std::size_t oy = 0; oy < OH; ++oy) {
      for (std::size_t ox = 0; ox < OW; ++ox) {
        const double g = grad_out[(f * OH + oy) * OW + ox];
        if (g == 0.0) continue;
        for (std::size_t c = 0; c < C; ++c) {
          for (std::size_t ky = 0; ky < KH; ++ky) {
            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride + ky) -
                                      static_cast<std::ptrdiff_t>(pad);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(H)) continue;
            for (std::size_t kx = 0; kx < KW; ++kx) {
              const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * stride + kx) -
                                        static_cast<std::ptrdiff_t>(pad);
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(W)) continue;
              acc[(c * H + iy) * W + ix] +=
                  g * kernel[((f * C + c) * KH + ky) * KW + kx];
            }
          }
        }
      }
    }
  }
  return Tensor(input_shape, std::vector<float>(acc.begin(), acc.end()));
}

Tensor conv2d_kernel_grad(const Tensor& grad_out, const Tensor& x,
                          const Shape& kernel_shape, std::size_t stride,
                          std::size_t pad) {
  const std::size_t C = x.dim(0), H = x.dim(1), W = x.dim(2);
  const std::size_t F = kernel_shape.at(0), KH = kernel_shape.at(2), KW = kernel_shape.at(3);
  const std::size_t OH = grad_out.dim(1), OW = grad_out.dim(2);
  std::vector<double> acc(shape_size(kernel_shape), 0.0);
  for (std::size_t f = 0; f < F; ++f) {
    for (std::size_t oy = 0; oy < OH; ++oy) {
      for (std::size_t ox = 0; ox < OW; ++ox) {
        const double g = grad_out[(f * OH + oy) * OW + ox];
        if (g == 0.0) continue;
        for (std::size_t c = 0; c < C; ++c) {
          for (std::size_t ky = 0; ky < KH; ++ky) {
            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride + ky) -
                                      static_cast<std::ptrdiff_t>(pad);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(H)) continue;
            for (std::size_t kx = 0; kx < KW; ++kx) {
              const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * stride + kx) -
                                        static_cast<std::ptrdiff_t>(pad);
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(W)) continue;
              acc[((f * C + c) * KH + ky) * KW + kx] += g * x[(c * H + iy) * W + ix];
            }
          }
        }
      }
    }
  }
  return Tensor(kernel_shape, std::vector<float>(acc.begin(), acc.end()));
}

Tensor avgpool2d(const Tensor& x, std::size_t window) {
  if (x.rank() != 3 || window < 1 || x.dim(1) % window || x.dim(2) % window) {
    throw ShapeMismatch("avgpool2d window " + std::to_string(window) +
                        " over " + shape_string(x.shape()));
  }
  const std::size_t C = x.dim(0), H = x.dim(1), W = x.dim(2);
  const std::size_t OH = H / window, OW = W / window;
  const double inv = 1.0 / static_cast<double>(window * window);
  Tensor y({C, OH, OW});
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t oy = 0; oy < OH; ++oy) {
      for (std::size_t ox = 0; ox < OW; ++ox) {
        double acc = 0.0;
        for (std::size_t dy = 0; dy < window; ++dy) {
          for (std::size_t dx = 0; dx < window; ++dx) {
            acc += x[(c * H + oy * window + dy) * W + ox * window + dx];
          }
        }
        y[(c * OH + oy) * OW + ox] = static_cast<float>(acc * inv);
      }
    }
  }
  return y;
}

Tensor avgpool2d_grad(const Tensor& grad_out, const Shape& input_shape,
                      std::size_t window) {
  const std::size_t C = input_shape.at(0), H = input_shape.at(1), W = input_shape.at(2);
  const std::size_t OH = H / window, OW = W / window;
  const float inv = 1.0f / static_cast<float>(window * window);
  Tensor g(input_shape);
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t y = 0; y < H; ++y) {
      for (std::size_t x = 0; x < W; ++x) {
        g[(c * H + y) * W + x] = grad_out[(c * OH + y / window) * OW + x / window] * inv;
      }
    }
  }
  return g;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += b[i];
  check_finite(c, "add");
  return c;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  Tensor c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] -= b[i];
  check_finite(c, "sub");
  return c;
}

Tensor scale(const Tensor& a, float s) {
  Tensor c = a;
  for (float& v : c.data()) v *= s;
  check_finite(c, "scale");
  return c;
}

void add_inplace(Tensor& acc, const Tensor& b) {
  if (acc.empty()) {
    acc = b;
    return;
  }
  require_same_shape(acc, b, "add_inplace");
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += b[i];
}

double sum(const Tensor& t) {
  double s = 0.0;
  for (float v : t.data()) s += v;
  return s;
}

double mean(const Tensor& t) {
  return t.empty() ? 0.0 : sum(t) / static_cast<double>(t.size());
}

double stddev(const Tensor& t) {
  if (t.empty()) return 0.0;
  const double mu = mean(t);
  double ss = 0.0;
  for (float v : t.data()) ss += (v - mu) * (v - mu);
  return std::sqrt(ss / static_cast<double>(t.size()));
}

double max_abs(const Tensor& t) {
  double m = 0.0;
  for (float v : t.data()) m = std::max(m, static_cast<double>(std::fabs(v)));
  return m;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::fabs(static_cast<double>(a[i]) - b[i]));
  }
  return m;
}

std::size_t argmax(const Tensor& t) {
  const auto values = t.data();
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) -
                                  values.begin());
}

}  // namespace snnforge
