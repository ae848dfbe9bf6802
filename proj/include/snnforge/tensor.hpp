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

#ifndef SNNFORGE_TENSOR_HPP_
#define SNNFORGE_TENSOR_HPP_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace snnforge {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

// Dense row-major float32 array. The element count always equals the product
// of the extents; every extent is positive.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, float fill = 0.0f);
  Tensor(Shape shape, std::vector<float> values);

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor vector(std::initializer_list<float> values);
  static Tensor matrix(std::initializer_list<std::initializer_list<float>> rows);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }
  const std::vector<float>& values() const { return data_; }

  float& operator[](std::size_t i) { return data_[i]; }
  float operator[](std::size_t i) const { return data_[i]; }

  float& at(std::size_t row, std::size_t col);
  float at(std::size_t row, std::size_t col) const;

  Tensor reshaped(Shape shape) const;
  void fill(float value);

  bool operator==(const Tensor& other) const = default;

 private:
  Shape shape_;
  std::vector<float> data_;
};

// Throws NonFinite naming `where` if any element is NaN or infinite.
void check_finite(const Tensor& t, const char* where);

// c = a * b for a [m x k], b [k x n].
Tensor matmul(const Tensor& a, const Tensor& b);
// y = W x + bias for W [out x in], x with `in` elements; bias may be empty.
Tensor affine(const Tensor& weight, const Tensor& x, const Tensor& bias);
// Cross-correlation of x [C x H x W] with k [F x C x Kh x Kw]; bias is [F]
// or empty.
Tensor conv2d(const Tensor& x, const Tensor& kernel, std::size_t stride,
              std::size_t pad, const Tensor& bias = {});
std::size_t conv_out_extent(std::size_t in, std::size_t k, std::size_t stride,
                            std::size_t pad);
// Gradient of conv2d w.r.t. its input, given the output gradient.
Tensor conv2d_input_grad(const Tensor& grad_out, const Tensor& kernel,
                         const Shape& input_shape, std::size_t stride,
                         std::size_t pad);
// Gradient of conv2d w.r.t. its kernel.
Tensor conv2d_kernel_grad(const Tensor& grad_out, const Tensor& x,
                          const Shape& kernel_shape, std::size_t stride,
                          std::size_t pad);
// Non-overlapping average pooling with window == stride over [C x H x W].
Tensor avgpool2d(const Tensor& x, std::size_t window);
Tensor avgpool2d_grad(const Tensor& grad_out, const Shape& input_shape,
                      std::size_t window);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, float s);
void add_inplace(Tensor& acc, const Tensor& b);

// Reductions accumulate in double and in index order.
double sum(const Tensor& t);
double mean(const Tensor& t);
// Population standard deviation.
double stddev(const Tensor& t);
double max_abs(const Tensor& t);
double max_abs_diff(const Tensor& a, const Tensor& b);
std::size_t argmax(const Tensor& t);

}  // namespace snnforge

#endif  // SNNFORGE_TENSOR_HPP_
