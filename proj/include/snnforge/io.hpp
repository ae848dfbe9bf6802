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

#ifndef SNNFORGE_IO_HPP_
#define SNNFORGE_IO_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "snnforge/dataset.hpp"
#include "snnforge/network.hpp"
#include "snnforge/snn.hpp"

namespace snnforge {

// Model file layout (little-endian throughout):
//   "SNNF" | version (1 byte) | manifest length (u64) | JSON manifest | blob
// The manifest lists layers, activation/threshold parameters and the byte
// offset and shape of every tensor inside the blob of float32 values.
inline constexpr std::uint8_t kModelFormatVersion = 1;

enum class ModelKind { ann, snn };

void save_model(const NetworkDef& net, const std::filesystem::path& path);
void save_model(const SpikingNetwork& net, const std::filesystem::path& path);
std::vector<std::uint8_t> serialize_model(const NetworkDef& net);
std::vector<std::uint8_t> serialize_model(const SpikingNetwork& net);

ModelKind peek_model_kind(const std::filesystem::path& path);
NetworkDef load_ann(const std::filesystem::path& path);
SpikingNetwork load_snn(const std::filesystem::path& path);
NetworkDef deserialize_ann(const std::vector<std::uint8_t>& bytes);
SpikingNetwork deserialize_snn(const std::vector<std::uint8_t>& bytes);

// IDX image (magic 0x00000803, N x H x W ubyte) and label (0x00000801)
// files. Pixels are scaled to [0, 1]; samples have shape [1 x H x W].
Dataset load_idx(const std::filesystem::path& images,
                 const std::filesystem::path& labels);

// One sample per line: label followed by the flattened features. `shape`
// must hold as many elements as there are features; an empty shape means
// [features]. Rank-3 shapes are image data and must lie in [0, 1].
Dataset load_csv(const std::filesystem::path& path, Shape shape = {});

// Deterministic toy datasets with 2-D inputs:
//   blobs    two isotropic Gaussians (sigma 1) centred at -(2,2) and (2,2)
//   spirals  two interleaved spiral arms
//   xor_grid uniform points on [-1,1]^2, label = sign(x) xor sign(y)
Dataset synth(std::string_view name, std::size_t n, std::uint64_t seed);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

}  // namespace snnforge

#endif  // SNNFORGE_IO_HPP_
