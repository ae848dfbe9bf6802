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

#include "snnforge/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "snnforge/error.hpp"
#include "snnforge/format.hpp"
#include "snnforge/random.hpp"

namespace snnforge {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'S', 'N', 'N', 'F'};
constexpr std::size_t kHeaderBytes = 4 + 1 + 8;

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

class BlobWriter {
 public:
  json add(const Tensor& t) {
    const std::size_t offset = bytes_.size();
    for (float v : t.data()) {
      const std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
      for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
    }
    return {{"offset", offset}, {"shape", t.shape()}};
  }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

class BlobReader {
 public:
  BlobReader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

  Tensor read(const json& entry) {
    const auto offset = entry.at("offset").get<std::uint64_t>();
    const auto shape = entry.at("shape").get<Shape>();
    if (shape.empty()) throw FormatError("tensor entry with empty shape");
    const std::size_t count = shape_size(shape);
    if (offset % 4 != 0 || offset > size_ || count > (size_ - offset) / 4) {
      throw FormatError("tensor at offset " + std::to_string(offset) + " with shape " +
                        shape_string(shape) + " exceeds blob of " +
                        std::to_string(size_) + " bytes");
    }
    spans_.emplace_back(offset, offset + 4 * count);
    std::vector<float> values(count);
    const std::uint8_t* p = data_ + offset;
    for (std::size_t i = 0; i < count; ++i, p += 4) {
      const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                                 static_cast<std::uint32_t>(p[1]) << 8 |
                                 static_cast<std::uint32_t>(p[2]) << 16 |
                                 static_cast<std::uint32_t>(p[3]) << 24;
      values[i] = std::bit_cast<float>(bits);
    }
    return Tensor(shape, std::move(values));
  }

  void check_no_overlap() {
    std::sort(spans_.begin(), spans_.end());
    for (std::size_t i = 1; i < spans_.size(); ++i) {
      if (spans_[i].first < spans_[i - 1].second) throw FormatError("overlapping tensor blobs");
    }
  }

 private:
  const std::uint8_t* data_;
  std::size_t size_;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> spans_;
};

json meta_to_json(const NetworkMeta& meta) {
  return {{"dataset", meta.dataset},
          {"input_shape", meta.input_shape},
          {"class_count", meta.class_count}};
}

NetworkMeta meta_from_json(const json& j) {
  NetworkMeta m;
  m.dataset = j.at("dataset").get<std::string>();
  m.input_shape = j.at("input_shape").get<Shape>();
  m.class_count = j.at("class_count").get<std::size_t>();
  return m;
}

json linear_to_json(const LayerSpec& l, BlobWriter& blob) {
  json j{{"kind", std::string(to_string(l.kind))}};
  switch (l.kind) {
    case LayerKind::conv2d:
      j["stride"] = l.stride;
      j["pad"] = l.pad;
      [[fallthrough]];
    case LayerKind::dense:
      j["weight"] = blob.add(l.weight);
      if (!l.bias.empty()) j["bias"] = blob.add(l.bias);
      break;
    case LayerKind::avgpool:
      j["window"] = l.window;
      break;
    case LayerKind::flatten:
    case LayerKind::activation:
      break;
  }
  return j;
}

LayerSpec linear_from_json(const json& j, LayerKind kind, BlobReader& blob) {
  LayerSpec l;
  l.kind = kind;
  switch (kind) {
    case LayerKind::conv2d:
      l.stride = j.at("stride").get<std::size_t>();
      l.pad = j.at("pad").get<std::size_t>();
      [[fallthrough]];
    case LayerKind::dense:
      l.weight = blob.read(j.at("weight"));
      if (j.contains("bias")) l.bias = blob.read(j.at("bias"));
      break;
    case LayerKind::avgpool:
      l.window = j.at("window").get<std::size_t>();
      break;
    case LayerKind::flatten:
    case LayerKind::activation:
      break;
  }
  return l;
}

std::vector<std::uint8_t> assemble(const json& manifest_body, const BlobWriter& blob) {
  json manifest = manifest_body;
  manifest["blob_bytes"] = blob.bytes().size();
  const std::string text = manifest.dump();
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  out.push_back(kModelFormatVersion);
  put_u64(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  out.insert(out.end(), blob.bytes().begin(), blob.bytes().end());
  return out;
}

struct ParsedFile {
  json manifest;
  const std::uint8_t* blob = nullptr;
  std::size_t blob_size = 0;
};

ParsedFile parse_file(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kHeaderBytes || !std::equal(kMagic, kMagic + 4, bytes.begin())) {
    throw FormatError("bad magic; not an SNNF model file");
  }
  if (bytes[4] != kModelFormatVersion) {
    throw FormatError("unsupported model format version " + std::to_string(bytes[4]));
  }
  const std::uint64_t manifest_len = get_u64(bytes.data() + 5);
  if (manifest_len > bytes.size() - kHeaderBytes) throw FormatError("truncated manifest");
  ParsedFile f;
  try {
    f.manifest = json::parse(bytes.begin() + kHeaderBytes,
                             bytes.begin() + kHeaderBytes + static_cast<std::ptrdiff_t>(manifest_len));
  } catch (const json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
  const std::size_t blob_start = kHeaderBytes + manifest_len;
  const auto declared = f.manifest.at("blob_bytes").get<std::uint64_t>();
  if (bytes.size() - blob_start != declared) {
    throw FormatError("blob holds " + std::to_string(bytes.size() - blob_start) +
                      " bytes, manifest declares " + std::to_string(declared));
  }
  f.blob = bytes.data() + blob_start;
  f.blob_size = declared;
  return f;
}

template <typename Fn>
auto with_format_errors(Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const NetworkDef& net) {
  BlobWriter blob;
  json layers = json::array();
  for (const LayerSpec& l : net.layers) {
    if (l.kind == LayerKind::activation) {
      layers.push_back({{"kind", "activation"},
                        {"lambda", l.act.lambda},
                        {"L", l.act.levels},
                        {"delta", l.act.delta}});
    } else {
      layers.push_back(linear_to_json(l, blob));
    }
  }
  return assemble({{"kind", "ann"}, {"metadata", meta_to_json(net.meta)}, {"layers", layers}},
                  blob);
}

std::vector<std::uint8_t> serialize_model(const SpikingNetwork& net) {
  BlobWriter blob;
  json layers = json::array();
  for (const SnnLayer& l : net.layers) {
    if (l.kind == SnnLayer::Kind::integrate_fire) {
      layers.push_back({{"kind", "integrate_fire"}, {"theta", l.theta}});
    } else {
      layers.push_back(linear_to_json(l.linear, blob));
    }
  }
  return assemble({{"kind", "snn"}, {"metadata", meta_to_json(net.meta)}, {"layers", layers}},
                  blob);
}

NetworkDef deserialize_ann(const std::vector<std::uint8_t>& bytes) {
  const ParsedFile f = parse_file(bytes);
  return with_format_errors([&] {
    if (f.manifest.at("kind") != "ann") throw FormatError("model file holds an SNN, not an ANN");
    BlobReader blob(f.blob, f.blob_size);
    NetworkDef net;
    net.meta = meta_from_json(f.manifest.at("metadata"));
    for (const json& j : f.manifest.at("layers")) {
      const LayerKind kind = parse_layer_kind(j.at("kind").get<std::string>());
      if (kind == LayerKind::activation) {
        net.layers.push_back(LayerSpec::activation(QuantActParams{
            j.at("lambda").get<float>(), j.at("L").get<int>(), j.at("delta").get<float>()}));
      } else {
        net.layers.push_back(linear_from_json(j, kind, blob));
      }
    }
    blob.check_no_overlap();
    net.validate();
    return net;
  });
}

SpikingNetwork deserialize_snn(const std::vector<std::uint8_t>& bytes) {
  const ParsedFile f = parse_file(bytes);
  return with_format_errors([&] {
    if (f.manifest.at("kind") != "snn") throw FormatError("model file holds an ANN, not an SNN");
    BlobReader blob(f.blob, f.blob_size);
    SpikingNetwork net;
    net.meta = meta_from_json(f.manifest.at("metadata"));
    for (const json& j : f.manifest.at("layers")) {
      const std::string kind = j.at("kind").get<std::string>();
      SnnLayer l;
      if (kind == "integrate_fire") {
        l.kind = SnnLayer::Kind::integrate_fire;
        l.theta = j.at("theta").get<float>();
        if (!(l.theta > 0.0f)) throw FormatError("threshold must be positive");
      } else {
        l.linear = linear_from_json(j, parse_layer_kind(kind), blob);
      }
      net.layers.push_back(std::move(l));
    }
    blob.check_no_overlap();
    net.reset();
    return net;
  });
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

void save_model(const NetworkDef& net, const std::filesystem::path& path) {
  write_file(path, serialize_model(net));
}

void save_model(const SpikingNetwork& net, const std::filesystem::path& path) {
  write_file(path, serialize_model(net));
}

ModelKind peek_model_kind(const std::filesystem::path& path) {
  const ParsedFile f = parse_file(read_file(path));
  const std::string kind = f.manifest.value("kind", "");
  if (kind == "ann") return ModelKind::ann;
  if (kind == "snn") return ModelKind::snn;
  throw FormatError("unknown model kind '" + kind + "'");
}

NetworkDef load_ann(const std::filesystem::path& path) {
  return deserialize_ann(read_file(path));
}

SpikingNetwork load_snn(const std::filesystem::path& path) {
  return deserialize_snn(read_file(path));
}

namespace {

std::uint32_t get_be32(const std::vector<std::uint8_t>& b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) << 24 | static_cast<std::uint32_t>(b[at + 1]) << 16 |
         static_cast<std::uint32_t>(b[at + 2]) << 8 | static_cast<std::uint32_t>(b[at + 3]);
}

}  // namespace

Dataset load_idx(const std::filesystem::path& images,
                 const std::filesystem::path& labels) {
  const std::vector<std::uint8_t> img = read_file(images);
  const std::vector<std::uint8_t> lab = read_file(labels);
  if (img.size() < 16 || get_be32(img, 0) != 0x00000803) {
    throw FormatError(images.string() + ": not an IDX image file");
  }
  if (lab.size() < 8 || get_be32(lab, 0) != 0x00000801) {
    throw FormatError(labels.string() + ": not an IDX label file");
  }
  const std::size_t n = get_be32(img, 4), rows = get_be32(img, 8), cols = get_be32(img, 12);
  const std::size_t n_labels = get_be32(lab, 4);
  if (n != n_labels) {
    throw CountMismatch(std::to_string(n) + " images vs " + std::to_string(n_labels) + " labels");
  }
  if (n == 0 || rows == 0 || cols == 0) throw FormatError("IDX file holds no samples");
  if (img.size() != 16 + n * rows * cols) throw FormatError(images.string() + ": size mismatch");
  if (lab.size() != 8 + n) throw FormatError(labels.string() + ": size mismatch");

  Dataset ds;
  ds.input_shape = {1, rows, cols};
  ds.provenance = "idx";
  std::size_t max_label = 0;
  for (std::size_t i = 0; i < n; ++i) {
    Tensor x(ds.input_shape);
    for (std::size_t p = 0; p < rows * cols; ++p) {
      x[p] = static_cast<float>(img[16 + i * rows * cols + p]) / 255.0f;
    }
    ds.samples.push_back({std::move(x), lab[8 + i]});
    max_label = std::max<std::size_t>(max_label, lab[8 + i]);
  }
  ds.class_count = max_label + 1;
  return ds;
}

Dataset load_csv(const std::filesystem::path& path, Shape shape) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  Dataset ds;
  ds.provenance = "csv";
  const bool image = shape.size() == 3;
  std::size_t max_label = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split(line, ',');
    if (fields.size() < 2) throw FormatError(path.string() + ":" + std::to_string(line_no) + ": too few fields");
    const double label = parse_number(fields[0]);
    if (label < 0 || label != std::floor(label)) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": bad label");
    }
    if (ds.input_shape.empty()) {
      ds.input_shape = shape.empty() ? Shape{fields.size() - 1} : shape;
      if (shape_size(ds.input_shape) != fields.size() - 1) {
        throw FormatError(path.string() + ": shape " + shape_string(ds.input_shape) +
                          " does not match " + std::to_string(fields.size() - 1) + " features");
      }
    }
    if (fields.size() - 1 != shape_size(ds.input_shape)) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": feature count changed");
    }
    Tensor x(ds.input_shape);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = static_cast<float>(parse_number(fields[i + 1]));
      if (image && !(x[i] >= 0.0f && x[i] <= 1.0f)) {
        throw FormatError(path.string() + ":" + std::to_string(line_no) +
                          ": image value outside [0, 1]");
      }
    }
    check_finite(x, "csv sample");
    const auto lbl = static_cast<std::size_t>(label);
    max_label = std::max(max_label, lbl);
    ds.samples.push_back({std::move(x), lbl});
  }
  if (ds.samples.empty()) throw FormatError(path.string() + ": no samples");
  ds.class_count = max_label + 1;
  return ds;
}

Dataset synth(std::string_view name, std::size_t n, std::uint64_t seed) {
  constexpr std::size_t kClasses = 2;
  if (n < kClasses) throw InvalidArgument("synthetic dataset needs n >= 2");
  Dataset ds;
  ds.class_count = kClasses;
  ds.input_shape = {2};
  ds.provenance = "synthetic:" + std::string(name) + ":" + std::to_string(seed);
  RandomSource rs(seed, label_key(name));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t label = i % kClasses;
    float x = 0.0f, y = 0.0f;
    std::size_t out_label = label;
    if (name == "blobs") {
      const float c = label == 0 ? -2.0f : 2.0f;
      x = c + static_cast<float>(rs.gaussian());
      y = c + static_cast<float>(rs.gaussian());
    } else if (name == "spirals") {
      const double t = rs.uniform(0.25, 1.0);
      const double angle = 2.5 * std::numbers::pi * t + static_cast<double>(label) * std::numbers::pi;
      x = static_cast<float>(t * std::cos(angle) + 0.03 * rs.gaussian());
      y = static_cast<float>(t * std::sin(angle) + 0.03 * rs.gaussian());
    } else if (name == "xor_grid") {
      x = static_cast<float>(rs.uniform(-1.0, 1.0));
      y = static_cast<float>(rs.uniform(-1.0, 1.0));
      out_label = (x > 0.0f) != (y > 0.0f) ? 1 : 0;
    } else {
      throw InvalidArgument("unknown synthetic dataset '" + std::string(name) +
                            "' (blobs, spirals, xor_grid)");
    }
    ds.samples.push_back({Tensor({2}, {x, y}), out_label});
  }
  return ds;
}

}  // namespace snnforge
