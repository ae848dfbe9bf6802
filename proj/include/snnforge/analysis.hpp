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

#ifndef SNNFORGE_ANALYSIS_HPP_
#define SNNFORGE_ANALYSIS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "snnforge/calibrate.hpp"
#include "snnforge/dataset.hpp"
#include "snnforge/network.hpp"
#include "snnforge/random.hpp"
#include "snnforge/snn.hpp"

namespace snnforge {

// Per activation layer, two views of the ANN/SNN gap:
//   stochastic: W phi^{l-1}(T) - (v(T) - v(0)) / T - NQ(z^l), with fresh
//               noise at each layer's delta
//   observable: phi^l(T) - a^l with a^l the noise-free ANN activation
struct ConversionError {
  std::vector<Tensor> stochastic;
  std::vector<Tensor> observable;
};

ConversionError conversion_error(const NetworkDef& ann, const SpikingNetwork& snn,
                                 const Tensor& x, int T, RandomSource& rs);

struct Theorem1Result {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;

  // |mean| <= k * std_error
  bool within(double k) const;
};

// Single IF neuron per sample, z ~ U(0, theta), v(0) = theta / 2:
// eps = simulated phi(z, T) - NQ(z; lambda = theta, L, delta).
// Requires n_samples >= 10^4.
Theorem1Result theorem1_mc(float theta, int levels, int T, float delta,
                           std::size_t n_samples, RandomSource& rs);

struct Theorem1Row {
  int T = 0;
  int levels = 0;
  double delta = 0.0;
  Theorem1Result result;
};

// {T, L} in {1,2,4,8}^2 x delta in {0, 0.1, 0.5}: 48 rows, each on its own
// stream keyed by (T, L, delta index).
std::vector<Theorem1Row> theorem1_grid(std::size_t n_samples, std::uint64_t seed,
                                       float theta = 1.0f);
void write_theorem1_csv(std::ostream& out, const std::vector<Theorem1Row>& rows,
                        double k = 4.0);

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::uint64_t> counts;

  bool operator==(const Histogram&) const = default;
};

inline constexpr std::size_t kHistogramBins = 101;

// Uniform bins over [-3 sigma, 3 sigma]; values outside land in the edge
// bins. sigma == 0 puts everything in the centre bin.
Histogram residual_histogram(const std::vector<double>& values, double sigma,
                             std::size_t bins = kHistogramBins);

struct LayerErrorReport {
  std::size_t layer = 0;  // 1-based activation layer
  std::size_t element_count = 0;
  // Share of ANN pre-activations above lambda.
  double clip_fraction = 0.0;
  // mean |clip(z, 0, lambda) - QCFS(z)|
  double quant_grid_deviation = 0.0;
  double residual_mean = 0.0;
  double residual_std = 0.0;
  double conversion_error_mean = 0.0;
  double conversion_error_std = 0.0;
  Histogram residual_hist;

  bool operator==(const LayerErrorReport&) const = default;
};

struct ErrorReport {
  int T = 0;
  std::vector<LayerErrorReport> layers;

  bool operator==(const ErrorReport&) const = default;
};

ErrorReport error_decompose(const NetworkDef& ann, const SpikingNetwork& snn,
                            const Dataset& slice, int T, RandomSource& rs);

enum class ReportFormat { csv, json };

// Column order of the CSV form is fixed; see docs/formats.md.
void emit_report(const ErrorReport& report, const std::filesystem::path& path,
                 ReportFormat format);
void write_report_csv(std::ostream& out, const ErrorReport& report);
void write_report_json(std::ostream& out, const ErrorReport& report);
ErrorReport parse_report(const std::filesystem::path& path, ReportFormat format);

// layer,neuron,phi,spike_count,v_final for every integrate-and-fire neuron.
void write_trace_csv(std::ostream& out, const SnnTrace& trace);

struct OverheadResult {
  double calibrated_seconds = 0.0;  // mean per-epoch wall time
  double baseline_seconds = 0.0;
  double ratio() const { return calibrated_seconds / baseline_seconds; }
};

// Runs the same training twice, with per-epoch calibration and with delta
// pinned to zero, and compares mean epoch wall time.
OverheadResult measure_overhead(const Dataset& train, const Dataset& test,
                                const NetworkDef& init, const TrainConfig& cfg,
                                CalibrationConfig cal);

}  // namespace snnforge

#endif  // SNNFORGE_ANALYSIS_HPP_
