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

#include "snnforge/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "snnforge/activation.hpp"
#include "snnforge/error.hpp"
#include "snnforge/format.hpp"

namespace snnforge {

ConversionError conversion_error(const NetworkDef& ann, const SpikingNetwork& snn,
                                 const Tensor& x, int T, RandomSource& rs) {
  const std::vector<std::size_t> acts = ann.activation_indices();
  if (snn.if_count() != acts.size()) {
    throw ShapeMismatch("ANN/SNN layer counts differ");
  }
  const ForwardTrace a = ann_forward(ann, x);
  SpikingNetwork local = snn;
  const SnnTrace s = snn_forward(local, x, T);
  ConversionError err;
  for (std::size_t k = 0; k < acts.size(); ++k) {
    // W phi^{l-1} - (v(T) - v(0)) / T equals phi^l by the conservation
    // identity (checked by eq5_audit); using phi^l directly keeps the error
    // free of the membrane's accumulated rounding.
    const Tensor nq = nq_forward(a.preactivations[k], ann.layers[acts[k]].act, rs);
    if (s.phi[k].shape() != nq.shape()) throw ShapeMismatch("ANN/SNN layer shapes differ");
    err.stochastic.push_back(sub(s.phi[k], nq));
    err.observable.push_back(sub(s.phi[k], a.activations[k]));
  }
  return err;
}

bool Theorem1Result::within(double k) const {
  return std::fabs(mean) <= k * std_error;
}

Theorem1Result theorem1_mc(float theta, int levels, int T, float delta,
                           std::size_t n_samples, RandomSource& rs) {
  if (n_samples < 10000) throw InvalidArgument("theorem1_mc needs >= 10^4 samples");
  if (!(theta > 0.0f)) throw InvalidArgument("theta must be > 0");
  const Shape shape{n_samples};
  Tensor z(shape);
  for (float& v : z.data()) {
    // Uniform on [0, theta); float rounding may land exactly on theta.
    v = std::min(static_cast<float>(rs.uniform() * theta), std::nextafter(theta, 0.0f));
  }

  IFLayerState neuron(shape, theta, theta / 2.0f);
  PhiRecord record(shape);
  for (int t = 0; t < T; ++t) record.record(if_step(neuron, z), theta);
  const Tensor phi = record.phi();
  const Tensor nq = nq_forward(z, QuantActParams{theta, levels, delta}, rs);

  const double n = static_cast<double>(n_samples);
  double total = 0.0;
  std::vector<double> eps(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    eps[i] = static_cast<double>(phi[i]) - nq[i];
    total += eps[i];
  }
  Theorem1Result r;
  r.samples = n_samples;
  r.mean = total / n;
  double ss = 0.0;
  for (double e : eps) ss += (e - r.mean) * (e - r.mean);
  r.std_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return r;
}

std::vector<Theorem1Row> theorem1_grid(std::size_t n_samples, std::uint64_t seed,
                                       float theta) {
  const int steps[] = {1, 2, 4, 8};
  const double deltas[] = {0.0, 0.1, 0.5};
  std::vector<Theorem1Row> rows;
  for (int T : steps) {
    for (int L : steps) {
      for (std::size_t d = 0; d < 3; ++d) {
        RandomSource rs(seed, derive_key({label_key("theorem1"),
                                          static_cast<std::uint64_t>(T),
                                          static_cast<std::uint64_t>(L), d}));
        rows.push_back({T, L, deltas[d],
                        theorem1_mc(theta, L, T, static_cast<float>(deltas[d]), n_samples, rs)});
      }
    }
  }
  return rows;
}

void write_theorem1_csv(std::ostream& out, const std::vector<Theorem1Row>& rows,
                        double k) {
  out << "T,L,delta,n,mean_eps,stderr,pass\n";
  for (const Theorem1Row& r : rows) {
    out << r.T << ',' << r.levels << ',' << format_number(r.delta) << ','
        << r.result.samples << ',' << format_number(r.result.mean) << ','
        << format_number(r.result.std_error) << ',' << (r.result.within(k) ? 1 : 0)
        << '\n';
  }
}

Histogram residual_histogram(const std::vector<double>& values, double sigma,
                             std::size_t bins) {
  if (bins < 1) throw InvalidArgument("histogram needs >= 1 bin");
  Histogram h;
  if (sigma > 0.0) {
    h.lo = -3.0 * sigma;
    h.hi = 3.0 * sigma;
  }
  h.counts.assign(bins, 0);
  const std::size_t centre = bins / 2;
  for (double v : values) {
    if (!(sigma > 0.0)) {
      ++h.counts[centre];
      continue;
    }
    const double pos = (v - h.lo) / (h.hi - h.lo) * static_cast<double>(bins);
    const double idx = std::clamp(std::floor(pos), 0.0, static_cast<double>(bins - 1));
    ++h.counts[static_cast<std::size_t>(idx)];
  }
  return h;
}

namespace {

struct Moments {
  double mean = 0.0;
  double std = 0.0;
};

Moments moments(const std::vector<double>& v) {
  if (v.empty()) return {};
  const double mu = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return {mu, std::sqrt(ss / static_cast<double>(v.size()))};
}

}  // namespace

ErrorReport error_decompose(const NetworkDef& ann, const SpikingNetwork& snn,
                            const Dataset& slice, int T, RandomSource& rs) {
  const std::vector<std::size_t> acts = ann.activation_indices();
  const std::size_t layers = acts.size();
  std::vector<std::vector<double>> residual(layers), stochastic(layers);
  std::vector<double> clipped(layers, 0.0), grid_dev(layers, 0.0);
  std::vector<std::size_t> count(layers, 0);

  for (const Sample& sample : slice.samples) {
    const ForwardTrace a = ann_forward(ann, sample.x);
    const ConversionError err = conversion_error(ann, snn, sample.x, T, rs);
    for (std::size_t k = 0; k < layers; ++k) {
      const QuantActParams& p = ann.layers[acts[k]].act;
      const Tensor& z = a.preactivations[k];
      for (std::size_t i = 0; i < z.size(); ++i) {
        if (z[i] > p.lambda) clipped[k] += 1.0;
        const double continuous = std::clamp(z[i], 0.0f, p.lambda);
        grid_dev[k] += std::fabs(continuous - a.activations[k][i]);
        residual[k].push_back(err.observable[k][i]);
        stochastic[k].push_back(err.stochastic[k][i]);
      }
      count[k] += z.size();
    }
  }

  ErrorReport report;
  report.T = T;
  for (std::size_t k = 0; k < layers; ++k) {
    LayerErrorReport r;
    r.layer = k + 1;
    r.element_count = count[k];
    const double n = count[k] ? static_cast<double>(count[k]) : 1.0;
    r.clip_fraction = clipped[k] / n;
    r.quant_grid_deviation = grid_dev[k] / n;
    const Moments res = moments(residual[k]);
    const Moments eps = moments(stochastic[k]);
    r.residual_mean = res.mean;
    r.residual_std = res.std;
    r.conversion_error_mean = eps.mean;
    r.conversion_error_std = eps.std;
    r.residual_hist = residual_histogram(residual[k], res.std);
    report.layers.push_back(std::move(r));
  }
  return report;
}

namespace {

constexpr const char* kReportHeader =
    "T,layer,element_count,clip_fraction,quant_grid_deviation,residual_mean,"
    "residual_std,conversion_error_mean,conversion_error_std,hist_lo,hist_hi,"
    "hist_bins,hist_counts";

nlohmann::json report_to_json(const ErrorReport& report) {
  nlohmann::json layers = nlohmann::json::array();
  for (const LayerErrorReport& r : report.layers) {
    layers.push_back({{"layer", r.layer},
                      {"element_count", r.element_count},
                      {"clip_fraction", r.clip_fraction},
                      {"quant_grid_deviation", r.quant_grid_deviation},
                      {"residual_mean", r.residual_mean},
                      {"residual_std", r.residual_std},
                      {"conversion_error_mean", r.conversion_error_mean},
                      {"conversion_error_std", r.conversion_error_std},
                      {"histogram",
                       {{"lo", r.residual_hist.lo},
                        {"hi", r.residual_hist.hi},
                        {"counts", r.residual_hist.counts}}}});
  }
  return {{"T", report.T}, {"layers", layers}};
}

ErrorReport report_from_json(const nlohmann::json& j) {
  ErrorReport report;
  report.T = j.at("T").get<int>();
  for (const auto& l : j.at("layers")) {
    LayerErrorReport r;
    r.layer = l.at("layer").get<std::size_t>();
    r.element_count = l.at("element_count").get<std::size_t>();
    r.clip_fraction = l.at("clip_fraction").get<double>();
    r.quant_grid_deviation = l.at("quant_grid_deviation").get<double>();
    r.residual_mean = l.at("residual_mean").get<double>();
    r.residual_std = l.at("residual_std").get<double>();
    r.conversion_error_mean = l.at("conversion_error_mean").get<double>();
    r.conversion_error_std = l.at("conversion_error_std").get<double>();
    const auto& h = l.at("histogram");
    r.residual_hist.lo = h.at("lo").get<double>();
    r.residual_hist.hi = h.at("hi").get<double>();
    r.residual_hist.counts = h.at("counts").get<std::vector<std::uint64_t>>();
    report.layers.push_back(std::move(r));
  }
  return report;
}

}  // namespace

void write_report_csv(std::ostream& out, const ErrorReport& report) {
  out << kReportHeader << '\n';
  for (const LayerErrorReport& r : report.layers) {
    out << report.T << ',' << r.layer << ',' << r.element_count << ','
        << format_number(r.clip_fraction) << ',' << format_number(r.quant_grid_deviation)
        << ',' << format_number(r.residual_mean) << ',' << format_number(r.residual_std)
        << ',' << format_number(r.conversion_error_mean) << ','
        << format_number(r.conversion_error_std) << ',' << format_number(r.residual_hist.lo)
        << ',' << format_number(r.residual_hist.hi) << ',' << r.residual_hist.counts.size()
        << ',';
    for (std::size_t b = 0; b < r.residual_hist.counts.size(); ++b) {
      if (b) out << ';';
      out << r.residual_hist.counts[b];
    }
    out << '\n';
  }
}

void write_report_json(std::ostream& out, const ErrorReport& report) {
  out << report_to_json(report).dump(2) << '\n';
}

void emit_report(const ErrorReport& report, const std::filesystem::path& path,
                 ReportFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  if (format == ReportFormat::csv) {
    write_report_csv(out, report);
  } else {
    write_report_json(out, report);
  }
  if (!out) throw IoError("write failed: " + path.string());
}

ErrorReport parse_report(const std::filesystem::path& path, ReportFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  if (format == ReportFormat::json) {
    try {
      return report_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() + ": " + e.what());
    }
  }
  std::string line;
  if (!std::getline(in, line) || line != kReportHeader) {
    throw FormatError(path.string() + ": unexpected report header");
  }
  ErrorReport report;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split(line, ',');
    if (f.size() != 13) throw FormatError("report row has " + std::to_string(f.size()) + " fields");
    LayerErrorReport r;
    report.T = static_cast<int>(parse_number(f[0]));
    r.layer = static_cast<std::size_t>(parse_number(f[1]));
    r.element_count = static_cast<std::size_t>(parse_number(f[2]));
    r.clip_fraction = parse_number(f[3]);
    r.quant_grid_deviation = parse_number(f[4]);
    r.residual_mean = parse_number(f[5]);
    r.residual_std = parse_number(f[6]);
    r.conversion_error_mean = parse_number(f[7]);
    r.conversion_error_std = parse_number(f[8]);
    r.residual_hist.lo = parse_number(f[9]);
    r.residual_hist.hi = parse_number(f[10]);
    const std::size_t bins = static_cast<std::size_t>(parse_number(f[11]));
    if (bins) {
      for (const std::string& c : split(f[12], ';')) {
        r.residual_hist.counts.push_back(static_cast<std::uint64_t>(parse_number(c)));
      }
    }
    if (r.residual_hist.counts.size() != bins) throw FormatError("histogram bin count mismatch");
    report.layers.push_back(std::move(r));
  }
  return report;
}

void write_trace_csv(std::ostream& out, const SnnTrace& trace) {
  out << "layer,neuron,phi,spike_count,v_final\n";
  for (std::size_t k = 0; k < trace.phi.size(); ++k) {
    for (std::size_t i = 0; i < trace.phi[k].size(); ++i) {
      out << k + 1 << ',' << i << ',' << format_number(trace.phi[k][i]) << ','
          << trace.spike_counts[k][i] << ',' << format_number(trace.v_final[k][i]) << '\n';
    }
  }
}

OverheadResult measure_overhead(const Dataset& train, const Dataset& test,
                                const NetworkDef& init, const TrainConfig& cfg,
                                CalibrationConfig cal) {
  auto mean_epoch = [](const TrainResult& r) {
    double total = 0.0;
    for (const EpochRecord& e : r.history) total += e.wall_seconds;
    return total / static_cast<double>(r.history.size());
  };
  OverheadResult out;
  cal.enabled = false;
  out.baseline_seconds = mean_epoch(train_with_compensation(train, test, init, cfg, cal));
  cal.enabled = true;
  out.calibrated_seconds = mean_epoch(train_with_compensation(train, test, init, cfg, cal));
  return out;
}

}  // namespace snnforge
