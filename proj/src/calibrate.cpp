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

#include "snnforge/calibrate.hpp"

#include <chrono>
#include <cmath>
#include <ostream>

#include "snnforge/convert.hpp"
#include "snnforge/error.hpp"
#include "snnforge/format.hpp"
#include "snnforge/parallel.hpp"

namespace snnforge {

void CalibrationConfig::validate() const {
  if (tau < 1) throw InvalidArgument("tau must be >= 1");
  if (!(val_fraction > 0.0 && val_fraction < 0.5)) {
    throw InvalidArgument("validation fraction must lie in (0, 0.5)");
  }
  if (recalibrate_every < 1) throw InvalidArgument("recalibrate_every must be >= 1");
}

std::pair<Dataset, Dataset> split_validation(const Dataset& data,
                                             double fraction,
                                             std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 0.5)) {
    throw InvalidArgument("validation fraction must lie in (0, 0.5), got " +
                          format_number(fraction));
  }
  auto [train, val] = stratified_split(data, fraction, seed);
  train.provenance += "/train";
  val.provenance += "/val";
  return {std::move(train), std::move(val)};
}

ResidualStats measure_residual(const NetworkDef& ann, const SpikingNetwork& snn,
                               const Dataset& val, int tau) {
  if (tau < 1) throw InvalidArgument("tau must be >= 1");
  if (val.empty()) throw InvalidArgument("empty validation set");
  const std::size_t layers = ann.activation_count();
  if (snn.if_count() != layers) {
    throw ShapeMismatch("ANN has " + std::to_string(layers) +
                        " activation layers, SNN has " + std::to_string(snn.if_count()));
  }
  // residuals[sample][layer]
  std::vector<std::vector<Tensor>> residuals(val.size());
  parallel_chunks(val.size(), [&](std::size_t, std::size_t begin, std::size_t end) {
    SpikingNetwork local = snn;
    for (std::size_t i = begin; i < end; ++i) {
      const ForwardTrace a = ann_forward(ann, val.samples[i].x);
      const SnnTrace s = snn_forward(local, val.samples[i].x, tau);
      for (std::size_t l = 0; l < layers; ++l) {
        residuals[i].push_back(sub(s.phi[l], a.activations[l]));
      }
    }
  });
  ResidualStats stats;
  stats.layers.resize(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    LayerResidual& r = stats.layers[l];
    double total = 0.0;
    for (const auto& per_sample : residuals) {
      total += sum(per_sample[l]);
      r.sample_count += per_sample[l].size();
    }
    r.mean = total / static_cast<double>(r.sample_count);
    double ss = 0.0;
    for (const auto& per_sample : residuals) {
      for (float v : per_sample[l].data()) ss += (v - r.mean) * (v - r.mean);
    }
    r.std = std::sqrt(ss / static_cast<double>(r.sample_count));
  }
  return stats;
}

NetworkDef induce_noise(const ResidualStats& stats, NetworkDef ann) {
  const std::vector<std::size_t> acts = ann.activation_indices();
  if (stats.layers.size() != acts.size()) {
    throw MissingLayer("residual stats cover " + std::to_string(stats.layers.size()) +
                       " of " + std::to_string(acts.size()) + " activation layers");
  }
  for (std::size_t k = 0; k < acts.size(); ++k) {
    ann.layers[acts[k]].act.delta = static_cast<float>(stats.layers[k].std);
  }
  return ann;
}

std::size_t select_checkpoint(const std::vector<EpochRecord>& history,
                              SelectBy by) {
  if (history.empty()) throw InvalidArgument("empty training history");
  BestTracker tracker;
  std::size_t best = 0;
  for (std::size_t i = 0; i < history.size(); ++i) {
    const double score =
        by == SelectBy::snn_accuracy ? history[i].snn_acc : history[i].ann_acc;
    if (tracker.offer(score)) best = i;
  }
  return best;
}

namespace {

std::vector<double> current_deltas(const NetworkDef& net) {
  std::vector<double> d;
  for (std::size_t i : net.activation_indices()) d.push_back(net.layers[i].act.delta);
  return d;
}

}  // namespace

TrainResult train_with_compensation(const Dataset& train, const Dataset& test,
                                    NetworkDef init, const TrainConfig& cfg,
                                    const CalibrationConfig& cal,
                                    const EpochCallback& on_epoch) {
  cfg.validate();
  cal.validate();
  init.validate();
  auto [fit, val] = split_validation(train, cal.val_fraction, cfg.seed);

  NetworkDef net = std::move(init);
  for (std::size_t i : net.activation_indices()) net.layers[i].act.delta = 0.0f;
  SgdOptimizer opt(net);

  TrainResult result;
  BestTracker best_ann, best_snn;
  for (int e = 0; e < cfg.epochs; ++e) {
    EpochRecord rec;
    rec.epoch = e + 1;
    rec.delta = current_deltas(net);

    const auto t0 = std::chrono::steady_clock::now();
    const EpochStats stats = train_epoch(net, opt, fit, cfg, e);
    SpikingNetwork snn = convert(net);
    if (cal.enabled && (e + 1) % cal.recalibrate_every == 0) {
      const ResidualStats residual = measure_residual(net, snn, val, cal.tau);
      net = induce_noise(residual, std::move(net));
      for (const LayerResidual& r : residual.layers) rec.measured_std.push_back(r.std);
    }
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    rec.train_loss = stats.loss;
    rec.train_acc = stats.accuracy;
    rec.ann_acc = evaluate_ann(net, test);
    rec.snn_acc = evaluate_snn(snn, test, cal.tau);

    if (best_ann.offer(rec.ann_acc)) {
      result.best_ann = net;
      result.best_ann_epoch = rec.epoch;
    }
    if (best_snn.offer(rec.snn_acc)) {
      result.best_snn = snn;
      result.best_snn_source = net;
      result.best_snn_epoch = rec.epoch;
    }
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  result.final_ann = std::move(net);
  return result;
}

void write_history_csv(std::ostream& out, const std::vector<EpochRecord>& history) {
  const std::size_t layers = history.empty() ? 0 : history.front().delta.size();
  out << "epoch,ann_acc,snn_acc";
  for (std::size_t l = 0; l < layers; ++l) out << ",delta_" << l + 1;
  out << ",epoch_wall_seconds\n";
  for (const EpochRecord& r : history) {
    out << r.epoch << ',' << format_number(r.ann_acc) << ',' << format_number(r.snn_acc);
    for (double d : r.delta) out << ',' << format_number(d);
    out << ',' << format_number(r.wall_seconds) << '\n';
  }
}

}  // namespace snnforge
