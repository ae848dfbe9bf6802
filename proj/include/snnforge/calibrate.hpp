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

#ifndef SNNFORGE_CALIBRATE_HPP_
#define SNNFORGE_CALIBRATE_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "snnforge/dataset.hpp"
#include "snnforge/network.hpp"
#include "snnforge/snn.hpp"

namespace snnforge {

struct LayerResidual {
  double mean = 0.0;
  // Population standard deviation.
  double std = 0.0;
  std::size_t sample_count = 0;
};

// Statistics of phi^l(tau) - a^l pooled over every element of every
// validation sample, one entry per activation layer.
struct ResidualStats {
  std::vector<LayerResidual> layers;
};

struct CalibrationConfig {
  int tau = 4;
  double val_fraction = 0.05;
  int recalibrate_every = 1;
  // false pins delta to zero (plain QCFS training) and skips measurement.
  bool enabled = true;

  void validate() const;
};

// Stratified, seeded split of the training data into (train, validation).
// fraction must lie in (0, 0.5).
std::pair<Dataset, Dataset> split_validation(const Dataset& data,
                                             double fraction,
                                             std::uint64_t seed);

// Pools phi^l(tau) - a^l over the validation set with the ANN in eval mode,
// so the result does not depend on the deltas carried by `ann`.
ResidualStats measure_residual(const NetworkDef& ann, const SpikingNetwork& snn,
                               const Dataset& val, int tau);

// delta^l <- std_l for every activation layer. Throws MissingLayer when the
// stats do not cover every activation layer.
NetworkDef induce_noise(const ResidualStats& stats, NetworkDef ann);

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_acc = 0.0;
  double ann_acc = 0.0;
  double snn_acc = 0.0;
  // Deltas used while training this epoch.
  std::vector<double> delta;
  // Residual stds measured on the validation set after this epoch; empty
  // when no measurement ran.
  std::vector<double> measured_std;
  double wall_seconds = 0.0;
};

// Keeps the first strictly best score seen.
class BestTracker {
 public:
  bool offer(double score) {
    if (!best_ || score > *best_) {
      best_ = score;
      return true;
    }
    return false;
  }
  std::optional<double> best() const { return best_; }

 private:
  std::optional<double> best_;
};

enum class SelectBy { ann_accuracy, snn_accuracy };

// Index into `history` of the checkpoint a training run keeps under `by`.
std::size_t select_checkpoint(const std::vector<EpochRecord>& history,
                              SelectBy by);

struct TrainResult {
  NetworkDef best_ann;  // highest ANN test accuracy
  int best_ann_epoch = 0;
  SpikingNetwork best_snn;  // highest SNN test accuracy at T = tau
  NetworkDef best_snn_source;
  int best_snn_epoch = 0;
  NetworkDef final_ann;
  std::vector<EpochRecord> history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Layer-wise error-compensating training. Epoch 1 runs with delta = 0.
// After every epoch the network is converted, residuals are measured at
// T = tau on a validation split held out of `train` once before training,
// and the measured stds become the deltas of the next epoch. The converted
// SNN is scored on `test` at T = tau and the best-scoring epoch is kept.
TrainResult train_with_compensation(const Dataset& train, const Dataset& test,
                                    NetworkDef init, const TrainConfig& cfg,
                                    const CalibrationConfig& cal,
                                    const EpochCallback& on_epoch = {});

// epoch, ann_acc, snn_acc, delta_1..delta_n, epoch_wall_seconds
void write_history_csv(std::ostream& out, const std::vector<EpochRecord>& history);

}  // namespace snnforge

#endif  // SNNFORGE_CALIBRATE_HPP_
