// Copyright 2026 The FedSCA Simulator Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FEDSCA_FED_CLIENT_HPP_
#define FEDSCA_FED_CLIENT_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "fedsca/adapter_net.hpp"
#include "fedsca/datagen.hpp"
#include "fedsca/numerics.hpp"

namespace fedsca {

struct ClientConfig {
  double learning_rate = 1e-4;
  int batch_size = 32;
  int local_epochs = 1;
  double beta = 0.01;
  int low_layers = 1;  // L: adapters 1..L are transmitted and regularized

  void validate(int num_blocks) const;

  friend bool operator==(const ClientConfig&, const ClientConfig&) = default;
};

struct SegMetrics {
  double iou = 0.0;
  double dice = 0.0;
};

/// IoU and Dice of one predicted mask against ground truth. Both empty
/// counts as a perfect match.
SegMetrics mask_metrics(std::span<const std::uint8_t> predicted,
                        std::span<const std::uint8_t> truth);

struct ClientUpdate {
  int client_id = 0;
  int round = 0;
  FlatParams low_params;  // layers 1..L only
  int num_samples = 0;    // n_i
  double train_loss = 0.0;
  double test_iou = 0.0;
  double test_dice = 0.0;
};

/// Column-wise batch of the given samples, in the order of `indices`.
Batch make_batch(std::span<const Sample> samples, std::span<const std::size_t> indices);

/// Relative L2 shift per adapter layer, ||after_k - before_k|| / ||before_k||.
/// 0/0 is 0; a zero `before_k` with a non-zero difference reports the
/// absolute shift.
std::vector<double> measure_param_shift(const FlatParams& before, const FlatParams& after);

/// Everything one client owns: its model, optimizer state, private data and
/// the reference broadcast of the current round.
class ClientState {
 public:
  ClientState(int client_id, ToyFM model, ClientDataset dataset, ClientConfig config,
              std::uint64_t seed);

  /// Overwrites adapter layers 1..L with the broadcast and snapshots it as
  /// the regularization reference for this round. Throws ProtocolError when
  /// the manifest is not exactly layers 1..L of this model.
  void install_low_adapters(const FlatParams& received);

  /// local_epochs passes of shuffled mini-batches with Adam on all adapters,
  /// then evaluation. Requires an installed reference.
  ClientUpdate local_train_round(int round);

  SegMetrics evaluate() const;

  int client_id() const { return client_id_; }
  const ToyFM& model() const { return model_; }
  const ClientDataset& dataset() const { return dataset_; }
  const ClientConfig& config() const { return config_; }
  const AdamState& adam() const { return adam_; }
  const FlatParams& theta_ref() const { return theta_ref_; }
  /// All adapter params right after the last install (start of the round).
  const FlatParams& round_start_params() const { return round_start_; }

 private:
  int client_id_;
  ToyFM model_;
  ClientDataset dataset_;
  ClientConfig config_;
  std::uint64_t seed_;
  AdamState adam_;
  FlatParams theta_ref_;
  FlatParams round_start_;
};

}  // namespace fedsca

#endif  // FEDSCA_FED_CLIENT_HPP_
