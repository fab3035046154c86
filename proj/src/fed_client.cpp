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

#include "fedsca/fed_client.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fedsca/errors.hpp"
#include "fedsca/streams.hpp"

namespace fedsca {

void ClientConfig::validate(int num_blocks) const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidArgument("client: learning_rate must be positive");
  }
  if (batch_size < 1 || local_epochs < 1 || local_epochs > 255) {
    throw InvalidArgument("client: batch_size >= 1 and 1 <= local_epochs <= 255 required");
  }
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw InvalidArgument("client: beta must be >= 0");
  }
  if (low_layers < 1 || low_layers > num_blocks) {
    throw InvalidArgument("client: L must be in [1, K]");
  }
}

SegMetrics mask_metrics(std::span<const std::uint8_t> predicted,
                        std::span<const std::uint8_t> truth) {
  if (predicted.size() != truth.size()) {
    throw InvalidArgument("mask_metrics: size mismatch");
  }
  long intersection = 0;
  long pred_count = 0;
  long truth_count = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool p = predicted[i] != 0;
    const bool t = truth[i] != 0;
    pred_count += p;
    truth_count += t;
    intersection += p && t;
  }
  if (pred_count == 0 && truth_count == 0) {
    return {1.0, 1.0};
  }
  const long uni = pred_count + truth_count - intersection;
  return {static_cast<double>(intersection) / static_cast<double>(uni),
          2.0 * static_cast<double>(intersection) / static_cast<double>(pred_count + truth_count)};
}

Batch make_batch(std::span<const Sample> samples, std::span<const std::size_t> indices) {
  if (indices.empty() || samples.empty()) {
    throw InvalidArgument("make_batch: empty batch");
  }
  const auto pixels = static_cast<Eigen::Index>(samples.front().image.size());
  Batch batch{Matrix(pixels, static_cast<Eigen::Index>(indices.size())),
              Matrix(pixels, static_cast<Eigen::Index>(indices.size()))};
  for (std::size_t col = 0; col < indices.size(); ++col) {
    const auto& s = samples[indices[col]];
    if (static_cast<Eigen::Index>(s.image.size()) != pixels ||
        static_cast<Eigen::Index>(s.mask.size()) != pixels) {
      throw InvalidArgument("make_batch: inconsistent sample sizes");
    }
    for (Eigen::Index i = 0; i < pixels; ++i) {
      batch.inputs(i, static_cast<Eigen::Index>(col)) = s.image[static_cast<std::size_t>(i)];
      batch.targets(i, static_cast<Eigen::Index>(col)) = s.mask[static_cast<std::size_t>(i)];
    }
  }
  return batch;
}

std::vector<double> measure_param_shift(const FlatParams& before, const FlatParams& after) {
  if (!before.same_layout(after)) {
    throw InvalidArgument("measure_param_shift: manifest mismatch");
  }
  std::vector<double> shifts;
  for (const auto& span : before.manifest()) {
    const auto b = before.layer(span.layer_index);
    const auto a = after.layer(span.layer_index);
    double diff = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
      diff += (a[i] - b[i]) * (a[i] - b[i]);
    }
    diff = std::sqrt(diff);
    const double base = l2_norm(b);
    shifts.push_back(base > 0.0 ? diff / base : diff);
  }
  return shifts;
}

ClientState::ClientState(int client_id, ToyFM model, ClientDataset dataset, ClientConfig config,
                         std::uint64_t seed)
    : client_id_(client_id),
      model_(std::move(model)),
      dataset_(std::move(dataset)),
      config_(config),
      seed_(seed),
      adam_(AdamState::for_params(model_.all_adapter_params())),
      round_start_(model_.all_adapter_params()) {
  config_.validate(model_.num_blocks());
  if (client_id_ < 0) {
    throw InvalidArgument("client id must be non-negative");
  }
  for (const auto* part : {&dataset_.train, &dataset_.test}) {
    for (const auto& s : *part) {
      if (static_cast<int>(s.image.size()) != model_.shape().feature_dim) {
        throw InvalidArgument("client dataset does not match the model's feature_dim");
      }
    }
  }
}

void ClientState::install_low_adapters(const FlatParams& received) {
  const auto& manifest = received.manifest();
  bool ok = static_cast<int>(manifest.size()) == config_.low_layers;
  for (std::size_t i = 0; ok && i < manifest.size(); ++i) {
    ok = manifest[i].layer_index == static_cast<int>(i) + 1 &&
         manifest[i].length == model_.shape().adapter_size();
  }
  if (!ok) {
    throw ProtocolError("client " + std::to_string(client_id_) +
                        ": broadcast must cover exactly adapter layers 1..L");
  }
  model_.set_adapter_params(received);
  theta_ref_ = received;
  round_start_ = model_.all_adapter_params();
}

ClientUpdate ClientState::local_train_round(int round) {
  if (dataset_.train.empty()) {
    throw InvalidState("client " + std::to_string(client_id_) + ": empty train set");
  }
  if (theta_ref_.empty()) {
    throw InvalidState("client " + std::to_string(client_id_) +
                       ": no broadcast installed for this round");
  }
  FlatParams params = model_.all_adapter_params();
  std::vector<std::size_t> order(dataset_.train.size());
  double loss_sum = 0.0;
  std::size_t loss_count = 0;
  for (int epoch = 0; epoch < config_.local_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto index = (static_cast<std::uint64_t>(round) << 8) | static_cast<std::uint64_t>(epoch);
    RngStream shuffle(seed_, streams::id(streams::Purpose::kBatchShuffle,
                                         static_cast<std::uint64_t>(client_id_), index));
    shuffle.shuffle(order);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config_.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config_.batch_size));
      std::vector<std::size_t> members(order.begin() + static_cast<std::ptrdiff_t>(start),
                                       order.begin() + static_cast<std::ptrdiff_t>(end));
      // Batch contents depend on the shuffle, the summation order does not.
      std::sort(members.begin(), members.end());
      const Batch batch = make_batch(dataset_.train, members);
      const auto step = objective_and_grad(batch, model_, theta_ref_, config_.beta);
      if (!std::isfinite(step.objective)) {
        throw NumericError("client " + std::to_string(client_id_) + ": non-finite objective");
      }
      loss_sum += step.objective * static_cast<double>(members.size());
      loss_count += members.size();
      adam_step(params, step.grad, adam_, config_.learning_rate);
      params.check_finite();
      model_.set_adapter_params(params);
    }
  }
  const SegMetrics metrics = evaluate();
  ClientUpdate update;
  update.client_id = client_id_;
  update.round = round;
  update.low_params = model_.adapter_params(1, config_.low_layers);
  update.num_samples = dataset_.size();
  update.train_loss = loss_sum / static_cast<double>(loss_count);
  update.test_iou = metrics.iou;
  update.test_dice = metrics.dice;
  return update;
}

SegMetrics ClientState::evaluate() const {
  if (dataset_.test.empty()) {
    throw InvalidState("client " + std::to_string(client_id_) + ": empty test set");
  }
  std::vector<std::size_t> all(dataset_.test.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const Batch batch = make_batch(dataset_.test, all);
  const Matrix logits = model_.forward(batch.inputs);
  SegMetrics mean;
  std::vector<std::uint8_t> predicted(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
      // sigmoid(z) > 0.5  <=>  z > 0
      predicted[static_cast<std::size_t>(i)] = logits(i, j) > 0.0 ? 1 : 0;
    }
    const auto m = mask_metrics(predicted, dataset_.test[static_cast<std::size_t>(j)].mask);
    mean.iou += m.iou;
    mean.dice += m.dice;
  }
  mean.iou /= static_cast<double>(logits.cols());
  mean.dice /= static_cast<double>(logits.cols());
  return mean;
}

}  // namespace fedsca
