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

#ifndef FEDSCA_ADAPTER_NET_HPP_
#define FEDSCA_ADAPTER_NET_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fedsca/numerics.hpp"

namespace fedsca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Architecture of the surrogate foundation model.
struct ModelShape {
  int num_blocks = 6;        // K
  int feature_dim = 256;     // flattened 16x16 mask
  int bottleneck_dim = 16;   // adapter inner width

  // Frozen backbone construction. Every block bias is chosen so that the
  // reference input (all pixels 0.5) produces pre-activations equal to
  // `operating_point`, which keeps the block ReLUs in their active region for
  // typical inputs. Each block is feature_gain times a random rotation, so
  // the deviation from the operating point grows by that factor per block
  // while the shared level stays fixed. The head undoes rotations and gain and
  // gives head_gain * (x - head_threshold) when all adapters are at identity.
  double operating_point = 2.0;
  double feature_gain = 1.4;
  double head_gain = 8.0;
  double head_threshold = 0.5;
  // Adapter down-projection init is N(0, (adapter_init_scale / sqrt(feature_dim))^2).
  double adapter_init_scale = 1.0;

  void validate() const;
  std::size_t adapter_size() const {
    return 2 * static_cast<std::size_t>(feature_dim) * static_cast<std::size_t>(bottleneck_dim);
  }

  friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

/// Trainable bottleneck adapter: up_proj * relu(down_proj * f) + f. No biases.
struct AdapterParams {
  RowMatrix down_proj;  // bottleneck_dim x feature_dim
  RowMatrix up_proj;    // feature_dim x bottleneck_dim
};

/// Frozen affine map followed by ReLU (or, for the head, no activation).
struct FrozenBlock {
  Matrix weight;  // feature_dim x feature_dim
  Vector bias;    // feature_dim
};

/// The frozen part of the model. Shared read-only between clients.
struct Backbone {
  ModelShape shape;
  std::vector<FrozenBlock> blocks;
  FrozenBlock head;

  /// Random orthogonal blocks seeded by `seed`; see ModelShape for biases and head.
  static std::shared_ptr<const Backbone> build(const ModelShape& shape, std::uint64_t seed);

  /// SHA-256 (hex) over every frozen weight and bias, in declaration order.
  std::string digest() const;
};

/// Fresh adapters: Gaussian down-projections, zero up-projections, so every
/// adapter starts as the identity map.
std::vector<AdapterParams> init_adapters(const ModelShape& shape, RngStream& stream);

/// A batch of samples stored column-wise.
struct Batch {
  Matrix inputs;   // feature_dim x batch_size
  Matrix targets;  // feature_dim x batch_size, entries in {0, 1}

  Eigen::Index size() const { return inputs.cols(); }
};

/// K frozen blocks, each followed by a trainable adapter, plus a frozen head.
class ToyFM {
 public:
  ToyFM(std::shared_ptr<const Backbone> backbone, std::vector<AdapterParams> adapters);

  const ModelShape& shape() const { return backbone_->shape; }
  int num_blocks() const { return shape().num_blocks; }
  const Backbone& backbone() const { return *backbone_; }

  /// 1-based layer access.
  const AdapterParams& adapter(int layer) const;

  /// Adapter layers [first, last] (1-based, inclusive) flattened as
  /// down_proj then up_proj per layer, row-major.
  FlatParams adapter_params(int first, int last) const;
  FlatParams all_adapter_params() const { return adapter_params(1, num_blocks()); }

  /// Overwrites exactly the layers named in the manifest of `params`.
  void set_adapter_params(const FlatParams& params);

  /// Logits for a column-wise batch of inputs.
  Matrix forward(const Matrix& inputs) const;

 private:
  void check_layer(int layer) const;

  std::shared_ptr<const Backbone> backbone_;
  std::vector<AdapterParams> adapters_;
};

Vector adapter_forward(const Vector& f, const AdapterParams& adapter);
Vector model_forward(const Vector& x, const ToyFM& model);

/// Probability clamp applied before the logarithm in seg_loss.
inline constexpr double kProbabilityClamp = 1e-7;

/// Mean binary cross-entropy over pixels with sigmoid probabilities clamped
/// to [1e-7, 1 - 1e-7]. Targets must be 0 or 1.
double seg_loss(std::span<const double> logits, std::span<const double> targets);

/// -cos(low, reference); 0 when `low` is the zero vector.
double reg_loss(const FlatParams& low, const FlatParams& reference);

/// Mean seg_loss over the batch plus beta * reg_loss of the adapter layers
/// named by `reference`'s manifest. An empty reference disables the
/// regularizer.
double objective(const Batch& batch, const ToyFM& model, const FlatParams& reference,
                 double beta);

struct ObjectiveGradient {
  double objective = 0.0;
  double seg = 0.0;
  double reg = 0.0;
  FlatParams grad;  // all K adapter layers
};

/// Objective value and its exact gradient with respect to every adapter
/// parameter (manual reverse mode). Frozen weights get no gradient.
ObjectiveGradient objective_and_grad(const Batch& batch, const ToyFM& model,
                                     const FlatParams& reference, double beta);

FlatParams grad_adapters(const Batch& batch, const ToyFM& model,
                         const FlatParams& reference, double beta);

struct AdamState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::vector<LayerSpan> manifest;
  long step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState for_params(const FlatParams& params);
};

/// One bias-corrected Adam update of `params` in place.
void adam_step(FlatParams& params, const FlatParams& grads, AdamState& state,
               double learning_rate);

}  // namespace fedsca

#endif  // FEDSCA_ADAPTER_NET_HPP_
