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

#include "fedsca/adapter_net.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fedsca/digest.hpp"
#include "fedsca/errors.hpp"
#include "fedsca/streams.hpp"

namespace fedsca {
namespace {

Matrix random_orthogonal(int n, RngStream& stream) {
  Matrix gaussian(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      gaussian(i, j) = stream.gaussian();
    }
  }
  Eigen::HouseholderQR<Matrix> qr(gaussian);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Sign fix makes the draw Haar-distributed and independent of QR conventions.
  for (int j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) {
      q.col(j) = -q.col(j);
    }
  }
  return q;
}

void append_row_major(const Matrix& m, std::vector<double>& out) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out.push_back(m(i, j));
    }
  }
}

double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Loss for one pixel, and dloss/dlogit (0 inside the clamped region).
struct PixelLoss {
  double loss;
  double dlogit;
};

PixelLoss pixel_bce(double logit, double target) {
  const double p = sigmoid(logit);
  const double clamped = std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
  const double loss = -(target * std::log(clamped) + (1.0 - target) * std::log(1.0 - clamped));
  const bool inside = p > kProbabilityClamp && p < 1.0 - kProbabilityClamp;
  return {loss, inside ? p - target : 0.0};
}

void check_target(double y) {
  if (y != 0.0 && y != 1.0) {
    throw InvalidArgument("seg_loss: targets must be 0 or 1");
  }
}

void check_batch(const Batch& batch, const ToyFM& model) {
  const auto fd = model.shape().feature_dim;
  if (batch.inputs.rows() != fd || batch.targets.rows() != fd ||
      batch.inputs.cols() != batch.targets.cols()) {
    throw InvalidArgument("batch: shape does not match the model");
  }
  if (batch.size() == 0) {
    throw InvalidArgument("batch: empty");
  }
  for (Eigen::Index j = 0; j < batch.targets.cols(); ++j) {
    for (Eigen::Index i = 0; i < batch.targets.rows(); ++i) {
      check_target(batch.targets(i, j));
    }
  }
}

// Layers regularized by `reference`: must be exactly 1..L.
int regularized_layers(const FlatParams& reference, const ToyFM& model) {
  const auto& manifest = reference.manifest();
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    if (manifest[i].layer_index != static_cast<int>(i) + 1 ||
        manifest[i].length != model.shape().adapter_size()) {
      throw InvalidArgument("reference must cover adapter layers 1..L");
    }
  }
  if (static_cast<int>(manifest.size()) > model.num_blocks()) {
    throw InvalidArgument("reference covers more layers than the model has");
  }
  return static_cast<int>(manifest.size());
}

struct StageCache {
  Matrix pre;
  Matrix features;  // relu(pre), the adapter input
  Matrix inner;     // down_proj * features
  Matrix hidden;    // relu(inner)
};

}  // namespace

void ModelShape::validate() const {
  if (num_blocks < 1) {
    throw InvalidArgument("model: num_blocks must be >= 1");
  }
  if (feature_dim < 2 || bottleneck_dim < 1 || bottleneck_dim >= feature_dim) {
    throw InvalidArgument("model: need 1 <= bottleneck_dim < feature_dim");
  }
  if (!(feature_gain > 0.0) || !std::isfinite(feature_gain)) {
    throw InvalidArgument("model: feature_gain must be positive and finite");
  }
  if (!std::isfinite(operating_point) || !std::isfinite(head_gain) ||
      !std::isfinite(head_threshold) || !std::isfinite(adapter_init_scale) ||
      adapter_init_scale < 0.0) {
    throw InvalidArgument("model: backbone constants must be finite");
  }
}

std::shared_ptr<const Backbone> Backbone::build(const ModelShape& shape, std::uint64_t seed) {
  shape.validate();
  const int n = shape.feature_dim;
  RngStream stream(seed, streams::kBackbone);
  auto backbone = std::make_shared<Backbone>();
  backbone->shape = shape;

  const Vector level = Vector::Constant(n, shape.operating_point);
  Vector reference = Vector::Constant(n, 0.5);
  Matrix rotation = Matrix::Identity(n, n);
  double gain = 1.0;
  for (int k = 0; k < shape.num_blocks; ++k) {
    FrozenBlock block;
    const Matrix q = random_orthogonal(n, stream);
    block.weight = shape.feature_gain * q;
    block.bias = level - block.weight * reference;
    rotation = q * rotation;
    gain *= shape.feature_gain;
    reference = level;
    backbone->blocks.push_back(std::move(block));
  }
  backbone->head.weight = (shape.head_gain / gain) * rotation.transpose();
  backbone->head.bias = -(backbone->head.weight * level) +
                        Vector::Constant(n, shape.head_gain * (0.5 - shape.head_threshold));
  return backbone;
}

std::string Backbone::digest() const {
  std::vector<std::uint8_t> bytes;
  auto feed = [&bytes](const double* data, Eigen::Index count) {
    const auto* raw = reinterpret_cast<const std::uint8_t*>(data);
    bytes.insert(bytes.end(), raw, raw + static_cast<std::size_t>(count) * sizeof(double));
  };
  for (const auto& block : blocks) {
    feed(block.weight.data(), block.weight.size());
    feed(block.bias.data(), block.bias.size());
  }
  feed(head.weight.data(), head.weight.size());
  feed(head.bias.data(), head.bias.size());
  return sha256_hex(bytes);
}

std::vector<AdapterParams> init_adapters(const ModelShape& shape, RngStream& stream) {
  shape.validate();
  const double scale = shape.adapter_init_scale / std::sqrt(static_cast<double>(shape.feature_dim));
  std::vector<AdapterParams> adapters(static_cast<std::size_t>(shape.num_blocks));
  for (auto& adapter : adapters) {
    adapter.down_proj.resize(shape.bottleneck_dim, shape.feature_dim);
    for (Eigen::Index i = 0; i < adapter.down_proj.size(); ++i) {
      adapter.down_proj.data()[i] = scale * stream.gaussian();
    }
    adapter.up_proj = RowMatrix::Zero(shape.feature_dim, shape.bottleneck_dim);
  }
  return adapters;
}

ToyFM::ToyFM(std::shared_ptr<const Backbone> backbone, std::vector<AdapterParams> adapters)
    : backbone_(std::move(backbone)), adapters_(std::move(adapters)) {
  if (!backbone_) {
    throw InvalidArgument("ToyFM: missing backbone");
  }
  const auto& s = shape();
  if (static_cast<int>(adapters_.size()) != s.num_blocks ||
      static_cast<int>(backbone_->blocks.size()) != s.num_blocks) {
    throw InvalidArgument("ToyFM: expected one adapter per block");
  }
  for (const auto& a : adapters_) {
    if (a.down_proj.rows() != s.bottleneck_dim || a.down_proj.cols() != s.feature_dim ||
        a.up_proj.rows() != s.feature_dim || a.up_proj.cols() != s.bottleneck_dim) {
      throw InvalidArgument("ToyFM: adapter shape mismatch");
    }
  }
}

void ToyFM::check_layer(int layer) const {
  if (layer < 1 || layer > num_blocks()) {
    throw InvalidArgument("ToyFM: adapter layer " + std::to_string(layer) + " out of range");
  }
}

const AdapterParams& ToyFM::adapter(int layer) const {
  check_layer(layer);
  return adapters_[static_cast<std::size_t>(layer - 1)];
}

FlatParams ToyFM::adapter_params(int first, int last) const {
  check_layer(first);
  check_layer(last);
  if (first > last) {
    throw InvalidArgument("ToyFM: empty layer range");
  }
  std::vector<double> values;
  std::vector<LayerSpan> manifest;
  const std::size_t size = shape().adapter_size();
  values.reserve(size * static_cast<std::size_t>(last - first + 1));
  for (int k = first; k <= last; ++k) {
    const auto& a = adapters_[static_cast<std::size_t>(k - 1)];
    values.insert(values.end(), a.down_proj.data(), a.down_proj.data() + a.down_proj.size());
    values.insert(values.end(), a.up_proj.data(), a.up_proj.data() + a.up_proj.size());
    manifest.push_back({k, size});
  }
  return FlatParams(std::move(values), std::move(manifest));
}

void ToyFM::set_adapter_params(const FlatParams& params) {
  const std::size_t size = shape().adapter_size();
  for (const auto& span : params.manifest()) {
    check_layer(span.layer_index);
    if (span.length != size) {
      throw InvalidArgument("ToyFM: layer " + std::to_string(span.layer_index) +
                            " has the wrong parameter count");
    }
  }
  for (const auto& span : params.manifest()) {
    auto values = params.layer(span.layer_index);
    auto& a = adapters_[static_cast<std::size_t>(span.layer_index - 1)];
    const auto down = static_cast<std::size_t>(a.down_proj.size());
    std::copy_n(values.begin(), down, a.down_proj.data());
    std::copy(values.begin() + static_cast<std::ptrdiff_t>(down), values.end(), a.up_proj.data());
  }
}

Matrix ToyFM::forward(const Matrix& inputs) const {
  if (inputs.rows() != shape().feature_dim) {
    throw InvalidArgument("ToyFM::forward: input dimension mismatch");
  }
  Matrix h = inputs;
  for (int k = 0; k < num_blocks(); ++k) {
    const auto& block = backbone_->blocks[static_cast<std::size_t>(k)];
    const auto& adapter = adapters_[static_cast<std::size_t>(k)];
    Matrix g = ((block.weight * h).colwise() + block.bias).cwiseMax(0.0);
    h = adapter.up_proj * (adapter.down_proj * g).cwiseMax(0.0) + g;
  }
  return (backbone_->head.weight * h).colwise() + backbone_->head.bias;
}

Vector adapter_forward(const Vector& f, const AdapterParams& adapter) {
  if (adapter.down_proj.cols() != f.size() || adapter.up_proj.rows() != f.size() ||
      adapter.up_proj.cols() != adapter.down_proj.rows()) {
    throw InvalidArgument("adapter_forward: dimension mismatch");
  }
  return adapter.up_proj * (adapter.down_proj * f).cwiseMax(0.0) + f;
}

Vector model_forward(const Vector& x, const ToyFM& model) {
  return model.forward(x);
}

double seg_loss(std::span<const double> logits, std::span<const double> targets) {
  if (logits.size() != targets.size() || logits.empty()) {
    throw InvalidArgument("seg_loss: logits and targets must have equal, non-zero length");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    check_target(targets[i]);
    total += pixel_bce(logits[i], targets[i]).loss;
  }
  return total / static_cast<double>(logits.size());
}

double reg_loss(const FlatParams& low, const FlatParams& reference) {
  if (!low.same_layout(reference)) {
    throw InvalidArgument("reg_loss: manifest mismatch");
  }
  return -cosine_similarity(low.values(), reference.values());
}

double objective(const Batch& batch, const ToyFM& model, const FlatParams& reference,
                 double beta) {
  if (!(beta >= 0.0)) {
    throw InvalidArgument("objective: beta must be >= 0");
  }
  check_batch(batch, model);
  const int low_layers = regularized_layers(reference, model);
  const Matrix logits = model.forward(batch.inputs);
  double seg = 0.0;
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    seg += seg_loss(std::span<const double>(logits.col(j).data(), static_cast<std::size_t>(logits.rows())),
                    std::span<const double>(batch.targets.col(j).data(),
                                            static_cast<std::size_t>(batch.targets.rows())));
  }
  seg /= static_cast<double>(batch.size());
  if (low_layers == 0) {
    return seg;
  }
  return seg + beta * reg_loss(model.adapter_params(1, low_layers), reference);
}

ObjectiveGradient objective_and_grad(const Batch& batch, const ToyFM& model,
                                     const FlatParams& reference, double beta) {
  if (!(beta >= 0.0)) {
    throw InvalidArgument("objective: beta must be >= 0");
  }
  check_batch(batch, model);
  const int low_layers = regularized_layers(reference, model);
  const int num_blocks = model.num_blocks();
  const Backbone& backbone = model.backbone();

  std::vector<StageCache> caches(static_cast<std::size_t>(num_blocks));
  Matrix h = batch.inputs;
  for (int k = 0; k < num_blocks; ++k) {
    const auto& block = backbone.blocks[static_cast<std::size_t>(k)];
    const auto& adapter = model.adapter(k + 1);
    auto& c = caches[static_cast<std::size_t>(k)];
    c.pre = (block.weight * h).colwise() + block.bias;
    c.features = c.pre.cwiseMax(0.0);
    c.inner = adapter.down_proj * c.features;
    c.hidden = c.inner.cwiseMax(0.0);
    h = adapter.up_proj * c.hidden + c.features;
  }
  const Matrix logits = (backbone.head.weight * h).colwise() + backbone.head.bias;

  const auto pixels = static_cast<double>(logits.rows());
  const auto samples = static_cast<double>(logits.cols());
  Matrix dlogits(logits.rows(), logits.cols());
  double seg = 0.0;
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    double sample_loss = 0.0;
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
      const auto px = pixel_bce(logits(i, j), batch.targets(i, j));
      sample_loss += px.loss;
      dlogits(i, j) = px.dlogit / (pixels * samples);
    }
    seg += sample_loss / pixels;
  }
  seg /= samples;

  std::vector<Matrix> grad_down(static_cast<std::size_t>(num_blocks));
  std::vector<Matrix> grad_up(static_cast<std::size_t>(num_blocks));
  Matrix dh = backbone.head.weight.transpose() * dlogits;
  for (int k = num_blocks - 1; k >= 0; --k) {
    const auto& block = backbone.blocks[static_cast<std::size_t>(k)];
    const auto& adapter = model.adapter(k + 1);
    const auto& c = caches[static_cast<std::size_t>(k)];
    grad_up[static_cast<std::size_t>(k)] = dh * c.hidden.transpose();
    const Matrix dinner =
        (adapter.up_proj.transpose() * dh).cwiseProduct((c.inner.array() > 0.0).cast<double>().matrix());
    grad_down[static_cast<std::size_t>(k)] = dinner * c.features.transpose();
    const Matrix dfeatures = dh + adapter.down_proj.transpose() * dinner;
    const Matrix dpre = dfeatures.cwiseProduct((c.pre.array() > 0.0).cast<double>().matrix());
    if (k > 0) {
      dh = block.weight.transpose() * dpre;
    }
  }

  std::vector<double> values;
  std::vector<LayerSpan> manifest;
  const std::size_t size = model.shape().adapter_size();
  values.reserve(size * static_cast<std::size_t>(num_blocks));
  for (int k = 0; k < num_blocks; ++k) {
    append_row_major(grad_down[static_cast<std::size_t>(k)], values);
    append_row_major(grad_up[static_cast<std::size_t>(k)], values);
    manifest.push_back({k + 1, size});
  }

  double reg = 0.0;
  if (low_layers > 0) {
    const FlatParams low = model.adapter_params(1, low_layers);
    reg = reg_loss(low, reference);
    // d(-cos(a, b))/da = -(b / (|a||b|) - (a.b) a / (|a|^3 |b|))
    const auto a = low.values();
    const auto b = reference.values();
    const double na = l2_norm(a);
    const double nb = l2_norm(b);
    if (beta > 0.0 && na > 0.0 && nb > 0.0) {
      const double ab = dot(a, b);
      for (std::size_t i = 0; i < a.size(); ++i) {
        values[i] += -beta * (b[i] / (na * nb) - ab * a[i] / (na * na * na * nb));
      }
    }
  }

  ObjectiveGradient out;
  out.seg = seg;
  out.reg = reg;
  out.objective = seg + beta * reg;
  out.grad = FlatParams(std::move(values), std::move(manifest));
  return out;
}

FlatParams grad_adapters(const Batch& batch, const ToyFM& model, const FlatParams& reference,
                         double beta) {
  return objective_and_grad(batch, model, reference, beta).grad;
}

AdamState AdamState::for_params(const FlatParams& params) {
  AdamState state;
  state.first_moment.assign(params.size(), 0.0);
  state.second_moment.assign(params.size(), 0.0);
  state.manifest = params.manifest();
  return state;
}

void adam_step(FlatParams& params, const FlatParams& grads, AdamState& state,
               double learning_rate) {
  if (!(learning_rate > 0.0)) {
    throw InvalidArgument("adam_step: learning rate must be positive");
  }
  if (!params.same_layout(grads) || params.manifest() != state.manifest ||
      state.first_moment.size() != params.size() || state.second_moment.size() != params.size()) {
    throw InvalidArgument("adam_step: shape mismatch");
  }
  ++state.step_count;
  const double correction1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  const double correction2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
  auto p = params.mutable_values();
  auto g = grads.values();
  for (std::size_t i = 0; i < p.size(); ++i) {
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    m = state.beta1 * m + (1.0 - state.beta1) * g[i];
    v = state.beta2 * v + (1.0 - state.beta2) * g[i] * g[i];
    const double m_hat = m / correction1;
    const double v_hat = v / correction2;
    p[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
}

}  // namespace fedsca
