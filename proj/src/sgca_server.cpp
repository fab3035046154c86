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

#include "fedsca/sgca_server.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fedsca/errors.hpp"

namespace fedsca {
namespace {

void require_same_layout(std::span<const FlatParams> params, const char* where) {
  for (const auto& p : params) {
    if (!p.same_layout(params.front())) {
      throw ProtocolError(std::string(where) + ": parameter manifests differ between clients");
    }
  }
}

}  // namespace

const char* to_string(SimilarityMetric metric) {
  switch (metric) {
    case SimilarityMetric::kInner:
      return "inner";
    case SimilarityMetric::kCosine:
      return "cosine";
    case SimilarityMetric::kL1Based:
      return "l1_based";
    case SimilarityMetric::kL2Based:
      return "l2_based";
  }
  return "?";
}

const char* to_string(SimilarityNormalization normalization) {
  return normalization == SimilarityNormalization::kNone ? "none" : "max_abs_row";
}

const char* to_string(PriorMode mode) {
  return mode == PriorMode::kRowConstant ? "row_constant_mi" : "column_mj";
}

SimilarityMetric parse_metric(const std::string& text) {
  for (auto m : {SimilarityMetric::kInner, SimilarityMetric::kCosine, SimilarityMetric::kL1Based,
                 SimilarityMetric::kL2Based}) {
    if (text == to_string(m)) {
      return m;
    }
  }
  throw ConfigError("unknown similarity metric '" + text + "'");
}

SimilarityNormalization parse_normalization(const std::string& text) {
  if (text == "none") {
    return SimilarityNormalization::kNone;
  }
  if (text == "max_abs_row") {
    return SimilarityNormalization::kMaxAbsRow;
  }
  throw ConfigError("unknown similarity normalization '" + text + "'");
}

PriorMode parse_prior_mode(const std::string& text) {
  if (text == "row_constant_mi") {
    return PriorMode::kRowConstant;
  }
  if (text == "column_mj") {
    return PriorMode::kColumn;
  }
  throw ConfigError("unknown m_mode '" + text + "'");
}

void SgcaConfig::validate() const {
  if (!std::isfinite(alpha) || alpha < 0.0) {
    throw InvalidArgument("sgca: alpha must be finite and >= 0");
  }
}

void CollaborationMatrix::check() const {
  if (weights.rows() != weights.cols() || weights.rows() == 0) {
    throw InvalidState("collaboration matrix must be square and non-empty");
  }
  for (Eigen::Index i = 0; i < weights.rows(); ++i) {
    if ((weights.row(i).array() < 0.0).any()) {
      throw InvalidState("collaboration matrix has a negative entry in row " + std::to_string(i));
    }
    if (std::abs(weights.row(i).sum() - 1.0) > 1e-9) {
      throw InvalidState("collaboration matrix row " + std::to_string(i) + " does not sum to 1");
    }
  }
}

double similarity(std::span<const double> a, std::span<const double> b, SimilarityMetric metric) {
  if (a.size() != b.size()) {
    throw ProtocolError("similarity: length mismatch");
  }
  switch (metric) {
    case SimilarityMetric::kInner:
      return dot(a, b);
    case SimilarityMetric::kCosine:
      return cosine_similarity(a, b);
    case SimilarityMetric::kL1Based: {
      double d = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        d += std::abs(a[i] - b[i]);
      }
      return -d;
    }
    case SimilarityMetric::kL2Based: {
      double d = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        d += (a[i] - b[i]) * (a[i] - b[i]);
      }
      return -std::sqrt(d);
    }
  }
  return 0.0;
}

Matrix pairwise_similarity(std::span<const FlatParams> params, SimilarityMetric metric,
                           SimilarityNormalization normalization) {
  if (params.empty()) {
    throw InvalidArgument("pairwise_similarity: no clients");
  }
  require_same_layout(params, "pairwise_similarity");
  const auto n = static_cast<Eigen::Index>(params.size());
  Matrix s(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const double v = similarity(params[static_cast<std::size_t>(i)].values(),
                                  params[static_cast<std::size_t>(j)].values(), metric);
      s(i, j) = v;
      s(j, i) = v;
    }
  }
  if (normalization == SimilarityNormalization::kMaxAbsRow) {
    for (Eigen::Index i = 0; i < n; ++i) {
      double scale = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j != i) {
          scale = std::max(scale, std::abs(s(i, j)));
        }
      }
      if (scale > 0.0) {
        s.row(i) /= scale;
      }
    }
  }
  return s;
}

std::vector<double> solve_row(double m_value, std::span<const double> s_row, double alpha) {
  if (!std::isfinite(m_value) || !std::isfinite(alpha) || alpha < 0.0) {
    throw InvalidArgument("solve_row: m and alpha must be finite, alpha >= 0");
  }
  std::vector<double> c(s_row.size());
  for (std::size_t j = 0; j < s_row.size(); ++j) {
    if (!std::isfinite(s_row[j])) {
      throw InvalidArgument("solve_row: non-finite similarity");
    }
    c[j] = m_value + 0.5 * alpha * s_row[j];
  }
  return simplex_project(c);
}

CollaborationMatrix update_matrix(std::span<const ClientUpdate> updates, const SgcaConfig& config) {
  config.validate();
  if (updates.empty()) {
    throw ProtocolError("update_matrix: no uploads");
  }
  const auto n = updates.size();
  std::vector<const ClientUpdate*> by_id(n, nullptr);
  for (const auto& u : updates) {
    if (u.client_id < 0 || static_cast<std::size_t>(u.client_id) >= n) {
      throw ProtocolError("update_matrix: unexpected client id " + std::to_string(u.client_id));
    }
    if (by_id[static_cast<std::size_t>(u.client_id)] != nullptr) {
      throw ProtocolError("update_matrix: duplicate upload from client " + std::to_string(u.client_id));
    }
    if (u.round != updates.front().round) {
      throw ProtocolError("update_matrix: uploads from different rounds");
    }
    if (u.num_samples <= 0) {
      throw ProtocolError("update_matrix: client " + std::to_string(u.client_id) + " reports no samples");
    }
    by_id[static_cast<std::size_t>(u.client_id)] = &u;
  }

  std::vector<FlatParams> params;
  std::vector<double> m(n);
  double total = 0.0;
  for (const auto* u : by_id) {
    total += u->num_samples;
  }
  for (std::size_t i = 0; i < n; ++i) {
    params.push_back(by_id[i]->low_params);
    m[i] = static_cast<double>(by_id[i]->num_samples) / total;
  }
  const Matrix s = pairwise_similarity(params, config.metric, config.normalization);

  CollaborationMatrix w;
  w.round = updates.front().round;
  w.weights.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    std::vector<double> s_row(n);
    for (std::size_t j = 0; j < n; ++j) {
      s_row[j] = s(row, static_cast<Eigen::Index>(j));
    }
    std::vector<double> solved;
    if (config.prior_mode == PriorMode::kRowConstant) {
      solved = solve_row(m[i], s_row, config.alpha);
    } else {
      std::vector<double> c(n);
      for (std::size_t j = 0; j < n; ++j) {
        c[j] = m[j] + 0.5 * config.alpha * s_row[j];
      }
      solved = simplex_project(c);
    }
    for (std::size_t j = 0; j < n; ++j) {
      w.weights(row, static_cast<Eigen::Index>(j)) = solved[j];
    }
  }
  return w;
}

CollaborationMatrix size_proportional_matrix(std::span<const int> sizes) {
  if (sizes.empty()) {
    throw InvalidArgument("size_proportional_matrix: no clients");
  }
  double total = 0.0;
  for (int s : sizes) {
    if (s < 0) {
      throw InvalidArgument("size_proportional_matrix: negative size");
    }
    total += s;
  }
  if (total <= 0.0) {
    throw InvalidArgument("size_proportional_matrix: zero total size");
  }
  const auto n = static_cast<Eigen::Index>(sizes.size());
  CollaborationMatrix w;
  w.weights.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    w.weights.col(j).setConstant(static_cast<double>(sizes[static_cast<std::size_t>(j)]) / total);
  }
  return w;
}

std::vector<FlatParams> aggregate(const CollaborationMatrix& w, std::span<const FlatParams> params) {
  const auto n = static_cast<Eigen::Index>(params.size());
  if (params.empty() || w.weights.rows() != n || w.weights.cols() != n) {
    throw ProtocolError("aggregate: matrix size does not match the number of clients");
  }
  require_same_layout(params, "aggregate");
  std::vector<FlatParams> out;
  out.reserve(params.size());
  const std::size_t length = params.front().size();
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<double> mixed(length, 0.0);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double weight = w.weights(i, j);
      if (weight == 0.0) {
        continue;
      }
      const auto src = params[static_cast<std::size_t>(j)].values();
      for (std::size_t k = 0; k < length; ++k) {
        mixed[k] += weight * src[k];
      }
    }
    out.emplace_back(std::move(mixed), params.front().manifest());
  }
  return out;
}

FlatParams fedavg_aggregate(std::span<const FlatParams> params, std::span<const int> sizes) {
  if (params.empty() || params.size() != sizes.size()) {
    throw InvalidArgument("fedavg_aggregate: need one size per client");
  }
  require_same_layout(params, "fedavg_aggregate");
  double total = 0.0;
  for (int s : sizes) {
    if (s < 0) {
      throw InvalidArgument("fedavg_aggregate: negative size");
    }
    total += s;
  }
  if (total <= 0.0) {
    throw InvalidArgument("fedavg_aggregate: total size is zero");
  }
  std::vector<double> mean(params.front().size(), 0.0);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double weight = static_cast<double>(sizes[i]) / total;
    const auto src = params[i].values();
    for (std::size_t k = 0; k < mean.size(); ++k) {
      mean[k] += weight * src[k];
    }
  }
  return FlatParams(std::move(mean), params.front().manifest());
}

}  // namespace fedsca
