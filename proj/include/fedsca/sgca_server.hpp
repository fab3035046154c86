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

#ifndef FEDSCA_SGCA_SERVER_HPP_
#define FEDSCA_SGCA_SERVER_HPP_

#include <span>
#include <string>
#include <vector>

#include "fedsca/adapter_net.hpp"
#include "fedsca/fed_client.hpp"
#include "fedsca/numerics.hpp"

namespace fedsca {

/// Similarity between two clients' transmitted adapters; larger means more
/// similar. The distance-based variants are negated distances.
enum class SimilarityMetric { kInner, kCosine, kL1Based, kL2Based };
enum class SimilarityNormalization { kNone, kMaxAbsRow };

/// Which dataset-size prior the collaboration QP pulls each row towards.
///   kRowConstant: (W_ij - m_i)^2, constant within a row.
///   kColumn:      (W_ij - m_j)^2.
enum class PriorMode { kRowConstant, kColumn };

const char* to_string(SimilarityMetric metric);
const char* to_string(SimilarityNormalization normalization);
const char* to_string(PriorMode mode);
SimilarityMetric parse_metric(const std::string& text);
SimilarityNormalization parse_normalization(const std::string& text);
PriorMode parse_prior_mode(const std::string& text);

struct SgcaConfig {
  double alpha = 1.0;
  SimilarityMetric metric = SimilarityMetric::kL2Based;
  SimilarityNormalization normalization = SimilarityNormalization::kMaxAbsRow;
  PriorMode prior_mode = PriorMode::kRowConstant;

  void validate() const;

  friend bool operator==(const SgcaConfig&, const SgcaConfig&) = default;
};

/// Row-stochastic N x N matrix; row i holds the mixing weights of client i's
/// broadcast.
struct CollaborationMatrix {
  Matrix weights;
  int round = 0;

  int size() const { return static_cast<int>(weights.rows()); }
  /// Throws InvalidState unless every entry is >= 0 and rows sum to 1 (1e-9).
  void check() const;
};

double similarity(std::span<const double> a, std::span<const double> b, SimilarityMetric metric);

/// S_ij = metric(params_i, params_j), optionally with each row divided by its
/// largest off-diagonal magnitude (rows with no off-diagonal mass are left
/// unscaled).
Matrix pairwise_similarity(std::span<const FlatParams> params, SimilarityMetric metric,
                           SimilarityNormalization normalization);

/// argmin over the simplex of sum_j (w_j - m)^2 - alpha * sum_j w_j s_j,
/// computed as the projection of c_j = m + (alpha / 2) s_j.
std::vector<double> solve_row(double m_value, std::span<const double> s_row, double alpha);

/// Recomputes W from this round's uploads. Updates may arrive in any order;
/// their client ids must be exactly 0..N-1.
CollaborationMatrix update_matrix(std::span<const ClientUpdate> updates, const SgcaConfig& config);

/// W_ij = n_j / sum(n): every row is the FedAvg weighting.
CollaborationMatrix size_proportional_matrix(std::span<const int> sizes);

/// output_i = sum_j W_ij params_j.
std::vector<FlatParams> aggregate(const CollaborationMatrix& w, std::span<const FlatParams> params);

/// Size-weighted mean sum_i (n_i / sum n) params_i.
FlatParams fedavg_aggregate(std::span<const FlatParams> params, std::span<const int> sizes);

}  // namespace fedsca

#endif  // FEDSCA_SGCA_SERVER_HPP_
