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

#ifndef FEDSCA_DATAGEN_HPP_
#define FEDSCA_DATAGEN_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fedsca/numerics.hpp"
#include "fedsca/wire_format.hpp"

namespace fedsca {

/// Generative parameters shared by every client of one cluster.
struct ClusterParams {
  int blob_count_min = 1;
  int blob_count_max = 2;
  double radius_min = 2.0;
  double radius_max = 4.0;
  double gain = 0.5;        // blob intensity added on top of the background
  double background = 0.1;  // base intensity
  double noise = 0.05;      // std of additive per-pixel Gaussian noise
  double offset_x = 0.0;    // shift of blob centres, pixels
  double offset_y = 0.0;

  friend bool operator==(const ClusterParams&, const ClusterParams&) = default;
};

struct FederationSpec {
  std::vector<int> client_sizes;  // n_i
  std::vector<int> cluster_of;    // client -> index into clusters
  std::vector<ClusterParams> clusters;
  int mask_side = 16;
  std::uint64_t seed = 0;

  int num_clients() const { return static_cast<int>(client_sizes.size()); }
  int pixels() const { return mask_side * mask_side; }
  void validate() const;

  friend bool operator==(const FederationSpec&, const FederationSpec&) = default;
};

struct Sample {
  std::vector<double> image;       // mask_side^2 values in [0, 1]
  std::vector<std::uint8_t> mask;  // mask_side^2 values in {0, 1}

  friend bool operator==(const Sample&, const Sample&) = default;
};

inline constexpr double kMinForeground = 0.02;
inline constexpr double kMaxForeground = 0.9;

struct ClientDataset {
  std::vector<Sample> train;
  std::vector<Sample> test;

  int size() const { return static_cast<int>(train.size() + test.size()); }

  friend bool operator==(const ClientDataset&, const ClientDataset&) = default;
};

/// Draws one sample from a cluster: Gaussian blobs over a background, clamped
/// to [0, 1]; the mask is the union of the blob discs. Resamples until the
/// foreground fraction is within [0.02, 0.9].
Sample draw_sample(const ClusterParams& cluster, int mask_side, RngStream& stream);

/// Dataset of one client; depends only on (spec, client_id).
ClientDataset generate_client(const FederationSpec& spec, int client_id);

std::vector<ClientDataset> generate_federation(const FederationSpec& spec);

/// Seeded shuffle, then the first round(0.8 n) samples train and the rest
/// test. Both parts are kept non-empty.
std::pair<std::vector<Sample>, std::vector<Sample>> split_train_test(std::vector<Sample> samples,
                                                                     RngStream& stream);

/// Binary container for datasets ("FSCD"), same little-endian scheme as .fsca.
Bytes serialize_federation(std::span<const ClientDataset> datasets, int mask_side);
std::vector<ClientDataset> deserialize_federation(std::span<const std::uint8_t> bytes);

}  // namespace fedsca

#endif  // FEDSCA_DATAGEN_HPP_
