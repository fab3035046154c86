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

#include "fedsca/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fedsca/errors.hpp"
#include "fedsca/streams.hpp"

namespace fedsca {
namespace {

constexpr int kMaxAttempts = 1000;
constexpr std::uint8_t kDataMagic[4] = {'F', 'S', 'C', 'D'};
constexpr std::uint32_t kDataFormatVersion = 1;

void validate_cluster(const ClusterParams& c, int mask_side) {
  auto finite = [](double v) { return std::isfinite(v); };
  if (c.blob_count_min < 1 || c.blob_count_max < c.blob_count_min) {
    throw InvalidArgument("cluster: need 1 <= blob_count_min <= blob_count_max");
  }
  if (!finite(c.radius_min) || !finite(c.radius_max) || c.radius_min <= 0.0 ||
      c.radius_max < c.radius_min) {
    throw InvalidArgument("cluster: need 0 < radius_min <= radius_max");
  }
  if (2.0 * c.radius_max > static_cast<double>(mask_side - 1)) {
    throw InvalidArgument("cluster: radius_max does not fit on the canvas");
  }
  if (!finite(c.gain) || !finite(c.background) || !finite(c.noise) || c.noise < 0.0) {
    throw InvalidArgument("cluster: gain, background and noise must be finite, noise >= 0");
  }
  if (!finite(c.offset_x) || !finite(c.offset_y) ||
      std::abs(c.offset_x) > static_cast<double>(mask_side) / 2.0 ||
      std::abs(c.offset_y) > static_cast<double>(mask_side) / 2.0) {
    throw InvalidArgument("cluster: offsets must be finite and within half the canvas");
  }
}

}  // namespace

void FederationSpec::validate() const {
  if (num_clients() < 2) {
    throw InvalidArgument("federation: need at least 2 clients");
  }
  if (cluster_of.size() != client_sizes.size()) {
    throw InvalidArgument("federation: cluster_of must name one cluster per client");
  }
  if (mask_side < 4) {
    throw InvalidArgument("federation: mask_side must be >= 4");
  }
  for (int n : client_sizes) {
    if (n < 2) {
      throw InvalidArgument("federation: every client needs at least 2 samples");
    }
  }
  for (int c : cluster_of) {
    if (c < 0 || c >= static_cast<int>(clusters.size())) {
      throw InvalidArgument("federation: cluster index out of range");
    }
  }
  for (const auto& c : clusters) {
    validate_cluster(c, mask_side);
  }
}

Sample draw_sample(const ClusterParams& cluster, int mask_side, RngStream& stream) {
  const int pixels = mask_side * mask_side;
  const double last = static_cast<double>(mask_side - 1);
  Sample sample;
  sample.image.resize(static_cast<std::size_t>(pixels));
  sample.mask.resize(static_cast<std::size_t>(pixels));
  std::vector<double> profile(static_cast<std::size_t>(pixels));
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::fill(profile.begin(), profile.end(), 0.0);
    std::fill(sample.mask.begin(), sample.mask.end(), std::uint8_t{0});
    const int blobs = stream.uniform_int(cluster.blob_count_min, cluster.blob_count_max);
    for (int b = 0; b < blobs; ++b) {
      const double radius = stream.uniform(cluster.radius_min, cluster.radius_max);
      const double cx = std::clamp(stream.uniform(radius, last - radius) + cluster.offset_x, 0.0, last);
      const double cy = std::clamp(stream.uniform(radius, last - radius) + cluster.offset_y, 0.0, last);
      for (int y = 0; y < mask_side; ++y) {
        for (int x = 0; x < mask_side; ++x) {
          const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
          const auto idx = static_cast<std::size_t>(y * mask_side + x);
          profile[idx] = std::max(profile[idx], std::exp(-d2 / (radius * radius)));
          if (d2 <= radius * radius) {
            sample.mask[idx] = 1;
          }
        }
      }
    }
    for (int i = 0; i < pixels; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      const double v = cluster.background + cluster.gain * profile[idx] + cluster.noise * stream.gaussian();
      sample.image[idx] = std::clamp(v, 0.0, 1.0);
    }
    const auto fg = std::count(sample.mask.begin(), sample.mask.end(), std::uint8_t{1});
    const double fraction = static_cast<double>(fg) / static_cast<double>(pixels);
    if (fraction >= kMinForeground && fraction <= kMaxForeground) {
      return sample;
    }
  }
  throw InvalidArgument("cluster parameters cannot produce a foreground fraction within [0.02, 0.9]");
}

ClientDataset generate_client(const FederationSpec& spec, int client_id) {
  spec.validate();
  if (client_id < 0 || client_id >= spec.num_clients()) {
    throw InvalidArgument("generate_client: client id out of range");
  }
  const auto& cluster = spec.clusters[static_cast<std::size_t>(spec.cluster_of[static_cast<std::size_t>(client_id)])];
  const auto client = static_cast<std::uint64_t>(client_id);
  RngStream data_stream(spec.seed, streams::id(streams::Purpose::kClientData, client));
  std::vector<Sample> samples;
  const int n = spec.client_sizes[static_cast<std::size_t>(client_id)];
  samples.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    samples.push_back(draw_sample(cluster, spec.mask_side, data_stream));
  }
  RngStream split_stream(spec.seed, streams::id(streams::Purpose::kTrainTestSplit, client));
  auto [train, test] = split_train_test(std::move(samples), split_stream);
  return ClientDataset{std::move(train), std::move(test)};
}

std::vector<ClientDataset> generate_federation(const FederationSpec& spec) {
  spec.validate();
  std::vector<ClientDataset> out;
  out.reserve(static_cast<std::size_t>(spec.num_clients()));
  for (int i = 0; i < spec.num_clients(); ++i) {
    out.push_back(generate_client(spec, i));
  }
  return out;
}

std::pair<std::vector<Sample>, std::vector<Sample>> split_train_test(std::vector<Sample> samples,
                                                                     RngStream& stream) {
  const auto n = static_cast<long>(samples.size());
  if (n < 2) {
    throw InvalidArgument("split_train_test: need at least 2 samples");
  }
  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    order[i] = i;
  }
  stream.shuffle(order);
  const long train_count = std::clamp(std::lround(0.8 * static_cast<double>(n)), 1L, n - 1);
  std::pair<std::vector<Sample>, std::vector<Sample>> out;
  for (long i = 0; i < n; ++i) {
    auto& target = i < train_count ? out.first : out.second;
    target.push_back(std::move(samples[order[static_cast<std::size_t>(i)]]));
  }
  return out;
}

Bytes serialize_federation(std::span<const ClientDataset> datasets, int mask_side) {
  const auto pixels = static_cast<std::size_t>(mask_side) * static_cast<std::size_t>(mask_side);
  ByteWriter writer;
  writer.put_raw(kDataMagic);
  writer.put_u32(kDataFormatVersion);
  writer.put_u32(static_cast<std::uint32_t>(mask_side));
  writer.put_u32(static_cast<std::uint32_t>(datasets.size()));
  auto put_samples = [&](const std::vector<Sample>& samples) {
    for (const auto& s : samples) {
      if (s.image.size() != pixels || s.mask.size() != pixels) {
        throw InvalidArgument("serialize_federation: sample size does not match mask_side");
      }
      for (double v : s.image) {
        writer.put_f64(v);
      }
      writer.put_raw(s.mask);
    }
  };
  for (const auto& d : datasets) {
    writer.put_u32(static_cast<std::uint32_t>(d.train.size()));
    writer.put_u32(static_cast<std::uint32_t>(d.test.size()));
    put_samples(d.train);
    put_samples(d.test);
  }
  return std::move(writer).take();
}

std::vector<ClientDataset> deserialize_federation(std::span<const std::uint8_t> bytes) {
  ByteReader reader(bytes);
  auto magic = reader.get_raw(4, "magic");
  if (!std::equal(magic.begin(), magic.end(), std::begin(kDataMagic))) {
    throw DecodeError("bad magic");
  }
  if (reader.get_u32("version") != kDataFormatVersion) {
    throw DecodeError("unsupported version");
  }
  const auto side = reader.get_u32("mask_side");
  if (side < 1 || side > 4096) {
    throw DecodeError("mask_side out of range");
  }
  const std::size_t pixels = static_cast<std::size_t>(side) * side;
  const auto clients = reader.get_u32("client_count");
  auto get_samples = [&](std::uint32_t count) {
    if (static_cast<std::uint64_t>(count) * pixels * 9 > reader.remaining()) {
      throw DecodeError("truncated input while reading samples");
    }
    std::vector<Sample> samples(count);
    for (auto& s : samples) {
      s.image.resize(pixels);
      for (auto& v : s.image) {
        v = reader.get_f64("image");
        if (!(v >= 0.0 && v <= 1.0)) {
          throw DecodeError("image: value outside [0, 1]");
        }
      }
      auto raw = reader.get_raw(pixels, "mask");
      s.mask.assign(raw.begin(), raw.end());
      for (auto m : s.mask) {
        if (m > 1) {
          throw DecodeError("mask: value outside {0, 1}");
        }
      }
    }
    return samples;
  };
  std::vector<ClientDataset> out(clients);
  for (auto& d : out) {
    const auto train = reader.get_u32("train_count");
    const auto test = reader.get_u32("test_count");
    d.train = get_samples(train);
    d.test = get_samples(test);
  }
  if (reader.remaining() != 0) {
    throw DecodeError("trailing bytes after last client");
  }
  return out;
}

}  // namespace fedsca
