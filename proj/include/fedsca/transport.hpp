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

#ifndef FEDSCA_TRANSPORT_HPP_
#define FEDSCA_TRANSPORT_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedsca/adapter_net.hpp"
#include "fedsca/numerics.hpp"
#include "fedsca/wire_format.hpp"

namespace fedsca {

// .fsca layout, all integers little-endian:
//   "FSCA" | u32 version | u32 layer_count | layer_count x (u32 index, u64 length)
//   | f64 payload, layer-major
inline constexpr std::uint32_t kParamsFormatVersion = 1;
inline constexpr std::size_t kParamsHeaderFixedSize = 12;
inline constexpr std::size_t kParamsHeaderPerLayer = 12;

Bytes serialize(const FlatParams& params);

/// Inverse of serialize. Rejects a wrong magic or version, truncated or
/// oversized input, a malformed manifest and non-finite payload values. The
/// DecodeError message names the field that failed.
FlatParams deserialize(std::span<const std::uint8_t> bytes);

void save_params(const FlatParams& params, const std::string& path);
FlatParams load_params(const std::string& path);

/// Adapter layers 1..L of `model`, the only part that leaves a client.
FlatParams select_for_transmission(const ToyFM& model, int low_layers);

enum class Direction { kUpload, kBroadcast };

const char* to_string(Direction direction);

struct WireMessage {
  Direction kind = Direction::kUpload;
  int client_id = 0;
  int round = 0;
  Bytes payload;

  static WireMessage make(Direction kind, int client_id, int round, const FlatParams& params);

  /// Decodes the payload and checks that it covers exactly layers 1..L.
  /// Throws ProtocolError otherwise.
  FlatParams open(int low_layers) const;

  /// Number of parameter scalars in the payload, read from its header.
  std::uint64_t scalar_count() const;
};

struct LedgerEntry {
  int round = 0;
  Direction direction = Direction::kUpload;
  int client_id = 0;
  std::uint64_t scalar_count = 0;

  friend bool operator==(const LedgerEntry&, const LedgerEntry&) = default;
};

/// Running count of transmitted parameter scalars, both directions.
class CommLedger {
 public:
  void record(const WireMessage& message);
  void record(const LedgerEntry& entry);

  std::uint64_t total() const { return total_; }
  const std::vector<LedgerEntry>& entries() const { return entries_; }
  /// Cumulative total after all messages of rounds <= round.
  std::uint64_t total_through(int round) const;

  /// CSV with header round,direction,client_id,scalar_count.
  std::string to_csv() const;
  static CommLedger from_csv(const std::string& text);

  friend bool operator==(const CommLedger&, const CommLedger&) = default;

 private:
  std::vector<LedgerEntry> entries_;
  std::uint64_t total_ = 0;
};

/// 2 * R * N * sum_{k<=L} |adapter_k|.
std::uint64_t closed_form_comm_cost(int rounds, int clients,
                                    std::span<const std::size_t> layer_sizes, int low_layers);

}  // namespace fedsca

#endif  // FEDSCA_TRANSPORT_HPP_
