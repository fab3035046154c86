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

#include "fedsca/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>

#include "fedsca/errors.hpp"

namespace fedsca {
namespace {

constexpr std::uint8_t kMagic[4] = {'F', 'S', 'C', 'A'};

struct Header {
  std::vector<LayerSpan> manifest;
  std::uint64_t total = 0;
};

Header read_header(ByteReader& reader) {
  auto magic = reader.get_raw(4, "magic");
  if (!std::equal(magic.begin(), magic.end(), std::begin(kMagic))) {
    throw DecodeError("bad magic");
  }
  const auto version = reader.get_u32("version");
  if (version != kParamsFormatVersion) {
    throw DecodeError("unsupported version " + std::to_string(version));
  }
  const auto layer_count = reader.get_u32("layer_count");
  if (static_cast<std::uint64_t>(layer_count) * kParamsHeaderPerLayer > reader.remaining()) {
    throw DecodeError("truncated input while reading manifest");
  }
  Header header;
  header.manifest.reserve(layer_count);
  for (std::uint32_t i = 0; i < layer_count; ++i) {
    const auto index = reader.get_u32("manifest");
    const auto length = reader.get_u64("manifest");
    if (index > static_cast<std::uint32_t>(std::numeric_limits<int>::max()) ||
        (!header.manifest.empty() &&
         static_cast<int>(index) <= header.manifest.back().layer_index)) {
      throw DecodeError("manifest: layer indices must be strictly increasing");
    }
    if (length > reader.remaining() / 8 + 1) {
      throw DecodeError("manifest: layer length exceeds input size");
    }
    header.manifest.push_back({static_cast<int>(index), static_cast<std::size_t>(length)});
    header.total += length;
  }
  return header;
}

}  // namespace

Bytes serialize(const FlatParams& params) {
  ByteWriter writer;
  writer.put_raw(kMagic);
  writer.put_u32(kParamsFormatVersion);
  writer.put_u32(static_cast<std::uint32_t>(params.manifest().size()));
  for (const auto& span : params.manifest()) {
    writer.put_u32(static_cast<std::uint32_t>(span.layer_index));
    writer.put_u64(span.length);
  }
  for (double v : params.values()) {
    writer.put_f64(v);
  }
  return std::move(writer).take();
}

FlatParams deserialize(std::span<const std::uint8_t> bytes) {
  ByteReader reader(bytes);
  Header header = read_header(reader);
  if (reader.remaining() != header.total * 8) {
    throw DecodeError("payload: expected " + std::to_string(header.total * 8) + " bytes, found " +
                      std::to_string(reader.remaining()));
  }
  std::vector<double> values(header.total);
  for (auto& v : values) {
    v = reader.get_f64("payload");
    if (!std::isfinite(v)) {
      throw DecodeError("payload: non-finite value");
    }
  }
  return FlatParams(std::move(values), std::move(header.manifest));
}

Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path);
  }
  Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw IoError("read failed: " + path);
  }
  return bytes;
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open for writing: " + path);
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw IoError("write failed: " + path);
  }
}

void save_params(const FlatParams& params, const std::string& path) {
  write_file(path, serialize(params));
}

FlatParams load_params(const std::string& path) { return deserialize(read_file(path)); }

FlatParams select_for_transmission(const ToyFM& model, int low_layers) {
  if (low_layers < 1 || low_layers > model.num_blocks()) {
    throw InvalidArgument("select_for_transmission: L must be in [1, K]");
  }
  return model.adapter_params(1, low_layers);
}

const char* to_string(Direction direction) {
  return direction == Direction::kUpload ? "upload" : "broadcast";
}

WireMessage WireMessage::make(Direction kind, int client_id, int round, const FlatParams& params) {
  return WireMessage{kind, client_id, round, serialize(params)};
}

FlatParams WireMessage::open(int low_layers) const {
  FlatParams params = deserialize(payload);
  const auto& manifest = params.manifest();
  bool ok = static_cast<int>(manifest.size()) == low_layers;
  for (std::size_t i = 0; ok && i < manifest.size(); ++i) {
    ok = manifest[i].layer_index == static_cast<int>(i) + 1;
  }
  if (!ok) {
    throw ProtocolError(std::string(to_string(kind)) + " from/to client " +
                        std::to_string(client_id) + " does not cover exactly layers 1.." +
                        std::to_string(low_layers));
  }
  return params;
}

std::uint64_t WireMessage::scalar_count() const {
  ByteReader reader(payload);
  return read_header(reader).total;
}

void CommLedger::record(const WireMessage& message) {
  record(LedgerEntry{message.round, message.kind, message.client_id, message.scalar_count()});
}

void CommLedger::record(const LedgerEntry& entry) {
  entries_.push_back(entry);
  total_ += entry.scalar_count;
}

std::uint64_t CommLedger::total_through(int round) const {
  std::uint64_t total = 0;
  for (const auto& e : entries_) {
    if (e.round <= round) {
      total += e.scalar_count;
    }
  }
  return total;
}

std::string CommLedger::to_csv() const {
  std::ostringstream out;
  out << "round,direction,client_id,scalar_count\n";
  for (const auto& e : entries_) {
    out << e.round << ',' << to_string(e.direction) << ',' << e.client_id << ','
        << e.scalar_count << '\n';
  }
  return out.str();
}

CommLedger CommLedger::from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "round,direction,client_id,scalar_count") {
    throw DecodeError("ledger csv: bad header");
  }
  CommLedger ledger;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::istringstream fields(line);
    std::string round, direction, client, count;
    if (!std::getline(fields, round, ',') || !std::getline(fields, direction, ',') ||
        !std::getline(fields, client, ',') || !std::getline(fields, count)) {
      throw DecodeError("ledger csv: malformed row: " + line);
    }
    LedgerEntry entry;
    try {
      entry.round = std::stoi(round);
      entry.client_id = std::stoi(client);
      entry.scalar_count = std::stoull(count);
    } catch (const std::exception&) {
      throw DecodeError("ledger csv: malformed row: " + line);
    }
    if (direction == "upload") {
      entry.direction = Direction::kUpload;
    } else if (direction == "broadcast") {
      entry.direction = Direction::kBroadcast;
    } else {
      throw DecodeError("ledger csv: unknown direction " + direction);
    }
    ledger.record(entry);
  }
  return ledger;
}

std::uint64_t closed_form_comm_cost(int rounds, int clients,
                                    std::span<const std::size_t> layer_sizes, int low_layers) {
  if (low_layers < 0 || static_cast<std::size_t>(low_layers) > layer_sizes.size() || rounds < 0 ||
      clients < 0) {
    throw InvalidArgument("closed_form_comm_cost: bad arguments");
  }
  const std::uint64_t per_message = std::accumulate(
      layer_sizes.begin(), layer_sizes.begin() + low_layers, std::uint64_t{0});
  return 2ULL * static_cast<std::uint64_t>(rounds) * static_cast<std::uint64_t>(clients) *
         per_message;
}

}  // namespace fedsca
