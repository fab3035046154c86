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

#ifndef FEDSCA_WIRE_FORMAT_HPP_
#define FEDSCA_WIRE_FORMAT_HPP_

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedsca/errors.hpp"

namespace fedsca {

using Bytes = std::vector<std::uint8_t>;

/// Appends fixed-width little-endian values.
class ByteWriter {
 public:
  void put_u8(std::uint8_t v) { bytes_.push_back(v); }
  void put_u32(std::uint32_t v) { put_le(v, 4); }
  void put_u64(std::uint64_t v) { put_le(v, 8); }
  void put_f64(double v) { put_le(std::bit_cast<std::uint64_t>(v), 8); }
  void put_raw(std::span<const std::uint8_t> raw) {
    bytes_.insert(bytes_.end(), raw.begin(), raw.end());
  }

  const Bytes& bytes() const& { return bytes_; }
  Bytes&& take() && { return std::move(bytes_); }

 private:
  void put_le(std::uint64_t v, int width) {
    for (int i = 0; i < width; ++i) {
      bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }

  Bytes bytes_;
};

/// Reads fixed-width little-endian values. Running past the end throws a
/// DecodeError naming `field`.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t get_u8(const char* field) { return static_cast<std::uint8_t>(get_le(1, field)); }
  std::uint32_t get_u32(const char* field) { return static_cast<std::uint32_t>(get_le(4, field)); }
  std::uint64_t get_u64(const char* field) { return get_le(8, field); }
  double get_f64(const char* field) { return std::bit_cast<double>(get_le(8, field)); }
  std::span<const std::uint8_t> get_raw(std::size_t count, const char* field) {
    require(count, field);
    auto out = bytes_.subspan(offset_, count);
    offset_ += count;
    return out;
  }

  std::size_t remaining() const { return bytes_.size() - offset_; }

 private:
  void require(std::size_t count, const char* field) const {
    if (remaining() < count) {
      throw DecodeError(std::string("truncated input while reading ") + field);
    }
  }

  std::uint64_t get_le(int width, const char* field) {
    require(static_cast<std::size_t>(width), field);
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
      v |= static_cast<std::uint64_t>(bytes_[offset_ + static_cast<std::size_t>(i)]) << (8 * i);
    }
    offset_ += static_cast<std::size_t>(width);
    return v;
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t offset_ = 0;
};

Bytes read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace fedsca

#endif  // FEDSCA_WIRE_FORMAT_HPP_
