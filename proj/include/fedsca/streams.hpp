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

#ifndef FEDSCA_STREAMS_HPP_
#define FEDSCA_STREAMS_HPP_

#include <cstdint>

// Stream-id layout for RngStream. Every consumer of randomness gets its own
// id so results do not depend on the order in which streams are drawn from.
//   bits 56..63  purpose tag
//   bits 24..55  client id
//   bits  0..23  round (or sample) index
namespace fedsca::streams {

inline constexpr std::uint64_t kBackbone = 1ULL << 56;

enum class Purpose : std::uint64_t {
  kAdapterInit = 2,
  kClientData = 3,
  kTrainTestSplit = 4,
  kBatchShuffle = 5,
};

inline constexpr std::uint64_t id(Purpose purpose, std::uint64_t client,
                                  std::uint64_t index = 0) {
  return (static_cast<std::uint64_t>(purpose) << 56) | ((client & 0xffffffffULL) << 24) |
         (index & 0xffffffULL);
}

}  // namespace fedsca::streams

#endif  // FEDSCA_STREAMS_HPP_
