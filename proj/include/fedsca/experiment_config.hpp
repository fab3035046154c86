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

#ifndef FEDSCA_EXPERIMENT_CONFIG_HPP_
#define FEDSCA_EXPERIMENT_CONFIG_HPP_

#include <cstdint>
#include <string>

#include "fedsca/adapter_net.hpp"
#include "fedsca/datagen.hpp"
#include "fedsca/fed_client.hpp"
#include "fedsca/sgca_server.hpp"

namespace fedsca {

enum class Aggregator { kSgca, kFedAvg };

const char* to_string(Aggregator aggregator);
Aggregator parse_aggregator(const std::string& text);

struct ExperimentConfig {
  FederationSpec federation;
  ClientConfig client;
  SgcaConfig sgca;
  Aggregator aggregator = Aggregator::kSgca;
  int rounds = 100;
  ModelShape model;
  std::uint64_t seed = 0;
  std::string output_dir = "runs/latest";
  // Train clients on worker threads. Results do not depend on it.
  bool parallel = true;
  // Draw every client's initial adapters from one stream instead of one
  // stream per client.
  bool shared_adapter_init = false;

  /// Throws ConfigError describing the first violated constraint.
  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Four clients of sizes {100, 40, 80, 120} in two clusters of two, with a
/// strong appearance shift between the clusters.
ExperimentConfig default_experiment_config();

/// Parses the sectioned key = value format written by to_config_text.
/// Missing keys keep their defaults; unknown sections or keys are errors.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Canonical text form: every key, fixed order, shortest round-trip numbers.
std::string to_config_text(const ExperimentConfig& config);

/// SHA-256 of the canonical text.
std::string config_hash(const ExperimentConfig& config);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace fedsca

#endif  // FEDSCA_EXPERIMENT_CONFIG_HPP_
