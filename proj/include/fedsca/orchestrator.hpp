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

#ifndef FEDSCA_ORCHESTRATOR_HPP_
#define FEDSCA_ORCHESTRATOR_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fedsca/experiment_config.hpp"
#include "fedsca/transport.hpp"

namespace fedsca {

inline constexpr const char* kCodeVersion = "0.1.0";

struct ClientRoundMetrics {
  double train_loss = 0.0;
  double test_iou = 0.0;
  double test_dice = 0.0;

  friend bool operator==(const ClientRoundMetrics&, const ClientRoundMetrics&) = default;
};

struct RoundRecord {
  int round = 0;
  std::vector<ClientRoundMetrics> clients;  // indexed by client id
  double mean_iou = 0.0;
  double mean_dice = 0.0;
  std::optional<Matrix> collaboration;  // W after this round; absent under FedAvg
  std::vector<double> layer_shift;      // per adapter layer, mean over clients
  std::uint64_t comm_total = 0;         // cumulative scalars through this round

  friend bool operator==(const RoundRecord& a, const RoundRecord& b);
};

struct RunManifest {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string code_version = kCodeVersion;

  friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

struct ResultsStore {
  RunManifest manifest;
  std::string config_text;
  std::vector<RoundRecord> rounds;
  CommLedger ledger;

  const RoundRecord& final_round() const;

  friend bool operator==(const ResultsStore&, const ResultsStore&) = default;
};

/// Optional per-round observer, called on the orchestrator thread.
using RoundCallback = std::function<void(const RoundRecord&)>;

/// Generates the federation from the config and runs the full round loop.
ResultsStore run_experiment(const ExperimentConfig& config, const RoundCallback& on_round = {});

/// Same, on caller-provided client datasets (one per client in
/// config.federation; the generator is not used).
ResultsStore run_experiment(const ExperimentConfig& config, std::vector<ClientDataset> datasets,
                            const RoundCallback& on_round = {});

/// Store layout on disk: manifest.json, config.ini, rounds.jsonl, ledger.csv.
void write_store(const ResultsStore& store, const std::string& dir);
ResultsStore read_store(const std::string& dir);

enum class ExportFormat { kCsv, kJsonl };
ExportFormat parse_export_format(const std::string& text);

/// Flat tables for plotting: metrics (one row per round plus a summary row),
/// collaboration matrices, layer shifts and the ledger. Returns the paths
/// written.
std::vector<std::string> export_results(const ResultsStore& store, ExportFormat format,
                                        const std::string& dir);

enum class SweepAxis { kLowLayers, kBeta, kAlpha, kMetric, kAggregator, kAblation };
SweepAxis parse_sweep_axis(const std::string& text);
const char* to_string(SweepAxis axis);

/// Copy of `base` with one axis set to `value`. For kAblation the values are
/// fedavg_full, sgca_full, fedavg_lat and sgca_lat: aggregator x (L = K or
/// L = 1).
ExperimentConfig apply_sweep_value(const ExperimentConfig& base, SweepAxis axis,
                                   const std::string& value);

struct SweepOutcome {
  std::string value;
  std::optional<ResultsStore> store;
  std::string error;  // set when the run failed
};

/// One run per value with the base seed. A failing run is reported in its
/// outcome and does not stop the others.
std::vector<SweepOutcome> run_sweep(const ExperimentConfig& base, SweepAxis axis,
                                    const std::vector<std::string>& values);

}  // namespace fedsca

#endif  // FEDSCA_ORCHESTRATOR_HPP_
