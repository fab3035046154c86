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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fedsca/errors.hpp"
#include "fedsca/orchestrator.hpp"
#include "test_util.hpp"

namespace fedsca {
namespace {

namespace fs = std::filesystem;
using testing::tiny_config;

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("fedsca_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

TEST(Config, DefaultsAndRoundTrip) {
  const auto cfg = default_experiment_config();
  EXPECT_EQ(cfg.rounds, 100);
  EXPECT_EQ(cfg.client.learning_rate, 1e-4);
  EXPECT_EQ(cfg.client.batch_size, 32);
  EXPECT_EQ(cfg.client.beta, 0.01);
  EXPECT_EQ(cfg.client.low_layers, 1);
  EXPECT_EQ(cfg.model.num_blocks, 6);
  EXPECT_EQ(cfg.model.feature_dim, 256);
  EXPECT_EQ(cfg.model.bottleneck_dim, 16);
  EXPECT_EQ(cfg.federation.client_sizes, (std::vector<int>{100, 40, 80, 120}));
  EXPECT_NO_THROW(cfg.validate());
  const auto text = to_config_text(cfg);
  EXPECT_EQ(parse_config_text(text), cfg);
  EXPECT_EQ(to_config_text(parse_config_text(text)), text);
}

TEST(Config, ParsesOverrides) {
  const auto cfg = parse_config_text(
      "[experiment]\nrounds = 7\nseed = 12\naggregator = fedavg\n"
      "[client]\nbeta = 0.5\nlow_layers = 2\n"
      "[sgca]\nmetric = cosine\nm_mode = column_mj\n"
      "[federation]\nclient_sizes = 10, 20, 30\ncluster_of = 0, 1, 1\n");
  EXPECT_EQ(cfg.rounds, 7);
  EXPECT_EQ(cfg.seed, 12u);
  EXPECT_EQ(cfg.federation.seed, 12u);
  EXPECT_EQ(cfg.aggregator, Aggregator::kFedAvg);
  EXPECT_EQ(cfg.client.beta, 0.5);
  EXPECT_EQ(cfg.client.low_layers, 2);
  EXPECT_EQ(cfg.sgca.metric, SimilarityMetric::kCosine);
  EXPECT_EQ(cfg.sgca.prior_mode, PriorMode::kColumn);
  EXPECT_EQ(cfg.federation.client_sizes, (std::vector<int>{10, 20, 30}));
}

TEST(Config, RejectsTyposAndInvalidValues) {
  EXPECT_THROW(parse_config_text("[experiment]\nround = 5\n"), ConfigError);
  EXPECT_THROW(parse_config_text("[experimnt]\nrounds = 5\n"), ConfigError);
  EXPECT_THROW(parse_config_text("[experiment]\nrounds = five\n"), ConfigError);
  EXPECT_THROW(parse_config_text("[experiment]\nrounds = 0\n"), ConfigError);
  EXPECT_THROW(parse_config_text("[client]\nlow_layers = 7\n"), ConfigError);
  EXPECT_THROW(parse_config_text("[client]\nlearning_rate = 0\n"), ConfigError);
  EXPECT_THROW(parse_config_text("[sgca]\nalpha = -1\n"), ConfigError);
  EXPECT_THROW(parse_config_text("[model]\nnum_blocks = 1\n"), ConfigError);
  EXPECT_THROW(parse_config_text("[sgca]\nmetric = manhattan\n"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/fedsca.ini"), IoError);
}

TEST(Config, HashIgnoresOutputLocationOnly) {
  auto a = default_experiment_config();
  auto b = a;
  b.output_dir = "elsewhere";
  b.parallel = false;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.client.beta = 0.02;
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 64u);
}

TEST(Run, AlphaZeroTwoClientsGivesUniformW) {
  auto cfg = tiny_config(1);
  cfg.federation.client_sizes = {6, 9};
  cfg.federation.cluster_of = {0, 1};
  cfg.sgca.alpha = 0.0;
  const auto store = run_experiment(cfg);
  ASSERT_EQ(store.rounds.size(), 1u);
  const Matrix& w = *store.rounds[0].collaboration;
  EXPECT_EQ(w, Matrix::Constant(2, 2, 0.5));
}

TEST(Run, RecordsAreConsistent) {
  auto cfg = tiny_config(4);
  const auto store = run_experiment(cfg);
  ASSERT_EQ(store.rounds.size(), 4u);
  const std::size_t layer1 = cfg.model.adapter_size();
  for (const auto& r : store.rounds) {
    ASSERT_EQ(r.clients.size(), 3u);
    double iou = 0.0;
    double dice = 0.0;
    for (const auto& c : r.clients) {
      iou += c.test_iou;
      dice += c.test_dice;
    }
    EXPECT_NEAR(r.mean_iou, iou / 3.0, 1e-12);
    EXPECT_NEAR(r.mean_dice, dice / 3.0, 1e-12);
    EXPECT_EQ(r.comm_total, 2ULL * static_cast<unsigned>(r.round) * 3 * layer1);
    EXPECT_EQ(r.layer_shift.size(), 3u);
    ASSERT_TRUE(r.collaboration.has_value());
    CollaborationMatrix{*r.collaboration, r.round}.check();
  }
  EXPECT_EQ(store.manifest.config_hash, config_hash(cfg));
  EXPECT_EQ(store.ledger.entries().size(), 4u * 3 * 2);
}

TEST(Run, DeterministicAndScheduleIndependent) {
  auto cfg = tiny_config(3);
  cfg.parallel = true;
  const auto a = run_experiment(cfg);
  const auto b = run_experiment(cfg);
  cfg.parallel = false;
  const auto c = run_experiment(cfg);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.rounds, c.rounds);
  EXPECT_EQ(a.ledger, c.ledger);
}

TEST(Run, FedAvgPreservesSymmetry) {
  auto cfg = tiny_config(4);
  cfg.aggregator = Aggregator::kFedAvg;
  cfg.shared_adapter_init = true;
  cfg.client.batch_size = 64;  // whole train set per step, so batch order is irrelevant
  cfg.client.low_layers = cfg.model.num_blocks;
  const auto one = generate_client(cfg.federation, 0);
  std::vector<ClientDataset> data(3, one);
  cfg.federation.client_sizes = {one.size(), one.size(), one.size()};
  const auto store = run_experiment(cfg, data);
  for (const auto& r : store.rounds) {
    EXPECT_FALSE(r.collaboration.has_value());
    for (const auto& c : r.clients) {
      EXPECT_EQ(c, r.clients[0]);
    }
  }
}

TEST(Run, AlphaZeroBroadcastIsPlainMean) {
  // With alpha = 0 every row is uniform, so every client is sent the same
  // mean; under shared init and identical data the clients stay identical.
  auto cfg = tiny_config(3);
  cfg.sgca.alpha = 0.0;
  cfg.shared_adapter_init = true;
  cfg.client.batch_size = 64;
  cfg.client.low_layers = cfg.model.num_blocks;
  const auto one = generate_client(cfg.federation, 1);
  std::vector<ClientDataset> data(3, one);
  cfg.federation.client_sizes = {one.size(), one.size(), one.size()};
  const auto store = run_experiment(cfg, data);
  for (const auto& r : store.rounds) {
    EXPECT_EQ(*r.collaboration, Matrix::Constant(3, 3, 1.0 / 3.0));
    for (const auto& c : r.clients) {
      EXPECT_EQ(c, r.clients[0]);
    }
  }
}

TEST(Run, DatasetCountMismatchIsConfigError) {
  auto cfg = tiny_config(1);
  EXPECT_THROW(run_experiment(cfg, std::vector<ClientDataset>(2)), ConfigError);
  cfg.rounds = 0;
  EXPECT_THROW(run_experiment(cfg), ConfigError);
}

TEST(Store, WriteReadRoundTrip) {
  const auto store = run_experiment(tiny_config(2));
  const auto dir = scratch_dir("store");
  write_store(store, dir.string());
  for (const char* f : {"manifest.json", "config.ini", "rounds.jsonl", "ledger.csv"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  EXPECT_EQ(read_store(dir.string()), store);
  EXPECT_EQ(parse_config_text(store.config_text), tiny_config(2));
  EXPECT_THROW(read_store((dir / "missing").string()), IoError);
  fs::remove_all(dir);
}

TEST(Export, CsvRowsAndIdempotence) {
  const auto store = run_experiment(tiny_config(5));
  const auto dir = scratch_dir("export_csv");
  const auto files = export_results(store, ExportFormat::kCsv, dir.string());
  EXPECT_EQ(files.size(), 4u);
  const std::string metrics = slurp(dir / "metrics.csv");
  int rows = 0;
  int summary = 0;
  std::istringstream lines(metrics);
  std::string line;
  std::getline(lines, line);
  while (std::getline(lines, line)) {
    rows += line.rfind("round,", 0) == 0;
    summary += line.rfind("summary,", 0) == 0;
  }
  EXPECT_EQ(rows, 5);
  EXPECT_EQ(summary, 1);
  std::vector<std::string> first;
  for (const auto& f : files) {
    first.push_back(slurp(f));
  }
  export_results(store, ExportFormat::kCsv, dir.string());
  for (std::size_t i = 0; i < files.size(); ++i) {
    EXPECT_EQ(slurp(files[i]), first[i]);
  }
  EXPECT_EQ(slurp(dir / "ledger.csv"), store.ledger.to_csv());
  fs::remove_all(dir);
}

TEST(Export, JsonlAndFormatParsing) {
  const auto store = run_experiment(tiny_config(2));
  const auto dir = scratch_dir("export_jsonl");
  const auto files = export_results(store, ExportFormat::kJsonl, dir.string());
  EXPECT_EQ(files.size(), 4u);
  const std::string metrics = slurp(dir / "metrics.jsonl");
  EXPECT_EQ(std::count(metrics.begin(), metrics.end(), '\n'), 3);
  EXPECT_NE(metrics.find("\"kind\":\"summary\""), std::string::npos);
  EXPECT_EQ(parse_export_format("jsonl"), ExportFormat::kJsonl);
  EXPECT_THROW(parse_export_format("xml"), ConfigError);
  EXPECT_THROW(export_results(ResultsStore{}, ExportFormat::kCsv, dir.string()), InvalidState);
  fs::remove_all(dir);
}

TEST(Sweep, LowLayerTotalsIncrease) {
  const auto cfg = tiny_config(2);
  const auto out = run_sweep(cfg, SweepAxis::kLowLayers, {"1", "2", "3"});
  ASSERT_EQ(out.size(), 3u);
  std::uint64_t prev = 0;
  for (const auto& o : out) {
    ASSERT_TRUE(o.store.has_value()) << o.error;
    EXPECT_GT(o.store->ledger.total(), prev);
    prev = o.store->ledger.total();
  }
}

TEST(Sweep, FailuresAreIsolated) {
  const auto cfg = tiny_config(1);
  const auto out = run_sweep(cfg, SweepAxis::kLowLayers, {"1", "9", "x"});
  ASSERT_EQ(out.size(), 3u);
  EXPECT_TRUE(out[0].store.has_value());
  EXPECT_FALSE(out[1].store.has_value());
  EXPECT_FALSE(out[2].error.empty());
  EXPECT_THROW(run_sweep(cfg, SweepAxis::kBeta, {}), ConfigError);
}

TEST(Sweep, AxisValuesApply) {
  const auto base = tiny_config(1);
  EXPECT_EQ(apply_sweep_value(base, SweepAxis::kBeta, "10").client.beta, 10.0);
  EXPECT_EQ(apply_sweep_value(base, SweepAxis::kAlpha, "0.5").sgca.alpha, 0.5);
  EXPECT_EQ(apply_sweep_value(base, SweepAxis::kMetric, "l1_based").sgca.metric, SimilarityMetric::kL1Based);
  EXPECT_EQ(apply_sweep_value(base, SweepAxis::kAggregator, "fedavg").aggregator, Aggregator::kFedAvg);
  const auto full = apply_sweep_value(base, SweepAxis::kAblation, "fedavg_full");
  EXPECT_EQ(full.client.low_layers, base.model.num_blocks);
  EXPECT_EQ(full.aggregator, Aggregator::kFedAvg);
  const auto lat = apply_sweep_value(base, SweepAxis::kAblation, "sgca_lat");
  EXPECT_EQ(lat.client.low_layers, 1);
  EXPECT_EQ(lat.aggregator, Aggregator::kSgca);
  EXPECT_NE(full.output_dir, lat.output_dir);
  EXPECT_THROW(apply_sweep_value(base, SweepAxis::kAblation, "ours"), ConfigError);
  EXPECT_EQ(parse_sweep_axis("L"), SweepAxis::kLowLayers);
  EXPECT_THROW(parse_sweep_axis("gamma"), ConfigError);
}

}  // namespace
}  // namespace fedsca
