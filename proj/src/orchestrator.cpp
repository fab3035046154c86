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

#include "fedsca/orchestrator.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <json.hpp>
#include <sstream>

#include "fedsca/errors.hpp"
#include "fedsca/fed_client.hpp"
#include "fedsca/sgca_server.hpp"
#include "fedsca/streams.hpp"

namespace fedsca {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open for writing: " + path.string());
  }
  out << text;
  if (!out) {
    throw IoError("write failed: " + path.string());
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  }
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back(m(i, j));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != n) {
      throw DecodeError("collaboration matrix is not square");
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      m(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
    }
  }
  return m;
}

json round_to_json(const RoundRecord& r) {
  json clients = json::array();
  for (std::size_t i = 0; i < r.clients.size(); ++i) {
    clients.push_back({{"id", i},
                       {"train_loss", r.clients[i].train_loss},
                       {"test_iou", r.clients[i].test_iou},
                       {"test_dice", r.clients[i].test_dice}});
  }
  json out;
  out["round"] = r.round;
  out["clients"] = std::move(clients);
  out["mean_iou"] = r.mean_iou;
  out["mean_dice"] = r.mean_dice;
  out["W"] = r.collaboration ? matrix_to_json(*r.collaboration) : json(nullptr);
  out["layer_shift"] = r.layer_shift;
  out["comm_total"] = r.comm_total;
  return out;
}

RoundRecord round_from_json(const json& j) {
  RoundRecord r;
  r.round = j.at("round").get<int>();
  for (const auto& c : j.at("clients")) {
    r.clients.push_back({c.at("train_loss").get<double>(), c.at("test_iou").get<double>(),
                         c.at("test_dice").get<double>()});
  }
  r.mean_iou = j.at("mean_iou").get<double>();
  r.mean_dice = j.at("mean_dice").get<double>();
  if (!j.at("W").is_null()) {
    r.collaboration = matrix_from_json(j.at("W"));
  }
  r.layer_shift = j.at("layer_shift").get<std::vector<double>>();
  r.comm_total = j.at("comm_total").get<std::uint64_t>();
  return r;
}


std::vector<ClientUpdate> train_all(std::vector<ClientState>& clients, int round, bool parallel) {
  std::vector<ClientUpdate> updates(clients.size());
  if (parallel && clients.size() > 1) {
    std::vector<std::future<ClientUpdate>> futures;
    futures.reserve(clients.size());
    for (auto& client : clients) {
      futures.push_back(std::async(std::launch::async,
                                   [&client, round] { return client.local_train_round(round); }));
    }
    // Join everything before rethrowing so no worker outlives the round.
    std::exception_ptr failure;
    for (std::size_t i = 0; i < futures.size(); ++i) {
      try {
        updates[i] = futures[i].get();
      } catch (...) {
        if (!failure) {
          failure = std::current_exception();
        }
      }
    }
    if (failure) {
      std::rethrow_exception(failure);
    }
  } else {
    for (std::size_t i = 0; i < clients.size(); ++i) {
      updates[i] = clients[i].local_train_round(round);
    }
  }
  // Reduction order is by client id regardless of scheduling.
  std::sort(updates.begin(), updates.end(),
            [](const ClientUpdate& a, const ClientUpdate& b) { return a.client_id < b.client_id; });
  return updates;
}

}  // namespace

bool operator==(const RoundRecord& a, const RoundRecord& b) {
  if (a.collaboration.has_value() != b.collaboration.has_value()) {
    return false;
  }
  if (a.collaboration) {
    const auto& x = *a.collaboration;
    const auto& y = *b.collaboration;
    if (x.rows() != y.rows() || x.cols() != y.cols() || x != y) {
      return false;
    }
  }
  return a.round == b.round && a.clients == b.clients && a.mean_iou == b.mean_iou &&
         a.mean_dice == b.mean_dice && a.layer_shift == b.layer_shift &&
         a.comm_total == b.comm_total;
}

const RoundRecord& ResultsStore::final_round() const {
  if (rounds.empty()) {
    throw InvalidState("results store has no rounds");
  }
  return rounds.back();
}

ResultsStore run_experiment(const ExperimentConfig& config, const RoundCallback& on_round) {
  config.validate();
  ExperimentConfig seeded = config;
  seeded.federation.seed = config.seed;
  return run_experiment(seeded, generate_federation(seeded.federation), on_round);
}

ResultsStore run_experiment(const ExperimentConfig& config, std::vector<ClientDataset> datasets,
                            const RoundCallback& on_round) {
  config.validate();
  const int n = config.federation.num_clients();
  if (static_cast<int>(datasets.size()) != n) {
    throw ConfigError("expected one dataset per client");
  }
  const int low = config.client.low_layers;

  const auto backbone = Backbone::build(config.model, config.seed);
  std::vector<ClientState> clients;
  std::vector<int> sizes;
  clients.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto stream_client = config.shared_adapter_init ? 0ULL : static_cast<std::uint64_t>(i);
    RngStream init(config.seed, streams::id(streams::Purpose::kAdapterInit, stream_client));
    ToyFM model(backbone, init_adapters(config.model, init));
    sizes.push_back(datasets[static_cast<std::size_t>(i)].size());
    clients.emplace_back(i, std::move(model), std::move(datasets[static_cast<std::size_t>(i)]),
                         config.client, config.seed);
  }

  ResultsStore store;
  store.manifest = RunManifest{config_hash(config), config.seed, kCodeVersion};
  store.config_text = to_config_text(config);

  // Last uploaded low-level adapters of every client (round 0: initial ones).
  std::vector<FlatParams> uploaded;
  for (const auto& c : clients) {
    uploaded.push_back(select_for_transmission(c.model(), low));
  }
  CollaborationMatrix w = size_proportional_matrix(sizes);

  for (int r = 1; r <= config.rounds; ++r) {
    try {
      std::vector<FlatParams> broadcast;
      if (config.aggregator == Aggregator::kSgca) {
        broadcast = aggregate(w, uploaded);
      } else {
        broadcast.assign(static_cast<std::size_t>(n), fedavg_aggregate(uploaded, sizes));
      }
      for (int i = 0; i < n; ++i) {
        const auto msg = WireMessage::make(Direction::kBroadcast, i, r,
                                           broadcast[static_cast<std::size_t>(i)]);
        store.ledger.record(msg);
        clients[static_cast<std::size_t>(i)].install_low_adapters(msg.open(low));
      }

      const auto updates = train_all(clients, r, config.parallel);

      RoundRecord record;
      record.round = r;
      record.layer_shift.assign(static_cast<std::size_t>(config.model.num_blocks), 0.0);
      for (int i = 0; i < n; ++i) {
        const auto& u = updates[static_cast<std::size_t>(i)];
        const auto msg = WireMessage::make(Direction::kUpload, i, r, u.low_params);
        store.ledger.record(msg);
        uploaded[static_cast<std::size_t>(i)] = msg.open(low);
        record.clients.push_back({u.train_loss, u.test_iou, u.test_dice});
        record.mean_iou += u.test_iou;
        record.mean_dice += u.test_dice;
        const auto& client = clients[static_cast<std::size_t>(i)];
        const auto shift = measure_param_shift(client.round_start_params(),
                                               client.model().all_adapter_params());
        for (std::size_t k = 0; k < shift.size(); ++k) {
          record.layer_shift[k] += shift[k];
        }
        if (!std::isfinite(u.train_loss)) {
          throw NumericError("non-finite train loss from client " + std::to_string(i));
        }
      }
      record.mean_iou /= n;
      record.mean_dice /= n;
      for (auto& s : record.layer_shift) {
        s /= n;
      }

      if (config.aggregator == Aggregator::kSgca) {
        w = update_matrix(updates, config.sgca);
        w.check();
        record.collaboration = w.weights;
      }
      record.comm_total = store.ledger.total();
      if (on_round) {
        on_round(record);
      }
      store.rounds.push_back(std::move(record));
    } catch (const NumericError& e) {
      throw NumericError("round " + std::to_string(r) + ": " + e.what());
    }
  }
  return store;
}

void write_store(const ResultsStore& store, const std::string& dir) {
  const fs::path root(dir);
  ensure_dir(root);
  json manifest = {{"config_hash", store.manifest.config_hash},
                   {"seed", store.manifest.seed},
                   {"code_version", store.manifest.code_version},
                   {"rounds", store.rounds.size()}};
  write_text(root / "manifest.json", manifest.dump(2) + "\n");
  write_text(root / "config.ini", store.config_text);
  std::string lines;
  for (const auto& r : store.rounds) {
    lines += round_to_json(r).dump() + "\n";
  }
  write_text(root / "rounds.jsonl", lines);
  write_text(root / "ledger.csv", store.ledger.to_csv());
}

ResultsStore read_store(const std::string& dir) {
  const fs::path root(dir);
  ResultsStore store;
  try {
    const json manifest = json::parse(read_text(root / "manifest.json"));
    store.manifest.config_hash = manifest.at("config_hash").get<std::string>();
    store.manifest.seed = manifest.at("seed").get<std::uint64_t>();
    store.manifest.code_version = manifest.at("code_version").get<std::string>();
    store.config_text = read_text(root / "config.ini");
    std::istringstream lines(read_text(root / "rounds.jsonl"));
    std::string line;
    while (std::getline(lines, line)) {
      if (!line.empty()) {
        store.rounds.push_back(round_from_json(json::parse(line)));
      }
    }
  } catch (const json::exception& e) {
    throw DecodeError("results store " + dir + ": " + e.what());
  }
  store.ledger = CommLedger::from_csv(read_text(root / "ledger.csv"));
  return store;
}

ExportFormat parse_export_format(const std::string& text) {
  if (text == "csv") {
    return ExportFormat::kCsv;
  }
  if (text == "jsonl") {
    return ExportFormat::kJsonl;
  }
  throw ConfigError("unknown export format '" + text + "' (expected csv or jsonl)");
}

std::vector<std::string> export_results(const ResultsStore& store, ExportFormat format,
                                        const std::string& dir) {
  if (store.rounds.empty()) {
    throw InvalidState("nothing to export: the store has no rounds");
  }
  const fs::path root(dir);
  ensure_dir(root);
  const auto num = [](double v) { return format_double(v); };
  const std::size_t n = store.rounds.front().clients.size();
  const RoundRecord& last = store.final_round();
  auto mean_loss = [](const RoundRecord& r) {
    double s = 0.0;
    for (const auto& c : r.clients) {
      s += c.train_loss;
    }
    return r.clients.empty() ? 0.0 : s / static_cast<double>(r.clients.size());
  };

  std::vector<std::string> written;
  auto emit = [&](const std::string& name, const std::string& text) {
    write_text(root / name, text);
    written.push_back((root / name).string());
  };

  if (format == ExportFormat::kCsv) {
    std::string metrics = "kind,round,mean_iou,mean_dice,mean_train_loss,comm_total";
    for (std::size_t i = 0; i < n; ++i) {
      metrics += ",iou_" + std::to_string(i) + ",dice_" + std::to_string(i) + ",loss_" + std::to_string(i);
    }
    metrics += "\n";
    auto row = [&](const char* kind, const RoundRecord& r) {
      std::string line = std::string(kind) + "," + std::to_string(r.round) + "," + num(r.mean_iou) +
                         "," + num(r.mean_dice) + "," + num(mean_loss(r)) + "," +
                         std::to_string(r.comm_total);
      for (const auto& c : r.clients) {
        line += "," + num(c.test_iou) + "," + num(c.test_dice) + "," + num(c.train_loss);
      }
      return line + "\n";
    };
    for (const auto& r : store.rounds) {
      metrics += row("round", r);
    }
    metrics += row("summary", last);
    emit("metrics.csv", metrics);

    std::string w = "round,row,col,weight\n";
    for (const auto& r : store.rounds) {
      if (!r.collaboration) {
        continue;
      }
      for (Eigen::Index i = 0; i < r.collaboration->rows(); ++i) {
        for (Eigen::Index j = 0; j < r.collaboration->cols(); ++j) {
          w += std::to_string(r.round) + "," + std::to_string(i) + "," + std::to_string(j) + "," +
               num((*r.collaboration)(i, j)) + "\n";
        }
      }
    }
    emit("collaboration.csv", w);

    std::string shifts = "round,layer,mean_shift\n";
    for (const auto& r : store.rounds) {
      for (std::size_t k = 0; k < r.layer_shift.size(); ++k) {
        shifts += std::to_string(r.round) + "," + std::to_string(k + 1) + "," + num(r.layer_shift[k]) + "\n";
      }
    }
    emit("shifts.csv", shifts);
    emit("ledger.csv", store.ledger.to_csv());
  } else {
    std::string metrics;
    for (const auto& r : store.rounds) {
      json j = round_to_json(r);
      j.erase("W");
      j.erase("layer_shift");
      j["kind"] = "round";
      metrics += j.dump() + "\n";
    }
    json summary = {{"kind", "summary"},
                    {"round", last.round},
                    {"mean_iou", last.mean_iou},
                    {"mean_dice", last.mean_dice},
                    {"mean_train_loss", mean_loss(last)},
                    {"comm_total", last.comm_total},
                    {"config_hash", store.manifest.config_hash},
                    {"seed", store.manifest.seed}};
    metrics += summary.dump() + "\n";
    emit("metrics.jsonl", metrics);

    std::string w;
    for (const auto& r : store.rounds) {
      if (r.collaboration) {
        w += json({{"round", r.round}, {"W", matrix_to_json(*r.collaboration)}}).dump() + "\n";
      }
    }
    emit("collaboration.jsonl", w);

    std::string shifts;
    for (const auto& r : store.rounds) {
      shifts += json({{"round", r.round}, {"layer_shift", r.layer_shift}}).dump() + "\n";
    }
    emit("shifts.jsonl", shifts);

    std::string ledger;
    for (const auto& e : store.ledger.entries()) {
      ledger += json({{"round", e.round},
                      {"direction", to_string(e.direction)},
                      {"client_id", e.client_id},
                      {"scalar_count", e.scalar_count}})
                    .dump() +
                "\n";
    }
    emit("ledger.jsonl", ledger);
  }
  return written;
}

SweepAxis parse_sweep_axis(const std::string& text) {
  for (auto axis : {SweepAxis::kLowLayers, SweepAxis::kBeta, SweepAxis::kAlpha, SweepAxis::kMetric,
                    SweepAxis::kAggregator, SweepAxis::kAblation}) {
    if (text == to_string(axis)) {
      return axis;
    }
  }
  throw ConfigError("unknown sweep axis '" + text + "'");
}

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kLowLayers:
      return "L";
    case SweepAxis::kBeta:
      return "beta";
    case SweepAxis::kAlpha:
      return "alpha";
    case SweepAxis::kMetric:
      return "metric";
    case SweepAxis::kAggregator:
      return "aggregator";
    case SweepAxis::kAblation:
      return "ablation";
  }
  return "?";
}

ExperimentConfig apply_sweep_value(const ExperimentConfig& base, SweepAxis axis,
                                   const std::string& value) {
  ExperimentConfig cfg = base;
  auto number = [&value]() {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != value.size() || value.empty()) {
      throw ConfigError("sweep value '" + value + "' is not a number");
    }
    return v;
  };
  switch (axis) {
    case SweepAxis::kLowLayers: {
      const double v = number();
      if (v != std::floor(v)) {
        throw ConfigError("sweep value '" + value + "' is not an integer");
      }
      cfg.client.low_layers = static_cast<int>(v);
      break;
    }
    case SweepAxis::kBeta:
      cfg.client.beta = number();
      break;
    case SweepAxis::kAlpha:
      cfg.sgca.alpha = number();
      break;
    case SweepAxis::kMetric:
      cfg.sgca.metric = parse_metric(value);
      break;
    case SweepAxis::kAggregator:
      cfg.aggregator = parse_aggregator(value);
      break;
    case SweepAxis::kAblation: {
      if (value == "fedavg_full" || value == "sgca_full") {
        cfg.client.low_layers = cfg.model.num_blocks;
      } else if (value == "fedavg_lat" || value == "sgca_lat") {
        cfg.client.low_layers = 1;
      } else {
        throw ConfigError("unknown ablation '" + value +
                          "' (fedavg_full, sgca_full, fedavg_lat, sgca_lat)");
      }
      cfg.aggregator = value.rfind("sgca", 0) == 0 ? Aggregator::kSgca : Aggregator::kFedAvg;
      break;
    }
  }
  cfg.output_dir = (fs::path(base.output_dir) / (std::string(to_string(axis)) + "=" + value)).string();
  cfg.validate();
  return cfg;
}

std::vector<SweepOutcome> run_sweep(const ExperimentConfig& base, SweepAxis axis,
                                    const std::vector<std::string>& values) {
  if (values.empty()) {
    throw ConfigError("sweep needs at least one value");
  }
  std::vector<SweepOutcome> outcomes;
  for (const auto& value : values) {
    SweepOutcome outcome;
    outcome.value = value;
    try {
      outcome.store = run_experiment(apply_sweep_value(base, axis, value));
    } catch (const Error& e) {
      outcome.error = std::string(to_string(e.category())) + ": " + e.what();
    }
    outcomes.push_back(std::move(outcome));
  }
  return outcomes;
}

}  // namespace fedsca
