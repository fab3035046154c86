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

// Acceptance suite: one PASS/FAIL line per criterion. Exit status is non-zero
// when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "fedsca/errors.hpp"
#include "fedsca/fed_client.hpp"
#include "fedsca/oracles.hpp"
#include "fedsca/orchestrator.hpp"
#include "fedsca/sgca_server.hpp"
#include "fedsca/streams.hpp"
#include "fedsca/transport.hpp"

namespace fs = std::filesystem;
using namespace fedsca;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_s > 0.0 && secs >= limit_s) {
    out.passed = false;
    out.detail += " (over time budget)";
  }
  failures += out.passed ? 0 : 1;
  std::printf("[%s] %2d %-28s %7.2fs  %s\n", out.passed ? "PASS" : "FAIL", id, name.c_str(), secs,
              out.detail.c_str());
  std::fflush(stdout);
}

Outcome from_check(const oracle::CheckResult& r) { return {r.passed, r.detail}; }

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// Row sums and signs of one W snapshot; returns the worst row-sum error, or
// infinity if any entry is negative.
double row_violation(const Matrix& w) {
  double worst = 0.0;
  for (int i = 0; i < w.rows(); ++i) {
    if ((w.row(i).array() < 0.0).any()) {
      return INFINITY;
    }
    worst = std::max(worst, std::abs(w.row(i).sum() - 1.0));
  }
  return worst;
}

struct DirectionalRuns {
  std::vector<ResultsStore> ours;
  std::vector<ResultsStore> baseline;
  std::vector<double> ours_secs;
  std::vector<double> baseline_secs;
};

}  // namespace

int main() {
  const ExperimentConfig base = default_experiment_config();
  std::printf("fedsca acceptance suite (K=%d, N=%d, R=%d)\n", base.model.num_blocks,
              base.federation.num_clients(), base.rounds);

  // Criterion 6 runs feed criteria 2 and 8 as well.
  DirectionalRuns runs;
  auto timed_run = [](const ExperimentConfig& cfg, std::vector<double>& secs) {
    const auto t0 = std::chrono::steady_clock::now();
    auto store = run_experiment(cfg);
    secs.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    return store;
  };
  std::printf("preparing 6 federated runs of %d rounds\n", base.rounds);
  std::fflush(stdout);
  // The directional runs are shared by the invariants, superiority and
  // determinism criteria.
  std::string setup_error;
  try {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      ExperimentConfig a = base;
      a.seed = seed;
      a.aggregator = Aggregator::kSgca;
      a.client.low_layers = 1;
      ExperimentConfig b = a;
      b.aggregator = Aggregator::kFedAvg;
      b.client.low_layers = b.model.num_blocks;
      runs.ours.push_back(timed_run(a, runs.ours_secs));
      runs.baseline.push_back(timed_run(b, runs.baseline_secs));
    }
  } catch (const std::exception& e) {
    setup_error = e.what();
  }

  report(1, "qp-oracle-equivalence", 10.0, [] { return from_check(oracle::check_solve_row(1000, 101)); });

  report(2, "collaboration-invariants", 0.0, [&] {
    if (!setup_error.empty()) {
      return Outcome{false, "runs failed: " + setup_error};
    }
    double worst = 0.0;
    int snapshots = 0;
    for (const auto& store : runs.ours) {
      for (const auto& r : store.rounds) {
        if (!r.collaboration) {
          return Outcome{false, fmt("round %.0f has no W", r.round)};
        }
        worst = std::max(worst, row_violation(*r.collaboration));
        ++snapshots;
      }
    }
    // alpha = 0 on random uploads for N = 2..8.
    RngStream rng(7, 0);
    bool uniform = true;
    SgcaConfig zero;
    zero.alpha = 0.0;
    for (int n = 2; n <= 8; ++n) {
      std::vector<ClientUpdate> ups(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) {
        auto& u = ups[static_cast<std::size_t>(i)];
        u.client_id = i;
        u.num_samples = 1 + static_cast<int>(rng.uniform(0.0, 200.0));
        std::vector<double> v(12);
        for (auto& x : v) x = rng.uniform(-1.0, 1.0);
        u.low_params = FlatParams(v, {LayerSpan{1, 12}});
      }
      const auto w = update_matrix(ups, zero);
      uniform = uniform && (w.weights.array() == 1.0 / n).all();
    }
    Outcome out;
    out.passed = snapshots > 0 && worst <= 1e-9 && uniform;
    out.detail = fmt("%.0f snapshots, worst |row sum - 1| %.2e, alpha=0 uniform: ", snapshots, worst) +
                 (uniform ? "yes" : "no");
    return out;
  });

  report(3, "gradient-correctness", 30.0, [] { return from_check(oracle::check_gradients(20, 303)); });
  report(4, "communication-cost", 1.0, [] { return from_check(oracle::check_comm_cost()); });

  report(5, "cluster-recovery", 120.0, [&] {
    bool all = true;
    std::string detail;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      ExperimentConfig cfg = base;
      cfg.seed = seed;
      cfg.rounds = 30;
      const auto store = run_experiment(cfg);
      const Matrix& w = *store.final_round().collaboration;
      const auto& cluster = cfg.federation.cluster_of;
      double weakest = 1.0;
      for (int i = 0; i < w.rows(); ++i) {
        double own = 0.0;
        for (int j = 0; j < w.cols(); ++j) {
          if (cluster[static_cast<std::size_t>(i)] == cluster[static_cast<std::size_t>(j)]) {
            own += w(i, j);
          }
        }
        weakest = std::min(weakest, own);
      }
      all = all && weakest > 0.6;
      detail += fmt(" seed %.0f min in-cluster mass %.4f;", static_cast<double>(seed), weakest);
    }
    return Outcome{all, detail};
  });

  report(6, "directional-superiority", 0.0, [&] {
    if (!setup_error.empty()) {
      return Outcome{false, "runs failed: " + setup_error};
    }
    double ours = 0.0;
    double baseline = 0.0;
    std::string per_seed;
    for (std::size_t k = 0; k < 3; ++k) {
      const double x = runs.ours[k].final_round().mean_iou;
      const double y = runs.baseline[k].final_round().mean_iou;
      ours += x / 3.0;
      baseline += y / 3.0;
      per_seed += fmt(" s%.0f:%.4f/%.4f", static_cast<double>(k), x, y);
    }
    double slowest = 0.0;
    for (double s : runs.ours_secs) slowest = std::max(slowest, s);
    for (double s : runs.baseline_secs) slowest = std::max(slowest, s);
    Outcome out;
    out.passed = ours - baseline >= 0.01 && slowest < 300.0;
    out.detail = fmt("IoU sgca,L=1 %.4f vs fedavg,L=K %.4f (diff %.4f);", ours, baseline, ours - baseline) +
                 per_seed + fmt("; slowest run %.1fs", slowest);
    return out;
  });

  report(7, "parameter-shift-ordering", 60.0, [&] {
    bool all = true;
    std::string detail;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      ExperimentConfig cfg = base;
      cfg.seed = seed;
      cfg.federation.seed = seed;
      cfg.client.local_epochs = 10;
      const int client_id = 0;
      auto data = generate_client(cfg.federation, client_id);
      RngStream init(seed, streams::id(streams::Purpose::kAdapterInit, client_id));
      ClientState client(client_id, ToyFM(Backbone::build(cfg.model, seed), init_adapters(cfg.model, init)),
                         std::move(data), cfg.client, seed);
      const auto before = client.model().all_adapter_params();
      client.install_low_adapters(select_for_transmission(client.model(), 1));
      client.local_train_round(1);
      const auto shift = measure_param_shift(before, client.model().all_adapter_params());
      all = all && shift.front() < shift.back();
      detail += fmt(" seed %.0f: %.3e < %.3e;", static_cast<double>(seed), shift.front(), shift.back());
    }
    return Outcome{all, detail};
  });

  report(8, "determinism", 0.0, [&] {
    if (runs.ours.empty()) {
      return Outcome{false, "no reference run"};
    }
    ExperimentConfig cfg = base;
    cfg.seed = 0;
    cfg.aggregator = Aggregator::kSgca;
    cfg.client.low_layers = 1;
    std::vector<double> secs;
    const auto again = timed_run(cfg, secs);
    const fs::path root = fs::temp_directory_path() / "fedsca_acceptance_determinism";
    fs::remove_all(root);
    std::size_t files = 0;
    bool same = true;
    for (auto format : {ExportFormat::kCsv, ExportFormat::kJsonl}) {
      const auto a = export_results(runs.ours.front(), format, (root / "a").string());
      const auto b = export_results(again, format, (root / "b").string());
      same = same && a.size() == b.size();
      for (std::size_t i = 0; same && i < a.size(); ++i) {
        same = fs::path(a[i]).filename() == fs::path(b[i]).filename() && slurp(a[i]) == slurp(b[i]);
      }
      files += a.size();
    }
    write_store(runs.ours.front(), (root / "store_a").string());
    write_store(again, (root / "store_b").string());
    for (const char* f : {"manifest.json", "rounds.jsonl", "ledger.csv", "config.ini"}) {
      same = same && slurp(root / "store_a" / f) == slurp(root / "store_b" / f);
    }
    fs::remove_all(root);
    return Outcome{same, fmt("%.0f export files and 4 store files compared byte-for-byte; rerun %.1fs",
                             static_cast<double>(files), secs.front())};
  });

  report(9, "metric-fixtures", 1.0, [] { return from_check(oracle::check_metric_fixtures()); });
  report(10, "serialization-robustness", 10.0, [] { return from_check(oracle::check_serialization(10000, 1010)); });

  std::printf("%s: %d of 10 criteria failed\n", failures == 0 ? "OK" : "FAILED", failures);
  return failures == 0 ? 0 : 1;
}
