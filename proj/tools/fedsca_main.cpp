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

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "fedsca/errors.hpp"
#include "fedsca/experiment_config.hpp"
#include "fedsca/oracles.hpp"
#include "fedsca/orchestrator.hpp"

namespace {

using namespace fedsca;

std::vector<std::string> split_values(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) {
      out.push_back(item);
    }
  }
  return out;
}

void print_round(const RoundRecord& r) {
  std::fprintf(stderr, "round %4d  mean_iou %.4f  mean_dice %.4f  comm %llu\n", r.round, r.mean_iou,
               r.mean_dice, static_cast<unsigned long long>(r.comm_total));
}

int cmd_run(const std::string& config_path, const std::optional<std::uint64_t>& seed,
            const std::string& out, bool quiet) {
  ExperimentConfig cfg = load_config(config_path);
  if (seed) {
    cfg.seed = *seed;
    cfg.federation.seed = *seed;
  }
  if (!out.empty()) {
    cfg.output_dir = out;
  }
  cfg.validate();
  const auto store = run_experiment(cfg, quiet ? RoundCallback{} : RoundCallback(print_round));
  write_store(store, cfg.output_dir);
  const auto& last = store.final_round();
  std::printf("run %s: %d rounds, final mean_iou %s, mean_dice %s, comm %llu scalars\n",
              cfg.output_dir.c_str(), last.round, format_double(last.mean_iou).c_str(),
              format_double(last.mean_dice).c_str(), static_cast<unsigned long long>(last.comm_total));
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& axis_name,
              const std::string& values_text, const std::string& out) {
  ExperimentConfig base = load_config(config_path);
  if (!out.empty()) {
    base.output_dir = out;
  }
  base.validate();
  const SweepAxis axis = parse_sweep_axis(axis_name);
  const auto values = split_values(values_text);
  const auto outcomes = run_sweep(base, axis, values);
  int failures = 0;
  std::printf("%-16s %-12s %-12s %-14s %s\n", axis_name.c_str(), "mean_iou", "mean_dice",
              "comm_total", "output");
  for (const auto& o : outcomes) {
    if (!o.store) {
      ++failures;
      std::printf("%-16s FAILED %s\n", o.value.c_str(), o.error.c_str());
      continue;
    }
    const auto dir = apply_sweep_value(base, axis, o.value).output_dir;
    write_store(*o.store, dir);
    const auto& last = o.store->final_round();
    std::printf("%-16s %-12.6f %-12.6f %-14llu %s\n", o.value.c_str(), last.mean_iou, last.mean_dice,
                static_cast<unsigned long long>(last.comm_total), dir.c_str());
  }
  // Partial results are kept; a failed value is reported through exit code 1.
  return failures == 0 ? 0 : 1;
}

int cmd_oracle_check() {
  bool all = true;
  for (const auto& r : oracle::run_oracle_suite()) {
    std::printf("[%s] %s: %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    all = all && r.passed;
  }
  return all ? 0 : 1;
}

int cmd_export(const std::string& run_dir, const std::string& format, const std::string& out) {
  const ExportFormat fmt = parse_export_format(format);
  const auto store = read_store(run_dir);
  const std::string target = out.empty() ? run_dir + "/export" : out;
  for (const auto& path : export_results(store, fmt, target)) {
    std::printf("%s\n", path.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FedSCA federated adapter-tuning simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run one experiment and write its results store");
  run->add_option("--config", config_path, "Experiment config (INI)")->required();
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--out", out, "Output directory (default: experiment.output_dir)");
  run->add_flag("--quiet", quiet, "No per-round progress on stderr");

  std::string axis;
  std::string values;
  auto* sweep = app.add_subcommand("sweep", "Run one experiment per value of an axis");
  sweep->add_option("--config", config_path, "Base experiment config (INI)")->required();
  sweep->add_option("--axis", axis, "L, beta, alpha, metric, aggregator or ablation")->required();
  sweep->add_option("--values", values, "Comma-separated values")->required();
  sweep->add_option("--out", out, "Parent output directory (default: experiment.output_dir)");

  auto* oracle_check = app.add_subcommand("oracle-check", "Run the projection, QP and gradient oracles");

  std::string run_dir;
  std::string format;
  auto* exp = app.add_subcommand("export", "Export a results store as flat tables");
  exp->add_option("--run", run_dir, "Run directory written by `run`")->required();
  exp->add_option("--format", format, "csv or jsonl")->required();
  exp->add_option("--out", out, "Export directory (default: <run>/export)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_code(ErrorCategory::kConfig);
  }

  try {
    if (*run) {
      return cmd_run(config_path, seed, out, quiet);
    }
    if (*sweep) {
      return cmd_sweep(config_path, axis, values, out);
    }
    if (*oracle_check) {
      return cmd_oracle_check();
    }
    if (*exp) {
      return cmd_export(run_dir, format, out);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", to_string(e.category()), e.what());
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
