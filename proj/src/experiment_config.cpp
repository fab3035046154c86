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

#include "fedsca/experiment_config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "fedsca/digest.hpp"
#include "fedsca/errors.hpp"

namespace fedsca {
namespace {

using boost::property_tree::ptree;

// Reads typed values out of one INI section and remembers which keys were
// consumed so leftovers can be reported.
class SectionReader {
 public:
  SectionReader(std::string name, const ptree& section) : name_(std::move(name)), section_(section) {
    for (const auto& [key, child] : section_) {
      if (!child.empty()) {
        throw ConfigError("[" + name_ + "] " + key + ": nested keys are not supported");
      }
    }
  }

  void read(const char* key, std::string& out) {
    if (auto v = raw(key)) {
      out = *v;
    }
  }

  void read(const char* key, double& out) {
    if (auto v = raw(key)) {
      out = parse_double(*v, key);
    }
  }

  void read(const char* key, int& out) {
    if (auto v = raw(key)) {
      out = parse_int(*v, key);
    }
  }

  void read(const char* key, std::uint64_t& out) {
    if (auto v = raw(key)) {
      std::uint64_t value = 0;
      const auto* end = v->data() + v->size();
      auto [ptr, ec] = std::from_chars(v->data(), end, value);
      if (ec != std::errc() || ptr != end) {
        fail(key, "expected an unsigned integer, got '" + *v + "'");
      }
      out = value;
    }
  }

  void read(const char* key, bool& out) {
    if (auto v = raw(key)) {
      if (*v == "true") {
        out = true;
      } else if (*v == "false") {
        out = false;
      } else {
        fail(key, "expected true or false, got '" + *v + "'");
      }
    }
  }

  void read(const char* key, std::vector<int>& out) {
    if (auto v = raw(key)) {
      out.clear();
      std::istringstream in(*v);
      std::string item;
      while (std::getline(in, item, ',')) {
        out.push_back(parse_int(trim(item), key));
      }
    }
  }

  void finish() const {
    for (const auto& [key, child] : section_) {
      if (!used_.contains(key)) {
        throw ConfigError("[" + name_ + "] unknown key '" + key + "'");
      }
    }
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }

  std::optional<std::string> raw(const char* key) {
    auto it = section_.find(key);
    if (it == section_.not_found()) {
      return std::nullopt;
    }
    used_.insert(key);
    return trim(it->second.data());
  }

  [[noreturn]] void fail(const char* key, const std::string& why) const {
    throw ConfigError("[" + name_ + "] " + key + ": " + why);
  }

  double parse_double(const std::string& text, const char* key) const {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
      fail(key, "expected a number, got '" + text + "'");
    }
    return value;
  }

  int parse_int(const std::string& text, const char* key) const {
    int value = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
      fail(key, "expected an integer, got '" + text + "'");
    }
    return value;
  }

  std::string name_;
  const ptree& section_;
  std::set<std::string> used_;
};

std::string join(const std::vector<int>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out += (i ? "," : "") + std::to_string(values[i]);
  }
  return out;
}

ClusterParams strong_shift_cluster(int which) {
  ClusterParams c;
  c.blob_count_min = 1;
  c.blob_count_max = 2;
  c.radius_min = 2.0;
  c.radius_max = 4.0;
  if (which == 0) {
    c.gain = 0.5;
    c.background = 0.1;
    c.noise = 0.05;
    c.offset_x = -2.0;
    c.offset_y = -2.0;
  } else {
    c.gain = 0.4;
    c.background = 0.55;
    c.noise = 0.08;
    c.offset_x = 2.0;
    c.offset_y = 2.0;
  }
  return c;
}

}  // namespace

const char* to_string(Aggregator aggregator) {
  return aggregator == Aggregator::kSgca ? "sgca" : "fedavg";
}

Aggregator parse_aggregator(const std::string& text) {
  if (text == "sgca") {
    return Aggregator::kSgca;
  }
  if (text == "fedavg") {
    return Aggregator::kFedAvg;
  }
  throw ConfigError("unknown aggregator '" + text + "'");
}

void ExperimentConfig::validate() const {
  if (rounds < 1) {
    throw ConfigError("rounds must be >= 1");
  }
  try {
    model.validate();
    if (model.num_blocks < 2) {
      throw InvalidArgument("model: num_blocks must be >= 2");
    }
    federation.validate();
    if (model.feature_dim != federation.pixels()) {
      throw InvalidArgument("model: feature_dim must equal mask_side^2");
    }
    client.validate(model.num_blocks);
    sgca.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig default_experiment_config() {
  ExperimentConfig config;
  config.federation.client_sizes = {100, 40, 80, 120};
  config.federation.cluster_of = {0, 0, 1, 1};
  config.federation.clusters = {strong_shift_cluster(0), strong_shift_cluster(1)};
  config.federation.mask_side = 16;
  return config;
}

ExperimentConfig parse_config_text(const std::string& text) {
  ptree tree;
  try {
    std::istringstream in(text);
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }

  ExperimentConfig cfg = default_experiment_config();
  std::map<int, ClusterParams> clusters;
  bool clusters_given = false;
  for (const auto& [name, section] : tree) {
    if (section.empty() && !section.data().empty()) {
      throw ConfigError("key '" + name + "' outside of any section");
    }
    SectionReader r(name, section);
    if (name == "experiment") {
      r.read("rounds", cfg.rounds);
      r.read("seed", cfg.seed);
      std::string aggregator = to_string(cfg.aggregator);
      r.read("aggregator", aggregator);
      cfg.aggregator = parse_aggregator(aggregator);
      r.read("output_dir", cfg.output_dir);
      r.read("parallel", cfg.parallel);
      r.read("shared_adapter_init", cfg.shared_adapter_init);
    } else if (name == "model") {
      r.read("num_blocks", cfg.model.num_blocks);
      r.read("feature_dim", cfg.model.feature_dim);
      r.read("bottleneck_dim", cfg.model.bottleneck_dim);
      r.read("operating_point", cfg.model.operating_point);
      r.read("feature_gain", cfg.model.feature_gain);
      r.read("head_gain", cfg.model.head_gain);
      r.read("head_threshold", cfg.model.head_threshold);
      r.read("adapter_init_scale", cfg.model.adapter_init_scale);
    } else if (name == "client") {
      r.read("learning_rate", cfg.client.learning_rate);
      r.read("batch_size", cfg.client.batch_size);
      r.read("local_epochs", cfg.client.local_epochs);
      r.read("beta", cfg.client.beta);
      r.read("low_layers", cfg.client.low_layers);
    } else if (name == "sgca") {
      r.read("alpha", cfg.sgca.alpha);
      std::string metric = to_string(cfg.sgca.metric);
      std::string normalization = to_string(cfg.sgca.normalization);
      std::string m_mode = to_string(cfg.sgca.prior_mode);
      r.read("metric", metric);
      r.read("normalization", normalization);
      r.read("m_mode", m_mode);
      cfg.sgca.metric = parse_metric(metric);
      cfg.sgca.normalization = parse_normalization(normalization);
      cfg.sgca.prior_mode = parse_prior_mode(m_mode);
    } else if (name == "federation") {
      r.read("client_sizes", cfg.federation.client_sizes);
      r.read("cluster_of", cfg.federation.cluster_of);
      r.read("mask_side", cfg.federation.mask_side);
    } else if (name.rfind("cluster.", 0) == 0) {
      int index = -1;
      const std::string suffix = name.substr(8);
      auto [ptr, ec] = std::from_chars(suffix.data(), suffix.data() + suffix.size(), index);
      if (ec != std::errc() || ptr != suffix.data() + suffix.size() || index < 0) {
        throw ConfigError("bad cluster section name [" + name + "]");
      }
      ClusterParams c;
      r.read("blob_count_min", c.blob_count_min);
      r.read("blob_count_max", c.blob_count_max);
      r.read("radius_min", c.radius_min);
      r.read("radius_max", c.radius_max);
      r.read("gain", c.gain);
      r.read("background", c.background);
      r.read("noise", c.noise);
      r.read("offset_x", c.offset_x);
      r.read("offset_y", c.offset_y);
      clusters[index] = c;
      clusters_given = true;
    } else {
      throw ConfigError("unknown section [" + name + "]");
    }
    r.finish();
  }
  if (clusters_given) {
    cfg.federation.clusters.clear();
    for (const auto& [index, c] : clusters) {
      if (index != static_cast<int>(cfg.federation.clusters.size())) {
        throw ConfigError("cluster sections must be numbered 0..C-1 without gaps");
      }
      cfg.federation.clusters.push_back(c);
    }
  }
  cfg.federation.seed = cfg.seed;
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config " + path);
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) {
    throw InvalidState("format_double failed");
  }
  return std::string(buf, ptr);
}

std::string to_config_text(const ExperimentConfig& c) {
  std::ostringstream out;
  auto num = [](double v) { return format_double(v); };
  auto flag = [](bool v) { return v ? "true" : "false"; };
  out << "[experiment]\n"
      << "rounds = " << c.rounds << "\n"
      << "seed = " << c.seed << "\n"
      << "aggregator = " << to_string(c.aggregator) << "\n"
      << "output_dir = " << c.output_dir << "\n"
      << "parallel = " << flag(c.parallel) << "\n"
      << "shared_adapter_init = " << flag(c.shared_adapter_init) << "\n\n";
  out << "[model]\n"
      << "num_blocks = " << c.model.num_blocks << "\n"
      << "feature_dim = " << c.model.feature_dim << "\n"
      << "bottleneck_dim = " << c.model.bottleneck_dim << "\n"
      << "operating_point = " << num(c.model.operating_point) << "\n"
      << "feature_gain = " << num(c.model.feature_gain) << "\n"
      << "head_gain = " << num(c.model.head_gain) << "\n"
      << "head_threshold = " << num(c.model.head_threshold) << "\n"
      << "adapter_init_scale = " << num(c.model.adapter_init_scale) << "\n\n";
  out << "[client]\n"
      << "learning_rate = " << num(c.client.learning_rate) << "\n"
      << "batch_size = " << c.client.batch_size << "\n"
      << "local_epochs = " << c.client.local_epochs << "\n"
      << "beta = " << num(c.client.beta) << "\n"
      << "low_layers = " << c.client.low_layers << "\n\n";
  out << "[sgca]\n"
      << "alpha = " << num(c.sgca.alpha) << "\n"
      << "metric = " << to_string(c.sgca.metric) << "\n"
      << "normalization = " << to_string(c.sgca.normalization) << "\n"
      << "m_mode = " << to_string(c.sgca.prior_mode) << "\n\n";
  out << "[federation]\n"
      << "client_sizes = " << join(c.federation.client_sizes) << "\n"
      << "cluster_of = " << join(c.federation.cluster_of) << "\n"
      << "mask_side = " << c.federation.mask_side << "\n";
  for (std::size_t i = 0; i < c.federation.clusters.size(); ++i) {
    const auto& k = c.federation.clusters[i];
    out << "\n[cluster." << i << "]\n"
        << "blob_count_min = " << k.blob_count_min << "\n"
        << "blob_count_max = " << k.blob_count_max << "\n"
        << "radius_min = " << num(k.radius_min) << "\n"
        << "radius_max = " << num(k.radius_max) << "\n"
        << "gain = " << num(k.gain) << "\n"
        << "background = " << num(k.background) << "\n"
        << "noise = " << num(k.noise) << "\n"
        << "offset_x = " << num(k.offset_x) << "\n"
        << "offset_y = " << num(k.offset_y) << "\n";
  }
  return out.str();
}

std::string config_hash(const ExperimentConfig& config) {
  // Where results are written and how clients are scheduled do not change them.
  ExperimentConfig hashed = config;
  hashed.output_dir.clear();
  hashed.parallel = true;
  return sha256_hex(to_config_text(hashed));
}

}  // namespace fedsca
