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

#ifndef FEDSCA_TESTS_TEST_UTIL_HPP_
#define FEDSCA_TESTS_TEST_UTIL_HPP_

#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include "fedsca/adapter_net.hpp"
#include "fedsca/experiment_config.hpp"

namespace fedsca::testing {

// Compares `values` against tests/golden/<name>.txt. Set FEDSCA_UPDATE_GOLDEN=1
// to (re)write the file instead.
inline void expect_golden(const std::string& name, const std::vector<double>& values,
                          double tolerance) {
  const std::string path = std::string(FEDSCA_GOLDEN_DIR) + "/" + name + ".txt";
  if (const char* update = std::getenv("FEDSCA_UPDATE_GOLDEN"); update && std::string(update) == "1") {
    std::ofstream out(path);
    for (double v : values) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g\n", v);
      out << buf;
    }
    return;
  }
  std::ifstream in(path);
  ASSERT_TRUE(in) << "missing golden file " << path;
  std::vector<double> expected;
  for (double v; in >> v;) {
    expected.push_back(v);
  }
  ASSERT_EQ(expected.size(), values.size()) << path;
  for (std::size_t i = 0; i < values.size(); ++i) {
    EXPECT_NEAR(values[i], expected[i], tolerance * (1.0 + std::abs(expected[i]))) << path << "[" << i << "]";
  }
}

inline ModelShape small_shape(int blocks = 2, int feature_dim = 16, int bottleneck_dim = 4) {
  ModelShape shape;
  shape.num_blocks = blocks;
  shape.feature_dim = feature_dim;
  shape.bottleneck_dim = bottleneck_dim;
  return shape;
}

// Small federation and model that keep full runs in the sub-second range.
inline ExperimentConfig tiny_config(int rounds = 3) {
  ExperimentConfig cfg = default_experiment_config();
  cfg.federation.mask_side = 8;
  cfg.federation.client_sizes = {12, 8, 10};
  cfg.federation.cluster_of = {0, 0, 1};
  for (auto& c : cfg.federation.clusters) {
    c.radius_min = 1.5;
    c.radius_max = 2.5;
    c.offset_x = c.offset_x / 2;
    c.offset_y = c.offset_y / 2;
  }
  cfg.model.num_blocks = 3;
  cfg.model.feature_dim = 64;
  cfg.model.bottleneck_dim = 4;
  cfg.client.batch_size = 4;
  cfg.client.learning_rate = 1e-3;
  cfg.rounds = rounds;
  return cfg;
}

}  // namespace fedsca::testing

#endif  // FEDSCA_TESTS_TEST_UTIL_HPP_
