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

// Independent reference implementations used by the tests, the acceptance
// binary and `fedsca oracle-check`. Nothing in the library links this.

#ifndef FEDSCA_ORACLES_HPP_
#define FEDSCA_ORACLES_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedsca/adapter_net.hpp"

namespace fedsca::oracle {

/// Simplex projection by enumerating every support set S: on S the
/// equality-constrained minimizer is w_j = c_j - tau with
/// tau = (sum_S c - 1) / |S|; the feasible candidate with the smallest
/// ||w - c||^2 wins. Exponential in N, meant for N <= 12.
std::vector<double> kkt_simplex_project(std::span<const double> c);

/// Minimizes sum_j (w_j - m)^2 - alpha * sum_j w_j s_j over the simplex by
/// the same enumeration, comparing candidates on that objective directly.
std::vector<double> kkt_solve_row(double m_value, std::span<const double> s_row, double alpha);

/// Objective of the per-row collaboration QP.
double row_objective(std::span<const double> w, double m_value, std::span<const double> s_row,
                     double alpha);

struct GradientFixture {
  std::shared_ptr<const Backbone> backbone;
  ToyFM model;
  Batch batch;
  FlatParams reference;  // layers 1..L
  double beta = 0.0;
};

/// Random model with non-zero up projections, a random batch and a random
/// reference over a random number of low layers.
GradientFixture make_gradient_fixture(int num_blocks, int feature_dim, int bottleneck_dim,
                                      int batch_size, double beta, std::uint64_t seed);

/// Central-difference gradient of the objective w.r.t. all adapter params.
std::vector<double> numeric_gradient(const GradientFixture& fixture, double h);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

CheckResult check_simplex_projection(int cases, std::uint64_t seed);
CheckResult check_solve_row(int cases, std::uint64_t seed);
CheckResult check_gradients(int fixtures, std::uint64_t seed);
CheckResult check_finite_diff_examples();
CheckResult check_comm_cost();
CheckResult check_metric_fixtures();
CheckResult check_serialization(int cases, std::uint64_t seed);

/// Everything `fedsca oracle-check` runs.
std::vector<CheckResult> run_oracle_suite();

}  // namespace fedsca::oracle

#endif  // FEDSCA_ORACLES_HPP_
