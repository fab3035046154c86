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

#include <algorithm>
#include <numeric>

#include "fedsca/errors.hpp"
#include "fedsca/oracles.hpp"
#include "fedsca/sgca_server.hpp"

namespace fedsca {
namespace {

FlatParams vec(std::initializer_list<double> v) {
  return FlatParams(std::vector<double>(v), {{1, v.size()}});
}

ClientUpdate upload(int id, FlatParams p, int n, int round = 1) {
  ClientUpdate u;
  u.client_id = id;
  u.round = round;
  u.low_params = std::move(p);
  u.num_samples = n;
  return u;
}

void expect_row_stochastic(const Matrix& w) {
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    EXPECT_GE(w.row(i).minCoeff(), 0.0);
    EXPECT_NEAR(w.row(i).sum(), 1.0, 1e-9);
  }
}

TEST(Similarity, Examples) {
  const auto a = vec({0.0, 0.0});
  const auto b = vec({3.0, 4.0});
  EXPECT_EQ(similarity(a.values(), b.values(), SimilarityMetric::kL2Based), -5.0);
  EXPECT_EQ(similarity(a.values(), b.values(), SimilarityMetric::kL1Based), -7.0);
  EXPECT_EQ(similarity(b.values(), b.values(), SimilarityMetric::kInner), 25.0);
  EXPECT_NEAR(similarity(b.values(), b.values(), SimilarityMetric::kCosine), 1.0, 1e-15);
  EXPECT_EQ(similarity(b.values(), b.values(), SimilarityMetric::kL2Based), 0.0);
}

TEST(Similarity, PairwiseIdenticalIsZeroAndNormalization) {
  const std::vector<FlatParams> same{vec({1, 2}), vec({1, 2}), vec({1, 2})};
  const Matrix s = pairwise_similarity(same, SimilarityMetric::kL2Based, SimilarityNormalization::kMaxAbsRow);
  EXPECT_EQ(s, Matrix::Zero(3, 3));

  const std::vector<FlatParams> p{vec({0, 0}), vec({3, 4}), vec({6, 8})};
  const Matrix raw = pairwise_similarity(p, SimilarityMetric::kL2Based, SimilarityNormalization::kNone);
  EXPECT_EQ(raw(0, 1), -5.0);
  EXPECT_EQ(raw, raw.transpose());
  const Matrix norm = pairwise_similarity(p, SimilarityMetric::kL2Based, SimilarityNormalization::kMaxAbsRow);
  EXPECT_NEAR(norm(0, 1), -0.5, 1e-15);
  EXPECT_NEAR(norm(0, 2), -1.0, 1e-15);
  EXPECT_NEAR(norm(1, 0), -1.0, 1e-15);
  EXPECT_EQ(norm(1, 1), 0.0);
}

TEST(Similarity, ManifestMismatchIsProtocolError) {
  const std::vector<FlatParams> p{vec({1, 2}), FlatParams({1, 2}, {{2, 2}})};
  EXPECT_THROW(pairwise_similarity(p, SimilarityMetric::kL2Based, SimilarityNormalization::kNone),
               ProtocolError);
}

TEST(SolveRow, Examples) {
  const auto uniform = solve_row(0.3, std::vector<double>{0.1, -2.0, 5.0, 0.0}, 0.0);
  for (double w : uniform) {
    EXPECT_NEAR(w, 0.25, 1e-15);
  }
  const auto vertex = solve_row(0.5, std::vector<double>{0.0, -1.0}, 2.0);
  EXPECT_NEAR(vertex[0], 1.0, 1e-12);
  EXPECT_NEAR(vertex[1], 0.0, 1e-12);
  const auto interior = solve_row(1.0 / 3.0, std::vector<double>{0.0, -0.2, -0.8}, 1.0);
  EXPECT_NEAR(interior[0], 0.5, 1e-12);
  EXPECT_NEAR(interior[1], 0.4, 1e-12);
  EXPECT_NEAR(interior[2], 0.1, 1e-12);
  EXPECT_THROW(solve_row(0.5, std::vector<double>{NAN, 0.0}, 1.0), InvalidArgument);
  EXPECT_THROW(solve_row(0.5, std::vector<double>{0.0, 0.0}, -1.0), InvalidArgument);
}

TEST(SolveRow, MatchesKktOracleAndProperties) {
  RngStream rng(17, 4);
  for (int t = 0; t < 1000; ++t) {
    const int n = rng.uniform_int(2, 8);
    std::vector<double> s(static_cast<std::size_t>(n));
    for (auto& v : s) {
      v = rng.uniform(-1.0, 1.0);
    }
    const double alpha = rng.uniform(0.0, 100.0);
    const double m = rng.uniform();
    const auto w = solve_row(m, s, alpha);
    const auto o = oracle::kkt_solve_row(m, s, alpha);
    for (std::size_t j = 0; j < s.size(); ++j) {
      ASSERT_NEAR(w[j], o[j], 1e-9);
    }
    // Shift invariance in s and independence of m.
    auto shifted = s;
    for (auto& v : shifted) {
      v += 3.7;
    }
    const auto ws = solve_row(m, shifted, alpha);
    const auto wm = solve_row(rng.uniform(-5.0, 5.0), s, alpha);
    for (std::size_t j = 0; j < s.size(); ++j) {
      ASSERT_NEAR(ws[j], w[j], 1e-9);
      ASSERT_NEAR(wm[j], w[j], 1e-9);
    }
  }
}

TEST(SolveRow, LargeAlphaIsOneHot) {
  const std::vector<double> s{-0.3, -0.1, -0.9, -0.2};
  const auto w = solve_row(0.25, s, 1e6);
  EXPECT_GT(w[1], 1.0 - 1e-6);
}

TEST(UpdateMatrix, AlphaZeroIsUniform) {
  const std::vector<ClientUpdate> u{upload(0, vec({1, 0}), 10), upload(1, vec({0, 1}), 30),
                                    upload(2, vec({5, 5}), 60)};
  SgcaConfig cfg;
  cfg.alpha = 0.0;
  const auto w = update_matrix(u, cfg);
  EXPECT_EQ(w.round, 1);
  for (Eigen::Index i = 0; i < 3; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) {
      EXPECT_EQ(w.weights(i, j), 1.0 / 3.0);
    }
  }
}

TEST(UpdateMatrix, IdenticalClientsPreferEachOther) {
  const std::vector<ClientUpdate> u{upload(0, vec({1, 1}), 10), upload(1, vec({1, 1}), 20),
                                    upload(2, vec({-2, 3}), 30)};
  for (double alpha : {0.1, 1.0, 5.0}) {
    SgcaConfig cfg;
    cfg.alpha = alpha;
    const auto w = update_matrix(u, cfg).weights;
    expect_row_stochastic(w);
    EXPECT_GE(w(0, 1), w(0, 2));
    EXPECT_GE(w(1, 0), w(1, 2));
  }
}

TEST(UpdateMatrix, PermutationEquivariant) {
  RngStream rng(3, 3);
  std::vector<FlatParams> params;
  for (int i = 0; i < 5; ++i) {
    params.push_back(vec({rng.gaussian(), rng.gaussian(), rng.gaussian()}));
  }
  const std::vector<int> sizes{3, 9, 4, 7, 5};
  const std::vector<int> perm{3, 0, 4, 1, 2};
  for (auto mode : {PriorMode::kRowConstant, PriorMode::kColumn}) {
    SgcaConfig cfg;
    cfg.alpha = 2.0;
    cfg.prior_mode = mode;
    std::vector<ClientUpdate> a;
    std::vector<ClientUpdate> b;
    for (int i = 0; i < 5; ++i) {
      a.push_back(upload(i, params[static_cast<std::size_t>(i)], sizes[static_cast<std::size_t>(i)]));
      const int src = perm[static_cast<std::size_t>(i)];
      b.push_back(upload(i, params[static_cast<std::size_t>(src)], sizes[static_cast<std::size_t>(src)]));
    }
    const Matrix wa = update_matrix(a, cfg).weights;
    const Matrix wb = update_matrix(b, cfg).weights;
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) {
        EXPECT_NEAR(wb(i, j), wa(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]), 1e-12);
      }
    }
  }
}

TEST(UpdateMatrix, ColumnPriorUsesDatasetSizes) {
  const std::vector<ClientUpdate> u{upload(0, vec({1, 1}), 10), upload(1, vec({1, 1}), 90)};
  SgcaConfig cfg;
  cfg.alpha = 0.0;
  cfg.prior_mode = PriorMode::kColumn;
  const auto w = update_matrix(u, cfg).weights;
  EXPECT_NEAR(w(0, 0), 0.1, 1e-12);
  EXPECT_NEAR(w(0, 1), 0.9, 1e-12);
}

TEST(UpdateMatrix, ProtocolErrors) {
  SgcaConfig cfg;
  EXPECT_THROW(update_matrix(std::vector<ClientUpdate>{}, cfg), ProtocolError);
  EXPECT_THROW(update_matrix(std::vector<ClientUpdate>{upload(0, vec({1}), 1), upload(0, vec({2}), 1)}, cfg),
               ProtocolError);
  EXPECT_THROW(update_matrix(std::vector<ClientUpdate>{upload(0, vec({1}), 1), upload(2, vec({2}), 1)}, cfg),
               ProtocolError);
  EXPECT_THROW(update_matrix(std::vector<ClientUpdate>{upload(0, vec({1}), 1), upload(1, vec({2}), 1, 2)}, cfg),
               ProtocolError);
}

TEST(Aggregate, Examples) {
  const std::vector<FlatParams> p{vec({1, 1}), vec({5, 5})};
  CollaborationMatrix id{Matrix::Identity(2, 2), 0};
  EXPECT_EQ(aggregate(id, p), p);
  CollaborationMatrix w{Matrix(2, 2), 0};
  w.weights << 0.75, 0.25, 0.5, 0.5;
  const auto out = aggregate(w, p);
  EXPECT_EQ(out[0], vec({2, 2}));
  EXPECT_EQ(out[1], vec({3, 3}));
  CollaborationMatrix wrong{Matrix::Identity(3, 3) , 0};
  EXPECT_THROW(aggregate(wrong, p), ProtocolError);
}

TEST(Aggregate, PreservesConvexHull) {
  RngStream rng(4, 4);
  std::vector<FlatParams> p;
  for (int i = 0; i < 4; ++i) {
    p.push_back(vec({rng.gaussian(), rng.gaussian()}));
  }
  std::vector<ClientUpdate> u;
  for (int i = 0; i < 4; ++i) {
    u.push_back(upload(i, p[static_cast<std::size_t>(i)], 5 + i));
  }
  const auto w = update_matrix(u, SgcaConfig{});
  w.check();
  const auto out = aggregate(w, p);
  for (std::size_t c = 0; c < 2; ++c) {
    double lo = 1e300;
    double hi = -1e300;
    for (const auto& x : p) {
      lo = std::min(lo, x.values()[c]);
      hi = std::max(hi, x.values()[c]);
    }
    for (const auto& o : out) {
      EXPECT_GE(o.values()[c], lo - 1e-15);
      EXPECT_LE(o.values()[c], hi + 1e-15);
    }
  }
}

TEST(FedAvg, Examples) {
  EXPECT_EQ(fedavg_aggregate(std::vector<FlatParams>{vec({0, 0}), vec({2, 2})}, std::vector<int>{5, 5}),
            vec({1, 1}));
  EXPECT_EQ(fedavg_aggregate(std::vector<FlatParams>{vec({0}), vec({4})}, std::vector<int>{1, 3}), vec({3}));
  EXPECT_EQ(fedavg_aggregate(std::vector<FlatParams>{vec({7, 8})}, std::vector<int>{2}), vec({7, 8}));
  EXPECT_THROW(fedavg_aggregate(std::vector<FlatParams>{vec({0})}, std::vector<int>{0}), InvalidArgument);
}

TEST(SizeProportional, RowsEqualSizeShares) {
  const auto w = size_proportional_matrix(std::vector<int>{100, 40, 80, 120});
  w.check();
  for (Eigen::Index i = 0; i < 4; ++i) {
    EXPECT_NEAR(w.weights(i, 3), 120.0 / 340.0, 1e-15);
  }
}

TEST(Parsing, RoundTripsNames) {
  for (auto m : {SimilarityMetric::kInner, SimilarityMetric::kCosine, SimilarityMetric::kL1Based,
                 SimilarityMetric::kL2Based}) {
    EXPECT_EQ(parse_metric(to_string(m)), m);
  }
  EXPECT_EQ(parse_prior_mode("column_mj"), PriorMode::kColumn);
  EXPECT_EQ(parse_normalization("none"), SimilarityNormalization::kNone);
  EXPECT_THROW(parse_metric("l3_based"), ConfigError);
}

}  // namespace
}  // namespace fedsca
