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

#include "fedsca/oracles.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include "fedsca/errors.hpp"
#include "fedsca/fed_client.hpp"
#include "fedsca/sgca_server.hpp"
#include "fedsca/transport.hpp"

namespace fedsca::oracle {
namespace {

constexpr std::uint64_t kOracleStream = 0xC0FFEEULL;

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += (a[i] - b[i]) * (a[i] - b[i]);
  }
  return s;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

// Candidate on support `mask` for the target vector c, or empty if infeasible.
std::vector<double> support_candidate(std::span<const double> c, unsigned mask) {
  const std::size_t n = c.size();
  double sum = 0.0;
  int count = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (mask & (1u << j)) {
      sum += c[j];
      ++count;
    }
  }
  const double tau = (sum - 1.0) / count;
  std::vector<double> w(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (mask & (1u << j)) {
      w[j] = c[j] - tau;
      if (w[j] < 0.0) {
        return {};
      }
    }
  }
  return w;
}

template <typename Score>
std::vector<double> enumerate_supports(std::span<const double> c, Score score) {
  if (c.empty() || c.size() > 20) {
    throw InvalidArgument("oracle supports 1..20 entries");
  }
  std::vector<double> best;
  double best_score = std::numeric_limits<double>::infinity();
  const unsigned limit = 1u << c.size();
  for (unsigned mask = 1; mask < limit; ++mask) {
    auto w = support_candidate(c, mask);
    if (w.empty()) {
      continue;
    }
    const double s = score(w);
    if (s < best_score) {
      best_score = s;
      best = std::move(w);
    }
  }
  return best;
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(3);
  out << std::scientific << v;
  return out.str();
}

std::vector<double> random_vector(RngStream& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (auto& x : v) {
    x = rng.uniform(lo, hi);
  }
  return v;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::vector<double> kkt_simplex_project(std::span<const double> c) {
  return enumerate_supports(c, [&](const std::vector<double>& w) { return squared_distance(w, c); });
}

double row_objective(std::span<const double> w, double m_value, std::span<const double> s_row,
                     double alpha) {
  double value = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    value += (w[j] - m_value) * (w[j] - m_value) - alpha * w[j] * s_row[j];
  }
  return value;
}

std::vector<double> kkt_solve_row(double m_value, std::span<const double> s_row, double alpha) {
  // Stationarity on a support gives w_j = m + (alpha/2) s_j - lambda/2, so
  // the candidates are those of the projection of that vector; they are
  // ranked by the QP objective itself.
  std::vector<double> c(s_row.size());
  for (std::size_t j = 0; j < c.size(); ++j) {
    c[j] = m_value + 0.5 * alpha * s_row[j];
  }
  return enumerate_supports(c, [&](const std::vector<double>& w) {
    return row_objective(w, m_value, s_row, alpha);
  });
}

GradientFixture make_gradient_fixture(int num_blocks, int feature_dim, int bottleneck_dim,
                                      int batch_size, double beta, std::uint64_t seed) {
  ModelShape shape;
  shape.num_blocks = num_blocks;
  shape.feature_dim = feature_dim;
  shape.bottleneck_dim = bottleneck_dim;
  auto backbone = Backbone::build(shape, seed);
  RngStream rng(seed, kOracleStream);
  ToyFM model(backbone, init_adapters(shape, rng));

  // Non-zero up projections so every path carries gradient.
  const FlatParams current = model.all_adapter_params();
  std::vector<double> values(current.values().begin(), current.values().end());
  for (auto& v : values) {
    v += 0.1 * rng.gaussian() / std::sqrt(static_cast<double>(bottleneck_dim));
  }
  model.set_adapter_params(FlatParams(values, current.manifest()));

  Batch batch;
  batch.inputs.resize(feature_dim, batch_size);
  batch.targets.resize(feature_dim, batch_size);
  for (int b = 0; b < batch_size; ++b) {
    for (int p = 0; p < feature_dim; ++p) {
      batch.inputs(p, b) = rng.uniform();
      batch.targets(p, b) = rng.uniform() < 0.4 ? 1.0 : 0.0;
    }
  }

  const int low = rng.uniform_int(1, num_blocks);
  const FlatParams low_now = model.adapter_params(1, low);
  std::vector<double> ref(low_now.values().begin(), low_now.values().end());
  for (auto& v : ref) {
    v += 0.05 * rng.gaussian();
  }
  return GradientFixture{backbone, std::move(model), std::move(batch),
                         FlatParams(std::move(ref), low_now.manifest()), beta};
}

std::vector<double> numeric_gradient(const GradientFixture& fixture, double h) {
  ToyFM probe = fixture.model;
  const FlatParams base = fixture.model.all_adapter_params();
  std::vector<double> x(base.values().begin(), base.values().end());
  const ScalarFunction f = [&](std::span<const double> point) {
    probe.set_adapter_params(FlatParams(std::vector<double>(point.begin(), point.end()),
                                        base.manifest()));
    return objective(fixture.batch, probe, fixture.reference, fixture.beta);
  };
  return finite_diff_grad(f, x, h);
}

CheckResult check_simplex_projection(int cases, std::uint64_t seed) {
  RngStream rng(seed, kOracleStream + 1);
  double worst = 0.0;
  for (int t = 0; t < cases; ++t) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(2, 8));
    const double spread = rng.uniform(0.01, 10.0);
    auto c = random_vector(rng, n, -spread, spread);
    worst = std::max(worst, max_abs_diff(simplex_project(c), kkt_simplex_project(c)));
  }
  return {"simplex projection vs KKT enumeration", worst <= 1e-9,
          std::to_string(cases) + " cases, max error " + fmt(worst)};
}

CheckResult check_solve_row(int cases, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  RngStream rng(seed, kOracleStream + 2);
  double worst = 0.0;
  for (int t = 0; t < cases; ++t) {
    const int n = rng.uniform_int(2, 8);
    const double alpha = rng.uniform(0.0, 100.0);
    const double m = rng.uniform(0.0, 1.0);
    auto s = random_vector(rng, static_cast<std::size_t>(n), -1.0, 1.0);
    worst = std::max(worst, max_abs_diff(solve_row(m, s, alpha), kkt_solve_row(m, s, alpha)));
  }
  const double elapsed = seconds_since(start);
  return {"solve_row vs KKT enumeration", worst <= 1e-9 && elapsed < 10.0,
          std::to_string(cases) + " cases, N in 2..8, alpha in [0,100], max error " + fmt(worst) +
              ", " + fmt(elapsed) + " s"};
}

CheckResult check_gradients(int fixtures, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  constexpr int kBlocks[] = {2, 4, 6};
  constexpr int kDims[] = {16, 64};
  double worst = 0.0;
  for (int t = 0; t < fixtures; ++t) {
    const int k = kBlocks[t % 3];
    const int fd = kDims[(t / 3) % 2];
    const double beta = (t % 4 == 0) ? 0.0 : 0.5;
    const auto fixture = make_gradient_fixture(k, fd, 4, 3, beta, seed + static_cast<std::uint64_t>(t));
    const auto analytic = grad_adapters(fixture.batch, fixture.model, fixture.reference, beta);
    const auto numeric = numeric_gradient(fixture, 1e-5);
    worst = std::max(worst, max_norm_relative_error(analytic.values(), numeric));
  }
  const double elapsed = seconds_since(start);
  return {"adapter gradients vs central differences", worst < 1e-4 && elapsed < 30.0,
          std::to_string(fixtures) + " fixtures, K in {2,4,6}, feature_dim in {16,64}, max rel error " +
              fmt(worst) + ", " + fmt(elapsed) + " s"};
}

CheckResult check_finite_diff_examples() {
  bool ok = true;
  std::string detail;
  const std::vector<double> x{1.0, 2.0};
  const auto sq = finite_diff_grad(
      [](std::span<const double> v) { return v[0] * v[0] + v[1] * v[1]; }, x, 1e-5);
  if (std::abs(sq[0] - 2.0) > 1e-6 || std::abs(sq[1] - 4.0) > 1e-6) {
    ok = false;
    detail += "sum of squares mismatch; ";
  }
  const auto flat = finite_diff_grad([](std::span<const double>) { return 3.0; }, x, 1e-5);
  if (flat[0] != 0.0 || flat[1] != 0.0) {
    ok = false;
    detail += "constant function gradient non-zero; ";
  }
  // d/dx of -cos(x, b) = -(b / (|x||b|) - (x.b) x / (|x|^3 |b|)).
  const std::vector<double> b{1.0, 1.0};
  const std::vector<double> at{1.0, 0.0};
  const auto fd = finite_diff_grad(
      [&b](std::span<const double> v) { return -cosine_similarity(v, b); }, at, 1e-5);
  const double nx = l2_norm(at);
  const double nb = l2_norm(b);
  const double xb = dot(at, b);
  for (std::size_t j = 0; j < 2; ++j) {
    const double exact = -(b[j] / (nx * nb) - xb * at[j] / (nx * nx * nx * nb));
    if (std::abs(fd[j] - exact) > 1e-5) {
      ok = false;
      detail += "cosine gradient mismatch; ";
    }
  }
  return {"finite-difference examples", ok, ok ? "3 examples" : detail};
}

CheckResult check_comm_cost() {
  const auto start = std::chrono::steady_clock::now();
  constexpr int kRounds = 100;
  constexpr int kClients = 4;
  ModelShape shape;  // K = 6, feature_dim 256, bottleneck 16
  auto backbone = Backbone::build(shape, 0);
  RngStream rng(0, kOracleStream + 3);
  const ToyFM model(backbone, init_adapters(shape, rng));
  std::vector<std::size_t> sizes;
  for (int k = 1; k <= shape.num_blocks; ++k) {
    sizes.push_back(model.adapter_params(k, k).size());
  }

  auto ledger_total = [&](int low) {
    CommLedger ledger;
    const auto payload = select_for_transmission(model, low);
    std::vector<WireMessage> down;
    std::vector<WireMessage> up;
    for (int i = 0; i < kClients; ++i) {
      down.push_back(WireMessage::make(Direction::kBroadcast, i, 1, payload));
      up.push_back(WireMessage::make(Direction::kUpload, i, 1, payload));
    }
    for (int r = 1; r <= kRounds; ++r) {
      for (auto& m : down) {
        m.round = r;
        ledger.record(m);
      }
      for (auto& m : up) {
        m.round = r;
        ledger.record(m);
      }
    }
    return ledger.total();
  };
  const std::uint64_t c1 = ledger_total(1);
  const std::uint64_t ck = ledger_total(shape.num_blocks);
  std::uint64_t all = 0;
  for (auto s : sizes) {
    all += s;
  }
  const std::uint64_t expected = 2ULL * kRounds * kClients * sizes[0];
  // Ratio compared as an exact rational: ck / c1 == all / sizes[0].
  const bool ratio_ok = ck * sizes[0] == c1 * all;
  const bool closed_ok = c1 == closed_form_comm_cost(kRounds, kClients, sizes, 1) &&
                         ck == closed_form_comm_cost(kRounds, kClients, sizes, shape.num_blocks);
  const double elapsed = seconds_since(start);
  std::ostringstream detail;
  detail << "C(L=1)=" << c1 << " expected " << expected << ", C(L=K)/C(L=1)=" << ck << "/" << c1
         << " (K=" << shape.num_blocks << "), " << fmt(elapsed) << " s";
  return {"communication ledger exactness",
          c1 == expected && ratio_ok && closed_ok && ck == c1 * static_cast<std::uint64_t>(shape.num_blocks) &&
              elapsed < 1.0,
          detail.str()};
}

CheckResult check_metric_fixtures() {
  struct Case {
    std::vector<std::uint8_t> pred;
    std::vector<std::uint8_t> truth;
    double iou;
    double dice;
  };
  const std::vector<Case> cases = {
      {{1, 1, 0, 0}, {1, 1, 0, 0}, 1.0, 1.0},
      {{1, 1, 0, 0}, {0, 0, 1, 1}, 0.0, 0.0},
      {{1, 1, 0, 0, 0, 0}, {1, 1, 1, 1, 0, 0}, 0.5, 4.0 / 6.0},
      {{0, 0, 0, 0}, {0, 0, 0, 0}, 1.0, 1.0},
  };
  int failures = 0;
  for (const auto& c : cases) {
    const auto m = mask_metrics(c.pred, c.truth);
    if (m.iou != c.iou || m.dice != c.dice) {
      ++failures;
    }
  }
  return {"IoU/Dice fixtures", failures == 0,
          std::to_string(cases.size() - static_cast<std::size_t>(failures)) + "/" +
              std::to_string(cases.size()) + " exact"};
}

CheckResult check_serialization(int cases, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  RngStream rng(seed, kOracleStream + 4);
  int mismatches = 0;
  Bytes sample_bytes;
  for (int t = 0; t < cases; ++t) {
    const int layers = rng.uniform_int(1, 6);
    std::vector<LayerSpan> manifest;
    std::vector<double> values;
    int index = 0;
    for (int l = 0; l < layers; ++l) {
      index += rng.uniform_int(1, 3);
      const auto len = static_cast<std::size_t>(rng.uniform_int(1, 64));
      manifest.push_back({index, len});
      for (std::size_t j = 0; j < len; ++j) {
        // Mix magnitudes, signed zeros and subnormals.
        const double kind = rng.uniform();
        double v = rng.gaussian() * std::exp2(rng.uniform_int(-60, 60));
        if (kind < 0.02) {
          v = -0.0;
        } else if (kind < 0.04) {
          v = std::numeric_limits<double>::denorm_min() * rng.uniform_int(1, 1000);
        }
        values.push_back(v);
      }
    }
    const FlatParams p(values, manifest);
    const Bytes bytes = serialize(p);
    const FlatParams q = deserialize(bytes);
    const bool same_bits =
        q.manifest() == p.manifest() && q.size() == p.size() &&
        std::memcmp(q.values().data(), p.values().data(), p.size() * sizeof(double)) == 0;
    if (!same_bits) {
      ++mismatches;
    }
    if (t == 0) {
      sample_bytes = bytes;
    }
  }

  auto rejected = [](const Bytes& bytes) {
    try {
      deserialize(bytes);
    } catch (const DecodeError&) {
      return true;
    } catch (...) {
      return false;
    }
    return false;
  };
  Bytes bad_magic = sample_bytes;
  bad_magic[0] ^= 0xFF;
  Bytes bad_version = sample_bytes;
  bad_version[4] = static_cast<std::uint8_t>(kParamsFormatVersion + 1);
  Bytes truncated(sample_bytes.begin(), sample_bytes.end() - 1);
  const int rejections = rejected(bad_magic) + rejected(bad_version) + rejected(truncated);
  const double elapsed = seconds_since(start);
  return {"serialization round trip and malformed input", mismatches == 0 && rejections == 3 && elapsed < 10.0,
          std::to_string(cases) + " round trips, " + std::to_string(mismatches) + " mismatches, " +
              std::to_string(rejections) + "/3 malformed classes rejected, " + fmt(elapsed) + " s"};
}

std::vector<CheckResult> run_oracle_suite() {
  return {check_simplex_projection(1000, 1), check_solve_row(1000, 2), check_gradients(20, 3),
          check_finite_diff_examples(), check_comm_cost(), check_metric_fixtures(),
          check_serialization(10000, 4)};
}

}  // namespace fedsca::oracle
