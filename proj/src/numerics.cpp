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

#include "fedsca/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "fedsca/errors.hpp"

namespace fedsca {

FlatParams::FlatParams(std::vector<double> values,
                       std::vector<LayerSpan> manifest)
    : values_(std::move(values)), manifest_(std::move(manifest)) {
  std::size_t total = 0;
  int previous = 0;
  bool first = true;
  for (const auto& span : manifest_) {
    if (!first && span.layer_index <= previous) {
      throw InvalidArgument("FlatParams: layer indices must be strictly increasing");
    }
    previous = span.layer_index;
    first = false;
    total += span.length;
  }
  if (total != values_.size()) {
    throw InvalidArgument("FlatParams: manifest covers " + std::to_string(total) +
                          " scalars but " + std::to_string(values_.size()) +
                          " were given");
  }
  check_finite();
}

FlatParams FlatParams::concat(std::span<const FlatParams> parts) {
  std::vector<double> values;
  std::vector<LayerSpan> manifest;
  for (const auto& part : parts) {
    values.insert(values.end(), part.values_.begin(), part.values_.end());
    manifest.insert(manifest.end(), part.manifest_.begin(), part.manifest_.end());
  }
  return FlatParams(std::move(values), std::move(manifest));
}

std::vector<FlatParams> FlatParams::split() const {
  std::vector<FlatParams> parts;
  parts.reserve(manifest_.size());
  std::size_t offset = 0;
  for (const auto& span : manifest_) {
    auto begin = values_.begin() + static_cast<std::ptrdiff_t>(offset);
    parts.emplace_back(
        std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(span.length)),
        std::vector<LayerSpan>{span});
    offset += span.length;
  }
  return parts;
}

bool FlatParams::has_layer(int layer_index) const {
  return std::any_of(manifest_.begin(), manifest_.end(),
                     [&](const LayerSpan& s) { return s.layer_index == layer_index; });
}

std::span<const double> FlatParams::layer(int layer_index) const {
  std::size_t offset = 0;
  for (const auto& span : manifest_) {
    if (span.layer_index == layer_index) {
      return std::span<const double>(values_).subspan(offset, span.length);
    }
    offset += span.length;
  }
  throw InvalidArgument("FlatParams: no layer " + std::to_string(layer_index));
}

void FlatParams::check_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw NumericError("FlatParams: non-finite value");
    }
  }
}

FlatParams FlatParams::zeros_like() const {
  return FlatParams(std::vector<double>(values_.size(), 0.0), manifest_);
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw InvalidArgument("dot: length mismatch");
  }
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double l2_norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) {
    return 0.0;
  }
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id),
                    static_cast<std::uint32_t>(stream_id >> 32)};
  engine_.seed(seq);
}

double RngStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::below(std::uint64_t n) {
  if (n == 0) {
    throw InvalidArgument("RngStream::below: n must be positive");
  }
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t x = engine_();
    if (x >= threshold) {
      return x % n;
    }
  }
}

int RngStream::uniform_int(int lo, int hi) {
  if (hi < lo) {
    throw InvalidArgument("RngStream::uniform_int: empty range");
  }
  const auto span = static_cast<std::uint64_t>(static_cast<std::int64_t>(hi) - lo) + 1;
  return lo + static_cast<int>(below(span));
}

double RngStream::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::vector<double> rng_draw_gaussian(RngStream& stream, std::size_t count) {
  std::vector<double> out(count);
  for (auto& v : out) {
    v = stream.gaussian();
  }
  return out;
}

std::vector<double> simplex_project(std::span<const double> c) {
  if (c.empty()) {
    throw InvalidArgument("simplex_project: empty input");
  }
  for (double v : c) {
    if (!std::isfinite(v)) {
      throw InvalidArgument("simplex_project: non-finite input");
    }
  }
  const std::size_t n = c.size();
  // Shift so the largest entry is 0; the projection is shift-invariant and the
  // running sums stay small even for very large inputs.
  const double top = *std::max_element(c.begin(), c.end());
  std::vector<double> shifted(n);
  std::transform(c.begin(), c.end(), shifted.begin(),
                 [top](double v) { return v - top; });

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return shifted[a] > shifted[b];
  });

  double running = 0.0;
  double tau = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    running += shifted[order[j]];
    const double candidate = (running - 1.0) / static_cast<double>(j + 1);
    if (shifted[order[j]] - candidate > 0.0) {
      tau = candidate;
    }
  }

  std::vector<double> w(n);
  std::transform(shifted.begin(), shifted.end(), w.begin(),
                 [tau](double v) { return std::max(v - tau, 0.0); });
  return w;
}

std::vector<double> finite_diff_grad(const ScalarFunction& f,
                                     std::span<const double> x, double h) {
  if (!(h > 0.0)) {
    throw InvalidArgument("finite_diff_grad: step must be positive");
  }
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> grad(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double original = probe[j];
    probe[j] = original + h;
    const double plus = f(probe);
    probe[j] = original - h;
    const double minus = f(probe);
    probe[j] = original;
    if (!std::isfinite(plus) || !std::isfinite(minus)) {
      throw NumericError("finite_diff_grad: non-finite evaluation at coordinate " +
                         std::to_string(j));
    }
    grad[j] = (plus - minus) / (2.0 * h);
  }
  return grad;
}

double max_norm_relative_error(std::span<const double> a,
                               std::span<const double> b) {
  if (a.size() != b.size()) {
    throw InvalidArgument("max_norm_relative_error: length mismatch");
  }
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    diff = std::max(diff, std::abs(a[j] - b[j]));
    scale = std::max(scale, std::abs(b[j]));
  }
  return scale > 0.0 ? diff / scale : diff;
}

}  // namespace fedsca
