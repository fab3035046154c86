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

#ifndef FEDSCA_NUMERICS_HPP_
#define FEDSCA_NUMERICS_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace fedsca {

/// One entry of a FlatParams manifest: `length` consecutive scalars that
/// belong to adapter layer `layer_index` (1-based, counted from the input).
struct LayerSpan {
  int layer_index = 0;
  std::size_t length = 0;

  friend bool operator==(const LayerSpan&, const LayerSpan&) = default;
};

/// A flat vector of 64-bit parameters together with a layer manifest.
///
/// This is the unit that is transmitted between clients and server and the
/// unit that similarities are computed over. Construction validates that the
/// manifest covers the values exactly, that layer indices are strictly
/// increasing and that every value is finite.
class FlatParams {
 public:
  FlatParams() = default;
  FlatParams(std::vector<double> values, std::vector<LayerSpan> manifest);

  /// Concatenates parts in order. Layer indices must keep increasing.
  static FlatParams concat(std::span<const FlatParams> parts);

  /// Splits into one FlatParams per manifest entry.
  std::vector<FlatParams> split() const;

  std::span<const double> values() const { return values_; }
  const std::vector<LayerSpan>& manifest() const { return manifest_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  bool has_layer(int layer_index) const;
  std::span<const double> layer(int layer_index) const;

  /// Identical manifests (same layers, same lengths).
  bool same_layout(const FlatParams& other) const {
    return manifest_ == other.manifest_;
  }

  /// Mutable access for optimizers. Callers that write here are expected to
  /// keep the values finite; `check_finite` re-validates.
  std::span<double> mutable_values() { return values_; }
  void check_finite() const;

  /// Zero vector with the same manifest.
  FlatParams zeros_like() const;

  friend bool operator==(const FlatParams&, const FlatParams&) = default;

 private:
  std::vector<double> values_;
  std::vector<LayerSpan> manifest_;
};

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> a);

/// Cosine of the angle between a and b; 0 when either is the zero vector.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Deterministic random stream keyed by (seed, stream_id).
///
/// Backed by std::mt19937_64, whose output sequence is fixed by the
/// standard. The conversions to uniform and Gaussian variates are done here
/// rather than with <random> distributions, whose algorithms are left to the
/// library vendor.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);
  /// Uniform integer in [lo, hi].
  int uniform_int(int lo, int hi);
  /// Standard normal via Box-Muller.
  double gaussian();

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// `count` standard-normal draws; advances the stream.
std::vector<double> rng_draw_gaussian(RngStream& stream, std::size_t count);

/// Euclidean projection of `c` onto the probability simplex
/// {w : w >= 0, sum(w) = 1}.
///
/// Sorts a copy of c in descending order (ties by original index), finds the
/// support size and threshold tau, and returns w_j = max(c_j - tau, 0).
/// Throws InvalidArgument on empty or non-finite input.
std::vector<double> simplex_project(std::span<const double> c);

using ScalarFunction = std::function<double(std::span<const double>)>;

/// Central-difference gradient of f at x with step h. Throws NumericError if
/// any evaluation is non-finite and InvalidArgument if h <= 0.
std::vector<double> finite_diff_grad(const ScalarFunction& f,
                                     std::span<const double> x, double h);

/// max_j |a_j - b_j| / max_j |b_j|; falls back to the absolute error when b
/// is identically zero.
double max_norm_relative_error(std::span<const double> a,
                               std::span<const double> b);

}  // namespace fedsca

#endif  // FEDSCA_NUMERICS_HPP_
