// Copyright 2026 The layercut Authors.
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

#ifndef LAYERCUT_CONTRIBUTION_HPP
#define LAYERCUT_CONTRIBUTION_HPP

#include <cmath>
#include <span>
#include <utility>

#include "layercut/encoder.hpp"
#include "layercut/strategies.hpp"

namespace layercut {

// A layer's contribution signal is the cosine similarity between the CLS
// row entering it and the CLS row leaving it, averaged over a dataset;
// layers whose output barely moves (similarity above the threshold) are
// candidates for dropping.

/// Cosine of two equal-length vectors, accumulated in double and clamped to
/// [-1, 1]. Bitwise-identical inputs return exactly 1.0.
double cosine(std::span<const double> u, std::span<const double> v);
double cosine(std::span<const float> u, std::span<const float> v);

/// Per-layer mean similarity over every example in `data`. Accumulation is
/// double precision, examples in dataset order, so the result is invariant
/// to how the same examples are split into batches.
template <class T>
SimilarityProfile similarity_profile(const EncoderModel<T>& m,
                                     std::span<const TokenBatch> data,
                                     const ForwardOptions& options = {});

template <class T>
std::pair<SimilarityProfile, DropPlan> score_and_plan(const EncoderModel<T>& m,
                                                      std::span<const TokenBatch> data,
                                                      double tau);

// ---- implementation ---------------------------------------------------

namespace detail {

template <class Scalar>
double cosine_impl(std::span<const Scalar> u, std::span<const Scalar> v) {
  if (u.size() != v.size()) {
    throw Error("contribution", "cosine length mismatch: " + std::to_string(u.size()) +
                                    " vs " + std::to_string(v.size()));
  }
  if (u.empty()) throw Error("contribution", "cosine of empty vectors");
  double dot = 0.0, nu = 0.0, nv = 0.0;
  bool identical = true;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = static_cast<double>(u[i]);
    const double b = static_cast<double>(v[i]);
    dot += a * b;
    nu += a * a;
    nv += b * b;
    identical = identical && (a == b);
  }
  if (nu == 0.0 || nv == 0.0) throw Error("contribution", "cosine of a zero-norm vector");
  if (identical) return 1.0;  // keep cos(v, v) exact
  const double r = dot / (std::sqrt(nu) * std::sqrt(nv));
  return std::min(1.0, std::max(-1.0, r));
}

}  // namespace detail

template <class T>
SimilarityProfile similarity_profile(const EncoderModel<T>& m,
                                     std::span<const TokenBatch> data,
                                     const ForwardOptions& options) {
  if (data.empty()) throw Error("contribution", "empty dataset");
  const std::size_t L = m.num_layers();
  std::vector<double> sums(L, 0.0);
  std::size_t n_examples = 0;
  for (const TokenBatch& batch : data) {
    const ForwardResult<T> result = forward(m, batch, options);
    for (std::size_t b = 0; b < batch.batch_size; ++b) {
      for (std::size_t layer = 0; layer < L; ++layer) {
        const Mat<T>& before = result.taps.cls[layer];
        const Mat<T>& after = result.taps.cls[layer + 1];
        const std::span<const T> u(&before.v[b * before.cols], before.cols);
        const std::span<const T> v(&after.v[b * after.cols], after.cols);
        sums[layer] += cosine(u, v);
      }
      ++n_examples;
    }
  }
  SimilarityProfile profile;
  profile.num_layers = L;
  profile.n_examples = n_examples;
  profile.mean_similarity.resize(L);
  for (std::size_t layer = 0; layer < L; ++layer) {
    profile.mean_similarity[layer] = sums[layer] / static_cast<double>(n_examples);
  }
  profile.validate();
  return profile;
}

template <class T>
std::pair<SimilarityProfile, DropPlan> score_and_plan(const EncoderModel<T>& m,
                                                      std::span<const TokenBatch> data,
                                                      double tau) {
  if (tau < 0.0 || tau > 1.0) {
    throw Error("contribution", "threshold must lie in [0, 1], got " + std::to_string(tau));
  }
  SimilarityProfile profile = similarity_profile(m, data);
  DropPlan plan = select_by_threshold(profile, tau);
  return {std::move(profile), std::move(plan)};
}

}  // namespace layercut

#endif  // LAYERCUT_CONTRIBUTION_HPP
