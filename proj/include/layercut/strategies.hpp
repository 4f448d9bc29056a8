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

#ifndef LAYERCUT_STRATEGIES_HPP
#define LAYERCUT_STRATEGIES_HPP

#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "layercut/error.hpp"

namespace layercut {

enum class Strategy {
  kTop,
  kBottom,
  kOddAlternate,
  kEvenAlternate,
  kSymmetric,
  kContribution,
};

const char* strategy_name(Strategy s);
Strategy strategy_from_name(const std::string& name);  // accepts "odd-alternate" etc.

/// Which layers to remove. Indices are 1-based (layer 1 sits just above the
/// embedding block); the 0-based view exists only where checkpoints are
/// rewritten.
struct DropPlan {
  Strategy strategy = Strategy::kTop;
  std::size_t num_layers = 0;               // L
  std::set<std::size_t> dropped;            // subset of {1..L}
  std::vector<std::size_t> kept;            // ascending complement

  std::size_t drop_count() const { return dropped.size(); }
  bool drops(std::size_t layer_1based) const { return dropped.count(layer_1based) != 0; }

  // dropped must be within {1..L}; fills `kept` and validates.
  static DropPlan make(Strategy s, std::size_t L, std::set<std::size_t> dropped);
};

// Per-layer mean CLS cosine similarity, averaged over a dataset.
struct SimilarityProfile {
  std::size_t num_layers = 0;
  std::vector<double> mean_similarity;  // entry i-1 belongs to layer i, in [-1, 1]
  std::size_t n_examples = 0;

  void validate() const;
};

DropPlan plan_top(std::size_t L, std::size_t K);
DropPlan plan_bottom(std::size_t L, std::size_t K);
DropPlan plan_even_alternate(std::size_t L, std::size_t K);
DropPlan plan_odd_alternate(std::size_t L, std::size_t K);
DropPlan plan_symmetric(std::size_t L, std::size_t K);

// Drop every layer whose mean similarity strictly exceeds tau; ties at tau
// are kept.
DropPlan select_by_threshold(const SimilarityProfile& profile, double tau);

// Dispatch for the positional strategies (kContribution needs a profile).
DropPlan make_plan(Strategy s, std::size_t L, std::size_t K);

}  // namespace layercut

#endif  // LAYERCUT_STRATEGIES_HPP
