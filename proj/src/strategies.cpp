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

#include "layercut/strategies.hpp"

#include "layercut/error.hpp"

namespace layercut {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error("strategies", msg); }

void require_k_below_l(std::size_t L, std::size_t K) {
  if (L == 0) fail("layer count must be positive");
  if (K >= L) {
    fail("cannot drop " + std::to_string(K) + " of " + std::to_string(L) +
         " layers: the encoder would be empty");
  }
}

void require_alternate_range(std::size_t L, std::size_t K) {
  if (L == 0 || L % 2 != 0) {
    fail("alternate dropping requires an even layer count, got " + std::to_string(L));
  }
  if (K < 1 || K > L / 2) {
    fail("alternate dropping requires 1 <= K <= L/2, got K=" + std::to_string(K) +
         " for L=" + std::to_string(L));
  }
}

}  // namespace

const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::kTop: return "top";
    case Strategy::kBottom: return "bottom";
    case Strategy::kOddAlternate: return "odd-alternate";
    case Strategy::kEvenAlternate: return "even-alternate";
    case Strategy::kSymmetric: return "symmetric";
    case Strategy::kContribution: return "contribution";
  }
  return "?";
}

Strategy strategy_from_name(const std::string& name) {
  if (name == "top") return Strategy::kTop;
  if (name == "bottom") return Strategy::kBottom;
  if (name == "odd-alternate") return Strategy::kOddAlternate;
  if (name == "even-alternate") return Strategy::kEvenAlternate;
  if (name == "symmetric") return Strategy::kSymmetric;
  if (name == "contribution") return Strategy::kContribution;
  fail("unknown strategy \"" + name +
       "\" (expected top|bottom|odd-alternate|even-alternate|symmetric|contribution)");
}

DropPlan DropPlan::make(Strategy s, std::size_t L, std::set<std::size_t> dropped) {
  if (L == 0) fail("layer count must be positive");
  for (std::size_t i : dropped) {
    if (i < 1 || i > L) {
      fail("dropped layer " + std::to_string(i) + " outside {1.." + std::to_string(L) + "}");
    }
  }
  DropPlan p;
  p.strategy = s;
  p.num_layers = L;
  p.dropped = std::move(dropped);
  for (std::size_t i = 1; i <= L; ++i) {
    if (!p.dropped.count(i)) p.kept.push_back(i);
  }
  return p;
}

DropPlan plan_top(std::size_t L, std::size_t K) {
  require_k_below_l(L, K);
  std::set<std::size_t> dropped;
  for (std::size_t i = L - K + 1; i <= L; ++i) dropped.insert(i);
  return DropPlan::make(Strategy::kTop, L, std::move(dropped));
}

DropPlan plan_bottom(std::size_t L, std::size_t K) {
  require_k_below_l(L, K);
  std::set<std::size_t> dropped;
  for (std::size_t i = 1; i <= K; ++i) dropped.insert(i);
  return DropPlan::make(Strategy::kBottom, L, std::move(dropped));
}

DropPlan plan_even_alternate(std::size_t L, std::size_t K) {
  require_alternate_range(L, K);
  std::set<std::size_t> dropped;
  for (std::size_t i = 0; i < K; ++i) dropped.insert(L - 2 * i);
  return DropPlan::make(Strategy::kEvenAlternate, L, std::move(dropped));
}

DropPlan plan_odd_alternate(std::size_t L, std::size_t K) {
  require_alternate_range(L, K);
  std::set<std::size_t> dropped;
  for (std::size_t i = 0; i < K; ++i) dropped.insert(L - 1 - 2 * i);
  return DropPlan::make(Strategy::kOddAlternate, L, std::move(dropped));
}

DropPlan plan_symmetric(std::size_t L, std::size_t K) {
  require_k_below_l(L, K);
  if ((L - K) % 2 != 0) {
    fail("asymmetric remainder: L-K = " + std::to_string(L - K) +
         " leaves no equal top/bottom margins");
  }
  const std::size_t margin = (L - K) / 2;
  std::set<std::size_t> dropped;
  for (std::size_t i = margin + 1; i <= margin + K; ++i) dropped.insert(i);
  return DropPlan::make(Strategy::kSymmetric, L, std::move(dropped));
}

void SimilarityProfile::validate() const {
  if (num_layers == 0 || mean_similarity.empty()) fail("empty similarity profile");
  if (mean_similarity.size() != num_layers) {
    fail("profile has " + std::to_string(mean_similarity.size()) + " entries for " +
         std::to_string(num_layers) + " layers");
  }
  for (double s : mean_similarity) {
    if (!(s >= -1.0 && s <= 1.0)) fail("similarity outside [-1, 1]");
  }
  if (n_examples < 1) fail("profile must cover at least one example");
}

DropPlan select_by_threshold(const SimilarityProfile& profile, double tau) {
  profile.validate();
  if (!(tau >= 0.0 && tau <= 1.0)) {
    fail("similarity threshold must lie in [0, 1], got " + std::to_string(tau));
  }
  std::set<std::size_t> dropped;
  for (std::size_t i = 0; i < profile.num_layers; ++i) {
    if (profile.mean_similarity[i] > tau) dropped.insert(i + 1);
  }
  return DropPlan::make(Strategy::kContribution, profile.num_layers, std::move(dropped));
}

DropPlan make_plan(Strategy s, std::size_t L, std::size_t K) {
  switch (s) {
    case Strategy::kTop: return plan_top(L, K);
    case Strategy::kBottom: return plan_bottom(L, K);
    case Strategy::kOddAlternate: return plan_odd_alternate(L, K);
    case Strategy::kEvenAlternate: return plan_even_alternate(L, K);
    case Strategy::kSymmetric: return plan_symmetric(L, K);
    case Strategy::kContribution:
      fail("contribution planning needs a similarity profile, not (L, K)");
  }
  fail("unreachable strategy");
}

}  // namespace layercut
