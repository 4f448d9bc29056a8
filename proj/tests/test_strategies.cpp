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

#include <doctest.h>

#include <algorithm>

#include "layercut/strategies.hpp"

using namespace layercut;

namespace {

std::set<std::size_t> drops(const DropPlan& p) { return p.dropped; }

SimilarityProfile profile_of(std::vector<double> sims) {
  SimilarityProfile p;
  p.num_layers = sims.size();
  p.mean_similarity = std::move(sims);
  p.n_examples = 1;
  return p;
}

}  // namespace

TEST_SUITE_BEGIN("strategies");

TEST_CASE("top dropping") {
  CHECK(drops(plan_top(12, 2)) == std::set<std::size_t>{11, 12});
  CHECK(drops(plan_top(12, 0)).empty());
  CHECK(drops(plan_top(6, 3)) == std::set<std::size_t>{4, 5, 6});
  CHECK(plan_top(12, 2).kept == std::vector<std::size_t>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  CHECK_THROWS_AS(plan_top(12, 12), Error);
}

TEST_CASE("bottom dropping") {
  CHECK(drops(plan_bottom(12, 2)) == std::set<std::size_t>{1, 2});
  CHECK(drops(plan_bottom(12, 6)) == std::set<std::size_t>{1, 2, 3, 4, 5, 6});
  CHECK_THROWS_WITH_AS(plan_bottom(12, 12), doctest::Contains("empty"), Error);
}

TEST_CASE("even-alternate dropping") {
  CHECK(drops(plan_even_alternate(12, 4)) == std::set<std::size_t>{6, 8, 10, 12});
  CHECK(drops(plan_even_alternate(12, 2)) == std::set<std::size_t>{10, 12});
  CHECK(drops(plan_even_alternate(12, 6)) == std::set<std::size_t>{2, 4, 6, 8, 10, 12});
}

TEST_CASE("odd-alternate dropping") {
  CHECK(drops(plan_odd_alternate(12, 4)) == std::set<std::size_t>{5, 7, 9, 11});
  CHECK(drops(plan_odd_alternate(12, 2)) == std::set<std::size_t>{9, 11});
  CHECK(drops(plan_odd_alternate(12, 1)) == std::set<std::size_t>{11});
}

TEST_CASE("alternate dropping rejects odd L and out-of-range K") {
  CHECK_THROWS_WITH_AS(plan_odd_alternate(11, 2), doctest::Contains("even layer count"), Error);
  CHECK_THROWS_AS(plan_even_alternate(12, 0), Error);
  CHECK_THROWS_AS(plan_even_alternate(12, 7), Error);
}

TEST_CASE("symmetric dropping") {
  CHECK(drops(plan_symmetric(12, 6)) == std::set<std::size_t>{4, 5, 6, 7, 8, 9});
  CHECK(drops(plan_symmetric(12, 2)) == std::set<std::size_t>{6, 7});
  CHECK_THROWS_WITH_AS(plan_symmetric(12, 3), doctest::Contains("asymmetric remainder"), Error);
}

TEST_CASE("every strategy drops exactly K layers inside 1..L") {
  for (std::size_t L : {6u, 8u, 12u, 24u}) {
    for (std::size_t K = 0; K < L; ++K) {
      for (const Strategy s :
           {Strategy::kTop, Strategy::kBottom, Strategy::kSymmetric}) {
        if (s == Strategy::kSymmetric && (L - K) % 2 != 0) continue;
        const DropPlan p = make_plan(s, L, K);
        CHECK(p.drop_count() == K);
        CHECK(p.kept.size() == L - K);
        for (std::size_t d : p.dropped) {
          CHECK(d >= 1);
          CHECK(d <= L);
        }
        std::vector<std::size_t> all(p.kept);
        all.insert(all.end(), p.dropped.begin(), p.dropped.end());
        std::sort(all.begin(), all.end());
        std::vector<std::size_t> expect(L);
        for (std::size_t i = 0; i < L; ++i) expect[i] = i + 1;
        CHECK(all == expect);
      }
      if (K >= 1 && K <= L / 2 && L % 2 == 0) {
        CHECK(make_plan(Strategy::kOddAlternate, L, K).drop_count() == K);
        CHECK(make_plan(Strategy::kEvenAlternate, L, K).drop_count() == K);
      }
    }
  }
}

TEST_CASE("top and bottom plans are disjoint when 2K <= L") {
  for (std::size_t L : {6u, 12u, 13u}) {
    for (std::size_t K = 0; 2 * K <= L && K < L; ++K) {
      const auto top = drops(plan_top(L, K));
      const auto bottom = drops(plan_bottom(L, K));
      for (std::size_t d : top) CHECK(bottom.count(d) == 0);
    }
  }
}

TEST_CASE("alternate plans at K = L/2 partition 1..L into odd and even") {
  for (std::size_t L : {6u, 12u}) {
    const auto odd = drops(plan_odd_alternate(L, L / 2));
    const auto even = drops(plan_even_alternate(L, L / 2));
    for (std::size_t d : odd) CHECK(d % 2 == 1);
    for (std::size_t d : even) CHECK(d % 2 == 0);
    std::set<std::size_t> all = odd;
    all.insert(even.begin(), even.end());
    CHECK(all.size() == L);
  }
}

TEST_CASE("threshold selection") {
  const auto p = profile_of({0.99, 0.50, 0.96, 0.40});
  CHECK(drops(select_by_threshold(p, 0.95)) == std::set<std::size_t>{1, 3});
  CHECK(drops(select_by_threshold(p, 1.0)).empty());
  CHECK(select_by_threshold(p, 0.95).strategy == Strategy::kContribution);
}

TEST_CASE("ties at the threshold are kept") {
  const auto p = profile_of({0.95, 0.96});
  CHECK(drops(select_by_threshold(p, 0.95)) == std::set<std::size_t>{2});
}

TEST_CASE("threshold monotonicity") {
  const auto p = profile_of({0.99, 0.91, 0.93, 0.96, 0.20, 0.94});
  const auto at = [&p](double tau) { return drops(select_by_threshold(p, tau)); };
  const auto d95 = at(0.95);
  const auto d925 = at(0.925);
  const auto d90 = at(0.90);
  CHECK(std::includes(d925.begin(), d925.end(), d95.begin(), d95.end()));
  CHECK(std::includes(d90.begin(), d90.end(), d925.begin(), d925.end()));
}

TEST_CASE("empty profile is rejected") {
  SimilarityProfile p;
  CHECK_THROWS_WITH_AS(select_by_threshold(p, 0.9), doctest::Contains("empty"), Error);
}

TEST_CASE("thresholds outside [0, 1] are rejected") {
  const auto p = profile_of({0.5, 0.6});
  CHECK_THROWS_WITH_AS(select_by_threshold(p, 1.5), doctest::Contains("[0, 1]"), Error);
  CHECK_THROWS_AS(select_by_threshold(p, -0.1), Error);
  CHECK(select_by_threshold(p, 0.0).drop_count() == 2);
  CHECK(select_by_threshold(p, 1.0).drop_count() == 0);
}

TEST_CASE("strategy names round-trip") {
  for (const Strategy s : {Strategy::kTop, Strategy::kBottom, Strategy::kOddAlternate,
                           Strategy::kEvenAlternate, Strategy::kSymmetric,
                           Strategy::kContribution}) {
    CHECK(strategy_from_name(strategy_name(s)) == s);
  }
  CHECK_THROWS_AS(strategy_from_name("middle"), Error);
}

TEST_SUITE_END();
