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

#ifndef LAYERCUT_SURGERY_HPP
#define LAYERCUT_SURGERY_HPP

#include <map>
#include <optional>

#include "layercut/strategies.hpp"
#include "layercut/topology.hpp"

namespace layercut {

struct ReductionReport {
  std::uint64_t params_before = 0;
  std::uint64_t params_after = 0;
  double reduction_fraction = 0.0;        // 1 - after/before
  std::size_t layers_before = 0;
  std::size_t layers_after = 0;
  double est_finetune_speedup = 1.0;      // L / (L - K)
};

/// Name rewrite for a plan: dropped tensors map to nullopt, surviving layer
/// tensors to their renumbered names (contiguous 0..L-K-1), everything else
/// to itself. This is the single source of truth for surgery; byte-level
/// and metadata-only callers share it.
std::map<std::string, std::optional<std::string>> plan_rename_map(const ModelTopology& t,
                                                                  const DropPlan& p);

/// Delete dropped layers and renumber survivors. Kept buffers are moved
/// byte-identically; only names change. Input is never mutated.
Checkpoint apply_plan(const Checkpoint& c, const ModelTopology& t, const DropPlan& p);

/// Same surgery on a shape table; used for parameter accounting at scales
/// where buffers are not materialized.
std::vector<NamedShape> apply_plan_shapes(std::span<const NamedShape> tensors,
                                          const ModelTopology& t, const DropPlan& p);

ReductionReport reduction_report(const ParamReport& before, const ParamReport& after,
                                 const DropPlan& p);

/// Largest K in `scores` whose score stays within `threshold_points`
/// (absolute points of the task metric) of the full-model score; 0 when
/// none qualifies. The full-model score defaults to scores[0].
std::size_t max_droppable_within(const std::map<std::size_t, double>& scores,
                                 std::optional<double> full_score, double threshold_points);

}  // namespace layercut

#endif  // LAYERCUT_SURGERY_HPP
