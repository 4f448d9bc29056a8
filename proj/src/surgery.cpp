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

#include "layercut/surgery.hpp"

#include <algorithm>
#include <cctype>

namespace layercut {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error("surgery", msg); }

void check_plan(const ModelTopology& t, const DropPlan& p) {
  if (p.num_layers != t.num_layers) {
    fail("plan/topology mismatch: plan is for " + std::to_string(p.num_layers) +
         " layers, checkpoint has " + std::to_string(t.num_layers));
  }
  if (p.kept.empty()) fail("plan would leave zero layers");
}

}  // namespace

std::map<std::string, std::optional<std::string>> plan_rename_map(const ModelTopology& t,
                                                                  const DropPlan& p) {
  check_plan(t, p);
  std::map<std::string, std::optional<std::string>> renames;
  for (const std::string& name : t.embedding_tensors) renames[name] = name;
  for (const std::string& name : t.other_tensors) renames[name] = name;

  const std::string prefix = t.scheme.layer_prefix();
  const std::string suffix = t.scheme.layer_suffix();
  std::size_t next_index = 0;
  for (std::size_t old_index = 0; old_index < t.num_layers; ++old_index) {
    const bool keep = !p.drops(old_index + 1);
    for (const std::string& name : t.layer_tensors[old_index]) {
      if (!keep) {
        renames[name] = std::nullopt;
        continue;
      }
      // name = prefix + digits + rest; substitute the renumbered index
      std::size_t digits_end = prefix.size();
      while (digits_end < name.size() &&
             std::isdigit(static_cast<unsigned char>(name[digits_end]))) {
        ++digits_end;
      }
      renames[name] = prefix + std::to_string(next_index) + name.substr(digits_end);
    }
    if (keep) ++next_index;
  }
  return renames;
}

Checkpoint apply_plan(const Checkpoint& c, const ModelTopology& t, const DropPlan& p) {
  const auto renames = plan_rename_map(t, p);
  Checkpoint out;
  for (const auto& [name, entry] : c.tensors()) {
    const auto it = renames.find(name);
    if (it == renames.end()) {
      fail("tensor \"" + name + "\" absent from the plan's topology");
    }
    if (!it->second) continue;  // dropped
    out.add_tensor(*it->second, entry.dtype, entry.shape, entry.bytes);
  }
  if (c.metadata()) {
    for (const auto& [k, v] : *c.metadata()) out.set_metadata(k, v);
  }
  return out;
}

std::vector<NamedShape> apply_plan_shapes(std::span<const NamedShape> tensors,
                                          const ModelTopology& t, const DropPlan& p) {
  const auto renames = plan_rename_map(t, p);
  std::vector<NamedShape> out;
  out.reserve(tensors.size());
  for (const NamedShape& ns : tensors) {
    const auto it = renames.find(ns.name);
    if (it == renames.end()) {
      fail("tensor \"" + ns.name + "\" absent from the plan's topology");
    }
    if (!it->second) continue;
    out.push_back({*it->second, ns.shape});
  }
  return out;
}

ReductionReport reduction_report(const ParamReport& before, const ParamReport& after,
                                 const DropPlan& p) {
  if (before.per_layer.size() != p.num_layers) {
    fail("before-report covers " + std::to_string(before.per_layer.size()) +
         " layers, plan expects " + std::to_string(p.num_layers));
  }
  if (after.per_layer.size() != p.kept.size()) {
    fail("after-report covers " + std::to_string(after.per_layer.size()) +
         " layers, plan keeps " + std::to_string(p.kept.size()));
  }
  ReductionReport r;
  r.params_before = before.total;
  r.params_after = after.total;
  r.reduction_fraction =
      1.0 - static_cast<double>(after.total) / static_cast<double>(before.total);
  r.layers_before = p.num_layers;
  r.layers_after = p.kept.size();
  r.est_finetune_speedup =
      static_cast<double>(p.num_layers) / static_cast<double>(p.kept.size());
  return r;
}

std::size_t max_droppable_within(const std::map<std::size_t, double>& scores,
                                 std::optional<double> full_score, double threshold_points) {
  if (scores.empty()) fail("empty score map");
  double full = 0.0;
  if (full_score) {
    full = *full_score;
  } else {
    const auto it = scores.find(0);
    if (it == scores.end()) fail("score map lacks K=0 and no full-model score was given");
    full = it->second;
  }
  std::size_t best = 0;
  for (const auto& [k, score] : scores) {
    if (full - score <= threshold_points) best = std::max(best, k);
  }
  return best;
}

}  // namespace layercut
