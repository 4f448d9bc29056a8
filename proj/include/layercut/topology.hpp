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

#ifndef LAYERCUT_TOPOLOGY_HPP
#define LAYERCUT_TOPOLOGY_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "layercut/tensorstore.hpp"

namespace layercut {

/// How tensor names map onto blocks: embedding prefixes, a layer pattern
/// with an "{i}" index capture, and prefixes for head/other tensors.
/// Names matching none of the three fall into the "other" block.
struct NamingScheme {
  std::vector<std::string> embedding_prefixes;
  std::string layer_pattern = "encoder.layer.{i}.";
  std::vector<std::string> other_prefixes;

  // pattern split at "{i}"
  std::string layer_prefix() const;
  std::string layer_suffix() const;

  // Layer-tensor name for 0-based index i, e.g. "encoder.layer.3." + rest.
  std::string layer_name(std::size_t index, const std::string& rest) const;

  // 0-based captured index if `name` matches the layer pattern.
  std::optional<std::size_t> match_layer(const std::string& name) const;

  void validate() const;  // pattern must capture exactly one index

  static NamingScheme bert_default();
  static NamingScheme load_file(const std::string& path);
};

/// (name, shape) pair; enough for topology inference and parameter
/// accounting without materializing tensor buffers.
struct NamedShape {
  std::string name;
  std::vector<std::size_t> shape;
};

std::vector<NamedShape> named_shapes(const Checkpoint& c);

/// Structural decomposition: embedding block, L ordered encoder layers
/// (slot 0 holds layer 1), and everything else. Tensor names within each
/// block are sorted, so inference is insertion-order invariant.
struct ModelTopology {
  std::size_t num_layers = 0;
  std::vector<std::string> embedding_tensors;
  std::vector<std::vector<std::string>> layer_tensors;
  std::vector<std::string> other_tensors;
  NamingScheme scheme;  // the scheme used to derive this topology

  std::size_t tensor_count() const;
};

struct ParamReport {
  std::uint64_t total = 0;
  std::uint64_t embedding = 0;
  std::vector<std::uint64_t> per_layer;
  std::uint64_t other = 0;

  // Whether published totals include head/pooler tensors is ambiguous, so
  // both figures are reported.
  std::uint64_t total_without_other() const { return total - other; }
};

ModelTopology infer_topology(std::span<const NamedShape> tensors, const NamingScheme& scheme);
ModelTopology infer_topology(const Checkpoint& c, const NamingScheme& scheme);

ParamReport count_parameters(std::span<const NamedShape> tensors, const ModelTopology& t);
ParamReport count_parameters(const Checkpoint& c, const ModelTopology& t);

}  // namespace layercut

#endif  // LAYERCUT_TOPOLOGY_HPP
