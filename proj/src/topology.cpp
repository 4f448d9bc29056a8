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

#include "layercut/topology.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

#include <json.hpp>

namespace layercut {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error("topology", msg); }

bool starts_with_any(const std::string& name, const std::vector<std::string>& prefixes) {
  for (const std::string& p : prefixes) {
    if (name.rfind(p, 0) == 0) return true;
  }
  return false;
}

}  // namespace

std::string NamingScheme::layer_prefix() const {
  const auto pos = layer_pattern.find("{i}");
  return layer_pattern.substr(0, pos);
}

std::string NamingScheme::layer_suffix() const {
  const auto pos = layer_pattern.find("{i}");
  return layer_pattern.substr(pos + 3);
}

std::string NamingScheme::layer_name(std::size_t index, const std::string& rest) const {
  return layer_prefix() + std::to_string(index) + layer_suffix() + rest;
}

std::optional<std::size_t> NamingScheme::match_layer(const std::string& name) const {
  const std::string prefix = layer_prefix();
  const std::string suffix = layer_suffix();
  if (name.rfind(prefix, 0) != 0) return std::nullopt;
  std::size_t pos = prefix.size();
  std::size_t digits_end = pos;
  while (digits_end < name.size() && std::isdigit(static_cast<unsigned char>(name[digits_end]))) {
    ++digits_end;
  }
  if (digits_end == pos) return std::nullopt;
  if (name.compare(digits_end, suffix.size(), suffix) != 0) return std::nullopt;
  return std::stoull(name.substr(pos, digits_end - pos));
}

void NamingScheme::validate() const {
  std::size_t first = layer_pattern.find("{i}");
  if (first == std::string::npos) {
    fail("layer_pattern must contain an {i} index capture: \"" + layer_pattern + "\"");
  }
  if (layer_pattern.find("{i}", first + 1) != std::string::npos) {
    fail("layer_pattern must contain exactly one {i} capture: \"" + layer_pattern + "\"");
  }
}

NamingScheme NamingScheme::bert_default() {
  NamingScheme s;
  s.embedding_prefixes = {"embeddings."};
  s.layer_pattern = "encoder.layer.{i}.";
  s.other_prefixes = {"pooler.", "classifier."};
  return s;
}

NamingScheme NamingScheme::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open naming-scheme file \"" + path + "\"");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail("naming-scheme file \"" + path + "\" is not valid JSON: " + e.what());
  }
  NamingScheme s = bert_default();
  if (j.contains("embedding_prefixes")) {
    s.embedding_prefixes = j["embedding_prefixes"].get<std::vector<std::string>>();
  }
  if (j.contains("layer_pattern")) s.layer_pattern = j["layer_pattern"].get<std::string>();
  if (j.contains("other_prefixes")) {
    s.other_prefixes = j["other_prefixes"].get<std::vector<std::string>>();
  }
  s.validate();
  return s;
}

std::vector<NamedShape> named_shapes(const Checkpoint& c) {
  std::vector<NamedShape> out;
  out.reserve(c.tensor_count());
  for (const auto& [name, entry] : c.tensors()) out.push_back({name, entry.shape});
  return out;
}

std::size_t ModelTopology::tensor_count() const {
  std::size_t n = embedding_tensors.size() + other_tensors.size();
  for (const auto& layer : layer_tensors) n += layer.size();
  return n;
}

ModelTopology infer_topology(std::span<const NamedShape> tensors, const NamingScheme& scheme) {
  scheme.validate();
  ModelTopology topo;
  topo.scheme = scheme;
  std::map<std::size_t, std::vector<std::string>> layers;
  for (const NamedShape& t : tensors) {
    const auto layer_index = scheme.match_layer(t.name);
    const bool in_embedding = starts_with_any(t.name, scheme.embedding_prefixes);
    const bool in_other = starts_with_any(t.name, scheme.other_prefixes);
    const int matches = int(layer_index.has_value()) + int(in_embedding) + int(in_other);
    if (matches > 1) {
      fail("tensor \"" + t.name + "\" matches multiple blocks");
    }
    if (layer_index) {
      layers[*layer_index].push_back(t.name);
    } else if (in_embedding) {
      topo.embedding_tensors.push_back(t.name);
    } else {
      topo.other_tensors.push_back(t.name);  // catch-all for head tensors
    }
  }
  if (layers.empty()) fail("no layer tensors found (pattern \"" + scheme.layer_pattern + "\")");
  const std::size_t max_index = layers.rbegin()->first;
  if (layers.size() != max_index + 1) {
    std::string seen;
    for (const auto& [idx, names] : layers) seen += (seen.empty() ? "" : ",") + std::to_string(idx);
    fail("non-contiguous layer indices {" + seen + "}");
  }
  topo.num_layers = layers.size();
  topo.layer_tensors.resize(topo.num_layers);
  for (auto& [idx, names] : layers) {
    std::sort(names.begin(), names.end());
    topo.layer_tensors[idx] = std::move(names);
  }
  std::sort(topo.embedding_tensors.begin(), topo.embedding_tensors.end());
  std::sort(topo.other_tensors.begin(), topo.other_tensors.end());
  return topo;
}

ModelTopology infer_topology(const Checkpoint& c, const NamingScheme& scheme) {
  const auto shapes = named_shapes(c);
  return infer_topology(shapes, scheme);
}

ParamReport count_parameters(std::span<const NamedShape> tensors, const ModelTopology& t) {
  std::map<std::string, std::uint64_t> sizes;
  for (const NamedShape& ns : tensors) sizes[ns.name] = shape_numel(ns.shape);
  const auto size_of = [&](const std::string& name) -> std::uint64_t {
    auto it = sizes.find(name);
    if (it == sizes.end()) fail("topology names tensor \"" + name + "\" absent from checkpoint");
    return it->second;
  };

  ParamReport report;
  for (const std::string& name : t.embedding_tensors) report.embedding += size_of(name);
  report.per_layer.resize(t.num_layers, 0);
  for (std::size_t i = 0; i < t.num_layers; ++i) {
    for (const std::string& name : t.layer_tensors[i]) report.per_layer[i] += size_of(name);
  }
  for (const std::string& name : t.other_tensors) report.other += size_of(name);
  report.total = report.embedding + report.other;
  for (std::uint64_t n : report.per_layer) report.total += n;
  return report;
}

ParamReport count_parameters(const Checkpoint& c, const ModelTopology& t) {
  const auto shapes = named_shapes(c);
  return count_parameters(shapes, t);
}

}  // namespace layercut
