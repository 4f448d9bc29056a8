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

#include "layercut/encoder.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

namespace layercut {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw Error("encoder", msg); }

}  // namespace

void EncoderConfig::validate() const {
  if (num_layers == 0) fail("num_layers must be positive");
  if (d_model == 0 || n_heads == 0 || d_ff == 0 || vocab_size == 0 || max_positions == 0) {
    fail("all model extents must be positive");
  }
  if (d_model % n_heads != 0) {
    fail("d_model " + std::to_string(d_model) + " not divisible by n_heads " +
         std::to_string(n_heads));
  }
  if (!(ln_epsilon > 0)) fail("ln_epsilon must be positive");
  if (cls_index >= max_positions) fail("cls_index beyond max_positions");
}

EncoderConfig EncoderConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open encoder config \"" + path + "\"");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail("encoder config \"" + path + "\" is not valid JSON: " + e.what());
  }
  EncoderConfig cfg;
  const auto read = [&j](const char* key, auto& out) {
    if (j.contains(key)) out = j[key].get<std::decay_t<decltype(out)>>();
  };
  read("num_layers", cfg.num_layers);
  read("d_model", cfg.d_model);
  read("n_heads", cfg.n_heads);
  read("d_ff", cfg.d_ff);
  read("vocab_size", cfg.vocab_size);
  read("max_positions", cfg.max_positions);
  read("num_token_types", cfg.num_token_types);
  read("ln_epsilon", cfg.ln_epsilon);
  read("cls_index", cfg.cls_index);
  cfg.validate();
  return cfg;
}

void EncoderConfig::save_file(const std::string& path) const {
  json j;
  j["num_layers"] = num_layers;
  j["d_model"] = d_model;
  j["n_heads"] = n_heads;
  j["d_ff"] = d_ff;
  j["vocab_size"] = vocab_size;
  j["max_positions"] = max_positions;
  j["num_token_types"] = num_token_types;
  j["ln_epsilon"] = ln_epsilon;
  j["cls_index"] = cls_index;
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail("cannot open \"" + path + "\" for writing");
  out << j.dump(2) << "\n";
}

TokenBatch TokenBatch::from_rows(const std::vector<std::vector<std::size_t>>& rows) {
  if (rows.empty()) fail("token batch must contain at least one example");
  TokenBatch b;
  b.batch_size = rows.size();
  b.seq_len = rows[0].size();
  for (const auto& row : rows) {
    if (row.size() != b.seq_len) fail("ragged rows in token batch");
  }
  b.ids.reserve(b.batch_size * b.seq_len);
  for (const auto& row : rows) b.ids.insert(b.ids.end(), row.begin(), row.end());
  b.mask.assign(b.batch_size * b.seq_len, 1);
  return b;
}

void validate_batch(const TokenBatch& batch, const EncoderConfig& cfg) {
  if (batch.batch_size == 0 || batch.seq_len == 0) fail("empty token batch");
  if (batch.seq_len > cfg.max_positions) {
    fail("sequence length " + std::to_string(batch.seq_len) + " exceeds max_positions " +
         std::to_string(cfg.max_positions));
  }
  if (cfg.cls_index >= batch.seq_len) {
    fail("cls_index " + std::to_string(cfg.cls_index) + " outside sequence of length " +
         std::to_string(batch.seq_len));
  }
  for (std::size_t b = 0; b < batch.batch_size; ++b) {
    bool any_real = false;
    for (std::size_t t = 0; t < batch.seq_len; ++t) {
      if (batch.id_at(b, t) >= cfg.vocab_size) {
        fail("token id " + std::to_string(batch.id_at(b, t)) + " outside vocabulary of " +
             std::to_string(cfg.vocab_size));
      }
      any_real = any_real || batch.is_real(b, t);
    }
    if (!any_real) fail("example " + std::to_string(b) + " has no unmasked positions");
    if (!batch.is_real(b, cfg.cls_index)) {
      fail("example " + std::to_string(b) + " masks the sentence token at position " +
           std::to_string(cfg.cls_index));
    }
  }
}

std::vector<TokenRecord> load_token_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open batch file \"" + path + "\"");
  std::vector<TokenRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      fail("batch file \"" + path + "\" line " + std::to_string(line_no) +
           " is not valid JSON: " + e.what());
    }
    if (!j.contains("tokens") || !j["tokens"].is_array()) {
      fail("batch file \"" + path + "\" line " + std::to_string(line_no) +
           " lacks a \"tokens\" array");
    }
    TokenRecord rec;
    for (const auto& t : j["tokens"]) {
      if (!t.is_number_unsigned()) {
        fail("batch file \"" + path + "\" line " + std::to_string(line_no) +
             ": tokens must be non-negative integers");
      }
      rec.tokens.push_back(t.get<std::size_t>());
    }
    if (rec.tokens.empty()) {
      fail("batch file \"" + path + "\" line " + std::to_string(line_no) + ": empty token list");
    }
    if (j.contains("label")) rec.label = j["label"].get<int>();
    records.push_back(std::move(rec));
  }
  if (records.empty()) fail("batch file \"" + path + "\" contains no records");
  return records;
}

std::vector<TokenBatch> batches_from_records(const std::vector<TokenRecord>& records,
                                             std::size_t batch_size) {
  if (batch_size == 0) fail("batch size must be positive");
  if (records.empty()) fail("no records to batch");
  std::vector<TokenBatch> batches;
  for (std::size_t at = 0; at < records.size(); at += batch_size) {
    const std::size_t n = std::min(batch_size, records.size() - at);
    std::size_t seq = 0;
    for (std::size_t i = 0; i < n; ++i) seq = std::max(seq, records[at + i].tokens.size());
    TokenBatch b;
    b.batch_size = n;
    b.seq_len = seq;
    b.ids.assign(n * seq, 0);
    b.mask.assign(n * seq, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& tokens = records[at + i].tokens;
      for (std::size_t t = 0; t < tokens.size(); ++t) {
        b.ids[i * seq + t] = tokens[t];
        b.mask[i * seq + t] = 1;
      }
    }
    batches.push_back(std::move(b));
  }
  return batches;
}

}  // namespace layercut
