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

#ifndef LAYERCUT_ENCODER_HPP
#define LAYERCUT_ENCODER_HPP

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "layercut/graph.hpp"
#include "layercut/rng.hpp"
#include "layercut/tensorstore.hpp"
#include "layercut/topology.hpp"

namespace layercut {

// Post-normalization encoder, BERT-style: per layer
//   a = LayerNorm(x + MultiHeadAttention(x, mask))
//   y = LayerNorm(a + W2 * gelu(W1 * a + b1) + b2)
// with per-head softmax((Q K^T)/sqrt(d_model/n_heads) + mask_bias) V and a
// large negative bias on masked columns. The embedding block is token +
// learned position (+ optional segment) embeddings followed by LayerNorm.

struct EncoderConfig {
  std::size_t num_layers = 4;
  std::size_t d_model = 32;
  std::size_t n_heads = 4;
  std::size_t d_ff = 64;
  std::size_t vocab_size = 64;
  std::size_t max_positions = 16;
  std::size_t num_token_types = 0;  // 0 = no segment embedding table
  double ln_epsilon = 1e-12;
  std::size_t cls_index = 0;        // sentence-token position

  void validate() const;  // d_model divisible by n_heads, extents positive

  static EncoderConfig load_file(const std::string& path);
  void save_file(const std::string& path) const;
};

/// B x T token grid with a validity mask (true = real token).
struct TokenBatch {
  std::size_t batch_size = 0;
  std::size_t seq_len = 0;
  std::vector<std::size_t> ids;      // row-major, batch_size * seq_len
  std::vector<std::uint8_t> mask;    // 1 = real token

  std::size_t id_at(std::size_t b, std::size_t t) const { return ids[b * seq_len + t]; }
  bool is_real(std::size_t b, std::size_t t) const { return mask[b * seq_len + t] != 0; }

  // full-length rows, everything unmasked
  static TokenBatch from_rows(const std::vector<std::vector<std::size_t>>& rows);
};

/// One record of the line-delimited batch file format.
struct TokenRecord {
  std::vector<std::size_t> tokens;
  std::optional<int> label;
};

std::vector<TokenRecord> load_token_records(const std::string& path);

// Pads records to the longest row per batch (pad id 0, masked out).
std::vector<TokenBatch> batches_from_records(const std::vector<TokenRecord>& records,
                                             std::size_t batch_size);

template <class T>
struct LayerWeights {
  Mat<T> wq, bq, wk, bk, wv, bv;   // [d, d] projections with [1, d] biases
  Mat<T> wo, bo;                   // attention output dense
  Mat<T> ln1_gamma, ln1_beta;      // post-attention LayerNorm
  Mat<T> wi, bi;                   // intermediate dense [d_ff, d]
  Mat<T> wout, bout;               // output dense [d, d_ff]
  Mat<T> ln2_gamma, ln2_beta;      // post-FFN LayerNorm

  std::size_t parameter_count() const;
  template <class Fn>
  void for_each(Fn&& fn) {
    fn(wq); fn(bq); fn(wk); fn(bk); fn(wv); fn(bv);
    fn(wo); fn(bo); fn(ln1_gamma); fn(ln1_beta);
    fn(wi); fn(bi); fn(wout); fn(bout); fn(ln2_gamma); fn(ln2_beta);
  }
  template <class Fn>
  void for_each(Fn&& fn) const {
    fn(wq); fn(bq); fn(wk); fn(bk); fn(wv); fn(bv);
    fn(wo); fn(bo); fn(ln1_gamma); fn(ln1_beta);
    fn(wi); fn(bi); fn(wout); fn(bout); fn(ln2_gamma); fn(ln2_beta);
  }
};

/// Loaded weights plus the configuration needed to run them. Immutable
/// during forward passes; the trainer owns its own copy.
template <class T>
struct EncoderModel {
  EncoderConfig config;
  Mat<T> word_embeddings;           // [vocab, d]
  Mat<T> position_embeddings;       // [max_positions, d]
  Mat<T> token_type_embeddings;     // [num_token_types, d]; empty when disabled
  Mat<T> emb_ln_gamma, emb_ln_beta;
  std::vector<LayerWeights<T>> layers;

  std::size_t num_layers() const { return layers.size(); }
  std::size_t parameter_count() const;

  // removes one layer in place (0-based position); survivors shift down
  void drop_layer(std::size_t position);

  template <class Fn>
  void for_each_parameter(Fn&& fn) {
    fn(word_embeddings);
    fn(position_embeddings);
    if (token_type_embeddings.rows > 0) fn(token_type_embeddings);
    fn(emb_ln_gamma);
    fn(emb_ln_beta);
    for (auto& layer : layers) layer.for_each(fn);
  }
  template <class Fn>
  void for_each_parameter(Fn&& fn) const {
    fn(word_embeddings);
    fn(position_embeddings);
    if (token_type_embeddings.rows > 0) fn(token_type_embeddings);
    fn(emb_ln_gamma);
    fn(emb_ln_beta);
    for (const auto& layer : layers) layer.for_each(fn);
  }
};

/// CLS rows at every layer boundary: cls[0] follows the embedding block,
/// cls[i] follows layer i. Each entry is batch_size x d_model.
template <class T>
struct LayerTaps {
  std::vector<Mat<T>> cls;
};

template <class T>
struct ForwardResult {
  std::vector<Mat<T>> hidden;  // one seq_len x d_model matrix per example
  LayerTaps<T> taps;
};

struct ForwardOptions {
  // 1-based layers to pass through unchanged (output == input); their taps
  // repeat the previous boundary
  std::set<std::size_t> skip_layers;
};

template <class T>
EncoderModel<T> load_weights(const Checkpoint& c, const EncoderConfig& cfg,
                             const NamingScheme& scheme);

/// Serializes a model (and optionally extra named head tensors) back into a
/// checkpoint using the scheme's layer naming.
template <class T>
Checkpoint model_to_checkpoint(const EncoderModel<T>& m, const NamingScheme& scheme);

template <class T>
ForwardResult<T> forward(const EncoderModel<T>& m, const TokenBatch& batch,
                         const ForwardOptions& options = {});

// weights ~ N(0, 0.02), LayerNorm at identity
template <class T>
EncoderModel<T> random_model(const EncoderConfig& cfg, std::uint64_t seed);

// ---- primitives ------------------------------------------------------

// row-wise (x - mean) / sqrt(var + eps) * gamma + beta, population variance
template <class T>
Mat<T> layer_norm(const Mat<T>& x, const Mat<T>& gamma, const Mat<T>& beta, T eps);

// exact x * Phi(x), error-function form
template <class T>
Mat<T> gelu(const Mat<T>& x);

// row-wise softmax with max subtraction (shift-invariant)
template <class T>
Mat<T> softmax(const Mat<T>& x);

// ---- graph-building hooks shared with the trainer --------------------

template <class T>
struct LayerVars {
  using Id = typename Graph<T>::Id;
  Id wq, bq, wk, bk, wv, bv, wo, bo;
  Id ln1_gamma, ln1_beta, wi, bi, wout, bout, ln2_gamma, ln2_beta;
};

template <class T>
struct ModelVars {
  using Id = typename Graph<T>::Id;
  Id word = 0, pos = 0, type = 0, emb_gamma = 0, emb_beta = 0;
  bool has_type = false;
  std::vector<LayerVars<T>> layers;

  template <class Fn>
  void for_each_parameter(Fn&& fn) const {
    fn(word);
    fn(pos);
    if (has_type) fn(type);
    fn(emb_gamma);
    fn(emb_beta);
    for (const auto& l : layers) {
      fn(l.wq); fn(l.bq); fn(l.wk); fn(l.bk); fn(l.wv); fn(l.bv);
      fn(l.wo); fn(l.bo); fn(l.ln1_gamma); fn(l.ln1_beta);
      fn(l.wi); fn(l.bi); fn(l.wout); fn(l.bout); fn(l.ln2_gamma); fn(l.ln2_beta);
    }
  }
};

template <class T>
ModelVars<T> stage_model(Graph<T>& g, const EncoderModel<T>& m);

template <class T>
struct ExampleEncoding {
  using Id = typename Graph<T>::Id;
  Id final_hidden;          // seq_len x d_model
  std::vector<Id> cls_taps; // L+1 boundary CLS rows, each 1 x d_model
};

/// Encodes one example of `batch` on the graph. Shared by inference,
/// contribution scoring, and training so every caller runs the exact same
/// arithmetic.
template <class T>
ExampleEncoding<T> encode_example(Graph<T>& g, const ModelVars<T>& vars,
                                  const EncoderConfig& cfg, const TokenBatch& batch,
                                  std::size_t example, const ForwardOptions& options = {});

void validate_batch(const TokenBatch& batch, const EncoderConfig& cfg);

// ---- canonical tensor names ------------------------------------------

namespace names {
inline constexpr const char* kWordEmbeddings = "embeddings.word_embeddings.weight";
inline constexpr const char* kPositionEmbeddings = "embeddings.position_embeddings.weight";
inline constexpr const char* kTokenTypeEmbeddings = "embeddings.token_type_embeddings.weight";
inline constexpr const char* kEmbeddingLayerNormWeight = "embeddings.LayerNorm.weight";
inline constexpr const char* kEmbeddingLayerNormBias = "embeddings.LayerNorm.bias";
inline constexpr const char* kClassifierWeight = "classifier.weight";
inline constexpr const char* kClassifierBias = "classifier.bias";
}  // namespace names

// ---- implementation ---------------------------------------------------

template <class T>
Mat<T> layer_norm(const Mat<T>& x, const Mat<T>& gamma, const Mat<T>& beta, T eps) {
  if (gamma.cols != x.cols || beta.cols != x.cols) {
    throw Error("encoder", "layer_norm scale/shift width mismatch");
  }
  if (!(eps > 0)) throw Error("encoder", "layer_norm epsilon must be positive");
  const std::size_t n = x.cols;
  Mat<T> out(x.rows, n);
  for (std::size_t r = 0; r < x.rows; ++r) {
    T mean = T(0);
    for (std::size_t c = 0; c < n; ++c) mean += x(r, c);
    mean /= static_cast<T>(n);
    T var = T(0);
    for (std::size_t c = 0; c < n; ++c) {
      const T d = x(r, c) - mean;
      var += d * d;
    }
    var /= static_cast<T>(n);
    const T inv = T(1) / std::sqrt(var + eps);
    for (std::size_t c = 0; c < n; ++c) {
      out(r, c) = (x(r, c) - mean) * inv * gamma(0, c) + beta(0, c);
    }
  }
  return out;
}

template <class T>
Mat<T> gelu(const Mat<T>& x) {
  Mat<T> out = x;
  for (T& e : out.v) e = Graph<T>::gelu_scalar(e);
  return out;
}

template <class T>
Mat<T> softmax(const Mat<T>& x) {
  return Graph<T>::softmax_rows_value(x);
}

template <class T>
std::size_t LayerWeights<T>::parameter_count() const {
  std::size_t n = 0;
  for_each([&n](const Mat<T>& m) { n += m.size(); });
  return n;
}

template <class T>
std::size_t EncoderModel<T>::parameter_count() const {
  std::size_t n = 0;
  for_each_parameter([&n](const Mat<T>& m) { n += m.size(); });
  return n;
}

template <class T>
void EncoderModel<T>::drop_layer(std::size_t position) {
  if (position >= layers.size()) throw Error("encoder", "drop_layer position out of range");
  if (layers.size() == 1) throw Error("encoder", "cannot drop the only remaining layer");
  layers.erase(layers.begin() + static_cast<std::ptrdiff_t>(position));
  config.num_layers = layers.size();
}

template <class T>
ModelVars<T> stage_model(Graph<T>& g, const EncoderModel<T>& m) {
  ModelVars<T> vars;
  vars.word = g.input(m.word_embeddings);
  vars.pos = g.input(m.position_embeddings);
  vars.has_type = m.token_type_embeddings.rows > 0;
  if (vars.has_type) vars.type = g.input(m.token_type_embeddings);
  vars.emb_gamma = g.input(m.emb_ln_gamma);
  vars.emb_beta = g.input(m.emb_ln_beta);
  for (const LayerWeights<T>& l : m.layers) {
    LayerVars<T> lv;
    lv.wq = g.input(l.wq); lv.bq = g.input(l.bq);
    lv.wk = g.input(l.wk); lv.bk = g.input(l.bk);
    lv.wv = g.input(l.wv); lv.bv = g.input(l.bv);
    lv.wo = g.input(l.wo); lv.bo = g.input(l.bo);
    lv.ln1_gamma = g.input(l.ln1_gamma); lv.ln1_beta = g.input(l.ln1_beta);
    lv.wi = g.input(l.wi); lv.bi = g.input(l.bi);
    lv.wout = g.input(l.wout); lv.bout = g.input(l.bout);
    lv.ln2_gamma = g.input(l.ln2_gamma); lv.ln2_beta = g.input(l.ln2_beta);
    vars.layers.push_back(lv);
  }
  return vars;
}

template <class T>
ExampleEncoding<T> encode_example(Graph<T>& g, const ModelVars<T>& vars,
                                  const EncoderConfig& cfg, const TokenBatch& batch,
                                  std::size_t example, const ForwardOptions& options) {
  using Id = typename Graph<T>::Id;
  const std::size_t seq = batch.seq_len;
  const std::size_t d = cfg.d_model;
  const std::size_t heads = cfg.n_heads;
  const std::size_t d_head = d / heads;
  const T eps = static_cast<T>(cfg.ln_epsilon);

  std::vector<std::size_t> token_rows(seq);
  std::vector<std::size_t> position_rows(seq);
  for (std::size_t t = 0; t < seq; ++t) {
    token_rows[t] = batch.id_at(example, t);
    position_rows[t] = t;
  }

  Id x = g.add(g.gather_rows(vars.word, token_rows),
               g.gather_rows(vars.pos, position_rows));
  if (vars.has_type) {
    // all tokens carry segment id 0
    x = g.add(x, g.gather_rows(vars.type, std::vector<std::size_t>(seq, 0)));
  }
  x = g.layer_norm_rows(x, vars.emb_gamma, vars.emb_beta, eps);

  // columns of masked positions get a large negative bias before softmax
  Mat<T> mask_bias(seq, seq, T(0));
  for (std::size_t tc = 0; tc < seq; ++tc) {
    if (!batch.is_real(example, tc)) {
      for (std::size_t tr = 0; tr < seq; ++tr) mask_bias(tr, tc) = T(-1e9);
    }
  }

  ExampleEncoding<T> enc;
  enc.cls_taps.push_back(g.pick_row(x, cfg.cls_index));

  const T inv_sqrt_dh = T(1) / std::sqrt(static_cast<T>(d_head));
  for (std::size_t li = 0; li < vars.layers.size(); ++li) {
    if (options.skip_layers.count(li + 1)) {
      enc.cls_taps.push_back(g.pick_row(x, cfg.cls_index));
      continue;
    }
    const LayerVars<T>& lv = vars.layers[li];
    const Id q = g.add_row(g.matmul_nt(x, lv.wq), lv.bq);
    const Id k = g.add_row(g.matmul_nt(x, lv.wk), lv.bk);
    const Id v = g.add_row(g.matmul_nt(x, lv.wv), lv.bv);
    std::vector<Id> contexts;
    contexts.reserve(heads);
    for (std::size_t h = 0; h < heads; ++h) {
      const std::size_t c0 = h * d_head;
      const std::size_t c1 = c0 + d_head;
      const Id qh = g.slice_cols(q, c0, c1);
      const Id kh = g.slice_cols(k, c0, c1);
      const Id vh = g.slice_cols(v, c0, c1);
      Id scores = g.scale(g.matmul_nt(qh, kh), inv_sqrt_dh);
      scores = g.add_const(scores, mask_bias);
      const Id probs = g.softmax_rows(scores);
      contexts.push_back(g.matmul(probs, vh));
    }
    const Id context = g.concat_cols(std::move(contexts));
    const Id attn_out = g.add_row(g.matmul_nt(context, lv.wo), lv.bo);
    const Id a = g.layer_norm_rows(g.add(x, attn_out), lv.ln1_gamma, lv.ln1_beta, eps);
    const Id inter = g.gelu(g.add_row(g.matmul_nt(a, lv.wi), lv.bi));
    const Id ffn_out = g.add_row(g.matmul_nt(inter, lv.wout), lv.bout);
    x = g.layer_norm_rows(g.add(a, ffn_out), lv.ln2_gamma, lv.ln2_beta, eps);
    enc.cls_taps.push_back(g.pick_row(x, cfg.cls_index));
  }
  enc.final_hidden = x;
  return enc;
}

namespace detail {

template <class T>
constexpr DType expected_dtype() {
  return std::is_same_v<T, float> ? DType::F32 : DType::F64;
}

template <class T>
Mat<T> load_tensor(const Checkpoint& c, const std::string& name,
                   const std::vector<std::size_t>& expected_shape) {
  if (!c.has_tensor(name)) throw Error("encoder", "missing tensor \"" + name + "\"");
  const TensorView view = c.view(name);
  if (view.dtype != expected_dtype<T>()) {
    throw Error("encoder", "tensor \"" + name + "\" has dtype " +
                               dtype_name(view.dtype) + ", loader expects " +
                               dtype_name(expected_dtype<T>()));
  }
  if (*view.shape != expected_shape) {
    const auto render = [](const std::vector<std::size_t>& s) {
      std::string out = "[";
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(s[i]);
      }
      return out + "]";
    };
    throw Error("encoder", "shape mismatch for \"" + name + "\": checkpoint has " +
                               render(*view.shape) + ", config requires " +
                               render(expected_shape));
  }
  return tensor_to_mat<T>(view);
}

inline std::string render_layer_name(const NamingScheme& scheme, std::size_t index,
                                     const char* rest) {
  return scheme.layer_name(index, rest);
}

}  // namespace detail

template <class T>
EncoderModel<T> load_weights(const Checkpoint& c, const EncoderConfig& cfg,
                             const NamingScheme& scheme) {
  cfg.validate();
  const ModelTopology topo = infer_topology(c, scheme);
  if (topo.num_layers != cfg.num_layers) {
    throw Error("encoder", "config expects " + std::to_string(cfg.num_layers) +
                               " layers, checkpoint has " + std::to_string(topo.num_layers));
  }
  const std::size_t d = cfg.d_model;
  EncoderModel<T> m;
  m.config = cfg;
  m.word_embeddings =
      detail::load_tensor<T>(c, names::kWordEmbeddings, {cfg.vocab_size, d});
  m.position_embeddings =
      detail::load_tensor<T>(c, names::kPositionEmbeddings, {cfg.max_positions, d});
  if (cfg.num_token_types > 0) {
    m.token_type_embeddings =
        detail::load_tensor<T>(c, names::kTokenTypeEmbeddings, {cfg.num_token_types, d});
  }
  m.emb_ln_gamma = detail::load_tensor<T>(c, names::kEmbeddingLayerNormWeight, {d});
  m.emb_ln_beta = detail::load_tensor<T>(c, names::kEmbeddingLayerNormBias, {d});
  for (std::size_t i = 0; i < cfg.num_layers; ++i) {
    const auto name = [&](const char* rest) { return detail::render_layer_name(scheme, i, rest); };
    LayerWeights<T> l;
    l.wq = detail::load_tensor<T>(c, name("attention.self.query.weight"), {d, d});
    l.bq = detail::load_tensor<T>(c, name("attention.self.query.bias"), {d});
    l.wk = detail::load_tensor<T>(c, name("attention.self.key.weight"), {d, d});
    l.bk = detail::load_tensor<T>(c, name("attention.self.key.bias"), {d});
    l.wv = detail::load_tensor<T>(c, name("attention.self.value.weight"), {d, d});
    l.bv = detail::load_tensor<T>(c, name("attention.self.value.bias"), {d});
    l.wo = detail::load_tensor<T>(c, name("attention.output.dense.weight"), {d, d});
    l.bo = detail::load_tensor<T>(c, name("attention.output.dense.bias"), {d});
    l.ln1_gamma = detail::load_tensor<T>(c, name("attention.output.LayerNorm.weight"), {d});
    l.ln1_beta = detail::load_tensor<T>(c, name("attention.output.LayerNorm.bias"), {d});
    l.wi = detail::load_tensor<T>(c, name("intermediate.dense.weight"), {cfg.d_ff, d});
    l.bi = detail::load_tensor<T>(c, name("intermediate.dense.bias"), {cfg.d_ff});
    l.wout = detail::load_tensor<T>(c, name("output.dense.weight"), {d, cfg.d_ff});
    l.bout = detail::load_tensor<T>(c, name("output.dense.bias"), {d});
    l.ln2_gamma = detail::load_tensor<T>(c, name("output.LayerNorm.weight"), {d});
    l.ln2_beta = detail::load_tensor<T>(c, name("output.LayerNorm.bias"), {d});
    m.layers.push_back(std::move(l));
  }
  return m;
}

template <class T>
Checkpoint model_to_checkpoint(const EncoderModel<T>& m, const NamingScheme& scheme) {
  Checkpoint c;
  add_mat(c, names::kWordEmbeddings, m.word_embeddings);
  add_mat(c, names::kPositionEmbeddings, m.position_embeddings);
  if (m.token_type_embeddings.rows > 0) {
    add_mat(c, names::kTokenTypeEmbeddings, m.token_type_embeddings);
  }
  add_mat(c, names::kEmbeddingLayerNormWeight, m.emb_ln_gamma, /*as_vector=*/true);
  add_mat(c, names::kEmbeddingLayerNormBias, m.emb_ln_beta, /*as_vector=*/true);
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    const auto name = [&](const char* rest) { return scheme.layer_name(i, rest); };
    const LayerWeights<T>& l = m.layers[i];
    add_mat(c, name("attention.self.query.weight"), l.wq);
    add_mat(c, name("attention.self.query.bias"), l.bq, true);
    add_mat(c, name("attention.self.key.weight"), l.wk);
    add_mat(c, name("attention.self.key.bias"), l.bk, true);
    add_mat(c, name("attention.self.value.weight"), l.wv);
    add_mat(c, name("attention.self.value.bias"), l.bv, true);
    add_mat(c, name("attention.output.dense.weight"), l.wo);
    add_mat(c, name("attention.output.dense.bias"), l.bo, true);
    add_mat(c, name("attention.output.LayerNorm.weight"), l.ln1_gamma, true);
    add_mat(c, name("attention.output.LayerNorm.bias"), l.ln1_beta, true);
    add_mat(c, name("intermediate.dense.weight"), l.wi);
    add_mat(c, name("intermediate.dense.bias"), l.bi, true);
    add_mat(c, name("output.dense.weight"), l.wout);
    add_mat(c, name("output.dense.bias"), l.bout, true);
    add_mat(c, name("output.LayerNorm.weight"), l.ln2_gamma, true);
    add_mat(c, name("output.LayerNorm.bias"), l.ln2_beta, true);
  }
  return c;
}

template <class T>
EncoderModel<T> random_model(const EncoderConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  // Width-scaled init keeps every sublayer near unit gain, so toy-width
  // models train at sane learning rates.
  const double stddev = 1.0 / std::sqrt(static_cast<double>(cfg.d_model));
  const auto randn = [&rng, stddev](std::size_t rows, std::size_t cols) {
    Mat<T> m(rows, cols);
    for (T& v : m.v) v = static_cast<T>(rng.normal(0.0, stddev));
    return m;
  };
  const std::size_t d = cfg.d_model;
  EncoderModel<T> m;
  m.config = cfg;
  m.word_embeddings = randn(cfg.vocab_size, d);
  m.position_embeddings = randn(cfg.max_positions, d);
  if (cfg.num_token_types > 0) m.token_type_embeddings = randn(cfg.num_token_types, d);
  m.emb_ln_gamma = Mat<T>(1, d, T(1));
  m.emb_ln_beta = Mat<T>(1, d, T(0));
  for (std::size_t i = 0; i < cfg.num_layers; ++i) {
    LayerWeights<T> l;
    l.wq = randn(d, d); l.bq = Mat<T>(1, d, T(0));
    l.wk = randn(d, d); l.bk = Mat<T>(1, d, T(0));
    l.wv = randn(d, d); l.bv = Mat<T>(1, d, T(0));
    l.wo = randn(d, d); l.bo = Mat<T>(1, d, T(0));
    l.ln1_gamma = Mat<T>(1, d, T(1)); l.ln1_beta = Mat<T>(1, d, T(0));
    l.wi = randn(cfg.d_ff, d); l.bi = Mat<T>(1, cfg.d_ff, T(0));
    l.wout = randn(d, cfg.d_ff); l.bout = Mat<T>(1, d, T(0));
    l.ln2_gamma = Mat<T>(1, d, T(1)); l.ln2_beta = Mat<T>(1, d, T(0));
    m.layers.push_back(std::move(l));
  }
  return m;
}

template <class T>
ForwardResult<T> forward(const EncoderModel<T>& m, const TokenBatch& batch,
                         const ForwardOptions& options) {
  validate_batch(batch, m.config);
  for (std::size_t s : options.skip_layers) {
    if (s < 1 || s > m.num_layers()) {
      throw Error("encoder", "skip layer " + std::to_string(s) + " outside {1.." +
                                 std::to_string(m.num_layers()) + "}");
    }
  }
  Graph<T> g(/*recording=*/false);
  const ModelVars<T> vars = stage_model(g, m);

  ForwardResult<T> result;
  result.taps.cls.assign(m.num_layers() + 1,
                         Mat<T>(batch.batch_size, m.config.d_model));
  for (std::size_t b = 0; b < batch.batch_size; ++b) {
    const auto enc = encode_example(g, vars, m.config, batch, b, options);
    result.hidden.push_back(g.value(enc.final_hidden));
    for (std::size_t i = 0; i < enc.cls_taps.size(); ++i) {
      const Mat<T>& row = g.value(enc.cls_taps[i]);
      for (std::size_t c = 0; c < row.cols; ++c) result.taps.cls[i](b, c) = row(0, c);
    }
  }
  return result;
}

}  // namespace layercut

#endif  // LAYERCUT_ENCODER_HPP
