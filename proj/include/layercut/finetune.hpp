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

#ifndef LAYERCUT_FINETUNE_HPP
#define LAYERCUT_FINETUNE_HPP

#include <cmath>
#include <ostream>
#include <string>

#include "layercut/contribution.hpp"
#include "layercut/encoder.hpp"
#include "layercut/surgery.hpp"

namespace layercut {

// Drop-then-fine-tune at toy scale: synthetic classification tasks, plain
// SGD with exact reverse-mode gradients, everything derived from fixed
// seeds so two runs with equal configs are bitwise identical.

template <class T>
struct ClassifierHead {
  Mat<T> weight;  // [num_classes, d_model]
  Mat<T> bias;    // [1, num_classes]

  std::size_t num_classes() const { return weight.rows; }
  std::size_t parameter_count() const { return weight.size() + bias.size(); }

  static ClassifierHead random(std::size_t d_model, std::size_t num_classes,
                               std::uint64_t seed);
};

enum class Optimizer { kSgd, kSgdMomentum };

Optimizer optimizer_from_name(const std::string& name);  // "sgd" | "sgd-momentum"
const char* optimizer_name(Optimizer o);

struct TrainConfig {
  std::size_t epochs = 3;
  double learning_rate = 0.1;
  std::size_t batch_size = 16;
  std::uint64_t seed = 1;
  Optimizer optimizer = Optimizer::kSgd;
  double momentum = 0.9;

  void validate() const;
};

/// Synthetic sequence-classification task. Labels are a deterministic
/// function of the tokens; every rule reads low positions so that early
/// layers carry signal the classifier needs.
///
/// Rules: 0 = class of the token at position 1 (content uniform everywhere;
/// solving it requires learned attention routing); 1 = majority class over
/// the first half; 2 = class of the position-1/position-2 pair sum;
/// 3 = class of the token at position 1, with positions >= 2 drawn from a
/// disjoint filler alphabet (linearly separable through the value path, so
/// it trains fast).
struct SyntheticTask {
  std::size_t vocab_size = 16;
  std::size_t seq_len = 8;
  std::size_t num_classes = 4;
  int rule = 0;
  std::size_t train_size = 256;
  std::size_t dev_size = 64;
  std::uint64_t seed = 7;

  void validate() const;
  std::size_t label_of(const std::vector<std::size_t>& tokens) const;
  std::size_t signal_ids() const;  // width of rule 3's signal alphabet

  static SyntheticTask load_file(const std::string& path);
};

struct Example {
  std::vector<std::size_t> tokens;
  std::size_t label;
};

struct Dataset {
  std::vector<Example> train;
  std::vector<Example> dev;
};

// Token sequences are sampled without replacement, so train and dev are
// disjoint by construction.
Dataset make_dataset(const SyntheticTask& task);

struct StepRecord {
  std::size_t step = 0;   // 1-based global optimization step
  std::size_t epoch = 0;  // 1-based
  double loss = 0.0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double dev_accuracy = 0.0;
  std::size_t layers = 0;  // encoder depth when the epoch ended
};

struct TrainMetrics {
  std::vector<StepRecord> steps;
  std::vector<EpochRecord> epochs;
  double final_train_accuracy = 0.0;
  double final_dev_accuracy = 0.0;

  std::size_t total_steps() const { return steps.size(); }
};

// step/epoch records plus a final summary, one JSON object per line
void write_metrics_jsonl(const TrainMetrics& metrics, std::ostream& out);

template <class T>
struct TrainedModel {
  EncoderModel<T> model;
  ClassifierHead<T> head;
  TrainMetrics metrics;
};

/// Fine-tunes encoder + head on the task with exact gradients of the mean
/// softmax cross-entropy over the CLS representation. A fresh head is
/// seeded from cfg.seed unless `initial_head` continues an earlier stage.
template <class T>
TrainedModel<T> finetune(const EncoderModel<T>& m, const SyntheticTask& task,
                         const TrainConfig& cfg,
                         const ClassifierHead<T>* initial_head = nullptr);

/// Max relative error between reverse-mode gradients and central finite
/// differences over every parameter (encoder + head). `step` defaults to
/// 1e-5 for double and 1e-2 for float; the error denominator is
/// max(|ad|, |fd|, 1).
template <class T>
double gradient_check(const EncoderModel<T>& m, const ClassifierHead<T>& head,
                      const TokenBatch& batch, const std::vector<std::size_t>& labels,
                      T step = std::is_same_v<T, double> ? T(1e-5) : T(1e-2));

template <class T>
struct TwoStageResult {
  TrainedModel<T> stage1;  // full model
  TrainedModel<T> stage2;  // after surgery
};

/// fine-tune, surgically apply the plan to the trained checkpoint, then
/// fine-tune the reduced model again (the head carries over).
template <class T>
TwoStageResult<T> drop_after_finetune(const EncoderModel<T>& m, const SyntheticTask& task,
                                      const DropPlan& plan, const TrainConfig& cfg,
                                      const NamingScheme& scheme);

/// Removes the planned layers one at a time, highest original index first,
/// after every second epoch; remaining epochs finish training the reduced
/// model. Requires epochs >= 2 * |dropped|.
template <class T>
TrainedModel<T> gradual_drop_finetune(const EncoderModel<T>& m, const SyntheticTask& task,
                                      const DropPlan& plan, const TrainConfig& cfg);

struct StrategyComparisonRow {
  Strategy strategy;
  double mean_dev_accuracy = 0.0;
  double std_dev_accuracy = 0.0;  // sample standard deviation
  std::vector<double> per_seed;
};

/// Per strategy: prune K layers from `m`, fine-tune once per seed, and
/// aggregate dev accuracy. K = 0 compares identical unpruned models.
template <class T>
std::vector<StrategyComparisonRow> compare_strategies(
    const EncoderModel<T>& m, const SyntheticTask& task, std::size_t K,
    std::span<const Strategy> strategies, std::span<const std::uint64_t> seeds,
    const TrainConfig& cfg, const NamingScheme& scheme);

// accuracy of argmax predictions over a labeled example set
template <class T>
double evaluate_accuracy(const EncoderModel<T>& m, const ClassifierHead<T>& head,
                         std::span<const Example> examples, std::size_t batch_size);

// ---- implementation ---------------------------------------------------

namespace detail {

/// One loss evaluation: stages encoder + head on a graph and wires the
/// batch's mean cross-entropy. Training and finite differences both run
/// through here, so the two sides of every gradient check share kernels.
template <class T>
class BatchGraph {
 public:
  using Id = typename Graph<T>::Id;

  BatchGraph(const EncoderModel<T>& m, const ClassifierHead<T>& head,
             const TokenBatch& batch, const std::vector<std::size_t>& labels,
             bool recording)
      : graph(recording) {
    validate_batch(batch, m.config);
    if (labels.size() != batch.batch_size) {
      throw Error("finetune", "label count does not match batch size");
    }
    for (std::size_t label : labels) {
      if (label >= head.num_classes()) {
        throw Error("finetune", "label " + std::to_string(label) + " outside " +
                                    std::to_string(head.num_classes()) + " classes");
      }
    }
    vars = stage_model(graph, m);
    head_weight = graph.input(head.weight);
    head_bias = graph.input(head.bias);
    std::vector<Id> logit_rows;
    logit_rows.reserve(batch.batch_size);
    for (std::size_t b = 0; b < batch.batch_size; ++b) {
      const auto enc = encode_example(graph, vars, m.config, batch, b);
      const Id cls = enc.cls_taps.back();
      logit_rows.push_back(graph.add_row(graph.matmul_nt(cls, head_weight), head_bias));
    }
    logits = graph.vstack(std::move(logit_rows));
    loss = graph.mean_cross_entropy(logits, labels);
  }

  double loss_value() const { return static_cast<double>(graph.value(loss)(0, 0)); }

  Graph<T> graph;
  ModelVars<T> vars;
  Id head_weight = 0, head_bias = 0;
  Id logits = 0, loss = 0;
};

// Parameters in a fixed canonical order: encoder tensors, then head.
template <class T>
std::vector<Mat<T>*> parameter_list(EncoderModel<T>& m, ClassifierHead<T>& head) {
  std::vector<Mat<T>*> params;
  m.for_each_parameter([&params](Mat<T>& p) { params.push_back(&p); });
  params.push_back(&head.weight);
  params.push_back(&head.bias);
  return params;
}

template <class T>
std::vector<typename Graph<T>::Id> parameter_ids(const BatchGraph<T>& bg) {
  std::vector<typename Graph<T>::Id> ids;
  bg.vars.for_each_parameter([&ids](typename Graph<T>::Id id) { ids.push_back(id); });
  ids.push_back(bg.head_weight);
  ids.push_back(bg.head_bias);
  return ids;
}

/// SGD with optional momentum. Velocities are positional, so they are
/// reset whenever the parameter list changes shape (gradual dropping).
template <class T>
class SgdState {
 public:
  explicit SgdState(const TrainConfig& cfg) : cfg_(cfg) {}

  void reset() { velocities_.clear(); }

  void apply(const std::vector<Mat<T>*>& params, const std::vector<Mat<T>>& grads) {
    const T lr = static_cast<T>(cfg_.learning_rate);
    if (cfg_.optimizer == Optimizer::kSgd) {
      for (std::size_t i = 0; i < params.size(); ++i) axpy(*params[i], -lr, grads[i]);
      return;
    }
    const T mu = static_cast<T>(cfg_.momentum);
    if (velocities_.empty()) {
      for (const Mat<T>* p : params) velocities_.emplace_back(p->rows, p->cols, T(0));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      Mat<T>& vel = velocities_[i];
      for (std::size_t j = 0; j < vel.v.size(); ++j) {
        vel.v[j] = mu * vel.v[j] + grads[i].v[j];
      }
      axpy(*params[i], -lr, vel);
    }
  }

 private:
  TrainConfig cfg_;
  std::vector<Mat<T>> velocities_;
};

template <class T>
TokenBatch batch_of(std::span<const Example> examples, std::span<const std::size_t> order,
                    std::size_t begin, std::size_t end, std::vector<std::size_t>& labels) {
  std::vector<std::vector<std::size_t>> rows;
  rows.reserve(end - begin);
  labels.clear();
  for (std::size_t i = begin; i < end; ++i) {
    rows.push_back(examples[order[i]].tokens);
    labels.push_back(examples[order[i]].label);
  }
  return TokenBatch::from_rows(rows);
}

template <class T>
void train_one_epoch(EncoderModel<T>& m, ClassifierHead<T>& head,
                     std::span<const Example> train, const TrainConfig& cfg, Rng& rng,
                     std::size_t epoch, std::size_t& global_step, SgdState<T>& sgd,
                     TrainMetrics& metrics) {
  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  for (std::size_t at = 0; at < train.size(); at += cfg.batch_size) {
    const std::size_t end = std::min(at + cfg.batch_size, train.size());
    std::vector<std::size_t> labels;
    const TokenBatch batch = batch_of<T>(train, order, at, end, labels);
    BatchGraph<T> bg(m, head, batch, labels, /*recording=*/true);
    const double loss = bg.loss_value();
    ++global_step;
    if (!std::isfinite(loss)) {
      throw Error("finetune", "non-finite loss at step " + std::to_string(global_step) +
                                  " (learning rate " + std::to_string(cfg.learning_rate) + ")");
    }
    bg.graph.backward(bg.loss);
    const auto ids = parameter_ids(bg);
    const auto params = parameter_list(m, head);
    std::vector<Mat<T>> grads;
    grads.reserve(ids.size());
    for (auto id : ids) grads.push_back(bg.graph.grad(id));
    sgd.apply(params, grads);
    metrics.steps.push_back({global_step, epoch, loss});
  }
}

}  // namespace detail

template <class T>
double evaluate_accuracy(const EncoderModel<T>& m, const ClassifierHead<T>& head,
                         std::span<const Example> examples, std::size_t batch_size) {
  if (examples.empty()) throw Error("finetune", "cannot evaluate on an empty set");
  std::size_t correct = 0;
  for (std::size_t at = 0; at < examples.size(); at += batch_size) {
    const std::size_t end = std::min(at + batch_size, examples.size());
    std::vector<std::vector<std::size_t>> rows;
    for (std::size_t i = at; i < end; ++i) rows.push_back(examples[i].tokens);
    const TokenBatch batch = TokenBatch::from_rows(rows);
    const ForwardResult<T> result = forward(m, batch);
    const Mat<T>& cls = result.taps.cls.back();  // batch x d_model
    for (std::size_t b = 0; b < batch.batch_size; ++b) {
      std::size_t best = 0;
      T best_score = T(0);
      for (std::size_t cl = 0; cl < head.num_classes(); ++cl) {
        T score = head.bias(0, cl);
        for (std::size_t j = 0; j < cls.cols; ++j) score += cls(b, j) * head.weight(cl, j);
        if (cl == 0 || score > best_score) {
          best = cl;
          best_score = score;
        }
      }
      if (best == examples[at + b].label) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(examples.size());
}

template <class T>
TrainedModel<T> finetune(const EncoderModel<T>& m, const SyntheticTask& task,
                         const TrainConfig& cfg, const ClassifierHead<T>* initial_head) {
  cfg.validate();
  task.validate();
  const Dataset data = make_dataset(task);

  TrainedModel<T> out;
  out.model = m;
  out.head = initial_head
                 ? *initial_head
                 : ClassifierHead<T>::random(m.config.d_model, task.num_classes,
                                             cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  if (out.head.weight.cols != m.config.d_model) {
    throw Error("finetune", "head width " + std::to_string(out.head.weight.cols) +
                                " does not match d_model " + std::to_string(m.config.d_model));
  }
  if (task.seq_len > m.config.max_positions || task.vocab_size > m.config.vocab_size) {
    throw Error("finetune", "task does not fit the model (sequence length or vocabulary)");
  }

  Rng rng(cfg.seed);
  detail::SgdState<T> sgd(cfg);
  std::size_t global_step = 0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    detail::train_one_epoch(out.model, out.head, std::span<const Example>(data.train), cfg,
                            rng, epoch, global_step, sgd, out.metrics);
    const double dev_acc =
        evaluate_accuracy(out.model, out.head, std::span<const Example>(data.dev),
                          cfg.batch_size);
    out.metrics.epochs.push_back({epoch, dev_acc, out.model.num_layers()});
  }
  out.metrics.final_train_accuracy = evaluate_accuracy(
      out.model, out.head, std::span<const Example>(data.train), cfg.batch_size);
  out.metrics.final_dev_accuracy = evaluate_accuracy(
      out.model, out.head, std::span<const Example>(data.dev), cfg.batch_size);
  return out;
}

template <class T>
double gradient_check(const EncoderModel<T>& m, const ClassifierHead<T>& head,
                      const TokenBatch& batch, const std::vector<std::size_t>& labels,
                      T step) {
  EncoderModel<T> model = m;
  ClassifierHead<T> h = head;

  detail::BatchGraph<T> bg(model, h, batch, labels, /*recording=*/true);
  bg.graph.backward(bg.loss);
  const auto ids = detail::parameter_ids(bg);
  std::vector<Mat<T>> analytic;
  analytic.reserve(ids.size());
  for (auto id : ids) analytic.push_back(bg.graph.grad(id));

  const auto params = detail::parameter_list(model, h);
  double max_rel = 0.0;
  for (std::size_t p = 0; p < params.size(); ++p) {
    Mat<T>& mat = *params[p];
    for (std::size_t i = 0; i < mat.v.size(); ++i) {
      const T saved = mat.v[i];
      mat.v[i] = saved + step;
      const double plus =
          detail::BatchGraph<T>(model, h, batch, labels, /*recording=*/false).loss_value();
      mat.v[i] = saved - step;
      const double minus =
          detail::BatchGraph<T>(model, h, batch, labels, /*recording=*/false).loss_value();
      mat.v[i] = saved;
      const double fd = (plus - minus) / (2.0 * static_cast<double>(step));
      const double ad = static_cast<double>(analytic[p].v[i]);
      const double rel = std::abs(fd - ad) / std::max({std::abs(fd), std::abs(ad), 1.0});
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

template <class T>
TwoStageResult<T> drop_after_finetune(const EncoderModel<T>& m, const SyntheticTask& task,
                                      const DropPlan& plan, const TrainConfig& cfg,
                                      const NamingScheme& scheme) {
  if (plan.num_layers != m.num_layers()) {
    throw Error("finetune", "plan is for " + std::to_string(plan.num_layers) +
                                " layers, model has " + std::to_string(m.num_layers()));
  }
  TwoStageResult<T> out;
  out.stage1 = finetune(m, task, cfg);

  const Checkpoint trained = model_to_checkpoint(out.stage1.model, scheme);
  const ModelTopology topo = infer_topology(trained, scheme);
  const Checkpoint pruned = apply_plan(trained, topo, plan);
  EncoderConfig reduced_cfg = out.stage1.model.config;
  reduced_cfg.num_layers = plan.kept.size();
  const EncoderModel<T> reduced = load_weights<T>(pruned, reduced_cfg, scheme);

  out.stage2 = finetune(reduced, task, cfg, &out.stage1.head);
  return out;
}

template <class T>
TrainedModel<T> gradual_drop_finetune(const EncoderModel<T>& m, const SyntheticTask& task,
                                      const DropPlan& plan, const TrainConfig& cfg) {
  cfg.validate();
  task.validate();
  if (plan.num_layers != m.num_layers()) {
    throw Error("finetune", "plan is for " + std::to_string(plan.num_layers) +
                                " layers, model has " + std::to_string(m.num_layers()));
  }
  if (cfg.epochs < 2 * plan.drop_count()) {
    throw Error("finetune", "gradual dropping of " + std::to_string(plan.drop_count()) +
                                " layers needs at least " +
                                std::to_string(2 * plan.drop_count()) + " epochs, got " +
                                std::to_string(cfg.epochs));
  }
  const Dataset data = make_dataset(task);

  TrainedModel<T> out;
  out.model = m;
  out.head = ClassifierHead<T>::random(m.config.d_model, task.num_classes,
                                       cfg.seed ^ 0x9e3779b97f4a7c15ULL);

  // highest original index drops first
  std::vector<std::size_t> pending(plan.dropped.rbegin(), plan.dropped.rend());
  std::vector<std::size_t> original_of(m.num_layers());
  for (std::size_t i = 0; i < original_of.size(); ++i) original_of[i] = i + 1;

  Rng rng(cfg.seed);
  detail::SgdState<T> sgd(cfg);
  std::size_t global_step = 0;
  std::size_t next_drop = 0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    detail::train_one_epoch(out.model, out.head, std::span<const Example>(data.train), cfg,
                            rng, epoch, global_step, sgd, out.metrics);
    if (epoch % 2 == 0 && next_drop < pending.size()) {
      const std::size_t original = pending[next_drop++];
      const auto it = std::find(original_of.begin(), original_of.end(), original);
      const std::size_t position = static_cast<std::size_t>(it - original_of.begin());
      out.model.drop_layer(position);
      original_of.erase(it);
      sgd.reset();  // velocity slots no longer line up with the layer list
    }
    const double dev_acc = evaluate_accuracy(
        out.model, out.head, std::span<const Example>(data.dev), cfg.batch_size);
    out.metrics.epochs.push_back({epoch, dev_acc, out.model.num_layers()});
  }
  out.metrics.final_train_accuracy = evaluate_accuracy(
      out.model, out.head, std::span<const Example>(data.train), cfg.batch_size);
  out.metrics.final_dev_accuracy = evaluate_accuracy(
      out.model, out.head, std::span<const Example>(data.dev), cfg.batch_size);
  return out;
}

template <class T>
std::vector<StrategyComparisonRow> compare_strategies(
    const EncoderModel<T>& m, const SyntheticTask& task, std::size_t K,
    std::span<const Strategy> strategies, std::span<const std::uint64_t> seeds,
    const TrainConfig& cfg, const NamingScheme& scheme) {
  if (seeds.size() < 2) {
    throw Error("finetune", "strategy comparison needs at least two seeds");
  }
  const Checkpoint base = model_to_checkpoint(m, scheme);
  const ModelTopology topo = infer_topology(base, scheme);

  std::vector<StrategyComparisonRow> rows;
  for (const Strategy s : strategies) {
    const DropPlan plan =
        K == 0 ? DropPlan::make(s, m.num_layers(), {}) : make_plan(s, m.num_layers(), K);
    const Checkpoint pruned = apply_plan(base, topo, plan);
    EncoderConfig reduced_cfg = m.config;
    reduced_cfg.num_layers = plan.kept.size();
    const EncoderModel<T> reduced = load_weights<T>(pruned, reduced_cfg, scheme);

    StrategyComparisonRow row;
    row.strategy = s;
    for (const std::uint64_t seed : seeds) {
      TrainConfig run_cfg = cfg;
      run_cfg.seed = seed;
      const TrainedModel<T> trained = finetune(reduced, task, run_cfg);
      row.per_seed.push_back(trained.metrics.final_dev_accuracy);
    }
    double mean = 0.0;
    for (double a : row.per_seed) mean += a;
    mean /= static_cast<double>(row.per_seed.size());
    double ss = 0.0;
    for (double a : row.per_seed) ss += (a - mean) * (a - mean);
    row.mean_dev_accuracy = mean;
    row.std_dev_accuracy = std::sqrt(ss / static_cast<double>(row.per_seed.size() - 1));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace layercut

#endif  // LAYERCUT_FINETUNE_HPP
