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

#include "layercut/finetune.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

namespace layercut {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw Error("finetune", msg); }

}  // namespace

template <class T>
ClassifierHead<T> ClassifierHead<T>::random(std::size_t d_model, std::size_t num_classes,
                                            std::uint64_t seed) {
  if (num_classes < 2) fail("classifier needs at least two classes");
  Rng rng(seed);
  ClassifierHead<T> head;
  head.weight = Mat<T>(num_classes, d_model);
  for (T& v : head.weight.v) v = static_cast<T>(rng.normal(0.0, 0.02));
  head.bias = Mat<T>(1, num_classes, T(0));
  return head;
}

template struct ClassifierHead<float>;
template struct ClassifierHead<double>;

Optimizer optimizer_from_name(const std::string& name) {
  if (name == "sgd") return Optimizer::kSgd;
  if (name == "sgd-momentum") return Optimizer::kSgdMomentum;
  fail("unknown optimizer \"" + name + "\" (expected sgd|sgd-momentum)");
}

const char* optimizer_name(Optimizer o) {
  return o == Optimizer::kSgd ? "sgd" : "sgd-momentum";
}

void TrainConfig::validate() const {
  if (epochs < 1) fail("epochs must be at least 1");
  // learning_rate == 0 is allowed: it is the null update used to probe
  // determinism
  if (learning_rate < 0) fail("learning rate must be non-negative");
  if (batch_size < 1) fail("batch size must be at least 1");
  if (momentum < 0 || momentum >= 1) fail("momentum must lie in [0, 1)");
}

void SyntheticTask::validate() const {
  if (vocab_size < 2) fail("task vocabulary must have at least two ids (0 is the CLS token)");
  if (seq_len < 2) fail("task sequences need at least a CLS slot and one content token");
  if (num_classes < 2) fail("task needs at least two classes");
  if (rule < 0 || rule > 3) fail("unknown task rule " + std::to_string(rule));
  if (rule == 3 && (vocab_size < 2 + 2 * num_classes || seq_len < 3)) {
    fail("rule 3 needs a signal alphabet of num_classes ids plus fillers and seq_len >= 3");
  }
  if (train_size < 1 || dev_size < 1) fail("train and dev sizes must be positive");
  // sampling without replacement must be able to terminate comfortably
  double combos;
  if (rule == 3) {
    const double signal = static_cast<double>(signal_ids());
    const double filler = static_cast<double>(vocab_size - 1 - signal_ids());
    combos = signal * std::pow(filler, static_cast<double>(seq_len - 2));
  } else {
    combos = std::pow(static_cast<double>(vocab_size - 1),
                      static_cast<double>(seq_len - 1));
  }
  if (static_cast<double>(train_size + dev_size) > 0.5 * combos) {
    fail("task space too small for disjoint train/dev of the requested size");
  }
}

std::size_t SyntheticTask::signal_ids() const {
  // rule 3 splits the content vocabulary: ids 1..2C carry the label at
  // position 1, the rest appear only as fillers
  return 2 * num_classes;
}

std::size_t SyntheticTask::label_of(const std::vector<std::size_t>& tokens) const {
  switch (rule) {
    case 0:
    case 3:
      return tokens[1] % num_classes;
    case 1: {
      // majority class over the first half of the content tokens
      std::vector<std::size_t> counts(num_classes, 0);
      const std::size_t half = std::max<std::size_t>(2, tokens.size() / 2);
      for (std::size_t t = 1; t < half; ++t) ++counts[tokens[t] % num_classes];
      return static_cast<std::size_t>(
          std::max_element(counts.begin(), counts.end()) - counts.begin());
    }
    case 2:
      return (tokens[1] + tokens[std::min<std::size_t>(2, tokens.size() - 1)]) % num_classes;
    default:
      fail("unknown task rule " + std::to_string(rule));
  }
}

SyntheticTask SyntheticTask::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open task file \"" + path + "\"");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail("task file \"" + path + "\" is not valid JSON: " + e.what());
  }
  SyntheticTask task;
  const auto read = [&j](const char* key, auto& out) {
    if (j.contains(key)) out = j[key].get<std::decay_t<decltype(out)>>();
  };
  read("vocab_size", task.vocab_size);
  read("seq_len", task.seq_len);
  read("num_classes", task.num_classes);
  read("rule", task.rule);
  read("train_size", task.train_size);
  read("dev_size", task.dev_size);
  read("seed", task.seed);
  task.validate();
  return task;
}

Dataset make_dataset(const SyntheticTask& task) {
  task.validate();
  Rng rng(task.seed);
  std::set<std::vector<std::size_t>> seen;
  std::vector<Example> examples;
  while (examples.size() < task.train_size + task.dev_size) {
    std::vector<std::size_t> tokens(task.seq_len);
    tokens[0] = 0;  // CLS slot
    if (task.rule == 3) {
      const std::size_t signal = task.signal_ids();
      tokens[1] = 1 + rng.uniform(signal);
      for (std::size_t t = 2; t < task.seq_len; ++t) {
        tokens[t] = 1 + signal + rng.uniform(task.vocab_size - 1 - signal);
      }
    } else {
      for (std::size_t t = 1; t < task.seq_len; ++t) {
        tokens[t] = 1 + rng.uniform(task.vocab_size - 1);
      }
    }
    if (!seen.insert(tokens).second) continue;
    const std::size_t label = task.label_of(tokens);
    examples.push_back({std::move(tokens), label});
  }
  Dataset data;
  data.train.assign(examples.begin(),
                    examples.begin() + static_cast<std::ptrdiff_t>(task.train_size));
  data.dev.assign(examples.begin() + static_cast<std::ptrdiff_t>(task.train_size),
                  examples.end());
  return data;
}

void write_metrics_jsonl(const TrainMetrics& metrics, std::ostream& out) {
  for (const StepRecord& s : metrics.steps) {
    json j;
    j["type"] = "step";
    j["step"] = s.step;
    j["epoch"] = s.epoch;
    j["loss"] = s.loss;
    out << j.dump() << "\n";
  }
  for (const EpochRecord& e : metrics.epochs) {
    json j;
    j["type"] = "epoch";
    j["epoch"] = e.epoch;
    j["dev_accuracy"] = e.dev_accuracy;
    j["layers"] = e.layers;
    out << j.dump() << "\n";
  }
  json summary;
  summary["type"] = "summary";
  summary["steps"] = metrics.total_steps();
  summary["final_train_accuracy"] = metrics.final_train_accuracy;
  summary["final_dev_accuracy"] = metrics.final_dev_accuracy;
  out << summary.dump() << "\n";
}

}  // namespace layercut
